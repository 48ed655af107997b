"""b-adic digit arithmetic and linear algebra over Z_b."""

import logging
from typing import Iterable, List, Sequence

import numpy as np

logger = logging.getLogger(__name__)

# Digits are stored one byte each.
MAX_BASE = 255
MAX_PRECISION = 64


class PrimeBaseRequiredError(ValueError):
    """Raised when an operation needs Z_b to be a field."""


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def smallest_prime_factor(b: int) -> int:
    """Return rho_b, the smallest prime factor of b."""
    if b < 2:
        raise ValueError(f"Base must be at least 2, got {b}")
    p = 2
    while p * p <= b:
        if b % p == 0:
            return p
        p += 1
    return b


def is_prime(b: int) -> bool:
    return b >= 2 and smallest_prime_factor(b) == b


def _check_base(b: int) -> None:
    if b < 2:
        raise ValueError(f"Base must be at least 2, got {b}")
    if b > MAX_BASE:
        raise ValueError(f"Base {b} exceeds the supported maximum {MAX_BASE}")


class Digits:
    """Fixed-precision little-endian digit vector of a non-negative integer.

    Entry ``i`` (0-based) holds kappa_{i+1}, so that
    ``k = sum(digits[i] * b**i)``.
    """

    __slots__ = ('base', 'digits')

    def __init__(self, base: int, digits: Iterable[int]):
        _check_base(base)
        values = np.asarray(list(digits) if not isinstance(digits, np.ndarray) else digits,
                            dtype=np.int64)
        if values.ndim != 1:
            raise ValueError("Digits must be a one-dimensional vector")
        if values.size and (values.min() < 0 or values.max() >= base):
            raise ValueError(f"Digit out of range for base {base}: {values.tolist()}")
        self.base = base
        self.digits = _frozen(values.astype(np.uint8))

    @property
    def length(self) -> int:
        return int(self.digits.size)

    def value(self) -> int:
        total = 0
        for digit in reversed(self.digits.tolist()):
            total = total * self.base + digit
        return total

    def is_zero(self) -> bool:
        return not self.digits.any()

    def nonzero_positions(self) -> List[int]:
        """1-based positions i with kappa_i != 0."""
        return [i + 1 for i in np.flatnonzero(self.digits).tolist()]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Digits):
            return NotImplemented
        return self.base == other.base and np.array_equal(self.digits, other.digits)

    def __hash__(self) -> int:
        return hash((self.base, self.digits.tobytes()))

    def __len__(self) -> int:
        return self.length

    def __repr__(self) -> str:
        return f"Digits(base={self.base}, digits={self.digits.tolist()})"


def from_integer(k: int, b: int, l: int) -> Digits:
    """Expand k < b**l into its l least significant b-adic digits."""
    _check_base(b)
    if l < 1 or l > MAX_PRECISION:
        raise ValueError(f"Precision must be in [1, {MAX_PRECISION}], got {l}")
    if k < 0:
        raise ValueError(f"Index must be non-negative, got {k}")
    if k >= b ** l:
        raise ValueError(f"Index {k} does not fit in {l} digits of base {b}")
    digits = []
    for _ in range(l):
        k, digit = divmod(k, b)
        digits.append(digit)
    return Digits(b, digits)


def truncate(k: int, b: int, l: int) -> Digits:
    """tr_l(k): the first l digits of k, dropping the rest."""
    return from_integer(k % (b ** l), b, l)


def _check_same_shape(k: Digits, k2: Digits) -> None:
    if k.base != k2.base:
        raise ValueError(f"Base mismatch: {k.base} vs {k2.base}")
    if k.length != k2.length:
        raise ValueError(f"Length mismatch: {k.length} vs {k2.length}")


def digitwise_add(k: Digits, k2: Digits) -> Digits:
    """k (+) k2: digitwise addition modulo b."""
    _check_same_shape(k, k2)
    total = (k.digits.astype(np.int64) + k2.digits) % k.base
    return Digits(k.base, total)


def digitwise_sub(k: Digits, k2: Digits) -> Digits:
    """k (-) k2: digitwise subtraction modulo b."""
    _check_same_shape(k, k2)
    diff = (k.digits.astype(np.int64) - k2.digits) % k.base
    return Digits(k.base, diff)


class MatrixZb:
    """Immutable rows x cols matrix with entries in Z_b."""

    __slots__ = ('base', 'entries')

    def __init__(self, base: int, entries):
        _check_base(base)
        values = np.array(entries, dtype=np.int64)
        if values.ndim != 2:
            raise ValueError(f"Matrix must be two-dimensional, got shape {values.shape}")
        if values.size and (values.min() < 0 or values.max() >= base):
            raise ValueError(f"Matrix entry out of range for base {base}")
        self.base = base
        self.entries = _frozen(values.astype(np.uint8))

    @property
    def rows(self) -> int:
        return int(self.entries.shape[0])

    @property
    def cols(self) -> int:
        return int(self.entries.shape[1])

    @classmethod
    def zeros(cls, base: int, rows: int, cols: int) -> 'MatrixZb':
        return cls(base, np.zeros((rows, cols), dtype=np.int64))

    @classmethod
    def identity(cls, base: int, rows: int, cols: int = None) -> 'MatrixZb':
        """Identity padded with zero rows when rows > cols."""
        cols = rows if cols is None else cols
        return cls(base, np.eye(rows, cols, dtype=np.int64))

    def transpose(self) -> 'MatrixZb':
        return MatrixZb(self.base, self.entries.T)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MatrixZb):
            return NotImplemented
        return self.base == other.base and np.array_equal(self.entries, other.entries)

    def __hash__(self) -> int:
        return hash((self.base, self.entries.shape, self.entries.tobytes()))

    def __repr__(self) -> str:
        return f"MatrixZb(base={self.base}, entries={self.entries.tolist()})"


def mat_vec(G: MatrixZb, v: Digits) -> Digits:
    """Matrix-vector product over Z_b."""
    if G.base != v.base:
        raise ValueError(f"Base mismatch: matrix {G.base} vs vector {v.base}")
    if G.cols != v.length:
        raise ValueError(f"Dimension mismatch: matrix has {G.cols} columns, vector has {v.length} digits")
    product = (G.entries.astype(np.int64) @ v.digits.astype(np.int64)) % G.base
    return Digits(G.base, product)


def row_reduce(entries: np.ndarray, p: int):
    """Reduced row echelon form over the prime field Z_p.

    Returns the reduced matrix and the list of pivot columns.
    """
    reduced = np.array(entries, dtype=np.int64) % p
    rows, cols = reduced.shape
    pivots = []
    row = 0
    for col in range(cols):
        if row == rows:
            break
        candidates = np.flatnonzero(reduced[row:, col])
        if candidates.size == 0:
            continue
        pivot = row + int(candidates[0])
        if pivot != row:
            reduced[[row, pivot]] = reduced[[pivot, row]]
        inverse = pow(int(reduced[row, col]), -1, p)
        reduced[row] = (reduced[row] * inverse) % p
        for other in range(rows):
            if other != row and reduced[other, col]:
                reduced[other] = (reduced[other] - reduced[other, col] * reduced[row]) % p
        pivots.append(col)
        row += 1
    return reduced, pivots


def rank(A: MatrixZb) -> int:
    if not is_prime(A.base):
        raise PrimeBaseRequiredError(f"Prime base required for rank, got {A.base}")
    _, pivots = row_reduce(A.entries, A.base)
    return len(pivots)


def kernel_basis(A: MatrixZb) -> List[Digits]:
    """Basis of {v : A v = 0} over Z_b; b must be prime."""
    p = A.base
    if not is_prime(p):
        raise PrimeBaseRequiredError(f"Prime base required for kernel_basis, got {p}")
    reduced, pivots = row_reduce(A.entries, p)
    free = [c for c in range(A.cols) if c not in pivots]
    basis = []
    for f in free:
        vector = np.zeros(A.cols, dtype=np.int64)
        vector[f] = 1
        for r, c in enumerate(pivots):
            vector[c] = (-reduced[r, f]) % p
        basis.append(Digits(p, vector))
    logger.debug("kernel of %dx%d matrix over Z_%d has dimension %d",
                 A.rows, A.cols, p, len(basis))
    return basis


def digits_matrix(indices: Sequence[int], b: int, length: int) -> np.ndarray:
    """Little-endian digits of many integers as an (n, length) array."""
    values = np.asarray(indices, dtype=np.int64)
    powers = b ** np.arange(length, dtype=np.int64)
    return (values[:, None] // powers[None, :]) % b
