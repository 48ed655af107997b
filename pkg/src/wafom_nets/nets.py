"""Digital nets from generating matrices, dual nets and minimal dual weight."""

import heapq
import logging
import math
from pathlib import Path
from typing import Iterator, List, Optional, Tuple, Union

import numpy as np

from .basefield import (
    MAX_BASE, MatrixZb, PrimeBaseRequiredError, _check_base, _frozen, digits_matrix, is_prime,
    kernel_basis, row_reduce,
)
from .walsh import MultiIndex, PointDigits
from .weights import WEIGHT_TOL, WeightSequence, position_cost, position_costs

logger = logging.getLogger(__name__)

# Largest number of candidates an exhaustive dual walk may visit.
ENUMERATION_LIMIT = 10 ** 7
CHUNK_SIZE = 2 ** 16

ENUMERATION_MODES = ('auto', 'kernel', 'brute', 'best-first')


class MatrixFormatError(ValueError):
    """Raised for malformed generating-matrix files."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InfeasibleEnumerationError(ValueError):
    """Raised when no dual enumeration mode fits the limits."""


class GeneratingMatrices:
    """s generating matrices G_1..G_s over Z_b, each l x d with d <= l.

    Stored as one (s, l, d) array; ``entries[j, i, :]`` is row i of G_{j+1}.
    """

    __slots__ = ('base', 'entries')

    def __init__(self, base: int, entries):
        _check_base(base)
        values = np.array(entries, dtype=np.int64)
        if values.ndim != 3:
            raise ValueError(f"Expected an (s, l, d) array, got shape {values.shape}")
        s, l, d = values.shape
        if s < 1 or l < 1 or d < 1:
            raise ValueError(f"s, l and d must be positive, got {values.shape}")
        if d > l:
            raise ValueError(f"Need d <= l, got d={d}, l={l}")
        if values.min() < 0 or values.max() >= base:
            raise ValueError(f"Matrix entry out of range for base {base}")
        self.base = base
        self.entries = _frozen(values.astype(np.uint8))

    @classmethod
    def from_matrices(cls, matrices: List[MatrixZb]) -> 'GeneratingMatrices':
        if not matrices:
            raise ValueError("Need at least one generating matrix")
        base = matrices[0].base
        shape = (matrices[0].rows, matrices[0].cols)
        for m in matrices:
            if m.base != base or (m.rows, m.cols) != shape:
                raise ValueError("All generating matrices must share base and shape")
        return cls(base, np.stack([m.entries for m in matrices]))

    @classmethod
    def random(cls, base: int, s: int, l: int, d: int,
               rng: np.random.Generator) -> 'GeneratingMatrices':
        """Independent uniform entries over Z_b."""
        return cls(base, rng.integers(0, base, size=(s, l, d)))

    @classmethod
    def zeros(cls, base: int, s: int, l: int, d: int) -> 'GeneratingMatrices':
        return cls(base, np.zeros((s, l, d), dtype=np.int64))

    @classmethod
    def identity(cls, base: int, s: int, l: int, d: int) -> 'GeneratingMatrices':
        """Every G_j is I_d padded with l - d zero rows."""
        return cls(base, np.broadcast_to(np.eye(l, d, dtype=np.int64), (s, l, d)))

    @property
    def s(self) -> int:
        return int(self.entries.shape[0])

    @property
    def l(self) -> int:
        return int(self.entries.shape[1])

    @property
    def d(self) -> int:
        return int(self.entries.shape[2])

    def matrix(self, j: int) -> MatrixZb:
        """G_j, 1-based."""
        return MatrixZb(self.base, self.entries[j - 1])

    def stacked_transpose(self) -> np.ndarray:
        """[G_1^T | ... | G_s^T], shape (d, s*l); column j*l + i is row i of G_{j+1}."""
        return self.entries.astype(np.int64).transpose(2, 0, 1).reshape(self.d, -1)

    def to_text(self) -> str:
        lines = [f"{self.base} {self.s} {self.l} {self.d}"]
        for matrix in self.entries:
            lines.extend(' '.join(str(int(v)) for v in row) for row in matrix)
        return '\n'.join(lines) + '\n'

    @classmethod
    def from_text(cls, text: str) -> 'GeneratingMatrices':
        """Parse the "b s l d" header followed by s blocks of l rows of d digits.

        Blank lines are ignored; errors carry the 1-based line number.
        """
        rows = [(n, line.split()) for n, line in enumerate(text.splitlines(), start=1)
                if line.strip()]
        if not rows:
            raise MatrixFormatError("file is empty", line=1)
        header_line, header = rows[0]
        if len(header) != 4:
            raise MatrixFormatError(f"header must be 'b s l d', got '{' '.join(header)}'",
                                    line=header_line)
        try:
            b, s, l, d = (int(v) for v in header)
        except ValueError:
            raise MatrixFormatError("header fields must be integers", line=header_line)
        if b < 2 or b > MAX_BASE or s < 1 or l < 1 or d < 1 or d > l:
            raise MatrixFormatError(f"invalid header values b={b} s={s} l={l} d={d}",
                                    line=header_line)

        body = rows[1:]
        if len(body) != s * l:
            last = body[-1][0] if body else header_line
            raise MatrixFormatError(f"expected {s * l} matrix rows, found {len(body)}",
                                    line=last)
        entries = np.zeros((s, l, d), dtype=np.int64)
        for index, (n, fields) in enumerate(body):
            if len(fields) != d:
                raise MatrixFormatError(f"expected {d} digits, found {len(fields)}", line=n)
            try:
                digits = [int(v) for v in fields]
            except ValueError:
                raise MatrixFormatError("digits must be integers", line=n)
            if any(v < 0 or v >= b for v in digits):
                raise MatrixFormatError(f"digit out of range for base {b}", line=n)
            entries[index // l, index % l] = digits
        return cls(b, entries)

    @classmethod
    def read(cls, path: Union[str, Path]) -> 'GeneratingMatrices':
        return cls.from_text(Path(path).read_text())

    def write(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_text())

    def __eq__(self, other) -> bool:
        if not isinstance(other, GeneratingMatrices):
            return NotImplemented
        return self.base == other.base and np.array_equal(self.entries, other.entries)

    def __hash__(self) -> int:
        return hash((self.base, self.entries.shape, self.entries.tobytes()))

    def __repr__(self) -> str:
        return f"GeneratingMatrices(b={self.base}, s={self.s}, l={self.l}, d={self.d})"


class DigitalNet:
    """The b**d points of P(G_1, ..., G_s) in index order, as digits.

    ``digits[k, j, i]`` is xi_{j, i+1} of point k. Duplicates are kept.
    """

    __slots__ = ('matrices', 'digits')

    def __init__(self, matrices: GeneratingMatrices, digits: np.ndarray):
        self.matrices = matrices
        self.digits = _frozen(np.asarray(digits, dtype=np.uint8))

    @property
    def base(self) -> int:
        return self.matrices.base

    @property
    def size(self) -> int:
        return int(self.digits.shape[0])

    def __len__(self) -> int:
        return self.size

    def point(self, k: int) -> PointDigits:
        return PointDigits.from_array(self.digits[k], self.base)

    def points(self) -> np.ndarray:
        """Points as an (n, s) float array."""
        scale = float(self.base) ** -np.arange(1, self.digits.shape[2] + 1)
        return self.digits.astype(np.float64) @ scale


def generate_points(G: GeneratingMatrices) -> DigitalNet:
    """x_{k,j} = sum_i (G_j tr_d(k))_i b**-i for k = 0 .. b**d - 1."""
    n = G.base ** G.d
    if n > ENUMERATION_LIMIT:
        raise ValueError(f"Net of {n} points exceeds the limit of {ENUMERATION_LIMIT}")
    index_digits = digits_matrix(range(n), G.base, G.d)
    digits = np.einsum('jld,nd->njl', G.entries.astype(np.int64), index_digits) % G.base
    logger.debug("generated %d points for %r", n, G)
    return DigitalNet(G, digits)


def _index_digits(G: GeneratingMatrices, k: MultiIndex) -> np.ndarray:
    if k.base != G.base:
        raise ValueError(f"Base mismatch: index {k.base} vs net {G.base}")
    if k.dimension != G.s:
        raise ValueError(f"Dimension mismatch: index has {k.dimension} coordinates, "
                         f"net has {G.s}")
    digits = k.as_array()
    if digits.shape[1] >= G.l:
        return digits[:, :G.l]
    return np.pad(digits, [(0, 0), (0, G.l - digits.shape[1])])


def dual_syndromes(G: GeneratingMatrices, k_digits: np.ndarray) -> np.ndarray:
    """sum_j G_j^T tr_l(k_j) mod b for a (K, s, l) stack of indices, shape (K, d)."""
    flat = np.asarray(k_digits, dtype=np.int64).reshape(len(k_digits), -1)
    return (flat @ G.stacked_transpose().T) % G.base


def dual_contains(G: GeneratingMatrices, k: MultiIndex) -> bool:
    """Membership of k in the dual net, after truncating each k_j to l digits."""
    return not dual_syndromes(G, _index_digits(G, k)[None])[0].any()


class DualNetView:
    """The kernel of k -> sum_j G_j^T tr_l(k_j) over Z_b, b prime.

    Dual elements in the box are the combinations of the kernel basis.
    ``chunks`` splits the coefficient range into independent work items.
    """

    def __init__(self, G: GeneratingMatrices):
        if not is_prime(G.base):
            raise PrimeBaseRequiredError(f"Prime base required for the kernel view, got {G.base}")
        self.matrices = G
        H = MatrixZb(G.base, G.stacked_transpose())
        basis = kernel_basis(H)
        self.basis = np.array([v.digits for v in basis], dtype=np.int64).reshape(
            len(basis), G.s * G.l)
        self.rank = G.s * G.l - len(basis)

    @property
    def dimension(self) -> int:
        return int(self.basis.shape[0])

    @property
    def size(self) -> int:
        """b**(s*l - rank) elements, zero included."""
        return self.matrices.base ** self.dimension

    def chunks(self, chunk_size: int = CHUNK_SIZE) -> List[Tuple[int, int]]:
        return [(start, min(start + chunk_size, self.size))
                for start in range(0, self.size, chunk_size)]

    def elements(self, start: int, stop: int) -> np.ndarray:
        """Dual elements for coefficient vectors start..stop-1, shape (m, s, l)."""
        G = self.matrices
        if self.dimension == 0:
            return np.zeros((stop - start, G.s, G.l), dtype=np.int64)
        coeffs = digits_matrix(range(start, stop), G.base, self.dimension)
        flat = (coeffs @ self.basis) % G.base
        return flat.reshape(-1, G.s, G.l)


def _weights_of(digits: np.ndarray, costs: np.ndarray) -> np.ndarray:
    return ((digits != 0) * costs[None]).sum(axis=(1, 2))


def _choose_mode(G: GeneratingMatrices, weight_cap: float, limit: int) -> str:
    if is_prime(G.base):
        rank = len(row_reduce(G.stacked_transpose(), G.base)[1])
        if G.base ** (G.s * G.l - rank) <= limit:
            return 'kernel'
    if G.base ** (G.s * G.l) <= limit:
        return 'brute'
    if math.isfinite(weight_cap):
        return 'best-first'
    raise InfeasibleEnumerationError(
        f"Dual enumeration for b={G.base}, s={G.s}, l={G.l} needs a finite weight cap")


def _kernel_chunks(G, costs, limit):
    view = DualNetView(G)
    if view.size > limit:
        raise InfeasibleEnumerationError(
            f"Kernel walk over {view.size} elements exceeds the limit of {limit}")
    for start, stop in view.chunks():
        digits = view.elements(start, stop)
        yield digits, _weights_of(digits, costs)


def _brute_chunks(G, costs, limit):
    total = G.base ** (G.s * G.l)
    if total > limit:
        raise InfeasibleEnumerationError(
            f"Brute-force scan over {total} indices exceeds the limit of {limit}")
    for start in range(0, total, CHUNK_SIZE):
        stop = min(start + CHUNK_SIZE, total)
        digits = digits_matrix(range(start, stop), G.base, G.s * G.l).reshape(-1, G.s, G.l)
        digits = digits[~dual_syndromes(G, digits).any(axis=1)]
        yield digits, _weights_of(digits, costs)


def _best_first_chunks(G, costs, weight_cap):
    """Walk digit-support patterns in non-decreasing weight, testing each."""
    b, s, l = G.base, G.s, G.l
    flat_costs = costs.ravel()
    order = np.argsort(flat_costs, kind='stable')
    sorted_costs = flat_costs[order]
    H = G.stacked_transpose()
    n = len(order)
    # Each non-empty subset is reached once: extend by the next position,
    # or move the last position one step right.
    heap = [(float(sorted_costs[0]), (0,))]
    while heap:
        weight, subset = heapq.heappop(heap)
        if weight > weight_cap + WEIGHT_TOL:
            return
        last = subset[-1]
        if last + 1 < n:
            nxt = float(sorted_costs[last + 1])
            heapq.heappush(heap, (weight + nxt, subset + (last + 1,)))
            heapq.heappush(heap, (weight - float(sorted_costs[last]) + nxt,
                                  subset[:-1] + (last + 1,)))
        positions = order[list(subset)]
        if b == 2:
            values = np.ones((1, len(subset)), dtype=np.int64)
        else:
            values = digits_matrix(range((b - 1) ** len(subset)), b - 1, len(subset)) + 1
        hits = values[~((values @ H[:, positions].T) % b).any(axis=1)]
        if len(hits):
            flat = np.zeros((len(hits), s * l), dtype=np.int64)
            flat[:, positions] = hits
            yield flat.reshape(-1, s, l), np.full(len(hits), weight)


def iter_dual_chunks(G: GeneratingMatrices, a: WeightSequence, weight_cap: float = math.inf,
                     mode: str = 'auto', limit: int = ENUMERATION_LIMIT
                     ) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """Yield (digits, modified weights) blocks of nonzero in-box dual elements.

    Only elements with weight <= weight_cap are yielded. Best-first mode
    yields blocks in non-decreasing weight; the other modes in index order.
    """
    if a.base != G.base:
        raise ValueError(f"Base mismatch: weights {a.base} vs net {G.base}")
    if mode not in ENUMERATION_MODES:
        raise ValueError(f"Unknown enumeration mode: '{mode}'")
    if mode == 'auto':
        mode = _choose_mode(G, weight_cap, limit)
    logger.debug("enumerating dual of %r in %s mode, cap %s", G, mode, weight_cap)
    costs = position_costs(a, G.s, G.l, modified=True)

    if mode == 'best-first':
        if not math.isfinite(weight_cap):
            raise InfeasibleEnumerationError("Best-first enumeration needs a finite weight cap")
        yield from _best_first_chunks(G, costs, weight_cap)
        return
    chunks = _kernel_chunks(G, costs, limit) if mode == 'kernel' else _brute_chunks(G, costs, limit)
    for digits, weights in chunks:
        keep = digits.reshape(len(digits), -1).any(axis=1) & (weights <= weight_cap + WEIGHT_TOL)
        if keep.any():
            yield digits[keep], weights[keep]


def enumerate_dual(G: GeneratingMatrices, weight_cap: float, a: WeightSequence,
                   mode: str = 'auto', limit: int = ENUMERATION_LIMIT
                   ) -> Iterator[Tuple[MultiIndex, float]]:
    """Every nonzero dual element with k_j < b**l and weight <= weight_cap, once."""
    for digits, weights in iter_dual_chunks(G, a, weight_cap, mode, limit):
        for row, weight in zip(digits, weights):
            yield MultiIndex.from_array(row, G.base), float(weight)


def weight_floor(G: GeneratingMatrices, a: WeightSequence) -> float:
    """Lower bound max(1, a_1 + l + 1) on weights of indices outside the box."""
    return max(1.0, a.term(1) + G.l + 1)


def min_dual_weight(G: GeneratingMatrices, a: WeightSequence, truncated: bool = False,
                    mode: str = 'auto', limit: int = ENUMERATION_LIMIT) -> float:
    """delta: the smallest modified weight of a nonzero dual element.

    With ``truncated`` only the box k_j < b**l is searched (inf when it holds
    no nonzero dual element); otherwise the out-of-box floor is folded in.
    """
    floor = weight_floor(G, a)
    cap = math.inf if truncated else floor
    if mode == 'auto':
        mode = _choose_mode(G, cap, limit)
    if truncated and mode == 'best-first':
        raise InfeasibleEnumerationError("The in-box minimum needs an exhaustive mode")
    best = math.inf
    for _, weights in iter_dual_chunks(G, a, cap, mode, limit):
        best = min(best, float(weights.min()))
        if mode == 'best-first':
            # Blocks arrive in non-decreasing weight.
            break
    return best if truncated else min(best, floor)


def _coordinate_log_factors(a_j: float, b: int, start: int, stop: Optional[int]) -> float:
    """sum of log(1 + (b - 1) b**-max(i + a_j, 1)) over start <= i < stop."""
    total, i = 0.0, start
    while stop is None or i < stop:
        term = math.log1p((b - 1) * float(b) ** -position_cost(i, a_j))
        total += term
        if stop is None and i + a_j > 1 and term < 1e-18 * max(total, 1e-300):
            break
        i += 1
    return total


def box_mass(s: int, l: int, a: WeightSequence) -> float:
    """sum over k with all k_j < b**l of b**-mu_bar(k), zero included."""
    b = a.base
    return math.exp(sum(_coordinate_log_factors(a.term(j), b, 1, l + 1)
                        for j in range(1, s + 1)))


def tail_mass(s: int, l: int, a: WeightSequence) -> float:
    """sum of b**-mu_bar(k) over k with some k_j >= b**l.

    Infinite product minus box product, computed as box * expm1(log ratio).
    """
    b = a.base
    log_ratio = sum(_coordinate_log_factors(a.term(j), b, l + 1, None)
                    for j in range(1, s + 1))
    return box_mass(s, l, a) * math.expm1(log_ratio)
