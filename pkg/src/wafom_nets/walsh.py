"""Walsh functions over Z_b, their character identities and coefficients."""

import logging
from typing import Callable, Sequence, Tuple

import numpy as np

from .basefield import Digits, digitwise_add, digitwise_sub, from_integer

logger = logging.getLogger(__name__)

# Largest quadrature grid walsh_coefficient will evaluate in one go.
GRID_CAP = 2 ** 22


class MultiIndex:
    """k = (k_1, ..., k_s) stored as one digit vector per coordinate."""

    __slots__ = ('coords',)

    def __init__(self, coords: Sequence[Digits]):
        coords = tuple(coords)
        if not coords:
            raise ValueError("A multi-index needs at least one coordinate")
        base, length = coords[0].base, coords[0].length
        for c in coords:
            if c.base != base or c.length != length:
                raise ValueError("All coordinates must share base and precision")
        self.coords = coords

    @classmethod
    def from_integers(cls, ks: Sequence[int], base: int, precision: int) -> 'MultiIndex':
        return cls(from_integer(k, base, precision) for k in ks)

    @classmethod
    def from_array(cls, digits: np.ndarray, base: int) -> 'MultiIndex':
        """Build from an (s, l) digit array."""
        return cls(Digits(base, row) for row in np.asarray(digits))

    @property
    def base(self) -> int:
        return self.coords[0].base

    @property
    def precision(self) -> int:
        return self.coords[0].length

    @property
    def dimension(self) -> int:
        return len(self.coords)

    def values(self) -> Tuple[int, ...]:
        return tuple(c.value() for c in self.coords)

    def as_array(self) -> np.ndarray:
        return np.stack([c.digits for c in self.coords]).astype(np.int64)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coords)

    def __add__(self, other: 'MultiIndex') -> 'MultiIndex':
        return MultiIndex(digitwise_add(x, y) for x, y in zip(self.coords, other.coords))

    def __sub__(self, other: 'MultiIndex') -> 'MultiIndex':
        return MultiIndex(digitwise_sub(x, y) for x, y in zip(self.coords, other.coords))

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiIndex):
            return NotImplemented
        return self.coords == other.coords

    def __hash__(self) -> int:
        return hash(self.coords)

    def __repr__(self) -> str:
        return f"MultiIndex(base={self.base}, values={self.values()})"


WalshIndex = MultiIndex


class PointDigits:
    """A point of [0, 1)^s given by its fractional b-adic digits.

    Coordinate j has value sum(xi_{j,i} * b**-i) for i = 1..l.
    """

    __slots__ = ('coords',)

    def __init__(self, coords: Sequence[Digits]):
        coords = tuple(coords)
        if not coords:
            raise ValueError("A point needs at least one coordinate")
        base = coords[0].base
        if any(c.base != base for c in coords):
            raise ValueError("All coordinates must share the same base")
        self.coords = coords

    @classmethod
    def from_floats(cls, values: Sequence[float], base: int, precision: int) -> 'PointDigits':
        """Extract digits by rounding toward zero.

        The expansion chosen is the one with infinitely many digits
        different from b - 1, i.e. the one floor() produces.
        """
        coords = []
        for x in values:
            if not 0.0 <= x < 1.0:
                raise ValueError(f"Coordinate {x} is outside [0, 1)")
            digits = []
            for _ in range(precision):
                x *= base
                digit = int(x)
                digits.append(digit)
                x -= digit
            coords.append(Digits(base, digits))
        return cls(coords)

    @classmethod
    def from_array(cls, digits: np.ndarray, base: int) -> 'PointDigits':
        """Build from an (s, l) digit array."""
        return cls(Digits(base, row) for row in np.asarray(digits))

    @property
    def base(self) -> int:
        return self.coords[0].base

    @property
    def dimension(self) -> int:
        return len(self.coords)

    def to_floats(self) -> Tuple[float, ...]:
        result = []
        for c in self.coords:
            scale = float(self.base) ** -np.arange(1, c.length + 1)
            result.append(float(np.dot(c.digits.astype(np.float64), scale)))
        return tuple(result)


def unit_roots(b: int) -> np.ndarray:
    """omega_b**e for e = 0..b-1, exact for b = 2 and b = 4."""
    if b == 2:
        return np.array([1.0, -1.0], dtype=np.complex128)
    if b == 4:
        return np.array([1.0, 1j, -1.0, -1j], dtype=np.complex128)
    return np.exp(2j * np.pi * np.arange(b) / b)


def _padded(digits: np.ndarray, length: int) -> np.ndarray:
    if digits.shape[-1] >= length:
        return digits[..., :length]
    pad = [(0, 0)] * (digits.ndim - 1) + [(0, length - digits.shape[-1])]
    return np.pad(digits, pad)


def walsh_exponents(k_digits: np.ndarray, x_digits: np.ndarray, b: int) -> np.ndarray:
    """Exponents sum_j sum_i kappa_{j,i} xi_{j,i} mod b.

    ``k_digits`` has shape (K, s, l1) and ``x_digits`` has shape (N, s, l2);
    missing digits on either side are zero. Returns a (K, N) array.
    """
    k_digits = np.asarray(k_digits, dtype=np.int64)
    x_digits = np.asarray(x_digits, dtype=np.int64)
    if k_digits.shape[1] != x_digits.shape[1]:
        raise ValueError(f"Dimension mismatch: index has {k_digits.shape[1]} coordinates, "
                         f"point has {x_digits.shape[1]}")
    length = min(k_digits.shape[2], x_digits.shape[2])
    k_flat = k_digits[:, :, :length].reshape(k_digits.shape[0], -1)
    x_flat = x_digits[:, :, :length].reshape(x_digits.shape[0], -1)
    return (k_flat @ x_flat.T) % b


def walsh_table(k_digits: np.ndarray, x_digits: np.ndarray, b: int) -> np.ndarray:
    """wal_k(x) for every index row against every point row, shape (K, N)."""
    return unit_roots(b)[walsh_exponents(k_digits, x_digits, b)]


def walsh_eval(k: MultiIndex, x: PointDigits) -> complex:
    """The k-th b-adic Walsh function at x."""
    if k.base != x.base:
        raise ValueError(f"Base mismatch: index {k.base} vs point {x.base}")
    if k.dimension != x.dimension:
        raise ValueError(f"Dimension mismatch: index has {k.dimension} coordinates, "
                         f"point has {x.dimension}")
    exponent = 0
    for kc, xc in zip(k.coords, x.coords):
        length = min(kc.length, xc.length)
        exponent += int(np.dot(kc.digits[:length].astype(np.int64), xc.digits[:length]))
    return complex(unit_roots(k.base)[exponent % k.base])


def grid_digits(b: int, level: int) -> np.ndarray:
    """Fractional digits of m / b**level for m = 0..b**level - 1, shape (b**level, level)."""
    m = np.arange(b ** level, dtype=np.int64)
    powers = b ** np.arange(level - 1, -1, -1, dtype=np.int64)
    return (m[:, None] // powers[None, :]) % b


def walsh_coefficient(f: Callable[[np.ndarray], np.ndarray], k: MultiIndex,
                      quad_level: int) -> complex:
    """Approximate the k-th Walsh coefficient of f on the b-adic grid.

    ``f`` takes an (N, s) array of points and returns N values. The integral
    of f * conj(wal_k) is replaced by the average over the left endpoints of
    the b**quad_level cells in every coordinate, which is exact when f is
    constant on those cells.
    """
    b, s = k.base, k.dimension
    for c in k.coords:
        positions = c.nonzero_positions()
        if positions and positions[-1] > quad_level:
            raise ValueError(f"quad_level {quad_level} is below the highest nonzero "
                             f"digit position {positions[-1]} of the index")

    levels = [quad_level] * s
    if b ** (s * quad_level) > GRID_CAP:
        # Coordinates the character ignores collapse to one anchored cell.
        levels = [quad_level if not c.is_zero() else 0 for c in k.coords]
        if b ** sum(levels) > GRID_CAP:
            raise ValueError(f"Quadrature grid of {b}^{sum(levels)} cells is too large")
        logger.debug("using anchored grid with levels %s", levels)

    axes_points = []
    axes_exponents = []
    for c, level in zip(k.coords, levels):
        if level == 0:
            axes_points.append(np.array([0.5]))
            axes_exponents.append(np.zeros(1, dtype=np.int64))
            continue
        digits = grid_digits(b, level)
        axes_points.append(np.arange(b ** level) / float(b ** level))
        kappa = _padded(c.digits.astype(np.int64)[None, :], level)[0]
        axes_exponents.append(digits @ kappa)

    mesh = np.meshgrid(*axes_points, indexing='ij')
    points = np.stack([m.ravel() for m in mesh], axis=1)
    exponent_mesh = np.meshgrid(*axes_exponents, indexing='ij')
    exponents = sum(e.ravel() for e in exponent_mesh) % b

    values = np.asarray(f(points))
    return complex(np.mean(values * np.conj(unit_roots(b)[exponents])))
