"""WAFOM through the character-sum product over the points."""

import logging
from fractions import Fraction
from typing import Dict, List, Sequence

import mpmath
import numpy as np

from ..nets import DigitalNet
from ..weights import WeightSequence, position_costs

logger = logging.getLogger(__name__)

# Decimal digits carried when digit costs are not integers.
WORK_DPS = 60


def point_factors(P: DigitalNet, a: WeightSequence) -> np.ndarray:
    """prod_{j,i} (1 + b**-cost(j,i) * (b [xi_{j,i} = 0] - 1)) for every point, in floats."""
    b = P.base
    if a.base != b:
        raise ValueError(f"Base mismatch: weights {a.base} vs net {b}")
    _, s, l = P.digits.shape
    scale = np.power(float(b), -position_costs(a, s, l, modified=True))
    zero_factor = 1.0 + (b - 1) * scale
    nonzero_factor = 1.0 - scale
    factors = np.where(P.digits == 0, zero_factor[None], nonzero_factor[None])
    return factors.reshape(len(factors), -1).prod(axis=1)


def _coordinate_columns(digits: np.ndarray, zero_terms: Sequence[Sequence],
                        nonzero_terms: Sequence[Sequence], one) -> List[np.ndarray]:
    """Per coordinate, the product over digit positions at every point.

    Points sharing a zero-digit pattern in a coordinate share the product,
    so each pattern is multiplied out once.
    """
    columns = []
    for j in range(digits.shape[1]):
        patterns, inverse = np.unique(digits[:, j, :] == 0, axis=0, return_inverse=True)
        values = np.empty(len(patterns), dtype=object)
        for m, pattern in enumerate(patterns.tolist()):
            value = one
            for i, is_zero in enumerate(pattern):
                value = value * (zero_terms[j][i] if is_zero else nonzero_terms[j][i])
            values[m] = value
        columns.append(values[inverse.reshape(-1)])
    return columns


def _product_sum(columns: List[np.ndarray]):
    products = columns[0]
    for column in columns[1:]:
        products = products * column
    return sum(products.tolist())


def _wafom_exact(P: DigitalNet, costs: np.ndarray) -> float:
    # Every factor is (b**c + b - 1) / b**c or (b**c - 1) / b**c.
    b = P.base
    powers = [[b ** int(round(c)) for c in row] for row in costs.tolist()]
    zero_terms = [[p + b - 1 for p in row] for row in powers]
    nonzero_terms = [[p - 1 for p in row] for row in powers]
    total = _product_sum(_coordinate_columns(P.digits, zero_terms, nonzero_terms, 1))
    denominator = P.size * b ** int(round(float(costs.sum())))
    return float(Fraction(total - denominator, denominator))


def _wafom_extended(P: DigitalNet, costs: np.ndarray) -> float:
    b = P.base
    with mpmath.workdps(WORK_DPS):
        scale = [[mpmath.power(b, -mpmath.mpf(c)) for c in row] for row in costs.tolist()]
        zero_terms = [[1 + (b - 1) * t for t in row] for row in scale]
        nonzero_terms = [[1 - t for t in row] for row in scale]
        total = _product_sum(_coordinate_columns(P.digits, zero_terms, nonzero_terms,
                                                 mpmath.mpf(1)))
        return float(total / P.size - 1)


def wafom_pointwise(P: DigitalNet, a: WeightSequence) -> float:
    """Truncated WAFOM as -1 + mean of the per-point products.

    The mean cancels against 1, so it is never formed in floats: integer
    costs are accumulated exactly over the common denominator b**sum(costs),
    other costs in mpmath at WORK_DPS digits. The result is correctly
    rounded in the integer case.
    """
    b = P.base
    if a.base != b:
        raise ValueError(f"Base mismatch: weights {a.base} vs net {b}")
    _, s, l = P.digits.shape
    costs = position_costs(a, s, l, modified=True)
    if np.array_equal(costs, np.round(costs)):
        return _wafom_exact(P, costs)
    logger.debug("non-integer digit costs, using %d-digit arithmetic", WORK_DPS)
    return _wafom_extended(P, costs)


class PointwiseMeritAnalyzer:
    """Production merit path: O(b^d * s * l) product over the net."""

    def __init__(self):
        self.warnings = []
        self.suggestions = []

    def analyze(self, P: DigitalNet, a: WeightSequence) -> Dict:
        self.warnings = []
        self.suggestions = []
        value = wafom_pointwise(P, a)
        if value < 0:
            # Extended precision can leave a tiny negative remainder.
            logger.debug("clamping pointwise WAFOM %r to zero", value)
            value = 0.0
        return {
            'wafom': value,
            'points': P.size,
            'warnings': self.warnings,
            'suggestions': self.suggestions,
        }
