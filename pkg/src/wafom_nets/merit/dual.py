"""WAFOM as a sum over the enumerated dual net."""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from ..nets import (
    ENUMERATION_LIMIT, GeneratingMatrices, InfeasibleEnumerationError, iter_dual_chunks,
)
from ..weights import WeightSequence

logger = logging.getLogger(__name__)

# Terms below this fraction of the running sum are dropped.
TERM_DROP = 1e-16


@dataclass(frozen=True)
class DualSum:
    """Truncated dual sum with its bookkeeping."""

    value: float
    terms: int
    dropped: int
    # Largest weight whose term was kept; inf when nothing was dropped.
    cap: float
    min_weight: float


def dual_sum(G: GeneratingMatrices, a: WeightSequence, mode: str = 'auto',
             limit: int = ENUMERATION_LIMIT) -> DualSum:
    """sum of b**-mu_bar(k) over nonzero dual k with k_j < b**l.

    Needs an exhaustive enumeration mode. Terms are added largest first.
    """
    if mode == 'best-first':
        raise InfeasibleEnumerationError("The full dual sum needs an exhaustive mode")
    blocks = [weights for _, weights in iter_dual_chunks(G, a, math.inf, mode, limit)]
    weights = np.sort(np.concatenate(blocks)) if blocks else np.zeros(0)
    if weights.size == 0:
        return DualSum(value=0.0, terms=0, dropped=0, cap=math.inf, min_weight=math.inf)

    terms = np.power(float(G.base), -weights)
    running = np.concatenate(([0.0], np.cumsum(terms)[:-1]))
    drop = terms < TERM_DROP * running
    kept = terms[~drop]
    cap = math.inf if not drop.any() else float(weights[~drop][-1])
    if drop.any():
        logger.debug("dropped %d of %d dual terms beyond weight %s",
                     int(drop.sum()), weights.size, cap)
    return DualSum(value=math.fsum(kept.tolist()), terms=int(kept.size),
                   dropped=int(drop.sum()), cap=cap, min_weight=float(weights[0]))


def wafom_dual(G: GeneratingMatrices, a: WeightSequence) -> float:
    """Truncated WAFOM of the net through dual enumeration."""
    return dual_sum(G, a).value


class DualMeritAnalyzer:
    """Evaluates the truncated WAFOM and in-box delta by walking the dual net."""

    def __init__(self, limit: int = ENUMERATION_LIMIT):
        self.limit = limit
        self.warnings = []
        self.suggestions = []

    def analyze(self, G: GeneratingMatrices, a: WeightSequence) -> Dict:
        """
        Enumerate the dual net when an exhaustive walk fits the limit.

        Args:
            G: Generating matrices of the net
            a: Walsh-space weights

        Returns:
            Dictionary with feasibility, the dual sum, in-box delta and notes
        """
        self.warnings = []
        self.suggestions = []
        try:
            result = dual_sum(G, a, limit=self.limit)
        except InfeasibleEnumerationError as e:
            logger.info("dual path skipped: %s", e)
            self.warnings.append("dual path infeasible, pointwise only")
            self.suggestions.append("Lower s * l or raise the enumeration cap to verify the merit")
            return {
                'feasible': False,
                'wafom': None,
                'delta_truncated': None,
                'terms': 0,
                'cap': None,
                'warnings': self.warnings,
                'suggestions': self.suggestions,
            }

        if result.dropped:
            self.warnings.append(
                f"{result.dropped} dual terms below {TERM_DROP:g} of the sum were dropped")
        return {
            'feasible': True,
            'wafom': result.value,
            'delta_truncated': result.min_weight if result.terms else None,
            'terms': result.terms,
            'cap': result.cap,
            'warnings': self.warnings,
            'suggestions': self.suggestions,
        }
