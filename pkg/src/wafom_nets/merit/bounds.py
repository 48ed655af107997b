"""Error-bound constants, worst-case error bounds and lower bounds."""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Dict, Optional, Sequence, Union

from ..basefield import smallest_prime_factor
from ..weights import (
    WeightSequence, sigma_bar, tractability_exponent, trac_volume_constant,
)

logger = logging.getLogger(__name__)

REGIMES = ('conv', 'trac')


class ImpossibleRegimeError(ValueError):
    """Raised for a rate regime that admits no dimension-free bound."""


P2_MESSAGE = ("no bound C exp(-c (log n)^2) with C, c independent of s exists; "
              "use the conv regime (s-dependent c) or trac (p < 2)")


@dataclass(frozen=True)
class BoundConstants:
    """Constants of the convergence and tractability bounds for (s, a, b)."""

    base: int
    s: int
    rho: int
    sigma_bar: float
    c_prime: float
    c_bar: float
    c_conv: float
    r: Optional[float] = None
    c_vol: Optional[float] = None
    c_bd: Optional[float] = None
    c_help: Optional[float] = None

    @classmethod
    def compute(cls, s: int, a: WeightSequence) -> 'BoundConstants':
        if s < 1:
            raise ValueError(f"Dimension must be positive, got {s}")
        b = a.base
        log_b = math.log(b)
        rho = smallest_prime_factor(b)
        sb = sigma_bar(s, a)
        c_prime = sb + 2.0 * math.sqrt((b - 1) * s)
        c_bar = (math.exp(sb + log_b / 2.0 + 2.0 * (b - 1) * s / log_b)
                 / (1.0 - math.exp(-log_b / 2.0)))
        c_conv = math.log(rho) ** 2 * log_b / (2.0 * c_prime ** 2)

        params = a.tractability_params()
        if params is None:
            return cls(base=b, s=s, rho=rho, sigma_bar=sb, c_prime=c_prime,
                       c_bar=c_bar, c_conv=c_conv)
        r = params[1]
        c_vol = trac_volume_constant(a)
        growth = (2.0 * c_vol * (r + 1.0) / ((2.0 * r + 1.0) * log_b)) ** ((r + 1.0) / r)
        c_bd = (math.exp(log_b / 2.0 + c_vol * r / (2.0 * r + 1.0) * growth)
                / (1.0 - math.exp(-log_b / 2.0)))
        c_help = (math.log(rho) / c_vol) ** tractability_exponent(r)
        return cls(base=b, s=s, rho=rho, sigma_bar=sb, c_prime=c_prime, c_bar=c_bar,
                   c_conv=c_conv, r=r, c_vol=c_vol, c_bd=c_bd, c_help=c_help)

    @property
    def has_tractability(self) -> bool:
        return self.c_bd is not None

    def as_dict(self) -> Dict:
        return asdict(self)


def _check_regime(regime: str, consts: BoundConstants, a: WeightSequence) -> None:
    if regime == 'p2':
        raise ImpossibleRegimeError(P2_MESSAGE)
    if regime not in REGIMES:
        raise ValueError(f"Unknown regime '{regime}', expected one of {', '.join(REGIMES)}")
    if regime == 'trac' and not consts.has_tractability:
        raise ValueError(f"The trac regime needs a power rule a_j = a j^r + c with a > 0, "
                         f"got '{a}'")


def log_wce_upper_bound(delta: float, s: int, a: WeightSequence, regime: str = 'conv') -> float:
    """Natural log of the worst-case error bound for a net with minimal weight delta."""
    consts = BoundConstants.compute(s, a)
    _check_regime(regime, consts, a)
    leading = consts.c_bar if regime == 'conv' else consts.c_bd
    return math.log(leading) - delta * math.log(a.base) / 2.0


def wce_upper_bound(delta: float, s: int, a: WeightSequence, regime: str = 'conv') -> float:
    """C exp(-delta log(b) / 2) with C = C_bar (conv) or C_bd (trac)."""
    return math.exp(log_wce_upper_bound(delta, s, a, regime))


def log_conv_target(d: int, s: int, a: WeightSequence) -> float:
    """log(C_bar exp(-C''_s d^2)), the rate reached by a good net with b^d points."""
    consts = BoundConstants.compute(s, a)
    return math.log(consts.c_bar) - consts.c_conv * d * d


def log_trac_target(d: int, a: WeightSequence) -> float:
    """log(C_bd exp(-C_help log(b)/2 d^p)) with p = (2r + 1)/(r + 1); free of s."""
    consts = BoundConstants.compute(1, a)
    if not consts.has_tractability:
        raise ValueError(f"Weights '{a}' carry no tractability parameters")
    p = tractability_exponent(consts.r)
    return math.log(consts.c_bd) - consts.c_help * math.log(a.base) / 2.0 * d ** p


def _nonnegative_terms(s: int, a: WeightSequence) -> Sequence[float]:
    values = a.terms(s)
    if (values < 0).any():
        raise ValueError("The box lower bound needs a_j >= 0 for all j <= s")
    return values.tolist()


def _box_exponent(d: int, s: int, a: WeightSequence) -> float:
    if d < 1:
        raise ValueError(f"d must be at least 1, got {d}")
    return -sum(d * d / 2.0 + (a_j + 0.5) * d for a_j in _nonnegative_terms(s, a))


def log_lower_bound_box(d: int, s: int, a: WeightSequence) -> float:
    return _box_exponent(d, s, a) * math.log(a.base)


def lower_bound_box(d: int, s: int, a: WeightSequence) -> float:
    """b**-sum_j (d^2/2 + (a_j + 1/2) d), a lower bound on e(n, s) for n < b**(s d)."""
    return float(a.base) ** _box_exponent(d, s, a)


def _n_exponent(n: int, s: int, a: WeightSequence) -> float:
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    log_b = math.log(a.base)
    log_n = math.log(n)
    clipped = sum(max(a_j, 0.0) for a_j in a.terms(s).tolist())
    return (-log_n ** 2 / (2.0 * s * log_b ** 2)
            - (1.5 * s + clipped) * log_n / (s * log_b)
            - (s + clipped))


def log_lower_bound_n(n: int, s: int, a: WeightSequence) -> float:
    return _n_exponent(n, s, a) * math.log(a.base)


def lower_bound_n(n: int, s: int, a: WeightSequence) -> float:
    """Lower bound on the minimal worst-case error of any n-point rule."""
    return float(a.base) ** _n_exponent(n, s, a)


def information_complexity_bound(eps: float, C: float, c: float,
                                 p: float) -> Union[int, float]:
    """Points sufficient for error <= eps under a bound C exp(-c (log n)^p).

    Returns inf when the count overflows a float.
    """
    if not 0 < eps:
        raise ValueError(f"eps must be positive, got {eps}")
    if C <= 0 or c <= 0 or p <= 0:
        raise ValueError(f"Need C, c, p > 0, got C={C}, c={c}, p={p}")
    base = max((math.log(C) + math.log(1.0 / eps)) / c, 0.0)
    try:
        return math.ceil(math.exp(base ** (1.0 / p)))
    except OverflowError:
        return math.inf


def p2_witness_dimension(c: float, b: int) -> int:
    """Smallest s with 1 / (2 s log b) < c.

    For every c > 0 such an s exists, so no rate exp(-c (log n)^2) holds
    uniformly in s.
    """
    if c <= 0:
        raise ValueError(f"c must be positive, got {c}")
    if b < 2:
        raise ValueError(f"Base must be at least 2, got {b}")
    return math.floor(1.0 / (2.0 * c * math.log(b))) + 1
