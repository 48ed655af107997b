"""Weight sequences, Dick weights, embeddings and volume counting."""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import gamma

from .basefield import _check_base
from .walsh import MultiIndex

logger = logging.getLogger(__name__)

# Boundary tolerance for comparisons of real weights against M.
WEIGHT_TOL = 1e-9
VOL_CAP = 10 ** 8

WALSH_KINDS = ('explicit', 'power')
SMOOTH_KINDS = ('smooth-explicit', 'smooth-power')


class WeightRuleError(ValueError):
    """Raised for malformed or invalid weight rules."""


class VolumeCapExceededError(ValueError):
    """Raised when exact volume counting would exceed its cap."""


@dataclass(frozen=True)
class EmbeddingConstants:
    """m_b, M_b and C_b from the Walsh-coefficient decay of smooth functions."""

    base: int
    m_b: float
    M_b: float
    C_b: float

    @classmethod
    def from_base(cls, b: int) -> 'EmbeddingConstants':
        _check_base(b)
        m_b = 2.0 * math.sin(math.pi / b)
        M_b = 2.0 * math.sin((b // 2) * math.pi / b)
        C_b = 2.0 if b == 2 else M_b + b * m_b / (b - M_b)
        return cls(base=b, m_b=m_b, M_b=M_b, C_b=C_b)


@dataclass(frozen=True)
class WeightSequence:
    """A coordinate weight sequence with its base.

    Walsh-space kinds (``explicit``, ``power``) give a_1 <= a_2 <= ...;
    smooth-space kinds (``smooth-explicit``, ``smooth-power``) give
    u_1 >= u_2 >= ... > 0. The power rule is a_j = a * j**r + c and the
    smooth power rule is u_j = u0 * q**(j - 1).
    """

    kind: str
    base: int
    values: Tuple[float, ...] = ()
    a: float = 0.0
    r: float = 1.0
    c: float = 0.0
    u0: float = 1.0
    q: float = 1.0

    def __post_init__(self):
        _check_base(self.base)
        if self.kind in ('explicit', 'smooth-explicit'):
            if not self.values:
                raise WeightRuleError("Explicit weight list is empty")
            diffs = np.diff(self.values)
            if self.kind == 'explicit' and (diffs < 0).any():
                raise WeightRuleError("Walsh weights must be non-decreasing")
            if self.kind == 'smooth-explicit':
                if min(self.values) <= 0:
                    raise WeightRuleError("Smooth weights must be positive")
                if (diffs > 0).any():
                    raise WeightRuleError("Smooth weights must be non-increasing")
        elif self.kind == 'power':
            if self.a < 0:
                raise WeightRuleError(f"Power rule needs a >= 0, got {self.a}")
            if self.r <= 0:
                raise WeightRuleError(f"Power rule needs r > 0, got {self.r}")
        elif self.kind == 'smooth-power':
            if self.u0 <= 0:
                raise WeightRuleError(f"Smooth rule needs u0 > 0, got {self.u0}")
            if not 0 < self.q <= 1:
                raise WeightRuleError(f"Smooth rule needs 0 < q <= 1, got {self.q}")
        else:
            raise WeightRuleError(f"Unknown weight kind: {self.kind}")

    @property
    def is_smooth(self) -> bool:
        return self.kind in SMOOTH_KINDS

    @property
    def is_closed_form(self) -> bool:
        return self.kind in ('power', 'smooth-power')

    def term(self, j: int) -> float:
        """The j-th weight, 1-based."""
        if j < 1:
            raise ValueError(f"Weight index starts at 1, got {j}")
        if self.kind in ('explicit', 'smooth-explicit'):
            if j > len(self.values):
                raise ValueError(f"Explicit weight list has only {len(self.values)} terms, "
                                 f"term {j} requested")
            return float(self.values[j - 1])
        if self.kind == 'power':
            return self.a * j ** self.r + self.c
        return self.u0 * self.q ** (j - 1)

    def terms(self, s: int) -> np.ndarray:
        return np.array([self.term(j) for j in range(1, s + 1)], dtype=np.float64)

    def rule_string(self) -> str:
        """Canonical rule text accepted by parse_weight_rule."""
        if self.kind in ('explicit', 'smooth-explicit'):
            return f"{self.kind}:" + ','.join(_fmt(v) for v in self.values)
        if self.kind == 'power':
            return f"power:a={_fmt(self.a)},r={_fmt(self.r)},c={_fmt(self.c)}"
        return f"smooth-power:u0={_fmt(self.u0)},q={_fmt(self.q)}"

    def __str__(self) -> str:
        return self.rule_string()

    def tractability_params(self) -> Optional[Tuple[float, float, int]]:
        """(a, r, A) with a_j >= a * j**r for all j > A, when known."""
        if self.kind != 'power' or self.a <= 0:
            return None
        if self.c >= 0:
            return self.a, self.r, 0
        # a j^r + c >= (a/2) j^r once j^r >= -2c/a.
        A = math.ceil((-2.0 * self.c / self.a) ** (1.0 / self.r))
        return self.a / 2.0, self.r, A

    def satisfies_liminf(self, r: float) -> Optional[bool]:
        """Whether liminf a_j / j**r > 0 (or liminf log(1/u_j) / j**r > 0).

        Returns None for explicit lists, where the answer is not decidable
        from finitely many terms.
        """
        if r <= 0:
            raise ValueError(f"Exponent r must be positive, got {r}")
        if self.kind == 'power':
            return self.a > 0 and r <= self.r + WEIGHT_TOL
        if self.kind == 'smooth-power':
            return self.q < 1 and r <= 1 + WEIGHT_TOL
        return None


def _fmt(value: float) -> str:
    return format(float(value), '.17g')


def tractability_exponent(r: float) -> float:
    """p = (2r + 1) / (r + 1) reached under a_j >= a j**r."""
    return (2.0 * r + 1.0) / (r + 1.0)


def rate_to_decay(p: float) -> float:
    """r = (p - 1) / (2 - p), the weight growth needed for rate p in (1, 2)."""
    if not 1 < p < 2:
        raise ValueError(f"Rate exponent must lie in (1, 2), got {p}")
    return (p - 1.0) / (2.0 - p)


def _parse_number(key: str, text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise WeightRuleError(f"Invalid number for {key}: '{text}'")


def parse_weight_rule(text: str, base: int) -> WeightSequence:
    """Parse a weight rule string.

    Grammar::

        explicit:<a_1>,<a_2>,...
        power:a=<a>,r=<r>[,c=<c>]
        smooth-explicit:<u_1>,<u_2>,...
        smooth-power:u0=<u0>,q=<q>
    """
    kind, sep, body = text.strip().partition(':')
    if not sep:
        raise WeightRuleError(f"Weight rule must look like 'kind:params', got '{text}'")
    kind = kind.strip()

    if kind in ('explicit', 'smooth-explicit'):
        items = [item for item in body.split(',') if item.strip()]
        if not items:
            raise WeightRuleError(f"Weight rule '{text}' lists no weights")
        values = tuple(_parse_number('weight', item.strip()) for item in items)
        return WeightSequence(kind=kind, base=base, values=values)

    params: Dict[str, float] = {}
    for item in body.split(','):
        if not item.strip():
            continue
        key, eq, value = item.partition('=')
        if not eq:
            raise WeightRuleError(f"Expected key=value in weight rule, got '{item}'")
        params[key.strip()] = _parse_number(key.strip(), value.strip())

    if kind == 'power':
        allowed, required = {'a', 'r', 'c'}, {'a', 'r'}
    elif kind == 'smooth-power':
        allowed, required = {'u0', 'q'}, {'u0', 'q'}
    else:
        raise WeightRuleError(f"Unknown weight rule kind: '{kind}'")
    unknown = set(params) - allowed
    if unknown:
        raise WeightRuleError(f"Unknown parameter(s) for {kind}: {', '.join(sorted(unknown))}")
    missing = required - set(params)
    if missing:
        raise WeightRuleError(f"Missing parameter(s) for {kind}: {', '.join(sorted(missing))}")
    return WeightSequence(kind=kind, base=base, **params)


def hamming_weight(k: int, b: int) -> int:
    """Number of nonzero b-adic digits of k."""
    _check_base(b)
    if k < 0:
        raise ValueError(f"Hamming weight needs k >= 0, got {k}")
    count = 0
    while k:
        k, digit = divmod(k, b)
        if digit:
            count += 1
    return count


def position_cost(i: int, a_j: float, modified: bool = True) -> float:
    return max(i + a_j, 1.0) if modified else i + a_j


def position_costs(a: WeightSequence, s: int, l: int, modified: bool = True) -> np.ndarray:
    """Cost of a nonzero digit at position i of coordinate j, shape (s, l)."""
    costs = np.arange(1, l + 1, dtype=np.float64)[None, :] + a.terms(s)[:, None]
    return np.maximum(costs, 1.0) if modified else costs


def _digit_positions(k: Union[MultiIndex, Sequence[int]], b: int):
    if isinstance(k, MultiIndex):
        if k.base != b:
            raise ValueError(f"Base mismatch: index {k.base} vs weights {b}")
        return [c.nonzero_positions() for c in k.coords]
    positions = []
    for kj in k:
        if kj < 0:
            raise ValueError(f"Index must be non-negative, got {kj}")
        pos, i = [], 1
        while kj:
            kj, digit = divmod(kj, b)
            if digit:
                pos.append(i)
            i += 1
        positions.append(pos)
    return positions


def dick_weight(k: Union[MultiIndex, Sequence[int]], a: WeightSequence,
                modified: bool = False) -> float:
    """Generalized (or modified) Dick weight of a multi-index."""
    positions = _digit_positions(k, a.base)
    total = 0.0
    for j, pos in enumerate(positions, start=1):
        if not pos:
            continue
        a_j = a.term(j)
        total += sum(position_cost(i, a_j, modified) for i in pos)
    return total


def clamped_count(a_j: float) -> int:
    """n_j = |{i >= 1 : i + a_j <= 1}|."""
    return max(0, math.floor(1.0 - a_j + WEIGHT_TOL))


def sigma_bar(s: int, a: WeightSequence) -> float:
    """(b - 1) * sum_{j <= s} n_j."""
    return (a.base - 1) * sum(clamped_count(a.term(j)) for j in range(1, s + 1))


def sigma_bar_infinite(a: WeightSequence) -> float:
    """(b - 1) * sum_{j >= 1} n_j, finite once a_j > 0 eventually."""
    total, j = 0, 1
    while True:
        try:
            n_j = clamped_count(a.term(j))
        except ValueError:
            raise ValueError("Explicit weights end before n_j vanishes; sum is unknown")
        if n_j == 0:
            break
        total += n_j
        j += 1
        if a.kind == 'power' and a.a == 0:
            raise ValueError("Constant power rule with a_j <= 0 makes the sum diverge")
    return float((a.base - 1) * total)


def norm_equivalence_exponent(s: int, a: WeightSequence) -> float:
    """E with ||f||_W <= ||f||_Wbar <= b**E ||f||_W."""
    total = 0.0
    for j in range(1, s + 1):
        a_j = a.term(j)
        total += sum(1.0 - (i + a_j) for i in range(1, clamped_count(a_j) + 1))
    return total


def embed_smooth_to_walsh(u: WeightSequence, variant: str = 'loose') -> WeightSequence:
    """Walsh-space weights a' (loose) or a'' (tight) that contain S_{s,u}.

    The loose embedding has norm factor 1 and the tight one C_b**s, see
    embedding_norm_factor.
    """
    if not u.is_smooth:
        raise ValueError(f"Expected smooth-space weights, got '{u.kind}'")
    consts = EmbeddingConstants.from_base(u.base)
    if variant == 'loose':
        factor = consts.C_b / consts.m_b
    elif variant == 'tight':
        factor = 1.0 / consts.m_b
    else:
        raise ValueError(f"Unknown embedding variant: '{variant}'")
    log_b = math.log(u.base)

    if u.kind == 'smooth-explicit':
        values = tuple(-math.log(factor * v) / log_b for v in u.values)
        return WeightSequence(kind='explicit', base=u.base, values=values)

    # -log_b(factor u0 q^(j-1)) is affine in j.
    slope = -math.log(u.q) / log_b
    offset = -math.log(factor * u.u0) / log_b - slope
    return WeightSequence(kind='power', base=u.base, a=slope, r=1.0, c=offset)


def embedding_norm_factor(variant: str, s: int, b: int) -> float:
    if variant == 'loose':
        return 1.0
    if variant == 'tight':
        return EmbeddingConstants.from_base(b).C_b ** s
    raise ValueError(f"Unknown embedding variant: '{variant}'")


def _costs_up_to(M: float, s: int, a: WeightSequence):
    costs = []
    for j in range(1, s + 1):
        a_j = a.term(j)
        i = 1
        while position_cost(i, a_j) <= M + WEIGHT_TOL:
            costs.append(position_cost(i, a_j))
            i += 1
    return sorted(costs)


def vol(M: float, s: int, a: WeightSequence, cap: int = VOL_CAP) -> int:
    """|{k in N_0^s : modified Dick weight of k <= M}|, counted exactly.

    Digit positions are taken in order of increasing cost; each chosen
    position contributes b - 1 nonzero digit values.
    """
    if not math.isfinite(M):
        raise ValueError("Volume needs a finite weight bound")
    if M < -WEIGHT_TOL:
        return 0
    b = a.base
    # used weight (rounded) -> number of indices reaching it
    states: Dict[float, int] = {0.0: 1}
    for cost in _costs_up_to(M, s, a):
        grown = dict(states)
        for used, count in states.items():
            total = round(used + cost, 9)
            if total <= M + WEIGHT_TOL:
                grown[total] = grown.get(total, 0) + (b - 1) * count
        states = grown
        if sum(states.values()) > cap:
            raise VolumeCapExceededError(
                f"vol({M}) exceeds the cap of {cap}; use the analytic bound instead")
    result = sum(states.values())
    logger.debug("vol(%s) with s=%d, %s = %d", M, s, a, result)
    return result


def vol_bound_conv(M: float, s: int, a: WeightSequence) -> float:
    """exp(sigma_bar + 2 sqrt((b - 1) s M)), valid for all M >= 0."""
    if M < 0:
        raise ValueError(f"Volume bound needs M >= 0, got {M}")
    return math.exp(sigma_bar(s, a) + 2.0 * math.sqrt((a.base - 1) * s * M))


def trac_volume_constant(a: WeightSequence) -> float:
    """C_vol = (b - 1)(A + Gamma(1/r) a**(-1/r) / r) + sigma_bar_inf + 1."""
    params = a.tractability_params()
    if params is None:
        raise ValueError(f"Weights '{a}' do not satisfy a_j >= a j^r with a > 0")
    a_coef, r, A = params
    if r <= 0:
        raise ValueError(f"Exponent r must be positive, got {r}")
    return ((a.base - 1) * (A + gamma(1.0 / r) / r * a_coef ** (-1.0 / r))
            + sigma_bar_infinite(a) + 1.0)


def vol_bound_trac(M: float, a: WeightSequence) -> float:
    """exp(C_vol * M**((r + 1) / (2r + 1))), independent of s."""
    if M < 0:
        raise ValueError(f"Volume bound needs M >= 0, got {M}")
    c_vol = trac_volume_constant(a)
    r = a.tractability_params()[1]
    return math.exp(c_vol * M ** ((r + 1.0) / (2.0 * r + 1.0)))


# Largest s * l for the support-pattern sum in power_series_check.
SERIES_POSITIONS_LIMIT = 22


def power_series_check(X: float, s: int, a: WeightSequence, l: int,
                       modified: bool = False) -> Tuple[float, float]:
    """Both sides of sum_k X**mu(k) = prod_{j,i} (1 + (b - 1) X**(i + a_j)).

    The sum runs over all k with k_j < b**l. It is taken over digit-support
    patterns: a pattern S of nonzero positions stands for (b - 1)**|S|
    indices, all of weight sum_{(j,i) in S} cost(j, i).
    """
    if not -1 < X < 1:
        raise ValueError(f"Power series identity needs |X| < 1, got {X}")
    costs = position_costs(a, s, l, modified).ravel()
    if X < 0 and not np.allclose(costs, np.round(costs)):
        raise ValueError("Negative X needs integer weights")
    n = costs.size
    if n > SERIES_POSITIONS_LIMIT:
        raise ValueError(f"s * l = {n} positions is too many to sum exhaustively")
    b = a.base

    patterns = (np.arange(2 ** n, dtype=np.int64)[:, None] >> np.arange(n)) & 1
    exponents = patterns @ costs
    multiplicity = float(b - 1) ** patterns.sum(axis=1)
    series = float(np.sum(multiplicity * np.power(float(X), exponents)))
    product = float(np.prod(1.0 + (b - 1) * np.power(float(X), costs)))
    return series, product


def gamma_sum_bound_check(X: float, s: int, a: float, r: float) -> Tuple[float, float]:
    """(sum_{j <= s} X**(a j**r), Gamma(1/r) / r * (a log(1/X))**(-1/r))."""
    if not 0 < X < 1:
        raise ValueError(f"Need 0 < X < 1, got {X}")
    if a <= 0 or r <= 0:
        raise ValueError(f"Need a > 0 and r > 0, got a={a}, r={r}")
    j = np.arange(1, s + 1, dtype=np.float64)
    total = float(np.sum(X ** (a * j ** r)))
    bound = float(gamma(1.0 / r) / r * (a * math.log(1.0 / X)) ** (-1.0 / r))
    return total, bound


def walsh_decay_bound(f_norm: float, k: Union[MultiIndex, Sequence[int]],
                      u: WeightSequence) -> float:
    """Bound on |f^(k)| for f in S_{s,u} with ||f|| <= f_norm."""
    if not u.is_smooth:
        raise ValueError(f"Expected smooth-space weights, got '{u.kind}'")
    b = u.base
    consts = EmbeddingConstants.from_base(b)
    positions = _digit_positions(k, b)
    mu_0 = sum(sum(pos) for pos in positions)
    bound = f_norm * float(b) ** -mu_0
    for j, pos in enumerate(positions, start=1):
        v = len(pos)
        bound *= (u.term(j) / consts.m_b) ** v * consts.C_b ** min(1, v)
    return bound
