"""QMC integration over digital nets, test families and convergence experiments."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from .merit.bounds import lower_bound_n
from .merit.pointwise import wafom_pointwise
from .merit.search import ConvergenceRecord, SearchTarget, cell_seed, search_net
from .nets import DigitalNet, generate_points, tail_mass
from .walsh import MultiIndex, walsh_table
from .weights import (
    WeightSequence, dick_weight, embed_smooth_to_walsh, embedding_norm_factor,
    norm_equivalence_exponent,
)

logger = logging.getLogger(__name__)

# Absolute error floor of double-precision point evaluation, per coordinate.
FLOAT_FLOOR = 1e-15

FAMILIES = ('exp-linear', 'cosine', 'walsh-pure')


class MissingCertificateError(ValueError):
    """Raised when an integrand has no usable norm certificate."""


class BoundViolationError(ValueError):
    """Raised when an empirical error exceeds its certified bound."""


@dataclass(frozen=True)
class TestFunction:
    """A closed-form integrand on [0, 1)^s.

    exp-linear is prod_j exp(c_j x_j), cosine is prod_j (1 + c_j cos(2 pi x_j))
    and walsh-pure is the real part of wal_k.
    """

    __test__ = False

    family: str
    coefficients: Tuple[float, ...] = ()
    index: Optional[MultiIndex] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"Unknown test family '{self.family}'")
        if self.family == 'walsh-pure':
            if self.index is None:
                raise ValueError("walsh-pure needs a Walsh index")
        elif not self.coefficients:
            raise ValueError(f"{self.family} needs one coefficient per coordinate")

    @classmethod
    def exp_linear(cls, c: Sequence[float]) -> 'TestFunction':
        return cls('exp-linear', tuple(float(v) for v in c))

    @classmethod
    def cosine(cls, c: Sequence[float]) -> 'TestFunction':
        return cls('cosine', tuple(float(v) for v in c))

    @classmethod
    def walsh_pure(cls, k: MultiIndex) -> 'TestFunction':
        return cls('walsh-pure', index=k)

    @property
    def dimension(self) -> int:
        if self.family == 'walsh-pure':
            return self.index.dimension
        return len(self.coefficients)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        """Values at an (N, s) array of points; walsh-pure needs digits, see values_on."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        c = np.asarray(self.coefficients)
        if self.family == 'exp-linear':
            return np.exp(x @ c)
        if self.family == 'cosine':
            return np.prod(1.0 + c[None] * np.cos(2.0 * np.pi * x), axis=1)
        raise ValueError("walsh-pure is evaluated on digits; use values_on")

    def values_on(self, P: DigitalNet) -> np.ndarray:
        """Values on every point of the net, from its exact digits."""
        if P.digits.shape[1] != self.dimension:
            raise ValueError(f"Dimension mismatch: function has {self.dimension} coordinates, "
                             f"net has {P.digits.shape[1]}")
        if self.family == 'walsh-pure':
            if self.index.base != P.base:
                raise ValueError(f"Base mismatch: index {self.index.base} vs net {P.base}")
            table = walsh_table(self.index.as_array()[None], P.digits, P.base)
            return table[0].real
        return self(P.points())

    @property
    def exact_integral(self) -> float:
        if self.family == 'exp-linear':
            # expm1(c)/c tends to 1 as c -> 0.
            return math.prod(math.expm1(c) / c if c != 0 else 1.0 for c in self.coefficients)
        if self.family == 'cosine':
            return 1.0
        return 1.0 if self.index.is_zero() else 0.0

    def norm_certificate(self, u: WeightSequence) -> Optional[float]:
        """Upper bound on the S_{s,u} norm, or None when f is not certified in it.

        exp-linear is certified when |c_j| <= u_j; its norm is then the
        integral. cosine is certified when u_j >= 2 pi, since its n-th
        derivative has L1 norm |c| (2/pi) (2 pi)**n.
        """
        if not u.is_smooth:
            raise ValueError(f"Expected smooth-space weights, got '{u.kind}'")
        if self.family == 'walsh-pure':
            return None
        u_terms = u.terms(self.dimension).tolist()
        if self.family == 'exp-linear':
            if any(abs(c) > u_j for c, u_j in zip(self.coefficients, u_terms)):
                return None
            return self.exact_integral
        certificate = 1.0
        for c, u_j in zip(self.coefficients, u_terms):
            if u_j < 2.0 * math.pi:
                return None
            value = 1.0 if abs(c) <= 1.0 else 1.0 + 2.0 * abs(c) / math.pi
            derivative = 2.0 / math.pi * abs(c) * (2.0 * math.pi / u_j)
            certificate *= max(value, derivative)
        return certificate

    def walsh_norm(self, a: WeightSequence) -> Optional[float]:
        """Norm in the Walsh space with modified weights, known for walsh-pure only."""
        if self.family != 'walsh-pure':
            return None
        if self.index.is_zero():
            return 1.0
        return float(a.base) ** dick_weight(self.index, a, modified=True)


def qmc(P: DigitalNet, f: TestFunction) -> float:
    """Equal-weight average of f over the multiset P."""
    values = f.values_on(P)
    return math.fsum(values.tolist()) / len(values)


def error_vs_bound(P: DigitalNet, f: TestFunction, u: Optional[WeightSequence] = None,
                   a: Optional[WeightSequence] = None, check: bool = True) -> Tuple[float, float]:
    """Empirical error and its certified bound.

    For smooth families the bound is
    ||f||_S * b**E * (WAFOM + tail) with Walsh weights embedded from u
    (loose variant), where E passes from W to W-bar. walsh-pure uses its
    W-bar norm under ``a`` directly.
    """
    s, l = P.digits.shape[1], P.digits.shape[2]
    if f.family == 'walsh-pure':
        if a is None:
            raise MissingCertificateError("walsh-pure needs Walsh weights a")
        norm = f.walsh_norm(a)
    else:
        if u is None:
            raise MissingCertificateError(f"{f.family} needs smooth weights u for its certificate")
        certificate = f.norm_certificate(u)
        if certificate is None:
            raise MissingCertificateError(
                f"{f.family} with coefficients {f.coefficients} has no certificate in '{u}'")
        a = embed_smooth_to_walsh(u, 'loose')
        norm = (certificate * embedding_norm_factor('loose', s, u.base)
                * float(u.base) ** norm_equivalence_exponent(s, a))

    empirical = abs(qmc(P, f) - f.exact_integral)
    merit = max(wafom_pointwise(P, a), 0.0) + tail_mass(s, l, a)
    certified = norm * merit
    if check and empirical > certified + FLOAT_FLOOR * s:
        raise BoundViolationError(
            f"empirical error {empirical!r} exceeds certified bound {certified!r}")
    return empirical, certified


def _experiment_cell(family: str, u: WeightSequence, s: int, d: int, trials: int,
                     seed: int, l_factor: int) -> ConvergenceRecord:
    b = u.base
    a = embed_smooth_to_walsh(u, 'loose')
    child = cell_seed(seed, s, d)
    G, report = search_net(s, b, d, l_factor * d, a, SearchTarget('min_wafom'), trials,
                           child, verify=False)
    P = generate_points(G)
    f = TestFunction(family, tuple(u.terms(s).tolist()))
    if f.norm_certificate(u) is None:
        empirical, certified = abs(qmc(P, f) - f.exact_integral), None
    else:
        empirical, certified = error_vs_bound(P, f, u=u)
    logger.info("cell s=%d d=%d: empirical %.3e, certified %s", s, d, empirical, certified)
    return ConvergenceRecord(
        s=s, d=d, n=b ** d, seed=child, delta=report.delta, wafom=report.wafom,
        wce_bound=report.wce_bound, lower_bound=lower_bound_n(b ** d, s, a),
        empirical=empirical, certified=certified,
    )


def convergence_experiment(family: str, u: WeightSequence, s_list: Sequence[int],
                           d_list: Sequence[int], trials: int, seed: int, jobs: int = 1,
                           l_factor: int = 2) -> List[ConvergenceRecord]:
    """Search a net per (s, d), integrate the family with c_j = u_j and record.

    Every cell derives its seed from (seed, s, d) and rows come back in
    (s, d) order, so the output does not depend on jobs.
    """
    if family == 'walsh-pure':
        raise ValueError("walsh-pure has no coefficients to derive from u")
    if family not in FAMILIES:
        raise ValueError(f"Unknown test family '{family}'")
    if not u.is_smooth:
        raise ValueError(f"Expected smooth-space weights, got '{u.kind}'")
    cells = [(s, d) for s in s_list for d in d_list]
    args = [(family, u, s, d, trials, seed, l_factor) for s, d in cells]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            futures = [executor.submit(_experiment_cell, *arg) for arg in args]
            return [f.result() for f in futures]
    return [_experiment_cell(*arg) for arg in args]


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    rows: int


def fit_rate(records: Sequence[ConvergenceRecord], against: str = 'd2',
             floor: float = FLOAT_FLOOR) -> RateFit:
    """Least-squares fit of log(empirical error) against d^2 or (log n)^2.

    Rows at or below the float floor are excluded.
    """
    if against not in ('d2', 'logn2'):
        raise ValueError(f"Fit abscissa must be 'd2' or 'logn2', got '{against}'")
    rows = [r for r in records if r.empirical is not None and r.empirical > floor]
    if len(rows) < 2:
        raise ValueError(f"Need at least two rows above the float floor, got {len(rows)}")
    if against == 'd2':
        x = [float(r.d) ** 2 for r in rows]
    else:
        x = [math.log(r.n) ** 2 for r in rows]
    y = [math.log(r.empirical) for r in rows]
    result = stats.linregress(x, y)
    return RateFit(slope=float(result.slope), intercept=float(result.intercept),
                   r_squared=float(result.rvalue) ** 2, rows=len(rows))
