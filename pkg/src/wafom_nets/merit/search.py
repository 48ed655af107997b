"""Random search for digital nets and rate tables over (s, d) grids."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, TextIO, Tuple

import numpy as np

from ..basefield import smallest_prime_factor
from ..evaluator import MeritReport, NetEvaluator, format_value
from ..nets import ENUMERATION_LIMIT, GeneratingMatrices, generate_points, min_dual_weight
from ..weights import WEIGHT_TOL, VolumeCapExceededError, WeightSequence, vol
from .bounds import (
    BoundConstants, log_conv_target, log_trac_target, lower_bound_n, wce_upper_bound,
)
from .pointwise import wafom_pointwise

logger = logging.getLogger(__name__)

# Trials are scored in fixed batches so early stopping does not depend on jobs.
BATCH_SIZE = 16

CSV_HEADER = "s,n,d,seed,delta,wafom,empirical,certified,lower_bound"
RATE_CSV_HEADER = ("s,n,d,seed,delta,wafom,wce_bound,wce_bound_trac,lower_bound,"
                   "conv_target,trac_target")


@dataclass(frozen=True)
class SearchTarget:
    """Either ``min_wafom`` or ``delta`` with threshold M."""

    kind: str
    M: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ('min_wafom', 'delta'):
            raise ValueError(f"Unknown search target '{self.kind}'")
        if self.kind == 'delta' and (self.M is None or self.M < 0):
            raise ValueError("The delta target needs a threshold M >= 0")

    @classmethod
    def parse(cls, text: str) -> 'SearchTarget':
        """Parse "min_wafom" or "delta:<M>"."""
        kind, _, value = text.strip().partition(':')
        if kind == 'min_wafom' and not value:
            return cls('min_wafom')
        if kind == 'delta':
            try:
                return cls('delta', float(value))
            except ValueError:
                raise ValueError(f"Invalid delta threshold in target '{text}'")
        raise ValueError(f"Target must be 'min_wafom' or 'delta:<M>', got '{text}'")

    def __str__(self) -> str:
        return 'min_wafom' if self.kind == 'min_wafom' else f"delta:{format_value(self.M)}"


@dataclass
class ConvergenceRecord:
    """One (s, d) cell of a rate table or convergence experiment."""

    s: int
    d: int
    n: int
    seed: int
    delta: float
    wafom: float
    wce_bound: float
    lower_bound: float
    empirical: Optional[float] = None
    certified: Optional[float] = None
    conv_target: Optional[float] = None
    trac_target: Optional[float] = None
    wce_bound_trac: Optional[float] = None

    def csv_row(self) -> str:
        values = (self.s, self.n, self.d, self.seed, self.delta, self.wafom,
                  self.empirical, self.certified, self.lower_bound)
        return ','.join(format_value(v) for v in values)

    def rate_row(self) -> str:
        """Row under RATE_CSV_HEADER."""
        values = (self.s, self.n, self.d, self.seed, self.delta, self.wafom, self.wce_bound,
                  self.wce_bound_trac, self.lower_bound, self.conv_target, self.trac_target)
        return ','.join(format_value(v) for v in values)


def write_csv(records: Iterable[ConvergenceRecord], stream: TextIO) -> None:
    stream.write(CSV_HEADER + '\n')
    for record in records:
        stream.write(record.csv_row() + '\n')


def write_rate_csv(records: Iterable[ConvergenceRecord], stream: TextIO) -> None:
    stream.write(RATE_CSV_HEADER + '\n')
    for record in records:
        stream.write(record.rate_row() + '\n')


def trial_matrices(s: int, b: int, d: int, l: int, seed: int, trial: int) -> GeneratingMatrices:
    """The matrices of one trial, drawn from the (seed, trial) substream."""
    rng = np.random.default_rng([seed, trial])
    return GeneratingMatrices.random(b, s, l, d, rng)


def cell_seed(seed: int, *keys: int) -> int:
    """Deterministic child seed for one grid cell."""
    return int(np.random.SeedSequence([seed, *keys]).generate_state(1)[0])


def _check_delta_target(s: int, b: int, d: int, l: int, a: WeightSequence,
                        M: float) -> List[str]:
    if l < M - a.term(1) - 1:
        raise ValueError(f"Precision l={l} is below M - a_1 - 1 = {M - a.term(1) - 1}; "
                         f"the out-of-box floor cannot reach M")
    warnings = []
    rho = smallest_prime_factor(b)
    try:
        volume = vol(M, s, a)
    except VolumeCapExceededError:
        warnings.append(f"vol({format_value(float(M))}) could not be counted; "
                        f"success is not guaranteed")
    else:
        if volume > rho ** d:
            warnings.append(f"vol({format_value(float(M))}) = {volume} exceeds rho_b^d = "
                            f"{rho ** d}; success is not guaranteed")
    for warning in warnings:
        logger.warning(warning)
    return warnings


def search_net(s: int, b: int, d: int, l: int, a: WeightSequence, target: SearchTarget,
               trials: int, seed: int, jobs: int = 1, limit: int = ENUMERATION_LIMIT,
               verify: bool = True) -> Tuple[GeneratingMatrices, MeritReport]:
    """Sample uniform generating matrices and keep the best by the target.

    min_wafom keeps the smallest pointwise WAFOM over all trials. delta keeps
    the largest minimal dual weight and stops after the first batch that
    reaches M. Ties go to the lower trial index, so the result depends only
    on (seed, trials), never on jobs.
    """
    if trials < 1:
        raise ValueError(f"Need at least one trial, got {trials}")
    if a.base != b:
        raise ValueError(f"Base mismatch: weights {a.base} vs search {b}")
    warnings = []
    if target.kind == 'delta':
        warnings = _check_delta_target(s, b, d, l, a, target.M)

    def score(trial: int) -> float:
        G = trial_matrices(s, b, d, l, seed, trial)
        if target.kind == 'delta':
            return -min_dual_weight(G, a, limit=limit)
        return wafom_pointwise(generate_points(G), a)

    best_trial, best_score = None, math.inf
    executor = ThreadPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        for start in range(0, trials, BATCH_SIZE):
            batch = range(start, min(start + BATCH_SIZE, trials))
            scores = list(executor.map(score, batch)) if executor else [score(t) for t in batch]
            for trial, value in zip(batch, scores):
                if value < best_score:
                    best_trial, best_score = trial, value
            if target.kind == 'delta' and -best_score >= target.M - WEIGHT_TOL:
                break
    finally:
        if executor:
            executor.shutdown()
    logger.info("search s=%d d=%d l=%d: best trial %d, score %r",
                s, d, l, best_trial, best_score)

    G = trial_matrices(s, b, d, l, seed, best_trial)
    report = NetEvaluator(a, limit=limit).evaluate(G, verify=verify)
    report.warnings = warnings + report.warnings
    if target.kind == 'delta' and report.delta < target.M - WEIGHT_TOL:
        report.suggestions.append("Raise --trials or d, or lower M, to reach the delta target")
    return G, report


def _rate_cell(a: WeightSequence, s: int, d: int, trials: int, seed: int,
               l_factor: int) -> ConvergenceRecord:
    b = a.base
    child = cell_seed(seed, s, d)
    _, report = search_net(s, b, d, l_factor * d, a, SearchTarget('min_wafom'), trials,
                           child, verify=False)
    consts = BoundConstants.compute(s, a)
    trac_target = wce_bound_trac = None
    if consts.has_tractability:
        trac_target = math.exp(log_trac_target(d, a))
        wce_bound_trac = wce_upper_bound(report.delta, s, a, regime='trac')
    return ConvergenceRecord(
        s=s, d=d, n=b ** d, seed=child, delta=report.delta, wafom=report.wafom,
        wce_bound=wce_upper_bound(report.delta, s, a),
        lower_bound=lower_bound_n(b ** d, s, a),
        conv_target=math.exp(log_conv_target(d, s, a)),
        trac_target=trac_target,
        wce_bound_trac=wce_bound_trac,
    )


def convergence_rate_table(a: WeightSequence, d_range: Sequence[int], s_range: Sequence[int],
                           trials: int, seed: int, jobs: int = 1,
                           l_factor: int = 2) -> List[ConvergenceRecord]:
    """Best-found delta, bounds and rate targets for every (s, d) cell.

    Cells run in parallel with their own seeds; rows come back in (s, d)
    order.
    """
    cells = [(s, d) for s in s_range for d in d_range]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            futures = [executor.submit(_rate_cell, a, s, d, trials, seed, l_factor)
                       for s, d in cells]
            return [f.result() for f in futures]
    return [_rate_cell(a, s, d, trials, seed, l_factor) for s, d in cells]
