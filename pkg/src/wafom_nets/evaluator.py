"""Core evaluation engine for wafom-nets."""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from .merit.bounds import BoundConstants, log_wce_upper_bound
from .merit.dual import DualMeritAnalyzer
from .merit.pointwise import PointwiseMeritAnalyzer
from .nets import (
    ENUMERATION_LIMIT, GeneratingMatrices, generate_points, min_dual_weight, tail_mass,
    weight_floor,
)
from .weights import WeightSequence

logger = logging.getLogger(__name__)

# Relative and absolute agreement required between the two merit paths.
AGREEMENT_RTOL = 1e-12
AGREEMENT_ATOL = 1e-40

REPORT_FIELDS = ('wafom', 'delta', 'delta_truncated', 'tail_bound', 'wce_bound',
                 'log_wce_bound', 'wce_bound_trac', 'verified')
CSV_FIELDS = ('b', 's', 'l', 'd') + REPORT_FIELDS


def format_value(value) -> str:
    """Render a report value; floats use 17 significant digits."""
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return format(value, '.17g')
    return str(value)


@dataclass
class MeritReport:
    """Merit of one net under one weight sequence."""

    base: int
    s: int
    l: int
    d: int
    weights: str
    wafom: float
    delta: float
    tail_bound: float
    wce_bound: float
    log_wce_bound: float
    delta_truncated: Optional[float] = None
    wce_bound_trac: Optional[float] = None
    dual_wafom: Optional[float] = None
    verified: bool = False
    warnings: List[str] = field(default_factory=list)
    suggestions: List[str] = field(default_factory=list)

    def as_dict(self) -> Dict:
        def clean(value):
            if isinstance(value, float) and not math.isfinite(value):
                return None
            return value

        return {
            'b': self.base,
            's': self.s,
            'l': self.l,
            'd': self.d,
            'weights': self.weights,
            'wafom': self.wafom,
            'delta': self.delta,
            'delta_truncated': clean(self.delta_truncated),
            'tail_bound': self.tail_bound,
            'wce_bound': self.wce_bound,
            'log_wce_bound': self.log_wce_bound,
            'wce_bound_trac': self.wce_bound_trac,
            'dual_wafom': self.dual_wafom,
            'verified': self.verified,
            'warnings': list(self.warnings),
            'suggestions': list(self.suggestions),
        }

    def to_text(self) -> str:
        """Flat key=value block, one field per line."""
        lines = [f"{key}={format_value(getattr(self, key))}" for key in REPORT_FIELDS]
        lines.append(f"weights={self.weights}")
        return '\n'.join(lines)

    @staticmethod
    def csv_header() -> str:
        return ','.join(CSV_FIELDS)

    def csv_row(self) -> str:
        values = {'b': self.base, 's': self.s, 'l': self.l, 'd': self.d}
        return ','.join(format_value(values[key]) if key in values
                        else format_value(getattr(self, key)) for key in CSV_FIELDS)


class NetEvaluator:
    """Main evaluator that runs both merit paths and the bounds on one net."""

    def __init__(self, a: WeightSequence, limit: int = ENUMERATION_LIMIT):
        """
        Initialize the evaluator.

        Args:
            a: Walsh-space weights the merit is measured in
            limit: Largest exhaustive dual walk the dual path may attempt
        """
        self.weights = a
        self.limit = limit
        self.dual_analyzer = DualMeritAnalyzer(limit=limit)
        self.pointwise_analyzer = PointwiseMeritAnalyzer()

    def evaluate(self, G: GeneratingMatrices, verify: bool = True) -> MeritReport:
        """
        Evaluate a net.

        Args:
            G: Generating matrices of the net
            verify: Also run the dual enumeration path when it is feasible

        Returns:
            MeritReport with merit, minimal weight and bounds
        """
        a = self.weights
        if a.base != G.base:
            raise ValueError(f"Base mismatch: weights {a.base} vs net {G.base}")
        if a.is_smooth:
            raise ValueError("Merit needs Walsh-space weights; embed smooth weights first")

        pointwise = self.pointwise_analyzer.analyze(generate_points(G), a)
        wafom = pointwise['wafom']
        delta = min_dual_weight(G, a, limit=self.limit)
        log_bound = log_wce_upper_bound(delta, G.s, a, 'conv')

        warnings = list(pointwise['warnings'])
        suggestions = list(pointwise['suggestions'])
        dual_wafom = None
        delta_truncated = None
        verified = False
        if verify:
            dual = self.dual_analyzer.analyze(G, a)
            warnings.extend(dual['warnings'])
            suggestions.extend(dual['suggestions'])
            if dual['feasible']:
                dual_wafom = dual['wafom']
                delta_truncated = dual['delta_truncated']
                verified = math.isclose(dual_wafom, wafom, rel_tol=AGREEMENT_RTOL,
                                        abs_tol=AGREEMENT_ATOL)
                if not verified:
                    logger.warning("merit paths disagree: pointwise %r vs dual %r",
                                   wafom, dual_wafom)
                    warnings.append("dual and pointwise WAFOM disagree")

        if delta >= weight_floor(G, a):
            suggestions.append("delta is limited by the precision l; raise l to allow larger delta")

        consts = BoundConstants.compute(G.s, a)
        trac_bound = None
        if consts.has_tractability:
            trac_bound = consts.c_bd * math.exp(-delta * math.log(G.base) / 2.0)

        return MeritReport(
            base=G.base,
            s=G.s,
            l=G.l,
            d=G.d,
            weights=a.rule_string(),
            wafom=wafom,
            delta=delta,
            delta_truncated=delta_truncated,
            tail_bound=tail_mass(G.s, G.l, a),
            wce_bound=math.exp(log_bound),
            log_wce_bound=log_bound,
            wce_bound_trac=trac_bound,
            dual_wafom=dual_wafom,
            verified=verified,
            warnings=warnings,
            suggestions=suggestions,
        )
