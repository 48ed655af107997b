"""CLI interface for wafom-nets."""

import argparse
import json
import logging
import math
import sys
from contextlib import ExitStack
from typing import Dict, List, Optional, TextIO

from . import __version__
from .config import RunConfig, resolve_jobs, resolve_seed
from .evaluator import NetEvaluator, format_value
from .integrate import convergence_experiment, fit_rate
from .merit.bounds import (
    BoundConstants, ImpossibleRegimeError, P2_MESSAGE, REGIMES, information_complexity_bound,
    log_conv_target, log_lower_bound_box, log_lower_bound_n, log_trac_target, lower_bound_box,
    lower_bound_n,
)
from .merit.search import (
    SearchTarget, convergence_rate_table, search_net, write_csv, write_rate_csv,
)
from .nets import GeneratingMatrices
from .weights import (
    WEIGHT_TOL, VolumeCapExceededError, WeightSequence, embed_smooth_to_walsh, parse_weight_rule,
    rate_to_decay, tractability_exponent, vol, vol_bound_conv, vol_bound_trac,
)

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_TARGET_MISSED = 2

EPILOG = """
Weight rules:
  explicit:<a_1>,<a_2>,...          Walsh weights, non-decreasing
  power:a=<a>,r=<r>[,c=<c>]         a_j = a j^r + c, a >= 0, r > 0
  smooth-explicit:<u_1>,<u_2>,...   smooth weights, positive non-increasing
  smooth-power:u0=<u0>,q=<q>        u_j = u0 q^(j-1), 0 < q <= 1
  Smooth rules given to search, merit, bounds or vol are embedded into
  Walsh weights first (loose embedding).

Examples:
  # Find a net with minimal dual weight >= 3
  wafom-nets search --b 2 --s 1 --d 3 --l 8 --weights power:a=0,r=1,c=0 \\
      --target delta:3 --trials 50 --seed 7 --output net.txt

  # Merit of a stored net
  wafom-nets merit net.txt --weights power:a=0,r=1,c=0

  # Bounds and constants
  wafom-nets bounds --s 2 --n 1024 --weights power:a=1,r=1 --regime trac

  # Convergence experiment to CSV
  wafom-nets converge --weights smooth-power:u0=0.5,q=0.5 --seed 1 --output rates.csv

  # Rate table: bounds of the best nets against both targets
  wafom-nets converge --table --weights power:a=1,r=1 --s-list 1,4 --seed 1

  # Volume of the weight ball
  wafom-nets vol --M 4 --s 2 --weights power:a=0,r=1

Report keys (merit, search):
  wafom, delta, delta_truncated, tail_bound, wce_bound, log_wce_bound,
  wce_bound_trac, verified, weights

CSV columns (converge):
  s,n,d,seed,delta,wafom,empirical,certified,lower_bound

CSV columns (converge --table):
  s,n,d,seed,delta,wafom,wce_bound,wce_bound_trac,lower_bound,conv_target,trac_target

Exit codes:
  0 - Success
  1 - Invalid input, configuration or unwritable path
  2 - Search finished without reaching the delta target
"""


class ArgumentParser(argparse.ArgumentParser):
    """Parser whose usage errors exit with 1; 2 means a missed target."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> List[int]:
    values = []
    for part in text.split(','):
        part = part.strip()
        if not part:
            continue
        if '..' in part:
            lo, hi = part.split('..', 1)
            values.extend(range(int(lo), int(hi) + 1))
        else:
            values.append(int(part))
    if not values:
        raise argparse.ArgumentTypeError(f"empty list: '{text}'")
    return values


def build_parser() -> ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('-v', '--verbose', action='store_true',
                        help='Log progress at DEBUG level on stderr')

    parser = ArgumentParser(
        prog='wafom-nets',
        description='Construct, evaluate and search digital nets over Z_b',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=EPILOG,
    )
    parser.add_argument('--version', action='version', version=f'wafom-nets {__version__}')
    sub = parser.add_subparsers(dest='command', metavar='command')
    sub.required = True

    search = sub.add_parser('search', parents=[common], help='Random search for a good net')
    search.add_argument('--b', type=int, default=2, help='Base (default: 2)')
    search.add_argument('--s', type=int, required=True, help='Dimension')
    search.add_argument('--d', type=int, required=True, help='The net has b^d points')
    search.add_argument('--l', type=int, help='Precision (default: 2d)')
    search.add_argument('--weights', default='power:a=0,r=1,c=0', help='Weight rule')
    search.add_argument('--target', default='min_wafom', help="'min_wafom' or 'delta:<M>'")
    search.add_argument('--trials', type=int, default=16, help='Number of random trials')
    search.add_argument('--seed', type=int, help='Master seed (default: drawn from entropy)')
    search.add_argument('--jobs', type=int, help='Worker threads (default: $WAFOM_NETS_JOBS or cores)')
    search.add_argument('--output', help='Write the matrices here instead of stdout')
    search.add_argument('--json', action='store_true', help='Output results in JSON format')

    merit = sub.add_parser('merit', parents=[common], help='Merit report of a stored net')
    merit.add_argument('matrix', help='Matrix file ("b s l d" header, then rows)')
    merit.add_argument('--weights', default='power:a=0,r=1,c=0', help='Weight rule')
    merit.add_argument('--cap', type=int, default=None,
                       help='Largest exhaustive dual walk (default: 10^7)')
    merit.add_argument('--json', action='store_true', help='Output results in JSON format')

    bounds = sub.add_parser('bounds', parents=[common], help='Bounds and constants')
    bounds.add_argument('--b', type=int, default=2, help='Base (default: 2)')
    bounds.add_argument('--s', type=int, required=True, help='Dimension')
    size = bounds.add_mutually_exclusive_group(required=True)
    size.add_argument('--n', type=int, help='Number of points')
    size.add_argument('--d', type=int, help='Use n = b^d points')
    bounds.add_argument('--weights', default='power:a=0,r=1,c=0', help='Weight rule')
    bounds.add_argument('--regime', default='conv', help="'conv' or 'trac' ('p2' is refused)")
    bounds.add_argument('--epsilon', type=float, help='Also bound the points needed for this error')
    bounds.add_argument('--json', action='store_true', help='Output results in JSON format')

    converge = sub.add_parser('converge', parents=[common], help='Convergence experiment')
    converge.add_argument('--b', type=int, default=2, help='Base (default: 2)')
    converge.add_argument('--family', default='exp-linear', help="'exp-linear' or 'cosine'")
    converge.add_argument('--weights', default='smooth-power:u0=0.5,q=0.5',
                          help='Smooth weight rule (default: u_j = 2^-j)')
    converge.add_argument('--s-list', type=_int_list, default=[1, 2],
                          help='Dimensions, e.g. 1,2,4 (default: 1,2)')
    converge.add_argument('--d-list', type=_int_list, default=list(range(2, 9)),
                          help='Sizes, e.g. 2..8 (default: 2..8)')
    converge.add_argument('--trials', type=int, default=16, help='Search trials per cell')
    converge.add_argument('--seed', type=int, help='Master seed (default: drawn from entropy)')
    converge.add_argument('--jobs', type=int, help='Worker threads (default: $WAFOM_NETS_JOBS or cores)')
    converge.add_argument('--output', help='CSV path (default: stdout)')
    converge.add_argument('--table', action='store_true',
                          help='Rate table of bounds and targets instead of integration errors')

    volume = sub.add_parser('vol', parents=[common], help='Volume of the weight ball')
    volume.add_argument('--b', type=int, default=2, help='Base (default: 2)')
    volume.add_argument('--s', type=int, required=True, help='Dimension')
    volume.add_argument('--M', type=float, required=True, help='Weight bound')
    volume.add_argument('--weights', default='power:a=0,r=1,c=0', help='Weight rule')
    volume.add_argument('--json', action='store_true', help='Output results in JSON format')
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    config = RunConfig(command=args.command)
    mapping = {
        'b': 'base', 's': 's', 'd': 'd', 'l': 'l', 'weights': 'weights', 'target': 'target',
        'trials': 'trials', 'seed': 'seed', 'jobs': 'jobs', 'matrix': 'matrix',
        'output': 'output', 'cap': 'enumeration_cap', 'family': 'family', 'regime': 'regime',
        'n': 'n', 'M': 'M', 'epsilon': 'epsilon', 'json': 'json_output', 'table': 'table',
    }
    for arg, key in mapping.items():
        value = getattr(args, arg, None)
        if value is not None:
            setattr(config, key, value)
    if getattr(args, 's_list', None) is not None:
        config.s_list = tuple(args.s_list)
    if getattr(args, 'd_list', None) is not None:
        config.d_list = tuple(args.d_list)
    return config


def _walsh_weights(rule: str, base: int) -> WeightSequence:
    weights = parse_weight_rule(rule, base)
    if weights.is_smooth:
        embedded = embed_smooth_to_walsh(weights, 'loose')
        logger.info("embedded %s as %s", weights, embedded)
        return embedded
    return weights


def _print_block(values: Dict, out: TextIO) -> None:
    for key, value in values.items():
        out.write(f"{key}={format_value(value)}\n")


def _print_notes(warnings: List[str], suggestions: List[str]) -> None:
    for warning in warnings:
        print(f"warning: {warning}", file=sys.stderr)
    for suggestion in suggestions:
        print(f"suggestion: {suggestion}", file=sys.stderr)


def _json_ready(values: Dict) -> Dict:
    return {k: (None if isinstance(v, float) and not math.isfinite(v) else v)
            for k, v in values.items()}


def _seed(config: RunConfig) -> int:
    seed, drawn = resolve_seed(config.seed)
    if drawn:
        print(f"seed={seed}", file=sys.stderr)
    return seed


def cmd_search(config: RunConfig, out: TextIO = sys.stdout) -> int:
    target = SearchTarget.parse(config.target)
    a = _walsh_weights(config.weights, config.base)
    l = config.l if config.l is not None else 2 * config.d
    seed = _seed(config)
    G, report = search_net(config.s, config.base, config.d, l, a, target, config.trials,
                           seed, jobs=resolve_jobs(config.jobs),
                           limit=config.enumeration_cap)
    if config.output:
        G.write(config.output)
    if config.json_output:
        result = report.as_dict()
        result.update({'target': str(target), 'seed': seed, 'matrices': G.to_text()})
        out.write(json.dumps(result, indent=2) + '\n')
    else:
        if not config.output:
            out.write(G.to_text())
        out.write(report.to_text() + '\n')
    _print_notes(report.warnings, report.suggestions)
    if target.kind == 'delta' and report.delta < target.M - WEIGHT_TOL:
        print(f"Error: delta target {format_value(float(target.M))} not reached "
              f"(best delta {format_value(report.delta)})", file=sys.stderr)
        return EXIT_TARGET_MISSED
    return EXIT_OK


def cmd_merit(config: RunConfig, out: TextIO = sys.stdout) -> int:
    G = GeneratingMatrices.read(config.matrix)
    a = _walsh_weights(config.weights, G.base)
    report = NetEvaluator(a, limit=config.enumeration_cap).evaluate(G)
    if config.json_output:
        out.write(json.dumps(report.as_dict(), indent=2) + '\n')
    else:
        out.write(report.to_text() + '\n')
    _print_notes(report.warnings, report.suggestions)
    return EXIT_OK


def bounds_table(config: RunConfig) -> Dict:
    """All bound values and constants for one (s, n, weights, regime)."""
    if config.regime == 'p2':
        raise ImpossibleRegimeError(P2_MESSAGE)
    if config.regime not in REGIMES:
        raise ValueError(f"Unknown regime '{config.regime}', expected one of "
                         f"{', '.join(REGIMES)}")
    b, s = config.base, config.s
    a = _walsh_weights(config.weights, b)
    consts = BoundConstants.compute(s, a)
    if config.regime == 'trac' and not consts.has_tractability:
        raise ValueError(f"The trac regime needs a power rule a_j = a j^r + c with a > 0, "
                         f"got '{config.weights}'")
    if config.n is not None:
        n = config.n
        if n < 1:
            raise ValueError(f"n must be at least 1, got {n}")
        d = 0
        while b ** (d + 1) <= n:
            d += 1
    else:
        d = config.d
        if d < 0:
            raise ValueError(f"d must be non-negative, got {d}")
        n = b ** d

    log_lower = log_lower_bound_n(n, s, a)
    table = {'b': b, 's': s, 'n': n, 'd': d, 'regime': config.regime,
             'weights': a.rule_string(), 'lower_bound': lower_bound_n(n, s, a),
             'log_lower_bound': log_lower}
    if d >= 1 and (a.terms(s) >= 0).all():
        log_box = log_lower_bound_box(d, s, a)
        table['lower_bound_box'] = lower_bound_box(d, s, a)
        table['log_lower_bound_box'] = log_box
    table.update({key: value for key, value in consts.as_dict().items()
                  if key not in ('base', 's') and value is not None})

    log_b = math.log(b)
    if config.regime == 'conv':
        log_target = log_conv_target(d, s, a)
        C, c, p = consts.c_bar, consts.c_conv / log_b ** 2, 2.0
        growth = consts.r if consts.has_tractability else 1.0
    else:
        log_target = log_trac_target(d, a)
        p = tractability_exponent(consts.r)
        C, c = consts.c_bd, consts.c_help * log_b / 2.0 / log_b ** p
        growth = rate_to_decay(p)
    table['target'] = math.exp(log_target)
    table['log_target'] = log_target
    table['rate_exponent'] = p
    liminf = a.satisfies_liminf(growth)
    table['liminf_condition'] = 'unknown' if liminf is None else liminf
    if config.epsilon is not None:
        table['information_complexity'] = information_complexity_bound(config.epsilon, C, c, p)
    return table


def cmd_bounds(config: RunConfig, out: TextIO = sys.stdout) -> int:
    table = bounds_table(config)
    if config.json_output:
        out.write(json.dumps(_json_ready(table), indent=2) + '\n')
    else:
        _print_block(table, out)
    return EXIT_OK


def cmd_converge(config: RunConfig, out: TextIO = sys.stdout) -> int:
    if config.table:
        weights = _walsh_weights(config.weights, config.base)
    else:
        weights = parse_weight_rule(config.weights, config.base)
        if not weights.is_smooth:
            raise ValueError(f"converge needs a smooth weight rule, got '{config.weights}'")
    seed = _seed(config)
    jobs = resolve_jobs(config.jobs)
    with ExitStack() as stack:
        if config.output:
            # Opened before the grid so an unwritable path fails fast.
            stream = stack.enter_context(open(config.output, 'w', newline=''))
            report = out
        else:
            stream, report = out, sys.stderr
        if config.table:
            records = convergence_rate_table(weights, config.d_list, config.s_list,
                                             config.trials, seed, jobs=jobs)
            write_rate_csv(records, stream)
            return EXIT_OK
        records = convergence_experiment(config.family, weights, config.s_list,
                                         config.d_list, config.trials, seed, jobs=jobs)
        write_csv(records, stream)

    for s in config.s_list:
        rows = [r for r in records if r.s == s]
        try:
            fit = fit_rate(rows, against='logn2', floor=config.float_floor)
        except ValueError as e:
            print(f"warning: no rate fit for s={s}: {e}", file=sys.stderr)
            continue
        report.write(f"s={s} slope={format_value(fit.slope)} "
                     f"r_squared={format_value(fit.r_squared)} rows={fit.rows}\n")
    return EXIT_OK


def volume_table(config: RunConfig) -> Dict:
    a = _walsh_weights(config.weights, config.base)
    M, s = config.M, config.s
    table = {'b': config.base, 's': s, 'M': M, 'weights': a.rule_string()}
    try:
        table['vol'] = vol(M, s, a)
    except VolumeCapExceededError as e:
        logger.warning("%s", e)
        table['vol'] = None
    table['vol_bound_conv'] = vol_bound_conv(M, s, a)
    if a.tractability_params() is not None:
        table['vol_bound_trac'] = vol_bound_trac(M, a)
    return table


def cmd_vol(config: RunConfig, out: TextIO = sys.stdout) -> int:
    table = volume_table(config)
    if config.json_output:
        out.write(json.dumps(_json_ready(table), indent=2) + '\n')
    else:
        _print_block(table, out)
    return EXIT_OK


COMMANDS = {
    'search': cmd_search,
    'merit': cmd_merit,
    'bounds': cmd_bounds,
    'converge': cmd_converge,
    'vol': cmd_vol,
}


def run(argv: Optional[List[str]] = None, out: TextIO = None) -> int:
    """Parse arguments, run one subcommand and return its exit code."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format=LOG_FORMAT, stream=sys.stderr)
    out = out if out is not None else sys.stdout
    try:
        config = config_from_args(args)
        logger.debug("config %s", config.to_string())
        return COMMANDS[config.command](config, out)
    except (ValueError, OSError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as e:
        print(f"Unexpected error: {e}", file=sys.stderr)
        return EXIT_ERROR


def main():
    """Main CLI entry point."""
    sys.exit(run())


if __name__ == '__main__':
    main()
