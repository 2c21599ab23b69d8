"""
sample-sched: command-line front end.

    sample-sched analyze --instance jobs.json --policy sam --out report.csv
    sample-sched simulate --instance jobs.json --policy rnd --trials 1000000 --seed 7
    sample-sched example1 --n 5 --M 100 --eps 1e-6 --trials 100000
    sample-sched example1 --variant swapped --M 1000
    sample-sched example2 --Ms 100,1000,10000
    sample-sched verify --class symmetric --count 100 --seed 1
    sample-sched sweep-alpha --alphas 1,2,4,8

Exit codes: 0 all checks pass, 1 usage or input error, 2 a check failed.
"""
import argparse
import logging
import sys
from typing import List, Optional

from samplesched.errors import SchedError
from samplesched.experiments import EXAMPLE1_VARIANTS, LOG_LEVELS, RunConfig, run
from samplesched.generators import CLASSES
from samplesched.policies import Policy
from samplesched.reports import FORMATS, write_report

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAILED = 2
LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


class _Parser(argparse.ArgumentParser):
    "argparse exits with 2 on bad usage; 2 means a failed check here"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _floats(text : str) -> List[float]:
    try:
        return [float(x) for x in text.split(',') if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--out', dest='out_path', default=None, help="report file (default stdout)")
    common.add_argument('--format', choices=FORMATS, default='csv')
    common.add_argument('--seed', type=int, default=0)
    common.add_argument('--tol', type=float, default=1e-9, help="relative quadrature tolerance")
    common.add_argument('--workers', type=int, default=1, help="threads for independent pieces of work")
    common.add_argument('--log-level', default='WARNING', type=str.upper, choices=LOG_LEVELS)

    parser = _Parser(prog='sample-sched',
                     description="Exact and simulated analysis of single-sample scheduling.")
    sub = parser.add_subparsers(dest='command', required=True, parser_class=_Parser)

    static = [str(p) for p in (Policy.SAM, Policy.RND, Policy.WSEPT)]
    p = sub.add_parser('analyze', parents=[common], help="exact cost, rog, kappa and bounds of one instance")
    p.add_argument('--instance', dest='instance_path', required=True)
    p.add_argument('--policy', choices=static, default='sam')

    p = sub.add_parser('simulate', parents=[common], help="Monte Carlo cost and regret next to exact values")
    p.add_argument('--instance', dest='instance_path', required=True)
    p.add_argument('--policy', choices=[str(x) for x in Policy], default='sam')
    p.add_argument('--trials', type=int, default=100_000)

    p = sub.add_parser('example1', parents=[common], help="the long-job example")
    p.add_argument('--n', type=int, default=5)
    p.add_argument('--M', type=float, default=100.0)
    p.add_argument('--eps', type=float, default=1e-6)
    p.add_argument('--variant', choices=EXAMPLE1_VARIANTS, default='discrete',
                   help="discrete, continuous (densities) or swapped (weights and lengths trade roles)")
    p.add_argument('--trials', type=int, default=0, help="Monte Carlo cross-check trials (0 = off)")

    p = sub.add_parser('example2', parents=[common], help="the weighted translation example")
    p.add_argument('--M', type=float, default=100.0)
    p.add_argument('--Ms', type=_floats, default=[], help="sweep, e.g. 100,1000,10000")
    p.add_argument('--eps', type=float, default=1e-3)
    p.add_argument('--trials', type=int, default=0, help="Monte Carlo cross-check trials (0 = off)")

    p = sub.add_parser('verify', parents=[common], help="check a class guarantee on random instances")
    p.add_argument('--class', dest='class_name', choices=CLASSES, required=True)
    p.add_argument('--count', type=int, default=100)
    weights = p.add_mutually_exclusive_group()
    weights.add_argument('--unit-weights', dest='unit_weights', action='store_true', default=None)
    weights.add_argument('--nonunit-weights', dest='unit_weights', action='store_false')

    p = sub.add_parser('sweep-alpha', parents=[common], help="exponential rog against 1/(1+alpha)")
    p.add_argument('--alphas', type=_floats, default=[1.0, 2.0, 4.0, 8.0])
    p.add_argument('--count', type=int, default=100)
    return parser


def parse_args(argv : Optional[List[str]] = None) -> RunConfig:
    parser = build_parser()
    ns = vars(parser.parse_args(argv))
    fields = set(RunConfig.__dataclass_fields__)
    try:
        return RunConfig(**{k: v for k, v in ns.items() if k in fields})
    except ValueError as e:
        parser.error(str(e))


def main(argv : Optional[List[str]] = None) -> int:
    try:
        cfg = parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_ERROR

    logging.basicConfig(level=cfg.log_level, format=LOG_FORMAT, stream=sys.stderr)
    log.debug("%s", cfg)
    try:
        report = run(cfg)
        write_report(report, cfg.out_path, cfg.format)
    except (SchedError, ValueError, OSError) as e:
        log.error("%s: %s", type(e).__name__, e)
        return EXIT_ERROR
    if not report.passed:
        sys.stderr.write(f"{cfg.command}: FAILED\n")
        return EXIT_FAILED
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
