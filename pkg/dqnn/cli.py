"""Command line entry point `dqnn`.

    dqnn [-v] run SPEC [--out DIR] [--seed N] [--iterations N] [--workers K]
    dqnn [-v] gradient-check [--arch ARCH] [--trials N] [--tolerance T] [--costs C ...] [--seed N] [--out DIR]
    dqnn param-report ARCH

SPEC and ARCH are JSON files or names of bundled resources. The output directory defaults to
`$DQNN_OUT`, then `./dqnn-out`. Exit status: 0 on success, 1 when a gradient check fails,
2 for invalid input, 3 for non-finite numbers during training.

Example:
```python
>>> main(['param-report', 'arch_minimal'])
layer neuron source  d_in d_out  active unitary
    3      1      1     2     8      28      64
total                                28      64
0
>>> main(['run', 'no_such_spec'])
2

```
"""
import argparse
import logging
import os
import sys

from dqnn.cost import ANALYTIC_KINDS
from dqnn.data.importer import resolve
from dqnn.experiments import ExperimentSpec, load_spec, run
from dqnn.network import Architecture, format_report, param_report

__all__ = ['main', 'build_parser', 'EXIT_OK', 'EXIT_CHECK_FAILED', 'EXIT_INVALID', 'EXIT_NUMERIC']

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INVALID = 2
EXIT_NUMERIC = 3

DEFAULT_OUT = 'dqnn-out'


def _out_dir(value):
    return value or os.environ.get('DQNN_OUT') or DEFAULT_OUT


def build_parser():
    parser = argparse.ArgumentParser(prog='dqnn', description="Train and benchmark dissipative quantum neural networks.")
    parser.add_argument('-v', '--verbose', action='count', default=0, help="-v for progress, -vv for every iteration")
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('run', help="run an experiment spec")
    p.add_argument('spec', help="spec file or bundled spec name")
    p.add_argument('--out', help="output directory (default: $DQNN_OUT or ./dqnn-out)")
    p.add_argument('--seed', type=int)
    p.add_argument('--iterations', type=int)
    p.add_argument('--workers', type=int)

    p = sub.add_parser('gradient-check', help="compare analytic gradients with finite differences")
    p.add_argument('--arch', default='arch_minimal', help="architecture file or bundled name")
    p.add_argument('--trials', type=int, default=50)
    p.add_argument('--tolerance', type=float, default=1e-5)
    p.add_argument('--costs', nargs='+', default=[k.tag for k in ANALYTIC_KINDS])
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--workers', type=int, default=1)
    p.add_argument('--out')

    p = sub.add_parser('param-report', help="print per-perceptron parameter counts")
    p.add_argument('arch', help="architecture file or bundled name")
    return parser


def _dispatch(args):
    if args.command == 'param-report':
        print(format_report(param_report(Architecture.from_dict(resolve(args.arch)))))
        return EXIT_OK
    if args.command == 'run':
        spec = load_spec(args.spec, seed=args.seed, iterations=args.iterations, workers=args.workers)
    else:
        spec = ExperimentSpec.from_dict({
            'kind': 'gradient-check',
            'arch': args.arch,
            'trials': args.trials,
            'tolerance': args.tolerance,
            'costs': args.costs,
            'seed': args.seed,
            'workers': args.workers,
        })
    status = run(spec, _out_dir(args.out))
    if status == EXIT_CHECK_FAILED:
        print("dqnn: gradient check failed, see summary.json", file=sys.stderr)
    return status


def main(argv=None):
    """Parse `argv`, run the command and return the exit status."""
    args = build_parser().parse_args(argv)
    if args.verbose:
        logging.basicConfig(level=logging.DEBUG if args.verbose > 1 else logging.INFO,
                            format='%(asctime)s %(name)s %(levelname)s %(message)s')
    try:
        return _dispatch(args)
    except ValueError as exc:
        print(f"dqnn: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except FloatingPointError as exc:
        print(f"dqnn: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == '__main__':
    sys.exit(main())
