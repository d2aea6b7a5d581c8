"""Command-line entry point.

Every subcommand assembles the same flat key/value config a ``key = value``
config file would produce, then hands it to the shared executor in
:mod:`mixlab.harness`; ``mixlab run experiment.cfg`` skips the flags and
reads the file directly.  Outputs are deterministic: rerunning a command
with identical arguments rewrites byte-identical files.
"""

import argparse
import sys

from .errors import (
    CoalescenceTimeout,
    ConfigError,
    MixlabError,
    ResourceError,
    TooLarge,
)
from .harness import execute_experiment, run_experiment

_MODELS = ("ip", "bip", "ssep", "asep", "cf", "acf", "simplex")


def _add_common(sub, model=True, seed=True):
    if model:
        sub.add_argument("--model", required=True, choices=_MODELS)
        sub.add_argument("--N", required=True, dest="n")
        sub.add_argument("--k", default=None)
        sub.add_argument("--p", default=None)
    if seed:
        sub.add_argument("--seed", default=None)
    sub.add_argument("--out", default=None, help="output directory (default: .)")
    sub.add_argument("--format", default=None, choices=("csv", "json", "both"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mixlab",
        description="Simulate, couple, and exactly analyze one-dimensional "
        "particle-system Markov chains.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sp = subs.add_parser("spectrum", help="Dirichlet spectrum gamma_j = 1 - cos(j pi / N)")
    sp.add_argument("--N", required=True, dest="n")
    sp.add_argument("--modes", action="store_true", help="also write the sine mode matrix")
    _add_common(sp, model=False, seed=False)

    ex = subs.add_parser("exact", help="exact d(t) curve and mixing time by uniformization")
    _add_common(ex)
    ex.add_argument("--eps", default=None)
    ex.add_argument("--grid", default=None)

    sim = subs.add_parser("simulate", help="single trajectory with observables")
    _add_common(sim)
    sim.add_argument("--t-max", required=True, dest="t_max")
    sim.add_argument("--grid", default=None)
    sim.add_argument("--dump", default=None, help="also write the event log to this file")

    cp = subs.add_parser("couple", help="coalescence times of the extremal pair")
    _add_common(cp)
    cp.add_argument("--replicas", default=None)
    cp.add_argument("--t-max", default=None, dest="t_max")
    cp.add_argument("--mode", default=None, choices=("graphical", "refined"))

    dtv = subs.add_parser("dtv", help="Monte-Carlo total-variation distance estimates")
    _add_common(dtv)
    dtv.add_argument("--replicas", default=None)
    dtv.add_argument("--grid", default=None)
    dtv.add_argument("--estimator", default=None, choices=("upper", "lower", "both"))

    pr = subs.add_parser("profile", help="mean occupation per site from the packed start")
    _add_common(pr)
    pr.add_argument("--t", required=True)
    pr.add_argument("--replicas", default=None)

    co = subs.add_parser("cutoff", help="mixing-window scan across sizes N")
    co.add_argument("--model", required=True, choices=_MODELS)
    co.add_argument("--N", required=True, dest="n", help="comma-separated sizes")
    co.add_argument("--p", default=None)
    co.add_argument("--seed", default=None)
    co.add_argument("--replicas", default=None)
    co.add_argument("--eps-pair", default=None, dest="eps_pair")
    co.add_argument("--grid-points", default=None, dest="grid_points")
    co.add_argument("--out", default=None)
    co.add_argument("--format", default=None, choices=("csv", "json", "both"))

    rn = subs.add_parser("run", help="run an experiment from a key = value config file")
    rn.add_argument("config", help="path to the config file")

    return parser


def _args_to_cfg(args: argparse.Namespace) -> dict:
    cfg = {"experiment": args.command}
    for key, value in vars(args).items():
        if key == "command" or value is None or value is False:
            continue
        if value is True:
            value = "1"
        cfg[key] = str(value)
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return run_experiment(args.config)
    try:
        result = execute_experiment(_args_to_cfg(args))
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (ResourceError, TooLarge, CoalescenceTimeout, MemoryError) as e:
        print(f"resource error: {e}", file=sys.stderr)
        return 3
    except MixlabError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    for path in result["written"]:
        print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
