"""Command line entry point: ``finset-id <subcommand>``.

Exit status is 0 on success, 2 for invalid configuration and 3 for a
numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .bounds import INCLUSIVE, RECURSION
from .estimators import mle_estimate, ols_project_estimate
from .exceptions import ConfigInvalid, NumericalError, UnknownExperiment
from .experiments import (
    builtin_paper_config,
    load_config,
    run_bounds,
    run_montecarlo,
    seed_from_env,
    trial_rng,
)
from .lti import read_trajectory_csv, simulate, write_trajectory_csv

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", metavar="PATH", help="JSON experiment config")
    p.add_argument("--exp", type=int, choices=(1, 2, 3), help="use a built-in reference setup")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--trials", type=int, help="override n_trials")
    p.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(
        prog="finset-id",
        description="Identify an LTI system from a finite candidate set.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="simulate one trajectory (CSV)")
    p.add_argument("--horizon", type=int, help="trajectory length (default: first horizon)")
    p.add_argument("--trial", type=int, default=0, help="trial stream index")

    p = sub.add_parser("estimate", parents=[common], help="run both estimators on a trajectory")
    p.add_argument("--trajectory", metavar="CSV", help="trajectory CSV (default: simulate one)")
    p.add_argument("--horizon", type=int)
    p.add_argument("--trial", type=int, default=0)

    p = sub.add_parser("bounds", parents=[common], help="evaluate the sample-complexity bounds")
    p.add_argument("--convention", choices=(RECURSION, INCLUSIVE), default=RECURSION)
    p.add_argument("--t-bar-max", type=int, dest="t_bar_max")

    sub.add_parser("montecarlo", parents=[common], help="Monte Carlo selection table")

    p = sub.add_parser("paper", parents=[common], help="reproduce a reference experiment")
    p.add_argument("--bounds", action="store_true", help="emit the bound report instead")
    p.add_argument("--dump-config", action="store_true", help="print the config JSON and exit")
    return parser


def _config(args):
    if args.config and args.exp:
        raise ConfigInvalid("--config/--exp", "give one, not both")
    if args.exp:
        cfg = builtin_paper_config(args.exp, seed=seed_from_env(0))
    elif args.config:
        cfg = load_config(args.config)
    else:
        raise ConfigInvalid("--config", "required (or --exp)")
    return cfg.with_overrides(seed=args.seed, n_trials=args.trials)


def _emit(text, args):
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _cmd_simulate(args):
    cfg = _config(args)
    T = args.horizon or cfg.horizons[0]
    traj = simulate(cfg.hset.true_system, cfg.noise, cfg.x0, T, trial_rng(cfg.seed, args.trial, 0))
    _emit(write_trajectory_csv(traj), args)


def _cmd_estimate(args):
    cfg = _config(args)
    if args.trajectory:
        with open(args.trajectory) as fh:
            traj = read_trajectory_csv(fh)
    else:
        T = args.horizon or cfg.horizons[0]
        traj = simulate(cfg.hset.true_system, cfg.noise, cfg.x0, T,
                        trial_rng(cfg.seed, args.trial, 0))
    result = {"T": traj.horizon, "true_index": cfg.hset.true_index}
    if "mle" in cfg.estimators:
        m = mle_estimate(cfg.hset, cfg.noise, traj)
        result["mle"] = {"index": m.index, "tie": m.tie, "risks": m.scores.tolist()}
    if "ols" in cfg.estimators:
        o = ols_project_estimate(cfg.hset, traj)
        result["ols"] = {"index": o.index, "tie": o.tie, "distances": o.scores.tolist(),
                         "fit": o.fit.tolist()}
    _emit(_json(result), args)


def _cmd_bounds(args):
    cfg = _config(args)
    report = run_bounds(cfg, T_bar_max=args.t_bar_max, convention=args.convention)
    _emit(_json(report.to_dict()), args)


def _table_text(table, fmt):
    if fmt == "json":
        return _json(table.to_dict())
    return table.to_csv()


def _cmd_montecarlo(args):
    cfg = _config(args)
    _emit(_table_text(run_montecarlo(cfg), args.format or "csv"), args)


def _cmd_paper(args):
    if args.config:
        raise ConfigInvalid("--config", "not accepted by 'paper'; use --exp")
    if not args.exp:
        raise ConfigInvalid("--exp", "required")
    cfg = _config(args)
    if args.dump_config:
        _emit(_json(cfg.to_dict()), args)
    elif args.bounds:
        _emit(_json(run_bounds(cfg).to_dict()), args)
    else:
        _emit(_table_text(run_montecarlo(cfg), args.format or "csv"), args)


COMMANDS = {
    "simulate": _cmd_simulate,
    "estimate": _cmd_estimate,
    "bounds": _cmd_bounds,
    "montecarlo": _cmd_montecarlo,
    "paper": _cmd_paper,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except (ConfigInvalid, UnknownExperiment) as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, FloatingPointError, ValueError) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
