"""Command line interface: ``coverlab run|validate|list-experiments``."""

import argparse
import sys

from .experiments import ConfigError, OUTPUT_ENV, list_experiments, load_config, output_dir_for, run


def _cmd_run(args):
    try:
        result = run(args.config, n_jobs=args.n_jobs)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return 2
    for rep in result.reports:
        print(f"{rep.verdict:17s} {rep.bound_name:28s} lhs={rep.lhs_empirical:.6g} "
              f"se={rep.lhs_se:.3g} rhs={rep.rhs_formula:.6g}")
    print(f"outputs written to {result.out_dir}")
    if result.violated:
        print("at least one bound is violated", file=sys.stderr)
    return result.exit_code


def _cmd_validate(args):
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return 2
    print(f"{args.config}: valid ({cfg.kind}, seed {cfg.seed}, reps {cfg.reps}); "
          f"outputs would go to {output_dir_for(cfg)}")
    return 0


def _cmd_list(args):
    for kind, desc in list_experiments():
        print(f"{kind:22s} {desc}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="coverlab",
        description="Cover-time simulations and bound checks.",
        epilog=f"Set {OUTPUT_ENV} to override the output base directory.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run an experiment config")
    p.add_argument("config")
    p.add_argument("--n-jobs", type=int, default=None,
                   help="override experiment.n_jobs (results do not depend on it)")
    p.set_defaults(func=_cmd_run)
    p = sub.add_parser("validate", help="check a config without running it")
    p.add_argument("config")
    p.set_defaults(func=_cmd_validate)
    p = sub.add_parser("list-experiments", help="list experiment kinds")
    p.set_defaults(func=_cmd_list)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
