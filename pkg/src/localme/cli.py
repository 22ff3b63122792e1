"""Command-line front end: ``lme-sim run | validate | list-scenarios``."""
import argparse
import logging
import sys

from .config import SCENARIOS, ConfigError, load_config
from .scenarios import run

SCENARIO_HELP = {
    "single_qubit_relax": "relaxation of one qubit toward its Gibbs state (rho11, rho12)",
    "davies_compare": "local equation against the secular Davies equation",
    "integral_compare": "local equation against the non-Markovian integral equation",
    "positivity_sweep": "step-map dual-state spectrum as a function of T'",
    "unravel_check": "quantum-jump ensemble against the density-matrix solution",
    "powder_of_sympathy": "bandwidth guard: a frozen spin next to a relaxing one",
    "faithful_bench": "exact system + 8-spin bath against the local equation",
    "error_tables": "a-priori error rates per relaxation time",
    "fixed_point_report": "stationary state against Gibbs + perturbative correction",
}


def main(argv=None):
    parser = argparse.ArgumentParser(prog="lme-sim", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run a scenario config")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None, help="output directory (overrides config)")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--threads", type=int, default=None)
    p_val = sub.add_parser("validate", help="check a config against the schema")
    p_val.add_argument("config")
    sub.add_parser("list-scenarios", help="print the available scenarios")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.command == "list-scenarios":
        for name in SCENARIOS:
            print(f"{name:22s} {SCENARIO_HELP[name]}")
        return 0
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cannot read {args.config}: {exc}", file=sys.stderr)
        return 2
    if args.command == "validate":
        print(f"{args.config}: ok ({cfg.scenario})")
        return 0
    if args.threads is not None and args.threads < 1:
        parser.error("--threads must be >= 1")
    return run(cfg, args.out, args.seed, args.threads)


if __name__ == "__main__":
    sys.exit(main())
