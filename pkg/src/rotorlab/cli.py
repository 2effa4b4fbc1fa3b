"""Command-line driver.

Exit codes: 0 on success, 2 for configuration errors, 3 for numerical
resolution failures (basis escalation exhausted or smoothing that does not
converge).
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, NonIntegrableError, UnderResolvedError
from .experiments import EXPERIMENTS, build_config, parse_config_file, run

_SUBCOMMANDS = {name.replace("_", "-"): name for name in EXPERIMENTS}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rotorlab",
        description="Kicked-rotor fidelity experiments: exact Floquet numerics "
                    "against near-resonant revival laws.")
    sub = parser.add_subparsers(dest="command", required=True)
    for command in _SUBCOMMANDS:
        p = sub.add_parser(command, help=f"run the {command} experiment")
        p.add_argument("--config", metavar="PATH",
                       help="flat key = value configuration file")
        p.add_argument("--out", metavar="DIR", help="output directory")
        p.add_argument("--t-max", type=int, metavar="N", help="number of kicks")
        p.add_argument("--n-max", type=int, metavar="N",
                       help="initial momentum-basis halfwidth")
        p.add_argument("--threads", type=int, metavar="N",
                       help="worker threads (0 = auto; falls back to "
                            "ROTORLAB_THREADS, then CPU count)")
        p.add_argument("--sigma", type=float, metavar="S",
                       help="smoothing standard deviation in kicks")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    experiment = _SUBCOMMANDS[args.command]
    try:
        file_values = parse_config_file(args.config) if args.config else None
        overrides = {
            "output_path": args.out,
            "t_max": args.t_max,
            "n_max": args.n_max,
            "threads": args.threads,
            "sigma_smooth": args.sigma,
        }
        cfg = build_config(experiment, file_values, overrides)
        paths = run(cfg)
    except (ConfigError, OSError) as err:
        print(f"rotorlab: configuration error: {err}", file=sys.stderr)
        return 2
    except (UnderResolvedError, NonIntegrableError) as err:
        print(f"rotorlab: numerical resolution error: {err}", file=sys.stderr)
        return 3
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
