"""Command-line front end for the experiment grids.

Exit codes: 0 success, 2 invalid arguments, 3 golden-file mismatch (1 for
I/O failures). A plain-text key=value config file can seed any flag; flags
given on the command line win.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .experiments import (
    EXPERIMENTS,
    DEFAULT_K_GRID,
    ExperimentConfig,
    render_csv,
    run_experiment,
)
from .mechanisms import MECHANISM_NAMES

__all__ = ["cli_main", "main"]

_CONFIG_KEYS = {
    "experiment", "n", "k", "noise", "reps", "seed", "mechanism",
    "beta", "eta", "alpha", "out", "golden", "per_rep",
}


def _int_grid(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_grid(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(",") if part != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _bool_flag(text: str) -> bool:
    return text.strip().lower() in ("1", "true", "yes", "on")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shakyladder",
        description="Leaderboard mechanism and overfitting-attack simulations.",
    )
    parser.add_argument("--config", type=Path, default=None,
                        help="key=value file supplying defaults for any flag")
    parser.add_argument("--experiment", choices=EXPERIMENTS)
    parser.add_argument("--n", type=int, help="holdout size")
    parser.add_argument("--k", type=_int_grid, default=None, metavar="K1,K2,...",
                        help="query-count grid (default 100..1000 step 100)")
    parser.add_argument("--noise", type=_float_grid, default=None, metavar="M1,M2,...",
                        help="noise multipliers in units of 1/sqrt(n)")
    parser.add_argument("--reps", type=int, default=100, help="repetitions per cell")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--mechanism", choices=MECHANISM_NAMES, default="shaky")
    parser.add_argument("--beta", type=float, default=0.1, help="failure probability")
    parser.add_argument("--eta", type=float, default=0.01, help="ladder step size")
    parser.add_argument("--alpha", type=float, default=0.05,
                        help="estimator accuracy target (reduction-oracle)")
    parser.add_argument("--out", type=Path, default=None, help="CSV output path")
    parser.add_argument("--golden", type=Path, default=None,
                        help="compare output byte-for-byte against this CSV")
    parser.add_argument("--per-rep", dest="per_rep", action="store_true",
                        help="emit one row per repetition with audit columns")
    return parser


def _load_config_file(path: Path) -> dict[str, str]:
    entries: dict[str, str] = {}
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise SystemExit(f"cannot read config file {path}: {err}") from err
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SystemExit(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONFIG_KEYS:
            raise SystemExit(f"{path}:{lineno}: unknown key {key!r}")
        entries[key] = value
    return entries


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Peek at --config and fold its entries in as parser defaults."""
    peek, _ = parser.parse_known_args(argv)
    if peek.config is None:
        return argv
    entries = _load_config_file(peek.config)
    defaults = {}
    for key, value in entries.items():
        if key == "n":
            defaults["n"] = int(value)
        elif key in ("reps", "seed"):
            defaults[key] = int(value)
        elif key in ("beta", "eta", "alpha"):
            defaults[key] = float(value)
        elif key == "k":
            defaults["k"] = _int_grid(value)
        elif key == "noise":
            defaults["noise"] = _float_grid(value)
        elif key == "per_rep":
            defaults["per_rep"] = _bool_flag(value)
        elif key in ("out", "golden"):
            defaults[key] = Path(value)
        else:
            defaults[key] = value
    parser.set_defaults(**defaults)
    return argv


def cli_main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
        if args.experiment is None:
            parser.error("--experiment is required")
        if args.n is None:
            parser.error("--n is required")
        config = ExperimentConfig(
            experiment=args.experiment,
            n=args.n,
            k_grid=args.k if args.k is not None else DEFAULT_K_GRID,
            noise_grid=args.noise,
            reps=args.reps,
            seed=args.seed,
            mechanism=args.mechanism,
            beta=args.beta,
            eta=args.eta,
            alpha=args.alpha,
            per_rep=args.per_rep,
        )
    except SystemExit as err:
        code = err.code
        if isinstance(code, str):
            print(code, file=sys.stderr)
            return 2
        return 2 if code is None else int(code)
    except ValueError as err:
        print(f"invalid arguments: {err}", file=sys.stderr)
        return 2

    csv_text = render_csv(run_experiment(config), per_rep=config.per_rep)

    if args.out is not None:
        try:
            args.out.write_bytes(csv_text.encode("utf-8"))
        except OSError as err:
            print(f"cannot write output to {args.out}: {err}", file=sys.stderr)
            return 1
    else:
        sys.stdout.write(csv_text)

    if args.golden is not None:
        try:
            golden = args.golden.read_bytes()
        except OSError as err:
            print(f"cannot read golden file {args.golden}: {err}", file=sys.stderr)
            return 1
        if golden != csv_text.encode("utf-8"):
            print(f"output does not match golden file {args.golden}", file=sys.stderr)
            return 3
    return 0


def main() -> None:  # pragma: no cover - console entry point
    sys.exit(cli_main())
