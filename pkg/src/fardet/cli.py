"""Command-line front end.

Flags override config-file values, which override the built-in defaults
(the reference parameter set delta=1e4, omega_max=2e3, gamma=200,
n_max=25).  Every resolved value is echoed in a reproducibility header on
stdout and into the output files.  Exit codes: 0 success, 1 runtime
(integration) failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .equations import EquationKind
from .experiments import ALL_KINDS, DEFAULT_SAMPLES, DEFAULT_T_MAX, EXPERIMENTS, RunConfig, run_experiment
from .integrator import LeakageError, StiffnessError

__all__ = ["build_parser", "parse_config", "main"]

DEFAULTS = {
    "equation": "all",
    "experiment": "short_time",
    "delta": 1.0e4,
    "omega_max": 2.0e3,
    "gamma": 200.0,
    "n_max": 25,
    "t_max": None,  # resolved from the experiment when absent
    "samples": DEFAULT_SAMPLES,
    "rtol": 1e-8,
    "atol": 1e-10,
    "out": "results",
    "format": "csv",
    "figures": True,
}

_EQUATION_CHOICES = [k.value for k in ALL_KINDS] + ["all"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fardet",
        description=(
            "Integrate the exact and approximate master equations of a "
            "far-detuned two-level atom in a standing wave and export the "
            "momentum-distribution series."
        ),
    )
    parser.add_argument("--equation", choices=_EQUATION_CHOICES, default=None,
                        help="which equation(s) to run (default: all)")
    parser.add_argument("--experiment", choices=list(EXPERIMENTS), default=None,
                        help="named experiment (default: short_time)")
    parser.add_argument("--delta", type=float, default=None, help="detuning (scaled units)")
    parser.add_argument("--omega-max", type=float, default=None, help="peak Rabi frequency")
    parser.add_argument("--gamma", type=float, default=None, help="spontaneous emission rate")
    parser.add_argument("--n-max", type=int, default=None, help="momentum truncation level")
    parser.add_argument("--t-max", type=float, default=None,
                        help="end time (default: 2 for short_time, 8 otherwise)")
    parser.add_argument("--samples", type=int, default=None, help="number of sample times")
    parser.add_argument("--rtol", type=float, default=None, help="relative tolerance")
    parser.add_argument("--atol", type=float, default=None, help="absolute tolerance")
    parser.add_argument("--out", type=str, default=None, help="output directory")
    parser.add_argument("--format", choices=["csv", "json"], default=None, help="series file format")
    parser.add_argument("--figures", dest="figures", action="store_true", default=None,
                        help="render figures next to the delimited output (default)")
    parser.add_argument("--no-figures", dest="figures", action="store_false",
                        help="skip figure rendering")
    parser.add_argument("--config", type=str, default=None,
                        help="flat key = value file; keys match the long flag names")
    return parser


_CONFIG_KEYS = {
    "equation": str,
    "experiment": str,
    "delta": float,
    "omega-max": float,
    "gamma": float,
    "n-max": int,
    "t-max": float,
    "samples": int,
    "rtol": float,
    "atol": float,
    "out": str,
    "format": str,
    "figures": lambda s: s.strip().lower() in ("1", "true", "yes", "on"),
}


def _read_config_file(path: str, parser: argparse.ArgumentParser) -> dict:
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        parser.error(f"cannot read config file {path}: {exc}")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            parser.error(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = (part.strip() for part in line.partition("="))
        if key not in _CONFIG_KEYS:
            parser.error(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key.replace("-", "_")] = _CONFIG_KEYS[key](value)
        except ValueError:
            parser.error(f"{path}:{lineno}: malformed value for {key!r}: {value!r}")
    return values


def parse_config(argv=None) -> RunConfig:
    """Resolve flags, optional config file and defaults into a RunConfig."""
    parser = build_parser()
    args = parser.parse_args(argv)

    resolved = dict(DEFAULTS)
    if args.config is not None:
        resolved.update(_read_config_file(args.config, parser))
    for key in DEFAULTS:
        flag_value = getattr(args, key)
        if flag_value is not None:
            resolved[key] = flag_value

    experiment = resolved["experiment"]
    if resolved["t_max"] is None:
        resolved["t_max"] = DEFAULT_T_MAX[experiment]

    if resolved["equation"] == "all":
        kinds = ALL_KINDS
    else:
        try:
            kinds = (EquationKind(resolved["equation"]),)
        except ValueError:
            parser.error(f"unknown equation {resolved['equation']!r}")

    # Regime and sanity checks surface as usage errors naming the flag.
    if not resolved["delta"] > 0:
        parser.error(f"--delta must be positive, got {resolved['delta']}")
    if not resolved["delta"] > resolved["omega_max"] > resolved["gamma"] > 0:
        parser.error(
            "--delta/--omega-max/--gamma must satisfy delta > omega_max > gamma > 0, got "
            f"{resolved['delta']}, {resolved['omega_max']}, {resolved['gamma']}"
        )
    if resolved["n_max"] < 1:
        parser.error(f"--n-max must be >= 1, got {resolved['n_max']}")
    if resolved["t_max"] <= 0:
        parser.error(f"--t-max must be positive, got {resolved['t_max']}")
    if resolved["samples"] < 2:
        parser.error(f"--samples must be >= 2, got {resolved['samples']}")
    for key in ("rtol", "atol"):
        if not 0 < resolved[key] < 1:
            parser.error(f"--{key} must lie in (0, 1), got {resolved[key]}")

    return RunConfig(
        equations=kinds,
        experiment=experiment,
        delta=resolved["delta"],
        omega_max=resolved["omega_max"],
        gamma=resolved["gamma"],
        n_max=resolved["n_max"],
        t_max=resolved["t_max"],
        samples=resolved["samples"],
        rtol=resolved["rtol"],
        atol=resolved["atol"],
        out=Path(resolved["out"]),
        fmt=resolved["format"],
        figures=resolved["figures"],
    )


def main(argv=None) -> int:
    config = parse_config(argv)
    try:
        return run_experiment(config)
    except (StiffnessError, LeakageError) as exc:
        print(
            f"error: integration of the {exc.kind} equation failed at t={exc.time:.6g}: {exc}",
            file=sys.stderr,
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
