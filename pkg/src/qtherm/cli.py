"""Command-line interface.

One subcommand per experiment.  Values may come from an INI-style config
file (one section per experiment, flat key = value entries, a [DEFAULT]
section for shared keys); command-line flags win over the file.  Exit
codes: 0 success, 2 config error, 3 sampling budget exhausted, 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys
from pathlib import Path

from .errors import BudgetError, ConfigError, NumericError
from .runner import EXPERIMENTS, ExperimentConfig, run

_INT_KEYS = {"K", "N", "M", "seed", "threads", "n_times", "n_series", "max_trials"}
_FLOAT_KEYS = {"eps0", "gamma", "W", "eps0_final", "T_mid", "dT", "t", "p0_init"}
_LIST_KEYS = {"sweep_K": int, "sweep_gamma": float}
_PATH_KEYS = {"out_dir", "cache"}


def _parse_list(text: str, cast):
    return [cast(part) for part in text.replace(",", " ").split()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qtherm",
        description="Resonant-level eigenstate-thermalization experiments "
                    "(energies in units of W, times in 1/W)")
    sub = parser.add_subparsers(dest="experiment", required=True, metavar="experiment")
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", type=Path, default=None,
                       help="INI config file; section [%s] plus [DEFAULT]" % name)
        p.add_argument("--K", type=int, default=None, help="number of levels")
        p.add_argument("--eps0", type=float, default=None, help="system level energy")
        p.add_argument("--gamma", type=float, default=None, help="coupling strength")
        p.add_argument("--W", type=float, default=None,
                       help="display bandwidth scale (inputs/outputs stay in units of W)")
        p.add_argument("--eps0-final", dest="eps0_final", type=float, default=None,
                       help="post-quench system level energy")
        p.add_argument("--T-mid", dest="T_mid", type=float, default=None,
                       help="window midpoint temperature")
        p.add_argument("--dT", type=float, default=None, help="window width")
        p.add_argument("--N", type=int, default=None, help="particle number (default K//2)")
        p.add_argument("--M", type=int, default=None, help="sample count")
        p.add_argument("--seed", type=int, default=None, help="PRNG seed")
        p.add_argument("--K-list", dest="sweep_K", type=str, default=None,
                       help="comma-separated K sweep")
        p.add_argument("--gamma-list", dest="sweep_gamma", type=str, default=None,
                       help="comma-separated gamma sweep")
        p.add_argument("--t", type=float, default=None,
                       help="evaluation time (default 10/gamma where applicable)")
        p.add_argument("--n-times", dest="n_times", type=int, default=None,
                       help="points on time grids")
        p.add_argument("--n-series", dest="n_series", type=int, default=None,
                       help="trajectories in series outputs")
        p.add_argument("--p0-init", dest="p0_init", type=float, default=None,
                       help="initial system occupancy (bath scenario)")
        p.add_argument("--out", dest="out_dir", type=Path, default=None,
                       help="output directory (default ./out)")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (default $QTHERM_THREADS or hardware)")
        p.add_argument("--cache", type=Path, default=None, help="sample cache file")
        p.add_argument("--max-trials", dest="max_trials", type=int, default=None,
                       help="sampling trial budget")
    return parser


def _from_config_file(path: Path, experiment: str) -> dict:
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    ini = configparser.ConfigParser()
    ini.optionxform = str  # keys are case-sensitive (K, T_mid, ...)
    try:
        ini.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    section = ini[experiment] if ini.has_section(experiment) else ini["DEFAULT"]
    values: dict = {}
    for key, raw in section.items():
        if key in _INT_KEYS:
            values[key] = int(raw)
        elif key in _FLOAT_KEYS:
            values[key] = float(raw)
        elif key in _LIST_KEYS:
            values[key] = _parse_list(raw, _LIST_KEYS[key])
        elif key in _PATH_KEYS:
            values[key] = Path(raw)
        elif key == "experiment":
            continue
        else:
            raise ConfigError(f"unknown config key '{key}' in {path}")
    return values


def _default_threads() -> int:
    env = os.environ.get("QTHERM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"QTHERM_THREADS must be an integer, got '{env}'") from exc
    return os.cpu_count() or 1


def parse_config(argv) -> ExperimentConfig:
    """Resolve defaults < config file < CLI flags into an ExperimentConfig."""
    args = vars(build_parser().parse_args(argv))
    experiment = args.pop("experiment")
    config_path = args.pop("config")
    values: dict = {}
    if config_path is not None:
        values.update(_from_config_file(config_path, experiment))
    for key, val in args.items():
        if val is None:
            continue
        if key in _LIST_KEYS:
            values[key] = _parse_list(val, _LIST_KEYS[key])
        else:
            values[key] = val
    values.setdefault("threads", _default_threads())
    values.setdefault("out_dir", Path("out"))
    # case-insensitive INI readers lower-case keys; map them back
    canon = {f.lower(): f for f in ExperimentConfig.__dataclass_fields__}
    try:
        normalized = {canon[k.lower()]: v for k, v in values.items()}
    except KeyError as exc:
        raise ConfigError(f"unknown configuration key {exc}") from exc
    return ExperimentConfig(experiment=experiment, **normalized)


def main(argv=None) -> int:
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
        manifest = run(cfg)
    except ConfigError as exc:
        print(f"qtherm: config error: {exc}", file=sys.stderr)
        return ConfigError.exit_code
    except BudgetError as exc:
        print(f"qtherm: sampling budget exhausted: {exc} "
              f"(acceptance ~{exc.acceptance_estimate:.3e})", file=sys.stderr)
        return BudgetError.exit_code
    except NumericError as exc:
        print(f"qtherm: numerical failure: {exc}", file=sys.stderr)
        return NumericError.exit_code
    except ValueError as exc:
        print(f"qtherm: config error: {exc}", file=sys.stderr)
        return ConfigError.exit_code
    print(manifest)
    return 0


if __name__ == "__main__":
    sys.exit(main())
