"""Command-line interface.

Verbs: ``simulate`` (one propagation, bundle on disk), ``sweep`` (parameter
grid, optionally parallel), ``steady-state`` (null-space state to stdout),
``ubiquity`` (dipole orthogonality report), ``field`` (stochastic-field
comparison tables).  Exit codes: 0 ok, 1 configuration error, 2 numerical
error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .config import ExperimentConfig, load_config, validate_config
from .errors import AnalysisError, ConfigError, DomainError, NumericsError
from .geometry import ubiquity_check
from .liouvillian import build_generator
from .presets import PRESET_NAMES, load_preset
from .propagation import steady_state
from .rates import build_rate_table
from .runner import run_experiment, run_field, run_sweep

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3


def _deep_merge(base: dict, overlay: dict) -> dict:
    out = dict(base)
    for key, value in overlay.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = value
    return out


def _resolve_config(args) -> ExperimentConfig:
    preset = getattr(args, "preset", None)
    config_path = getattr(args, "config", None)
    if preset is None and config_path is None:
        raise ConfigError(["arguments: provide --config and/or --preset"])
    if preset is not None and config_path is not None:
        # the file is a partial overlay on the preset; only the merge validates
        base = load_preset(preset).to_dict()
        try:
            overlay = json.loads(open(config_path).read())
        except OSError as exc:
            raise ConfigError([f"{config_path}: cannot read file: {exc}"])
        except json.JSONDecodeError as exc:
            raise ConfigError(
                [f"{config_path}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"]
            )
        if not isinstance(overlay, dict):
            raise ConfigError([f"{config_path}: overlay must be an object"])
        return validate_config(_deep_merge(base, overlay))
    if preset is not None:
        return load_preset(preset)
    return load_config(config_path)


def _cmd_simulate(args) -> int:
    config = _resolve_config(args)
    result = run_experiment(config, args.out)
    print(f"wrote trajectory ({len(result.trajectory)} samples) to {result.out_dir}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    config = _resolve_config(args)
    rows = run_sweep(config, args.out, jobs=args.jobs)
    failures = sum(1 for row in rows if row["status"] != "ok")
    print(f"swept {len(rows)} points ({failures} failed) into {args.out}")
    return EXIT_OK


def _cmd_steady_state(args) -> int:
    config = _resolve_config(args)
    spec = config.system_spec()
    rates = build_rate_table(spec)
    gen = build_generator(rates, config.alignment_set(), spec.delta_g, spec.delta_e)
    result = steady_state(gen)
    if result.unique:
        state = result.state
        doc = {
            "unique": True,
            "pop_g1": state.pop_g1,
            "pop_g2": state.pop_g2,
            "pop_e1": state.pop_e1,
            "pop_e2": state.pop_e2,
            "coh_g_re": state.coh_g_re,
            "coh_g_im": state.coh_g_im,
            "coh_e_re": state.coh_e_re,
            "coh_e_im": state.coh_e_im,
            "coh_g_abs": state.coh_g_abs,
            "coh_e_abs": state.coh_e_abs,
        }
    else:
        doc = {
            "unique": False,
            "dimension": result.dimension,
            "basis": [list(map(float, result.basis[:, k])) for k in range(result.dimension)],
        }
    print(json.dumps(doc, indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_ubiquity(args) -> int:
    try:
        doc = json.loads(open(args.dipoles).read())
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as exc:
        print(f"config error: {args.dipoles}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if isinstance(doc, dict):
        dipoles = doc.get("dipoles")
        tolerance = float(doc.get("tolerance", args.tolerance))
    else:
        dipoles, tolerance = doc, args.tolerance
    if not isinstance(dipoles, list):
        print("config error: dipoles file must hold a list of 3-vectors", file=sys.stderr)
        return EXIT_CONFIG
    report = ubiquity_check([tuple(v) for v in dipoles], tolerance)
    print(
        json.dumps(
            {
                "n_transitions": report.n_transitions,
                "max_abs_alignment": report.max_abs_alignment,
                "all_mutually_orthogonal": report.all_mutually_orthogonal,
                "offending_pairs": [list(pair) for pair in report.offending_pairs],
            },
            indent=2,
            sort_keys=True,
        )
    )
    return EXIT_OK


def _cmd_field(args) -> int:
    config = _resolve_config(args)
    tables = run_field(config, args.out)
    print(
        f"field run: {len(tables['visibility'])} visibility rows, "
        f"{len(tables['pulses'])} pulse rows"
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fourlevel",
        description="Four-level system dynamics under incoherent driving",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_args(p, out_required):
        p.add_argument("--config", help="configuration file (JSON)")
        p.add_argument("--preset", choices=PRESET_NAMES, help="named preset to start from")
        if out_required is not None:
            p.add_argument("--out", required=out_required, help="output directory")

    p_sim = sub.add_parser("simulate", help="run one propagation and write the bundle")
    add_config_args(p_sim, out_required=True)
    p_sim.set_defaults(func=_cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="run the config's parameter sweep")
    add_config_args(p_sweep, out_required=True)
    p_sweep.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_ss = sub.add_parser("steady-state", help="print the steady state as JSON")
    add_config_args(p_ss, out_required=None)
    p_ss.set_defaults(func=_cmd_steady_state)

    p_ubi = sub.add_parser("ubiquity", help="mutual-orthogonality report for a dipole list")
    p_ubi.add_argument("--dipoles", required=True, help="JSON file with the dipole list")
    p_ubi.add_argument("--tolerance", type=float, default=1e-12)
    p_ubi.set_defaults(func=_cmd_ubiquity)

    p_field = sub.add_parser("field", help="stochastic-field comparison tables")
    add_config_args(p_field, out_required=False)
    p_field.set_defaults(func=_cmd_field)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        for line in exc.errors:
            print(f"config error: {line}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericsError, AnalysisError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
