"""Experiment execution: propagation dispatch, metrics, serialization, sweeps.

Outputs are deterministic down to the byte for a given configuration: floats
are written with their shortest round-trip representation, JSON keys are
sorted, manifests carry no timestamps, and sweep rows are emitted in grid
order no matter how the points were scheduled.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    classify_regime,
    detect_oscillations,
    physicality_audit,
)
from .config import ExperimentConfig, validate_config
from .errors import AnalysisError, ConfigError, EigenbasisIllConditioned, NumericsError
from .field import interference_visibility, pulse_coherence, EnvelopeSpec
from .liouvillian import build_generator
from .propagation import (
    Trajectory,
    default_time_grid,
    linear_time_grid,
    propagate_eigen,
    propagate_ode,
    propagate_ramp,
    steady_state,
)
from .rates import build_rate_table

TRAJECTORY_HEADER = (
    "t,pop_g1,pop_g2,pop_e1,pop_e2,coh_g_re,coh_g_im,coh_g_abs,coh_e_re,coh_e_im,coh_e_abs"
)

SWEEP_COLUMNS = (
    "index",
    "path",
    "value",
    "status",
    "error",
    "observable",
    "amplitude",
    "n_extrema",
    "dominant_frequency",
    "decay_time",
    "steady_coh_g_abs",
    "steady_coh_e_abs",
    "max_trace_drift",
    "min_population",
    "max_bound_violation",
)


def _fmt(value) -> str:
    """Shortest round-trip decimal representation of a float."""
    x = float(value)
    if math.isnan(x):
        return "nan"
    return repr(x)


def time_grid_for(config: ExperimentConfig) -> np.ndarray:
    prop = config.propagation
    t_end = float(prop.get("t_end", 1e4))
    n = int(prop.get("n_times", 600))
    if prop.get("grid", "log") == "linear":
        return linear_time_grid(t_end, 0.0, n)
    return default_time_grid(t_end, float(prop.get("t_start", 1e-2)), n)


def propagate_for_config(config: ExperimentConfig) -> Trajectory:
    """Run the propagation a configuration asks for."""
    spec = config.system_spec()
    rates = build_rate_table(spec)
    p = config.alignment_set()
    prop = config.propagation
    method = prop.get("method", "eigen")
    tol = float(prop.get("tol", 1e-10))
    times = time_grid_for(config)
    initial = config.initial_state()
    eq1c_literal = bool(prop.get("eq1c_literal", False))

    if method == "ramp":
        return propagate_ramp(
            rates,
            p,
            spec.delta_g,
            spec.delta_e,
            config.ramp(),
            initial,
            float(times[-1]),
            tol,
            times,
            eq1c_literal,
        )
    gen = build_generator(rates, p, spec.delta_g, spec.delta_e, eq1c_literal)
    if method == "ode":
        return propagate_ode(gen, initial, float(times[-1]), tol, times)
    try:
        return propagate_eigen(gen, initial, times)
    except EigenbasisIllConditioned:
        return propagate_ode(gen, initial, float(times[-1]), tol, times)


def trajectory_csv(traj: Trajectory) -> str:
    """Serialize a trajectory with the fixed column schema."""
    buf = io.StringIO()
    buf.write(TRAJECTORY_HEADER + "\n")
    s = traj.states
    coh_g = np.hypot(s[:, 4], s[:, 5])
    coh_e = np.hypot(s[:, 6], s[:, 7])
    for k, t in enumerate(traj.times):
        row = [
            t,
            s[k, 0],
            s[k, 1],
            s[k, 2],
            s[k, 3],
            s[k, 4],
            s[k, 5],
            coh_g[k],
            s[k, 6],
            s[k, 7],
            coh_e[k],
        ]
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def compute_metrics(config: ExperimentConfig, traj: Trajectory) -> dict:
    """Oscillation metrics, regime classification, steady state and audit."""
    spec = config.system_spec()
    rates = build_rate_table(spec)
    p = config.alignment_set()
    gen = build_generator(
        rates, p, spec.delta_g, spec.delta_e, bool(config.propagation.get("eq1c_literal", False))
    )

    metrics: dict = {"oscillations": {}, "notes": []}
    analysis = config.analysis
    window = analysis.get("window")
    for name in analysis.get("observables", []):
        if window is None:
            continue
        try:
            m = detect_oscillations(traj, name, (float(window[0]), float(window[1])))
        except AnalysisError as exc:
            metrics["notes"].append(f"oscillations[{name}]: {exc}")
            continue
        metrics["oscillations"][name] = {
            "amplitude": m.amplitude,
            "n_extrema": m.n_extrema,
            "dominant_frequency": m.dominant_frequency,
            "decay_time": None if math.isnan(m.decay_time) else m.decay_time,
        }

    regime = classify_regime(rates, spec.delta_g, spec.delta_e, alignment=p)
    metrics["regime"] = {
        "ground": regime.ground_regime,
        "excited": regime.excited_regime,
        "ratio_g": regime.ratio_g,
        "ratio_e": regime.ratio_e,
        "gamma_g": regime.gamma_g,
        "gamma_e": regime.gamma_e,
    }

    try:
        ss = steady_state(gen)
        if ss.unique:
            state = ss.state
            metrics["steady_state"] = {
                "unique": True,
                "pop_g1": state.pop_g1,
                "pop_g2": state.pop_g2,
                "pop_e1": state.pop_e1,
                "pop_e2": state.pop_e2,
                "coh_g_abs": state.coh_g_abs,
                "coh_e_abs": state.coh_e_abs,
            }
        else:
            metrics["steady_state"] = {"unique": False, "dimension": ss.dimension}
    except NumericsError as exc:
        metrics["steady_state"] = {"unique": False, "error": str(exc)}

    audit = physicality_audit(traj)
    metrics["audit"] = {
        "max_trace_drift": audit.max_trace_drift,
        "min_population": audit.min_population,
        "max_bound_violation": audit.max_bound_violation,
    }
    return metrics


def _manifest(config: ExperimentConfig, extra: dict | None = None) -> dict:
    grid = time_grid_for(config)
    doc = {
        "version": __version__,
        "config": config.to_dict(),
        "grid": {
            "kind": config.propagation.get("grid", "log"),
            "n_times": int(grid.size),
            "t_first": float(grid[0]),
            "t_last": float(grid[-1]),
        },
    }
    if extra:
        doc.update(extra)
    return doc


def _dump_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _sanitize(obj):
    """Replace NaN/inf with None so the JSON stays strict."""
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


@dataclass(frozen=True)
class RunResult:
    trajectory: Trajectory
    metrics: dict
    out_dir: Path | None


def run_experiment(config: ExperimentConfig, out_dir=None) -> RunResult:
    """Propagate, analyze and (optionally) write the result bundle to disk."""
    traj = propagate_for_config(config)
    metrics = compute_metrics(config, traj)
    out_path = None
    if out_dir is not None:
        out_path = Path(out_dir)
        out_path.mkdir(parents=True, exist_ok=True)
        formats = config.output_formats
        if "csv" in formats:
            (out_path / "trajectory.csv").write_text(trajectory_csv(traj))
        if "json" in formats:
            (out_path / "metrics.json").write_text(_dump_json(_sanitize(metrics)))
        (out_path / "manifest.json").write_text(_dump_json(_manifest(config)))
    return RunResult(trajectory=traj, metrics=metrics, out_dir=out_path)


def _sweep_row(args) -> dict:
    index, raw, path, value = args
    row = {key: "" for key in SWEEP_COLUMNS}
    row["index"] = str(index)
    row["path"] = path
    row["value"] = _fmt(value)
    try:
        config = validate_config(raw).with_value(path, value)
        traj = propagate_for_config(config)
        metrics = compute_metrics(config, traj)
    except (ConfigError, NumericsError, AnalysisError, ValueError) as exc:
        row["status"] = "error"
        row["error"] = str(exc).replace("\n", " ")
        return row
    row["status"] = "ok"
    osc = metrics.get("oscillations", {})
    if osc:
        name, entry = next(iter(osc.items()))
        row["observable"] = name
        row["amplitude"] = _fmt(entry["amplitude"])
        row["n_extrema"] = str(entry["n_extrema"])
        row["dominant_frequency"] = _fmt(entry["dominant_frequency"])
        decay = entry["decay_time"]
        row["decay_time"] = _fmt(decay) if decay is not None else "nan"
    ss = metrics.get("steady_state", {})
    if ss.get("unique"):
        row["steady_coh_g_abs"] = _fmt(ss["coh_g_abs"])
        row["steady_coh_e_abs"] = _fmt(ss["coh_e_abs"])
    audit = metrics["audit"]
    row["max_trace_drift"] = _fmt(audit["max_trace_drift"])
    row["min_population"] = _fmt(audit["min_population"])
    row["max_bound_violation"] = _fmt(audit["max_bound_violation"])
    return row


def run_sweep(config: ExperimentConfig, out_dir=None, jobs: int = 1) -> list[dict]:
    """One row of metrics per sweep grid point, in grid order.

    Points execute independently (optionally across processes); failures are
    recorded in their row and do not stop the sweep.
    """
    sweep = config.sweep
    if not sweep:
        raise ConfigError(["sweep: configuration has no sweep section"])
    path, values = sweep["path"], sweep["values"]
    tasks = [(i, config.to_dict(), path, v) for i, v in enumerate(values)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_row, tasks))
    else:
        rows = [_sweep_row(t) for t in tasks]

    if out_dir is not None:
        out_path = Path(out_dir)
        out_path.mkdir(parents=True, exist_ok=True)
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        (out_path / "sweep.csv").write_text(buf.getvalue())
        (out_path / "manifest.json").write_text(
            _dump_json(_manifest(config, {"sweep": {"path": path, "n_points": len(values)}}))
        )
    return rows


def run_field(config: ExperimentConfig, out_dir=None) -> dict:
    """Stochastic-field comparison tables from the config's field section."""
    section = config.field_section
    if not section:
        raise ConfigError(["field: configuration has no field section"])
    tau_c = float(section.get("tau_c", 1.0))
    n_real = int(section.get("n_realizations", 10000))
    seed = int(section.get("seed", config.seed))
    separations = [float(v) for v in section.get("separations", [0.0, 0.5, 1.0, 2.0, 5.0, 10.0])]
    tau_ps = [float(v) for v in section.get("tau_p", [0.01, 0.1, 1.0, 10.0, 100.0])]
    window = float(section.get("window", 0.01))
    env = EnvelopeSpec(kind="step")

    vis_rows = []
    for k, sep in enumerate(separations):
        res = interference_visibility(
            env, tau_c, sep * tau_c, n_real, seed + k, window=window * tau_c
        )
        vis_rows.append(
            {"separation_over_tau_c": sep, "visibility": res.visibility, "stderr": res.stderr}
        )
    pulse_rows = []
    for k, tp in enumerate(tau_ps):
        res = pulse_coherence(tau_c, tp * tau_c, n_real, seed + 1000 + k)
        pulse_rows.append(
            {"tau_p_over_tau_c": tp, "coherence": res.coherence, "stderr": res.stderr}
        )

    if out_dir is not None:
        out_path = Path(out_dir)
        out_path.mkdir(parents=True, exist_ok=True)
        for name, rows, columns in (
            ("visibility.csv", vis_rows, ("separation_over_tau_c", "visibility", "stderr")),
            ("pulses.csv", pulse_rows, ("tau_p_over_tau_c", "coherence", "stderr")),
        ):
            buf = io.StringIO()
            buf.write(",".join(columns) + "\n")
            for row in rows:
                buf.write(",".join(_fmt(row[c]) for c in columns) + "\n")
            (out_path / name).write_text(buf.getvalue())
        (out_path / "manifest.json").write_text(
            _dump_json(_manifest(config, {"field": {"tau_c": tau_c, "n_realizations": n_real, "seed": seed}}))
        )
    return {"visibility": vis_rows, "pulses": pulse_rows}
