"""Experiment configuration: JSON schema, validation, round-tripping.

A configuration is a JSON object with the sections below; ``load_config``
validates the whole document and reports every problem it finds, each tagged
with the dotted path of the offending entry.

    {
      "comment":  "free text (optional)",
      "seed":     1234,
      "system":   {"mode": "direct_rates", "gamma": [[1.5,1.5],[0.5,0.5]],
                   "delta_g": 0.3, "delta_e": 0.5,
                   "bath": {"kind": "single", "nbar": 0.05}},
      "alignment": {"p_g1": 1, ...}           # or {"dipoles": {"g1e1": [x,y,z], ...}}
      "propagation": {"method": "eigen", "t_end": 1e4, "grid": "log",
                      "t_start": 1e-2, "n_times": 600, "tol": 1e-10,
                      "ramp": {"shape": "sudden", "tau_r": 0},
                      "eq1c_literal": false, "initial": "ground_mixture"},
      "analysis": {"observables": ["pop_g1"], "window": [5, 60]},
      "sweep":    {"path": "system.delta_e", "values": [0, 0.5, 1, 2]},
      "field":    {"tau_c": 1.0, "n_realizations": 10000, ...},
      "output":   {"formats": ["csv", "json"]}
    }

Rates are in units of the mean spontaneous rate and times in its inverse,
matching how every preset states its parameters.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .geometry import TRANSITIONS, AlignmentSet, alignment_set_4ls
from .liouvillian import ReducedState
from .propagation import RampProfile
from .rates import BathSpec, SystemSpec

_ALIGNMENT_KEYS = ("p_g1", "p_g2", "p_e1", "p_e2", "p_par", "p_cross")


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated configuration with typed accessors into the raw document."""

    raw: dict = field(repr=False)

    # ---- typed views ------------------------------------------------------
    @property
    def seed(self) -> int:
        return int(self.raw.get("seed", 0))

    @property
    def comment(self) -> str:
        return str(self.raw.get("comment", ""))

    def system_spec(self) -> SystemSpec:
        sys = self.raw["system"]
        bath_raw = sys["bath"]
        nbar = bath_raw.get("nbar")
        bath = BathSpec(
            kind=bath_raw.get("kind", "single"),
            nbar=tuple(nbar) if isinstance(nbar, list) else nbar,
            temperature=(
                tuple(bath_raw["temperature"])
                if isinstance(bath_raw.get("temperature"), list)
                else bath_raw.get("temperature")
            ),
        )
        gamma = sys.get("gamma")
        return SystemSpec(
            mode=sys.get("mode", "direct_rates"),
            delta_g=float(sys["delta_g"]),
            delta_e=float(sys["delta_e"]),
            bath=bath,
            gamma=tuple(tuple(row) for row in gamma) if gamma is not None else None,
            dipoles=self.raw.get("alignment", {}).get("dipoles"),
            delta_0=float(sys["delta_0"]) if "delta_0" in sys else None,
            vacuum_factor=float(sys.get("vacuum_factor", 1.0)),
        )

    def alignment_set(self) -> AlignmentSet:
        align = self.raw["alignment"]
        if "dipoles" in align:
            dip = align["dipoles"]
            return alignment_set_4ls(*(tuple(dip[t]) for t in TRANSITIONS))
        return AlignmentSet(**{k: float(align[k]) for k in _ALIGNMENT_KEYS})

    def ramp(self) -> RampProfile:
        ramp = self.raw.get("propagation", {}).get("ramp", {"shape": "sudden", "tau_r": 0.0})
        return RampProfile(shape=ramp.get("shape", "sudden"), tau_r=float(ramp.get("tau_r", 0.0)))

    def initial_state(self) -> ReducedState:
        init = self.raw.get("propagation", {}).get("initial", "ground_mixture")
        if init == "ground_mixture":
            return ReducedState.ground_mixture()
        return ReducedState.from_array(init)

    @property
    def propagation(self) -> dict:
        return self.raw.get("propagation", {})

    @property
    def analysis(self) -> dict:
        return self.raw.get("analysis", {})

    @property
    def sweep(self) -> dict | None:
        return self.raw.get("sweep")

    @property
    def field_section(self) -> dict | None:
        return self.raw.get("field")

    @property
    def output_formats(self) -> list[str]:
        return list(self.raw.get("output", {}).get("formats", ["csv", "json"]))

    # ---- serialization ----------------------------------------------------
    def to_dict(self) -> dict:
        return copy.deepcopy(self.raw)

    def to_json(self) -> str:
        return json.dumps(self.raw, indent=2, sort_keys=True) + "\n"

    def with_value(self, path: str, value) -> "ExperimentConfig":
        """A copy with one dotted-path entry replaced (used by sweeps)."""
        raw = copy.deepcopy(self.raw)
        set_path(raw, path, value)
        return validate_config(raw)


# ---- dotted-path helpers ---------------------------------------------------


def get_path(doc, path: str):
    node = doc
    for part in path.split("."):
        if isinstance(node, list):
            node = node[int(part)]
        elif isinstance(node, dict) and part in node:
            node = node[part]
        else:
            raise KeyError(path)
    return node


def set_path(doc, path: str, value):
    parts = path.split(".")
    node = doc
    for part in parts[:-1]:
        node = node[int(part)] if isinstance(node, list) else node[part]
    last = parts[-1]
    if isinstance(node, list):
        node[int(last)] = value
    else:
        if last not in node:
            raise KeyError(path)
        node[last] = value


# ---- validation -------------------------------------------------------------


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def validate_config(raw: dict) -> ExperimentConfig:
    """Validate a raw document, collecting every problem before failing."""
    errors: list[str] = []

    def err(path, message):
        errors.append(f"{path}: {message}")

    if not isinstance(raw, dict):
        raise ConfigError(["document: top level must be an object"])

    sys = raw.get("system")
    if not isinstance(sys, dict):
        err("system", "missing or not an object")
        sys = {}
    mode = sys.get("mode", "direct_rates")
    if mode not in ("direct_rates", "physical"):
        err("system.mode", f"unknown mode {mode!r}")
    for key in ("delta_g", "delta_e"):
        value = sys.get(key)
        if not _is_number(value):
            err(f"system.{key}", "missing or not a number")
        elif value < 0:
            err(f"system.{key}", f"must be >= 0, got {value}")
    if mode == "direct_rates":
        gamma = sys.get("gamma")
        if (
            not isinstance(gamma, list)
            or len(gamma) != 2
            or any(not isinstance(row, list) or len(row) != 2 for row in gamma)
        ):
            err("system.gamma", "must be a 2x2 array of rates")
        else:
            for i, row in enumerate(gamma):
                for j, value in enumerate(row):
                    if not _is_number(value) or value < 0:
                        err("system.gamma", f"entry [{i}][{j}] must be a number >= 0, got {value!r}")
    else:
        if not _is_number(sys.get("delta_0")) or sys.get("delta_0", 0) <= 0:
            err("system.delta_0", "physical mode needs delta_0 > 0")

    bath = sys.get("bath")
    if not isinstance(bath, dict):
        err("system.bath", "missing or not an object")
    else:
        kind = bath.get("kind", "single")
        if kind not in ("single", "per_ground_state"):
            err("system.bath.kind", f"unknown kind {kind!r}")
        has_nbar = "nbar" in bath
        has_temp = "temperature" in bath
        if has_nbar == has_temp:
            err("system.bath", "exactly one of nbar or temperature required")
        if has_nbar:
            nbar = bath["nbar"]
            values = nbar if isinstance(nbar, list) else [nbar]
            if kind == "per_ground_state" and (not isinstance(nbar, list) or len(nbar) != 2):
                err("system.bath.nbar", "per_ground_state bath needs [nbar_g1, nbar_g2]")
            if kind == "single" and isinstance(nbar, list):
                err("system.bath.nbar", "single bath takes a scalar nbar")
            for value in values:
                if not _is_number(value) or value < 0:
                    err("system.bath.nbar", f"occupations must be numbers >= 0, got {value!r}")
        if has_temp and mode == "direct_rates" and "delta_0" not in sys:
            err("system.bath.temperature", "temperature-specified bath needs system.delta_0")

    align = raw.get("alignment")
    if not isinstance(align, dict):
        err("alignment", "missing or not an object")
    else:
        has_set = any(k in align for k in _ALIGNMENT_KEYS)
        has_dipoles = "dipoles" in align
        if has_set == has_dipoles:
            err("alignment", "provide exactly one of an alignment set or a dipole list")
        if has_set:
            for key in _ALIGNMENT_KEYS:
                value = align.get(key)
                if not _is_number(value):
                    err(f"alignment.{key}", "missing or not a number")
                elif not -1.0 <= value <= 1.0:
                    err(f"alignment.{key}", f"must lie in [-1, 1], got {value}")
        if has_dipoles:
            dip = align["dipoles"]
            if not isinstance(dip, dict):
                err("alignment.dipoles", "must map transition labels to 3-vectors")
            else:
                for t in TRANSITIONS:
                    vec = dip.get(t)
                    if not isinstance(vec, list) or len(vec) != 3 or not all(map(_is_number, vec)):
                        err(f"alignment.dipoles.{t}", "missing or not a 3-vector")
        if mode == "physical" and not has_dipoles:
            err("alignment", "physical mode needs alignment.dipoles")

    prop = raw.get("propagation", {})
    if not isinstance(prop, dict):
        err("propagation", "not an object")
        prop = {}
    method = prop.get("method", "eigen")
    if method not in ("eigen", "ode", "ramp"):
        err("propagation.method", f"unknown method {method!r}")
    if not _is_number(prop.get("t_end", 1.0)) or prop.get("t_end", 1.0) <= 0:
        err("propagation.t_end", "must be a number > 0")
    if prop.get("grid", "log") not in ("log", "linear"):
        err("propagation.grid", f"unknown grid {prop.get('grid')!r}")
    if not _is_number(prop.get("tol", 1e-10)) or prop.get("tol", 1e-10) <= 0:
        err("propagation.tol", "must be a number > 0")
    ramp = prop.get("ramp", {})
    if not isinstance(ramp, dict):
        err("propagation.ramp", "not an object")
    else:
        shape = ramp.get("shape", "sudden")
        tau_r = ramp.get("tau_r", 0.0)
        if shape not in ("sudden", "linear", "exponential"):
            err("propagation.ramp.shape", f"unknown shape {shape!r}")
        if not _is_number(tau_r) or tau_r < 0:
            err("propagation.ramp.tau_r", "must be a number >= 0")
        elif shape == "sudden" and tau_r != 0:
            err("propagation.ramp", "sudden means tau_r = 0")
        elif shape != "sudden" and tau_r == 0:
            err("propagation.ramp", f"{shape} ramp needs tau_r > 0")
    init = prop.get("initial", "ground_mixture")
    if init != "ground_mixture" and (
        not isinstance(init, list) or len(init) != 8 or not all(map(_is_number, init))
    ):
        err("propagation.initial", "must be 'ground_mixture' or an 8-vector")

    analysis = raw.get("analysis", {})
    if not isinstance(analysis, dict):
        err("analysis", "not an object")
    else:
        from .propagation import OBSERVABLES

        for name in analysis.get("observables", []):
            if name not in OBSERVABLES:
                err("analysis.observables", f"unknown observable {name!r}")
        window = analysis.get("window")
        if window is not None and (
            not isinstance(window, list)
            or len(window) != 2
            or not all(map(_is_number, window))
            or not window[0] < window[1]
        ):
            err("analysis.window", "must be [t_start, t_end] with t_start < t_end")

    sweep = raw.get("sweep")
    if sweep is not None:
        if not isinstance(sweep, dict):
            err("sweep", "not an object")
        else:
            path = sweep.get("path")
            if not isinstance(path, str) or not path:
                err("sweep.path", "missing or not a string")
            else:
                try:
                    get_path(raw, path)
                except (KeyError, IndexError, ValueError):
                    err("sweep.path", f"path {path!r} does not exist in the config")
            values = sweep.get("values")
            if not isinstance(values, list) or not values:
                err("sweep.values", "must be a nonempty array")

    fld = raw.get("field")
    if fld is not None:
        if not isinstance(fld, dict):
            err("field", "not an object")
        else:
            if not _is_number(fld.get("tau_c", 1.0)) or fld.get("tau_c", 1.0) <= 0:
                err("field.tau_c", "must be a number > 0")
            n_real = fld.get("n_realizations", 10000)
            if not isinstance(n_real, int) or n_real < 100:
                err("field.n_realizations", "must be an integer >= 100")

    output = raw.get("output", {})
    if not isinstance(output, dict):
        err("output", "not an object")
    else:
        for fmt in output.get("formats", []):
            if fmt not in ("csv", "json"):
                err("output.formats", f"unknown format {fmt!r}")

    if "seed" in raw and not isinstance(raw["seed"], int):
        err("seed", "must be an integer")

    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(raw=raw)


def loads_config(text: str, source: str = "<string>") -> ExperimentConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"{source}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"])
    return validate_config(raw)


def load_config(path) -> ExperimentConfig:
    """Read, parse and validate a configuration file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError([f"{path}: cannot read file: {exc}"])
    return loads_config(text, source=str(path))
