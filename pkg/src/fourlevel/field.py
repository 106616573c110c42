"""Semiclassical stochastic-field picture of incoherent excitation.

A classical field with a deterministic envelope and a random phase models
incoherent light; only ensemble averages are physical, so the phase process
is chosen for convenience: Wiener phase diffusion with variance rate 2/tau_c,
whose coherence function is exactly exp(-|t-t'|/tau_c).  First-order
perturbation theory accumulates the excitation amplitude, and the ensemble
cross term between two time windows measures whether excitations generated at
different times can still interfere.  Short incoherent pulses approach the
coherent-pulse limit; a sudden turn-on keeps generating excitations forever,
so windows separated by more than tau_c stop interfering no matter how fast
the turn-on was.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

_BATCH = 2048  # realizations per vectorized block


@dataclass(frozen=True)
class PhasePath:
    """One realization of the stochastic phase on a uniform grid."""

    times: np.ndarray
    phi: np.ndarray
    tau_c: float
    seed: int

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        p = np.asarray(self.phi, dtype=float)
        if t.shape != p.shape or t.ndim != 1:
            raise DomainError("times and phi must be matching 1-d arrays")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "phi", p)

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])


@dataclass(frozen=True)
class EnvelopeSpec:
    """Deterministic field envelope: a finite pulse or a step turn-on."""

    kind: str = "step"
    tau_p: float | None = None
    amplitude: float = 1.0

    def __post_init__(self):
        if self.kind not in ("pulse", "step"):
            raise DomainError(f"unknown envelope kind {self.kind!r}")
        if self.kind == "pulse" and (self.tau_p is None or self.tau_p <= 0):
            raise DomainError("pulse envelope needs tau_p > 0")

    def evaluate(self, times) -> np.ndarray:
        t = np.asarray(times, dtype=float)
        if self.kind == "step":
            return np.where(t >= 0.0, self.amplitude, 0.0)
        inside = (t >= 0.0) & (t <= self.tau_p)
        return np.where(inside, self.amplitude, 0.0)


@dataclass(frozen=True)
class FieldRealization:
    path: PhasePath
    envelope: np.ndarray
    spec: EnvelopeSpec


@dataclass(frozen=True)
class VisibilityResult:
    separation: float
    visibility: float
    stderr: float
    n_realizations: int


@dataclass(frozen=True)
class PulseCoherenceRow:
    tau_p: float
    coherence: float  # ensemble <|f|^2> over the coherent-pulse value
    stderr: float


@dataclass(frozen=True)
class PulsedVsSuddenReport:
    tau_c: float
    n_realizations: int
    seed: int
    pulses: tuple[PulseCoherenceRow, ...]
    step_visibility: tuple[VisibilityResult, ...]


def _check_sampling(tau_c: float, dt: float):
    if dt <= 0:
        raise DomainError("dt must be > 0")
    if math.isfinite(tau_c) and dt > tau_c / 10.0:
        raise DomainError(f"dt={dt} too coarse; need dt <= tau_c/10 = {tau_c / 10.0}")


def sample_phase_path(tau_c: float, dt: float, t_end: float, seed: int) -> PhasePath:
    """One Wiener-diffusion phase realization, reproducible from the seed.

    Increment variance is 2*dt/tau_c so the ensemble coherence function is
    exp(-|t-t'|/tau_c).  An infinite tau_c is the coherent limit: a constant
    phase path.
    """
    if tau_c <= 0:
        raise DomainError("tau_c must be > 0")
    _check_sampling(tau_c, dt)
    if t_end <= 0:
        raise DomainError("t_end must be > 0")
    n = int(round(t_end / dt)) + 1
    times = np.arange(n) * dt
    if math.isinf(tau_c):
        phi = np.zeros(n)
    else:
        rng = np.random.default_rng(seed)
        increments = rng.normal(0.0, math.sqrt(2.0 * dt / tau_c), size=n - 1)
        phi = np.concatenate([[0.0], np.cumsum(increments)])
    return PhasePath(times=times, phi=phi, tau_c=float(tau_c), seed=int(seed))


def realize_field(spec: EnvelopeSpec, tau_c: float, dt: float, t_end: float, seed: int) -> FieldRealization:
    path = sample_phase_path(tau_c, dt, t_end, seed)
    return FieldRealization(path=path, envelope=spec.evaluate(path.times), spec=spec)


def excitation_amplitude(envelope, path: PhasePath, detuning: float = 0.0) -> np.ndarray:
    """First-order excitation amplitude accumulated along the phase path.

    f(t) = sum_{s<=t} A(s) exp(i phi(s)) exp(i detuning s) dt.  Linear in the
    envelope; no depletion of the initial state.
    """
    if isinstance(envelope, EnvelopeSpec):
        amp = envelope.evaluate(path.times)
    else:
        amp = np.asarray(envelope, dtype=float)
        if amp.shape != path.times.shape:
            raise DomainError(
                f"envelope grid ({amp.shape}) does not match phase grid ({path.times.shape})"
            )
    phase = np.exp(1j * (path.phi + detuning * path.times))
    return np.cumsum(amp * phase) * path.dt


def _window_sums(rng, n_real: int, n_steps: int, step_var: float, gap_var: float):
    """Per-realization sums of exp(i*phi) over two windows separated by a gap.

    The phase is diffused sample by sample inside each window; the stretch
    between the windows is collapsed into a single Gaussian jump, which is
    exact for Wiener diffusion.
    """
    sum1 = np.empty(n_real, dtype=complex)
    sum2 = np.empty(n_real, dtype=complex)
    sigma = math.sqrt(step_var) if step_var > 0 else 0.0
    gap_sigma = math.sqrt(gap_var) if gap_var > 0 else 0.0
    done = 0
    while done < n_real:
        m = min(_BATCH, n_real - done)
        inc1 = rng.normal(0.0, sigma, size=(m, n_steps)) if sigma else np.zeros((m, n_steps))
        inc1[:, 0] = 0.0  # phase starts at 0 in window 1
        phi1 = np.cumsum(inc1, axis=1)
        jump = rng.normal(0.0, gap_sigma, size=m) if gap_sigma else np.zeros(m)
        inc2 = rng.normal(0.0, sigma, size=(m, n_steps)) if sigma else np.zeros((m, n_steps))
        inc2[:, 0] = 0.0
        phi2 = phi1[:, -1][:, None] + jump[:, None] + np.cumsum(inc2, axis=1)
        sum1[done : done + m] = np.exp(1j * phi1).sum(axis=1)
        sum2[done : done + m] = np.exp(1j * phi2).sum(axis=1)
        done += m
    return sum1, sum2


def interference_visibility(
    env: EnvelopeSpec,
    tau_c: float,
    window_separation: float,
    n_realizations: int,
    seed: int,
    window: float | None = None,
    dt: float | None = None,
) -> VisibilityResult:
    """Normalized ensemble cross term between two excitation windows.

    Both windows have length ``window`` (default tau_c/100); the second starts
    ``window_separation`` after the first.  The estimator is
    |<f1* f2>| / sqrt(<|f1|^2><|f2|^2>), which is exactly 1 at zero
    separation and decays like exp(-separation/tau_c) for short windows.
    """
    if tau_c <= 0 or not math.isfinite(tau_c):
        raise DomainError("tau_c must be positive and finite")
    if n_realizations < 100:
        raise DomainError("need at least 100 realizations")
    if window_separation < 0:
        raise DomainError("window separation must be >= 0")
    if window is None:
        window = tau_c / 100.0
    if window <= 0:
        raise DomainError("degenerate window (length must be > 0)")
    if dt is None:
        dt = window / 20.0
    _check_sampling(tau_c, dt)
    if env.kind == "pulse" and env.tau_p < window_separation + window:
        raise DomainError(
            "degenerate windows: the pulse ends before the second window closes"
        )
    if env.amplitude == 0:
        raise DomainError("degenerate windows: zero envelope amplitude")

    n_steps = max(2, int(round(window / dt)))
    step_var = 2.0 * dt / tau_c

    if window_separation == 0.0:
        # identical windows: the cross term is |f1|^2 and the ratio is exactly 1
        rng = np.random.default_rng(seed)
        sum1, _ = _window_sums(rng, n_realizations, n_steps, step_var, 0.0)
        f1 = env.amplitude * dt * sum1
        power = np.abs(f1) ** 2
        mean_power = power.mean()
        stderr = float(power.std(ddof=1) / math.sqrt(n_realizations) / mean_power)
        return VisibilityResult(0.0, 1.0, stderr, n_realizations)

    if window_separation < window:
        raise DomainError(
            "degenerate windows: separation below the window length makes them overlap"
        )
    gap_var = 2.0 * (window_separation - window) / tau_c
    # diffusion accumulated from the last sample of window 1 to the first of window 2
    gap_var += 2.0 * dt / tau_c if step_var > 0 else 0.0
    rng = np.random.default_rng(seed)
    sum1, sum2 = _window_sums(rng, n_realizations, n_steps, step_var, gap_var)
    f1 = env.amplitude * dt * sum1
    f2 = env.amplitude * dt * sum2
    cross = np.conj(f1) * f2
    norm = math.sqrt(float((np.abs(f1) ** 2).mean()) * float((np.abs(f2) ** 2).mean()))
    mean_cross = cross.mean()
    visibility = float(abs(mean_cross) / norm)
    var = cross.real.var(ddof=1) + cross.imag.var(ddof=1)
    stderr = float(math.sqrt(var / n_realizations) / norm)
    return VisibilityResult(float(window_separation), visibility, stderr, n_realizations)


def pulse_coherence(
    tau_c: float,
    tau_p: float,
    n_realizations: int,
    seed: int,
    dt: float | None = None,
    amplitude: float = 1.0,
) -> PulseCoherenceRow:
    """Ensemble <|f|^2> of an incoherent pulse over the coherent-pulse value.

    Approaches 1 as tau_p/tau_c -> 0 (all excitations inside one coherence
    window) and falls off like 2*tau_c/tau_p for long pulses.
    """
    if tau_p <= 0:
        raise DomainError("tau_p must be > 0")
    if n_realizations < 100:
        raise DomainError("need at least 100 realizations")
    if dt is None:
        dt = min(tau_c / 10.0, tau_p / 64.0)
    _check_sampling(tau_c, dt)
    n_steps = max(2, int(round(tau_p / dt)))
    step_var = 2.0 * dt / tau_c
    rng = np.random.default_rng(seed)
    sums = np.empty(n_realizations, dtype=complex)
    done = 0
    sigma = math.sqrt(step_var)
    while done < n_realizations:
        m = min(_BATCH, n_realizations - done)
        inc = rng.normal(0.0, sigma, size=(m, n_steps))
        inc[:, 0] = 0.0
        phi = np.cumsum(inc, axis=1)
        sums[done : done + m] = np.exp(1j * phi).sum(axis=1)
        done += m
    f = amplitude * dt * sums
    coherent = (amplitude * n_steps * dt) ** 2
    ratio = np.abs(f) ** 2 / coherent
    return PulseCoherenceRow(
        tau_p=float(tau_p),
        coherence=float(ratio.mean()),
        stderr=float(ratio.std(ddof=1) / math.sqrt(n_realizations)),
    )


def pulsed_vs_sudden_report(
    tau_c: float,
    tau_p_grid,
    n_realizations: int,
    seed: int = 0,
    step_separations=(0.0, 1.0, 5.0, 10.0, 20.0),
) -> PulsedVsSuddenReport:
    """Pulse-length scan next to the step-turn-on window visibilities.

    Pulse rows show the approach to the coherent short-pulse limit as
    tau_p/tau_c shrinks; step rows show window interference dying off for
    separations beyond tau_c regardless of how sudden the turn-on is.
    Separations are given in units of tau_c, with window length tau_c.
    """
    taus = [float(v) for v in tau_p_grid]
    if not taus or any(v <= 0 for v in taus):
        raise DomainError("tau_p grid must be nonempty and positive")
    pulses = tuple(
        pulse_coherence(tau_c, tp, n_realizations, seed + 1000 + k)
        for k, tp in enumerate(taus)
    )
    env = EnvelopeSpec(kind="step")
    steps = []
    for k, sep in enumerate(step_separations):
        steps.append(
            interference_visibility(
                env,
                tau_c,
                sep * tau_c,
                n_realizations,
                seed + 2000 + k,
                window=tau_c,
                dt=tau_c / 40.0,
            )
        )
    return PulsedVsSuddenReport(
        tau_c=float(tau_c),
        n_realizations=int(n_realizations),
        seed=int(seed),
        pulses=pulses,
        step_visibility=tuple(steps),
    )
