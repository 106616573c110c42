"""Trajectory analysis: damping regimes, oscillations, plateaus, physicality.

The oscillation detector is deliberately detection-limited: an oscillation
only counts when the observable itself reverses direction (alternating
extrema above a prominence floor).  Sub-threshold ripples riding a steeper
baseline report zero amplitude and zero extrema, which is what "the
oscillations vanish" means operationally.  Frequency and decay time come from
a damped-sinusoid least-squares fit seeded by the extrema spacing; a plain
FFT-peak readout cannot resolve heavily damped bursts (for decay rate a and
frequency w0 with a > w0 the magnitude spectrum peaks at zero frequency), so
the transform only seeds the fit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import median_filter
from scipy.optimize import curve_fit
from scipy.signal import find_peaks

from .errors import AnalysisError, DomainError
from .geometry import AlignmentSet
from .liouvillian import ReducedState, build_generator
from .propagation import Trajectory, linear_time_grid, propagate_eigen, propagate_ode
from .errors import EigenbasisIllConditioned
from .rates import RateSet


@dataclass(frozen=True)
class RegimeReport:
    """Damping classification of each manifold by splitting / relaxation rate."""

    ground_regime: str
    excited_regime: str
    ratio_g: float
    ratio_e: float
    gamma_g: float
    gamma_e: float
    refined_g: float | None = None
    refined_e: float | None = None


@dataclass(frozen=True)
class OscillationMetrics:
    observable: str
    dominant_frequency: float  # angular, units of gamma_mean
    amplitude: float  # peak-to-trough of the detrended oscillation
    n_extrema: int
    decay_time: float  # 1/gamma_mean units; NaN when no oscillation detected


@dataclass(frozen=True)
class PlateauWindow:
    t_start: float
    t_end: float
    level: float

    @property
    def decades(self) -> float:
        return math.log10(self.t_end / self.t_start)


@dataclass(frozen=True)
class AuditReport:
    max_trace_drift: float
    min_population: float
    max_bound_violation: float


def classify_regime(
    rates: RateSet,
    delta_g: float,
    delta_e: float,
    margin: float = 0.2,
    alignment: AlignmentSet | None = None,
) -> RegimeReport:
    """Underdamped / overdamped / crossover per manifold.

    The excited relaxation scale is the mean total emission rate out of an
    excited state; the ground scale is the mean total pumping rate out of a
    ground state.  A manifold is underdamped when splitting/rate > 1+margin,
    overdamped below 1-margin, crossover between.  The refined two-level
    diagnostic 2*sqrt(delta^2 + (1-p^2)*G1*G2)/(G1+G2) is reported alongside
    (values well below 1 mean overdamped); it uses the mean shared-state
    alignment, taken as 1 when no alignment set is supplied.
    """
    emis = 1.0 + rates.nbar
    out_e = [(emis[:, b] * rates.gamma[:, b]).sum() for b in range(2)]  # e_b emission
    out_g = [rates.r[a, :].sum() for a in range(2)]  # g_a pumping
    gamma_e = float(np.mean(out_e))
    gamma_g = float(np.mean(out_g))

    def classify(ratio: float) -> str:
        if ratio > 1.0 + margin:
            return "underdamped"
        if ratio < 1.0 - margin:
            return "overdamped"
        return "crossover"

    ratio_e = delta_e / gamma_e if gamma_e > 0 else math.inf
    ratio_g = delta_g / gamma_g if gamma_g > 0 else math.inf

    p_for_e = 1.0 if alignment is None else 0.5 * (abs(alignment.p_g1) + abs(alignment.p_g2))
    p_for_g = 1.0 if alignment is None else 0.5 * (abs(alignment.p_e1) + abs(alignment.p_e2))

    def refined(delta, p, g1, g2):
        tot = g1 + g2
        if tot <= 0:
            return None
        return float(2.0 * math.sqrt(delta**2 + (1.0 - p**2) * g1 * g2) / tot)

    return RegimeReport(
        ground_regime=classify(ratio_g),
        excited_regime=classify(ratio_e),
        ratio_g=float(ratio_g),
        ratio_e=float(ratio_e),
        gamma_g=gamma_g,
        gamma_e=gamma_e,
        refined_g=refined(delta_g, p_for_g, *out_g),
        refined_e=refined(delta_e, p_for_e, *out_e),
    )


def _alternating_extrema(values: np.ndarray, prominence: float) -> np.ndarray:
    """Sorted indices of maxima and minima above the prominence floor."""
    peaks, _ = find_peaks(values, prominence=prominence)
    troughs, _ = find_peaks(-values, prominence=prominence)
    return np.sort(np.concatenate([peaks, troughs]))


def detect_oscillations(
    traj: Trajectory,
    observable: str,
    window: tuple[float, float],
    n_resample: int = 4096,
    floor: float = 1e-8,
) -> OscillationMetrics:
    """Quantify oscillations of one observable inside a time window.

    Pipeline: uniform resampling; extrema of the raw observable establish
    whether an oscillation is present and seed its period; the baseline is
    removed with a cascaded one-period moving median (or a linear fit when
    fewer than three periods fit in the window); amplitude is the largest
    swing between consecutive detrended extrema; frequency and decay time are
    refined by fitting a damped sinusoid to the detrended signal.
    """
    t0, t1 = float(window[0]), float(window[1])
    sel = (traj.times >= t0) & (traj.times <= t1)
    if int(sel.sum()) < 64:
        raise AnalysisError(
            f"window [{t0}, {t1}] holds {int(sel.sum())} samples; need at least 64"
        )
    t_raw = traj.times[sel]
    y_raw = traj.observable(observable)[sel]

    tu = np.linspace(t_raw[0], t_raw[-1], n_resample)
    yu = np.interp(tu, t_raw, y_raw)
    dt = tu[1] - tu[0]
    span = tu[-1] - tu[0]

    # oscillation evidence: direction reversals of the observable itself
    raw_ptt = float(yu.max() - yu.min())
    prom_raw = max(floor, 1e-4 * raw_ptt)
    ext_raw = _alternating_extrema(yu, prom_raw)
    n_extrema = int(ext_raw.size)
    significant = n_extrema >= 2

    # period seed
    if significant:
        period = 2.0 * float(np.median(np.diff(tu[ext_raw])))
    else:
        resid = yu - np.polyval(np.polyfit(tu, yu, 1), tu)
        padded = 8 * n_resample
        spectrum = np.abs(np.fft.rfft(resid * np.hanning(n_resample), padded))
        freqs = np.fft.rfftfreq(padded, dt)
        lo = max(1, int(np.searchsorted(freqs, 1.0 / span)))
        hi = int(np.searchsorted(freqs, 1.0 / (8.0 * dt)))
        if hi <= lo:
            hi = lo + 1
        k = lo + int(np.argmax(spectrum[lo:hi]))
        period = 1.0 / freqs[k] if freqs[k] > 0 else span

    # detrend
    if period <= span / 3.0:
        kernel = max(3, int(round(period / dt))) | 1
        base = median_filter(yu, size=kernel, mode="nearest")
        resid = yu - base
        base2 = median_filter(resid, size=kernel, mode="nearest")
        detr = resid - base2
        half = kernel // 2
        detr, t_d = detr[half : n_resample - half], tu[half : n_resample - half]
    else:
        detr = yu - np.polyval(np.polyfit(tu, yu, 1), tu)
        t_d = tu

    ptt = float(detr.max() - detr.min())
    if not significant:
        return OscillationMetrics(
            observable=observable,
            dominant_frequency=0.0,
            amplitude=0.0,
            n_extrema=n_extrema,
            decay_time=math.nan,
        )

    ext_d = _alternating_extrema(detr, max(floor, 0.05 * ptt))
    if ext_d.size >= 2:
        amplitude = float(np.abs(np.diff(detr[ext_d])).max())
    else:
        amplitude = ptt

    omega0 = math.pi / float(np.median(np.diff(tu[ext_raw])))
    g0 = 1.0 / span
    if ext_d.size >= 2:
        heights = np.abs(detr[ext_d])
        ok = heights > 0
        if ok.sum() >= 2:
            slope = np.polyfit(t_d[ext_d[ok]], np.log(heights[ok]), 1)[0]
            if slope < 0:
                g0 = -slope
    omega, decay_time = omega0, (1.0 / g0 if g0 > 0 else math.nan)

    start = t_d[0]

    def model(t, c, slope, a, b, g, w):
        # the linear term absorbs residual baseline the detrend left behind
        envelope = np.exp(-np.clip(g * (t - start), -60.0, 60.0))
        return (
            c
            + slope * (t - start)
            + envelope * (a * np.cos(w * (t - start)) + b * np.sin(w * (t - start)))
        )

    try:
        # linear solve at the seed (g0, omega0) gives the start point
        envelope = np.exp(-np.clip(g0 * (t_d - start), -60.0, 60.0))
        design = np.column_stack(
            [
                np.ones_like(t_d),
                t_d - start,
                envelope * np.cos(omega0 * (t_d - start)),
                envelope * np.sin(omega0 * (t_d - start)),
            ]
        )
        c0, s0, a0, b0 = np.linalg.lstsq(design, detr, rcond=None)[0]
        popt, _ = curve_fit(
            model,
            t_d,
            detr,
            p0=[c0, s0, a0, b0, g0, omega0],
            bounds=(
                [-np.inf, -np.inf, -np.inf, -np.inf, 0.0, omega0 / 4.0],
                [np.inf, np.inf, np.inf, np.inf, np.inf, omega0 * 4.0],
            ),
            maxfev=20000,
        )
        _, _, a_fit, b_fit, g_fit, w_fit = popt
        if w_fit > 0 and np.hypot(a_fit, b_fit) > 0:
            omega = float(w_fit)
            decay_time = float(1.0 / g_fit) if g_fit > 1e-300 else math.inf
    except (RuntimeError, ValueError, np.linalg.LinAlgError):
        pass

    return OscillationMetrics(
        observable=observable,
        dominant_frequency=omega,
        amplitude=amplitude,
        n_extrema=n_extrema,
        decay_time=decay_time,
    )


def fit_decay_time(
    times,
    values,
    window: tuple[float, float] | None = None,
    drop_factor: float = 20.0,
) -> float:
    """Exponential decay time of a positive envelope, fitted past its peak.

    Least-squares fit of log(values) against time from the peak down to where
    the envelope first falls below peak/drop_factor (or the window end).
    Signals whose magnitude beats (a rotating component against a slowly
    varying one) are fitted through their crests, not through the notches.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if window is not None:
        sel = (t >= window[0]) & (t <= window[1])
        t, y = t[sel], y[sel]
    if t.size < 8:
        raise AnalysisError(f"need at least 8 samples to fit a decay, got {t.size}")
    peak = int(np.argmax(y))
    y_peak = y[peak]
    if y_peak <= 0:
        raise AnalysisError("envelope is not positive at its peak")

    crests, _ = find_peaks(y[peak:], prominence=1e-3 * y_peak)
    crests = peak + crests
    crests = crests[y[crests] >= y_peak / drop_factor]
    if crests.size >= 2:
        t_fit = np.concatenate([[t[peak]], t[crests]])
        y_fit = np.concatenate([[y_peak], y[crests]])
    else:
        below = np.nonzero(y[peak:] < y_peak / drop_factor)[0]
        stop = peak + int(below[0]) if below.size else y.size
        t_fit, y_fit = t[peak:stop], y[peak:stop]
    good = y_fit > 0
    if int(good.sum()) < 3:
        raise AnalysisError("too few positive samples past the peak")
    slope = np.polyfit(t_fit[good], np.log(y_fit[good]), 1)[0]
    if slope >= 0:
        return math.inf
    return float(-1.0 / slope)


def plateau_detect(
    traj: Trajectory,
    observable: str,
    rel_tol: float = 0.05,
    steady_factor: float = 10.0,
    steady_value: float | None = None,
    min_decades: float = 1.0,
    n_resample: int = 1024,
) -> PlateauWindow | None:
    """Longest quasi-stationary stretch of an observable in log time.

    A plateau is a window of at least ``min_decades`` decades over which the
    observable stays within ``rel_tol`` (relative to the window level) while
    the level exceeds ``steady_factor`` times the final steady value (the
    trajectory's last sample unless ``steady_value`` overrides it).  Returns
    None when no such window exists; that is the expected outcome for
    monotone decays and for underdamped transients.
    """
    pos = traj.times > 0
    t = traj.times[pos]
    y = traj.observable(observable)[pos]
    if t.size < 8:
        raise AnalysisError("too few positive-time samples")
    decades_covered = math.log10(t[-1] / t[0])
    if decades_covered < 3.0:
        raise AnalysisError(
            f"trajectory covers {decades_covered:.2f} decades; need at least 3"
        )
    final = abs(y[-1]) if steady_value is None else float(steady_value)

    logt = np.linspace(np.log10(t[0]), np.log10(t[-1]), n_resample)
    yu = np.interp(logt, np.log10(t), y)
    step = logt[1] - logt[0]

    best: PlateauWindow | None = None
    i = 0
    lo, hi = yu[0], yu[0]
    j = 0
    # two-pointer sweep: grow j while the window stays flat enough
    for i in range(n_resample):
        if j < i:
            j = i
            lo = hi = yu[i]
        while j + 1 < n_resample:
            nlo, nhi = min(lo, yu[j + 1]), max(hi, yu[j + 1])
            level = 0.5 * (nlo + nhi)
            if level <= 0 or (nhi - nlo) > rel_tol * level:
                break
            lo, hi = nlo, nhi
            j += 1
        level = 0.5 * (lo + hi)
        span = (j - i) * step
        if (
            j > i
            and span >= min_decades
            and level > steady_factor * final
            and (best is None or span > math.log10(best.t_end / best.t_start))
        ):
            best = PlateauWindow(t_start=10.0 ** logt[i], t_end=10.0 ** logt[j], level=level)
        # shrink from the left: recompute window extrema lazily
        if j > i:
            seg = yu[i + 1 : j + 1]
            lo, hi = seg.min(), seg.max()
    return best


def physicality_audit(traj: Trajectory) -> AuditReport:
    """Worst-case trace drift, population negativity and coherence-bound excess.

    The bound violation is the positive excess of |coherence| over
    sqrt(pop_i * pop_j); trajectories that respect the bound report exactly 0.
    """
    s = traj.states
    trace = s[:, :4].sum(axis=1)
    bound_g = np.hypot(s[:, 4], s[:, 5]) - np.sqrt(np.clip(s[:, 0] * s[:, 1], 0.0, None))
    bound_e = np.hypot(s[:, 6], s[:, 7]) - np.sqrt(np.clip(s[:, 2] * s[:, 3], 0.0, None))
    return AuditReport(
        max_trace_drift=float(np.abs(trace - 1.0).max()),
        min_population=float(s[:, :4].min()),
        max_bound_violation=float(max(0.0, bound_g.max(), bound_e.max())),
    )


def oscillation_suppression_sweep(
    rates: RateSet,
    p: AlignmentSet,
    delta_g: float,
    delta_e_grid,
    observable: str = "pop_g1",
    window: tuple[float, float] = (5.0, 60.0),
    t_end: float = 100.0,
    n_times: int = 8001,
    initial: ReducedState | None = None,
    eq1c_literal: bool = False,
) -> list[tuple[float, OscillationMetrics]]:
    """Oscillation metrics of one observable across an excited-splitting grid."""
    grid = [float(v) for v in delta_e_grid]
    if not grid:
        raise DomainError("delta_e grid is empty")
    if any(v < 0 for v in grid):
        raise DomainError("delta_e values must be >= 0")
    if initial is None:
        initial = ReducedState.ground_mixture()
    times = linear_time_grid(t_end, 0.0, n_times)
    rows = []
    for delta_e in grid:
        gen = build_generator(rates, p, delta_g, delta_e, eq1c_literal)
        try:
            traj = propagate_eigen(gen, initial, times)
        except EigenbasisIllConditioned:
            traj = propagate_ode(gen, initial, t_end, 1e-10, times)
        rows.append((delta_e, detect_oscillations(traj, observable, window)))
    return rows
