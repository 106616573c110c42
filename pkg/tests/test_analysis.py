import math

import numpy as np
import pytest

from fourlevel import (
    AlignmentSet,
    AnalysisError,
    BathSpec,
    ReducedState,
    SystemSpec,
    build_generator,
    build_rate_table,
    classify_regime,
    detect_oscillations,
    fit_decay_time,
    load_preset,
    oscillation_suppression_sweep,
    physicality_audit,
    plateau_detect,
    propagate_eigen,
)
from fourlevel.propagation import Trajectory, linear_time_grid
from fourlevel.runner import propagate_for_config


def _rates(gamma, nbar=0.05, kind="single"):
    spec = SystemSpec(
        mode="direct_rates",
        delta_g=0.3,
        delta_e=0.1,
        bath=BathSpec(kind=kind, nbar=nbar),
        gamma=gamma,
    )
    return build_rate_table(spec)


UNIFORM = _rates(((1.0, 1.0), (1.0, 1.0)))
MIXED = _rates(((1.5, 1.5), (0.5, 0.5)))


def _synthetic_trajectory(times, values):
    states = np.zeros((times.size, 8))
    states[:, 0] = values
    states[:, 1] = 1.0 - values  # keep the trace exactly 1
    return Trajectory(times=times, states=states, method="eigen")


# ---------------------------------------------------------------- regimes


def test_classify_regime_purely_underdamped():
    report = classify_regime(UNIFORM, 10.0, 10.0)
    assert report.ground_regime == "underdamped"
    assert report.excited_regime == "underdamped"


def test_classify_regime_purely_overdamped():
    report = classify_regime(UNIFORM, 0.01, 0.01)
    assert report.ground_regime == "overdamped"
    assert report.excited_regime == "overdamped"


def test_classify_regime_mixed():
    report = classify_regime(MIXED, 0.3, 0.1)
    assert report.ground_regime == "underdamped"
    assert report.excited_regime == "overdamped"
    # relaxation scales behind the ratios: mean pumping out of a ground state
    # and mean emission out of an excited state
    assert report.gamma_g == pytest.approx(0.1)
    assert report.gamma_e == pytest.approx(2.1)


def test_classify_regime_scale_invariance():
    scale = 7.3
    scaled = _rates(((1.5 * scale, 1.5 * scale), (0.5 * scale, 0.5 * scale)))
    base = classify_regime(MIXED, 0.3, 0.1)
    rescaled = classify_regime(scaled, 0.3 * scale, 0.1 * scale)
    assert base.ground_regime == rescaled.ground_regime
    assert base.excited_regime == rescaled.excited_regime
    assert base.ratio_g == pytest.approx(rescaled.ratio_g, rel=1e-12)
    assert base.ratio_e == pytest.approx(rescaled.ratio_e, rel=1e-12)


def test_classify_regime_refined_diagnostic():
    report = classify_regime(UNIFORM, 0.01, 0.01, alignment=AlignmentSet.uniform(1.0))
    # fully parallel dipoles, tiny splitting: the refined two-level measure is
    # 2*delta/(G1+G2), far below 1
    assert report.refined_e == pytest.approx(2 * 0.01 / (2.1 + 2.1), rel=1e-12)
    assert report.refined_e < 0.1


# ------------------------------------------------------- oscillation metrics


def test_detect_oscillations_synthetic_damped_sinusoid():
    times = np.linspace(0.0, 30.0, 3001)
    signal = np.exp(-times / 3.0) * np.sin(0.3 * times) + 0.7
    traj = _synthetic_trajectory(times, signal)
    m = detect_oscillations(traj, "pop_g1", (0.0, 30.0))
    assert m.dominant_frequency == pytest.approx(0.3, rel=0.03)
    assert m.decay_time == pytest.approx(3.0, rel=0.10)
    assert m.n_extrema >= 2
    assert m.amplitude > 0.2


def test_detect_oscillations_many_cycles():
    times = np.linspace(0.0, 100.0, 4001)
    signal = np.exp(-times / 20.0) * np.sin(0.5 * times) + 0.7
    traj = _synthetic_trajectory(times, signal)
    m = detect_oscillations(traj, "pop_g1", (0.0, 100.0))
    assert m.dominant_frequency == pytest.approx(0.5, rel=0.01)
    assert m.decay_time == pytest.approx(20.0, rel=0.10)
    assert m.n_extrema >= 10


def test_detect_oscillations_mixed_regime_ground_population():
    gen = build_generator(MIXED, AlignmentSet.uniform(1.0), 0.3, 0.0)
    times = linear_time_grid(100.0, 0.0, 8001)
    traj = propagate_eigen(gen, ReducedState.ground_mixture(), times)
    m = detect_oscillations(traj, "pop_g1", (5.0, 60.0))
    # oscillations at the ground-state frequency, several direction reversals
    assert m.n_extrema >= 3
    assert m.dominant_frequency == pytest.approx(0.3, rel=0.10)
    assert m.amplitude > 1e-4


def test_detect_oscillations_secular_run_is_quiet():
    gen = build_generator(MIXED, AlignmentSet.uniform(0.0), 0.3, 0.0)
    times = linear_time_grid(100.0, 0.0, 8001)
    traj = propagate_eigen(gen, ReducedState.ground_mixture(), times)
    m = detect_oscillations(traj, "pop_g1", (5.0, 60.0))
    assert m.amplitude < 1e-6
    assert m.n_extrema == 0


def test_detect_oscillations_offset_invariance():
    times = np.linspace(0.0, 100.0, 4001)
    signal = np.exp(-times / 20.0) * np.sin(0.5 * times)
    base = detect_oscillations(_synthetic_trajectory(times, signal), "pop_g1", (0.0, 100.0))
    shifted = detect_oscillations(
        _synthetic_trajectory(times, signal + 0.37), "pop_g1", (0.0, 100.0)
    )
    assert shifted.dominant_frequency == pytest.approx(base.dominant_frequency, rel=1e-9)
    assert shifted.amplitude == pytest.approx(base.amplitude, rel=1e-9)


def test_detect_oscillations_grid_refinement_invariance():
    def run(n):
        times = np.linspace(0.0, 100.0, n)
        signal = np.exp(-times / 20.0) * np.sin(0.5 * times) + 0.7
        return detect_oscillations(_synthetic_trajectory(times, signal), "pop_g1", (0.0, 100.0))

    coarse, fine = run(2001), run(8001)
    assert fine.dominant_frequency == pytest.approx(coarse.dominant_frequency, rel=0.01)


def test_detect_oscillations_needs_samples():
    times = np.linspace(0.0, 10.0, 40)
    traj = _synthetic_trajectory(times, np.sin(times))
    with pytest.raises(AnalysisError, match="64"):
        detect_oscillations(traj, "pop_g1", (0.0, 10.0))


# ------------------------------------------------------------- decay fitting


def test_fit_decay_time_pure_exponential():
    times = np.linspace(0.0, 50.0, 2001)
    values = 0.8 * np.exp(-times / 7.0)
    assert fit_decay_time(times, values) == pytest.approx(7.0, rel=1e-6)


def test_fit_decay_time_with_rise():
    times = np.linspace(0.0, 60.0, 3001)
    values = (1 - np.exp(-3 * times)) * np.exp(-times / 5.0)
    assert fit_decay_time(times, values) == pytest.approx(5.0, rel=0.15)


def test_fit_decay_time_flat_signal_is_infinite():
    times = np.linspace(0.0, 50.0, 500)
    assert math.isinf(fit_decay_time(times, np.ones_like(times)))


# ----------------------------------------------------------------- suppression


def test_suppression_sweep_matches_single_detection():
    rows = oscillation_suppression_sweep(MIXED, AlignmentSet.uniform(1.0), 0.3, [0.0])
    assert len(rows) == 1
    delta_e, metrics = rows[0]
    assert delta_e == 0.0
    gen = build_generator(MIXED, AlignmentSet.uniform(1.0), 0.3, 0.0)
    times = linear_time_grid(100.0, 0.0, 8001)
    traj = propagate_eigen(gen, ReducedState.ground_mixture(), times)
    direct = detect_oscillations(traj, "pop_g1", (5.0, 60.0))
    assert metrics.amplitude == pytest.approx(direct.amplitude, rel=1e-12)
    assert metrics.n_extrema == direct.n_extrema


def test_suppression_sweep_large_splitting_suppresses():
    rows = oscillation_suppression_sweep(
        MIXED, AlignmentSet.uniform(1.0), 0.3, [0.0, 2.0, 4.0]
    )
    amps = {delta_e: m.amplitude for delta_e, m in rows}
    # entering the underdamped excited regime kills the detected oscillation
    assert amps[2.0] < amps[0.0]
    assert amps[4.0] < amps[0.0]


# ----------------------------------------------------------------- plateaus


def test_plateau_exists_in_overdamped_preset():
    traj = propagate_for_config(load_preset("figS2"))
    window = plateau_detect(traj, "coh_e_abs")
    assert window is not None
    assert window.decades >= 1.0
    assert window.level > 1e-3


def test_no_plateau_in_underdamped_preset():
    traj = propagate_for_config(load_preset("figS1"))
    assert plateau_detect(traj, "coh_e_abs") is None


def test_plateau_constant_signal_above_threshold():
    times = np.logspace(-2, 4, 400)
    traj = _synthetic_trajectory(np.concatenate([[0.0], times]), np.full(401, 0.4))
    window = plateau_detect(traj, "pop_g1", steady_value=0.004)
    assert window is not None
    # the whole positive-time span qualifies
    assert window.t_start == pytest.approx(times[0], rel=0.05)
    assert window.t_end == pytest.approx(times[-1], rel=0.05)


def test_plateau_monotone_decay_returns_none():
    times = np.concatenate([[0.0], np.logspace(-2, 2, 500)])
    values = np.exp(-times / 1.0)
    traj = _synthetic_trajectory(times, values)
    assert plateau_detect(traj, "pop_g1") is None


def test_plateau_needs_three_decades():
    times = np.concatenate([[0.0], np.logspace(0, 2, 300)])
    traj = _synthetic_trajectory(times, np.ones(301) * 0.2)
    with pytest.raises(AnalysisError, match="decades"):
        plateau_detect(traj, "pop_g1")


# ------------------------------------------------------------------- audits


def test_audit_on_preset_trajectory():
    traj = propagate_for_config(load_preset("figS3"))
    audit = physicality_audit(traj)
    assert audit.max_trace_drift < 1e-9
    assert audit.min_population > -1e-9
    assert audit.max_bound_violation < 1e-8


def test_audit_reports_planted_violation():
    times = np.array([0.0, 1.0, 2.0])
    states = np.zeros((3, 8))
    states[:, 0] = 0.5
    states[:, 1] = 0.5
    states[1, 4] = 0.5 + 0.01  # ground coherence above sqrt(0.25)
    states[2, 0] = 0.6  # breaks the trace by 0.1
    traj = Trajectory(times=times, states=states, method="eigen")
    audit = physicality_audit(traj)
    assert audit.max_bound_violation == pytest.approx(0.01, abs=1e-12)
    assert audit.max_trace_drift == pytest.approx(0.1, abs=1e-12)


def test_audit_zero_coherence_has_zero_violation():
    times = np.linspace(0.0, 10.0, 50)
    traj = _synthetic_trajectory(times, np.linspace(0.5, 0.4, 50))
    assert physicality_audit(traj).max_bound_violation == 0.0
