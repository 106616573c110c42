import math

import numpy as np
import pytest

from fourlevel import (
    DomainError,
    EnvelopeSpec,
    excitation_amplitude,
    interference_visibility,
    pulse_coherence,
    pulsed_vs_sudden_report,
    sample_phase_path,
)

STEP = EnvelopeSpec(kind="step")


def test_phase_path_deterministic_from_seed():
    a = sample_phase_path(1.0, 0.01, 5.0, seed=123)
    b = sample_phase_path(1.0, 0.01, 5.0, seed=123)
    c = sample_phase_path(1.0, 0.01, 5.0, seed=124)
    assert np.array_equal(a.phi, b.phi)
    assert not np.array_equal(a.phi, c.phi)


def test_phase_path_infinite_correlation_time_is_constant():
    path = sample_phase_path(math.inf, 0.01, 5.0, seed=1)
    assert np.all(path.phi == 0.0)


def test_phase_path_sampling_precondition():
    with pytest.raises(DomainError, match="coarse"):
        sample_phase_path(1.0, 0.5, 5.0, seed=1)


def test_phase_path_coherence_function_monte_carlo():
    # closed form for the diffusion process: |<exp(i(phi(t) - phi(t+tau_c)))>|
    # equals exp(-1); check the Monte-Carlo mean within 3 standard errors
    tau_c, dt = 1.0, 0.05
    n, lag = 10_000, int(round(1.0 / dt))
    acc = np.empty(n, dtype=complex)
    for k in range(n):
        path = sample_phase_path(tau_c, dt, 2.0, seed=5000 + k)
        acc[k] = np.exp(1j * (path.phi[lag] - path.phi[0]))
    estimate = abs(acc.mean())
    assert estimate == pytest.approx(math.exp(-1.0), abs=3.0 / math.sqrt(n))


def test_excitation_amplitude_zero_envelope():
    path = sample_phase_path(1.0, 0.01, 2.0, seed=3)
    f = excitation_amplitude(np.zeros_like(path.times), path)
    assert np.all(f == 0.0)


def test_excitation_amplitude_coherent_resonant_growth():
    path = sample_phase_path(math.inf, 0.01, 5.0, seed=3)
    f = excitation_amplitude(STEP, path, detuning=0.0)
    # constant phase, zero detuning: |f| grows linearly with accumulated time
    expected = (np.arange(path.times.size) + 1) * path.dt
    assert np.allclose(np.abs(f), expected, rtol=1e-12)


def test_excitation_amplitude_linear_in_amplitude():
    path = sample_phase_path(1.0, 0.01, 2.0, seed=4)
    f1 = excitation_amplitude(EnvelopeSpec(kind="step", amplitude=1.0), path)
    f2 = excitation_amplitude(EnvelopeSpec(kind="step", amplitude=2.5), path)
    assert np.allclose(f2, 2.5 * f1, rtol=1e-12)


def test_excitation_amplitude_grid_mismatch():
    path = sample_phase_path(1.0, 0.01, 2.0, seed=5)
    with pytest.raises(DomainError, match="grid"):
        excitation_amplitude(np.ones(7), path)


def test_visibility_same_window_is_exactly_one():
    res = interference_visibility(STEP, 1.0, 0.0, 500, seed=9)
    assert res.visibility == 1.0


def test_visibility_at_one_correlation_time():
    res = interference_visibility(STEP, 1.0, 1.0, 10_000, seed=10)
    assert res.visibility == pytest.approx(math.exp(-1.0), abs=3 * res.stderr)
    assert res.stderr < 0.02


def test_visibility_washes_out_at_large_separation():
    n = 10_000
    res = interference_visibility(STEP, 1.0, 10.0, n, seed=11)
    assert res.visibility < 3.0 / math.sqrt(n)


def test_visibility_monotone_in_separation():
    seps = [0.0, 0.3, 1.0, 2.0, 5.0, 10.0]
    values = [
        interference_visibility(STEP, 1.0, s, 10_000, seed=12).visibility for s in seps
    ]
    for a, b in zip(values, values[1:]):
        assert b <= a + 0.02  # within estimator noise


def test_visibility_reproducible():
    a = interference_visibility(STEP, 1.0, 2.0, 1000, seed=77)
    b = interference_visibility(STEP, 1.0, 2.0, 1000, seed=77)
    assert a == b


def test_visibility_degenerate_window_errors():
    with pytest.raises(DomainError, match="window"):
        interference_visibility(STEP, 1.0, 1.0, 500, seed=1, window=0.0)
    with pytest.raises(DomainError, match="overlap"):
        interference_visibility(STEP, 1.0, 0.005, 500, seed=1, window=0.01)
    with pytest.raises(DomainError, match="pulse"):
        interference_visibility(EnvelopeSpec(kind="pulse", tau_p=0.5), 1.0, 1.0, 500, seed=1)
    with pytest.raises(DomainError):
        interference_visibility(STEP, 1.0, 1.0, 10, seed=1)


def test_pulse_coherence_short_pulse_approaches_coherent_limit():
    row = pulse_coherence(1.0, 0.01, 10_000, seed=21)
    assert row.coherence == pytest.approx(1.0, rel=0.05)


def test_pulse_coherence_long_pulse_decoheres():
    row = pulse_coherence(1.0, 100.0, 2_000, seed=22)
    assert row.coherence < 0.1


def test_pulsed_vs_sudden_report():
    report = pulsed_vs_sudden_report(1.0, [0.01, 1.0, 100.0], 2_000, seed=30)
    coh = {row.tau_p: row.coherence for row in report.pulses}
    assert coh[0.01] == pytest.approx(1.0, rel=0.05)
    assert coh[100.0] < 0.1
    assert coh[0.01] > coh[1.0] > coh[100.0]
    # step turn-on: distant windows do not interfere
    far = [r for r in report.step_visibility if r.separation >= 20.0]
    assert far and all(r.visibility < 3 * max(r.stderr, 1e-4) for r in far)
    # deterministic from the seed
    again = pulsed_vs_sudden_report(1.0, [0.01, 1.0, 100.0], 2_000, seed=30)
    assert again == report
