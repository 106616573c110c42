"""Time evolution and steady states of the reduced four-level dynamics.

Static generators are best propagated by eigendecomposition (exact at any
time, cheap on an 8x8 matrix); adaptive ODE integration provides an
independent cross-check and handles the time-dependent case of a finite
turn-on of the incoherent drive.  Steady states come from the SVD null space
of the generator, with explicit reporting of degenerate (dark-manifold)
cases instead of silently picking a vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, EigenbasisIllConditioned, NumericsError
from .geometry import AlignmentSet
from .liouvillian import Generator, ReducedState, assemble_matrix, build_generator
from .rates import RateSet

OBSERVABLES = (
    "pop_g1",
    "pop_g2",
    "pop_e1",
    "pop_e2",
    "coh_g_re",
    "coh_g_im",
    "coh_g_abs",
    "coh_e_re",
    "coh_e_im",
    "coh_e_abs",
)


def default_time_grid(t_end: float, t_start: float = 1e-2, n: int = 600) -> np.ndarray:
    """Logarithmic grid from t_start to t_end with t=0 prepended."""
    if t_end <= t_start:
        raise DomainError(f"t_end={t_end} must exceed t_start={t_start}")
    grid = np.logspace(np.log10(t_start), np.log10(t_end), n)
    return np.concatenate([[0.0], grid])


def linear_time_grid(t_end: float, t_start: float = 0.0, n: int = 2001) -> np.ndarray:
    return np.linspace(t_start, t_end, n)


@dataclass(frozen=True)
class Trajectory:
    """Time grid plus state sequence, with the method that produced it."""

    times: np.ndarray
    states: np.ndarray  # (n_times, 8)
    method: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        s = np.asarray(self.states, dtype=float)
        if s.shape != (t.size, 8):
            raise DomainError(f"states shape {s.shape} does not match {t.size} times")
        if t.size and t[0] < 0:
            raise DomainError("times must start at >= 0")
        if np.any(np.diff(t) <= 0):
            raise DomainError("times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "states", s)

    def __len__(self) -> int:
        return self.times.size

    def state_at(self, index: int) -> ReducedState:
        return ReducedState.from_array(self.states[index])

    @property
    def final_state(self) -> ReducedState:
        return self.state_at(-1)

    def observable(self, name: str) -> np.ndarray:
        """Named component (or coherence magnitude) as a time series."""
        s = self.states
        columns = {
            "pop_g1": s[:, 0],
            "pop_g2": s[:, 1],
            "pop_e1": s[:, 2],
            "pop_e2": s[:, 3],
            "coh_g_re": s[:, 4],
            "coh_g_im": s[:, 5],
            "coh_e_re": s[:, 6],
            "coh_e_im": s[:, 7],
        }
        if name in columns:
            return columns[name]
        if name == "coh_g_abs":
            return np.hypot(s[:, 4], s[:, 5])
        if name == "coh_e_abs":
            return np.hypot(s[:, 6], s[:, 7])
        raise DomainError(f"unknown observable {name!r}; choose from {OBSERVABLES}")


@dataclass(frozen=True)
class RampProfile:
    """Turn-on profile of the incoherent intensity.

    sudden: step at t=0.  linear: intensity grows linearly over [0, tau_r].
    exponential: saturating exponential rescaled to finish exactly at tau_r
    (time constant tau_r/5).  In every case s(0)=0 and s(t>=tau_r)=1.
    """

    shape: str = "sudden"
    tau_r: float = 0.0

    _EXP_STEEPNESS = 5.0

    def __post_init__(self):
        if self.shape not in ("sudden", "linear", "exponential"):
            raise DomainError(f"unknown ramp shape {self.shape!r}")
        if self.tau_r < 0:
            raise DomainError("tau_r must be >= 0")
        if self.shape == "sudden" and self.tau_r != 0:
            raise DomainError("sudden ramp means tau_r = 0")
        if self.shape != "sudden" and self.tau_r == 0:
            raise DomainError(f"{self.shape} ramp needs tau_r > 0")

    def scale(self, t: float) -> float:
        """Intensity scale factor s(t) in [0, 1]."""
        if self.shape == "sudden" or t >= self.tau_r:
            return 1.0
        if t <= 0:
            return 0.0
        x = t / self.tau_r
        if self.shape == "linear":
            return x
        k = self._EXP_STEEPNESS
        return float(-np.expm1(-k * x) / -np.expm1(-k))


def propagate_eigen(
    gen: Generator,
    initial: ReducedState,
    times,
    cond_threshold: float = 1e12,
) -> Trajectory:
    """Propagate by eigendecomposition: rho(t) = sum_k c_k v_k exp(lambda_k t).

    Raises :class:`EigenbasisIllConditioned` when the eigenbasis condition
    number exceeds ``cond_threshold`` (defective or nearly defective
    generator); callers should fall back to :func:`propagate_ode`.
    """
    times = np.asarray(times, dtype=float)
    lam, vecs = np.linalg.eig(gen.matrix)
    cond = np.linalg.cond(vecs)
    if not np.isfinite(cond) or cond > cond_threshold:
        raise EigenbasisIllConditioned(
            f"eigenbasis condition number {cond:.3e} exceeds {cond_threshold:.1e}"
        )
    coeff = np.linalg.solve(vecs, initial.as_array().astype(complex))
    phases = np.exp(np.outer(lam, times))  # (8, nt)
    states = np.real((vecs @ (coeff[:, None] * phases))).T
    return Trajectory(
        times=times,
        states=states,
        method="eigen",
        meta={"eigenvalues": lam, "condition_number": float(cond)},
    )


def propagate_ode(
    gen: Generator,
    initial: ReducedState,
    t_end: float,
    tol: float = 1e-10,
    times=None,
    method: str = "auto",
) -> Trajectory:
    """Adaptive integration of the constant-generator dynamics.

    "auto" picks the explicit high-order pair unless the horizon is long
    compared to the fastest relaxation scale (t_end * ||gen|| large), where an
    explicit method would be stability-limited and a stiff solver is used.
    """
    if tol <= 0:
        raise DomainError("tol must be > 0")
    if times is None:
        times = default_time_grid(t_end)
    times = np.asarray(times, dtype=float)
    matrix = gen.matrix
    if method == "auto":
        method = "DOP853" if float(t_end) * gen.norm < 1e5 else "LSODA"

    kwargs = {}
    if method == "LSODA":
        kwargs["jac"] = lambda _t, _x: matrix
    sol = solve_ivp(
        lambda _t, x: matrix @ x,
        (0.0, float(t_end)),
        initial.as_array(),
        method=method,
        rtol=tol,
        atol=tol * 1e-3,
        t_eval=times,
        dense_output=False,
        **kwargs,
    )
    if not sol.success:
        raise NumericsError(f"integration failed: {sol.message}")
    return Trajectory(
        times=sol.t, states=sol.y.T, method="ode", meta={"tol": tol, "solver": method}
    )


def propagate_ramp(
    rates: RateSet,
    p: AlignmentSet,
    delta_g: float,
    delta_e: float,
    ramp: RampProfile,
    initial: ReducedState,
    t_end: float,
    tol: float = 1e-10,
    times=None,
    eq1c_literal: bool = False,
) -> Trajectory:
    """Propagate with the bath occupation ramped up as nbar(t) = nbar * s(t).

    Pumping and stimulated emission scale with the intensity; spontaneous
    emission does not.  A sudden ramp reduces exactly to the static problem.
    The time-dependent leg integrates the instantaneous generator with the
    solver step capped at tau_r/200 so the profile is fully resolved; from
    tau_r onward the generator is static and the remainder is propagated by
    eigendecomposition.
    """
    if times is None:
        times = default_time_grid(t_end)
    times = np.asarray(times, dtype=float)
    gen_full = build_generator(rates, p, delta_g, delta_e, eq1c_literal)
    if ramp.shape == "sudden" or ramp.tau_r == 0.0:
        try:
            traj = propagate_eigen(gen_full, initial, times)
        except EigenbasisIllConditioned:
            traj = propagate_ode(gen_full, initial, t_end, tol, times)
        return Trajectory(times=traj.times, states=traj.states, method="ramp", meta=traj.meta)

    tau_r = min(ramp.tau_r, float(t_end))
    gamma, nbar = rates.gamma, rates.nbar

    def rhs(t, x):
        m = assemble_matrix(gamma, nbar * ramp.scale(t), p, delta_g, delta_e, eq1c_literal)
        return m @ x

    early = times[times <= tau_r]
    sol = solve_ivp(
        rhs,
        (0.0, tau_r),
        initial.as_array(),
        method="DOP853",
        rtol=tol,
        atol=tol * 1e-3,
        t_eval=early,
        max_step=ramp.tau_r / 200.0,
    )
    if not sol.success:
        raise NumericsError(f"ramp integration failed: {sol.message}")

    pieces_t = [sol.t]
    pieces_x = [sol.y.T]
    late = times[times > tau_r]
    if late.size:
        x_at_ramp_end = sol.y[:, -1] if sol.t.size and sol.t[-1] == tau_r else None
        if x_at_ramp_end is None:
            # integrate once more to land exactly on tau_r
            sol2 = solve_ivp(
                rhs,
                (0.0, tau_r),
                initial.as_array(),
                method="DOP853",
                rtol=tol,
                atol=tol * 1e-3,
                t_eval=[tau_r],
                max_step=ramp.tau_r / 200.0,
            )
            if not sol2.success:
                raise NumericsError(f"ramp integration failed: {sol2.message}")
            x_at_ramp_end = sol2.y[:, -1]
        start = ReducedState.from_array(x_at_ramp_end)
        try:
            tail = propagate_eigen(gen_full, start, late - tau_r)
        except EigenbasisIllConditioned:
            tail = propagate_ode(gen_full, start, float(late[-1] - tau_r), tol, late - tau_r)
        pieces_t.append(late)
        pieces_x.append(tail.states)

    return Trajectory(
        times=np.concatenate(pieces_t),
        states=np.vstack(pieces_x),
        method="ramp",
        meta={"ramp_shape": ramp.shape, "tau_r": ramp.tau_r, "tol": tol},
    )


@dataclass(frozen=True)
class SteadyStateResult:
    """Null-space information of a generator."""

    state: ReducedState | None
    dimension: int
    basis: np.ndarray  # (8, dimension) orthonormal right null vectors
    unique: bool

    def require_unique(self) -> ReducedState:
        if not self.unique or self.state is None:
            raise NumericsError(
                f"steady state is not unique (null-space dimension {self.dimension})"
            )
        return self.state


def steady_state(
    gen: Generator,
    rank_tol: float = 1e-12,
    gap_factor: float = 100.0,
) -> SteadyStateResult:
    """Steady state(s) from the SVD null space of the generator.

    Singular values below ``rank_tol`` times the largest count as zero.  If
    further singular values crowd within ``gap_factor`` of that threshold the
    rank decision is ambiguous and a :class:`NumericsError` is raised rather
    than guessing.  A multi-dimensional null space (dark-state manifold) is
    reported with ``unique=False`` and the full basis.
    """
    svals_u, svals, vt = np.linalg.svd(gen.matrix)
    del svals_u
    threshold = rank_tol * svals[0]
    null_mask = svals < threshold
    dim = int(null_mask.sum())
    if dim == 0:
        raise NumericsError(
            "generator has no null space (trace preservation should force one); "
            f"smallest singular value {svals[-1]:.3e}"
        )
    nonzero = svals[~null_mask]
    if nonzero.size and nonzero.min() < gap_factor * threshold:
        raise NumericsError(
            f"ambiguous null-space dimension: singular value {nonzero.min():.3e} "
            f"sits within {gap_factor:g}x of the rank threshold {threshold:.3e}"
        )
    basis = vt[null_mask].T  # (8, dim)
    if dim > 1:
        return SteadyStateResult(state=None, dimension=dim, basis=basis, unique=False)
    vec = basis[:, 0]
    trace = vec[:4].sum()
    if abs(trace) < 1e-12:
        raise NumericsError("steady-state candidate has zero trace; cannot normalize")
    vec = vec / trace
    return SteadyStateResult(
        state=ReducedState.from_array(vec), dimension=1, basis=basis, unique=True
    )
