"""The partial-secular master-equation generator of the four-level system.

Inter-manifold coherences are dropped (they rotate at the large optical gap),
intra-manifold coherences are kept, so the state reduces to 8 real numbers:
four populations plus Re/Im of the ground and excited coherences, ordered

    [pop_g1, pop_g2, pop_e1, pop_e2, coh_g_re, coh_g_im, coh_e_re, coh_e_im].

The generator contains four families of terms:

* Pauli gain/loss between populations (excitation r, emission gamma*(1+nbar));
* population <-> coherence couplings proportional to the shared-state
  alignments p_g1, p_g2, p_e1, p_e2;
* coherence decay at half the total out-rate, plus unitary rotation of each
  coherence at its manifold splitting;
* ground <-> excited coherence transfer proportional to p_par and p_cross,
  the terms that need two states in each manifold and drive the coherent
  population oscillations.

Trace preservation is structural: the row vector (1,1,1,1,0,0,0,0) is a left
null vector of every generator built here.

For per-ground-state baths the (1+nbar) emission factor of each transition
uses that transition's own bath; where a single sqrt(gamma*gamma) factor
combines two transitions with different baths, it carries the geometric mean
of the two (1+nbar) values, which reduces to the single-bath expression when
the baths agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .geometry import AlignmentSet
from .rates import RateSet

STATE_LABELS = (
    "pop_g1",
    "pop_g2",
    "pop_e1",
    "pop_e2",
    "coh_g_re",
    "coh_g_im",
    "coh_e_re",
    "coh_e_im",
)

# indices into the reduced state vector
G1, G2, E1, E2, GRE, GIM, ERE, EIM = range(8)

TRACE_VECTOR = np.array([1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0])


@dataclass(frozen=True)
class ReducedState:
    """8 real components: populations and the two intra-manifold coherences."""

    pop_g1: float
    pop_g2: float
    pop_e1: float
    pop_e2: float
    coh_g_re: float = 0.0
    coh_g_im: float = 0.0
    coh_e_re: float = 0.0
    coh_e_im: float = 0.0

    @classmethod
    def from_array(cls, x) -> "ReducedState":
        x = np.asarray(x, dtype=float)
        if x.shape != (8,):
            raise DomainError(f"reduced state needs 8 components, got shape {x.shape}")
        return cls(*x.tolist())

    @classmethod
    def ground_mixture(cls) -> "ReducedState":
        """Equal incoherent mixture of the two ground states."""
        return cls(0.5, 0.5, 0.0, 0.0)

    def as_array(self) -> np.ndarray:
        return np.array(
            [
                self.pop_g1,
                self.pop_g2,
                self.pop_e1,
                self.pop_e2,
                self.coh_g_re,
                self.coh_g_im,
                self.coh_e_re,
                self.coh_e_im,
            ]
        )

    @property
    def trace(self) -> float:
        return self.pop_g1 + self.pop_g2 + self.pop_e1 + self.pop_e2

    @property
    def coh_g_abs(self) -> float:
        return float(np.hypot(self.coh_g_re, self.coh_g_im))

    @property
    def coh_e_abs(self) -> float:
        return float(np.hypot(self.coh_e_re, self.coh_e_im))

    def violations(self, trace_tol: float = 1e-9, bound_tol: float = 1e-8) -> list[str]:
        """Physicality violations beyond the given tolerances (empty if none)."""
        out = []
        if abs(self.trace - 1.0) > trace_tol:
            out.append(f"trace deviates by {abs(self.trace - 1.0):.3e}")
        pops = (self.pop_g1, self.pop_g2, self.pop_e1, self.pop_e2)
        for name, p in zip(STATE_LABELS[:4], pops):
            if p < -trace_tol or p > 1.0 + trace_tol:
                out.append(f"{name}={p:.6e} outside [0, 1]")
        bg = self.coh_g_abs - np.sqrt(max(self.pop_g1 * self.pop_g2, 0.0))
        be = self.coh_e_abs - np.sqrt(max(self.pop_e1 * self.pop_e2, 0.0))
        if bg > bound_tol:
            out.append(f"ground coherence bound violated by {bg:.3e}")
        if be > bound_tol:
            out.append(f"excited coherence bound violated by {be:.3e}")
        return out


def assemble_matrix(
    gamma: np.ndarray,
    nbar: np.ndarray,
    p: AlignmentSet,
    delta_g: float,
    delta_e: float,
    eq1c_literal: bool = False,
) -> np.ndarray:
    """Raw 8x8 generator from per-transition rates and occupations.

    ``gamma`` and ``nbar`` are (2, 2) arrays indexed [ground i][excited j].
    ``eq1c_literal`` switches the excited-coherence population-damping term to
    use p_g1 for both summands instead of the summed-index p_g_j (the two
    coincide whenever p_g1 == p_g2).
    """
    gamma = np.asarray(gamma, dtype=float)
    nbar = np.asarray(nbar, dtype=float)
    if np.any(gamma < 0) or np.any(nbar < 0):
        raise DomainError("negative rates or occupations")
    if delta_g < 0 or delta_e < 0:
        raise DomainError("splittings must be >= 0")

    r = gamma * nbar
    emis = 1.0 + nbar  # (1 + nbar) emission enhancement per transition
    pg = (p.p_g1, p.p_g2)
    pe = (p.p_e1, p.p_e2)

    # geometric cross factors for transition pairs sharing a ground state a
    sq_emis_g = [np.sqrt(emis[a, 0] * emis[a, 1]) for a in range(2)]
    sq_gam_g = [np.sqrt(gamma[a, 0] * gamma[a, 1]) for a in range(2)]
    sq_r_g = [np.sqrt(r[a, 0] * r[a, 1]) for a in range(2)]
    # ... and sharing an excited state b (these span both baths)
    sq_emis_e = [np.sqrt(emis[0, b] * emis[1, b]) for b in range(2)]
    sq_gam_e = [np.sqrt(gamma[0, b] * gamma[1, b]) for b in range(2)]
    sq_r_e = [np.sqrt(r[0, b] * r[1, b]) for b in range(2)]

    m = np.zeros((8, 8))

    # --- excited populations ---
    for b in range(2):
        row = E1 + b
        for a in range(2):
            m[row, G1 + a] += r[a, b]
            m[row, row] -= emis[a, b] * gamma[a, b]
            m[row, ERE] -= sq_emis_g[a] * pg[a] * sq_gam_g[a]
        m[row, GRE] += 2.0 * pe[b] * sq_r_e[b]

    # --- ground populations ---
    for a in range(2):
        row = G1 + a
        for b in range(2):
            m[row, E1 + b] += emis[a, b] * gamma[a, b]
            m[row, row] -= r[a, b]
            m[row, GRE] -= pe[b] * sq_r_e[b]
        m[row, ERE] += 2.0 * sq_emis_g[a] * pg[a] * sq_gam_g[a]

    # --- excited coherence ---
    decay_e = 0.5 * float((emis * gamma).sum())
    transfer_e = p.p_par * np.sqrt(r[0, 0] * r[1, 1]) + p.p_cross * np.sqrt(r[0, 1] * r[1, 0])
    for a in range(2):
        m[ERE, G1 + a] += pg[a] * sq_r_g[a]
        coeff = 0.5 * sq_emis_g[a] * (pg[0] if eq1c_literal else pg[a]) * sq_gam_g[a]
        m[ERE, E1] -= coeff
        m[ERE, E2] -= coeff
    m[ERE, ERE] -= decay_e
    m[ERE, EIM] += delta_e
    m[ERE, GRE] += transfer_e
    m[EIM, EIM] -= decay_e
    m[EIM, ERE] -= delta_e
    m[EIM, GIM] += transfer_e

    # --- ground coherence ---
    decay_g = 0.5 * float(r.sum())
    cross_emis = np.sqrt(emis[0, 0] * emis[1, 1])  # both disjoint pairs span both baths
    transfer_g = cross_emis * (
        p.p_par * np.sqrt(gamma[0, 0] * gamma[1, 1])
        + p.p_cross * np.sqrt(gamma[1, 0] * gamma[0, 1])
    )
    for b in range(2):
        m[GRE, E1 + b] += sq_emis_e[b] * pe[b] * sq_gam_e[b]
        m[GRE, G1] -= 0.5 * pe[b] * sq_r_e[b]
        m[GRE, G2] -= 0.5 * pe[b] * sq_r_e[b]
    m[GRE, GRE] -= decay_g
    m[GRE, GIM] += delta_g
    m[GRE, ERE] += transfer_g
    m[GIM, GIM] -= decay_g
    m[GIM, GRE] -= delta_g
    m[GIM, EIM] += transfer_g

    return m


@dataclass(frozen=True)
class Generator:
    """Immutable 8x8 time-evolution generator plus the inputs that built it."""

    matrix: np.ndarray
    rates: RateSet
    alignment: AlignmentSet
    delta_g: float
    delta_e: float
    eq1c_literal: bool = field(default=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (8, 8):
            raise DomainError(f"generator must be 8x8, got {m.shape}")
        object.__setattr__(self, "matrix", m)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))

    def trace_residual(self) -> float:
        """How far (1,1,1,1,0,...,0) is from being a left null vector."""
        return float(np.abs(TRACE_VECTOR @ self.matrix).max())


def build_generator(
    rates: RateSet,
    p: AlignmentSet,
    delta_g: float,
    delta_e: float,
    eq1c_literal: bool = False,
) -> Generator:
    """The full partial-secular generator for a static drive."""
    m = assemble_matrix(rates.gamma, rates.nbar, p, delta_g, delta_e, eq1c_literal)
    return Generator(
        matrix=m,
        rates=rates,
        alignment=p,
        delta_g=float(delta_g),
        delta_e=float(delta_e),
        eq1c_literal=eq1c_literal,
    )


def secular_generator(rates: RateSet) -> np.ndarray:
    """4x4 Pauli rate-law generator on [pop_g1, pop_g2, pop_e1, pop_e2].

    Populations only, no interference: the classical rate-equation oracle.
    Columns sum to zero.
    """
    gamma, nbar = rates.gamma, rates.nbar
    r = rates.r
    emis = 1.0 + nbar
    m = np.zeros((4, 4))
    for b in range(2):
        for a in range(2):
            m[2 + b, a] += r[a, b]
            m[2 + b, 2 + b] -= emis[a, b] * gamma[a, b]
            m[a, 2 + b] += emis[a, b] * gamma[a, b]
            m[a, a] -= r[a, b]
    return m


def apply(gen: Generator, state: ReducedState) -> ReducedState:
    """Time derivative of the state under the generator (linear in the state)."""
    return ReducedState.from_array(gen.matrix @ state.as_array())
