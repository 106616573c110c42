"""Spontaneous-emission and incoherent-pumping rates of the four-level system.

Rates can be specified directly in units of the mean spontaneous rate (the way
every figure preset does it) or derived from physical inputs: transition
frequencies, dipole magnitudes and a bath temperature.  Pumping obeys detailed
balance per transition, r = gamma * nbar, where nbar is the mean bosonic
occupation of the bath that the transition's ground state is coupled to.  A
single shared bath gives one nbar for all four transitions; per-ground-state
baths (the non-equilibrium configuration) give one nbar per ground state.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .geometry import DipoleVector, TRANSITIONS, alignment_set_4ls

HBAR = 1.0
K_B = 1.0


def mean_occupation(omega: float, temperature: float) -> float:
    """Mean bosonic occupation 1/(exp(hbar*omega/kB*T) - 1), hbar = kB = 1."""
    if omega <= 0:
        raise DomainError(f"frequency must be > 0, got {omega}")
    if temperature <= 0:
        raise DomainError(f"temperature must be > 0, got {temperature}")
    return 1.0 / np.expm1(HBAR * omega / (K_B * temperature))


def spontaneous_rate(omega: float, mu_norm: float, vacuum_factor: float = 1.0) -> float:
    """Free-space spontaneous emission rate omega^3 |mu|^2 / vacuum_factor.

    ``vacuum_factor`` is 3*pi*eps0*c^3 in the chosen unit system; the default
    of 1 gives natural units where omega = |mu| = 1 yields rate 1.
    """
    if omega <= 0:
        raise DomainError(f"frequency must be > 0, got {omega}")
    if mu_norm < 0:
        raise DomainError(f"dipole magnitude must be >= 0, got {mu_norm}")
    if vacuum_factor <= 0:
        raise DomainError(f"vacuum factor must be > 0, got {vacuum_factor}")
    return omega**3 * mu_norm**2 / vacuum_factor


@dataclass(frozen=True)
class BathSpec:
    """Bath occupation(s): either given directly or via temperature.

    kind="single": one occupation shared by all transitions.
    kind="per_ground_state": one occupation per ground state (g1, g2).
    When ``temperature`` is given instead of ``nbar``, the occupation is
    evaluated at the reference frequency passed to :func:`build_rate_table`
    (flat over the near-degenerate transitions).
    """

    kind: str = "single"
    nbar: float | tuple[float, float] | None = None
    temperature: float | tuple[float, float] | None = None

    def __post_init__(self):
        if self.kind not in ("single", "per_ground_state"):
            raise DomainError(f"unknown bath kind {self.kind!r}")
        if (self.nbar is None) == (self.temperature is None):
            raise DomainError("bath needs exactly one of nbar or temperature")

    def occupations(self, reference_omega: float | None = None) -> np.ndarray:
        """Occupation per ground state as a length-2 array."""
        if self.nbar is not None:
            vals = self.nbar
        else:
            if reference_omega is None:
                raise DomainError("temperature-specified bath needs a reference frequency")
            temps = self.temperature
            if self.kind == "single":
                vals = mean_occupation(reference_omega, float(temps))
            else:
                vals = tuple(mean_occupation(reference_omega, float(t)) for t in temps)
        if self.kind == "single":
            if np.ndim(vals) != 0:
                raise DomainError("single bath takes a scalar occupation")
            out = np.array([float(vals), float(vals)])
        else:
            arr = np.asarray(vals, dtype=float)
            if arr.shape != (2,):
                raise DomainError("per-ground-state bath takes one value per ground state")
            out = arr
        if np.any(out < 0):
            raise DomainError(f"occupations must be >= 0, got {out.tolist()}")
        return out


@dataclass(frozen=True)
class SystemSpec:
    """Physical definition of the 4LS.

    mode="direct_rates": ``gamma[i][j]`` is the spontaneous rate of the
    g_i <-> e_j transition, in whatever consistent rate unit the caller uses
    (the presets use multiples of the mean rate).

    mode="physical": the four rates follow from transition frequencies and
    dipole magnitudes via :func:`spontaneous_rate`; ``delta_0`` is the
    manifold gap (e1 above g1), ``delta_g``/``delta_e`` the intra-manifold
    splittings, and ``dipoles`` maps transition labels to vectors.
    """

    mode: str
    delta_g: float
    delta_e: float
    bath: BathSpec
    gamma: tuple | None = None
    dipoles: dict | None = None
    delta_0: float | None = None
    vacuum_factor: float = 1.0
    gap_ratio_warn: float = field(default=100.0, repr=False)

    def __post_init__(self):
        if self.mode not in ("direct_rates", "physical"):
            raise DomainError(f"unknown mode {self.mode!r}")
        if self.delta_g < 0 or self.delta_e < 0:
            raise DomainError("splittings delta_g, delta_e must be >= 0")
        if self.mode == "direct_rates":
            if self.gamma is None:
                raise DomainError("direct_rates mode requires gamma")
            g = np.asarray(self.gamma, dtype=float)
            if g.shape != (2, 2):
                raise DomainError(f"gamma must be 2x2 (ground x excited), got shape {g.shape}")
            if np.any(g < 0):
                raise DomainError("all gamma entries must be >= 0")
        else:
            if self.dipoles is None or self.delta_0 is None:
                raise DomainError("physical mode requires dipoles and delta_0")
            if self.delta_0 <= 0:
                raise DomainError("delta_0 must be > 0")
            missing = [t for t in TRANSITIONS if t not in self.dipoles]
            if missing:
                raise DomainError(f"missing dipoles: {', '.join(missing)}")
            split = max(self.delta_g, self.delta_e)
            if split > 0 and self.delta_0 / split < self.gap_ratio_warn:
                warnings.warn(
                    f"delta_0/max(delta_g, delta_e) = {self.delta_0 / split:.3g} "
                    f"< {self.gap_ratio_warn:g}; the near-degenerate-manifold "
                    "approximation may be poor",
                    stacklevel=2,
                )

    def transition_frequency(self, i: int, j: int) -> float:
        """Frequency of g_i <-> e_j with energies E_g1=0, E_g2=dg, E_e1=d0, E_e2=d0+de."""
        if self.delta_0 is None:
            raise DomainError("transition frequencies need delta_0")
        return self.delta_0 + j * self.delta_e - i * self.delta_g

    def dipole(self, label: str) -> DipoleVector:
        mu = self.dipoles[label]
        if isinstance(mu, DipoleVector):
            return mu
        return DipoleVector(tuple(mu), label=label)


@dataclass(frozen=True)
class RateSet:
    """Per-transition rates; indices [i][j] refer to the g_i <-> e_j transition."""

    gamma: np.ndarray  # (2, 2) spontaneous rates
    nbar: np.ndarray  # (2, 2) effective bath occupations

    def __post_init__(self):
        g = np.asarray(self.gamma, dtype=float)
        n = np.asarray(self.nbar, dtype=float)
        if g.shape != (2, 2) or n.shape != (2, 2):
            raise DomainError("gamma and nbar must be 2x2")
        if np.any(g < 0) or np.any(n < 0):
            raise DomainError("rates and occupations must be >= 0")
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "nbar", n)

    @property
    def r(self) -> np.ndarray:
        """Pumping rates, r = gamma * nbar exactly."""
        return self.gamma * self.nbar

    @property
    def gamma_mean(self) -> float:
        return float(self.gamma.sum() / 4.0)

    def as_dict(self) -> dict:
        return {
            "gamma": self.gamma.tolist(),
            "nbar": self.nbar.tolist(),
            "r": self.r.tolist(),
            "gamma_mean": self.gamma_mean,
        }


def build_rate_table(spec: SystemSpec) -> RateSet:
    """Assemble the full rate table from a system specification.

    The bath occupation is flat over the four near-degenerate transitions
    (evaluated at delta_0 when derived from a temperature) but may differ
    between the two ground states for per-ground-state baths; the occupation
    of transition g_i <-> e_j is that of ground state g_i's bath.
    """
    if spec.mode == "direct_rates":
        gamma = np.asarray(spec.gamma, dtype=float)
        occ = spec.bath.occupations(spec.delta_0)
    else:
        gamma = np.zeros((2, 2))
        for i in range(2):
            for j in range(2):
                label = TRANSITIONS[2 * i + j]
                mu = spec.dipole(label)
                if mu.is_forbidden():
                    raise DomainError(f"forbidden transition (zero dipole): {label}")
                gamma[i, j] = spontaneous_rate(
                    spec.transition_frequency(i, j), mu.norm, spec.vacuum_factor
                )
        occ = spec.bath.occupations(spec.delta_0)
    nbar = np.repeat(occ[:, None], 2, axis=1)
    return RateSet(gamma=gamma, nbar=nbar)


def alignment_from_spec(spec: SystemSpec):
    """AlignmentSet from a physical-mode spec's dipoles."""
    if spec.dipoles is None:
        raise DomainError("spec carries no dipoles")
    return alignment_set_4ls(*(spec.dipole(t) for t in TRANSITIONS))
