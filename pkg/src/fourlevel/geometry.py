"""Transition-dipole geometry: alignment parameters and the orthogonality check.

Interference between a pair of dipole transitions is controlled by the cosine
of the angle between their transition-dipole vectors.  For the four-level
system (two ground states g1, g2 and two excited states e1, e2) six such
cosines matter: one per shared state (p_g1, p_g2, p_e1, p_e2) and two for the
state-disjoint pairs (p_par for g1e1/g2e2, p_cross for g2e1/g1e2).

Since at most three nonzero 3-vectors can be mutually orthogonal, any system
with four or more allowed transitions necessarily has a nonzero alignment
somewhere; ``ubiquity_check`` makes that quantitative.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

# transition labels of the 4LS in canonical order
TRANSITIONS = ("g1e1", "g1e2", "g2e1", "g2e2")


@dataclass(frozen=True)
class DipoleVector:
    """A transition dipole: 3 real components plus the transition label."""

    components: tuple[float, float, float]
    label: str = ""

    def __post_init__(self):
        comps = tuple(float(c) for c in self.components)
        if len(comps) != 3:
            raise DomainError(f"dipole {self.label!r} needs 3 components, got {len(comps)}")
        object.__setattr__(self, "components", comps)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.components, dtype=float)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.array))

    def is_forbidden(self) -> bool:
        return self.norm == 0.0


@dataclass(frozen=True)
class AlignmentSet:
    """The six alignment cosines of the 4LS."""

    p_g1: float
    p_g2: float
    p_e1: float
    p_e2: float
    p_par: float
    p_cross: float

    def __post_init__(self):
        for name, value in self.as_dict().items():
            if not -1.0 - 1e-12 <= value <= 1.0 + 1e-12:
                raise DomainError(f"alignment {name}={value} outside [-1, 1]")

    def as_dict(self) -> dict[str, float]:
        return {
            "p_g1": self.p_g1,
            "p_g2": self.p_g2,
            "p_e1": self.p_e1,
            "p_e2": self.p_e2,
            "p_par": self.p_par,
            "p_cross": self.p_cross,
        }

    @classmethod
    def uniform(cls, p: float) -> "AlignmentSet":
        return cls(p, p, p, p, p, p)


@dataclass(frozen=True)
class UbiquityReport:
    n_transitions: int
    max_abs_alignment: float
    all_mutually_orthogonal: bool
    offending_pairs: tuple[tuple[str, str], ...]


def _as_vector(u) -> np.ndarray:
    if isinstance(u, DipoleVector):
        return u.array
    v = np.asarray(u, dtype=float)
    if v.shape != (3,):
        raise DomainError(f"expected a 3-vector, got shape {v.shape}")
    return v


def _label(u, fallback: str) -> str:
    if isinstance(u, DipoleVector) and u.label:
        return u.label
    return fallback


def alignment(u, v) -> float:
    """Cosine of the angle between two dipole vectors.

    Symmetric, scale-invariant, and in [-1, 1].  Zero-norm inputs denote
    forbidden transitions and are rejected rather than mapped to 0: a missing
    transition is not the same thing as an orthogonal pair.
    """
    ua, va = _as_vector(u), _as_vector(v)
    nu, nv = np.linalg.norm(ua), np.linalg.norm(va)
    if nu == 0.0:
        raise DomainError(f"forbidden transition (zero dipole): {_label(u, 'first argument')}")
    if nv == 0.0:
        raise DomainError(f"forbidden transition (zero dipole): {_label(v, 'second argument')}")
    p = float(np.dot(ua, va) / (nu * nv))
    return min(1.0, max(-1.0, p))


def alignment_set_4ls(mu_g1e1, mu_g1e2, mu_g2e1, mu_g2e2) -> AlignmentSet:
    """All six alignment parameters of the 4LS from its four dipoles.

    Pairing convention: p_g1 pairs the two transitions out of g1, p_e1 the two
    into e1, and so on; p_par pairs g1e1 with g2e2, p_cross pairs g2e1 with
    g1e2.
    """
    mus = {
        "g1e1": mu_g1e1,
        "g1e2": mu_g1e2,
        "g2e1": mu_g2e1,
        "g2e2": mu_g2e2,
    }
    for name, mu in mus.items():
        if np.linalg.norm(_as_vector(mu)) == 0.0:
            raise DomainError(f"forbidden transition (zero dipole): {name}")
    return AlignmentSet(
        p_g1=alignment(mus["g1e1"], mus["g1e2"]),
        p_g2=alignment(mus["g2e1"], mus["g2e2"]),
        p_e1=alignment(mus["g1e1"], mus["g2e1"]),
        p_e2=alignment(mus["g1e2"], mus["g2e2"]),
        p_par=alignment(mus["g1e1"], mus["g2e2"]),
        p_cross=alignment(mus["g2e1"], mus["g1e2"]),
    )


def ubiquity_check(dipoles, tolerance: float = 1e-12) -> UbiquityReport:
    """Check whether a set of dipoles is mutually orthogonal.

    The Gram matrix of n 3-vectors has rank at most 3, so four or more nonzero
    dipoles can never be mutually orthogonal; for such inputs the report always
    comes back with ``all_mutually_orthogonal=False``.
    """
    dipoles = list(dipoles)
    if not dipoles:
        raise DomainError("empty dipole list")
    if tolerance < 0:
        raise DomainError(f"tolerance must be >= 0, got {tolerance}")
    labels = [_label(d, f"#{i}") for i, d in enumerate(dipoles)]
    vecs = np.array([_as_vector(d) for d in dipoles])
    norms = np.linalg.norm(vecs, axis=1)
    dead = [labels[i] for i in np.nonzero(norms == 0.0)[0]]
    if dead:
        raise DomainError(f"forbidden transitions (zero dipoles): {', '.join(dead)}")

    unit = vecs / norms[:, None]
    gram = unit @ unit.T
    max_abs = 0.0
    offending = []
    for i, j in itertools.combinations(range(len(dipoles)), 2):
        p = abs(float(gram[i, j]))
        max_abs = max(max_abs, p)
        if p > tolerance:
            offending.append((labels[i], labels[j]))
    return UbiquityReport(
        n_transitions=len(dipoles),
        max_abs_alignment=min(1.0, max_abs),
        all_mutually_orthogonal=max_abs <= tolerance,
        offending_pairs=tuple(offending),
    )
