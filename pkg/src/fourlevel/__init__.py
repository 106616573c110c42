"""Dynamics of a four-level quantum system driven by incoherent radiation.

Core objects: dipole geometry and alignment parameters (:mod:`.geometry`),
rate tables (:mod:`.rates`), the partial-secular generator
(:mod:`.liouvillian`), propagation and steady states (:mod:`.propagation`),
trajectory analysis (:mod:`.analysis`), the semiclassical stochastic-field
picture (:mod:`.field`), and the config/preset/CLI harness.
"""

__version__ = "0.1.0"

from .geometry import (
    AlignmentSet,
    DipoleVector,
    UbiquityReport,
    alignment,
    alignment_set_4ls,
    ubiquity_check,
)
from .rates import (
    BathSpec,
    RateSet,
    SystemSpec,
    build_rate_table,
    mean_occupation,
    spontaneous_rate,
)
from .liouvillian import (
    Generator,
    ReducedState,
    apply,
    build_generator,
    secular_generator,
)
from .propagation import (
    RampProfile,
    SteadyStateResult,
    Trajectory,
    default_time_grid,
    propagate_eigen,
    propagate_ode,
    propagate_ramp,
    steady_state,
)
from .analysis import (
    AuditReport,
    OscillationMetrics,
    PlateauWindow,
    RegimeReport,
    classify_regime,
    detect_oscillations,
    fit_decay_time,
    oscillation_suppression_sweep,
    physicality_audit,
    plateau_detect,
)
from .field import (
    EnvelopeSpec,
    PhasePath,
    excitation_amplitude,
    interference_visibility,
    pulse_coherence,
    pulsed_vs_sudden_report,
    sample_phase_path,
)
from .config import ExperimentConfig, load_config, validate_config
from .presets import PRESET_NAMES, load_preset, preset_path
from .errors import (
    AnalysisError,
    ConfigError,
    DomainError,
    EigenbasisIllConditioned,
    NumericsError,
)

__all__ = [
    "__version__",
    "AlignmentSet",
    "DipoleVector",
    "UbiquityReport",
    "alignment",
    "alignment_set_4ls",
    "ubiquity_check",
    "BathSpec",
    "RateSet",
    "SystemSpec",
    "build_rate_table",
    "mean_occupation",
    "spontaneous_rate",
    "Generator",
    "ReducedState",
    "apply",
    "build_generator",
    "secular_generator",
    "RampProfile",
    "SteadyStateResult",
    "Trajectory",
    "default_time_grid",
    "propagate_eigen",
    "propagate_ode",
    "propagate_ramp",
    "steady_state",
    "AuditReport",
    "OscillationMetrics",
    "PlateauWindow",
    "RegimeReport",
    "classify_regime",
    "detect_oscillations",
    "fit_decay_time",
    "oscillation_suppression_sweep",
    "physicality_audit",
    "plateau_detect",
    "EnvelopeSpec",
    "PhasePath",
    "excitation_amplitude",
    "interference_visibility",
    "pulse_coherence",
    "pulsed_vs_sudden_report",
    "sample_phase_path",
    "ExperimentConfig",
    "load_config",
    "validate_config",
    "PRESET_NAMES",
    "load_preset",
    "preset_path",
    "AnalysisError",
    "ConfigError",
    "DomainError",
    "EigenbasisIllConditioned",
    "NumericsError",
]
