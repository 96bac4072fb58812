"""Spectral and pseudospectral stability of plane-wave amplitudes in quasicrystals.

Builds the phonon/phason evolution matrix for the four phason self-action
regimes, measures non-normality, samples complex and structured
pseudospectra and runs parameter sweeps with threshold detection.
"""

from .analysis import (
    Spectrum,
    StabilityVerdict,
    StructuredOptions,
    SweepResult,
    Verdict,
    classify,
    spectrum_of,
    sweep,
    threshold_bisect,
    transient_check,
)
from .errors import (
    BracketError,
    ConfigError,
    ConvergenceError,
    InadmissibleParametersError,
    PhasonStabError,
    SaturationError,
    SingularConfigurationError,
)
from .model import (
    ConstitutiveParams,
    DerivedCoefficients,
    SelfActionMode,
    SystemMatrix,
    WaveConfig,
    assemble_system,
    check_energy_positivity,
    derive_coefficients,
    quasicrystal_params,
)
from .normality import NormalityReport, normality_report
from .pseudospectra import (
    GridSpec,
    PseudospectrumGrid,
    StructuredCloud,
    calibrate_epsilon,
    membership,
    pseudo_abscissa,
    resolvent_grid,
    structured_samples,
)

__version__ = "0.1.0"

__all__ = [
    "BracketError",
    "ConfigError",
    "ConstitutiveParams",
    "ConvergenceError",
    "DerivedCoefficients",
    "GridSpec",
    "InadmissibleParametersError",
    "NormalityReport",
    "PhasonStabError",
    "PseudospectrumGrid",
    "SaturationError",
    "SelfActionMode",
    "SingularConfigurationError",
    "Spectrum",
    "StabilityVerdict",
    "StructuredCloud",
    "StructuredOptions",
    "SweepResult",
    "SystemMatrix",
    "Verdict",
    "WaveConfig",
    "assemble_system",
    "calibrate_epsilon",
    "check_energy_positivity",
    "classify",
    "derive_coefficients",
    "membership",
    "normality_report",
    "quasicrystal_params",
    "pseudo_abscissa",
    "resolvent_grid",
    "spectrum_of",
    "structured_samples",
    "sweep",
    "threshold_bisect",
    "transient_check",
]
