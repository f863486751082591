"""Silicon-vacancy (V2, 4H-SiC) ODMR vector magnetometry toolkit."""

from .fitting import (
    FitResult,
    IllConditionedFitError,
    ZfsSeries,
    fit_lorentzian_multi,
    fit_saturation,
    fit_zfs_series,
)
from .inversion import (
    AxialInversion,
    AxialModelError,
    InversionResult,
    NoSolutionError,
    angle_sweep,
    axial_invert,
    invert_field,
)
from .sensitivity import (
    LaserSweep,
    MwSweep,
    SensitivityBudget,
    estimate_sensitivity,
    laser_sweep_sensitivity,
    mw_optimum_dbm,
    mw_sweep_sensitivity,
    project_saturation,
    sensitivity_budget,
)
from .spectrum import (
    AcquisitionConfig,
    LorentzianPeak,
    MwResponseParams,
    OdmrSpectrum,
    SaturationParams,
    SpectrumMeta,
    lorentzian_value,
    mw_response,
    photon_rate,
    shot_noise_sigma,
    synthesize_spectrum,
)
from .spin_model import (
    MU_B_OVER_H,
    EigenSystem,
    FieldVector,
    PhysicalConstants,
    SpinMatrix,
    TransitionPair,
    build_hamiltonian,
    closed_form_axial,
    diagonalize,
    spin_operators,
    transition_frequencies,
    transition_pair,
    transition_table,
)

__version__ = "0.1.0"

__all__ = [
    "MU_B_OVER_H",
    "AcquisitionConfig",
    "AxialInversion",
    "AxialModelError",
    "EigenSystem",
    "FieldVector",
    "FitResult",
    "IllConditionedFitError",
    "InversionResult",
    "LaserSweep",
    "LorentzianPeak",
    "MwResponseParams",
    "MwSweep",
    "NoSolutionError",
    "OdmrSpectrum",
    "PhysicalConstants",
    "SaturationParams",
    "SensitivityBudget",
    "SpectrumMeta",
    "SpinMatrix",
    "TransitionPair",
    "ZfsSeries",
    "angle_sweep",
    "axial_invert",
    "build_hamiltonian",
    "closed_form_axial",
    "diagonalize",
    "estimate_sensitivity",
    "fit_lorentzian_multi",
    "fit_saturation",
    "fit_zfs_series",
    "invert_field",
    "laser_sweep_sensitivity",
    "lorentzian_value",
    "mw_optimum_dbm",
    "mw_response",
    "mw_sweep_sensitivity",
    "photon_rate",
    "project_saturation",
    "sensitivity_budget",
    "shot_noise_sigma",
    "spin_operators",
    "synthesize_spectrum",
    "transition_frequencies",
    "transition_pair",
    "transition_table",
    "__version__",
]
