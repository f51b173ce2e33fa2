"""Ground-state entanglement of two-mode bosonic catastrophe models."""

from .asymptotic import LobeKind, asymptotic_entropy, entropy_from_ratio, ratio_general_theta
from .numerics import entropy_1d, entropy_2d, finite_mu_entropy, fock_cusp_entropy
from .potentials import (
    BUTTERFLY_A4,
    CatastropheParams,
    CatastrophePotential,
    FixedPoint,
    Model,
    butterfly,
    cusp,
    excitation_energies,
    find_fixed_points,
    molar,
)
from .sweep import PeakScan, PowerLawFit, SweepResult, fit_power_law, locate_peak, peak_scan, sweep_entropy

__all__ = [
    "BUTTERFLY_A4",
    "CatastropheParams",
    "CatastrophePotential",
    "FixedPoint",
    "LobeKind",
    "Model",
    "PeakScan",
    "PowerLawFit",
    "SweepResult",
    "asymptotic_entropy",
    "butterfly",
    "cusp",
    "entropy_1d",
    "entropy_2d",
    "entropy_from_ratio",
    "excitation_energies",
    "find_fixed_points",
    "finite_mu_entropy",
    "fit_power_law",
    "fock_cusp_entropy",
    "locate_peak",
    "molar",
    "peak_scan",
    "ratio_general_theta",
    "sweep_entropy",
]
__version__ = "0.1.0"
