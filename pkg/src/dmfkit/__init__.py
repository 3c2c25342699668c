"""dmfkit: density-matrix functional toolkit on finite Gaussian bases.

Builds orthonormal even-tempered s-Gaussian integral sets, evaluates the
Hartree-Fock, Mueller and Csanyi-Arias functionals, minimizes them over
the convex set of density matrices, and numerically certifies the
inequalities that order the three functionals.
"""

__version__ = "0.1.0"

from .functionals import EnergyBreakdown, FunctionalKind, coulomb_matrix, energy, exchange_map, gradient
from .integrals import (
    BasisSpec,
    IntegralSet,
    InterchangeFormatError,
    LinearDependenceError,
    build_even_tempered,
    load_interchange,
    save_interchange,
)
from .optimize import MinimizeOptions, MinimizeResult, ZscanRow, minimize, zscan
from .rdm import (
    DensityMatrix,
    SpectralFunction,
    apply_function,
    frechet_apply,
    project_feasible,
    random_feasible,
)
from .verify import (
    VerificationReport,
    ball_intersection_volume,
    fci2_energy,
    fdl_reconstruct,
    fdl_suite,
    lemma_gap,
    lemma_suite,
    psd_suite,
    sandwich_suite,
)

__all__ = [
    "__version__",
    "BasisSpec",
    "IntegralSet",
    "InterchangeFormatError",
    "LinearDependenceError",
    "build_even_tempered",
    "load_interchange",
    "save_interchange",
    "DensityMatrix",
    "SpectralFunction",
    "apply_function",
    "frechet_apply",
    "project_feasible",
    "random_feasible",
    "FunctionalKind",
    "EnergyBreakdown",
    "coulomb_matrix",
    "exchange_map",
    "energy",
    "gradient",
    "MinimizeOptions",
    "MinimizeResult",
    "ZscanRow",
    "minimize",
    "zscan",
    "VerificationReport",
    "lemma_gap",
    "ball_intersection_volume",
    "fdl_reconstruct",
    "fci2_energy",
    "lemma_suite",
    "fdl_suite",
    "psd_suite",
    "sandwich_suite",
]
