"""Spectral analysis of reparametrized isogeometric Laplacians in one dimension.

The package assembles B-spline Galerkin matrices on a mesh induced by a
reparametrization of [0, 1], solves the eigenproblem, evaluates the
symbol and its counting function, and checks the discrete spectrum
against them.
"""

from .assembly import BandedSymmetricMatrix, assemble, assemble_mass, assemble_stiffness, write_triplets
from .bspline import BSplineBasis, KnotVector, eval_basis, eval_cardinal, make_knot_vector, tabulate_basis
from .distribution import (
    GammaSlope,
    PsiFunction,
    PsiMethod,
    Rearrangement,
    eval_psi,
    eval_xi,
    slope_at_zero,
    slope_bounds,
)
from .eigensolve import DiscreteSpectrum, compute_spectrum, solve_spectrum
from .errors import (
    InvalidArgumentError,
    InvalidPairError,
    InvalidReparametrizationError,
    NumericalError,
    OutOfRangeError,
    UnsupportedOperationError,
)
from .reparam import (
    Convexity,
    Reparametrization,
    identity,
    inverse_deriv,
    make_exp_convex,
    make_log_concave,
    mirror,
)
from .symbol import FullSymbol, SymbolEp, eval_ep, eval_fp, eval_gp, eval_omega, inverse_ep

__version__ = "0.1.0"

__all__ = [
    "BandedSymmetricMatrix",
    "assemble",
    "assemble_mass",
    "assemble_stiffness",
    "write_triplets",
    "BSplineBasis",
    "KnotVector",
    "eval_basis",
    "eval_cardinal",
    "make_knot_vector",
    "tabulate_basis",
    "GammaSlope",
    "PsiFunction",
    "PsiMethod",
    "Rearrangement",
    "eval_psi",
    "eval_xi",
    "slope_at_zero",
    "slope_bounds",
    "DiscreteSpectrum",
    "compute_spectrum",
    "solve_spectrum",
    "InvalidArgumentError",
    "InvalidPairError",
    "InvalidReparametrizationError",
    "NumericalError",
    "OutOfRangeError",
    "UnsupportedOperationError",
    "Convexity",
    "Reparametrization",
    "identity",
    "inverse_deriv",
    "make_exp_convex",
    "make_log_concave",
    "mirror",
    "FullSymbol",
    "SymbolEp",
    "eval_ep",
    "eval_fp",
    "eval_gp",
    "eval_omega",
    "inverse_ep",
]
