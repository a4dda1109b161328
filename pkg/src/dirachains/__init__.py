"""Dirac (pointed) k-chains in R^n.

Finite formal sums of (point; k-vector) terms, their dipole extensions,
pairing against analytic differential forms, certified two-sided norm
estimation, and discretization experiments for convergence studies.
"""

from .exterior import KCovector, KVector, covector_apply, mass, mass_bound, wedge
from .forms import (
    FormSpec,
    cr_bound,
    derivative,
    evaluate,
    exterior_derivative,
    lie_derivative,
)
from .chains import (
    DEFAULT_MAX_ORDER,
    DipoleChain,
    PointedChain,
    difference_chain,
    dipole_derivative,
    pair,
)
from ._kernels import backend_name
from .norms import (
    DifferenceCell,
    NaturalNormEstimate,
    NormEstimate,
    check_lower_certificate,
    check_upper_certificate,
    natural_norm,
    norm_lower,
    norm_sandwich,
    norm_upper,
)
from .oracle import GridSpec, norm_oracle_grid
from .approx import (
    CauchyReport,
    Cell,
    boundary_chain,
    cauchy_rate,
    cell_boundary,
    riemann_chain,
    stokes_residual,
)
from .fileio import ParseError, load_cell, load_chain, load_form

__version__ = "0.1.0"

__all__ = [
    "KVector",
    "KCovector",
    "wedge",
    "mass",
    "mass_bound",
    "covector_apply",
    "FormSpec",
    "evaluate",
    "derivative",
    "cr_bound",
    "lie_derivative",
    "exterior_derivative",
    "PointedChain",
    "DipoleChain",
    "pair",
    "difference_chain",
    "dipole_derivative",
    "DEFAULT_MAX_ORDER",
    "backend_name",
    "NormEstimate",
    "NaturalNormEstimate",
    "DifferenceCell",
    "norm_lower",
    "norm_upper",
    "norm_sandwich",
    "natural_norm",
    "check_lower_certificate",
    "check_upper_certificate",
    "GridSpec",
    "norm_oracle_grid",
    "Cell",
    "riemann_chain",
    "cell_boundary",
    "boundary_chain",
    "stokes_residual",
    "cauchy_rate",
    "CauchyReport",
    "ParseError",
    "load_chain",
    "load_form",
    "load_cell",
    "__version__",
]
