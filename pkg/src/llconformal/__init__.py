"""Conformal structure of planar Leray-Lions equations, computed and checked numerically."""

from .beltrami import (PhiSolution, closed_form_phi, invert_map, solve_phi_grid, solve_phi_radial)
from .conformal import (ConformalData, PointClass, compute_conformal, compute_eta, compute_gamma_mu,
                        compute_nu, eta_from_nu, eta_function, ellipticity_report)
from .errors import (ConformalError, EllipticityError, InsufficientStencilError, InternalInconsistencyError,
                     NeumannDivergenceError, NotHomeomorphicError, OutOfDomainError)
from .fields import Domain, StructureField, catalog, monotonicity_audit, to_bold
from .grid import ComplexGridField, GridSpec, interpolate, wirtinger_fd, wirtinger_spectral
from .hodograph import Factorization, factorize
from .solutions import ReferenceSolution, reference
from .verify import ResidualReport

__all__ = [
    "ComplexGridField", "ConformalData", "ConformalError", "Domain", "EllipticityError", "Factorization",
    "GridSpec", "InsufficientStencilError", "InternalInconsistencyError", "NeumannDivergenceError",
    "NotHomeomorphicError", "OutOfDomainError", "PhiSolution", "PointClass", "ReferenceSolution",
    "ResidualReport", "StructureField", "catalog", "closed_form_phi", "compute_conformal", "compute_eta",
    "compute_gamma_mu", "compute_nu", "ellipticity_report", "eta_from_nu", "eta_function", "factorize",
    "interpolate", "invert_map", "monotonicity_audit", "reference", "solve_phi_grid", "solve_phi_radial",
    "to_bold", "wirtinger_fd", "wirtinger_spectral",
]
