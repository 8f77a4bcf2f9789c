"""Green functions of conformal operators on spheres and rigidity checks on graph hypersurfaces."""

from .errors import (
    ChartError,
    ConvergenceError,
    DegreeCapError,
    DomainError,
    InexactDivisionError,
    KernelObstruction,
    PoleError,
    SphericalGreenError,
)
from .exact import RationalFn, RationalPoly
from .gegenbauer import GegenbauerBasis, gauss_jacobi_rule, gegenbauer_poly
from .green import GreenSpec, SeriesConfig, coefficient_match, const_critical, const_power, series_partial
from .reports import ResidualReport
from .spectrum import KernelStatus, OperatorOrder, kernel_status
from .surfaces import GraphSurface, ellipsoid, paraboloid, plane, sphere

__version__ = "0.1.0"

__all__ = [
    "ChartError",
    "ConvergenceError",
    "DegreeCapError",
    "DomainError",
    "GegenbauerBasis",
    "GraphSurface",
    "GreenSpec",
    "InexactDivisionError",
    "KernelObstruction",
    "KernelStatus",
    "OperatorOrder",
    "PoleError",
    "RationalFn",
    "RationalPoly",
    "ResidualReport",
    "SeriesConfig",
    "SphericalGreenError",
    "coefficient_match",
    "const_critical",
    "const_power",
    "ellipsoid",
    "gauss_jacobi_rule",
    "gegenbauer_poly",
    "kernel_status",
    "paraboloid",
    "plane",
    "series_partial",
    "sphere",
]
