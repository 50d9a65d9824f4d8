"""Relative heat traces, zeta-regularised determinants and conformal geometry
on surfaces with hyperbolic cusps.

Modules
-------
cusp_model
    The exactly solvable half-line cusp model and its relative heat trace.
trace_expansion
    Small-t expansion coefficients, fitting, and large-t decay checks.
zeta_det
    Relative zeta function, its continuation, and relative determinants.
surface
    Discrete surfaces with cusps, conformal changes, Gauss-Bonnet.
polyakov
    The conformal variation formula for ``log det`` and the convex
    functional whose minimisers have constant curvature.
cli
    Batch command-line front end (``cusp-spectra``).
"""

from .cusp_model import (
    Domain,
    ModelCuspPair,
    MultiCuspModel,
    erf_unnormalized,
    model_heat_kernel,
    multi_cusp_trace,
    relative_trace_exact,
    relative_trace_quadrature,
)
from .errors import (
    ConditioningError,
    ContractError,
    ConvergenceError,
    CuspSpectraError,
    DomainError,
    InconsistencyError,
    LineSearchError,
    ModelMismatchError,
    SurfaceLoadError,
)
from .polyakov import (
    ExtremalReport,
    MinimizeOptions,
    PolyakovDelta,
    cocycle_residual,
    curvature_constancy,
    minimize_ops,
    ops_functional,
    ops_gradient,
    polyakov_delta,
    polyakov_directional,
)
from .quadrature import integrate
from .surface import (
    BUNDLED,
    ConformalFactor,
    Cusp,
    DiscreteSurface,
    build_closed_surface,
    build_cusp_grid,
    build_cusped_surface,
    bundled_surface,
    conformal_transform,
    dirichlet_energy,
    gauss_bonnet,
    load_surface,
    random_decaying_factor,
    save_surface,
)
from .trace_expansion import (
    EULER_GAMMA,
    ExpansionCoeffs,
    FitReport,
    RelativeTrace,
    check_large_t,
    eval_expansion,
    expansion_from_geometry,
    fit_expansion,
    model_pair_trace,
    multi_cusp_relative_trace,
)
from .zeta_det import (
    ZetaOptions,
    ZetaResult,
    relative_determinant,
    relative_zeta,
    relative_zeta_continued,
    synthetic_trace,
    synthetic_zeta,
    zeta_prime_zero,
)

__version__ = "0.1.0"
