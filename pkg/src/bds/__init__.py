"""Baskakov-Durrmeyer-Stancu operators with exact moments and convergence checks."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BDSError,
    ConvergenceError,
    DivergenceError,
    DomainError,
    InstabilityError,
    IntegrabilityError,
    MomentValidityError,
    OrderError,
    ParameterError,
    StructureError,
)
from .params import LogValue, ShapeParams  # noqa: E402
from .polys import RationalPoly, TrivariatePoly  # noqa: E402
from .basis import dr_p_exact, eval_b, eval_p, p_ratio, q_decomposition, s_polynomials  # noqa: E402
from .quadrature import QuadratureConfig, b_monomial_moment, integrate_b_weighted  # noqa: E402
from .functions import REGISTRY, FunctionSpec, get_function  # noqa: E402
from .operator import (  # noqa: E402
    OperatorResult,
    apply,
    apply_derivative,
    apply_derivative_grid,
    apply_grid,
    stancu_map,
)
from .moments import (  # noqa: E402
    MomentTable,
    asymptotic_raw_check,
    baskakov_U_moments,
    central_from_raw,
    central_moments,
    raw_moments,
)
from .analysis import (  # noqa: E402
    ConvergenceReport,
    ModulusQuery,
    error_bound_ratio,
    modulus_of_continuity,
    moment_order_fit,
    pointwise_convergence_check,
    voronovskaja_check,
    voronovskaja_rhs,
)
