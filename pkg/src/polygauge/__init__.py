"""Polyhedral gauge regularization: identifiability certificates and solvers."""

from .builders import (
    Partition,
    build_analysis_l1,
    build_block_l1_linf,
    build_from_descriptor,
    build_l1,
    build_linf,
)
from .certify import (
    closed_form_solution,
    constants,
    ic,
    lambda_range,
    noiseless_certificate,
    verify_optimality,
)
from .errors import (
    CapacityError,
    ConditioningError,
    InputError,
    NotOptimalError,
    PolygaugeError,
    PreconditionError,
    SolverFailure,
    UndefinedSupportError,
)
from .gauge import HMatrix, HSupport, eval_gauge, h_support, is_valid_gauge, subdifferential
from .lp import LinearProgram, LpSolution, solve_lp
from .numlin import (
    face_coordinates,
    gamma_inner,
    kernel_basis,
    pinv,
    restricted_injectivity,
    support_geometry,
)
from .qp_solver import solve_p0, solve_p_lambda

__version__ = "0.1.0"
