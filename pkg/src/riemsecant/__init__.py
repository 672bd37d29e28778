"""Secant method for zeros of vector fields on Riemannian manifolds."""
from .certificate import (
    CertificateReport,
    OmegaFamily,
    OmegaFunction,
    abc,
    certify,
    compute_alpha_beta_eta,
    estimate_K,
    find_root_R,
)
from .divided_difference import (
    Construction,
    DividedDifferenceOperator,
    apply,
    build_integral_dd,
    build_projection_dd,
    dd_residual,
    operator_norm,
    solve,
)
from .errors import (
    BasePointMismatch,
    CutLocus,
    DegeneratePair,
    FieldEvaluation,
    IndexOutOfRange,
    InsufficientData,
    InvalidConfig,
    InvalidPoint,
    RiemSecantError,
    SingularOperator,
    Undefined,
)
from .fields import VectorFieldProblem, builtin_problems, covariant_derivative, evaluate, make_problem
from .manifolds import (
    SPD,
    Euclidean,
    Kind,
    ManifoldId,
    ManifoldPoint,
    Sphere,
    TangentVector,
    distance,
    exp_map,
    inner,
    log_map,
    norm,
    orthonormal_basis,
    parallel_transport,
)
from .solver import (
    SolverConfig,
    SolverTrace,
    Termination,
    estimate_order,
    lemma1_residual,
    secant_solve,
)

__version__ = "0.1.0"
