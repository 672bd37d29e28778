"""Numerical tolerances shared across the package."""

# point / tangent construction
POINT_TOL = 1e-12
TANGENT_TOL = 1e-10
BASE_POINT_TOL = 1e-12
# gross-defect thresholds above which construction refuses instead of repairing
REPAIR_LIMIT = 1e-6

# geodesics
ZERO_ANGLE = 1e-14
CUT_LOCUS_MARGIN = 1e-8
DEGENERATE_PAIR = 1e-12

# linear algebra
COND_LIMIT = 1e12
SINGULAR_RATIO = 1e-12
PIVOT_THRESHOLD = 1e-12

# finite differences
FD_REL_STEP = 1e-5

# quadrature
DEFAULT_QUAD_NODES = 8

# solver defaults
RESIDUAL_TOL = 1e-10
STEP_TOL = 1e-12
MAX_ITERS = 100
TIGHT_RESIDUAL_TOL = 1e-14

# order estimation
ERROR_FLOOR = 1e-13
MIN_ORDER_POINTS = 5

# certificate
ROOT_SCAN_FRACTION = 1e-3
ROOT_SCAN_FLOOR = 1e-9
ROOT_BISECT_TOL = 1e-12
ROOT_SCAN_MAX_POINTS = 10_000_000
K_INFLATION = 1.1
