"""
    Constants for the solver.
"""

from vmm_solver.__version__ import __version__ as library_version

# Library fields (used for run information in debug logs).
LIBRARY_NAME = "vmm_solver"
LIBRARY_VERSION = library_version
LIBRARY_INFORMATION_DICT = {"lib.name": LIBRARY_NAME, "lib.ver": LIBRARY_VERSION}

# Runtime name for run information.
RUNTIME_NAME = "Python"

# Mesh validator defaults.
# Shape ratio is circumradius / inradius (2 for an equilateral triangle).
MESH_DEFAULT_SHAPE_RATIO_BOUND = 10.0
MESH_DEFAULT_QUASI_UNIFORMITY_BOUND = 4.0
# Relative distance below which a vertex counts as lying on an edge.
MESH_COLLINEAR_TOLERANCE = 1e-10

# Quadrature.
QUADRATURE_MAX_DEGREE = 14
QUADRATURE_DEFAULT_DEGREE_1D = 8
QUADRATURE_DEFAULT_DEGREE_2D = 12

# Elements.
# Threshold on the condition estimate of the scaled Argyris duality matrix.
ELEMENT_CONDITION_THRESHOLD = 1e12

# Linear algebra.
SOLVER_RESIDUAL_TOLERANCE = 1e-10
EIGEN_NEGATIVE_TOLERANCE = 1e-10

# Diagnostics.
DIAGNOSTICS_DEFAULT_DENSE_CEILING = 3000
CZ_UNIFORMITY_MIN_RATIO = 0.2

# Problems.
ELLIPTICITY_DEFAULT_SAMPLES = 10_000
SYMMETRY_TOLERANCE = 1e-12

# Auxiliary (higher order) boundary conditions.
AUX_BC_SIMPLY_SUPPORTED = "simply_supported"
AUX_BC_CLAMPED = "clamped"
AUX_BC_CHOICES = (AUX_BC_SIMPLY_SUPPORTED, AUX_BC_CLAMPED)

# Runs.
DEFAULT_SEED = 20_240_611
THREADS_ENV_VARIABLE = "VMM_SOLVER_THREADS"

# CLI exit codes.
EXIT_CODE_SUCCESS = 0
EXIT_CODE_USAGE = 1
EXIT_CODE_NUMERICAL = 2

# Output formats.
TABLE_CSV_HEADER = (
    "eps",
    "h",
    "l2_err",
    "l2_order",
    "h1_err",
    "h1_order",
    "lap_err",
    "lap_order",
)
FIELD_CSV_HEADER = ("x", "y", "u_h", "u_exact", "err", "lap_err")
CZ_CSV_HEADER = ("eps", "h", "n_dofs", "c_h", "adjoint")
