"""
    Library specific information.
"""

__title__ = "vmm-solver"
__description__ = "C1 finite element solver for non-divergence elliptic PDEs regularized by the vanishing moment method"
__url__ = "https://github.com/vmm-solver/vmm-solver-py"
__version__ = "0.1.0"
__author__ = "VMM Solver Team and Contributors"
__author_email__ = "maintainers@vmm-solver.dev"
__license__ = "MIT"
__copyright__ = "Copyright 2026 VMM Solver Team"
