"""
    `python -m vmm_solver` entry point.
"""

from vmm_solver.cli import main

if __name__ == "__main__":
    main()
