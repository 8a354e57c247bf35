"""
    Internal stuff for the solver.
    Not supposed to be used by the end user.
"""
