class NumericalError(RuntimeError):
    """A solver self-check failed (non-convergence, norm growth, ...)."""
