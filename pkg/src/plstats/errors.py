class NonConvergenceError(ArithmeticError):
    """A quadrature did not settle when the node count was doubled."""

    def __init__(self, what: str, coarse: float, fine: float, tol: float):
        self.what = what
        self.coarse = coarse
        self.fine = fine
        self.tol = tol
        super().__init__(
            f"{what}: doubling nodes changed the value by {abs(fine - coarse):.3e} (> {tol:.1e})"
        )
