"""Exception types raised by the solvers.

Every error carries a short ``code`` used by the CLI when it reports a
numerical failure on stderr.
"""


class BIWavesError(Exception):
    """Base class for all package errors."""

    code = "BIWavesError"

    def to_dict(self):
        return {"error": self.code, "message": str(self)}


class InvalidArgument(BIWavesError, ValueError):
    code = "InvalidArgument"


class DiagonalObstruction(BIWavesError, ArithmeticError):
    """A diagonal lattice coefficient of the residual failed to vanish."""

    code = "DiagonalObstruction"

    def __init__(self, order, nu, value):
        self.order = order
        self.nu = nu
        self.value = value
        super().__init__(
            f"residual coefficient at lattice point (M={order}, nu=mu={nu}) "
            f"is {value}, expected exact zero"
        )


class NegativeOmegaSquared(BIWavesError, ArithmeticError):
    code = "NegativeOmegaSquared"

    def __init__(self, eps, value):
        self.eps = eps
        self.value = value
        super().__init__(
            f"truncated dispersion sum omega^2/k^2 = {value!r} <= 0 at eps={eps!r}"
        )


class HyperbolicityViolation(BIWavesError, ArithmeticError):
    code = "HyperbolicityViolation"

    def __init__(self, lam, margin):
        self.lam = lam
        self.margin = margin
        super().__init__(
            f"hyperbolicity margin 1 + a'^2 - v0^2 = {margin!r} <= 0 at lambda={lam!r}"
        )


class QuadratureNotConverged(BIWavesError, ArithmeticError):
    code = "QuadratureNotConverged"


class InversionNotConverged(BIWavesError, ArithmeticError):
    code = "InversionNotConverged"

    def __init__(self, x, t, diagnostics):
        self.x = x
        self.t = t
        self.diagnostics = diagnostics
        super().__init__(f"could not invert (x={x!r}, t={t!r}): {diagnostics}")


class NotConverged(BIWavesError, ArithmeticError):
    code = "NotConverged"


class MissingDerivatives(BIWavesError, ValueError):
    code = "MissingDerivatives"


class SymmetryViolation(BIWavesError, ValueError):
    code = "SymmetryViolation"


class ConfigError(BIWavesError, ValueError):
    code = "ConfigError"
