"""Exception hierarchy shared by every module of the package."""


class ComplexityLabError(Exception):
    """Base class for all errors raised by complexity_lab."""


class InvalidStateError(ComplexityLabError, ValueError):
    pass


class InvalidArgumentError(ComplexityLabError, ValueError):
    pass


class PreconditionError(ComplexityLabError, ValueError):
    pass


class DivergenceInfiniteError(ComplexityLabError, ArithmeticError):
    """Raised when Q(x, x') = 0 while p(x) P(x, x') > 0."""

    def __init__(self, state, next_state):
        self.state = int(state)
        self.next_state = int(next_state)
        super().__init__(
            f"KL divergence is infinite: Q({self.state}, {self.next_state}) = 0 "
            "on the support of p(x) P(x, x')"
        )


class ConvergenceError(ComplexityLabError, RuntimeError):
    """An iterative solver stopped before meeting its tolerance."""

    def __init__(self, message, residual, iterations):
        self.residual = float(residual)
        self.iterations = int(iterations)
        super().__init__(f"{message} (residual={self.residual:.3e}, iterations={self.iterations})")


class ParseError(ComplexityLabError, ValueError):
    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
