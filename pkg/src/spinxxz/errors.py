"""Exception types raised by the library."""


class SpinXXZError(Exception):
    """Base class for all library errors."""


class PoleError(SpinXXZError, ZeroDivisionError):
    """A scalar prefactor vanishes where it is used as a divisor."""

    def __init__(self, factor, value):
        self.factor = factor
        self.value = value
        super().__init__(f"pole: {factor} vanishes (|value| = {abs(value):.3e})")


class ValidationError(SpinXXZError, ValueError):
    """Parameters or configuration violate a precondition."""

    def __init__(self, message, field=None):
        self.field = field
        super().__init__(message if field is None else f"{field}: {message}")


class ConvergenceError(SpinXXZError, RuntimeError):
    """A numerical procedure did not reach its tolerance."""

    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)


class RootCollisionError(SpinXXZError, ZeroDivisionError):
    """A Bethe root coincides with a shifted root so a ratio is undefined."""

    def __init__(self, roots):
        self.roots = list(roots)
        super().__init__("colliding Bethe roots: " + ", ".join(f"{r:.6g}" for r in self.roots))
