"""Exception hierarchy. CLI exit codes hang off these classes."""


class KGError(Exception):
    exit_code = 1


class ConfigError(KGError, ValueError):
    """Invalid physical configuration or scenario parameter."""
    exit_code = 2


class DomainError(ConfigError):
    """Input outside the domain where a formula applies (e.g. q*phi > 0, |v| >= c)."""


class MisuseError(KGError, RuntimeError):
    """An operation was called under a configuration it does not support."""
    exit_code = 2


class IntegrityError(KGError, ValueError):
    """Data violates an invariant (negative density sample, non-finite values)."""
    exit_code = 2


class DivergenceError(KGError, FloatingPointError):
    exit_code = 3

    def __init__(self, t, dt, detail="non-finite values in state"):
        super().__init__(f"{detail} at t={t:.6g} (dt={dt:.6g})")
        self.t = t
        self.dt = dt


class SingularDenominatorError(KGError, ZeroDivisionError):
    exit_code = 3

    def __init__(self, indices, threshold, context=""):
        idx = list(map(int, indices))
        shown = idx[:20]
        more = "" if len(idx) <= 20 else f" (+{len(idx) - 20} more)"
        where = f" ({context})" if context else ""
        super().__init__(
            f"|m - (dS/dt)/c^2| below {threshold:.3g} at grid points {shown}{more}{where}")
        self.indices = idx
        self.threshold = threshold
