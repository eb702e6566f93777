"""Exception hierarchy for solver, model, and diagnostic failures."""


class CnlsError(Exception):
    """Base class for all library errors."""


class ConfigError(CnlsError):
    """Invalid or inconsistent problem/configuration data."""


class PairLambdaMismatch(ConfigError):
    """A coupled pair does not share a common linear coefficient lambda."""


class NonzeroForbiddenCoupling(ConfigError):
    """A coupling entry the block decomposition requires to vanish is nonzero."""


class ZeroEps(ConfigError):
    """Cross couplings are present but the perturbation scale eps is zero."""


class GridMismatch(ConfigError):
    """Operands live on different radial grids."""


class GridTooCoarse(ConfigError):
    """Grid spacing cannot resolve a rescaled profile."""


class OutOfWindow(ConfigError):
    """Pair coupling beta is not above max(mu1, mu2); the synchronized
    solution formula is inadmissible there."""


class SolverFailure(CnlsError):
    """Base class for numerical failures. Carries an optional partial report."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NoConvergence(SolverFailure):
    """Newton iteration exhausted its budget without meeting the tolerance."""


class SingularJacobian(SolverFailure):
    """Linearized system could not be factorized (degenerate critical point)."""


class ImmediateFailure(SolverFailure):
    """Continuation could not even solve the unperturbed problem."""


class SignChange(SolverFailure):
    """A converged profile is not positive (wrong branch)."""


class EigSolverFailure(SolverFailure):
    """Eigenvalue computation did not converge."""


class ZeroState(CnlsError):
    """An operation requiring a nonzero state received (numerically) zero."""


class ZeroDenominator(CnlsError):
    """Quartic form in a quotient vanished or is nonpositive."""


class NotCritical(CnlsError):
    """A diagnostic requiring an approximate critical point received a state
    with too large a residual."""
