class CovlpException(Exception):
    """Base class for covlp exceptions."""


class DomainViolation(CovlpException, ValueError):
    """Parameter or instance data outside its mathematical domain."""


class CapExceeded(CovlpException):
    """A configured size cap was exceeded."""


class InfeasibleLp(CovlpException):
    """Covering LP has a zero row, so no feasible solution exists."""


class CertificateError(CovlpException):
    """Exact solve produced a primal-dual pair that fails verification."""


class SolverContractError(CovlpException):
    """A solve-time contract was broken by the caller or an oracle."""


class OracleContractViolation(SolverContractError):
    """An oracle returned a value outside its declared contract."""


class IterationCapExceeded(OracleContractViolation):
    """Point-find budget exhausted, the oracle is weaker than declared."""


class WidthBoundViolated(SolverContractError):
    """An observed row ratio exceeded the declared width bound rho."""


class InvalidUpperBound(SolverContractError):
    """The probe at r = q was unsatisfiable, so q < OPT."""


class InvariantViolation(SolverContractError):
    """A debug-mode solver invariant failed."""
