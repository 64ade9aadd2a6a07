"""Exception types raised across the package."""


class RcnwaveError(Exception):
    """Base class for all library errors."""


class OutOfDomain(RcnwaveError, ValueError):
    pass


class NonIntegrableAtEndpoint(RcnwaveError, ArithmeticError):
    pass


class OutOfRange(RcnwaveError, ValueError):
    pass


class ZeroW(RcnwaveError, ArithmeticError):
    pass


class InfeasibleCertificate(RcnwaveError, ValueError):
    pass


class ProfileViolatesZeroAtOrigin(RcnwaveError, ValueError):
    pass


class SupportOutsideWindow(RcnwaveError, ValueError):
    pass


class CoverageGap(RcnwaveError, ValueError):
    pass


class DegenerateCell(RcnwaveError, ValueError):
    pass


class BlowUp(RcnwaveError, ArithmeticError):
    pass


class NonFiniteValue(RcnwaveError, ArithmeticError):
    pass


class IndefiniteForm(RcnwaveError, ArithmeticError):
    pass


class OnHorizon(RcnwaveError, ValueError):
    pass


class OutOfBranch(RcnwaveError, ValueError):
    pass


class WrongCase(RcnwaveError, ValueError):
    pass


class EqualLevels(RcnwaveError, ValueError):
    pass


class ScenarioError(RcnwaveError, ValueError):
    """Malformed scenario file or command line."""
