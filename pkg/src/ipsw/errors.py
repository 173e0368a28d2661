"""Exception types raised across the package."""

from __future__ import annotations


class IpswError(ValueError):
    """Base class for all package errors."""


class ProbabilityNotNormalized(IpswError):
    pass


class SupportViolation(IpswError):
    pass


class PiOutOfRange(IpswError):
    pass


class NegativeVariance(IpswError):
    pass


class InvalidStratumId(IpswError):
    pass


class ParameterOutOfRange(IpswError):
    pass


class VariantParameterMismatch(IpswError):
    pass


class NotNonShifted(IpswError):
    pass


class TauShiftNotCentered(IpswError):
    pass


class ParseError(IpswError):
    pass


class ValidationError(IpswError):
    """Aggregate of every violation found while validating a spec."""

    def __init__(self, violations: list[IpswError]):
        self.violations = list(violations)
        super().__init__("; ".join(f"{type(v).__name__}: {v}" for v in self.violations))
