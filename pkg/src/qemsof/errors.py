"""Exception types raised across the package."""

from __future__ import annotations


class QEMError(Exception):
    """Base class for all package errors."""


class DimensionError(QEMError, ValueError):
    """Operands act on incompatible numbers of qubits or have malformed shapes."""


class InvalidChannelError(QEMError, ValueError):
    """A channel description does not define a valid (CPTP / CPTnI) map."""


class SingularChannel(QEMError, ArithmeticError):
    """The channel has no inverse, so no quasi-probability representation exists."""


class IllConditioned(QEMError, ArithmeticError):
    """The channel or basis is too close to singular for a trustworthy solve."""


class PlanMismatch(QEMError, ValueError):
    """A circuit's mitigation slots do not line up with the supplied sampling plans."""
