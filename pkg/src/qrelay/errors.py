"""Exception hierarchy shared by every module."""


class QRelayError(Exception):
    """Base class for all errors raised by qrelay."""


class LabelError(QRelayError, ValueError):
    """Unknown, duplicate or overlapping subsystem labels."""


class ShapeError(QRelayError, ValueError):
    """Dimension mismatch between operands."""


class NumericDomainError(QRelayError, ValueError):
    """Input outside the numeric domain of an operation (e.g. non-Hermitian)."""


class ParameterError(QRelayError, ValueError):
    """Channel or configuration parameter out of range."""


class DegenerateParameterError(ParameterError):
    """Parameter vector that does not determine a state (all zeros)."""
