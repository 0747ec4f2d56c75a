"""Exception hierarchy. Every structured failure raises a JetsymError subclass."""

from __future__ import annotations


class JetsymError(Exception):
    """Base class for all errors raised by this package."""


class DslSyntaxError(JetsymError):
    """Malformed DSL input. Carries the 0-based offset of the offending span."""

    def __init__(self, message: str, text: str = "", pos: int = 0):
        self.pos = pos
        self.text = text
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        self.line = line
        self.col = col
        super().__init__(f"{message} (at line {line}, column {col})")


class UndeclaredSymbolError(JetsymError):
    pass


class DuplicateNameError(JetsymError):
    pass


class OrderOverflowError(JetsymError):
    pass


class OrderMismatchError(JetsymError):
    pass


class MetricUndeclaredError(JetsymError):
    pass


class CyclicRulesError(JetsymError):
    pass


class DomainRestrictionError(JetsymError):
    """A substitution or evaluation ran into a vanishing denominator."""


class NonQuasiLinearError(JetsymError):
    """An equation could not be solved rationally for a leading jet coordinate."""


class InconsistentManifoldError(JetsymError):
    pass


class NotReducibleError(JetsymError):
    """Ansatz reduction failed; carries the failing ReductionResult."""

    def __init__(self, message: str, result=None):
        self.result = result
        super().__init__(message)


class SingularSectionError(JetsymError):
    pass


class ProjectionError(JetsymError):
    pass


class NonInvertibleTransformError(JetsymError):
    pass


class UnknownCatalogEntryError(JetsymError):
    pass


class UnboundSymbolError(JetsymError):
    pass


class EvalDomainError(JetsymError):
    pass


class IntegrationError(JetsymError):
    pass


class SamplingError(JetsymError):
    pass


class SessionError(JetsymError):
    pass
