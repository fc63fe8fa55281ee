from typing import FrozenSet, Iterable, Optional


class AbelEquivError(Exception):
    """
    Base class of every error raised by the library
    """


class ConfigError(AbelEquivError):
    pass


# Jet arithmetic


class JetError(AbelEquivError):
    pass


class BasePointMismatch(JetError):
    pass


class OrderMismatch(JetError):
    pass


class OrderTooLow(JetError):
    pass


class DivisionByZeroConstantTerm(JetError):
    pass


class NonInvertibleJet(JetError):
    pass


class DomainError(JetError):
    pass


class NonFiniteCoefficient(JetError):
    pass


# Expressions


class ExpressionError(AbelEquivError):
    pass


class ExpressionSyntaxError(ExpressionError):
    def __init__(
        self, message: str, offset: int, expected: Iterable[str] = ()
    ) -> None:
        self.offset = offset
        self.expected: FrozenSet[str] = frozenset(expected)
        detail = f"{message} at byte {offset}"
        if self.expected:
            detail += f" (expected one of: {', '.join(sorted(self.expected))})"
        super().__init__(detail)


class NonIntegerExponent(ExpressionSyntaxError):
    pass


class EvalDomainError(ExpressionError):
    def __init__(self, subexpression: str, reason: str) -> None:
        self.subexpression = subexpression
        self.reason = reason
        super().__init__(f"cannot evaluate '{subexpression}': {reason}")


# Equations


class EquationError(AbelEquivError):
    pass


class UnknownFamily(EquationError):
    def __init__(self, tag: Optional[str]) -> None:
        self.tag = tag
        if tag is None:
            super().__init__("equation document has no 'family' key")
        else:
            super().__init__(f"unknown equation family '{tag}'")


class MissingCoefficient(EquationError):
    def __init__(self, name: str) -> None:
        self.name = name
        super().__init__(f"missing coefficient '{name}'")


class UnexpectedKey(EquationError):
    def __init__(self, name: str) -> None:
        self.name = name
        super().__init__(f"unexpected key '{name}'")


class WrongFamily(EquationError):
    pass


class FamilyMismatch(EquationError):
    pass


# Transformations


class TransformError(AbelEquivError):
    pass


class NonInvertibleAtPoint(TransformError):
    pass


class NotCanonical(TransformError):
    pass


class ClassNotPreserved(TransformError):
    pass


# Invariants


class InvariantError(AbelEquivError):
    pass


class UnknownInvariant(InvariantError):
    pass


class TresseDenominatorVanishes(InvariantError):
    pass


class FitFailed(InvariantError):
    pass
