from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Sequence, Union

import numpy as np

from abel_equiv.errors import (
    BasePointMismatch,
    DivisionByZeroConstantTerm,
    DomainError,
    NonFiniteCoefficient,
    NonInvertibleJet,
    OrderMismatch,
    OrderTooLow,
)

LOG = logging.getLogger("jet")

DEFAULT_ORDER = 8

Scalar = Union[int, float]


@dataclass(frozen=True, eq=False)
class Jet:
    """
    Truncated Taylor expansion sum(c_i * (x - base_point)^i) of a scalar function.

    Coefficients are Taylor coefficients, so the i-th derivative at the base
    point is i! * coeffs[i]. Python operators between jets truncate to the
    lower order; the strict variant is arith().
    """

    base_point: float
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        coeffs = np.array(self.coeffs, dtype=float, copy=True).reshape(-1)
        if coeffs.size == 0:
            raise ValueError("a jet needs at least one coefficient")
        if not np.all(np.isfinite(coeffs)):
            raise NonFiniteCoefficient(f"non-finite jet coefficients {coeffs.tolist()}")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "base_point", float(self.base_point))

    @staticmethod
    def constant(value: float, base_point: float, order: int = DEFAULT_ORDER) -> Jet:
        coeffs = np.zeros(order + 1)
        coeffs[0] = value
        return Jet(base_point, coeffs)

    @staticmethod
    def identity(base_point: float, order: int = DEFAULT_ORDER) -> Jet:
        coeffs = np.zeros(order + 1)
        coeffs[0] = base_point
        if order >= 1:
            coeffs[1] = 1.0
        return Jet(base_point, coeffs)

    @property
    def order(self) -> int:
        return self.coeffs.size - 1

    @property
    def value(self) -> float:
        return float(self.coeffs[0])

    def derivatives(self) -> np.ndarray:
        factorials = np.array([math.factorial(i) for i in range(self.order + 1)])
        return self.coeffs * factorials

    def derivative(self) -> Jet:
        if self.order == 0:
            raise OrderTooLow("cannot differentiate an order-0 jet")
        return Jet(self.base_point, self.coeffs[1:] * np.arange(1, self.order + 1))

    def truncate(self, order: int) -> Jet:
        if order > self.order:
            raise OrderTooLow(f"cannot raise jet order {self.order} to {order}")
        if order == self.order:
            return self
        return Jet(self.base_point, self.coeffs[: order + 1])

    def evaluate(self, dx: float) -> float:
        return float(np.polynomial.polynomial.polyval(dx, self.coeffs))

    def _coerce(self, other: Union[Jet, Scalar]) -> Jet:
        if isinstance(other, Jet):
            if not same_point(self.base_point, other.base_point):
                raise BasePointMismatch(
                    f"jets at {self.base_point!r} and {other.base_point!r}"
                )
            return other
        return Jet.constant(float(other), self.base_point, self.order)

    def __add__(self, other: Union[Jet, Scalar]) -> Jet:
        other = self._coerce(other)
        n = min(self.order, other.order)
        return Jet(self.base_point, self.coeffs[: n + 1] + other.coeffs[: n + 1])

    def __radd__(self, other: Scalar) -> Jet:
        return self + other

    def __neg__(self) -> Jet:
        return Jet(self.base_point, -self.coeffs)

    def __sub__(self, other: Union[Jet, Scalar]) -> Jet:
        other = self._coerce(other)
        n = min(self.order, other.order)
        return Jet(self.base_point, self.coeffs[: n + 1] - other.coeffs[: n + 1])

    def __rsub__(self, other: Scalar) -> Jet:
        return -self + other

    def __mul__(self, other: Union[Jet, Scalar]) -> Jet:
        if not isinstance(other, Jet):
            return Jet(self.base_point, float(other) * self.coeffs)
        other = self._coerce(other)
        n = min(self.order, other.order)
        return Jet(self.base_point, np.convolve(self.coeffs, other.coeffs)[: n + 1])

    def __rmul__(self, other: Scalar) -> Jet:
        return self * other

    def __truediv__(self, other: Union[Jet, Scalar]) -> Jet:
        if not isinstance(other, Jet):
            if other == 0:
                raise DivisionByZeroConstantTerm("division by a zero scalar")
            return Jet(self.base_point, self.coeffs / float(other))
        other = self._coerce(other)
        if other.coeffs[0] == 0.0:
            raise DivisionByZeroConstantTerm("denominator jet has zero constant term")
        n = min(self.order, other.order)
        quotient = np.zeros(n + 1)
        for k in range(n + 1):
            total = self.coeffs[k] - np.dot(quotient[:k], other.coeffs[k:0:-1])
            quotient[k] = total / other.coeffs[0]
        return Jet(self.base_point, quotient)

    def __rtruediv__(self, other: Scalar) -> Jet:
        return Jet.constant(float(other), self.base_point, self.order) / self

    def __pow__(self, exponent: int) -> Jet:
        if not isinstance(exponent, (int, np.integer)):
            raise TypeError("use rpow() for non-integer powers")
        if exponent < 0:
            return 1.0 / (self ** (-exponent))
        result = Jet.constant(1.0, self.base_point, self.order)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def __repr__(self) -> str:
        return f"Jet(base_point={self.base_point!r}, coeffs={self.coeffs.tolist()!r})"


def same_point(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-12)


def arith(op: str, a: Jet, b: Jet) -> Jet:
    if not same_point(a.base_point, b.base_point):
        raise BasePointMismatch(f"jets at {a.base_point!r} and {b.base_point!r}")
    if a.order != b.order:
        raise OrderMismatch(f"jets of order {a.order} and {b.order}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown jet operation '{op}'")


def compose(outer: Jet, inner: Jet) -> Jet:
    """
    Taylor coefficients of outer(inner(x)) at inner.base_point.
    outer must be expanded at the value of inner.
    """
    if not same_point(outer.base_point, inner.value):
        raise BasePointMismatch(
            f"outer jet at {outer.base_point!r}, inner value {inner.value!r}"
        )
    if outer.order != inner.order:
        raise OrderMismatch(f"jets of order {outer.order} and {inner.order}")

    shift = inner - inner.value
    result = Jet.constant(outer.coeffs[-1], inner.base_point, inner.order)
    for c in outer.coeffs[-2::-1]:
        result = result * shift + c
    return result


def revert(j: Jet) -> Jet:
    """
    Series reversion: the jet k at j.value with compose(k, j) equal to the
    identity jet at j.base_point.
    """
    if j.order == 0:
        raise OrderTooLow("cannot revert an order-0 jet")
    slope = j.coeffs[1]
    if slope == 0.0:
        raise NonInvertibleJet("linear coefficient vanishes")

    n = j.order
    shift = np.array(j.coeffs, copy=True)
    shift[0] = 0.0

    # powers[m] holds the coefficients of (j - j.value)^m
    powers = [np.zeros(n + 1), shift]
    for _ in range(2, n + 1):
        powers.append(np.convolve(powers[-1], shift)[: n + 1])

    result = np.zeros(n + 1)
    result[0] = j.base_point
    for k in range(1, n + 1):
        total = 1.0 if k == 1 else 0.0
        for m in range(1, k):
            total -= result[m] * powers[m][k]
        result[k] = total / slope**k
    return Jet(j.value, result)


def power_jet(base: float, alpha: float, order: int) -> Jet:
    """
    Jet of u -> u^alpha at a positive base value
    """
    if base <= 0.0:
        raise DomainError(f"real power {alpha} needs a positive base, got {base}")
    coeffs = np.zeros(order + 1)
    binomial = 1.0
    for i in range(order + 1):
        coeffs[i] = binomial * base ** (alpha - i)
        binomial *= (alpha - i) / (i + 1)
    return Jet(base, coeffs)


def absolute(j: Jet) -> Jet:
    if j.value == 0.0:
        raise DomainError("absolute value of a jet with zero constant term")
    return j if j.value > 0.0 else -j


def rpow(j: Jet, m: int, n: int) -> Jet:
    """
    Real-branch power j^(m/n).

    For odd n the result is sign(u)^m * |u|^(m/n); for even n the constant
    term must be positive and the positive branch is taken. m/n is reduced
    to lowest terms first.
    """
    if n <= 0:
        raise DomainError(f"root index must be positive, got {n}")
    exponent = Fraction(m, n)
    m, n = exponent.numerator, exponent.denominator

    if j.value == 0.0:
        raise DomainError(f"power {m}/{n} of a jet with zero constant term")
    if n == 1:
        return j**m
    if n % 2 == 0 and j.value < 0.0:
        raise DomainError(f"even root of negative value {j.value}")

    magnitude = absolute(j)
    result = compose(power_jet(magnitude.value, m / n, j.order), magnitude)
    if j.value < 0.0 and m % 2 == 1:
        return -result
    return result


def _cyclic_jet(base: float, derivatives: Sequence[float], order: int) -> Jet:
    coeffs = [
        derivatives[i % len(derivatives)] / math.factorial(i) for i in range(order + 1)
    ]
    return Jet(base, coeffs)


def exp_jet(base: float, order: int) -> Jet:
    value = math.exp(base)
    return _cyclic_jet(base, [value], order)


def log_jet(base: float, order: int) -> Jet:
    if base <= 0.0:
        raise DomainError(f"log of non-positive value {base}")
    coeffs = [math.log(base)]
    coeffs += [(-1.0) ** (i + 1) / (i * base**i) for i in range(1, order + 1)]
    return Jet(base, coeffs)


def sin_jet(base: float, order: int) -> Jet:
    s, c = math.sin(base), math.cos(base)
    return _cyclic_jet(base, [s, c, -s, -c], order)


def cos_jet(base: float, order: int) -> Jet:
    s, c = math.sin(base), math.cos(base)
    return _cyclic_jet(base, [c, -s, -c, s], order)


def sinh_jet(base: float, order: int) -> Jet:
    return _cyclic_jet(base, [math.sinh(base), math.cosh(base)], order)


def cosh_jet(base: float, order: int) -> Jet:
    return _cyclic_jet(base, [math.cosh(base), math.sinh(base)], order)


def _outer(factory: Callable[[float, int], Jet]) -> Callable[[Jet], Jet]:
    def apply(j: Jet) -> Jet:
        return compose(factory(j.value, j.order), j)

    return apply


def _tan(j: Jet) -> Jet:
    return _outer(sin_jet)(j) / _outer(cos_jet)(j)


def _tanh(j: Jet) -> Jet:
    return _outer(sinh_jet)(j) / _outer(cosh_jet)(j)


def _sqrt(j: Jet) -> Jet:
    if j.value <= 0.0:
        raise DomainError(f"square root of non-positive value {j.value}")
    return rpow(j, 1, 2)


ELEMENTARY: Dict[str, Callable[[Jet], Jet]] = {
    "sin": _outer(sin_jet),
    "cos": _outer(cos_jet),
    "tan": _tan,
    "exp": _outer(exp_jet),
    "log": _outer(log_jet),
    "sqrt": _sqrt,
    "sinh": _outer(sinh_jet),
    "cosh": _outer(cosh_jet),
    "tanh": _tanh,
    "abs": absolute,
}
