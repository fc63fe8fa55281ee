"""
Infinitesimal generators xi(x) d/dx + (eta(x) y + zeta(x)) d/dy of the
pseudogroup, their action on the coefficient bundle and its prolongation.

Vector fields are evaluated along the section given by a jet point, so every
component is itself a jet in x and total derivatives are coefficient shifts.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from abel_equiv import expr, invariants, transform
from abel_equiv.errors import FamilyMismatch, InvariantError, JetError, OrderTooLow
from abel_equiv.expr import Expression
from abel_equiv.generators import random_polynomial
from abel_equiv.invariants import Kind
from abel_equiv.jet import Jet, compose
from abel_equiv.model import (
    DEFAULT_TOL_ZERO,
    SINGULAR_TAILS,
    EquationSource,
    Family,
    JetPoint,
)

LOG = logging.getLogger("lie")

# Relative step of the central differences in jet coordinates
GRADIENT_STEP = 1e-6
# Flow parameter used to differentiate the finite action
FLOW_STEP = 1e-5

Coordinate = Tuple[str, int]


@dataclass(frozen=True)
class InfinitesimalGenerator:
    xi: Expression
    eta: Expression
    zeta: Expression
    family: Family

    @staticmethod
    def create(
        family: Family, xi: str = "0", eta: str = "0", zeta: str = "0"
    ) -> InfinitesimalGenerator:
        return InfinitesimalGenerator(
            expr.parse(xi), expr.parse(eta), expr.parse(zeta), family
        )

    def flow(self, t: float) -> transform.PointTransformation:
        """
        First-order flow x -> x + t*xi, y -> (1 + t*eta) y + t*zeta
        """
        scale = expr.const(t)
        return transform.PointTransformation(
            f=expr.add(expr.X, expr.mul(scale, self.xi)),
            g=expr.add(expr.const(1.0), expr.mul(scale, self.eta)),
            h=expr.mul(scale, self.zeta),
        )

    def describe(self) -> str:
        return (
            f"xi={expr.render(self.xi)}, eta={expr.render(self.eta)}, "
            f"zeta={expr.render(self.zeta)}"
        )


@dataclass(frozen=True)
class _Fields:
    """
    xi, eta, zeta and their first derivatives as jets of the point's order
    """

    xi: Jet
    eta: Jet
    zeta: Jet
    dxi: Jet
    deta: Jet
    dzeta: Jet

    @staticmethod
    def at(gen: InfinitesimalGenerator, x0: float, order: int) -> _Fields:
        xi = expr.eval_jet(gen.xi, x0, order + 1)
        eta = expr.eval_jet(gen.eta, x0, order + 1)
        zeta = expr.eval_jet(gen.zeta, x0, order + 1)
        return _Fields(
            xi.truncate(order),
            eta.truncate(order),
            zeta.truncate(order),
            xi.derivative(),
            eta.derivative(),
            zeta.derivative(),
        )


Components = Dict[str, Jet]


def _cubic(v: _Fields, u: JetPoint) -> Components:
    a, b, c, d = u["a"], u["b"], u["c"], u["d"]
    return {
        "a": -(2.0 * v.eta + v.dxi) * a,
        "b": -(v.eta + v.dxi) * b - 3.0 * v.zeta * a,
        "c": v.deta - v.dxi * c - 2.0 * v.zeta * b,
        "d": v.dzeta + (v.eta - v.dxi) * d - v.zeta * c,
    }


def _quartic(v: _Fields, u: JetPoint) -> Components:
    a, b, c, d, e = u["a"], u["b"], u["c"], u["d"], u["e"]
    return {
        "a": -(3.0 * v.eta + v.dxi) * a,
        "b": -(2.0 * v.eta + v.dxi) * b - 4.0 * v.zeta * a,
        "c": -(v.eta + v.dxi) * c - 3.0 * v.zeta * b,
        "d": v.deta - v.dxi * d - 2.0 * v.zeta * c,
        "e": v.dzeta + (v.eta - v.dxi) * e - v.zeta * d,
    }


def _singular_quartic(v: _Fields, u: JetPoint) -> Components:
    p, q, r, s = u["p"], u["q"], u["r"], u["s"]
    return {
        "p": -(3.0 * v.eta + v.dxi) * p / 4.0,
        "q": (v.eta - v.dxi) * q / 4.0 - v.zeta * p,
        "r": v.deta - v.dxi * r,
        "s": v.dzeta + (v.eta - v.dxi) * s - v.zeta * r,
    }


# Fiber components written out per family
PRINTED: Dict[Family, Callable[[_Fields, JetPoint], Components]] = {
    Family.K3: _cubic,
    Family.K4: _quartic,
    Family.K4S: _singular_quartic,
}


def _polynomial_part(
    v: _Fields, coefficients: Dict[int, Jet], names: Dict[int, str]
) -> Components:
    result: Components = {}
    for j, name in names.items():
        value = -v.dxi * coefficients[j] + (1 - j) * v.eta * coefficients[j]
        if j + 1 in coefficients:
            value = value - (j + 1) * v.zeta * coefficients[j + 1]
        if j == 1:
            value = value + v.deta
        if j == 0:
            value = value + v.dzeta
        result[name] = value
    return result


def closed_form_components(gen: InfinitesimalGenerator, point: JetPoint) -> Components:
    """
    Fiber components from the general rule for the coefficient of y^j:
    -xi' a_j + (1 - j) eta a_j - (j + 1) zeta a_(j+1), plus eta' for j = 1
    and zeta' for j = 0
    """
    _check_family(gen, point)
    family = point.family
    v = _Fields.at(gen, point.base_point, point.order)

    if not family.singular:
        names = {family.power_of(n): n for n in family.coefficient_names}
        return _polynomial_part(v, {j: point[n] for j, n in names.items()}, names)

    k = family.degree
    tail = SINGULAR_TAILS[family]
    result = _polynomial_part(v, {j: point[n] for j, n in tail.items()}, tail)
    p, q = point["p"], point["q"]
    result["p"] = -((k - 1) * v.eta + v.dxi) * p / float(k)
    result["q"] = (v.eta - v.dxi) * q / float(k) - v.zeta * p
    return result


def induced_components(
    gen: InfinitesimalGenerator, point: JetPoint, t: float = FLOW_STEP
) -> Components:
    """
    Fiber components obtained by differentiating the finite action along the
    flow of the generator, as jets in the original variable
    """
    _check_family(gen, point)
    n = point.order

    def pulled_back(step: float) -> Components:
        tj = gen.flow(step).jets(point.base_point, n + 1)
        image = transform.apply_jets(tj, point)
        f = tj.f.truncate(n)
        return {name: compose(jet, f) for name, jet in image.jets.items()}

    forward, backward = pulled_back(t), pulled_back(-t)
    return {
        name: (forward[name] - backward[name]) / (2.0 * t)
        for name in point.family.coefficient_names
    }


def base_components(gen: InfinitesimalGenerator, point: JetPoint) -> Components:
    """
    Order-0 components of the field on the fiber coordinates: written out for
    the cubic and quartic families, induced from the finite action otherwise
    """
    _check_family(gen, point)
    printed = PRINTED.get(point.family)
    if printed is None:
        return induced_components(gen, point)
    return printed(_Fields.at(gen, point.base_point, point.order), point)


def _check_family(gen: InfinitesimalGenerator, point: JetPoint) -> None:
    if gen.family is not point.family:
        raise FamilyMismatch(
            f"generator for {gen.family.tag}, jet point of {point.family.tag}"
        )


def prolong_coefficients(
    gen: InfinitesimalGenerator, k: int, point: JetPoint
) -> Dict[Coordinate, float]:
    """
    Components of the k-th prolongation on every coordinate u^(i), i <= k,
    from phi^(i+1) = D phi^(i) - u^(i+1) D xi
    """
    if point.order < k:
        raise OrderTooLow(f"prolongation to order {k} needs jets of order {k}")

    components = base_components(gen, point)
    dxi = expr.eval_jet(gen.xi, point.base_point, point.order + 1).derivative()

    result: Dict[Coordinate, float] = {}
    for name in point.family.coefficient_names:
        phi = components[name]
        u = point[name]
        result[(name, 0)] = phi.value
        for i in range(k):
            u = u.derivative()
            phi = phi.derivative() - u * dxi
            result[(name, i + 1)] = phi.value
    return result


@dataclass(frozen=True)
class InfinitesimalDefect:
    name: str
    raw: float
    normalized: float
    defined: bool


def _value_function(
    family: Family, name: str, k: int, tol: float
) -> Callable[[JetPoint], float]:
    if invariants.spec_of(family, name).kind is Kind.RELATIVE:
        if k:
            raise InvariantError(
                f"{name} is relative; invariant derivatives need an absolute one"
            )
        return lambda point: invariants.invariant_jet(point, name, tol).value
    return lambda point: invariants.nabla_jet(point, name, k, tol).value


def gradient(
    family: Family,
    name: str,
    point: JetPoint,
    nabla_order: int = 0,
    tol: float = DEFAULT_TOL_ZERO,
) -> Dict[Coordinate, float]:
    """
    Partial derivatives of an invariant in the jet coordinates, by central
    differences
    """
    order = invariants.required_order(family, name, nabla_order)
    value_of = _value_function(family, name, nabla_order, tol)
    coordinates = point.coordinates(order)

    result: Dict[Coordinate, float] = {}
    for coordinate, u in coordinates.items():
        step = GRADIENT_STEP * max(1.0, abs(u))
        shifted = dict(coordinates)
        shifted[coordinate] = u + step
        upper = value_of(JetPoint.from_coordinates(family, point.base_point, shifted))
        shifted[coordinate] = u - step
        lower = value_of(JetPoint.from_coordinates(family, point.base_point, shifted))
        result[coordinate] = (upper - lower) / (2.0 * step)
    return result


def infinitesimal_defect(
    gen: InfinitesimalGenerator,
    name: str,
    point: JetPoint,
    nabla_order: int = 0,
    tol: float = DEFAULT_TOL_ZERO,
) -> InfinitesimalDefect:
    """
    Derivative of an invariant along the prolonged generator. Vanishes for
    absolute invariants; for a relative one it is the invariant times
    (weight_g * eta + weight_f * xi') at the point.

    normalized divides by the norms of the gradient and of the prolonged
    components.
    """
    _check_family(gen, point)
    label = invariants.component_name(name, nabla_order)
    order = invariants.required_order(point.family, name, nabla_order)
    if point.order < order:
        raise OrderTooLow(f"{label} needs jets of order {order}")
    point = point.truncate(order)

    try:
        grad = gradient(point.family, name, point, nabla_order, tol)
    except (InvariantError, JetError) as ex:
        LOG.debug("Defect of %s undefined at %s: %s", label, point.base_point, ex)
        return InfinitesimalDefect(label, math.nan, math.nan, False)

    phi = prolong_coefficients(gen, order, point)
    keys = sorted(grad)
    g = np.array([grad[c] for c in keys])
    v = np.array([phi[c] for c in keys])
    raw = float(g @ v)
    scale = float(np.linalg.norm(g) * np.linalg.norm(v))
    normalized = abs(raw) / scale if scale > 0.0 else 0.0
    return InfinitesimalDefect(label, raw, normalized, True)


def _basis(x0: float, i: int) -> Expression:
    shift = expr.sub(expr.X, expr.const(x0))
    return expr.div(expr.power(shift, i), expr.const(math.factorial(i)))


def generator_decomposition(
    family: Family, k: int, point: JetPoint
) -> Dict[str, Dict[Coordinate, float]]:
    """
    The prolonged fields of the basis generators xi, eta or zeta equal to
    (x - x0)^i / i!, for i <= k + 1. Keys are Xi_i, H_i and Z_i; every
    prolonged generator is a combination of these with the (k+1)-jets of
    xi, eta and zeta as weights.
    """
    zero = expr.const(0.0)
    fields: Dict[str, Dict[Coordinate, float]] = {}
    for i in range(k + 2):
        basis = _basis(point.base_point, i)
        for label, gen in (
            ("Xi", InfinitesimalGenerator(basis, zero, zero, family)),
            ("H", InfinitesimalGenerator(zero, basis, zero, family)),
            ("Z", InfinitesimalGenerator(zero, zero, basis, family)),
        ):
            fields[f"{label}_{i}"] = prolong_coefficients(gen, k, point)
    return fields


def flow_derivative(
    name: str,
    eq: EquationSource,
    x0: float,
    gen: InfinitesimalGenerator,
    t: float = 1e-4,
    nabla_order: int = 0,
    tol: float = DEFAULT_TOL_ZERO,
) -> float:
    """
    d/dt at t = 0 of the invariant of the transformed equation at the moved
    point, by central differences. Zero for absolute invariants.
    """
    order = invariants.required_order(eq.family, name, nabla_order)
    value_of = _value_function(eq.family, name, nabla_order, tol)
    values = [
        value_of(transform.apply(gen.flow(step), eq, x0, order)) for step in (t, -t)
    ]
    return (values[0] - values[1]) / (2.0 * t)


def finite_action_defect(
    name: str,
    eq: EquationSource,
    x0: float,
    gen: InfinitesimalGenerator,
    t: float = 1e-4,
    nabla_order: int = 0,
    tol: float = DEFAULT_TOL_ZERO,
) -> float:
    """
    flow_derivative scaled by the size of the invariant
    """
    order = invariants.required_order(eq.family, name, nabla_order)
    value = _value_function(eq.family, name, nabla_order, tol)(eq.jet_point(x0, order))
    return abs(flow_derivative(name, eq, x0, gen, t, nabla_order, tol)) / (
        1.0 + abs(value)
    )


def random_generator(
    family: Family, rng: np.random.Generator, degree: int = 3
) -> InfinitesimalGenerator:
    return InfinitesimalGenerator(
        random_polynomial(rng, degree),
        random_polynomial(rng, degree),
        random_polynomial(rng, degree),
        family,
    )


def components_agree(
    gen: InfinitesimalGenerator, point: JetPoint, method: Optional[str] = None
) -> float:
    """
    Largest relative gap between the closed-form fiber components and the
    written-out (or induced) ones
    """
    expected = closed_form_components(gen, point)
    actual = (
        induced_components(gen, point)
        if method == "induced"
        else base_components(gen, point)
    )
    worst = 0.0
    for name in point.family.coefficient_names:
        a, b = expected[name].coeffs, actual[name].truncate(expected[name].order).coeffs
        gap = np.max(np.abs(a - b)) / (1.0 + np.max(np.abs(a)))
        worst = max(worst, float(gap))
    return worst
