"""
Action of the point transformations x -> f(x), y -> g(x)*y + h(x) on equations.

The action is computed on jets: substitute y = (Y - h)/g, use
dY/dX = (g'*y + g*y' + h')/f', collect powers of Y as jets in x, then
re-express everything in X by composing with the reverted jet of f.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Mapping, Optional, Tuple

from abel_equiv import expr
from abel_equiv.errors import (
    ClassNotPreserved,
    EquationError,
    JetError,
    NonInvertibleAtPoint,
    NotCanonical,
    OrderTooLow,
    UnexpectedKey,
)
from abel_equiv.expr import Expression
from abel_equiv.jet import DEFAULT_ORDER, Jet, compose, revert, rpow
from abel_equiv.model import (
    DEFAULT_TOL_ZERO,
    SINGULAR_TAILS,
    AbelEquation,
    EquationSource,
    Family,
    JetPoint,
    document_of,
    load_equation,
)

LOG = logging.getLogger("transform")

# Newton iteration used to locate the preimage of a transformed sample point
NEWTON_MAX_STEPS = 60
NEWTON_TOL = 1e-14


@dataclass(frozen=True)
class JetTransformation:
    """
    Jets of (f, g, h) at one base point
    """

    f: Jet
    g: Jet
    h: Jet

    def __post_init__(self) -> None:
        if self.f.order == 0:
            raise OrderTooLow("transformation jets need order at least 1")
        if self.f.coeffs[1] == 0.0:
            raise NonInvertibleAtPoint(f"f' vanishes at {self.f.base_point}")
        if self.g.value == 0.0:
            raise NonInvertibleAtPoint(f"g vanishes at {self.g.base_point}")

    @property
    def base_point(self) -> float:
        return self.f.base_point

    @property
    def order(self) -> int:
        return min(self.f.order, self.g.order, self.h.order)


@dataclass(frozen=True)
class PointTransformation:
    f: Expression
    g: Expression
    h: Expression

    @staticmethod
    def create(f: str = "x", g: str = "1", h: str = "0") -> PointTransformation:
        return PointTransformation(expr.parse(f), expr.parse(g), expr.parse(h))

    @staticmethod
    def identity() -> PointTransformation:
        return PointTransformation(expr.X, expr.const(1.0), expr.const(0.0))

    def jets(self, x0: float, order: int) -> JetTransformation:
        try:
            return JetTransformation(
                f=expr.eval_jet(self.f, x0, order),
                g=expr.eval_jet(self.g, x0, order),
                h=expr.eval_jet(self.h, x0, order),
            )
        except NonInvertibleAtPoint:
            LOG.debug("Transformation %s is singular at %s", self.describe(), x0)
            raise

    def describe(self) -> str:
        return (
            f"f={expr.render(self.f)}, g={expr.render(self.g)}, h={expr.render(self.h)}"
        )

    def asdict(self) -> Dict[str, str]:
        return {
            "f": expr.render(self.f),
            "g": expr.render(self.g),
            "h": expr.render(self.h),
        }


def _collect_powers(
    coefficients: Mapping[int, Jet], g: Jet, dg: Jet, h: Jet, dh: Jet, df: Jet
) -> Dict[int, Jet]:
    """
    Coefficients of Y^j of (g'*y + g*P(y) + h')/f' with y = (Y - h)/g,
    where P(y) = sum(coefficients[i] * y^i). Still functions of x.
    """
    top = max(coefficients)
    result: Dict[int, Jet] = {}
    for j in range(top + 1):
        total = Jet.constant(0.0, g.base_point, g.order)
        for i in range(j, top + 1):
            if i in coefficients:
                total = total + (
                    math.comb(i, j) * coefficients[i] * g ** (1 - i) * (-h) ** (i - j)
                )
        if j == 1:
            total = total + dg / g
        if j == 0:
            total = total + dh - dg * h / g
        result[j] = total / df
    return result


def apply_jets(tj: JetTransformation, point: JetPoint) -> JetPoint:
    """
    Image of a jet point under the transformation, at f(x0) and in the new
    independent variable
    """
    family = point.family
    n = point.order
    if tj.order < n + 1:
        raise OrderTooLow(
            f"transformation jets of order {n + 1} needed, got {tj.order}"
        )

    df = tj.f.derivative().truncate(n)
    g, h = tj.g.truncate(n), tj.h.truncate(n)
    dg, dh = tj.g.derivative().truncate(n), tj.h.derivative().truncate(n)
    jets = {k: v.truncate(n) for k, v in point.jets.items()}

    in_x: Dict[str, Jet] = {}
    if family.singular:
        tail = SINGULAR_TAILS[family]
        tail_coefficients = {power: jets[name] for power, name in tail.items()}
        transformed = _collect_powers(tail_coefficients, g, dg, h, dh, df)
        for power, name in tail.items():
            in_x[name] = transformed[power]
        in_x["p"], in_x["q"] = _transform_power_part(family, jets, g, h, df)
    else:
        coefficients = {family.power_of(name): j for name, j in jets.items()}
        transformed = _collect_powers(coefficients, g, dg, h, dh, df)
        for power, value in transformed.items():
            in_x[family.name_of(power)] = value

    if n == 0:
        new_jets = {name: Jet(tj.f.value, in_x[name].coeffs) for name in in_x}
    else:
        inverse = revert(tj.f.truncate(n))
        new_jets = {
            name: compose(in_x[name], inverse) for name in family.coefficient_names
        }
    return JetPoint(family, tj.f.value, new_jets)


def _transform_power_part(
    family: Family, jets: Dict[str, Jet], g: Jet, h: Jet, df: Jet
) -> Tuple[Jet, Jet]:
    """
    (p*y + q)^k * g/f' = (c*p/g * Y + c*(q - p*h/g))^k with c = (g/f')^(1/k)
    """
    k = family.degree
    ratio = g / df
    if k % 2 == 0 and ratio.value <= 0.0:
        raise ClassNotPreserved(
            f"{family.tag} needs g/f' > 0, got {ratio.value} at {g.base_point}"
        )
    c = rpow(ratio, 1, k)
    p, q = jets["p"], jets["q"]
    new_p = c * p / g
    new_q = c * (q - p * h / g)
    if k % 2 == 0 and math.copysign(1.0, new_p.value) != math.copysign(1.0, p.value):
        # even powers leave the overall sign free; keep the sign of p
        new_p, new_q = -new_p, -new_q
    return new_p, new_q


def apply(
    t: PointTransformation,
    eq: EquationSource,
    x0: float,
    order: int = DEFAULT_ORDER,
) -> JetPoint:
    point = eq.jet_point(x0, order)
    return apply_jets(t.jets(x0, order + 1), point)


def compose_transformations(
    t2: PointTransformation, t1: PointTransformation
) -> PointTransformation:
    """
    The transformation that applies t1 first, then t2
    """
    g2_after = expr.substitute(t2.g, t1.f)
    return PointTransformation(
        f=expr.substitute(t2.f, t1.f),
        g=expr.mul(g2_after, t1.g),
        h=expr.add(expr.mul(g2_after, t1.h), expr.substitute(t2.h, t1.f)),
    )


def invert(t: PointTransformation, x0: float, order: int) -> JetTransformation:
    """
    Jets at f(x0) of the inverse transformation
    (f^-1, 1/(g o f^-1), -(h o f^-1)/(g o f^-1))
    """
    tj = t.jets(x0, order)
    f_inverse = revert(tj.f)
    g_back = compose(tj.g, f_inverse)
    h_back = compose(tj.h, f_inverse)
    return JetTransformation(f=f_inverse, g=1.0 / g_back, h=-h_back / g_back)


@dataclass(frozen=True)
class ResidualTransformation:
    """
    X = K^-m * (x + h), Y = K * y; permutes canonical shapes when m = k - 1
    """

    K: float
    h: float
    family_exponent: int

    def __post_init__(self) -> None:
        if self.K == 0.0:
            raise NonInvertibleAtPoint("residual transformation needs K != 0")

    @staticmethod
    def for_family(family: Family, K: float, h: float) -> ResidualTransformation:
        return ResidualTransformation(K=K, h=h, family_exponent=family.degree - 1)

    def to_point_transformation(self) -> PointTransformation:
        return PointTransformation(
            f=expr.mul(
                expr.const(self.K ** (-self.family_exponent)),
                expr.add(expr.X, expr.const(self.h)),
            ),
            g=expr.const(self.K),
            h=expr.const(0.0),
        )


def residual_apply(
    r: ResidualTransformation,
    eq: EquationSource,
    x0: float,
    order: int = DEFAULT_ORDER,
    tol: float = DEFAULT_TOL_ZERO,
) -> JetPoint:
    point = eq.jet_point(x0, order)
    if not point.is_canonical(tol):
        raise NotCanonical(f"{eq.family.tag} equation is not canonical at {x0}")
    return apply_jets(r.to_point_transformation().jets(x0, order + 1), point)


@dataclass(frozen=True)
class TransformedEquation:
    """
    The image of an equation under a point transformation, sampled in the
    new independent variable. Preimages are found by Newton iteration
    started from the anchor.
    """

    transformation: PointTransformation
    equation: AbelEquation
    anchor: float = 0.0

    @property
    def family(self) -> Family:
        return self.equation.family

    def preimage(self, x_new: float) -> float:
        x = self.anchor
        for _ in range(NEWTON_MAX_STEPS):
            try:
                f = expr.eval_jet(self.transformation.f, x, 1)
            except JetError as ex:
                raise NonInvertibleAtPoint(f"cannot evaluate f at {x}: {ex}") from ex
            if f.coeffs[1] == 0.0:
                raise NonInvertibleAtPoint(f"f' vanishes at {x}")
            step = (f.value - x_new) / f.coeffs[1]
            x -= step
            if abs(step) <= NEWTON_TOL * max(1.0, abs(x)):
                return x
        raise NonInvertibleAtPoint(f"no preimage of {x_new} near anchor {self.anchor}")

    def jet_point(self, x0: float, order: int = DEFAULT_ORDER) -> JetPoint:
        image = apply(self.transformation, self.equation, self.preimage(x0), order)
        # Newton leaves the image a rounding error away from x0
        return JetPoint(
            image.family,
            x0,
            {name: Jet(x0, jet.coeffs) for name, jet in image.jets.items()},
        )

    def then(self, t: PointTransformation) -> TransformedEquation:
        return TransformedEquation(
            transformation=compose_transformations(t, self.transformation),
            equation=self.equation,
            anchor=self.anchor,
        )

    def describe(self) -> str:
        return f"{self.equation.describe()} under {self.transformation.describe()}"


def load_source(document: Mapping[str, Any]) -> EquationSource:
    """
    Equation document, optionally with a 'transform' table of f, g, h and an
    anchor point, in which case the transformed equation is returned
    """
    if "transform" not in document:
        return load_equation(document)

    table = document["transform"]
    if not isinstance(table, Mapping):
        raise EquationError("'transform' must be a table")
    for key in table:
        if key not in ("f", "g", "h", "anchor"):
            raise UnexpectedKey(f"transform.{key}")

    t = PointTransformation.create(
        f=str(table.get("f", "x")),
        g=str(table.get("g", "1")),
        h=str(table.get("h", "0")),
    )
    rest = {k: v for k, v in document.items() if k != "transform"}
    return TransformedEquation(
        transformation=t,
        equation=load_equation(rest),
        anchor=float(table.get("anchor", 0.0)),
    )


def document_of_source(
    source: EquationSource,
    then: Optional[PointTransformation] = None,
    anchor: float = 0.0,
) -> Dict[str, Any]:
    """
    Equation document for a source, optionally followed by one more
    transformation
    """
    if isinstance(source, TransformedEquation):
        equation, t, anchor = source.equation, source.transformation, source.anchor
        if then is not None:
            t = compose_transformations(then, t)
    else:
        equation, t = source, then

    document = document_of(equation)
    if t is not None:
        document["transform"] = {**t.asdict(), "anchor": anchor}
    return document
