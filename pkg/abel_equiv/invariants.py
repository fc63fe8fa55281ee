"""
Catalog of relative and absolute differential invariants for every family.

Every formula is written once, as a function of a lazily evaluated context
that resolves coefficient names to coefficient jets and invariant names to
invariant jets. Because all ingredients are jets in x, the total derivative
D/Dx is a coefficient shift and the invariant derivation is A * D/Dx.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Tuple

import numpy as np

from abel_equiv import generators, transform
from abel_equiv.errors import (
    AbelEquivError,
    FitFailed,
    InvariantError,
    JetError,
    OrderTooLow,
    TresseDenominatorVanishes,
    UnknownInvariant,
)
from abel_equiv.jet import Jet, absolute, rpow
from abel_equiv.model import (
    DEFAULT_TOL_ZERO,
    EquationSource,
    Family,
    JetPoint,
    expand_point,
)

LOG = logging.getLogger("invariants")


class Kind(Enum):
    RELATIVE = "relative"
    ABSOLUTE = "absolute"
    # Evaluated for reports only, never part of a signature
    AUXILIARY = "auxiliary"


class _Context:
    """
    Resolves coefficient and invariant names at one jet point, with caching
    """

    def __init__(self, point: JetPoint) -> None:
        self.point = point
        self._cache: Dict[str, Jet] = {}

    def __getitem__(self, name: str) -> Jet:
        if name in self.point.jets:
            return self.point.jets[name]
        if name not in self._cache:
            self._cache[name] = spec_of(self.point.family, name).formula(self)
        return self._cache[name]


Formula = Callable[[_Context], Jet]


@dataclass(frozen=True)
class InvariantSpec:
    name: str
    family: Family
    kind: Kind
    order: int
    degree: int
    formula: Formula
    denominators: Tuple[str, ...] = ()


@dataclass(frozen=True)
class InvariantValue:
    name: str
    order: int
    value: float
    defined: bool


@dataclass(frozen=True)
class DerivationCoefficient:
    family: Family
    value: float
    defined: bool


@dataclass(frozen=True)
class WeightFit:
    name: str
    g_exponent: Fraction
    f_exponent: Fraction
    residual: float
    trials: int


def d(j: Jet) -> Jet:
    return j.derivative()


# Cubic family


def _s3(c: _Context) -> Jet:
    a, b, cc, dd = c["a"], c["b"], c["c"], c["d"]
    return d(a) * b - d(b) * a + a * b * cc - (2.0 / 9.0) * b**3 - 3.0 * a**2 * dd


def _chain_step(c: _Context, previous: Jet, n: int) -> Jet:
    a, b, cc = c["a"], c["b"], c["c"]
    return a * d(previous) - (2 * n - 1) * previous * (d(a) + a * cc - b**2 / 3.0)


def cubic_chain(jets: Mapping[str, Jet], n: int) -> Jet:
    """
    s_(2n+1) of the cubic chain; n = 1 gives s3
    """
    if n < 1:
        raise ValueError(f"chain index must be at least 1, got {n}")
    point = _point_of(Family.K3, jets)
    if point.order < n:
        raise OrderTooLow(f"s{2 * n + 1} needs jets of order {n}, got {point.order}")
    context = _Context(point)
    value = _s3(context)
    for step in range(2, n + 1):
        value = _chain_step(context, value, step)
    return value


# Quartic family


def _i1(c: _Context) -> Jet:
    return 8.0 * c["a"] * c["c"] - 3.0 * c["b"] ** 2


def _i2(c: _Context) -> Jet:
    a, b, cc, dd, e = c["a"], c["b"], c["c"], c["d"], c["e"]
    return (
        3.0 * (a * d(b) - d(a) * b)
        + a * cc**2
        - 3.0 * a * b * dd
        + 12.0 * a**2 * e
    )


def _i3(c: _Context) -> Jet:
    a, b, cc, dd = c["a"], c["b"], c["c"], c["d"]
    return (
        8.0 * a * d(a) * (4.0 * a * cc - 3.0 * b**2)
        + 24.0 * a**2 * b * d(b)
        - 32.0 * a**3 * d(cc)
        - 3.0 * b**5
        + 64.0 * a**3 * cc * dd
        - 24.0 * a**2 * b**2 * dd
        - 32.0 * a**2 * b * cc**2
        + 20.0 * a * b**3 * cc
    )


# Singular quartic family (p*y + q)^4 + r*y + s


def _quartic_l1(c: _Context) -> Jet:
    p, q, r, s = c["p"], c["q"], c["r"], c["s"]
    return d(q) * p - d(p) * q + p**2 * s - p * q * r


def _quartic_l2(c: _Context) -> Jet:
    p, q, r, s = c["p"], c["q"], c["r"], c["s"]
    dp, dq = d(p), d(q)
    return (
        p * (p * d(dq) - q * d(dp))
        + 6.0 * dp * (dp * q - p * dq)
        + dp * p * (9.0 * q * r - 4.0 * p * s)
        - 5.0 * r * p**2 * dq
        - p**2 * q * d(r)
        + p**3 * d(s)
        + 4.0 * p**2 * r * (q * r - p * s)
    )


# Quintic family


def _k1(c: _Context) -> Jet:
    return 5.0 * c["a"] * c["c"] - 2.0 * c["b"] ** 2


def _k2(c: _Context) -> Jet:
    a, b, cc, dd = c["a"], c["b"], c["c"], c["d"]
    return 4.0 * b**3 - 15.0 * a * b * cc + 25.0 * a**2 * dd


def _k3(c: _Context) -> Jet:
    a, b, cc, dd, e, f = c["a"], c["b"], c["c"], c["d"], c["e"], c["f"]
    return (
        50.0 * a * d(b)
        - 50.0 * b * d(a)
        + 8.0 * b**2 * dd
        + 5.0 * a * cc * dd
        - 50.0 * a * b * e
        - 3.0 * b * cc**2
        + 250.0 * a**2 * f
    )


def _k4(c: _Context) -> Jet:
    a, b, cc, dd, e, f = c["a"], c["b"], c["c"], c["d"], c["e"], c["f"]
    return (
        2500.0 * a**2 * dd * d(a)
        + 1500.0 * a**2 * b * d(cc)
        - 2500.0 * a**3 * d(dd)
        - 1500.0 * a**2 * cc * d(b)
        + 825.0 * a**2 * cc**2 * dd
        + 6000.0 * a**2 * b**2 * f
        - 495.0 * a * b * cc**3
        + 1440.0 * a * b**2 * cc * dd
        - 3000.0 * a**2 * b * dd**2
        - 288.0 * b**4 * dd
        - 1500.0 * a**2 * b * cc * e
        + 7500.0 * a**3 * dd * e
        - 15000.0 * a**3 * cc * f
        + 108.0 * b**3 * cc**2
    )


# First singular quintic family (p*y + q)^5 + r*y^2 + s*y + t


def _quintic_l2(c: _Context) -> Jet:
    p, q, r, s, t = c["p"], c["q"], c["r"], c["s"], c["t"]
    return -d(p) * q + d(q) * p + q**2 * r - p * q * s + t * p**2


def _quintic_l3(c: _Context) -> Jet:
    p, q, r, s = c["p"], c["q"], c["r"], c["s"]
    return 5.0 * d(p) * r + 3.0 * p * r * s - 6.0 * q * r**2 - p * d(r)


# Second singular quintic family (p*y + q)^5 + s*y + t


def _m2(c: _Context) -> Jet:
    p, q, s, t = c["p"], c["q"], c["s"], c["t"]
    return -d(p) * q + d(q) * p - p * q * s + t * p**2


def _m4(c: _Context) -> Jet:
    p, q, s, t = c["p"], c["q"], c["s"], c["t"]
    dp, dq = d(p), d(q)
    return (
        p * (p * d(dq) - q * d(dp))
        + 7.0 * dp * (dp * q - p * dq)
        + p**3 * d(t)
        - p**2 * q * d(s)
        - 6.0 * p**2 * s * dq
        + dp * p * (11.0 * q * s - 5.0 * p * t)
        + 5.0 * p**2 * s * (q * s - p * t)
    )


def _rel(family: Family, name: str, order: int, degree: int, formula: Formula):
    return InvariantSpec(name, family, Kind.RELATIVE, order, degree, formula)


def _abs(
    family: Family,
    name: str,
    order: int,
    formula: Formula,
    denominators: Tuple[str, ...],
    kind: Kind = Kind.ABSOLUTE,
):
    return InvariantSpec(name, family, kind, order, 0, formula, denominators)


def _chain(n: int) -> Formula:
    return lambda c: _chain_step(c, c[f"s{2 * n - 1}"], n)


_SPECS: List[InvariantSpec] = [
    # k = 3
    _rel(Family.K3, "s1", 0, 1, lambda c: c["a"]),
    _rel(Family.K3, "s3", 1, 3, _s3),
    _rel(Family.K3, "s5", 2, 5, _chain(2)),
    _rel(Family.K3, "s7", 3, 7, _chain(3)),
    _rel(Family.K3, "s9", 4, 9, _chain(4)),
    _abs(Family.K3, "J1", 2, lambda c: c["s5"] ** 3 / c["s3"] ** 5, ("s3",)),
    _abs(Family.K3, "J2", 3, lambda c: c["s5"] * c["s7"] / c["s3"] ** 4, ("s3",)),
    _abs(Family.K3, "J3", 4, lambda c: c["s9"] / c["s3"] ** 3, ("s3",)),
    # k = 4
    _rel(Family.K4, "I0", 0, 1, lambda c: c["a"]),
    _rel(Family.K4, "I1", 0, 2, _i1),
    _rel(Family.K4, "I2", 1, 3, _i2),
    _rel(Family.K4, "I3", 1, 5, _i3),
    _abs(
        Family.K4, "J1", 1, lambda c: c["I2"] * c["I0"] / c["I1"] ** 2, ("I1",)
    ),
    _abs(
        Family.K4,
        "J2",
        1,
        lambda c: c["I3"] / rpow(absolute(c["I1"]), 5, 2),
        ("I1",),
    ),
    # singular k = 4
    _rel(Family.K4S, "L0", 0, 1, lambda c: c["p"]),
    _rel(Family.K4S, "L1", 1, 3, _quartic_l1),
    _rel(Family.K4S, "L2", 2, 5, _quartic_l2),
    _abs(
        Family.K4S,
        "J",
        2,
        lambda c: c["L2"]
        / (rpow(absolute(c["L0"]), 1, 2) * rpow(absolute(c["L1"]), 7, 4)),
        ("L0", "L1"),
    ),
    _abs(
        Family.K4S,
        "J_printed",
        2,
        lambda c: c["L2"] / (c["L0"] ** 2 * rpow(absolute(c["L1"]), 7, 2)),
        ("L0", "L1"),
        Kind.AUXILIARY,
    ),
    # k = 5
    _rel(Family.K5, "K0", 0, 1, lambda c: c["a"]),
    _rel(Family.K5, "K1", 0, 2, _k1),
    _rel(Family.K5, "K2", 0, 3, _k2),
    _rel(Family.K5, "K3", 1, 3, _k3),
    _rel(Family.K5, "K4", 1, 5, _k4),
    _abs(Family.K5, "J0", 0, lambda c: c["K2"] ** 2 / c["K1"] ** 3, ("K1",)),
    _abs(
        Family.K5,
        "J1",
        1,
        lambda c: c["K3"] * c["K0"] ** 2 / rpow(absolute(c["K1"]), 5, 2),
        ("K1",),
    ),
    _abs(
        Family.K5,
        "J2",
        1,
        lambda c: c["K4"] * c["K0"] ** 2 / rpow(absolute(c["K1"]), 7, 2),
        ("K1",),
    ),
    # singular k = 5, first kind
    _rel(Family.K5S1, "L0", 0, 1, lambda c: c["p"]),
    _rel(Family.K5S1, "L1", 0, 1, lambda c: c["r"]),
    _rel(Family.K5S1, "L2", 1, 3, _quintic_l2),
    _rel(Family.K5S1, "L3", 1, 3, _quintic_l3),
    _abs(
        Family.K5S1,
        "J0",
        1,
        lambda c: c["L2"] * rpow(c["p"], 4, 3) / rpow(c["r"], 5, 3),
        ("L0", "L1"),
    ),
    _abs(
        Family.K5S1,
        "J1",
        1,
        lambda c: c["L3"] * rpow(c["p"], 2, 3) / rpow(c["r"], 7, 3),
        ("L0", "L1"),
    ),
    # singular k = 5, second kind
    _rel(Family.K5S2, "M0", 0, 1, lambda c: c["p"]),
    _rel(Family.K5S2, "M2", 1, 3, _m2),
    _rel(Family.K5S2, "M4", 2, 5, _m4),
    _abs(
        Family.K5S2,
        "J",
        2,
        lambda c: c["M4"] / (rpow(c["p"], 2, 5) * rpow(c["M2"], 9, 5)),
        ("M0", "M2"),
    ),
]

CATALOG: Dict[Tuple[Family, str], InvariantSpec] = {
    (s.family, s.name): s for s in _SPECS
}

# Coefficient A of the invariant derivation A * D/Dx, its jet order and the
# relative invariants it divides by
DERIVATIONS: Dict[Family, Tuple[Formula, int, Tuple[str, ...]]] = {
    Family.K3: (lambda c: c["s1"] / rpow(c["s3"], 2, 3), 1, ("s3",)),
    Family.K4: (
        lambda c: c["I0"] ** 2 / rpow(absolute(c["I1"]), 3, 2),
        0,
        ("I1",),
    ),
    Family.K4S: (
        lambda c: rpow(absolute(c["L0"]), 1, 2) / rpow(absolute(c["L1"]), 3, 4),
        1,
        ("L0", "L1"),
    ),
    Family.K5: (lambda c: c["K0"] ** 3 / c["K1"] ** 2, 0, ("K1",)),
    Family.K5S1: (
        lambda c: rpow(c["p"], 5, 3) / rpow(c["r"], 4, 3),
        0,
        ("L0", "L1"),
    ),
    Family.K5S2: (
        lambda c: rpow(c["p"], 3, 5) / rpow(c["M2"], 4, 5),
        1,
        ("M0", "M2"),
    ),
}

# Basic absolute invariants; with their first invariant derivatives they
# make up the signature of an equation
BASIC: Dict[Family, Tuple[str, ...]] = {
    Family.K3: ("J1",),
    Family.K4: ("J1", "J2"),
    Family.K4S: ("J",),
    Family.K5: ("J0", "J1", "J2"),
    Family.K5S1: ("J0", "J1"),
    Family.K5S2: ("J",),
}


def spec_of(family: Family, name: str) -> InvariantSpec:
    try:
        return CATALOG[(family, name)]
    except KeyError:
        raise UnknownInvariant(f"{family.tag} has no invariant '{name}'") from None


def names(family: Family, kind: Kind) -> List[str]:
    return [s.name for s in _SPECS if s.family is family and s.kind is kind]


def basic_invariants(family: Family) -> Tuple[str, ...]:
    return BASIC[family]


def derivation_order(family: Family) -> int:
    return DERIVATIONS[family][1]


# Jet order below which relative_invariants refuses to evaluate
_MIN_RELATIVE_ORDER: Dict[Family, int] = {Family.K4S: 2, Family.K5S2: 2}

_COMPONENT_RE = re.compile(r"^nabla(\d*)_(\w+)$")


def component_name(name: str, k: int) -> str:
    """
    Public name of the k-th invariant derivative of an invariant
    """
    if k == 0:
        return name
    if k == 1:
        return f"nabla_{name}"
    return f"nabla{k}_{name}"


def split_component(text: str) -> Tuple[str, int]:
    match = _COMPONENT_RE.match(text)
    if match is None:
        return text, 0
    return match.group(2), int(match.group(1) or 1)


def required_order(family: Family, name: str, k: int = 0) -> int:
    """
    Jet order needed to evaluate the k-th invariant derivative of name
    """
    entry = spec_of(family, name)
    if k == 0:
        return entry.order
    return max(derivation_order(family), entry.order + k)


def _point_of(family: Family, jets: Mapping[str, Jet]) -> JetPoint:
    if isinstance(jets, JetPoint):
        return jets
    base = next(iter(jets.values())).base_point
    return JetPoint(family, base, dict(jets))


class _Singular(InvariantError):
    """
    A denominator of the requested quantity vanishes at the point
    """


def is_negligible(value: float, point: JetPoint, entry: InvariantSpec, tol: float):
    scale = 1.0 + point.scale(entry.order)
    return abs(value) <= tol * scale**entry.degree


def _check_denominators(
    context: _Context, denominators: Tuple[str, ...], tol: float
) -> None:
    for name in denominators:
        entry = spec_of(context.point.family, name)
        if is_negligible(context[name].value, context.point, entry, tol):
            raise _Singular(f"{name} vanishes")


def invariant_jet(point: JetPoint, name: str, tol: float = DEFAULT_TOL_ZERO) -> Jet:
    """
    The named invariant as a jet in x. Raises when the point is too shallow
    or when a denominator vanishes.
    """
    entry = spec_of(point.family, name)
    if point.order < entry.order:
        raise OrderTooLow(f"{name} needs jets of order {entry.order}")
    context = _Context(point)
    _check_denominators(context, entry.denominators, tol)
    return context[name]


def relative_value(
    point: JetPoint, name: str, tol: float = DEFAULT_TOL_ZERO
) -> Tuple[float, bool]:
    """
    Value of a relative invariant and whether it counts as zero
    """
    entry = spec_of(point.family, name)
    value = invariant_jet(point, name).value
    return value, is_negligible(value, point, entry, tol)


def relative_invariants(
    family: Family, jets: Mapping[str, Jet]
) -> Dict[str, InvariantValue]:
    """
    Every relative invariant of the family the jets are deep enough for
    """
    point = _point_of(family, jets)
    specs = [s for s in _SPECS if s.family is family and s.kind is Kind.RELATIVE]
    needed = _MIN_RELATIVE_ORDER.get(family, 1)
    if point.order < needed:
        raise OrderTooLow(
            f"{family.tag} relative invariants need jets of order {needed}"
        )

    context = _Context(point)
    return {
        s.name: InvariantValue(s.name, s.order, context[s.name].value, True)
        for s in specs
        if s.order <= point.order
    }


def _soft(
    name: str, order: int, compute: Callable[[], float]
) -> InvariantValue:
    try:
        return InvariantValue(name, order, compute(), True)
    except (_Singular, JetError) as ex:
        LOG.debug("%s undefined: %s", name, ex)
        return InvariantValue(name, order, math.nan, False)


def absolute_invariants(
    family: Family,
    jets: Mapping[str, Jet],
    tol: float = DEFAULT_TOL_ZERO,
    kind: Kind = Kind.ABSOLUTE,
) -> Dict[str, InvariantValue]:
    point = _point_of(family, jets)
    specs = [s for s in _SPECS if s.family is family and s.kind is kind]
    return {
        s.name: _soft(
            s.name, s.order, lambda s=s: invariant_jet(point, s.name, tol).value
        )
        for s in specs
        if s.order <= point.order
    }


def derivation_jet(point: JetPoint, tol: float = DEFAULT_TOL_ZERO) -> Jet:
    formula, order, denominators = DERIVATIONS[point.family]
    if point.order < order:
        raise OrderTooLow(f"invariant derivation needs jets of order {order}")
    context = _Context(point)
    _check_denominators(context, denominators, tol)
    return formula(context)


def derivation_coefficient(
    family: Family, jets: Mapping[str, Jet], tol: float = DEFAULT_TOL_ZERO
) -> DerivationCoefficient:
    point = _point_of(family, jets)
    try:
        return DerivationCoefficient(family, derivation_jet(point, tol).value, True)
    except (_Singular, JetError) as ex:
        LOG.debug("invariant derivation undefined: %s", ex)
        return DerivationCoefficient(family, math.nan, False)


def nabla(a: Jet, j: Jet) -> Jet:
    return a * j.derivative()


def nabla_jet(
    point: JetPoint, name: str, k: int, tol: float = DEFAULT_TOL_ZERO
) -> Jet:
    """
    The k-th invariant derivative of an absolute invariant, as a jet
    """
    if k < 0:
        raise ValueError(f"derivative count must be non-negative, got {k}")
    needed = required_order(point.family, name, k)
    if point.order < needed:
        raise OrderTooLow(f"{component_name(name, k)} needs jets of order {needed}")
    value = invariant_jet(point, name, tol)
    if k:
        a = derivation_jet(point, tol)
        for _ in range(k):
            value = nabla(a, value)
    return value


def nabla_power_point(
    point: JetPoint, name: str, k: int, tol: float = DEFAULT_TOL_ZERO
) -> InvariantValue:
    return _soft(
        component_name(name, k),
        required_order(point.family, name, k),
        lambda: nabla_jet(point, name, k, tol).value,
    )


def nabla_power(
    source: EquationSource,
    x0: float,
    name: str,
    k: int,
    tol: float = DEFAULT_TOL_ZERO,
) -> InvariantValue:
    order = required_order(source.family, name, k)
    return nabla_power_point(source.jet_point(x0, order), name, k, tol)


def tresse_point(
    point: JetPoint, f_name: str, j_name: str, tol: float = DEFAULT_TOL_ZERO
) -> InvariantValue:
    """
    DF/DJ = (DF/Dx) / (DJ/Dx); names may carry a nabla prefix
    """
    f_jet = nabla_jet(point, *split_component(f_name), tol).derivative()
    j_jet = nabla_jet(point, *split_component(j_name), tol)
    slope = j_jet.derivative().value
    if abs(slope) <= tol * (1.0 + abs(j_jet.value)):
        raise TresseDenominatorVanishes(f"D{j_name}/Dx vanishes at {point.base_point}")
    order = max(
        required_order(point.family, *split_component(f_name)),
        required_order(point.family, *split_component(j_name)),
    )
    return InvariantValue(f"D{f_name}/D{j_name}", order + 1, f_jet.value / slope, True)


def tresse_derivative(
    source: EquationSource,
    x0: float,
    f_name: str,
    j_name: str,
    tol: float = DEFAULT_TOL_ZERO,
) -> InvariantValue:
    family = source.family
    order = 1 + max(
        required_order(family, *split_component(f_name)),
        required_order(family, *split_component(j_name)),
    )
    return tresse_point(source.jet_point(x0, order), f_name, j_name, tol)


def canonical_check_point(point: JetPoint, tol: float = DEFAULT_TOL_ZERO) -> bool:
    return point.is_canonical(tol)


def canonical_check(
    source: EquationSource, x0: float, tol: float = DEFAULT_TOL_ZERO
) -> bool:
    return canonical_check_point(source.jet_point(x0, 1), tol)


def weight_fit(
    family: Family,
    name: str,
    trials: int = 8,
    seed: int = 42,
    tol_residual: float = 1e-6,
    max_denominator: int = 12,
) -> WeightFit:
    """
    Fit log|F(T.E)/F(E)| = p*log|g| + q*log|f'| over random equations and
    transformations and round the exponents to small rationals
    """
    entry = spec_of(family, name)
    if entry.kind is not Kind.RELATIVE:
        raise InvariantError(f"{name} is not a relative invariant")

    rng = np.random.default_rng(seed)
    rows: List[List[float]] = []
    targets: List[float] = []
    for _ in range(trials):
        x0 = float(rng.uniform(-0.5, 0.5))
        try:
            eq = generators.random_equation(family, rng, x0)
            t = generators.random_transformation(rng, x0)
            point = eq.jet_point(x0, entry.order)
            tj = t.jets(x0, entry.order + 1)
            image = transform.apply_jets(tj, point)
            before = invariant_jet(point, name).value
            after = invariant_jet(image, name).value
        except AbelEquivError as ex:
            LOG.warning("Skipping weight trial for %s: %s", name, ex)
            continue
        if is_negligible(before, point, entry, 1e-6) or after == 0.0:
            continue
        rows.append([math.log(abs(tj.g.value)), math.log(abs(tj.f.coeffs[1]))])
        targets.append(math.log(abs(after / before)))

    if len(rows) < 3:
        raise FitFailed(f"not enough usable trials to fit the weight of {name}")

    design, observed = np.array(rows), np.array(targets)
    solution, *_ = np.linalg.lstsq(design, observed, rcond=None)
    g_exp, f_exp = (
        Fraction(float(v)).limit_denominator(max_denominator) for v in solution
    )
    fitted = design @ np.array([float(g_exp), float(f_exp)])
    residual = float(np.max(np.abs(fitted - observed)))

    if residual > tol_residual:
        LOG.warning("Weight fit of %s left residual %.3g", name, residual)
        raise FitFailed(
            f"weight of {name} is not a power of g and f' (residual {residual:.3g})"
        )
    return WeightFit(name, g_exp, f_exp, residual, len(rows))


def restriction_ratio(
    point: JetPoint, tol: float = DEFAULT_TOL_ZERO
) -> Optional[float]:
    """
    I2 / (L0^6 * L1) at a singular quartic point, or None where L1 vanishes
    """
    l1, negligible = relative_value(point, "L1", tol)
    if negligible:
        return None
    expanded = expand_point(point)
    i2 = invariant_jet(expanded, "I2").value
    return i2 / (point["p"].value ** 6 * l1)
