from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Mapping, Optional, Protocol, Tuple, Union

import yaml

from abel_equiv import expr
from abel_equiv.errors import (
    EquationError,
    MissingCoefficient,
    UnexpectedKey,
    UnknownFamily,
    WrongFamily,
)
from abel_equiv.expr import Expression
from abel_equiv.jet import DEFAULT_ORDER, Jet

LOG = logging.getLogger("model")

DEFAULT_TOL_ZERO = 1e-9


class Family(Enum):
    """
    Equation families y' = P(x, y) with polynomial right-hand side in y
    """

    K3 = ("k3", 3, ("a", "b", "c", "d"), 2)
    K4 = ("k4", 4, ("a", "b", "c", "d", "e"), 4)
    K4S = ("k4s", 4, ("p", "q", "r", "s"), 2)
    K5 = ("k5", 5, ("a", "b", "c", "d", "e", "f"), 6)
    K5S1 = ("k5s1", 5, ("p", "q", "r", "s", "t"), 4)
    K5S2 = ("k5s2", 5, ("p", "q", "s", "t"), 2)

    def __init__(
        self,
        tag: str,
        degree: int,
        coefficient_names: Tuple[str, ...],
        signature_dimension: int,
    ) -> None:
        self.tag = tag
        self.degree = degree
        self.coefficient_names = coefficient_names
        self.signature_dimension = signature_dimension

    @staticmethod
    def from_tag(tag: Any) -> Family:
        for family in Family:
            if family.tag == str(tag).lower():
                return family
        raise UnknownFamily(str(tag))

    @property
    def singular(self) -> bool:
        return self in SINGULAR_TAILS

    @property
    def regular_counterpart(self) -> Family:
        """
        The full-coefficient family a singular family embeds into
        """
        return {3: Family.K3, 4: Family.K4, 5: Family.K5}[self.degree]

    def power_of(self, name: str) -> int:
        """
        The power of y a full-coefficient name multiplies
        """
        return self.degree - self.coefficient_names.index(name)

    def name_of(self, power: int) -> str:
        return self.coefficient_names[self.degree - power]


# Lower-order tail of the singular families: power of y -> coefficient name.
# The rest of the right-hand side is (p*y + q)^k.
SINGULAR_TAILS: Dict[Family, Dict[int, str]] = {
    Family.K4S: {1: "r", 0: "s"},
    Family.K5S1: {2: "r", 1: "s", 0: "t"},
    Family.K5S2: {1: "s", 0: "t"},
}

# Leading coefficient is 1 and these coefficients vanish in canonical shape
CANONICAL_ONES: Dict[Family, str] = {
    Family.K3: "a",
    Family.K4: "a",
    Family.K5: "a",
    Family.K4S: "p",
    Family.K5S1: "p",
    Family.K5S2: "p",
}
CANONICAL_ZEROS: Dict[Family, Tuple[str, ...]] = {
    Family.K3: ("b", "c"),
    Family.K4: ("b", "d"),
    Family.K5: ("b", "e"),
    Family.K4S: ("q", "r"),
    Family.K5S1: ("q", "s"),
    Family.K5S2: ("q", "s"),
}


@dataclass(frozen=True)
class JetPoint:
    """
    A point of the jet bundle: coefficient jets of one family at a base point
    """

    family: Family
    base_point: float
    jets: Dict[str, Jet]

    def __post_init__(self) -> None:
        missing = [n for n in self.family.coefficient_names if n not in self.jets]
        if missing:
            raise MissingCoefficient(missing[0])

    @staticmethod
    def from_coordinates(
        family: Family, base_point: float, coordinates: Mapping[Tuple[str, int], float]
    ) -> JetPoint:
        """
        Build a point from raw derivative coordinates (name, i) -> u^(i)
        """
        order = max(i for _, i in coordinates)
        jets = {}
        for name in family.coefficient_names:
            coeffs = [
                coordinates.get((name, i), 0.0) / math.factorial(i)
                for i in range(order + 1)
            ]
            jets[name] = Jet(base_point, coeffs)
        return JetPoint(family, base_point, jets)

    @property
    def order(self) -> int:
        return min(j.order for j in self.jets.values())

    def __getitem__(self, name: str) -> Jet:
        return self.jets[name]

    def truncate(self, order: int) -> JetPoint:
        jets = {n: j.truncate(order) for n, j in self.jets.items()}
        return JetPoint(self.family, self.base_point, jets)

    def coordinates(self, order: Optional[int] = None) -> Dict[Tuple[str, int], float]:
        order = self.order if order is None else order
        result = {}
        for name in self.family.coefficient_names:
            derivatives = self.jets[name].truncate(order).derivatives()
            for i, value in enumerate(derivatives):
                result[(name, i)] = float(value)
        return result

    def scale(self, order: int) -> float:
        """
        Infinity norm of the coordinates up to the given derivative order
        """
        coordinates = self.coordinates(min(order, self.order))
        return max(abs(v) for v in coordinates.values())

    def is_canonical(self, tol: float = DEFAULT_TOL_ZERO) -> bool:
        one = self.jets[CANONICAL_ONES[self.family]]
        if abs(one.value - 1.0) > tol or any(abs(c) > tol for c in one.coeffs[1:]):
            return False
        for name in CANONICAL_ZEROS[self.family]:
            if any(abs(c) > tol for c in self.jets[name].coeffs):
                return False
        return True


class EquationSource(Protocol):
    """
    Anything that yields coefficient jets of one family at a point
    """

    family: Family

    def jet_point(self, x0: float, order: int = DEFAULT_ORDER) -> JetPoint:
        ...


@dataclass(frozen=True)
class AbelEquation:
    family: Family
    coefficients: Dict[str, Expression]

    @staticmethod
    def create(
        family: Union[Family, str], coefficients: Mapping[str, Any]
    ) -> AbelEquation:
        if not isinstance(family, Family):
            family = Family.from_tag(family)

        for name in coefficients:
            if name not in family.coefficient_names:
                raise UnexpectedKey(name)

        parsed: Dict[str, Expression] = {}
        for name in family.coefficient_names:
            if name not in coefficients:
                raise MissingCoefficient(name)
            parsed[name] = _coefficient(name, coefficients[name])

        return AbelEquation(family=family, coefficients=parsed)

    def jet_point(self, x0: float, order: int = DEFAULT_ORDER) -> JetPoint:
        return JetPoint(self.family, float(x0), coefficient_jets(self, x0, order))

    def describe(self) -> str:
        terms = ", ".join(
            f"{n}={expr.render(self.coefficients[n])}"
            for n in self.family.coefficient_names
        )
        return f"{self.family.tag}({terms})"


def _coefficient(name: str, value: Any) -> Expression:
    if isinstance(value, bool) or not isinstance(value, (str, int, float)):
        raise EquationError(
            f"coefficient '{name}' must be an expression string or a number"
        )
    if isinstance(value, str):
        try:
            return expr.parse(value)
        except Exception:
            LOG.error("Cannot parse coefficient %s: %r", name, value)
            raise
    return expr.const(float(value))


def load_equation(document: Mapping[str, Any]) -> AbelEquation:
    """
    Build an equation from a decoded equation document.

    The coefficients are read from a 'coefficients' table, or from flat keys
    next to 'family' when there is no table.
    """
    if not isinstance(document, Mapping):
        raise EquationError("equation document must be a mapping")
    if "family" not in document:
        raise UnknownFamily(None)
    family = Family.from_tag(document["family"])

    if "coefficients" in document:
        for key in document:
            if key not in ("family", "coefficients"):
                raise UnexpectedKey(str(key))
        coefficients = document["coefficients"]
        if not isinstance(coefficients, Mapping):
            raise EquationError("'coefficients' must be a table")
    else:
        coefficients = {k: v for k, v in document.items() if k != "family"}

    return AbelEquation.create(family, {str(k): v for k, v in coefficients.items()})


def read_document(path: str) -> Dict[str, Any]:
    LOG.info("Loading equation %s", path)

    with open(path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f.read())

    if not isinstance(data, dict):
        raise EquationError(f"{path}: equation document must be a mapping")
    return data


def document_of(eq: AbelEquation) -> Dict[str, Any]:
    return {
        "family": eq.family.tag,
        "coefficients": {
            n: expr.render(eq.coefficients[n]) for n in eq.family.coefficient_names
        },
    }


def render_equation(eq: AbelEquation) -> str:
    """
    Canonical YAML text: keys in family order, LF line endings
    """
    return yaml.safe_dump(
        document_of(eq),
        sort_keys=False,
        default_flow_style=False,
        allow_unicode=True,
        line_break="\n",
    )


def coefficient_jets(
    eq: AbelEquation, x0: float, order: int = DEFAULT_ORDER
) -> Dict[str, Jet]:
    return {
        name: expr.eval_jet(eq.coefficients[name], x0, order)
        for name in eq.family.coefficient_names
    }


def expand_singular(eq: AbelEquation) -> AbelEquation:
    """
    Rewrite (p*y + q)^k + tail(y) in full-coefficient form
    """
    if not eq.family.singular:
        raise WrongFamily(f"{eq.family.tag} is not a singular family")

    target = eq.family.regular_counterpart
    k = eq.family.degree
    p, q = eq.coefficients["p"], eq.coefficients["q"]
    tail = SINGULAR_TAILS[eq.family]

    coefficients: Dict[str, Expression] = {}
    for j in range(k, -1, -1):
        term = expr.mul(
            expr.const(math.comb(k, j)),
            expr.mul(expr.power(p, j), expr.power(q, k - j)),
        )
        if j in tail:
            term = expr.add(term, eq.coefficients[tail[j]])
        coefficients[target.name_of(j)] = term

    return AbelEquation(family=target, coefficients=coefficients)


def expand_point(point: JetPoint) -> JetPoint:
    """
    Jet-level counterpart of expand_singular
    """
    family = point.family
    if not family.singular:
        raise WrongFamily(f"{family.tag} is not a singular family")

    target = family.regular_counterpart
    k = family.degree
    p, q = point["p"], point["q"]
    tail = SINGULAR_TAILS[family]

    jets: Dict[str, Jet] = {}
    for j in range(k, -1, -1):
        term = math.comb(k, j) * p**j * q ** (k - j)
        if j in tail:
            term = term + point[tail[j]]
        jets[target.name_of(j)] = term
    return JetPoint(target, point.base_point, jets)


class OrbitTag(Enum):
    Regular = "Regular"
    SingularCubicS3Zero = "SingularCubicS3Zero"
    SingularQuarticI1Zero = "SingularQuarticI1Zero"
    SingularQuarticL1Zero = "SingularQuarticL1Zero"
    SingularQuinticK1Zero = "SingularQuinticK1Zero"
    SingularQuinticK1K2Zero = "SingularQuinticK1K2Zero"
    SingularQuinticM2Zero = "SingularQuinticM2Zero"
    DegenerateLeadingCoefficient = "DegenerateLeadingCoefficient"


@dataclass(frozen=True)
class OrbitClass:
    tag: OrbitTag
    witness: Dict[str, float] = field(default_factory=dict)

    @property
    def regular(self) -> bool:
        return self.tag is OrbitTag.Regular


# Leading coefficients that must not vanish, then the ladder of
# (relative invariant, tag when it vanishes) checks. A later check only runs
# when the earlier one vanished.
_LEADING: Dict[Family, Tuple[str, ...]] = {
    Family.K3: ("s1",),
    Family.K4: ("I0",),
    Family.K5: ("K0",),
    Family.K4S: ("L0",),
    Family.K5S1: ("L0", "L1"),
    Family.K5S2: ("M0",),
}
_LADDER: Dict[Family, Tuple[Tuple[str, OrbitTag], ...]] = {
    Family.K3: (("s3", OrbitTag.SingularCubicS3Zero),),
    Family.K4: (("I1", OrbitTag.SingularQuarticI1Zero),),
    Family.K5: (
        ("K1", OrbitTag.SingularQuinticK1Zero),
        ("K2", OrbitTag.SingularQuinticK1K2Zero),
    ),
    Family.K4S: (("L1", OrbitTag.SingularQuarticL1Zero),),
    Family.K5S1: (),
    Family.K5S2: (("M2", OrbitTag.SingularQuinticM2Zero),),
}


def classify_point(point: JetPoint, tol: float = DEFAULT_TOL_ZERO) -> OrbitClass:
    from abel_equiv import invariants

    witness: Dict[str, float] = {}

    for name in _LEADING[point.family]:
        value, negligible = invariants.relative_value(point, name, tol)
        witness[name] = value
        if negligible:
            return OrbitClass(OrbitTag.DegenerateLeadingCoefficient, witness)

    tag = OrbitTag.Regular
    for name, vanishing_tag in _LADDER[point.family]:
        value, negligible = invariants.relative_value(point, name, tol)
        witness[name] = value
        if not negligible:
            break
        tag = vanishing_tag

    return OrbitClass(tag, witness)


def classify(
    eq: EquationSource, x0: float, tol: float = DEFAULT_TOL_ZERO
) -> OrbitClass:
    return classify_point(eq.jet_point(x0, 2), tol)
