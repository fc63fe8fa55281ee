"""
Random equations and transformations for weight fits and self-checks
"""

import logging
from typing import Dict, List

import numpy as np

from abel_equiv import expr
from abel_equiv.errors import AbelEquivError, JetError
from abel_equiv.expr import Expression
from abel_equiv.model import AbelEquation, Family, classify
from abel_equiv.transform import PointTransformation

LOG = logging.getLogger("generators")


def random_polynomial(
    rng: np.random.Generator, degree: int = 3, low: float = -1.0, high: float = 1.0
) -> Expression:
    coefficients: List[float] = [float(v) for v in rng.uniform(low, high, degree + 1)]
    return expr.polynomial(coefficients)


def random_equation(
    family: Family,
    rng: np.random.Generator,
    x0: float,
    margin: float = 1e-3,
    attempts: int = 100,
) -> AbelEquation:
    """
    Equation with cubic polynomial coefficients that is regular at x0, with
    every classifying invariant at least margin away from zero
    """
    for _ in range(attempts):
        coefficients: Dict[str, Expression] = {
            name: random_polynomial(rng) for name in family.coefficient_names
        }
        eq = AbelEquation(family=family, coefficients=coefficients)
        try:
            if classify(eq, x0, tol=margin).regular:
                return eq
        except JetError as ex:
            LOG.debug("Rejected random %s equation: %s", family.tag, ex)
    raise AbelEquivError(
        f"no regular {family.tag} equation at {x0} after {attempts} attempts"
    )


def random_transformation(
    rng: np.random.Generator,
    x0: float,
    orientation_reversing: bool = False,
    attempts: int = 100,
) -> PointTransformation:
    """
    Polynomial transformation with g > 0.1 at x0 and f' > 0.1 (below -0.1
    when orientation_reversing)
    """
    for _ in range(attempts):
        f = [
            float(rng.uniform(-0.5, 0.5)),
            float(rng.uniform(0.5, 2.0)),
            float(rng.uniform(-0.3, 0.3)),
            float(rng.uniform(-0.3, 0.3)),
        ]
        if orientation_reversing:
            f = [-c for c in f]
        g = [float(rng.uniform(0.5, 2.0))]
        g += [float(v) for v in rng.uniform(-0.3, 0.3, 2)]
        h = [float(v) for v in rng.uniform(-1.0, 1.0, 3)]
        t = PointTransformation(
            expr.polynomial(f), expr.polynomial(g), expr.polynomial(h)
        )

        try:
            tj = t.jets(x0, 1)
        except AbelEquivError as ex:
            LOG.debug("Rejected random transformation: %s", ex)
            continue
        slope = -tj.f.coeffs[1] if orientation_reversing else tj.f.coeffs[1]
        if slope > 0.1 and tj.g.value > 0.1:
            return t
    raise AbelEquivError(
        f"no invertible transformation at {x0} after {attempts} attempts"
    )
