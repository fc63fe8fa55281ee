from typing import Any, Dict

import numpy as np

from abel_equiv.jet import Jet
from abel_equiv.model import AbelEquation, Family

CONFIG_PATH = "./docs/config.yml"
CUBIC_PATH = "./docs/cubic.yml"
CUBIC_SQUARE_PATH = "./docs/cubic_square.yml"
CUBIC_TRANSFORMED_PATH = "./docs/cubic_transformed.yml"


def create_cubic_document(d: str = "x") -> Dict[str, Any]:
    return {
        "family": "k3",
        "coefficients": {"a": 1, "b": 0, "c": 0, "d": d},
    }


def create_cubic(d: str = "x") -> AbelEquation:
    return AbelEquation.create(Family.K3, {"a": 1, "b": 0, "c": 0, "d": d})


def create_quartic() -> AbelEquation:
    return AbelEquation.create(
        Family.K4,
        {"a": "1+0.2*x", "b": "0.3*x", "c": "1-x^2", "d": "0.5", "e": "sin(x)"},
    )


def create_singular_quartic() -> AbelEquation:
    return AbelEquation.create(
        Family.K4S, {"p": "1+0.1*x", "q": "x", "r": "1+0.5*x", "s": "x^2"}
    )


def create_quintic() -> AbelEquation:
    return AbelEquation.create(
        Family.K5,
        {
            "a": "1+0.1*x",
            "b": "0.2",
            "c": "1+x",
            "d": "0.3*x^2",
            "e": "-0.4",
            "f": "cos(x)",
        },
    )


def create_singular_quintic_first() -> AbelEquation:
    return AbelEquation.create(
        Family.K5S1,
        {"p": "1+0.2*x", "q": "0.5*x", "r": "1+0.3*x", "s": "x", "t": "0.1*x^3"},
    )


def create_singular_quintic_second() -> AbelEquation:
    return AbelEquation.create(
        Family.K5S2, {"p": "1+0.1*x", "q": "x", "s": "0.5*x", "t": "x^2"}
    )


def create_equations() -> Dict[Family, AbelEquation]:
    return {
        Family.K3: create_cubic(),
        Family.K4: create_quartic(),
        Family.K4S: create_singular_quartic(),
        Family.K5: create_quintic(),
        Family.K5S1: create_singular_quintic_first(),
        Family.K5S2: create_singular_quintic_second(),
    }


def create_jet(seed: int = 0, base_point: float = 0.3, order: int = 6) -> Jet:
    rng = np.random.default_rng(seed)
    return Jet(base_point, rng.uniform(-1.0, 1.0, order + 1))
