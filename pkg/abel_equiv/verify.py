"""
Seeded property suites behind the verify command
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Tuple

import numpy as np

from abel_equiv import equivalence, expr, generators, invariants, lie, transform
from abel_equiv.config import RunConfig
from abel_equiv.errors import AbelEquivError, ClassNotPreserved
from abel_equiv.invariants import Kind
from abel_equiv.jet import Jet, compose, revert, rpow
from abel_equiv.model import (
    CANONICAL_ONES,
    CANONICAL_ZEROS,
    AbelEquation,
    EquationSource,
    Family,
    JetPoint,
    classify_point,
    expand_point,
    expand_singular,
)

LOG = logging.getLogger("verify")

REGULAR_FAMILIES = (Family.K3, Family.K4, Family.K5)
PRINTED_FAMILIES = (Family.K3, Family.K4, Family.K4S)
QUINTIC_FAMILIES = (Family.K5, Family.K5S1, Family.K5S2)

# Relative invariant equal to the leading coefficient
LEADING = {Family.K3: "s1", Family.K4: "I0", Family.K5: "K0"}

# Scaled regularity margin of the equations the equivalence suites draw
CONDITIONING_MARGIN = 1e-3
# Smallest invariant change a perturbed equation must show
PERTURBATION_DEVIATION = 1e-2
# Share of inconclusive decisions an equivalence suite tolerates
MAX_INCONCLUSIVE = 0.1
DRAW_ATTEMPTS = 20


@dataclass
class SuiteResult:
    name: str
    tolerance: float
    trials: int = 0
    skipped: int = 0
    worst_error: float = 0.0
    failures: int = 0
    details: Dict[str, float] = field(default_factory=dict)
    informational: bool = False
    # largest tolerated share of skipped trials, unchecked when None
    max_skipped: Optional[float] = None

    @property
    def passed(self) -> bool:
        if self.informational:
            return True
        if self.max_skipped is not None and self.skipped > self.max_skipped * (
            self.trials + self.skipped
        ):
            return False
        return self.failures == 0 and self.trials > 0

    def record(self, error: float, label: Optional[str] = None) -> None:
        self.trials += 1
        if not math.isfinite(error) or error > self.tolerance:
            self.failures += 1
            LOG.debug("%s: error %.3g over tolerance", self.name, error)
        if math.isfinite(error):
            self.worst_error = max(self.worst_error, error)
        else:
            self.worst_error = math.inf
        if label is not None:
            self.details[label] = max(self.details.get(label, 0.0), error)

    def skip(self, reason: AbelEquivError) -> None:
        self.skipped += 1
        LOG.debug("%s: skipped trial: %s", self.name, reason)

    def asdict(self) -> Dict[str, object]:
        return {
            "passed": self.passed,
            "trials": self.trials,
            "skipped": self.skipped,
            "failures": self.failures,
            "tolerance": self.tolerance,
            "worst_error": self.worst_error,
            "informational": self.informational,
            "max_skipped": self.max_skipped,
            "details": dict(sorted(self.details.items())),
        }


@dataclass
class VerifyReport:
    seed: int
    trials: int
    suites: List[SuiteResult]

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.suites)

    def asdict(self) -> Dict[str, object]:
        return {
            "seed": self.seed,
            "trials": self.trials,
            "passed": self.passed,
            "suites": {s.name: s.asdict() for s in self.suites},
        }


def relative_error(a: float, b: float) -> float:
    return abs(a - b) / max(1.0, abs(a), abs(b))


def jet_error(a: Jet, b: Jet) -> float:
    n = min(a.order, b.order)
    gap = np.abs(a.coeffs[: n + 1] - b.coeffs[: n + 1])
    head_a, head_b = np.abs(a.coeffs[: n + 1]), np.abs(b.coeffs[: n + 1])
    scale = np.maximum(1.0, np.maximum(head_a, head_b))
    return float(np.max(gap / scale))


def point_error(a: JetPoint, b: JetPoint) -> float:
    return max(jet_error(a[name], b[name]) for name in a.family.coefficient_names)


class _Trials:
    """
    Random draws shared by the suites, from one seeded generator
    """

    def __init__(self, seed: int, source: Optional[EquationSource] = None) -> None:
        self.rng = np.random.default_rng(seed)
        self.source = source

    def x0(self) -> float:
        return float(self.rng.uniform(-0.5, 0.5))

    def families(self, candidates: Iterable[Family]) -> List[Family]:
        candidates = list(candidates)
        if self.source is None:
            return candidates
        return [f for f in candidates if f is self.source.family]

    def equation(self, family: Family, x0: float) -> EquationSource:
        if self.source is not None:
            return self.source
        return generators.random_equation(family, self.rng, x0)

    def transformation(
        self, x0: float, orientation_reversing: bool = False
    ) -> transform.PointTransformation:
        return generators.random_transformation(self.rng, x0, orientation_reversing)

    def jet(self, x0: float, order: int) -> Jet:
        return Jet(x0, self.rng.uniform(-1.0, 1.0, order + 1))


def _run(
    suite: SuiteResult, trials: int, trial: Callable[[SuiteResult], None]
) -> SuiteResult:
    for _ in range(trials):
        try:
            trial(suite)
        except AbelEquivError as ex:
            suite.skip(ex)
    LOG.info(
        "Suite %s: %s (%d trials, %d skipped, worst %.3g)",
        suite.name,
        "pass" if suite.passed else "FAIL",
        suite.trials,
        suite.skipped,
        suite.worst_error,
    )
    return suite


def jet_ring_laws(draw: _Trials, trials: int, order: int) -> SuiteResult:
    def trial(suite: SuiteResult) -> None:
        x0 = draw.x0()
        a, b, c = (draw.jet(x0, order) for _ in range(3))
        suite.record(jet_error((a + b) * c, a * c + b * c), "distributive")
        suite.record(jet_error((a * b) * c, a * (b * c)), "associative")
        if abs(b.value) > 0.1:
            suite.record(jet_error((a * b) / b, a), "division")
        j = draw.jet(x0, order)
        if abs(j.coeffs[1]) > 0.1:
            roundtrip = compose(revert(j), j)
            suite.record(jet_error(roundtrip, Jet.identity(x0, order)), "revert")
        if j.value > 0.1:
            suite.record(jet_error(rpow(j, 1, 3) ** 3, j), "root")

    return _run(SuiteResult("jet_ring_laws", 1e-9), trials, trial)


def group_laws(draw: _Trials, trials: int, order: int) -> SuiteResult:
    def trial(suite: SuiteResult) -> None:
        families = draw.families(REGULAR_FAMILIES) or [draw.source.family]
        family = families[int(draw.rng.integers(len(families)))]
        x0 = draw.x0()
        eq = draw.equation(family, x0)
        t1 = draw.transformation(x0)
        image = transform.apply(t1, eq, x0, order)
        t2 = draw.transformation(image.base_point)

        composed = transform.compose_transformations(t2, t1)

        direct = transform.apply(composed, eq, x0, order)
        stepwise = transform.apply_jets(t2.jets(image.base_point, order + 1), image)
        suite.record(point_error(direct, stepwise), "composition")

        back = transform.apply_jets(transform.invert(t1, x0, order + 1), image)
        suite.record(point_error(back, eq.jet_point(x0, order)), "inverse")

    return _run(SuiteResult("group_laws", 1e-8), trials, trial)


def class_preservation(draw: _Trials, trials: int) -> SuiteResult:
    def trial(suite: SuiteResult) -> None:
        for family in draw.families(Family):
            x0 = draw.x0()
            eq = draw.equation(family, x0)
            t = draw.transformation(x0)
            before = classify_point(eq.jet_point(x0, 2))
            after = classify_point(transform.apply(t, eq, x0, 2))
            suite.record(0.0 if before.tag is after.tag else 1.0, family.tag)

            # leading coefficient law a~ o f = a g^-(k-1) / f' for full families
            if not family.singular:
                tj = t.jets(x0, 1)
                name = CANONICAL_ONES[family]
                leading = eq.jet_point(x0, 0)[name].value
                expected = leading * tj.g.value ** (1 - family.degree) / tj.f.coeffs[1]
                image = transform.apply(t, eq, x0, 0)
                suite.record(relative_error(image[name].value, expected), "leading")
            else:
                _check_reversal(suite, eq, x0, draw.transformation(x0, True))

    return _run(SuiteResult("class_preservation", 1e-9), trials, trial)


def _check_reversal(
    suite: SuiteResult,
    eq: EquationSource,
    x0: float,
    t: transform.PointTransformation,
) -> None:
    """
    Orientation-reversing maps leave the singular quartic class and stay
    inside the singular quintic ones
    """
    label = f"{eq.family.tag}.reversed"
    if eq.family.degree % 2 == 0:
        try:
            transform.apply(t, eq, x0, 2)
        except ClassNotPreserved:
            suite.record(0.0, label)
        else:
            suite.record(1.0, label)
        return
    if not isinstance(eq, AbelEquation):
        return
    image = expand_point(transform.apply(t, eq, x0, 2))
    expected = transform.apply(t, expand_singular(eq), x0, 2)
    suite.record(point_error(image, expected), label)


def _absolute_components(family: Family) -> List[Tuple[str, int]]:
    names = invariants.names(family, Kind.ABSOLUTE)
    return [(name, 0) for name in names] + [(name, 1) for name in names]


def absolute_invariance(draw: _Trials, trials: int) -> SuiteResult:
    def trial(suite: SuiteResult) -> None:
        for family in draw.families(Family):
            x0 = draw.x0()
            eq = draw.equation(family, x0)
            t = draw.transformation(x0)
            for name, k in _absolute_components(family):
                order = invariants.required_order(family, name, k)
                before = invariants.nabla_jet(eq.jet_point(x0, order), name, k).value
                image = transform.apply(t, eq, x0, order)
                after = invariants.nabla_jet(image, name, k).value
                label = f"{family.tag}.{invariants.component_name(name, k)}"
                suite.record(relative_error(before, after), label)

    return _run(SuiteResult("absolute_invariance", 1e-7), trials, trial)


def weights(draw: _Trials, trials: int) -> SuiteResult:
    def trial(suite: SuiteResult) -> None:
        for family in draw.families(Family):
            for name in invariants.names(family, Kind.RELATIVE):
                seed = int(draw.rng.integers(0, 2**31))
                fit = invariants.weight_fit(family, name, trials=8, seed=seed)
                suite.record(fit.residual, f"{family.tag}.{name}")
                if LEADING.get(family) == name:
                    gap = abs(float(fit.g_exponent) - (1 - family.degree)) + abs(
                        float(fit.f_exponent) + 1.0
                    )
                    suite.record(gap, f"{family.tag}.{name}.law")

    return _run(SuiteResult("weights", 1e-6), min(trials, 1), trial)


def cubic_worked_case() -> SuiteResult:
    """
    y' = y^3 + x at x0 = 1 against closed forms
    """
    suite = SuiteResult("cubic_worked_case", 1e-9)
    eq = AbelEquation.create(Family.K3, {"a": 1, "b": 0, "c": 0, "d": "x"})
    point = eq.jet_point(1.0, 4)
    expected = {"s3": -3.0, "s5": -3.0, "s7": 0.0, "J1": 1.0 / 9.0}
    for name, value in expected.items():
        suite.record(abs(invariants.invariant_jet(point, name).value - value), name)

    # finite-difference oracle for nabla J1 = A dJ1/dx, Richardson extrapolated
    def central(step: float) -> float:
        j1 = [
            invariants.invariant_jet(eq.jet_point(1.0 + s, 2), "J1").value
            for s in (step, -step)
        ]
        return (j1[0] - j1[1]) / (2.0 * step)

    a = invariants.derivation_jet(point).value
    oracle = a * (4.0 * central(5e-4) - central(1e-3)) / 3.0
    closed = -(5.0 / 9.0) * 3.0 ** (-2.0 / 3.0)
    computed = invariants.nabla_jet(point, "J1", 1).value
    suite.record(abs(computed - closed), "nabla_J1")
    suite.record(abs(oracle - closed), "nabla_J1.oracle")
    return suite


def syzygy(draw: _Trials, trials: int) -> List[SuiteResult]:
    """
    J2 against J1^(1/3) nabla(J1^(1/3)) + 5/3 J1; the form
    nabla(J1^(1/3)) + 15 J1 is reported alongside
    """
    derived = SuiteResult("cubic_syzygy", 1e-8)
    printed = SuiteResult("cubic_syzygy_printed", 0.0, informational=True)

    def trial(suite: SuiteResult) -> None:
        x0 = draw.x0()
        eq = draw.equation(Family.K3, x0)
        point = eq.jet_point(x0, 4)
        j1 = invariants.invariant_jet(point, "J1")
        j2 = invariants.invariant_jet(point, "J2").value
        a = invariants.derivation_jet(point)
        cube_root = rpow(j1, 1, 3)
        nabla_root = invariants.nabla(a, cube_root).value
        rhs = cube_root.value * nabla_root + 5.0 / 3.0 * j1.value
        suite.record(relative_error(j2, rhs))
        printed.record(relative_error(j2, nabla_root + 15.0 * j1.value))

    if draw.source is not None and draw.source.family is not Family.K3:
        return []
    _run(derived, trials, trial)
    return [derived, printed]


def singular_embeddings(draw: _Trials, trials: int) -> List[SuiteResult]:
    """
    Expanded singular equations: I1 vanishes for the singular quartic with
    I2 = 12 L0^6 L1 and I3 = 0; K1 = K2 = 0 for the second singular quintic;
    K1 = 0 and K2 = 25 L0^10 L1 for the first
    """
    suite = SuiteResult("singular_embeddings", 1e-10)
    restriction = SuiteResult("quartic_restriction", 1e-6)
    drift = SuiteResult("quartic_singular_j_printed", 0.0, informational=True)
    families = (Family.K4S, Family.K5S1, Family.K5S2)

    def scaled(point: JetPoint, name: str, value: float) -> float:
        entry = invariants.spec_of(point.family, name)
        return abs(value) / (1.0 + point.scale(entry.order)) ** entry.degree

    def trial(suite: SuiteResult) -> None:
        for family in draw.families(families):
            x0 = draw.x0()
            point = draw.equation(family, x0).jet_point(x0, 3)
            expanded = expand_point(point)

            def value(name: str) -> float:
                return invariants.invariant_jet(expanded, name).value

            if family is Family.K4S:
                suite.record(scaled(expanded, "I1", value("I1")), "k4s.I1")
                suite.record(scaled(expanded, "I3", value("I3")), "k4s.I3")
                ratio = invariants.restriction_ratio(point)
                if ratio is not None:
                    restriction.record(abs(ratio - 12.0) / 12.0, "k4s.I2")
                j = invariants.invariant_jet(point, "J").value
                j_printed = invariants.invariant_jet(point, "J_printed").value
                drift.record(relative_error(j, j_printed))
            elif family is Family.K5S2:
                suite.record(scaled(expanded, "K1", value("K1")), "k5s2.K1")
                suite.record(scaled(expanded, "K2", value("K2")), "k5s2.K2")
            else:
                expected = 25.0 * point["p"].value ** 10 * point["r"].value
                suite.record(scaled(expanded, "K1", value("K1")), "k5s1.K1")
                suite.record(
                    scaled(expanded, "K2", value("K2") - expected), "k5s1.K2"
                )

    if not draw.families(families):
        return []
    _run(suite, trials, trial)
    return [suite] + [s for s in (restriction, drift) if s.trials]


def infinitesimal_invariance(draw: _Trials, trials: int) -> SuiteResult:
    def trial(suite: SuiteResult) -> None:
        for family in draw.families(Family):
            x0 = draw.x0()
            eq = draw.equation(family, x0)
            gen = lie.random_generator(family, draw.rng)
            for name, k in _absolute_components(family):
                order = invariants.required_order(family, name, k)
                defect = lie.infinitesimal_defect(gen, name, eq.jet_point(x0, order), k)
                if defect.defined:
                    label = f"{family.tag}.{defect.name}"
                    suite.record(defect.normalized, label)

    return _run(SuiteResult("infinitesimal_invariance", 1e-6), trials, trial)


def flow_consistency(draw: _Trials, trials: int) -> SuiteResult:
    def trial(suite: SuiteResult) -> None:
        for family in draw.families(QUINTIC_FAMILIES + PRINTED_FAMILIES):
            x0 = draw.x0()
            eq = draw.equation(family, x0)
            gen = lie.random_generator(family, draw.rng)
            for name in invariants.names(family, Kind.ABSOLUTE):
                defect = lie.finite_action_defect(name, eq, x0, gen)
                suite.record(defect, f"{family.tag}.{name}")

    return _run(SuiteResult("flow_consistency", 1e-6), trials, trial)


def canonical_closure(draw: _Trials, trials: int, order: int) -> SuiteResult:
    def trial(suite: SuiteResult) -> None:
        for family in REGULAR_FAMILIES:
            coefficients = {
                name: generators.random_polynomial(draw.rng)
                for name in family.coefficient_names
            }
            coefficients[CANONICAL_ONES[family]] = expr.const(1.0)
            for name in CANONICAL_ZEROS[family]:
                coefficients[name] = expr.const(0.0)
            eq = AbelEquation(family, coefficients)

            magnitude = float(draw.rng.uniform(0.1, 3.0))
            scale = magnitude if draw.rng.random() < 0.5 else -magnitude
            r = transform.ResidualTransformation.for_family(
                family, scale, float(draw.rng.uniform(-2.0, 2.0))
            )
            x0 = draw.x0()
            image = transform.residual_apply(r, eq, x0, order)
            suite.record(0.0 if image.is_canonical(1e-9) else 1.0, family.tag)

    return _run(SuiteResult("canonical_closure", 0.5), trials, trial)


def _basic_values(eq: EquationSource, x0: float) -> List[float]:
    family = eq.family
    names = invariants.basic_invariants(family)
    order = max(invariants.required_order(family, name, 0) for name in names)
    point = eq.jet_point(x0, order)
    return [invariants.invariant_jet(point, name).value for name in names]


def _well_conditioned(eq: EquationSource, x0: float) -> bool:
    try:
        return equivalence.regularity(eq, x0, CONDITIONING_MARGIN).regular
    except AbelEquivError as ex:
        LOG.debug("Rejected %s at %s: %s", eq.family.tag, x0, ex)
        return False


def _perturbed(draw: _Trials, eq: AbelEquation, x0: float) -> Optional[AbelEquation]:
    """
    eq with a random cubic added to its last coefficient, grown until some
    basic invariant moves by PERTURBATION_DEVIATION at x0
    """
    name = eq.family.coefficient_names[-1]
    bump = generators.random_polynomial(draw.rng)
    before = _basic_values(eq, x0)
    for scale in (0.1, 0.4, 1.6):
        coefficients = {
            **eq.coefficients,
            name: expr.add(eq.coefficients[name], expr.mul(expr.const(scale), bump)),
        }
        perturbed = AbelEquation(eq.family, coefficients)
        if not _well_conditioned(perturbed, x0):
            continue
        after = _basic_values(perturbed, x0)
        if max(map(relative_error, before, after)) >= PERTURBATION_DEVIATION:
            return perturbed
    return None


def equivalence_decisions(
    draw: _Trials, trials: int, config: RunConfig
) -> List[SuiteResult]:
    """
    A well-conditioned equation against its transform must be Equivalent;
    against a copy whose invariants moved by at least
    PERTURBATION_DEVIATION it must be NotEquivalent. Inconclusive decisions
    are skipped, and a suite fails when they exceed MAX_INCONCLUSIVE.
    """
    soundness = SuiteResult("equivalence_soundness", 0.5, max_skipped=MAX_INCONCLUSIVE)
    sensitivity = SuiteResult(
        "equivalence_sensitivity", 0.5, max_skipped=MAX_INCONCLUSIVE
    )

    def decide(
        suite: SuiteResult,
        expected: equivalence.Verdict,
        label: str,
        *pair: Tuple[EquationSource, float],
    ) -> None:
        (eq1, x1), (eq2, x2) = pair
        verdict = equivalence.decide_equivalence(eq1, x1, eq2, x2, config)
        if verdict.verdict is equivalence.Verdict.Inconclusive:
            LOG.debug("Inconclusive %s decision: %s", label, verdict.reason)
            suite.skipped += 1
            return
        if verdict.verdict is not expected:
            LOG.warning(
                "%s decision %s (%s), deviation %.3g",
                label,
                verdict.verdict.value,
                verdict.reason,
                verdict.max_deviation,
            )
        suite.record(0.0 if verdict.verdict is expected else 1.0, label)

    def draw_pair(family: Family) -> Tuple[EquationSource, float]:
        for _ in range(DRAW_ATTEMPTS):
            x0 = draw.x0()
            eq = draw.equation(family, x0)
            if _well_conditioned(eq, x0):
                return eq, x0
        raise AbelEquivError(f"no well-conditioned {family.tag} equation")

    def trial(suite: SuiteResult) -> None:
        for family in draw.families(Family):
            eq, x0 = draw_pair(family)
            t = draw.transformation(x0)
            if isinstance(eq, transform.TransformedEquation):
                image = eq.then(t)
            else:
                image = transform.TransformedEquation(t, eq, anchor=x0)
            x1 = expr.evaluate(t.f, x0)
            decide(
                soundness,
                equivalence.Verdict.Equivalent,
                family.tag,
                (eq, x0),
                (image, x1),
            )

            if not isinstance(eq, AbelEquation):
                continue
            perturbed = _perturbed(draw, eq, x0)
            if perturbed is None:
                LOG.debug("No perturbation of %s moved its invariants", family.tag)
                continue
            decide(
                sensitivity,
                equivalence.Verdict.NotEquivalent,
                family.tag,
                (eq, x0),
                (perturbed, x0),
            )

    _run(soundness, trials, trial)
    return [soundness, sensitivity]


def run_verify(
    config: Optional[RunConfig] = None, source: Optional[EquationSource] = None
) -> VerifyReport:
    """
    Run every suite with the configured seed and trial count. With a source,
    the family-specific suites use it instead of random equations.
    """
    config = config or RunConfig()
    trials = config.trials
    LOG.info("Running verification, seed %d, %d trials", config.seed, trials)

    def draw() -> _Trials:
        return _Trials(config.seed, source)

    suites: List[SuiteResult] = [
        jet_ring_laws(draw(), trials, config.order),
        group_laws(draw(), trials, config.order),
        class_preservation(draw(), trials),
        absolute_invariance(draw(), trials),
        weights(draw(), trials),
        cubic_worked_case(),
        *syzygy(draw(), trials),
        *singular_embeddings(draw(), trials),
        infinitesimal_invariance(draw(), trials),
        flow_consistency(draw(), trials),
        canonical_closure(draw(), trials, config.order),
        *equivalence_decisions(draw(), trials, config),
    ]
    return VerifyReport(config.seed, trials, suites)
