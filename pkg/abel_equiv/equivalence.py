"""
Signature curves and the local equivalence decision.

An equation is sampled into the space of its basic absolute invariants and
their first invariant derivatives. Two equations of one family are locally
equivalent when their signature curves coincide, which is checked on
overlapping arcs parametrized by a common component. Curves are cut where
neighbouring samples no longer resolve them, and when the second equation
is at hand it is evaluated exactly at the parameter values of the first.
"""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, TextIO, Tuple

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from abel_equiv import invariants
from abel_equiv.config import RunConfig
from abel_equiv.errors import AbelEquivError, FamilyMismatch
from abel_equiv.model import (
    DEFAULT_TOL_ZERO,
    EquationSource,
    Family,
    OrbitClass,
    OrbitTag,
    classify_point,
)

LOG = logging.getLogger("equivalence")

# Components within this fraction of the best spread tie for the parameter
PARAMETER_TIE = 0.05
# Points per window used to decide that a singular class holds identically
WINDOW_POINTS = 16
# Relative trapezoid error above which a step between samples is unresolved
RESOLUTION = 5e-2
# Changes below this relative size count as flat
FLAT_CHANGE = 1e-8
# Points of an arc evaluated exactly on the other equation
MATCH_POINTS = 33
MIN_MATCHED = 3
NEWTON_STEPS = 40
NEWTON_TOL = 1e-12

# Singular classes that form a single orbit: relative invariant that vanishes
# and the label reported for it
SINGLE_ORBIT_CLASSES: Dict[OrbitTag, Tuple[str, str]] = {
    OrbitTag.SingularCubicS3Zero: ("s3", "singular class s3=0"),
    OrbitTag.SingularQuarticL1Zero: ("L1", "singular class L1=0, equivalent to Y'=Y^4"),
    OrbitTag.SingularQuinticM2Zero: ("M2", "singular class M2=0, equivalent to Y'=Y^5"),
}


class Verdict(Enum):
    Equivalent = "Equivalent"
    NotEquivalent = "NotEquivalent"
    Inconclusive = "Inconclusive"


@dataclass(frozen=True)
class SignatureSample:
    x: float
    values: Tuple[float, ...]
    # x-derivatives of the values
    slopes: Tuple[float, ...]
    defined: bool


@dataclass(frozen=True)
class SignatureCurve:
    family: Family
    components: Tuple[str, ...]
    samples: Tuple[SignatureSample, ...]

    def __post_init__(self) -> None:
        if len(self.components) != self.family.signature_dimension:
            raise ValueError(
                f"{self.family.tag} signatures have "
                f"{self.family.signature_dimension} components"
            )
        xs = [s.x for s in self.samples]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("signature samples must be strictly increasing in x")

    @property
    def defined_fraction(self) -> float:
        if not self.samples:
            return 0.0
        return sum(s.defined for s in self.samples) / len(self.samples)


@dataclass(frozen=True)
class EquivalenceVerdict:
    verdict: Verdict
    reason: str
    overlap_fraction: float = 0.0
    max_deviation: float = math.nan
    parameter: Optional[str] = None

    def asdict(self) -> Dict[str, object]:
        return {
            "verdict": self.verdict.value,
            "reason": self.reason,
            "overlap_fraction": self.overlap_fraction,
            "max_deviation": self.max_deviation,
            "parameter": self.parameter,
        }


@dataclass(frozen=True)
class RegularityReport:
    orbit: OrbitClass
    # at least one signature component has a nonvanishing invariant derivative
    local_coordinate: bool
    parameter: Optional[str]
    derivatives: Dict[str, float] = field(default_factory=dict)

    @property
    def regular(self) -> bool:
        return self.orbit.regular and self.local_coordinate


def signature_components(family: Family) -> Tuple[Tuple[str, int], ...]:
    """
    (invariant, number of invariant derivatives) per signature component
    """
    basic = invariants.basic_invariants(family)
    return tuple((name, 0) for name in basic) + tuple((name, 1) for name in basic)


def component_names(family: Family) -> Tuple[str, ...]:
    return tuple(
        invariants.component_name(name, k) for name, k in signature_components(family)
    )


def sample_order(family: Family) -> int:
    """
    Jet order for one signature sample, values and x-derivatives included
    """
    return 1 + max(
        invariants.required_order(family, name, k)
        for name, k in signature_components(family)
    )


def sample_at(
    source: EquationSource, x: float, tol: float = DEFAULT_TOL_ZERO
) -> SignatureSample:
    family = source.family
    size = family.signature_dimension
    undefined = SignatureSample(x, (math.nan,) * size, (math.nan,) * size, False)

    try:
        point = source.jet_point(x, sample_order(family))
        if not classify_point(point, tol).regular:
            LOG.debug("Masking sample at %s: singular orbit", x)
            return undefined
        jets = [
            invariants.nabla_jet(point, name, k, tol)
            for name, k in signature_components(family)
        ]
    except AbelEquivError as ex:
        LOG.debug("Masking sample at %s: %s", x, ex)
        return undefined

    return SignatureSample(
        x,
        tuple(j.value for j in jets),
        tuple(j.derivative().value for j in jets),
        True,
    )


def signature(
    source: EquationSource,
    x_from: float,
    x_to: float,
    n_samples: int = 128,
    tol: float = DEFAULT_TOL_ZERO,
    threads: int = 1,
) -> SignatureCurve:
    if not x_from < x_to:
        raise ValueError(f"empty sampling interval [{x_from}, {x_to}]")
    if n_samples < 8:
        raise ValueError(f"at least 8 samples needed, got {n_samples}")

    grid = np.linspace(x_from, x_to, n_samples)
    with ThreadPoolExecutor(max_workers=threads) as executor:
        samples = tuple(executor.map(lambda x: sample_at(source, float(x), tol), grid))

    curve = SignatureCurve(source.family, component_names(source.family), samples)
    LOG.debug(
        "Sampled %s on [%s, %s]: %.0f%% defined",
        source.family.tag,
        x_from,
        x_to,
        100 * curve.defined_fraction,
    )
    return curve


def regularity(
    source: EquationSource, x0: float, tol: float = DEFAULT_TOL_ZERO
) -> RegularityReport:
    """
    Orbit regularity at x0 and whether a signature component can serve as a
    local coordinate, that is has a nonvanishing invariant derivative
    """
    family = source.family
    order = max(
        invariants.required_order(family, name, k + 1)
        for name, k in signature_components(family)
    )
    point = source.jet_point(x0, order)
    orbit = classify_point(point, tol)
    if not orbit.regular:
        return RegularityReport(orbit, False, None)

    derivatives: Dict[str, float] = {}
    best, best_score = None, 0.0
    for name, k in signature_components(family):
        label = invariants.component_name(name, k)
        value = invariants.nabla_power_point(point, name, k, tol)
        slope = invariants.nabla_power_point(point, name, k + 1, tol)
        if not (value.defined and slope.defined):
            continue
        derivatives[label] = slope.value
        score = abs(slope.value) / (1.0 + abs(value.value))
        if score > tol and score > best_score:
            best, best_score = label, score

    return RegularityReport(orbit, best is not None, best, derivatives)


def _scaled_gap(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.abs(a - b) / np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))


def _resolved(a: SignatureSample, b: SignatureSample) -> bool:
    """
    The trapezoid rule on the sampled x-derivatives reproduces every
    component's change between two neighbouring samples
    """
    h = b.x - a.x
    for va, vb, sa, sb in zip(a.values, b.values, a.slopes, b.slopes):
        change = vb - va
        trapezoid = 0.5 * h * (sa + sb)
        size = abs(change) + 0.5 * h * (abs(sa) + abs(sb))
        floor = FLAT_CHANGE * (1.0 + abs(va) + abs(vb))
        if abs(change - trapezoid) > RESOLUTION * size + floor:
            return False
    return True


def _runs(curve: SignatureCurve) -> List[Tuple[int, int]]:
    """
    Index ranges (inclusive) of defined samples joined by resolved steps
    """
    runs: List[Tuple[int, int]] = []
    start: Optional[int] = None
    for i, sample in enumerate(curve.samples):
        if not sample.defined:
            if start is not None:
                runs.append((start, i - 1))
            start = None
        elif start is None:
            start = i
        elif not _resolved(curve.samples[i - 1], sample):
            LOG.debug("Unresolved step at x=%s", sample.x)
            runs.append((start, i - 1))
            start = i
    if start is not None:
        runs.append((start, len(curve.samples) - 1))
    return runs


def regular_arc(curve: SignatureCurve, x: float) -> SignatureCurve:
    """
    The resolved run of defined samples around the sample nearest x; empty
    when that sample is masked
    """
    if not curve.samples:
        return curve
    nearest = int(np.argmin([abs(s.x - x) for s in curve.samples]))
    for start, end in _runs(curve):
        if start <= nearest <= end:
            return SignatureCurve(
                curve.family, curve.components, curve.samples[start : end + 1]
            )
    return SignatureCurve(curve.family, curve.components, ())


def _spread(curve: SignatureCurve, index: int) -> float:
    values = [s.values[index] for s in curve.samples if s.defined]
    if len(values) < 2:
        return 0.0
    top = max(abs(v) for v in values)
    return (max(values) - min(values)) / (1.0 + top)


def choose_parameter(s1: SignatureCurve, s2: SignatureCurve) -> Optional[int]:
    """
    Index of the component with the largest scaled spread on both curves;
    ties within PARAMETER_TIE go to the lower index
    """
    scores = [
        min(_spread(s1, i), _spread(s2, i)) for i in range(len(s1.components))
    ]
    best = max(scores)
    if best <= 0.0:
        return None
    return next(i for i, s in enumerate(scores) if s >= (1.0 - PARAMETER_TIE) * best)


@dataclass(frozen=True)
class _Segment:
    """
    A monotone arc, reparametrized by one component (increasing)
    """

    index: int
    parameter: np.ndarray
    x: np.ndarray
    # the other components, in signature order
    values: np.ndarray
    # derivatives of the values with respect to the parameter
    slopes: np.ndarray

    @property
    def low(self) -> float:
        return float(self.parameter[0])

    @property
    def high(self) -> float:
        return float(self.parameter[-1])

    def interpolate(self, at: np.ndarray) -> np.ndarray:
        columns = [
            CubicHermiteSpline(self.parameter, self.values[:, i], self.slopes[:, i])(at)
            for i in range(self.values.shape[1])
        ]
        return np.stack(columns, axis=1)


def monotone_segments(
    curve: SignatureCurve, parameter: int, min_samples: int = 3
) -> List[_Segment]:
    """
    Maximal resolved arcs of defined samples on which the parameter
    component is strictly monotone
    """
    segments: List[_Segment] = []
    for first, last in _runs(curve):
        run = curve.samples[first : last + 1]
        start = 0
        while start < len(run) - 1:
            direction = np.sign(
                run[start + 1].values[parameter] - run[start].values[parameter]
            )
            end = start + 1
            while (
                end + 1 < len(run)
                and np.sign(run[end + 1].values[parameter] - run[end].values[parameter])
                == direction
            ):
                end += 1
            if direction != 0:
                segment = _segment(run[start : end + 1], parameter, direction)
                if segment is not None and len(segment.parameter) >= min_samples:
                    segments.append(segment)
            start = end
    return segments


def _segment(
    samples: Sequence[SignatureSample], parameter: int, direction: float
) -> Optional[_Segment]:
    # the parameter must also be monotone in x at the samples themselves
    samples = [s for s in samples if np.sign(s.slopes[parameter]) == direction]
    if not samples:
        return None
    others = [i for i in range(len(samples[0].values)) if i != parameter]
    t = np.array([s.values[parameter] for s in samples])
    dt = np.array([s.slopes[parameter] for s in samples])
    xs = np.array([s.x for s in samples])
    values = np.array([[s.values[i] for i in others] for s in samples])
    slopes = np.array([[s.slopes[i] for i in others] for s in samples]) / dt[:, None]
    if t[0] > t[-1]:
        t, xs, values, slopes = t[::-1], xs[::-1], values[::-1], slopes[::-1]
    return _Segment(parameter, t, xs, values, slopes)


def _parameter_at(
    source: EquationSource, x: float, index: int, tol: float
) -> Optional[Tuple[float, float]]:
    """
    Value and x-derivative of one signature component at x, or None where
    the sample would be masked
    """
    family = source.family
    name, k = signature_components(family)[index]
    try:
        point = source.jet_point(x, sample_order(family))
        if not classify_point(point, tol).regular:
            return None
        jet = invariants.nabla_jet(point, name, k, tol)
    except AbelEquivError:
        return None
    return jet.value, jet.derivative().value


def solve_parameter(
    source: EquationSource, segment: _Segment, target: float, tol: float
) -> Optional[float]:
    """
    The x on the segment where its parameter component equals target, by
    Newton steps on the component's jet kept inside the bracketing samples
    """
    j = int(np.searchsorted(segment.parameter, target))
    j = min(max(j, 1), len(segment.parameter) - 1)
    below, above = float(segment.x[j - 1]), float(segment.x[j])
    t_below, t_above = segment.parameter[j - 1], segment.parameter[j]
    x = below + (target - t_below) / (t_above - t_below) * (above - below)

    for _ in range(NEWTON_STEPS):
        evaluated = _parameter_at(source, x, segment.index, tol)
        if evaluated is None:
            return None
        value, slope = evaluated
        residual = value - target
        if abs(residual) <= NEWTON_TOL * max(1.0, abs(target)):
            return x
        if residual < 0.0:
            below = x
        else:
            above = x
        candidate = x - residual / slope if slope != 0.0 else math.nan
        if not min(below, above) < candidate < max(below, above):
            candidate = 0.5 * (below + above)
        if candidate == x:
            return x
        x = candidate
    return None


def _exact_gaps(
    a: _Segment,
    b: _Segment,
    inside: np.ndarray,
    source: EquationSource,
    tol: float,
) -> List[float]:
    """
    Scaled gaps between samples of a and the second equation evaluated where
    its parameter takes the same values
    """
    picks = np.unique(np.linspace(0, len(inside) - 1, MATCH_POINTS).round())
    gaps: List[float] = []
    for i in inside[picks.astype(int)]:
        x = solve_parameter(source, b, float(a.parameter[i]), tol)
        if x is None:
            continue
        sample = sample_at(source, x, tol)
        if not sample.defined:
            continue
        other = np.array([v for j, v in enumerate(sample.values) if j != b.index])
        gaps.append(float(np.max(_scaled_gap(a.values[i], other))))
    return gaps


def _compare(
    a: _Segment,
    b: _Segment,
    source: Optional[EquationSource] = None,
    tol: float = DEFAULT_TOL_ZERO,
) -> Optional[Tuple[float, float]]:
    """
    (overlap fraction of the shorter range, scaled sup deviation) or None
    when the parameter ranges do not overlap or too few points match
    """
    low, high = max(a.low, b.low), min(a.high, b.high)
    if high <= low:
        return None
    shorter = min(a.high - a.low, b.high - b.low)
    overlap = (high - low) / shorter

    if source is None:
        count = max(16, len(a.parameter) + len(b.parameter))
        grid = np.linspace(low, high, count)
        gaps = _scaled_gap(a.interpolate(grid), b.interpolate(grid))
        return overlap, float(np.max(gaps))

    inside = np.nonzero((a.parameter >= low) & (a.parameter <= high))[0]
    if len(inside) < MIN_MATCHED:
        return None
    gaps = _exact_gaps(a, b, inside, source, tol)
    if len(gaps) < MIN_MATCHED:
        LOG.debug("Only %d of %d points matched", len(gaps), len(inside))
        return None
    return overlap, max(gaps)


def curves_match(
    s1: SignatureCurve,
    s2: SignatureCurve,
    tol_rel: float = 1e-5,
    min_overlap: float = 0.5,
    source2: Optional[EquationSource] = None,
    tol: float = DEFAULT_TOL_ZERO,
) -> EquivalenceVerdict:
    """
    Compare two signature curves on overlapping monotone arcs. With source2,
    the second curve is evaluated exactly at the parameter values of the
    first instead of being interpolated.
    """
    if s1.family is not s2.family:
        raise FamilyMismatch(f"cannot compare {s1.family.tag} and {s2.family.tag}")

    index = choose_parameter(s1, s2)
    if index is None:
        return EquivalenceVerdict(
            Verdict.Inconclusive, "signature degenerates to a point or is masked"
        )
    parameter = s1.components[index]

    segments1 = monotone_segments(s1, index)
    segments2 = monotone_segments(s2, index)
    if not segments1 or not segments2:
        return EquivalenceVerdict(
            Verdict.Inconclusive, "no monotone segment", parameter=parameter
        )

    comparisons = [
        result
        for a in segments1
        for b in segments2
        if (result := _compare(a, b, source2, tol)) is not None
    ]
    if not comparisons:
        return EquivalenceVerdict(
            Verdict.Inconclusive, "disjoint parameter ranges", parameter=parameter
        )

    matching = [c for c in comparisons if c[1] <= tol_rel]
    if matching:
        overlap, deviation = max(matching, key=lambda c: c[0])
        if overlap >= min_overlap:
            return EquivalenceVerdict(
                Verdict.Equivalent, "signatures coincide", overlap, deviation, parameter
            )

    differing = [c for c in comparisons if c[1] > 10.0 * tol_rel]
    if differing and not matching:
        overlap, deviation = max(differing, key=lambda c: c[0])
        return EquivalenceVerdict(
            Verdict.NotEquivalent, "signatures differ", overlap, deviation, parameter
        )

    overlap, deviation = max(comparisons, key=lambda c: c[0])
    reason = "overlap too small" if matching else "deviation between tolerances"
    return EquivalenceVerdict(
        Verdict.Inconclusive, reason, overlap, deviation, parameter
    )


def _vanishes_on_window(
    source: EquationSource, x0: float, window: float, name: str, tol: float
) -> bool:
    """
    The relative invariant is negligible at every window point that
    can be evaluated, and at least half of them can
    """
    entry = invariants.spec_of(source.family, name)
    evaluated = 0
    for x in np.linspace(x0 - window, x0 + window, WINDOW_POINTS):
        try:
            point = source.jet_point(float(x), entry.order)
            _, negligible = invariants.relative_value(point, name, tol)
        except AbelEquivError as ex:
            LOG.debug("Skipping window point %s: %s", x, ex)
            continue
        if not negligible:
            return False
        evaluated += 1
    return 2 * evaluated >= WINDOW_POINTS


def decide_equivalence(
    source1: EquationSource,
    x1: float,
    source2: EquationSource,
    x2: float,
    config: Optional[RunConfig] = None,
) -> EquivalenceVerdict:
    config = config or RunConfig()
    if source1.family is not source2.family:
        raise FamilyMismatch(
            f"cannot compare {source1.family.tag} and {source2.family.tag}"
        )
    tol = config.tol_zero

    report1 = regularity(source1, x1, tol)
    report2 = regularity(source2, x2, tol)
    tag1, tag2 = report1.orbit.tag, report2.orbit.tag

    if tag1 is not tag2:
        LOG.info("Orbit classes differ: %s and %s", tag1.value, tag2.value)
        return EquivalenceVerdict(
            Verdict.NotEquivalent,
            f"orbit classes differ: {tag1.value} and {tag2.value}",
        )

    if tag1 is not OrbitTag.Regular:
        if tag1 in SINGLE_ORBIT_CLASSES:
            name, label = SINGLE_ORBIT_CLASSES[tag1]
            if _vanishes_on_window(
                source1, x1, config.window, name, tol
            ) and _vanishes_on_window(source2, x2, config.window, name, tol):
                return EquivalenceVerdict(Verdict.Equivalent, label, 1.0, 0.0)
        return EquivalenceVerdict(
            Verdict.Inconclusive, f"singular orbit class {tag1.value}"
        )

    if not (report1.local_coordinate and report2.local_coordinate):
        return EquivalenceVerdict(
            Verdict.Inconclusive, "no signature component is a local coordinate"
        )

    arcs = [
        regular_arc(
            signature(
                source,
                x - config.window,
                x + config.window,
                config.samples,
                tol,
                config.threads,
            ),
            x,
        )
        for source, x in ((source1, x1), (source2, x2))
    ]
    LOG.debug("Regular arcs of %d and %d samples", *(len(a.samples) for a in arcs))
    verdict = curves_match(
        arcs[0], arcs[1], config.tol_match, config.min_overlap, source2, tol
    )
    LOG.info(
        "Verdict %s (%s), overlap %.3g, deviation %.3g",
        verdict.verdict.value,
        verdict.reason,
        verdict.overlap_fraction,
        verdict.max_deviation,
    )
    return verdict


def _number(value: float) -> str:
    return format(value, ".17g") if math.isfinite(value) else ""


def write_signature_csv(curve: SignatureCurve, stream: TextIO) -> None:
    """
    Header x,<components>,defined; undefined values are left empty
    """
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["x", *curve.components, "defined"])
    for sample in curve.samples:
        writer.writerow(
            [
                _number(sample.x),
                *(_number(v) for v in sample.values),
                "true" if sample.defined else "false",
            ]
        )
