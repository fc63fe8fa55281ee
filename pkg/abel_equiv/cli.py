import json
import logging
import math
import os
import sys
from argparse import ArgumentParser, Namespace
from typing import Any, Callable, Dict, List, Optional, TextIO

import yaml

from abel_equiv import equivalence, invariants, transform
from abel_equiv.config import OUTPUT_FORMATS, RunConfig, load_config
from abel_equiv.errors import AbelEquivError, ConfigError
from abel_equiv.invariants import Kind
from abel_equiv.model import EquationSource, classify_point, read_document
from abel_equiv.verify import run_verify

logging.basicConfig(
    level=os.environ.get("LOG_LEVEL", "INFO").upper(),
    format="%(asctime)s %(levelname)s [%(name)s]: %(message)s",
)

LOG = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_INTERNAL = 70

VERDICT_EXIT_CODES = {
    equivalence.Verdict.Equivalent: 0,
    equivalence.Verdict.NotEquivalent: 1,
    equivalence.Verdict.Inconclusive: 2,
}


class UsageError(Exception):
    pass


class _Parser(ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def parse_args(argv: Optional[List[str]] = None) -> Namespace:
    # run options, accepted after every subcommand
    common = _Parser(add_help=False)
    common.add_argument(
        "--config",
        default=None,
        help="Path to the configuration file (default: ABEL_EQUIV_CFG_PATH or the "
        "user config directory).",
    )
    common.add_argument("--order", type=int, help="Jet order.")
    common.add_argument("--tol-zero", type=float, help="Vanishing tolerance.")
    common.add_argument("--tol-match", type=float, help="Signature match tolerance.")
    common.add_argument("--min-overlap", type=float, help="Minimum arc overlap.")
    common.add_argument("--window", type=float, help="Signature window radius.")
    common.add_argument("--samples", type=int, help="Signature samples per window.")
    common.add_argument("--trials", type=int, help="Trials per verification suite.")
    common.add_argument("--seed", type=int, help="Seed of the verification suites.")
    common.add_argument("--format", choices=OUTPUT_FORMATS, help="Output format.")

    parser = _Parser(prog="abel-equiv")
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser(
        "invariants", parents=[common], help="Evaluate every invariant at a point."
    )
    sub.add_argument("--eq", required=True, help="Equation file.")
    sub.add_argument("--at", type=float, required=True, help="Base point.")

    sub = commands.add_parser(
        "classify", parents=[common], help="Orbit class at a point."
    )
    sub.add_argument("--eq", required=True, help="Equation file.")
    sub.add_argument("--at", type=float, required=True, help="Base point.")

    sub = commands.add_parser(
        "signature", parents=[common], help="Sample the signature curve."
    )
    sub.add_argument("--eq", required=True, help="Equation file.")
    sub.add_argument("--from", dest="x_from", type=float, required=True)
    sub.add_argument("--to", dest="x_to", type=float, required=True)

    sub = commands.add_parser(
        "equivalent", parents=[common], help="Decide local equivalence."
    )
    sub.add_argument("--eq1", required=True, help="First equation file.")
    sub.add_argument("--eq2", required=True, help="Second equation file.")
    sub.add_argument("--at1", type=float, required=True)
    sub.add_argument("--at2", type=float, required=True)

    sub = commands.add_parser(
        "transform", parents=[common], help="Apply a point transformation."
    )
    sub.add_argument("--eq", required=True, help="Equation file.")
    sub.add_argument("--at", type=float, required=True, help="Base point.")
    sub.add_argument("--f", default="x", help="New independent variable f(x).")
    sub.add_argument("--g", default="1", help="Scale g(x) of y.")
    sub.add_argument("--h", default="0", help="Shift h(x) of y.")
    sub.add_argument(
        "--emit-equation",
        default=None,
        help="Write the transformed equation to this file ('-' for stdout).",
    )

    sub = commands.add_parser(
        "verify", parents=[common], help="Run the property suites."
    )
    sub.add_argument("--eq", default=None, help="Use this equation where possible.")

    return parser.parse_args(argv)


def _run_config(args: Namespace) -> RunConfig:
    config = load_config(args.config)
    return config.override(
        order=args.order,
        tol_zero=args.tol_zero,
        tol_match=args.tol_match,
        min_overlap=args.min_overlap,
        window=args.window,
        samples=args.samples,
        trials=args.trials,
        seed=args.seed,
        output_format=args.format,
    )


def load_source(path: str) -> EquationSource:
    return transform.load_source(read_document(path))


# Output


def _json_value(value: Any, indent: int) -> str:
    pad = "  " * (indent + 1)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [
            f"{pad}{json.dumps(str(k))}: {_json_value(value[k], indent + 1)}"
            for k in sorted(value)
        ]
        return "{\n" + ",\n".join(items) + "\n" + "  " * indent + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        items = [f"{pad}{_json_value(v, indent + 1)}" for v in value]
        return "[\n" + ",\n".join(items) + "\n" + "  " * indent + "]"
    if isinstance(value, bool) or value is None:
        return json.dumps(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".17g") if math.isfinite(value) else "null"
    return json.dumps(str(value))


def to_json(report: Dict[str, Any]) -> str:
    """
    Sorted keys, floats with 17 significant digits, null for undefined values
    """
    return _json_value(report, 0) + "\n"


def _text_lines(value: Any, prefix: str = "") -> List[str]:
    if isinstance(value, dict):
        lines: List[str] = []
        for k in sorted(value):
            lines += _text_lines(value[k], f"{prefix}{k}.")
        return lines
    if isinstance(value, float):
        value = format(value, ".17g") if math.isfinite(value) else "undefined"
    return [f"{prefix[:-1]}: {value}"]


def emit(report: Dict[str, Any], output_format: str, stream: TextIO) -> None:
    if output_format == "text":
        stream.write("\n".join(_text_lines(report)) + "\n")
    else:
        stream.write(to_json(report))


# Commands


def cmd_invariants(args: Namespace, config: RunConfig, stream: TextIO) -> int:
    source = load_source(args.eq)
    family = source.family
    absolute = invariants.names(family, Kind.ABSOLUTE)
    relative = invariants.names(family, Kind.RELATIVE)
    needed = max(
        [invariants.required_order(family, name, 1) for name in absolute]
        + [invariants.required_order(family, name) for name in relative]
    )
    point = source.jet_point(args.at, max(config.order, needed))

    values: Dict[str, Any] = {}
    defined: Dict[str, bool] = {}
    for name, value in invariants.relative_invariants(family, point.jets).items():
        values[name], defined[name] = value.value, value.defined
    for kind in (Kind.ABSOLUTE, Kind.AUXILIARY):
        for name, value in invariants.absolute_invariants(
            family, point.jets, config.tol_zero, kind
        ).items():
            values[name] = value.value if value.defined else None
            defined[name] = value.defined
    for name in absolute:
        value = invariants.nabla_power_point(point, name, 1, config.tol_zero)
        values[value.name] = value.value if value.defined else None
        defined[value.name] = value.defined
    derivation = invariants.derivation_coefficient(family, point.jets, config.tol_zero)

    emit(
        {
            "family": family.tag,
            "at": args.at,
            "order": point.order,
            "values": values,
            "defined": defined,
            "derivation": derivation.value if derivation.defined else None,
            "orbit": classify_point(point, config.tol_zero).tag.value,
        },
        config.output_format,
        stream,
    )
    return EXIT_OK


def cmd_classify(args: Namespace, config: RunConfig, stream: TextIO) -> int:
    source = load_source(args.eq)
    orbit = classify_point(source.jet_point(args.at, 2), config.tol_zero)
    emit(
        {
            "family": source.family.tag,
            "at": args.at,
            "tag": orbit.tag.value,
            "regular": orbit.regular,
            "witness": orbit.witness,
        },
        config.output_format,
        stream,
    )
    return EXIT_OK


def cmd_signature(args: Namespace, config: RunConfig, stream: TextIO) -> int:
    if not args.x_from < args.x_to:
        raise UsageError(f"empty sampling interval [{args.x_from}, {args.x_to}]")
    source = load_source(args.eq)
    curve = equivalence.signature(
        source,
        args.x_from,
        args.x_to,
        config.samples,
        config.tol_zero,
        config.threads,
    )
    output_format = args.format or "csv"
    if output_format == "csv":
        equivalence.write_signature_csv(curve, stream)
    else:
        emit(
            {
                "family": curve.family.tag,
                "components": list(curve.components),
                "samples": [
                    {
                        "x": s.x,
                        "values": dict(zip(curve.components, s.values)),
                        "defined": s.defined,
                    }
                    for s in curve.samples
                ],
            },
            output_format,
            stream,
        )
    return EXIT_OK


def cmd_equivalent(args: Namespace, config: RunConfig, stream: TextIO) -> int:
    source1, source2 = load_source(args.eq1), load_source(args.eq2)
    verdict = equivalence.decide_equivalence(
        source1, args.at1, source2, args.at2, config
    )
    emit(verdict.asdict(), config.output_format, stream)
    return VERDICT_EXIT_CODES[verdict.verdict]


def cmd_transform(args: Namespace, config: RunConfig, stream: TextIO) -> int:
    source = load_source(args.eq)
    t = transform.PointTransformation.create(args.f, args.g, args.h)
    image = transform.apply(t, source, args.at, config.order)

    if args.emit_equation is not None:
        document = transform.document_of_source(source, then=t, anchor=args.at)
        text = yaml.safe_dump(document, sort_keys=False, line_break="\n")
        if args.emit_equation == "-":
            stream.write(text)
        else:
            LOG.info("Writing transformed equation %s", args.emit_equation)
            with open(args.emit_equation, "w", encoding="utf-8") as f:
                f.write(text)
        return EXIT_OK

    emit(
        {
            "family": image.family.tag,
            "at": image.base_point,
            "transformation": t.asdict(),
            "derivatives": {
                name: [float(v) for v in image[name].derivatives()]
                for name in image.family.coefficient_names
            },
        },
        config.output_format,
        stream,
    )
    return EXIT_OK


def cmd_verify(args: Namespace, config: RunConfig, stream: TextIO) -> int:
    source = load_source(args.eq) if args.eq else None
    report = run_verify(config, source)
    emit(report.asdict(), config.output_format, stream)
    return EXIT_OK if report.passed else 1


COMMANDS: Dict[str, Callable[[Namespace, RunConfig, TextIO], int]] = {
    "invariants": cmd_invariants,
    "classify": cmd_classify,
    "signature": cmd_signature,
    "equivalent": cmd_equivalent,
    "transform": cmd_transform,
    "verify": cmd_verify,
}


def main(argv: Optional[List[str]] = None, stream: Optional[TextIO] = None) -> int:
    stream = stream or sys.stdout
    try:
        args = parse_args(argv)
        config = _run_config(args)
    except (UsageError, ConfigError) as ex:
        LOG.error("Usage: %s", ex)
        return EXIT_USAGE

    # Log runtime parameters and env before running the command
    LOG.info("CLI args: command=%s, config=%s", args.command, args.config)
    LOG.info(
        "Env: ABEL_EQUIV_CFG_PATH=%s, ABEL_EQUIV_THREADS=%s, LOG_LEVEL=%s",
        os.environ.get("ABEL_EQUIV_CFG_PATH", "(not set)"),
        os.environ.get("ABEL_EQUIV_THREADS", "(not set)"),
        os.environ.get("LOG_LEVEL", "(not set)"),
    )
    LOG.info(
        "Runtime: order=%d, tol_zero=%g, tol_match=%g, min_overlap=%g, window=%g, "
        "samples=%d, trials=%d, seed=%d, threads=%d",
        config.order,
        config.tol_zero,
        config.tol_match,
        config.min_overlap,
        config.window,
        config.samples,
        config.trials,
        config.seed,
        config.threads,
    )

    try:
        return COMMANDS[args.command](args, config, stream)
    except UsageError as ex:
        LOG.error("Usage: %s", ex)
        return EXIT_USAGE
    except (OSError, yaml.YAMLError, AbelEquivError) as ex:
        LOG.error("%s: %s", type(ex).__name__, ex)
        return EXIT_DATA
    except Exception:
        LOG.exception("Internal error")
        return EXIT_INTERNAL
