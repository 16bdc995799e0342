"""Command-line interface for the design solvers and the simulator.

Subcommands:

    design     fixed three-outcome design from hazard-ratio hypotheses
    gs-design  one-interim design with error spending at the interim
    table      reference grid of fixed designs over standard parameters
    density    estimator density curves and decision regions for plotting
    simulate   Monte-Carlo operating characteristics of a solved design
    analyze    log-rank analysis of a patient-level CSV file

Every subcommand writes text by default and a schema-versioned JSON
result document under ``--format json``; ``table`` and ``density`` also
offer CSV. Structured output keeps full binary64 precision, text output
rounds to the number of decimals in the TTE3_PRECISION environment
variable (default 4). Exit codes: 0 success, 2 invalid inputs or data,
3 numerical failure, 4 I/O failure. Errors print one JSON line on
stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

from . import __version__
from .design import (
    DesignSpec,
    classify_outcome,
    solve_fixed_design,
)
from .errors import (
    DataFormatError,
    InvalidParameterError,
    NumericalError,
    ValidationError,
)
from .numerics import normal_pdf
from .sequential import GSSpec, solve_gs_design
from .trial import (
    RNG_ALGORITHM,
    SimScenario,
    log_rank,
    read_patient_csv,
    simulate_trial,
)

SCHEMA_VERSION = 1
_TOOL_NAME = "tte3"
_PRECISION_ENV = "TTE3_PRECISION"

_EXIT_VALIDATION = 2
_EXIT_NUMERICAL = 3
_EXIT_IO = 4

# reference grid: (hr0, hr1, alpha, beta, eta, pi) per row
TABLE_COLUMNS = ("hr0", "hr1", "alpha", "beta", "eta", "pi", "d", "hr_lower", "hr_upper")
TABLE_GRID = (
    (1.0, 0.50, 0.10, 0.10, 0.80, 0.80),
    (1.0, 0.50, 0.15, 0.15, 0.75, 0.75),
    (1.0, 0.55, 0.10, 0.10, 0.80, 0.80),
    (1.0, 0.55, 0.15, 0.15, 0.75, 0.75),
    (1.0, 0.55, 0.15, 0.15, 0.70, 0.70),
    (1.0, 0.60, 0.10, 0.10, 0.80, 0.80),
    (1.0, 0.60, 0.15, 0.15, 0.75, 0.75),
    (1.0, 0.60, 0.15, 0.15, 0.70, 0.70),
    (1.0, 0.60, 0.20, 0.20, 0.70, 0.70),
    (1.0, 0.65, 0.10, 0.10, 0.80, 0.80),
    (1.0, 0.65, 0.15, 0.15, 0.75, 0.75),
    (1.0, 0.65, 0.15, 0.15, 0.70, 0.70),
    (1.0, 0.65, 0.20, 0.20, 0.70, 0.70),
    (1.0, 0.65, 0.25, 0.25, 0.70, 0.70),
    (1.0, 0.70, 0.10, 0.10, 0.80, 0.80),
    (1.0, 0.70, 0.15, 0.15, 0.75, 0.75),
    (1.0, 0.70, 0.15, 0.15, 0.70, 0.70),
    (1.0, 0.70, 0.20, 0.20, 0.70, 0.70),
    (1.0, 0.70, 0.25, 0.25, 0.70, 0.70),
    (1.0, 0.75, 0.15, 0.15, 0.75, 0.75),
    (1.0, 0.75, 0.15, 0.15, 0.70, 0.70),
    (1.0, 0.75, 0.20, 0.20, 0.70, 0.70),
    (1.0, 0.75, 0.25, 0.25, 0.70, 0.70),
    (1.0, 0.80, 0.20, 0.20, 0.70, 0.70),
    (1.0, 0.80, 0.25, 0.25, 0.70, 0.70),
    (1.1, 0.80, 0.15, 0.15, 0.75, 0.75),
    (1.1, 0.80, 0.15, 0.15, 0.70, 0.70),
    (1.1, 0.80, 0.20, 0.20, 0.70, 0.70),
    (1.1, 0.80, 0.25, 0.25, 0.70, 0.70),
    (1.2, 0.80, 0.10, 0.10, 0.80, 0.80),
    (1.2, 0.80, 0.15, 0.15, 0.75, 0.75),
    (1.2, 0.80, 0.15, 0.15, 0.70, 0.70),
    (1.2, 0.80, 0.20, 0.20, 0.70, 0.70),
    (1.2, 0.80, 0.25, 0.25, 0.70, 0.70),
)

_DESIGN_NUMERIC_FIELDS = ("hr0", "hr1", "alpha", "beta", "pi", "eta", "r")
_GS_NUMERIC_FIELDS = _DESIGN_NUMERIC_FIELDS + ("t1", "alpha1", "beta1")


def _precision() -> int:
    raw = os.environ.get(_PRECISION_ENV)
    if raw is None:
        return 4
    try:
        value = int(raw)
    except ValueError:
        raise InvalidParameterError(
            f"{_PRECISION_ENV} must be an integer, got {raw!r}"
        ) from None
    if not 1 <= value <= 17:
        raise InvalidParameterError(
            f"{_PRECISION_ENV} must lie between 1 and 17, got {value}"
        )
    return value


def _fmt(value, precision: int) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.{precision}f}"
    if value is None:
        return "-"
    return str(value)


def _json_ready(value):
    """Deep-copy with non-finite floats replaced by null."""
    if isinstance(value, dict):
        return {key: _json_ready(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_ready(item) for item in value]
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _flatten(value, prefix="", out=None):
    if out is None:
        out = []
    if isinstance(value, dict):
        for key, item in value.items():
            _flatten(item, f"{prefix}{key}." if isinstance(item, dict) else f"{prefix}{key}", out)
    else:
        out.append((prefix, value))
    return out


def _render_pairs(document: dict, precision: int) -> str:
    pairs = _flatten(document["outputs"])
    width = max(len(key) for key, _ in pairs)
    lines = [f"# {_TOOL_NAME} {document['command']}"]
    lines.extend(f"{key:<{width}}  {_fmt(val, precision)}" for key, val in pairs)
    return "\n".join(lines) + "\n"


def _render_columns(header, rows, precision: int) -> str:
    cells = [list(header)] + [[_fmt(v, precision) for v in row] for row in rows]
    widths = [max(len(line[i]) for line in cells) for i in range(len(header))]
    lines = ["  ".join(f"{c:<{w}}" for c, w in zip(line, widths)).rstrip() for line in cells]
    return "\n".join(lines) + "\n"


def _render_json(document: dict) -> str:
    return json.dumps(_json_ready(document), indent=2, sort_keys=True) + "\n"


def _csv_text(header, rows) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def _document(command: str, inputs: dict, outputs: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": _TOOL_NAME, "version": __version__},
        "command": command,
        "inputs": inputs,
        "outputs": outputs,
    }


def _emit(text: str, output_path) -> None:
    if output_path is None:
        sys.stdout.write(text)
    else:
        with open(output_path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)


# ---------------------------------------------------------------------------
# request files and input resolution


def _load_json_object(path, kind: str) -> dict:
    with open(path, encoding="utf-8") as handle:
        try:
            raw = json.load(handle)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{kind} {path}: invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise DataFormatError(f"{kind} {path}: expected a single JSON object")
    return raw


def _load_request(path, numeric_fields, allow_round_flag: bool) -> dict:
    allowed = set(numeric_fields) | {"format", "output"}
    if allow_round_flag:
        allowed.add("round_events")
    raw = _load_json_object(path, "request file")
    unknown = sorted(set(raw) - allowed)
    if unknown:
        raise DataFormatError(
            f"request file {path}: unknown fields: {', '.join(unknown)}"
        )
    for key, value in raw.items():
        if key in ("format", "output"):
            if not isinstance(value, str):
                raise DataFormatError(f"request file {path}: {key} must be a string")
        elif key == "round_events":
            if not isinstance(value, bool):
                raise DataFormatError(f"request file {path}: round_events must be a boolean")
        elif isinstance(value, bool) or not isinstance(value, (int, float)):
            raise DataFormatError(f"request file {path}: {key} must be a number")
    return raw


def _resolve_inputs(args, numeric_fields, required, allow_round_flag: bool) -> dict:
    """Merge inline flags with an optional request file into one inputs dict."""
    request = {}
    if getattr(args, "request", None) is not None:
        request = _load_request(args.request, numeric_fields, allow_round_flag)
        inline = [f for f in numeric_fields if getattr(args, f) is not None]
        if allow_round_flag and args.round_events is not None:
            inline.append("round_events")
        if inline:
            raise InvalidParameterError(
                f"--request conflicts with inline flags: {', '.join(inline)}"
            )
        source = request
    else:
        source = {f: getattr(args, f) for f in numeric_fields}
        if allow_round_flag:
            source["round_events"] = args.round_events

    defaults = {"r": 1.0, "alpha1": 0.0, "beta1": 0.0, "round_events": True}
    values = {}
    missing = []
    for field in numeric_fields:
        value = source.get(field)
        if value is None:
            if field in defaults:
                value = defaults[field]
            elif field in required:
                missing.append(field)
                continue
        values[field] = value
    if missing:
        raise InvalidParameterError(f"missing required inputs: {', '.join(missing)}")
    if allow_round_flag:
        value = source.get("round_events")
        values["round_events"] = defaults["round_events"] if value is None else value
    if request:
        if args.format is None and "format" in request:
            args.format = request["format"]
        if args.output is None and "output" in request:
            args.output = request["output"]
    return values


def _spec_from_inputs(inputs: dict) -> DesignSpec:
    return DesignSpec(
        hr0=float(inputs["hr0"]),
        hr1=float(inputs["hr1"]),
        alpha=float(inputs["alpha"]),
        beta=float(inputs["beta"]),
        pi=float(inputs["pi"]),
        eta=float(inputs["eta"]),
        rand_ratio_r=float(inputs["r"]),
    )


def _gs_spec_from_inputs(inputs: dict) -> GSSpec:
    return GSSpec(
        base=_spec_from_inputs(inputs),
        info_fraction_t1=float(inputs["t1"]),
        alpha1=float(inputs["alpha1"]),
        beta1=float(inputs["beta1"]),
    )


# ---------------------------------------------------------------------------
# output assembly


def _fixed_outputs(design) -> dict:
    d = design.n_events_d
    return {
        "n_events_d": int(d) if float(d).is_integer() else float(d),
        "boundary_lower_loghr": design.boundary_lower_loghr,
        "boundary_upper_loghr": design.boundary_upper_loghr,
        "boundary_lower_hr": design.boundary_lower_hr,
        "boundary_upper_hr": design.boundary_upper_hr,
        "achieved_alpha": design.achieved_alpha,
        "achieved_beta": design.achieved_beta,
        "achieved_pi": design.achieved_pi,
        "achieved_eta": design.achieved_eta,
        "two_outcome_equivalent": design.two_outcome_equivalent,
    }


def _gs_outputs(design) -> dict:
    def scale_pair(loghr):
        # an infinite boundary means no interim decision in that direction
        if not math.isfinite(loghr):
            return None, None
        return loghr, math.exp(loghr)

    interim_lower, interim_lower_hr = scale_pair(design.interim_lower_loghr)
    interim_upper, interim_upper_hr = scale_pair(design.interim_upper_loghr)
    return {
        "d_total": design.d_total,
        "d1_interim": design.d1_interim,
        "d2_post": design.d2_post,
        "interim_lower_loghr": interim_lower,
        "interim_lower_hr": interim_lower_hr,
        "interim_upper_loghr": interim_upper,
        "interim_upper_hr": interim_upper_hr,
        "final_lower_loghr": design.final_lower_loghr,
        "final_lower_hr": design.final_lower_hr,
        "final_upper_loghr": design.final_upper_loghr,
        "final_upper_hr": design.final_upper_hr,
        "achieved_pi": design.achieved_pi,
        "achieved_eta": design.achieved_eta,
    }


def _values_match(fresh, stored) -> bool:
    if isinstance(fresh, float) and isinstance(stored, (int, float)):
        return math.isclose(fresh, float(stored), rel_tol=1e-9, abs_tol=1e-9)
    return fresh == stored


def _check_roundtrip(fresh_outputs: dict, stored_outputs, path) -> None:
    if stored_outputs is None:
        return
    if not isinstance(stored_outputs, dict):
        raise DataFormatError(f"design file {path}: outputs must be an object")
    for key, fresh in fresh_outputs.items():
        if key not in stored_outputs or not _values_match(fresh, stored_outputs[key]):
            raise ValidationError(
                f"design file {path}: stored output {key!r} does not match the "
                "value re-solved from its inputs; regenerate the file"
            )


def _design_from_file(path):
    """Load a design result document and re-solve it from its echoed inputs."""
    doc = _load_json_object(path, "design file")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise DataFormatError(
            f"design file {path}: missing or unsupported schema_version "
            f"(expected {SCHEMA_VERSION})"
        )
    command = doc.get("command")
    inputs = doc.get("inputs")
    if command not in ("design", "gs-design") or not isinstance(inputs, dict):
        raise DataFormatError(
            f"design file {path}: expected a result document from the design "
            "or gs-design command"
        )
    fields = _DESIGN_NUMERIC_FIELDS if command == "design" else _GS_NUMERIC_FIELDS
    missing = sorted(f for f in fields if f not in inputs)
    if missing:
        raise DataFormatError(
            f"design file {path}: inputs lack fields: {', '.join(missing)}"
        )
    if command == "design":
        if not inputs.get("round_events", True):
            raise InvalidParameterError(
                "simulation needs an integer event count; regenerate the design "
                "with event rounding enabled"
            )
        design = solve_fixed_design(_spec_from_inputs(inputs), round_events=True)
        _check_roundtrip(_fixed_outputs(design), doc.get("outputs"), path)
    else:
        design = solve_gs_design(_gs_spec_from_inputs(inputs))
        _check_roundtrip(_gs_outputs(design), doc.get("outputs"), path)
    return command, inputs, design


# ---------------------------------------------------------------------------
# subcommand implementations; each returns (document, renderings)


def _cmd_design(args):
    inputs = _resolve_inputs(
        args,
        _DESIGN_NUMERIC_FIELDS,
        required=("hr0", "hr1", "alpha", "beta", "pi", "eta"),
        allow_round_flag=True,
    )
    design = solve_fixed_design(
        _spec_from_inputs(inputs), round_events=bool(inputs["round_events"])
    )
    return _document("design", inputs, _fixed_outputs(design)), {}


def _cmd_gs_design(args):
    inputs = _resolve_inputs(
        args,
        _GS_NUMERIC_FIELDS,
        required=("hr0", "hr1", "alpha", "beta", "pi", "eta", "t1"),
        allow_round_flag=False,
    )
    design = solve_gs_design(_gs_spec_from_inputs(inputs))
    return _document("gs-design", inputs, _gs_outputs(design)), {}


def _table_rows():
    rows = []
    for hr0, hr1, alpha, beta, eta, pi in TABLE_GRID:
        spec = DesignSpec(hr0=hr0, hr1=hr1, alpha=alpha, beta=beta, pi=pi, eta=eta)
        design = solve_fixed_design(spec, round_events=True)
        rows.append(
            {
                "hr0": hr0,
                "hr1": hr1,
                "alpha": alpha,
                "beta": beta,
                "eta": eta,
                "pi": pi,
                "d": int(design.n_events_d),
                "hr_lower": design.boundary_lower_hr,
                "hr_upper": design.boundary_upper_hr,
            }
        )
    return rows


def _cmd_table(args):
    rows = _table_rows()
    document = _document("table", {}, {"n_rows": len(rows), "rows": rows})

    def cells(row):
        return (
            f"{row['hr0']:g}",
            f"{row['hr1']:g}",
            f"{row['alpha']:g}",
            f"{row['beta']:g}",
            f"{row['eta']:g}",
            f"{row['pi']:g}",
            row["d"],
            f"{row['hr_lower']:.4f}",
            f"{row['hr_upper']:.4f}",
        )

    def render_csv(doc, precision):
        return _csv_text(TABLE_COLUMNS, [cells(r) for r in doc["outputs"]["rows"]])

    def render_text(doc, precision):
        return _render_columns(
            TABLE_COLUMNS, [cells(r) for r in doc["outputs"]["rows"]], precision
        )

    return document, {"csv": render_csv, "text": render_text}


def _cmd_density(args):
    inputs = _resolve_inputs(
        args,
        _DESIGN_NUMERIC_FIELDS,
        required=("hr0", "hr1", "alpha", "beta", "pi", "eta"),
        allow_round_flag=True,
    )
    if args.grid_points < 2:
        raise InvalidParameterError(
            f"--grid-points must be at least 2, got {args.grid_points}"
        )
    inputs["grid_points"] = args.grid_points
    spec = _spec_from_inputs(inputs)
    design = solve_fixed_design(spec, round_events=bool(inputs["round_events"]))
    r = spec.rand_ratio_r
    sd = (1.0 + r) / math.sqrt(r * design.n_events_d)
    lo = min(spec.theta0, spec.theta1) - 4.0 * sd
    hi = max(spec.theta0, spec.theta1) + 4.0 * sd
    step = (hi - lo) / (args.grid_points - 1)
    grid = [lo + i * step for i in range(args.grid_points)]
    # boundary abscissas join the grid so partial areas are exact at the cuts
    grid = sorted(set(grid) | {design.boundary_lower_loghr, design.boundary_upper_loghr})
    columns = {
        "theta": grid,
        "density_h0": [normal_pdf(x, spec.theta0, sd) for x in grid],
        "density_h1": [normal_pdf(x, spec.theta1, sd) for x in grid],
        "region": [classify_outcome(design, x) for x in grid],
    }
    outputs = {
        "n_events_d": _fixed_outputs(design)["n_events_d"],
        "sd_theta_hat": sd,
        "boundary_lower_loghr": design.boundary_lower_loghr,
        "boundary_upper_loghr": design.boundary_upper_loghr,
        "grid": columns,
    }
    document = _document("density", inputs, outputs)
    header = (
        "theta",
        "density_h0",
        "density_h1",
        "region",
        "boundary_lower_loghr",
        "boundary_upper_loghr",
    )

    def rows(doc, fmt_float):
        g = doc["outputs"]["grid"]
        b_lo = fmt_float(doc["outputs"]["boundary_lower_loghr"])
        b_up = fmt_float(doc["outputs"]["boundary_upper_loghr"])
        return [
            (
                fmt_float(g["theta"][i]),
                fmt_float(g["density_h0"][i]),
                fmt_float(g["density_h1"][i]),
                g["region"][i],
                b_lo,
                b_up,
            )
            for i in range(len(g["theta"]))
        ]

    def render_csv(doc, precision):
        return _csv_text(header, rows(doc, lambda v: f"{v:.17g}"))

    def render_text(doc, precision):
        return _render_columns(header, rows(doc, lambda v: f"{v:.{precision}f}"), precision)

    return document, {"csv": render_csv, "text": render_text}


def _cmd_simulate(args):
    command, design_inputs, design = _design_from_file(args.design)
    if args.seed is None:
        seed = int.from_bytes(os.urandom(8), "big")
    else:
        seed = args.seed
        if not 0 <= seed < 2**64:
            raise InvalidParameterError(f"--seed must lie in [0, 2^64), got {seed}")
    if command == "design":
        trigger = (int(design.n_events_d),)
        design_summary = {"kind": "fixed", **_fixed_outputs(design)}
        spec_r = design.spec.rand_ratio_r
    else:
        trigger = (design.d1_interim, design.d_total)
        design_summary = {"kind": "group_sequential", **_gs_outputs(design)}
        spec_r = design.spec.base.rand_ratio_r
    scenario = SimScenario(
        true_log_hr_theta=args.theta,
        control_hazard=args.hazard,
        n_patients=args.n_patients,
        accrual_duration=args.accrual,
        analysis_trigger=trigger,
        rng_seed=seed,
        n_replications=args.reps,
        rand_ratio_r=spec_r,
        weibull_shape=args.shape,
    )
    oc = simulate_trial(scenario, design)
    inputs = {
        "design_file": str(args.design),
        "design": {"command": command, "inputs": design_inputs},
        "theta": args.theta,
        "hazard": args.hazard,
        "n_patients": args.n_patients,
        "accrual": args.accrual,
        "reps": args.reps,
        "seed": seed,
        "shape": args.shape,
    }
    outputs = {
        "oc": {
            "p_reject_H0": oc.p_reject_H0,
            "p_reject_H1": oc.p_reject_H1,
            "p_inconclusive": oc.p_inconclusive,
            "p_stop_interim": oc.p_stop_interim,
        },
        "mc_standard_errors": dict(oc.mc_standard_errors),
        "counts": dict(oc.counts),
        "n_replications": oc.n_replications,
        "seed": seed,
        "rng_algorithm": RNG_ALGORITHM,
        "analysis_trigger": list(trigger),
        "design_used": design_summary,
    }
    return _document("simulate", inputs, outputs), {}


def _cmd_analyze(args):
    data = read_patient_csv(args.data, rand_ratio_r=args.r)
    cutoff = math.inf if args.cutoff is None else args.cutoff
    if not cutoff > 0.0:
        raise InvalidParameterError(f"--cutoff must be positive, got {args.cutoff}")
    result = log_rank(data, cutoff=cutoff)
    outputs = {
        "n_events_d": result.n_events_d,
        "statistic_L": result.statistic_L,
        "theta_hat": result.theta_hat,
        "hr_hat": math.exp(result.theta_hat),
        "rand_ratio_r": data.rand_ratio_r,
        "n_patients": len(data.patients),
    }
    if args.design is not None:
        command, _, design = _design_from_file(args.design)
        if command != "design":
            raise InvalidParameterError(
                "--design classification supports fixed designs only"
            )
        outputs["decision"] = classify_outcome(design, result.theta_hat)
    inputs = {
        "data": str(args.data),
        "r": args.r,
        "cutoff": cutoff,
        "design_file": None if args.design is None else str(args.design),
    }
    return _document("analyze", inputs, outputs), {}


# ---------------------------------------------------------------------------
# parser and entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InvalidParameterError(message)


def _add_design_flags(parser, with_round: bool, with_request: bool):
    parser.add_argument("--hr0", type=float, help="hazard ratio under H0")
    parser.add_argument("--hr1", type=float, help="hazard ratio under H1 (must be below hr0)")
    parser.add_argument("--alpha", type=float, help="false-positive cap under H0")
    parser.add_argument("--beta", type=float, help="false-negative cap under H1")
    parser.add_argument("--pi", type=float, help="target probability of rejecting H0 under H1")
    parser.add_argument("--eta", type=float, help="target probability of rejecting H1 under H0")
    parser.add_argument("--r", type=float, help="experimental:control allocation ratio (default 1)")
    if with_round:
        parser.add_argument(
            "--round-events",
            action=argparse.BooleanOptionalAction,
            default=None,
            help="round the event count up to an integer (default: on)",
        )
    if with_request:
        parser.add_argument(
            "--request", metavar="FILE", help="JSON request file supplying the inputs"
        )


def _add_output_flags(parser, formats):
    parser.add_argument("--format", choices=formats, default=None, help="output format (default text)")
    parser.add_argument("--output", metavar="FILE", default=None, help="write output to FILE instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog=_TOOL_NAME, description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"{_TOOL_NAME} {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("design", help="solve a fixed three-outcome design")
    _add_design_flags(p, with_round=True, with_request=True)
    _add_output_flags(p, ("text", "json"))
    p.set_defaults(func=_cmd_design)

    p = sub.add_parser("gs-design", help="solve a one-interim design")
    _add_design_flags(p, with_round=False, with_request=True)
    p.add_argument("--t1", type=float, help="information fraction at the interim, in (0, 1)")
    p.add_argument("--alpha1", type=float, help="alpha spent at the interim (default 0)")
    p.add_argument("--beta1", type=float, help="beta spent at the interim (default 0)")
    _add_output_flags(p, ("text", "json"))
    p.set_defaults(func=_cmd_gs_design)

    p = sub.add_parser("table", help="regenerate the reference design table")
    _add_output_flags(p, ("text", "csv", "json"))
    p.set_defaults(func=_cmd_table)

    p = sub.add_parser("density", help="estimator density curves for plotting")
    _add_design_flags(p, with_round=True, with_request=True)
    p.add_argument("--grid-points", type=int, default=401, help="grid resolution (default 401)")
    _add_output_flags(p, ("text", "csv", "json"))
    p.set_defaults(func=_cmd_density)

    p = sub.add_parser("simulate", help="Monte-Carlo operating characteristics")
    p.add_argument("--design", required=True, metavar="FILE", help="JSON design document from design or gs-design")
    p.add_argument("--theta", type=float, required=True, help="true log hazard ratio")
    p.add_argument("--hazard", type=float, required=True, help="control-arm exponential hazard rate")
    p.add_argument("--n-patients", type=int, required=True, help="total enrollment")
    p.add_argument("--accrual", type=float, required=True, help="accrual duration (uniform entry)")
    p.add_argument("--reps", type=int, default=100_000, help="replications (default 100000)")
    p.add_argument("--seed", type=int, default=None, help="RNG seed (default: drawn from the OS and echoed)")
    p.add_argument("--shape", type=float, default=1.0, help="Weibull shape for event times (default 1)")
    _add_output_flags(p, ("text", "json"))
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("analyze", help="log-rank analysis of a patient CSV")
    p.add_argument("--data", required=True, metavar="FILE", help="patient CSV: arm, entry_time, time, event")
    p.add_argument("--r", type=float, default=None, help="allocation ratio override (default: inferred)")
    p.add_argument("--cutoff", type=float, default=None, help="calendar analysis cutoff (default: none)")
    p.add_argument("--design", default=None, metavar="FILE", help="fixed-design document for outcome classification")
    _add_output_flags(p, ("text", "json"))
    p.set_defaults(func=_cmd_analyze)

    return parser


def _dispatch(args) -> str:
    precision = _precision()
    document, renderers = args.func(args)
    fmt = args.format or "text"
    if fmt == "json":
        return _render_json(document)
    if fmt in renderers:
        return renderers[fmt](document, precision)
    return _render_pairs(document, precision)


def _fail(exc: Exception, code: int) -> int:
    line = json.dumps(
        {"error": {"type": type(exc).__name__, "exit_code": code, "message": str(exc)}},
        sort_keys=True,
    )
    sys.stderr.write(line + "\n")
    return code


def run(argv=None) -> int:
    """Entry point; returns the process exit code."""
    try:
        args = build_parser().parse_args(argv)
        text = _dispatch(args)
        _emit(text, args.output)
    except ValidationError as exc:
        return _fail(exc, _EXIT_VALIDATION)
    except NumericalError as exc:
        return _fail(exc, _EXIT_NUMERICAL)
    except OSError as exc:
        return _fail(exc, _EXIT_IO)
    return 0


if __name__ == "__main__":
    sys.exit(run())
