"""Line-delimited JSON traces of solver runs.

A trace file holds one JSON object per line: a header (problem name, start
point, full configuration), one record per iteration with every field of
:class:`IterationRecord` as a named key, any audit violations, and a footer
with the final status.  Every float is written with 17 significant digits so
a replayed audit sees bit-identical values; ``json.dumps`` would print the
shortest round-tripping form instead, hence the small emitter below.
Non-finite floats use the Python dialect tokens (``Infinity``, ``NaN``)
that ``json.loads`` accepts back.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass

import numpy as np

from .driver import IterationRecord, SolverConfig
from .errors import TraceError

FORMAT_NAME = "cubeq-trace"
FORMAT_VERSION = 1


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return "%.17g" % x


def _emit(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return _fmt_float(float(value))
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, np.ndarray):
        return _emit(value.tolist())
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_emit(v) for v in value) + "]"
    if isinstance(value, dict):
        return "{" + ", ".join(
            json.dumps(str(k)) + ": " + _emit(v) for k, v in value.items()
        ) + "}"
    raise TypeError(f"cannot serialize {type(value).__name__} into a trace")


def dump_line(obj: dict) -> str:
    return _emit(obj)


def record_to_dict(record: IterationRecord) -> dict:
    out = {"kind": "iteration"}
    for f in dataclasses.fields(IterationRecord):
        out[f.name] = getattr(record, f.name)
    return out


def record_from_dict(data: dict) -> IterationRecord:
    data = {k: v for k, v in data.items() if k != "kind"}
    for key in ("x", "lam", "v_c", "v", "u"):
        data[key] = np.asarray(data[key], dtype=float)
    if data.get("w") is not None:
        data["w"] = np.asarray(data["w"], dtype=float)
    try:
        return IterationRecord(**data)
    except TypeError as exc:
        raise TraceError(f"iteration record has wrong fields: {exc}") from None


def write_trace(path, problem_name: str, x0, config: SolverConfig, result) -> None:
    """Write a finished run (any status) as a trace file."""
    lines = [dump_line({
        "kind": "header",
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "problem": problem_name,
        "x0": np.asarray(x0, dtype=float),
        "config": dataclasses.asdict(config),
    })]
    lines.extend(dump_line(record_to_dict(r)) for r in result.history)
    lines.extend(dump_line({
        "kind": "violation",
        "code": v.code, "message": v.message,
        "value": v.value, "bound": v.bound, "k": v.k,
    }) for v in result.violations)
    report = result.final_report
    lines.append(dump_line({
        "kind": "footer",
        "status": result.status,
        "message": result.message,
        "iterations": result.iterations,
        "x_final": result.x_final,
        "lambda_final": result.lambda_final,
        "counts": dataclasses.asdict(result.counts),
        "final_report": None if report is None else dataclasses.asdict(report),
    }))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


@dataclass
class TraceData:
    header: dict
    config: SolverConfig
    records: list
    violations: list  # violation dicts as written
    footer: dict

    @property
    def problem_name(self) -> str:
        return self.header["problem"]


def read_trace(path) -> TraceData:
    header = None
    footer = None
    records: list = []
    violations: list = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise TraceError(f"line {lineno}: invalid JSON ({exc.msg})") from None
            if not isinstance(obj, dict) or "kind" not in obj:
                raise TraceError(f"line {lineno}: expected an object with a 'kind'")
            kind = obj["kind"]
            if kind == "header":
                if header is not None:
                    raise TraceError(f"line {lineno}: duplicate header")
                header = obj
            elif kind == "iteration":
                if header is None:
                    raise TraceError(f"line {lineno}: iteration before header")
                records.append(record_from_dict(obj))
            elif kind == "violation":
                violations.append(obj)
            elif kind == "footer":
                footer = obj
            else:
                raise TraceError(f"line {lineno}: unknown record kind {kind!r}")
    if header is None:
        raise TraceError("trace has no header line")
    if footer is None:
        raise TraceError("trace has no footer line (truncated?)")
    if header.get("format") != FORMAT_NAME:
        raise TraceError(f"not a {FORMAT_NAME} file")
    try:
        config = SolverConfig(**header["config"])
    except (KeyError, TypeError) as exc:
        raise TraceError(f"header config invalid: {exc}") from None
    return TraceData(header=header, config=config, records=records,
                     violations=violations, footer=footer)
