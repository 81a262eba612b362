"""Line-delimited trace files.

One JSON record per line: a header per sample trace, its events, its summary,
and one final checksum record covering every previous line so tampering
(including the fingerprint) is detected on read.  All numbers are integers or
repr-round-trip floats, so write -> read -> write is byte-stable.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Iterable, Sequence

from .core import ConfigAssignment, ExecutionMode, ModalsimError
from .engine import Event, EventKind, SimTrace, TraceSummary

TRACE_SCHEMA_VERSION = 1


class SchemaVersionMismatch(ModalsimError):
    pass


class CorruptLine(ModalsimError):
    def __init__(self, line_number: int, detail: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {detail}")


class TraceIntegrityError(SchemaVersionMismatch):
    """Checksum failure; subclass of SchemaVersionMismatch so integrity and
    version problems are caught together."""


def _dump(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


def _detuple(value):
    # JSON turns payload tuples into lists; restore them on read
    if isinstance(value, list):
        return tuple(_detuple(v) for v in value)
    return value


def _trace_records(trace: SimTrace) -> Iterable[dict]:
    yield {
        "record": "header",
        "schema_version": TRACE_SCHEMA_VERSION,
        "fingerprint": trace.fingerprint,
        "sample_id": trace.sample_id,
        "mode": trace.mode.value,
        "assignment": [list(p) for p in trace.assignment.pairs],
        "window_us": trace.window_us,
    }
    for ev in trace.events:
        yield {
            "record": "event",
            "t": ev.time_us,
            "kind": ev.kind.value,
            "m": ev.modality,
            "u": ev.unit,
            "data": ev.payload_dict(),
        }
    s = trace.summary
    yield {
        "record": "summary",
        "reported_latency_us": s.reported_latency_us,
        "waiting_us": s.waiting_us,
        "peak_buffered_units": list(s.peak_buffered_units),
        "skipped_unit_count": s.skipped_unit_count,
    }


def trace_text(traces: Sequence[SimTrace] | SimTrace) -> str:
    if isinstance(traces, SimTrace):
        traces = [traces]
    lines = []
    for trace in traces:
        lines.extend(_dump(r) for r in _trace_records(trace))
    digest = hashlib.sha256("\n".join(lines).encode("utf-8")).hexdigest()
    lines.append(_dump({"record": "checksum", "sha256": digest}))
    return "\n".join(lines) + "\n"


def write_trace(traces: Sequence[SimTrace] | SimTrace, path: str | Path) -> None:
    Path(path).write_text(trace_text(traces), encoding="utf-8")


def read_trace(path: str | Path) -> list[SimTrace]:
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines:
        raise SchemaVersionMismatch("empty trace file")

    records = []
    for i, line in enumerate(lines, start=1):
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise CorruptLine(i, f"invalid JSON ({exc.msg})") from None
        if not isinstance(records[-1], dict) or "record" not in records[-1]:
            raise CorruptLine(i, "not a trace record")

    if records[-1]["record"] != "checksum":
        raise TraceIntegrityError("missing checksum record")
    expected = hashlib.sha256("\n".join(lines[:-1]).encode("utf-8")).hexdigest()
    if records[-1].get("sha256") != expected:
        raise TraceIntegrityError("trace file contents do not match their checksum")

    traces: list[SimTrace] = []
    header = None
    events: list[Event] = []
    for i, rec in enumerate(records[:-1], start=1):
        kind = rec["record"]
        if kind == "header":
            if header is not None:
                raise CorruptLine(i, "header before previous trace's summary")
            if rec.get("schema_version") != TRACE_SCHEMA_VERSION:
                raise SchemaVersionMismatch(
                    f"unsupported trace schema version {rec.get('schema_version')!r}"
                )
            header = rec
            events = []
        elif kind == "event":
            if header is None:
                raise CorruptLine(i, "event outside a trace block")
            try:
                events.append(
                    Event(
                        time_us=int(rec["t"]),
                        kind=EventKind(rec["kind"]),
                        modality=rec["m"],
                        unit=rec["u"],
                        payload=tuple(sorted((k, _detuple(v)) for k, v in rec["data"].items())),
                    )
                )
            except (KeyError, ValueError) as exc:
                raise CorruptLine(i, f"bad event: {exc}") from None
        elif kind == "summary":
            if header is None:
                raise CorruptLine(i, "summary outside a trace block")
            traces.append(
                SimTrace(
                    fingerprint=header["fingerprint"],
                    sample_id=header["sample_id"],
                    mode=ExecutionMode(header["mode"]),
                    assignment=ConfigAssignment(
                        tuple(tuple(p) for p in header["assignment"])
                    ),
                    window_us=header["window_us"],
                    events=tuple(events),
                    summary=TraceSummary(
                        reported_latency_us=rec["reported_latency_us"],
                        waiting_us=rec["waiting_us"],
                        peak_buffered_units=tuple(rec["peak_buffered_units"]),
                        skipped_unit_count=rec["skipped_unit_count"],
                    ),
                )
            )
            header = None
        else:
            raise CorruptLine(i, f"unknown record type {kind!r}")
    if header is not None:
        raise SchemaVersionMismatch("trace file ends mid-block")
    return traces
