"""Trace file round-trips, integrity checks, corruption reporting."""


import pytest

from modalsim import engine, traceio, workload
from modalsim.core import ConfigAssignment, ExecutionMode
from modalsim.engine import Event, EventKind, SimTrace, TraceSummary
from modalsim.traceio import CorruptLine, SchemaVersionMismatch, TraceIntegrityError
from modalsim.workload import OracleGate


def real_trace(seed=0, checkpoints=(0.5,)):
    s = workload.gen_scenario("lrw-like", seed=3)
    if not checkpoints:
        s = s.without_skipping()
    sample = workload.gen_samples(s, 1, "hard", seed=seed)[0]
    a = ConfigAssignment(((1, 1), (1, 1)))
    gate = OracleGate(s, sample, a) if checkpoints else None
    return engine.run(s, a, sample, gate=gate)


def test_round_trip_single(tmp_path):
    trace = real_trace()
    path = tmp_path / "t.jsonl"
    traceio.write_trace(trace, path)
    assert traceio.read_trace(path) == [trace]


def test_round_trip_multiple_byte_stable(tmp_path):
    traces = [real_trace(seed=i) for i in range(3)]
    p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    traceio.write_trace(traces, p1)
    back = traceio.read_trace(p1)
    assert back == traces
    traceio.write_trace(back, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_empty_event_trace_round_trips(tmp_path):
    trace = SimTrace(
        fingerprint="0" * 64,
        sample_id=0,
        mode=ExecutionMode.PIPELINED,
        assignment=ConfigAssignment(((0, 0),)),
        window_us=1000,
        events=(),
        summary=TraceSummary(0, 0, (0,), 0),
    )
    path = tmp_path / "empty.jsonl"
    traceio.write_trace(trace, path)
    assert traceio.read_trace(path) == [trace]


def test_large_fuzzed_trace_round_trips(tmp_path):
    from modalsim import rng

    s = rng.stream(0, "fuzz")
    kinds = list(EventKind)
    events = []
    t = 0
    for i in range(100_000):
        t += s.u64(3 * i) % 50
        kind = kinds[s.u64(3 * i + 1) % len(kinds)]
        events.append(
            Event(
                time_us=t,
                kind=kind,
                modality=int(s.u64(3 * i + 2) % 3),
                unit=i % 40,
                payload=(("p", s.unit(i)), ("q", int(s.u64(i) % 7))),
            )
        )
    trace = SimTrace(
        fingerprint="f" * 64,
        sample_id=7,
        mode=ExecutionMode.BLOCKING,
        assignment=ConfigAssignment(((1, 2), (0, 1))),
        window_us=10**6,
        events=tuple(events),
        summary=TraceSummary(123, 45, (6, 7), 8),
    )
    path = tmp_path / "big.jsonl"
    traceio.write_trace(trace, path)
    assert traceio.read_trace(path) == [trace]


def test_tampered_fingerprint_detected(tmp_path):
    trace = real_trace()
    path = tmp_path / "t.jsonl"
    traceio.write_trace(trace, path)
    text = path.read_text()
    tampered = text.replace(trace.fingerprint, "deadbeef" * 8, 1)
    assert tampered != text
    path.write_text(tampered)
    with pytest.raises(SchemaVersionMismatch):
        traceio.read_trace(path)


def test_tampered_event_detected(tmp_path):
    trace = real_trace()
    path = tmp_path / "t.jsonl"
    traceio.write_trace(trace, path)
    lines = path.read_text().splitlines()
    lines[5] = lines[5].replace('"t":', '"t": 1') if '"t":' in lines[5] else lines[5] + " "
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises((TraceIntegrityError, CorruptLine)):
        traceio.read_trace(path)


def test_corrupt_line_reports_line_number(tmp_path):
    trace = real_trace()
    path = tmp_path / "t.jsonl"
    traceio.write_trace(trace, path)
    lines = path.read_text().splitlines()
    lines[2] = "{not json"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(CorruptLine) as err:
        traceio.read_trace(path)
    assert err.value.line_number == 3


def test_schema_version_mismatch(tmp_path):
    trace = real_trace()
    path = tmp_path / "t.jsonl"
    traceio.write_trace(trace, path)
    text = path.read_text().replace('"schema_version":1', '"schema_version":99')
    # recompute the checksum so only the version differs
    import hashlib
    import json

    lines = text.splitlines()[:-1]
    digest = hashlib.sha256("\n".join(lines).encode()).hexdigest()
    lines.append(json.dumps({"record": "checksum", "sha256": digest}, sort_keys=True, separators=(",", ":")))
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(SchemaVersionMismatch):
        traceio.read_trace(path)


def test_golden_trace_pinned():
    # frozen end-to-end fingerprint: any change to event semantics, payloads,
    # ordering, or the file format shows up here first
    import hashlib

    from modalsim import scenario_io

    s = workload.gen_scenario("motivation-av", seed=0)
    assert (
        scenario_io.fingerprint(s)
        == "7d9b6ea99e5623b22d725876145b15cc5671ce96566dd86d1a5f737d1e466ffa"
    )
    sample = workload.gen_samples(s, 1, "easy", seed=0)[0]
    trace = engine.run(s, s.max_assignment(), sample)
    digest = hashlib.sha256(traceio.trace_text(trace).encode()).hexdigest()
    assert digest == "280737b7f574b3e6935e526409d4b37e24dd8f7de5ae3768e8905e44b3fac80e"


def test_missing_checksum_detected(tmp_path):
    trace = real_trace()
    path = tmp_path / "t.jsonl"
    traceio.write_trace(trace, path)
    lines = path.read_text().splitlines()[:-1]
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(TraceIntegrityError):
        traceio.read_trace(path)
