"""Closed-form latency model: the analytic oracle the simulator must match.

Per modality, a window of N units sensed every L_S µs and encoded in L_E µs
per unit by a single pipelined worker completes in max(L_E, L_S) * N µs;
aggregation adds L_A.  End to end, the slowest modality plus fusion sets the
total.  The reported metric subtracts the sensing window itself.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import ConfigAssignment, IncompleteTrace, Scenario, check_assignment


@dataclass(frozen=True)
class LatencyBreakdown:
    total_us: int
    per_modality_us: tuple[int, ...]
    waiting_us: int


def unimodal_latency(
    scenario: Scenario, assignment: ConfigAssignment, modality_id: int, resource: str
) -> int:
    """max(L_E, L_S) * N + L_A for one modality under one assignment, in µs."""
    check_assignment(scenario, assignment)
    s_level, m_level = assignment.pairs[modality_id]
    sensing = scenario.sensing(modality_id, s_level)
    entry = scenario.latency_profile.lookup(modality_id, s_level, m_level, resource)
    slot = max(entry.unit_encode_us, sensing.interval_us)
    return slot * sensing.units_per_window + entry.aggregation_us


def end_to_end_latency(
    scenario: Scenario, assignment: ConfigAssignment, resource: str
) -> LatencyBreakdown:
    """Slowest modality plus fusion; waiting is the fastest modality's idle gap."""
    per = tuple(
        unimodal_latency(scenario, assignment, m.id, resource) for m in scenario.modalities
    )
    total = max(per) + scenario.latency_profile.fusion_us
    waiting = max(per) - min(per)
    return LatencyBreakdown(total_us=total, per_modality_us=per, waiting_us=waiting)


def reported_latency(trace, scenario: Scenario) -> int:
    """(prediction time - first unit acquisition time) - window duration."""
    from .engine import EventKind  # local import to keep this module oracle-side

    t0 = None
    t_end = None
    for ev in trace.events:
        if ev.kind is EventKind.UNIT_SENSED and (t0 is None or ev.time_us < t0):
            t0 = ev.time_us
        if ev.kind is EventKind.PREDICTION_EMITTED:
            t_end = ev.time_us
    if t0 is None or t_end is None:
        raise IncompleteTrace("trace lacks unit_sensed or prediction_emitted events")
    return (t_end - t0) - scenario.window_us
