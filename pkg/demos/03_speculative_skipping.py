#!/usr/bin/env python3
"""Cross-modal speculative skipping on easy and hard sample corpora.

Trains the gate on oracle labels (does the prefix prediction match the
full-window prediction?), then runs gated and ungated windows side by side
and prints the latency and waiting-time effect per difficulty.
"""

import numpy as np

from modalsim import engine, gating, workload
from modalsim.core import ConfigAssignment

scenario = workload.gen_scenario("lrw-like", seed=3)
assignment = ConfigAssignment(((1, 1), (1, 1)))  # 25fps medium video, encoder bound

train = workload.gen_samples(scenario, 40, {"easy": 1, "hard": 1}, seed=21)
rows = workload.gate_dataset(
    scenario, train, [assignment, scenario.min_assignment(), scenario.max_assignment()]
)
gate = gating.gate_train(rows, gating.GateTrainConfig(seed=0, epochs=1500))
print(f"gate: {len(rows)} oracle-labelled rows, "
      f"holdout accuracy {gate.info.holdout_accuracy:.3f}\n")

for difficulty in ("easy", "hard"):
    corpus = workload.gen_samples(scenario, 30, difficulty, seed=33)
    on, off, wait_on, wait_off, skips = [], [], [], [], 0
    for sample in corpus:
        gated = engine.run(scenario, assignment, sample, gate=gate).summary
        plain = engine.run(scenario.without_skipping(), assignment, sample).summary
        on.append(gated.reported_latency_us)
        off.append(plain.reported_latency_us)
        wait_on.append(gated.waiting_us)
        wait_off.append(plain.waiting_us)
        skips += gated.skipped_unit_count > 0
    print(f"--- {difficulty} corpus ({len(corpus)} samples)")
    print(f"skip rate                : {skips / len(corpus):6.1%}")
    print(f"reported latency         : {np.mean(on) / 1000:6.1f} ms gated "
          f"vs {np.mean(off) / 1000:6.1f} ms ungated")
    print(f"waiting at fusion barrier: {np.mean(wait_on) / 1000:6.1f} ms gated "
          f"vs {np.mean(wait_off) / 1000:6.1f} ms ungated\n")

sample = workload.gen_samples(scenario, 1, "easy", seed=2)[0]
trace = engine.run(scenario, assignment, sample, gate=gate)
print("event tail of a gated window:")
for ev in trace.events[-8:]:
    extra = {k: v for k, v in ev.payload_dict().items() if k != "sense_end_us"}
    print(f"  t={ev.time_us:>9}µs  {ev.kind.value:<18} "
          f"m={ev.modality if ev.modality is not None else '-'} {extra or ''}")
