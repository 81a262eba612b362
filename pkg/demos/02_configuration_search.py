#!/usr/bin/env python3
"""Latency-budgeted configuration search over the 81-assignment space.

Trains the accuracy predictor on a synthetic surface, then compares the
greedy search against the brute-force oracle across budgets, printing the
chosen assignment, its predicted accuracy, and the gap.
"""

import dataclasses

from modalsim import latency, optimizer, predictor, workload
from modalsim.predictor import EncodingSpec, TrainConfig

scenario = workload.gen_scenario("lrw-like", seed=3)
surface = workload.gen_accuracy_surface(scenario)
samples = workload.gen_samples(scenario, 120, {"easy": 1, "medium": 1, "hard": 1}, seed=5)
dataset = workload.predictor_dataset(scenario, surface, samples, seed=5, noise_pct=2.2)
model = predictor.train(dataset, EncodingSpec.for_scenario(scenario), TrainConfig(seed=1))
print(f"predictor fit: holdout R2 {model.info.holdout_r2:.3f}, "
      f"MSE {model.info.holdout_mse:.2f} (percent^2)\n")

probe = workload.gen_samples(scenario, 1, "medium", seed=9)[0]
ind = optimizer.probe_indicators(scenario, probe)
print(f"probe indicators: consistency {ind.consistency:.3f}, "
      f"complementarity {ind.complementarity:.3f}\n")

print(f"{'budget (ms)':>12} {'greedy pick':>22} {'pred acc':>9} {'oracle':>8} {'gap':>6}")
for budget_ms in (1050, 1100, 1150, 1250, 1500):
    s = dataclasses.replace(scenario, t_max_us=budget_ms * 1000)
    try:
        pick = optimizer.greedy_search(s, ind, model, "high")
        oracle = optimizer.brute_force(s, ind, model, "high")
    except Exception as exc:
        print(f"{budget_ms:>12} {type(exc).__name__}")
        continue
    score = predictor.predict(model, ind, pick)
    lat = latency.end_to_end_latency(s, pick, "high").total_us
    label = ";".join(f"{a}:{b}" for a, b in pick.pairs)
    print(f"{budget_ms:>12} {label:>22} {score:>8.2f}% {oracle.best_score:>7.2f}% "
          f"{oracle.best_score - score:>6.2f}  (latency {lat/1000:.0f} ms, "
          f"{oracle.feasible_count} feasible)")

decision = optimizer.optimizer_step(probe, scenario, model, "high")
print(f"\nfull online step: assignment {decision.assignment.pairs}, "
      f"decision latency {decision.decision_latency_us / 1000:.2f} ms (wall)")
