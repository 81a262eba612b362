"""Command-line entry points.

Exit codes: 0 success, 1 usage error, 2 scenario/input validation failure,
3 runtime failure.  Failures print one machine-readable JSON line on stderr.
Wall-clock measurements (optimizer decision latency) also go to stderr so
every file and stdout byte is a pure function of the flags and seeds.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import engine, gating, optimizer, predictor, report, scenario_io, traceio, workload
from .core import (
    Difficulty,
    ExecutionMode,
    InvalidScenario,
    ModalsimError,
    validate_scenario,
)
from .scenario_io import ScenarioFormatError

USAGE_ERROR = 1
VALIDATION_ERROR = 2
RUNTIME_ERROR = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        _diag("UsageError", message)
        raise SystemExit(USAGE_ERROR)


def _diag(code: str, message: str, **extra) -> None:
    print(json.dumps({"error": code, "message": message, **extra}, sort_keys=True), file=sys.stderr)


def _note(kind: str, **extra) -> None:
    print(json.dumps({"diagnostic": kind, **extra}, sort_keys=True), file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="modalsim", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    scenario_help = "scenario file, or a preset name like lrw-like / motivation-av@7"

    run = sub.add_parser("run", help="simulate samples and write a trace file")
    run.add_argument("--scenario", required=True, help=scenario_help)
    run.add_argument("--mode", choices=[m.value for m in ExecutionMode])
    run.add_argument("--gate", help="gate model file enabling speculative skipping")
    run.add_argument("--optimize", action="store_true", help="pick the assignment per sample")
    run.add_argument(
        "--predictor",
        help="predictor model file for --optimize; defaults to the scenario's accuracy surface",
    )
    run.add_argument("--t-max", type=int, help="override latency budget, in ms")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--samples", type=int, default=1)
    run.add_argument("--difficulty", default="easy", choices=[d.value for d in Difficulty])
    run.add_argument("--assignment", default="max", help='"min", "max", or "s:m,s:m,..."')
    run.add_argument("--out", required=True)

    opt = sub.add_parser("optimize", help="print the chosen assignment for one sample")
    opt.add_argument("--scenario", required=True)
    opt.add_argument("--predictor", required=True)
    opt.add_argument("--oracle", action="store_true", help="also run brute force and print the gap")
    opt.add_argument("--seed", type=int, default=0)
    opt.add_argument("--t-max", type=int, help="override latency budget, in ms")

    sweep = sub.add_parser("sweep", help="per-assignment latency/accuracy CSV over the full grid")
    sweep.add_argument("--scenario", required=True)
    sweep.add_argument("--grid", default="full", choices=["full"])
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument("--out", required=True)

    prof = sub.add_parser("profile", help="materialize the latency lookup table")
    prof.add_argument("--scenario", required=True)
    prof.add_argument("--out", required=True)

    tp = sub.add_parser("train-predictor", help="train the accuracy predictor offline")
    tp.add_argument("--scenario", required=True)
    tp.add_argument("--seed", type=int, default=0)
    tp.add_argument("--samples", type=int, default=120)
    tp.add_argument("--epochs", type=int, default=4000)
    tp.add_argument("--noise", type=float, default=0.0, help="label noise sigma, percent")
    tp.add_argument("--out", required=True)

    tg = sub.add_parser("train-gate", help="train the skip gate offline")
    tg.add_argument("--scenario", required=True)
    tg.add_argument("--seed", type=int, default=0)
    tg.add_argument("--samples", type=int, default=60)
    tg.add_argument("--epochs", type=int, default=3000)
    tg.add_argument("--out", required=True)

    rep = sub.add_parser("report", help="latency breakdown CSV from a trace file")
    rep.add_argument("--trace", required=True)
    rep.add_argument("--out", help="write CSV here instead of stdout")

    return p


def _load_scenario(spec: str, mode: str | None = None, t_max_ms: int | None = None):
    """Load a scenario file, or build a preset given `name` / `name@seed`."""
    import dataclasses

    name, _, seed_text = spec.partition("@")
    if name in workload.PRESETS:
        scenario = workload.gen_scenario(name, seed=int(seed_text) if seed_text else 0)
    else:
        scenario = scenario_io.load(spec)
    if mode:
        scenario = dataclasses.replace(scenario, execution_mode=ExecutionMode(mode))
    if t_max_ms is not None:
        scenario = dataclasses.replace(scenario, t_max_us=t_max_ms * 1000)
    return validate_scenario(scenario)


def _parse_assignment(text: str, scenario):
    from .core import ConfigAssignment

    if text == "min":
        return scenario.min_assignment()
    if text == "max":
        return scenario.max_assignment()
    pairs = []
    for part in text.split(","):
        s, m = part.split(":")
        pairs.append((int(s), int(m)))
    assignment = ConfigAssignment(tuple(pairs))
    from .core import check_assignment

    check_assignment(scenario, assignment)
    return assignment


def _cmd_run(args) -> int:
    scenario = _load_scenario(args.scenario, args.mode, args.t_max)
    gate = gating.load_gate(args.gate) if args.gate else None
    model = predictor.load_model(args.predictor) if args.predictor else None
    samples = workload.gen_samples(scenario, args.samples, args.difficulty, seed=args.seed)

    traces = []
    for sample in samples:
        decision = None
        if args.optimize:
            scorer = model if model is not None else workload.gen_accuracy_surface(scenario)
            decision = optimizer.optimizer_step(
                sample, scenario, scorer, engine.apply_resource_schedule(scenario, 0)
            )
            _note(
                "DecisionLatency",
                sample_id=sample.id,
                decision_latency_us=decision.decision_latency_us,
            )
            assignment = decision.assignment
        else:
            assignment = _parse_assignment(args.assignment, scenario)
        traces.append(
            engine.run(scenario, assignment, sample, gate=gate, config_decision=decision)
        )
    traceio.write_trace(traces, args.out)
    print(f"wrote {len(traces)} trace(s) to {args.out}")
    return 0


def _cmd_optimize(args) -> int:
    scenario = _load_scenario(args.scenario, None, args.t_max)
    model = predictor.load_model(args.predictor)
    sample = workload.gen_samples(scenario, 1, "easy", seed=args.seed)[0]
    resource = engine.apply_resource_schedule(scenario, 0)
    decision = optimizer.optimizer_step(sample, scenario, model, resource)
    out = {
        "assignment": [list(p) for p in decision.assignment.pairs],
        "score": decision.score,
    }
    if args.oracle:
        ind = optimizer.probe_indicators(scenario, sample)
        oracle = optimizer.brute_force(scenario, ind, model, resource)
        out["oracle_score"] = oracle.best_score
        out["oracle_assignment"] = [list(p) for p in oracle.best.pairs]
        out["gap"] = oracle.best_score - decision.score
        out["feasible_count"] = oracle.feasible_count
    print(json.dumps(out, sort_keys=True))
    _note("DecisionLatency", decision_latency_us=decision.decision_latency_us)
    return 0


def _cmd_sweep(args) -> int:
    scenario = _load_scenario(args.scenario)
    surface = workload.gen_accuracy_surface(scenario)
    sample = workload.gen_samples(scenario, 1, "easy", seed=args.seed)[0]
    ind = optimizer.probe_indicators(scenario, sample)
    resource = engine.apply_resource_schedule(scenario, 0)

    from .latency import end_to_end_latency

    lines = ["assignment,latency_us,accuracy_pct"]
    for assignment in scenario.assignments():
        lat = end_to_end_latency(scenario, assignment, resource).total_us
        acc = surface(ind, assignment)
        label = ";".join(f"{s}:{m}" for s, m in assignment.pairs)
        lines.append(f"{label},{lat},{acc!r}")
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {len(lines) - 1} rows to {args.out}")
    return 0


def _cmd_profile(args) -> int:
    scenario = _load_scenario(args.scenario)
    doc = scenario_io.to_document(scenario)["latency_profile"]
    Path(args.out).write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    print(f"wrote profile ({len(doc['entries'])} entries) to {args.out}")
    return 0


def _cmd_train_predictor(args) -> int:
    scenario = _load_scenario(args.scenario)
    surface = workload.gen_accuracy_surface(scenario)
    samples = workload.gen_samples(
        scenario, args.samples, {"easy": 1.0, "medium": 1.0, "hard": 1.0}, seed=args.seed
    )
    dataset = workload.predictor_dataset(scenario, surface, samples, seed=args.seed, noise_pct=args.noise)
    spec = predictor.EncodingSpec.for_scenario(scenario)
    model = predictor.train(dataset, spec, predictor.TrainConfig(seed=args.seed, epochs=args.epochs))
    predictor.save_model(model, args.out)
    print(
        json.dumps(
            {
                "rows": len(dataset),
                "holdout_r2": model.info.holdout_r2,
                "holdout_mse": model.info.holdout_mse,
            },
            sort_keys=True,
        )
    )
    return 0


def _cmd_train_gate(args) -> int:
    scenario = _load_scenario(args.scenario)
    samples = workload.gen_samples(
        scenario, args.samples, {"easy": 1.0, "hard": 1.0}, seed=args.seed
    )
    dataset = workload.gate_dataset(scenario, samples)
    model = gating.gate_train(dataset, gating.GateTrainConfig(seed=args.seed, epochs=args.epochs))
    gating.save_gate(model, args.out)
    print(
        json.dumps(
            {
                "rows": len(dataset),
                "train_accuracy": model.info.train_accuracy,
                "holdout_accuracy": model.info.holdout_accuracy,
            },
            sort_keys=True,
        )
    )
    return 0


def _cmd_report(args) -> int:
    traces = traceio.read_trace(args.trace)
    csv_text = report.to_csv(report.breakdown(traces))
    if args.out:
        Path(args.out).write_text(csv_text, encoding="utf-8")
        print(f"wrote report to {args.out}")
    else:
        sys.stdout.write(csv_text)
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "optimize": _cmd_optimize,
    "sweep": _cmd_sweep,
    "profile": _cmd_profile,
    "train-predictor": _cmd_train_predictor,
    "train-gate": _cmd_train_gate,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (InvalidScenario, ScenarioFormatError) as exc:
        detail = getattr(exc, "violations", None) or getattr(exc, "problems", None)
        _diag(type(exc).__name__, str(exc), detail=[str(v) for v in detail] if detail else None)
        return VALIDATION_ERROR
    except FileNotFoundError as exc:
        _diag("FileNotFound", str(exc))
        return VALIDATION_ERROR
    except ModalsimError as exc:
        _diag(type(exc).__name__, str(exc))
        return RUNTIME_ERROR
    except ValueError as exc:
        _diag("ValueError", str(exc))
        return RUNTIME_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
