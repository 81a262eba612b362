"""Seeded synthetic scenarios, accuracy surfaces, and sample corpora.

The named presets are calibrated to reported operating points (for example
the motivation preset's profile is back-solved so blocking mode reports
242 ms and pipelined mode 164 ms); they are calibration targets for the
synthetic generators, not reproductions of any real dataset.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import engine, rng
from .aggregation import DiffSpec, ShiftSpec
from .core import (
    ConfigAssignment,
    Difficulty,
    ExecutionMode,
    LatencyProfile,
    ModalsimError,
    Modality,
    ModelConfig,
    ProfileEntry,
    Sample,
    Scenario,
    SensingConfig,
    validate_scenario,
)
from .latency import unimodal_latency, end_to_end_latency
from .predictor import ModalityIndicators

PRESETS = ("motivation-av", "lrw-like", "nuscenes-like", "uav-like", "random")

# Probability that a sample's window is stable enough for a prefix prediction
# to match the full-window prediction, by difficulty.
BASE_RATES = {Difficulty.EASY: 0.98, Difficulty.MEDIUM: 0.94, Difficulty.HARD: 0.90}
CONSISTENCY_WEIGHT = {Difficulty.EASY: 0.90, Difficulty.MEDIUM: 0.60, Difficulty.HARD: 0.35}


class UnknownPreset(ModalsimError):
    pass


# ---------------------------------------------------------------------------
# Scenario presets


def _entries(
    n_modalities: int,
    sensing_counts: Sequence[int],
    model_counts: Sequence[int],
    encode_us: Sequence[Sequence[int]],
    aggregate_us: Sequence[Sequence[int]],
    resources: Sequence[tuple[str, int, int]],
) -> dict:
    """Profile entries with per-resource rational multipliers (num, den)."""
    out = {}
    for i in range(n_modalities):
        for j in range(sensing_counts[i]):
            for k in range(model_counts[i]):
                for name, num, den in resources:
                    le = encode_us[i][k] * num
                    la = aggregate_us[i][k] * num
                    if le % den or la % den:
                        raise ValueError("profile base values must divide the resource denominator")
                    out[(i, j, k, name)] = ProfileEntry(le // den, la // den)
    return out


def _sensing_levels(units: Sequence[int], window_us: int) -> tuple[SensingConfig, ...]:
    return tuple(
        SensingConfig(level=j, units_per_window=n, window_us=window_us)
        for j, n in enumerate(units)
    )


def _model_levels(labels: Sequence[str]) -> tuple[ModelConfig, ...]:
    return tuple(ModelConfig(level=k, label=lab) for k, lab in enumerate(labels))


def _motivation_av(seed: int) -> Scenario:
    # Back-solved single-assignment profile: blocking reports 242 ms,
    # pipelined 164 ms, blocking waiting time 100 ms.
    window = 1_000_000
    return Scenario(
        name="motivation-av",
        modalities=(Modality(0, "video", 16), Modality(1, "audio", 8)),
        sensing_space=(
            _sensing_levels([25], window),
            _sensing_levels([20], window),
        ),
        model_space=(_model_levels(["frame-cnn"]), _model_levels(["chunk-cnn"])),
        latency_profile=LatencyProfile(
            resource_levels=("normal",),
            fusion_us=12_000,
            entries={
                (0, 0, 0, "normal"): ProfileEntry(3_120, 152_000),
                (1, 0, 0, "normal"): ProfileEntry(6_350, 3_000),
            },
        ),
        t_max_us=1_300_000,
        execution_mode=ExecutionMode.PIPELINED,
        skip_checkpoints=(),
        tau=0.5,
        accuracy_surface_seed=seed,
        resource_schedule=((0, "normal"),),
    )


_THREE_RESOURCES = (("high", 1, 1), ("mid", 25, 16), ("low", 2, 1))


def _lrw_like(seed: int) -> Scenario:
    window = 1_000_000
    return Scenario(
        name="lrw-like",
        modalities=(Modality(0, "video", 16), Modality(1, "audio", 8)),
        sensing_space=(
            _sensing_levels([20, 25, 32], window),
            _sensing_levels([10, 16, 20], window),
        ),
        model_space=(
            _model_levels(["small", "medium", "large"]),
            _model_levels(["small", "medium", "large"]),
        ),
        latency_profile=LatencyProfile(
            resource_levels=("high", "mid", "low"),
            fusion_us=12_000,
            entries=_entries(
                2,
                [3, 3],
                [3, 3],
                encode_us=[[20_000, 44_800, 64_000], [4_800, 8_000, 12_800]],
                aggregate_us=[[9_600, 20_800, 30_080], [3_200, 4_800, 6_400]],
                resources=_THREE_RESOURCES,
            ),
        ),
        t_max_us=1_180_000,
        execution_mode=ExecutionMode.PIPELINED,
        skip_checkpoints=(0.5, 0.7),
        tau=0.5,
        accuracy_surface_seed=seed,
        resource_schedule=((0, "high"),),
    )


def _nuscenes_like(seed: int) -> Scenario:
    window = 1_000_000
    return Scenario(
        name="nuscenes-like",
        modalities=(Modality(0, "camera", 16), Modality(1, "lidar", 12)),
        sensing_space=(
            _sensing_levels([2, 5, 10], window),
            _sensing_levels([2, 10, 20], window),
        ),
        model_space=(
            _model_levels(["small", "medium", "large"]),
            _model_levels(["small", "medium", "large"]),
        ),
        latency_profile=LatencyProfile(
            resource_levels=("high", "mid", "low"),
            fusion_us=20_000,
            entries=_entries(
                2,
                [3, 3],
                [3, 3],
                encode_us=[[60_000, 96_000, 160_000], [16_000, 32_000, 48_000]],
                aggregate_us=[[8_000, 12_800, 16_000], [4_800, 8_000, 9_600]],
                resources=_THREE_RESOURCES,
            ),
        ),
        t_max_us=1_250_000,
        execution_mode=ExecutionMode.PIPELINED,
        skip_checkpoints=(0.5,),
        tau=0.5,
        accuracy_surface_seed=seed,
        resource_schedule=((0, "high"),),
    )


def _uav_like(seed: int) -> Scenario:
    window = 500_000
    return Scenario(
        name="uav-like",
        modalities=(Modality(0, "rgb", 12), Modality(1, "radar", 6)),
        sensing_space=(
            _sensing_levels([5, 10, 20], window),
            _sensing_levels([2, 5, 10], window),
        ),
        model_space=(
            _model_levels(["small", "medium", "large"]),
            _model_levels(["small", "medium", "large"]),
        ),
        latency_profile=LatencyProfile(
            resource_levels=("high", "mid", "low"),
            fusion_us=8_000,
            entries=_entries(
                2,
                [3, 3],
                [3, 3],
                encode_us=[[16_000, 32_000, 48_000], [8_000, 12_800, 19_200]],
                aggregate_us=[[4_800, 8_000, 11_200], [1_600, 3_200, 4_800]],
                resources=_THREE_RESOURCES,
            ),
        ),
        t_max_us=640_000,
        execution_mode=ExecutionMode.PIPELINED,
        skip_checkpoints=(0.5, 0.7),
        tau=0.5,
        accuracy_surface_seed=seed,
        resource_schedule=((0, "high"),),
    )


def _divisors_upto(n: int, cap: int) -> list[int]:
    return [d for d in range(1, cap + 1) if n % d == 0]


def _random_scenario(
    seed: int,
    modalities: int = 2,
    sensing_levels: int = 3,
    model_levels: int = 3,
    checkpoints: tuple[float, ...] = (),
) -> Scenario:
    s = rng.stream(seed, "scenario", "random")
    window = [480_000, 720_000, 960_000, 1_200_000][s.u64(0) % 4]
    pool = [d for d in _divisors_upto(window, 64) if d >= 4]

    mods = []
    sensing_space = []
    model_space = []
    encode_us = []
    aggregate_us = []
    for i in range(modalities):
        ms = s.sub("modality", i)
        channels = 4 + ms.u64(0) % 21
        mods.append(Modality(i, f"m{i}", channels))
        order = sorted(range(len(pool)), key=lambda j: (ms.u64(10 + j), j))
        units = sorted(pool[j] for j in order[:sensing_levels])
        sensing_space.append(_sensing_levels(units, window))
        model_space.append(_model_levels([f"m{i}-l{k}" for k in range(model_levels)]))

        min_interval = window // max(units)
        base = 2_000 + ms.u64(1) % (2 * min_interval)
        step = 1 + ms.u64(2) % min_interval
        encode_us.append([base + k * step for k in range(model_levels)])
        la0 = 1_000 + ms.u64(3) % 20_000
        aggregate_us.append([la0 + k * (ms.u64(4) % 8_000) for k in range(model_levels)])

    resources = (("high", 1, 1), ("low", 2, 1))
    profile = LatencyProfile(
        resource_levels=tuple(r[0] for r in resources),
        fusion_us=2_000 + s.u64(1) % 23_000,
        entries=_entries(
            modalities,
            [sensing_levels] * modalities,
            [model_levels] * modalities,
            encode_us,
            aggregate_us,
            resources,
        ),
    )

    scenario = Scenario(
        name=f"random-{seed}",
        modalities=tuple(mods),
        sensing_space=tuple(sensing_space),
        model_space=tuple(model_space),
        latency_profile=profile,
        t_max_us=1,  # placeholder until the cheapest latency is known
        execution_mode=ExecutionMode.PIPELINED,
        skip_checkpoints=checkpoints,
        tau=0.5,
        accuracy_surface_seed=seed,
        resource_schedule=((0, "high"),),
    )
    cheapest = min(
        end_to_end_latency(scenario, a, "high").total_us for a in scenario.assignments()
    )
    t_max = cheapest + (cheapest // 4) + s.u64(2) % cheapest
    return dataclasses.replace(scenario, t_max_us=t_max)


def gen_scenario(preset: str, seed: int = 0, **kwargs) -> Scenario:
    """Build and validate one of the named presets.

    `random` accepts modalities / sensing_levels / model_levels / checkpoints
    keyword knobs; the named presets take none.
    """
    if preset == "motivation-av":
        scenario = _motivation_av(seed, **kwargs)
    elif preset == "lrw-like":
        scenario = _lrw_like(seed, **kwargs)
    elif preset == "nuscenes-like":
        scenario = _nuscenes_like(seed, **kwargs)
    elif preset == "uav-like":
        scenario = _uav_like(seed, **kwargs)
    elif preset == "random":
        scenario = _random_scenario(seed, **kwargs)
    else:
        raise UnknownPreset(f"unknown preset {preset!r}; choose from {PRESETS}")
    return validate_scenario(scenario)


# ---------------------------------------------------------------------------
# Accuracy surface


@dataclass(frozen=True)
class AccuracySurface:
    """Synthetic accuracy in percent over (indicators, assignment).

    Monotone nondecreasing in every level coordinate with diminishing
    returns, plus a cross-modal interaction on model levels and a
    consistency-dependent offset; values stay inside [40, 97].
    """

    sensing_counts: tuple[int, ...]
    model_counts: tuple[int, ...]
    base: float
    consistency_scale: float
    sensing_gains: tuple[tuple[float, ...], ...]  # cumulative, per modality
    model_gains: tuple[tuple[float, ...], ...]
    pair_weights: tuple[tuple[int, int, float], ...]  # (mod a, mod b, weight)

    def __call__(self, ind: ModalityIndicators, assignment: ConfigAssignment) -> float:
        acc = self.base + self.consistency_scale * ind.consistency
        for i, (s, m) in enumerate(assignment.pairs):
            acc += self.sensing_gains[i][s] + self.model_gains[i][m]
        for a, b, w in self.pair_weights:
            na = _norm_level(assignment.pairs[a][1], self.model_counts[a])
            nb = _norm_level(assignment.pairs[b][1], self.model_counts[b])
            acc += w * min(na, nb)
        return float(acc)


def _norm_level(level: int, count: int) -> float:
    return 1.0 if count <= 1 else level / (count - 1)


def _cumulative_gains(stream: rng.Stream, levels: int, cap: float) -> tuple[float, ...]:
    if levels <= 1:
        return (0.0,) * max(levels, 1)
    draws = sorted((0.2 + 0.8 * stream.unit(i) for i in range(levels - 1)), reverse=True)
    total = cap * (0.5 + 0.5 * stream.unit(levels))
    scale = total / sum(draws)
    out = [0.0]
    for d in draws:
        out.append(out[-1] + d * scale)
    return tuple(out)


def gen_accuracy_surface(
    scenario: Scenario,
    seed: int | None = None,
    interaction_scale: float = 1.0,
    consistency_scale: float = 10.0,
) -> AccuracySurface:
    """Seeded surface for the scenario's config space.

    `interaction_scale=0` yields a purely additive (modular) surface.
    """
    if seed is None:
        seed = scenario.accuracy_surface_seed
    s = rng.stream(seed, "surface")
    n_mod = len(scenario.modalities)
    coords = 2 * n_mod
    coord_cap = 24.0 / coords

    sensing_gains = []
    model_gains = []
    for i in range(n_mod):
        sensing_gains.append(
            _cumulative_gains(s.sub("sensing", i), len(scenario.sensing_space[i]), coord_cap)
        )
        model_gains.append(
            _cumulative_gains(s.sub("model", i), len(scenario.model_space[i]), coord_cap)
        )

    pairs = [(a, b) for a in range(n_mod) for b in range(a + 1, n_mod)]
    pair_weights = []
    if pairs and interaction_scale > 0.0:
        per_pair = 6.0 / len(pairs)
        for idx, (a, b) in enumerate(pairs):
            w = interaction_scale * per_pair * s.sub("pair", idx).unit(0)
            pair_weights.append((a, b, w))

    return AccuracySurface(
        sensing_counts=tuple(len(x) for x in scenario.sensing_space),
        model_counts=tuple(len(x) for x in scenario.model_space),
        base=52.0,
        consistency_scale=consistency_scale,
        sensing_gains=tuple(sensing_gains),
        model_gains=tuple(model_gains),
        pair_weights=tuple(pair_weights),
    )


# ---------------------------------------------------------------------------
# Sample corpora


def _canonical_slow(scenario: Scenario, assignment: ConfigAssignment) -> int:
    """Slow modality as the engine sees it: argmax projected unimodal latency."""
    r0 = engine.apply_resource_schedule(scenario, 0)
    lat = [
        unimodal_latency(scenario, assignment, m.id, r0) for m in scenario.modalities
    ]
    return int(np.argmax(lat))


def _window_prediction(
    scenario: Scenario,
    sample: Sample,
    assignment: ConfigAssignment,
    slow_id: int,
    slow_prefix: int | None,
    shift: ShiftSpec,
    diff: DiffSpec,
    head: np.ndarray,
) -> int:
    parts = []
    for m in scenario.modalities:
        n = scenario.sensing(m.id, assignment.sensing_level(m.id)).units_per_window
        rows = sample.window_payload(m, n)
        if m.id == slow_id and slow_prefix is not None:
            rows = rows[: min(slow_prefix, n)]
        parts.append(engine.aggregate_vector(rows, shift, diff))
    fused = np.concatenate(parts)
    return int(np.argmax(head @ fused))


def gen_samples(
    scenario: Scenario,
    count: int,
    mix: dict | Difficulty | str = Difficulty.EASY,
    seed: int = 0,
    base_rates: dict | None = None,
) -> list[Sample]:
    """Deterministic sample corpus.

    `mix` is a single difficulty or a {difficulty: weight} dict.  Stability
    (whether a prefix prediction provably matches the full-window prediction
    at the scenario's maximum assignment) is drawn per sample at the
    difficulty's base rate; unstable samples get a late feature jump searched
    until it actually flips the prediction.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    weights = _mix_weights(mix)
    rates = dict(BASE_RATES)
    if base_rates:
        rates.update({_as_difficulty(k): v for k, v in base_rates.items()})

    assignment = scenario.max_assignment()
    slow_id = _canonical_slow(scenario, assignment)
    shift, diff = engine.DEFAULT_SHIFT, engine.DEFAULT_DIFF
    fused_dim = sum(
        m.channels + len(diff.scales) * diff.width(m.channels) for m in scenario.modalities
    )
    head = engine.prediction_head(scenario, fused_dim)
    slow_n = scenario.sensing(slow_id, assignment.sensing_level(slow_id)).units_per_window

    samples = []
    for i in range(count):
        s = rng.stream(seed, "corpus", i)
        difficulty = _draw_difficulty(weights, s.unit(0))
        stable = s.unit(1) < rates[difficulty]
        cw = CONSISTENCY_WEIGHT[difficulty] + 0.08 * (s.unit(2) * 2.0 - 1.0)
        label = s.u64(3) % engine.NUM_CLASSES
        sample = Sample(
            id=i,
            seed=seed,
            difficulty=difficulty,
            ground_truth_label=int(label),
            stable=stable,
            consistency_weight=float(cw),
        )
        if not stable:
            sample = _calibrate_jump(scenario, sample, assignment, slow_id, slow_n, shift, diff, head)
        samples.append(sample)
    return samples


def _calibrate_jump(scenario, sample, assignment, slow_id, slow_n, shift, diff, head) -> Sample:
    """Search jump magnitude/direction until the full-window prediction
    differs from the constant-prefix prediction."""
    prefix = sample.jump_start(slow_n)
    for nonce in range(32):
        candidate = dataclasses.replace(
            sample, jump_nonce=nonce, jump_scale=6.0 * (1.6**nonce)
        )
        full = _window_prediction(scenario, candidate, assignment, slow_id, None, shift, diff, head)
        partial = _window_prediction(
            scenario, candidate, assignment, slow_id, prefix, shift, diff, head
        )
        if full != partial:
            return candidate
    # pathological head; fall back to a stable sample so the label stays honest
    return dataclasses.replace(sample, stable=True)


def _mix_weights(mix) -> dict[Difficulty, float]:
    if isinstance(mix, (Difficulty, str)):
        return {_as_difficulty(mix): 1.0}
    weights = {_as_difficulty(k): float(v) for k, v in mix.items() if v > 0}
    if not weights:
        raise ValueError("difficulty mix has no positive weights")
    total = sum(weights.values())
    return {k: v / total for k, v in weights.items()}


def _as_difficulty(value) -> Difficulty:
    return value if isinstance(value, Difficulty) else Difficulty(value)


def _draw_difficulty(weights: dict[Difficulty, float], u: float) -> Difficulty:
    acc = 0.0
    ordered = sorted(weights.items(), key=lambda kv: kv[0].value)
    for d, w in ordered:
        acc += w
        if u < acc:
            return d
    return ordered[-1][0]


# ---------------------------------------------------------------------------
# Oracle gate and offline training datasets


class OracleGate:
    """Gate returning exactly 1.0 when the prefix prediction matches the
    full-window prediction for this (scenario, sample, assignment), else 0.0;
    the reference implementation of the gate's label rule."""

    def __init__(
        self,
        scenario: Scenario,
        sample: Sample,
        assignment: ConfigAssignment,
        shift: ShiftSpec | None = None,
        diff: DiffSpec | None = None,
    ):
        self.scenario = scenario
        self.sample = sample
        self.assignment = assignment
        self.shift = shift or engine.DEFAULT_SHIFT
        self.diff = diff or engine.DEFAULT_DIFF
        self.slow_id = _canonical_slow(scenario, assignment)
        dims = [
            m.channels + len(self.diff.scales) * self.diff.width(m.channels)
            for m in scenario.modalities
        ]
        self._dims = dims
        self._head = engine.prediction_head(scenario, sum(dims))
        n_slow = scenario.sensing(self.slow_id, assignment.sensing_level(self.slow_id)).units_per_window
        rows = sample.window_payload(scenario.modalities[self.slow_id], n_slow)
        self._full_slow = engine.aggregate_vector(rows, self.shift, self.diff)

    def probability(self, f_fast: np.ndarray, f_slow_prefix: np.ndarray, fraction: float) -> float:
        partial = self._fuse(f_fast, np.asarray(f_slow_prefix, dtype=np.float64))
        full = self._fuse(f_fast, self._full_slow)
        same = int(np.argmax(self._head @ partial)) == int(np.argmax(self._head @ full))
        return 1.0 if same else 0.0

    def _fuse(self, f_fast: np.ndarray, f_slow: np.ndarray) -> np.ndarray:
        f_fast = np.asarray(f_fast, dtype=np.float64)
        parts = []
        off = 0
        for m in self.scenario.modalities:
            if m.id == self.slow_id:
                parts.append(f_slow)
            else:
                width = self._dims[m.id]
                parts.append(f_fast[off : off + width])
                off += width
        return np.concatenate(parts)


def gate_dataset(
    scenario: Scenario,
    samples: Sequence[Sample],
    assignments: Sequence[ConfigAssignment] | None = None,
    shift: ShiftSpec | None = None,
    diff: DiffSpec | None = None,
) -> list[tuple[np.ndarray, np.ndarray, float, int]]:
    """Oracle-labelled gate training rows across configurations."""
    shift = shift or engine.DEFAULT_SHIFT
    diff = diff or engine.DEFAULT_DIFF
    if assignments is None:
        assignments = [scenario.min_assignment(), scenario.max_assignment()]
    fractions = scenario.skip_checkpoints or (0.5,)
    rows = []
    for sample in samples:
        for assignment in assignments:
            oracle = OracleGate(scenario, sample, assignment, shift, diff)
            slow_id = oracle.slow_id
            n_slow = scenario.sensing(slow_id, assignment.sensing_level(slow_id)).units_per_window
            fast_parts = []
            for m in scenario.modalities:
                if m.id == slow_id:
                    continue
                n = scenario.sensing(m.id, assignment.sensing_level(m.id)).units_per_window
                fast_parts.append(
                    engine.aggregate_vector(sample.window_payload(m, n), shift, diff)
                )
            f_fast = np.concatenate(fast_parts) if fast_parts else np.zeros(0)
            slow_rows = sample.window_payload(scenario.modalities[slow_id], n_slow)
            for fraction in fractions:
                prefix = max(1, math.ceil(fraction * n_slow))
                f_slow = engine.aggregate_vector(slow_rows[:prefix], shift, diff)
                label = int(oracle.probability(f_fast, f_slow, fraction))
                rows.append((f_fast, f_slow, float(fraction), label))
    return rows


def predictor_dataset(
    scenario: Scenario,
    surface: AccuracySurface,
    samples: Sequence[Sample],
    seed: int = 0,
    noise_pct: float = 0.0,
    assignments_per_sample: int = 6,
) -> list[tuple[ModalityIndicators, ConfigAssignment, float]]:
    """Labelled (indicators, assignment, accuracy) rows from the surface."""
    from .optimizer import probe_indicators

    all_assignments = list(scenario.assignments())
    noise = rng.stream(seed, "predictor-noise")
    rows = []
    idx = 0
    for sample in samples:
        ind = probe_indicators(scenario, sample)
        picks = rng.stream(seed, "predictor-picks", sample.id)
        for t in range(assignments_per_sample):
            assignment = all_assignments[picks.u64(t) % len(all_assignments)]
            acc = surface(ind, assignment)
            if noise_pct > 0.0:
                # sum of three uniforms: symmetric bell-ish noise without libm
                u = noise.units(3, offset=idx * 3)
                acc += noise_pct * ((u[0] + u[1] + u[2]) * 2.0 - 3.0)
            rows.append((ind, assignment, float(np.clip(acc, 0.0, 100.0))))
            idx += 1
    return rows
