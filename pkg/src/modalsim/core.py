"""Core domain types: modalities, configurations, profiles, scenarios, samples.

All durations are integer microseconds of virtual time; there is no
floating-point time anywhere in the package.  Every type here is immutable
after construction and safe to share across threads.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import rng


# ---------------------------------------------------------------------------
# Errors


class ModalsimError(Exception):
    """Base class for all package errors."""


class MissingProfileEntry(ModalsimError):
    pass


class IncompleteTrace(ModalsimError):
    pass


class GateRequiredButMissing(ModalsimError):
    pass


class AlreadyCompleted(ModalsimError):
    """A skip commit arrived after the modality had finished naturally."""


class NoFeasibleAssignment(ModalsimError):
    pass


@dataclass(frozen=True)
class Violation:
    """One scenario invariant violation: a stable code plus a human message."""

    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


class InvalidScenario(ModalsimError):
    """Raised by validate_scenario with the complete list of violations."""

    def __init__(self, violations: list[Violation]):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))


# Violation codes used by validate_scenario. Kept as constants so callers can
# match on them without string literals.
INDIVISIBLE_WINDOW = "IndivisibleWindow"
MISSING_PROFILE_ENTRY = "MissingProfileEntry"
BAD_CHECKPOINT_ORDER = "BadCheckpointOrder"
EMPTY_CONFIG_SPACE = "EmptyConfigSpace"
BAD_MODALITY_IDS = "BadModalityIds"
BAD_CHANNELS = "BadChannels"
INCONSISTENT_WINDOW = "InconsistentWindow"
BAD_DURATION = "BadDuration"
BAD_TAU = "BadTau"
BAD_SCHEDULE = "BadResourceSchedule"
BAD_LEVELS = "BadLevels"


# ---------------------------------------------------------------------------
# Domain types


class ExecutionMode(enum.Enum):
    BLOCKING = "blocking"
    NON_BLOCKING = "non_blocking"
    PIPELINED = "pipelined"


class Difficulty(enum.Enum):
    EASY = "easy"
    MEDIUM = "medium"
    HARD = "hard"


@dataclass(frozen=True)
class Modality:
    """One sensor modality: index, label, and feature width per unit."""

    id: int
    name: str
    channels: int


@dataclass(frozen=True)
class SensingConfig:
    """Sensing granularity level: units per window and the window length (µs)."""

    level: int
    units_per_window: int
    window_us: int

    @property
    def interval_us(self) -> int:
        """Sensing interval between unit arrivals; window must divide evenly."""
        if self.window_us % self.units_per_window != 0:
            raise InvalidScenario(
                [
                    Violation(
                        INDIVISIBLE_WINDOW,
                        f"window {self.window_us}µs not divisible by N={self.units_per_window}",
                    )
                ]
            )
        return self.window_us // self.units_per_window


@dataclass(frozen=True)
class ModelConfig:
    """Encoder complexity level."""

    level: int
    label: str


@dataclass(frozen=True)
class ConfigAssignment:
    """One (sensing level, model level) pair per modality, indexed by modality id."""

    pairs: tuple[tuple[int, int], ...]

    def sensing_level(self, modality_id: int) -> int:
        return self.pairs[modality_id][0]

    def model_level(self, modality_id: int) -> int:
        return self.pairs[modality_id][1]


@dataclass(frozen=True)
class ProfileEntry:
    """Offline-measured per-unit encode and aggregation costs (µs)."""

    unit_encode_us: int
    aggregation_us: int


@dataclass(frozen=True)
class LatencyProfile:
    """Lookup table (modality, sensing level, model level, resource) -> costs.

    `fusion_us` is a single figure independent of the assignment, matching an
    offline-profiled fusion-and-prediction stage.
    """

    resource_levels: tuple[str, ...]
    fusion_us: int
    entries: dict[tuple[int, int, int, str], ProfileEntry]

    def lookup(self, modality_id: int, sensing_level: int, model_level: int, resource: str) -> ProfileEntry:
        try:
            return self.entries[(modality_id, sensing_level, model_level, resource)]
        except KeyError:
            raise MissingProfileEntry(
                f"no profile entry for modality={modality_id} sensing={sensing_level} "
                f"model={model_level} resource={resource!r}"
            ) from None


@dataclass(frozen=True)
class FeatureMatrix:
    """N unit-feature rows by C channels; rows beyond valid_prefix are zero."""

    values: np.ndarray
    valid_prefix: int

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2:
            raise ValueError("FeatureMatrix requires a 2-D array")
        if not (0 <= self.valid_prefix <= vals.shape[0]):
            raise ValueError("valid_prefix out of range")
        vals = vals.copy()
        vals[self.valid_prefix :, :] = 0.0
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def units(self) -> int:
        return int(self.values.shape[0])

    @property
    def channels(self) -> int:
        return int(self.values.shape[1])


@dataclass(frozen=True)
class Sample:
    """One multimodal input sample with seeded payload regeneration.

    Unit payloads are a pure function of (seed, id, modality, unit), so the
    same sample reproduces bit-identical features on every platform.  The
    construction: a per-sample shared latent direction blended with a
    modality-private direction (`consistency_weight` controls the blend), with
    all units equal for `stable` samples and a late feature jump (from
    `jump_fraction` of the window onward, scaled by `jump_scale`) for
    unstable ones.
    """

    id: int
    seed: int
    difficulty: Difficulty
    ground_truth_label: int
    stable: bool = True
    consistency_weight: float = 0.9
    jump_fraction: float = 0.8
    jump_scale: float = 0.0
    jump_nonce: int = 0

    def _base(self, modality: Modality) -> np.ndarray:
        shared = rng.stream(self.seed, "sample", self.id, "shared").symmetric(modality.channels)
        private = rng.stream(self.seed, "sample", self.id, "private", modality.id).symmetric(
            modality.channels
        )
        a = self.consistency_weight
        return a * shared + (1.0 - a) * private

    def _jump(self, modality: Modality) -> np.ndarray:
        direction = rng.stream(
            self.seed, "sample", self.id, "jump", self.jump_nonce, modality.id
        ).symmetric(modality.channels)
        return self.jump_scale * direction

    def jump_start(self, units_per_window: int) -> int:
        return math.ceil(self.jump_fraction * units_per_window)

    def unit_payload(self, modality: Modality, unit: int, units_per_window: int) -> np.ndarray:
        base = self._base(modality)
        if not self.stable and unit >= self.jump_start(units_per_window):
            return base + self._jump(modality)
        return base

    def window_payload(self, modality: Modality, units_per_window: int) -> np.ndarray:
        rows = [self.unit_payload(modality, u, units_per_window) for u in range(units_per_window)]
        return np.vstack(rows)


@dataclass(frozen=True)
class Scenario:
    """Full experiment description.

    `sensing_space[i]` / `model_space[i]` are the config spaces of modality i.
    `resource_schedule` maps virtual time to profile resource levels; intervals
    are left-closed and the schedule must start at time 0.
    """

    name: str
    modalities: tuple[Modality, ...]
    sensing_space: tuple[tuple[SensingConfig, ...], ...]
    model_space: tuple[tuple[ModelConfig, ...], ...]
    latency_profile: LatencyProfile
    t_max_us: int
    execution_mode: ExecutionMode = ExecutionMode.PIPELINED
    skip_checkpoints: tuple[float, ...] = ()
    tau: float = 0.5
    accuracy_surface_seed: int = 0
    resource_schedule: tuple[tuple[int, str], ...] = field(default_factory=lambda: ((0, "normal"),))

    @property
    def window_us(self) -> int:
        return self.sensing_space[0][0].window_us

    def sensing(self, modality_id: int, level: int) -> SensingConfig:
        return self.sensing_space[modality_id][level]

    def model(self, modality_id: int, level: int) -> ModelConfig:
        return self.model_space[modality_id][level]

    def assignments(self):
        """All config assignments in lexicographic (modality, sensing, model) order."""
        def rec(i: int, acc: list[tuple[int, int]]):
            if i == len(self.modalities):
                yield ConfigAssignment(tuple(acc))
                return
            for s in range(len(self.sensing_space[i])):
                for m in range(len(self.model_space[i])):
                    yield from rec(i + 1, acc + [(s, m)])

        yield from rec(0, [])

    def min_assignment(self) -> ConfigAssignment:
        return ConfigAssignment(tuple((0, 0) for _ in self.modalities))

    def max_assignment(self) -> ConfigAssignment:
        return ConfigAssignment(
            tuple(
                (len(self.sensing_space[i]) - 1, len(self.model_space[i]) - 1)
                for i in range(len(self.modalities))
            )
        )

    def without_skipping(self) -> "Scenario":
        return replace(self, skip_checkpoints=())


# ---------------------------------------------------------------------------
# Validation


def check_assignment(scenario: Scenario, assignment: ConfigAssignment) -> None:
    """Raise if the assignment does not cover the scenario's config space."""
    if len(assignment.pairs) != len(scenario.modalities):
        raise ValueError(
            f"assignment covers {len(assignment.pairs)} modalities, "
            f"scenario has {len(scenario.modalities)}"
        )
    for i, (s, m) in enumerate(assignment.pairs):
        if not (0 <= s < len(scenario.sensing_space[i])):
            raise ValueError(f"sensing level {s} out of range for modality {i}")
        if not (0 <= m < len(scenario.model_space[i])):
            raise ValueError(f"model level {m} out of range for modality {i}")


def scenario_violations(s: Scenario) -> list[Violation]:
    """Collect every invariant violation (not just the first)."""
    out: list[Violation] = []

    ids = [m.id for m in s.modalities]
    if ids != list(range(len(s.modalities))):
        out.append(Violation(BAD_MODALITY_IDS, f"modality ids {ids} are not contiguous 0..{len(ids) - 1}"))
    for m in s.modalities:
        if m.channels < 1:
            out.append(Violation(BAD_CHANNELS, f"modality {m.id} has channels={m.channels}"))

    if len(s.sensing_space) != len(s.modalities) or len(s.model_space) != len(s.modalities):
        out.append(Violation(EMPTY_CONFIG_SPACE, "config spaces must cover every modality"))
        return out

    windows = set()
    for i, levels in enumerate(s.sensing_space):
        if not levels:
            out.append(Violation(EMPTY_CONFIG_SPACE, f"modality {i} has no sensing configs"))
        for j, sc in enumerate(levels):
            if sc.level != j:
                out.append(Violation(BAD_LEVELS, f"modality {i} sensing level {sc.level} at index {j}"))
            if sc.units_per_window < 1:
                out.append(Violation(BAD_DURATION, f"modality {i} sensing level {j}: units_per_window < 1"))
                continue
            if sc.window_us <= 0:
                out.append(Violation(BAD_DURATION, f"modality {i} sensing level {j}: window_us <= 0"))
                continue
            windows.add(sc.window_us)
            if sc.window_us % sc.units_per_window != 0:
                out.append(
                    Violation(
                        INDIVISIBLE_WINDOW,
                        f"modality {i} sensing level {j}: {sc.window_us}/{sc.units_per_window} "
                        "is not an integer number of µs",
                    )
                )
    if len(windows) > 1:
        out.append(Violation(INCONSISTENT_WINDOW, f"sensing configs disagree on window: {sorted(windows)}"))

    for i, levels in enumerate(s.model_space):
        if not levels:
            out.append(Violation(EMPTY_CONFIG_SPACE, f"modality {i} has no model configs"))
        seen = set()
        for k, mc in enumerate(levels):
            if mc.level != k or mc.level in seen:
                out.append(Violation(BAD_LEVELS, f"modality {i} model level {mc.level} at index {k}"))
            seen.add(mc.level)

    prof = s.latency_profile
    if not prof.resource_levels:
        out.append(Violation(BAD_LEVELS, "latency profile declares no resource levels"))
    if prof.fusion_us < 0:
        out.append(Violation(BAD_DURATION, f"fusion_us={prof.fusion_us} < 0"))
    for i in range(len(s.modalities)):
        for j in range(len(s.sensing_space[i])):
            for k in range(len(s.model_space[i])):
                for r in prof.resource_levels:
                    entry = prof.entries.get((i, j, k, r))
                    if entry is None:
                        out.append(
                            Violation(
                                MISSING_PROFILE_ENTRY,
                                f"no entry for modality={i} sensing={j} model={k} resource={r!r}",
                            )
                        )
                        continue
                    if entry.unit_encode_us <= 0:
                        out.append(
                            Violation(BAD_DURATION, f"unit_encode_us <= 0 at ({i},{j},{k},{r!r})")
                        )
                    if entry.aggregation_us < 0:
                        out.append(
                            Violation(BAD_DURATION, f"aggregation_us < 0 at ({i},{j},{k},{r!r})")
                        )

    if s.t_max_us <= 0:
        out.append(Violation(BAD_DURATION, f"t_max_us={s.t_max_us} <= 0"))
    if not (0.0 <= s.tau <= 1.0):
        out.append(Violation(BAD_TAU, f"tau={s.tau} outside [0, 1]"))

    prev = 0.0
    for f in s.skip_checkpoints:
        if not (0.0 < f < 1.0) or f <= prev:
            out.append(
                Violation(
                    BAD_CHECKPOINT_ORDER,
                    f"checkpoint fractions {s.skip_checkpoints} must be strictly increasing in (0, 1)",
                )
            )
            break
        prev = f

    if not s.resource_schedule or s.resource_schedule[0][0] != 0:
        out.append(Violation(BAD_SCHEDULE, "resource schedule must start at time 0"))
    else:
        last = -1
        for t, level in s.resource_schedule:
            if t <= last and t != 0:
                out.append(Violation(BAD_SCHEDULE, f"schedule times not strictly increasing at {t}"))
                break
            if level not in prof.resource_levels:
                out.append(Violation(BAD_SCHEDULE, f"schedule references unknown resource {level!r}"))
                break
            last = t

    return out


def validate_scenario(s: Scenario) -> Scenario:
    """Return the scenario unchanged iff every invariant holds."""
    violations = scenario_violations(s)
    if violations:
        raise InvalidScenario(violations)
    return s
