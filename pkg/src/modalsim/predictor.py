"""Modality indicators and the lightweight accuracy predictor.

Consistency is the mean pairwise cosine similarity of first-unit features
across modalities; complementarity is its complement to one.  The predictor
is a one-hidden-layer feed-forward regressor over (consistency,
complementarity, one-hot configuration code) trained offline by full-batch
gradient descent against synthetic accuracy labels in percent.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import nn, rng
from .core import ConfigAssignment, ModalsimError, Scenario
from .nn import EmptyDataset, NonFiniteLoss  # re-exported error types

__all__ = [
    "ZeroVector",
    "SingleModality",
    "UnknownConfig",
    "EmptyDataset",
    "NonFiniteLoss",
    "ModalityIndicators",
    "EncodingSpec",
    "TrainConfig",
    "PredictorModel",
    "consistency",
    "indicators",
    "train",
    "predict",
    "save_model",
    "load_model",
]


class ZeroVector(ModalsimError):
    pass


class SingleModality(ModalsimError):
    pass


class UnknownConfig(ModalsimError):
    pass


@dataclass(frozen=True)
class ModalityIndicators:
    consistency: float
    complementarity: float

    def __post_init__(self):
        if self.complementarity != 1.0 - self.consistency:
            raise ValueError("complementarity must equal 1 - consistency exactly")

    @classmethod
    def from_consistency(cls, cons: float) -> "ModalityIndicators":
        return cls(consistency=cons, complementarity=1.0 - cons)


def consistency(f1: np.ndarray, f2: np.ndarray) -> float:
    """Cosine similarity of two equal-length non-zero vectors, clipped to [-1, 1]."""
    f1 = np.asarray(f1, dtype=np.float64)
    f2 = np.asarray(f2, dtype=np.float64)
    if f1.shape != f2.shape:
        raise ValueError(f"vector shapes differ: {f1.shape} vs {f2.shape}")
    n1 = float(np.linalg.norm(f1))
    n2 = float(np.linalg.norm(f2))
    if n1 == 0.0 or n2 == 0.0:
        raise ZeroVector("cosine similarity undefined for a zero vector")
    return float(np.clip(float(f1 @ f2) / (n1 * n2), -1.0, 1.0))


def indicators(first_unit_features: Sequence[np.ndarray]) -> ModalityIndicators:
    """Mean pairwise cosine over modalities, truncating every vector to the
    minimum width first."""
    if len(first_unit_features) < 2:
        raise SingleModality("indicators need at least two modalities")
    width = min(len(np.ravel(f)) for f in first_unit_features)
    if width == 0:
        raise ZeroVector("empty feature vector")
    vecs = [np.ravel(np.asarray(f, dtype=np.float64))[:width] for f in first_unit_features]
    cosines = []
    for a in range(len(vecs)):
        for b in range(a + 1, len(vecs)):
            cosines.append(consistency(vecs[a], vecs[b]))
    return ModalityIndicators.from_consistency(float(np.mean(cosines)))


@dataclass(frozen=True)
class EncodingSpec:
    """Input layout: [cons, comp] then per-modality one-hot sensing and model levels."""

    sensing_counts: tuple[int, ...]
    model_counts: tuple[int, ...]

    @classmethod
    def for_scenario(cls, scenario: Scenario) -> "EncodingSpec":
        return cls(
            sensing_counts=tuple(len(s) for s in scenario.sensing_space),
            model_counts=tuple(len(m) for m in scenario.model_space),
        )

    @property
    def dim(self) -> int:
        return 2 + sum(self.sensing_counts) + sum(self.model_counts)

    def encode(self, ind: ModalityIndicators, assignment: ConfigAssignment) -> np.ndarray:
        if len(assignment.pairs) != len(self.sensing_counts):
            raise UnknownConfig(
                f"assignment has {len(assignment.pairs)} modalities, encoding expects "
                f"{len(self.sensing_counts)}"
            )
        vec = np.zeros(self.dim)
        vec[0] = ind.consistency
        vec[1] = ind.complementarity
        off = 2
        for i, (s, m) in enumerate(assignment.pairs):
            if not (0 <= s < self.sensing_counts[i]) or not (0 <= m < self.model_counts[i]):
                raise UnknownConfig(f"levels ({s},{m}) outside modality {i}'s space")
            vec[off + s] = 1.0
            off += self.sensing_counts[i]
            vec[off + m] = 1.0
            off += self.model_counts[i]
        return vec


@dataclass(frozen=True)
class TrainConfig:
    seed: int = 0
    epochs: int = 4000
    learning_rate: float = 0.05
    hidden: int = 16
    holdout_fraction: float = 0.2


@dataclass(frozen=True)
class TrainingInfo:
    seed: int
    epochs: int
    learning_rate: float
    train_mse: float
    holdout_mse: float
    holdout_r2: float


@dataclass(frozen=True)
class PredictorModel:
    encoding: EncodingSpec
    w1: np.ndarray  # dim x hidden
    b1: np.ndarray
    w2: np.ndarray  # hidden
    b2: float
    x_mean: np.ndarray
    x_scale: np.ndarray
    y_mean: float
    info: TrainingInfo


def _forward_raw(params, x: np.ndarray) -> np.ndarray:
    w1, b1, w2, b2 = params
    return nn.softplus(x @ w1 + b1) @ w2 + b2


def loss_and_grads(params, x: np.ndarray, y: np.ndarray):
    """Mean-squared-error loss with analytic gradients (used by the training
    loop and checked against finite differences in the tests)."""
    w1, b1, w2, b2 = params
    z = x @ w1 + b1
    h = nn.softplus(z)
    pred = h @ w2 + b2
    err = pred - y
    n = x.shape[0]
    loss = float(np.mean(err**2))
    d_pred = 2.0 * err / n
    g_w2 = h.T @ d_pred
    g_b2 = float(np.sum(d_pred))
    d_h = np.outer(d_pred, w2)
    d_z = d_h * nn.softplus_grad(z)
    g_w1 = x.T @ d_z
    g_b1 = d_z.sum(axis=0)
    return loss, (g_w1, g_b1, g_w2, g_b2)


def train(
    dataset: Sequence[tuple[ModalityIndicators, ConfigAssignment, float]],
    encoding: EncodingSpec,
    hyper: TrainConfig = TrainConfig(),
) -> PredictorModel:
    """Fit the predictor by deterministic full-batch gradient descent."""
    if not dataset:
        raise EmptyDataset("predictor training needs a non-empty dataset")
    for _, _, acc in dataset:
        if not (0.0 <= acc <= 100.0):
            raise ValueError(f"accuracy {acc} outside [0, 100]")

    x = np.vstack([encoding.encode(ind, a) for ind, a, _ in dataset])
    y = np.array([acc for _, _, acc in dataset], dtype=np.float64)

    order = _shuffled(len(dataset), rng.stream(hyper.seed, "predictor", "split"))
    n_hold = max(1, int(round(hyper.holdout_fraction * len(dataset)))) if len(dataset) > 4 else 0
    hold_idx, train_idx = order[:n_hold], order[n_hold:]
    if len(train_idx) == 0:
        train_idx, hold_idx = order, []
    xt, yt = x[train_idx], y[train_idx]

    x_mean, x_scale = nn.standardize_fit(xt)
    y_mean = float(yt.mean())
    xs = (xt - x_mean) / x_scale
    ys = yt - y_mean

    init = rng.stream(hyper.seed, "predictor", "init")
    w1 = nn.init_matrix(init.sub("w1"), encoding.dim, hyper.hidden)
    b1 = np.zeros(hyper.hidden)
    w2 = nn.init_matrix(init.sub("w2"), hyper.hidden, 1)[:, 0]
    b2 = 0.0
    params = [w1, b1, w2, b2]

    lr = hyper.learning_rate
    for _ in range(hyper.epochs):
        loss, grads = loss_and_grads(params, xs, ys)
        if not np.isfinite(loss):
            raise NonFiniteLoss(f"loss became non-finite ({loss})")
        params = [p - lr * g for p, g in zip(params, grads)]

    train_mse, _ = loss_and_grads(params, xs, ys)
    if len(hold_idx):
        xh = (x[hold_idx] - x_mean) / x_scale
        yh = y[hold_idx]
        pred_h = _forward_raw(params, xh) + y_mean
        hold_mse = float(np.mean((pred_h - yh) ** 2))
        var = float(np.var(yh))
        hold_r2 = 1.0 - hold_mse / var if var > 0 else (1.0 if hold_mse == 0.0 else 0.0)
    else:
        hold_mse, hold_r2 = train_mse, float("nan")

    info = TrainingInfo(
        seed=hyper.seed,
        epochs=hyper.epochs,
        learning_rate=lr,
        train_mse=float(train_mse),
        holdout_mse=hold_mse,
        holdout_r2=hold_r2,
    )
    return PredictorModel(
        encoding=encoding,
        w1=params[0],
        b1=params[1],
        w2=params[2],
        b2=float(params[3]),
        x_mean=x_mean,
        x_scale=x_scale,
        y_mean=y_mean,
        info=info,
    )


def _shuffled(n: int, stream: rng.Stream) -> list[int]:
    # Fisher-Yates driven by the counter stream
    order = list(range(n))
    for i in range(n - 1, 0, -1):
        j = stream.u64(i) % (i + 1)
        order[i], order[j] = order[j], order[i]
    return order


def predict(model: PredictorModel, ind: ModalityIndicators, assignment: ConfigAssignment) -> float:
    """Estimated accuracy in percent, clamped to [0, 100]."""
    return float(predict_batch(model, ind, [assignment])[0])


def predict_batch(
    model: PredictorModel, ind: ModalityIndicators, assignments: Sequence[ConfigAssignment]
) -> np.ndarray:
    x = np.vstack([model.encoding.encode(ind, a) for a in assignments])
    xs = (x - model.x_mean) / model.x_scale
    raw = _forward_raw((model.w1, model.b1, model.w2, model.b2), xs) + model.y_mean
    return np.clip(raw, 0.0, 100.0)


def save_model(model: PredictorModel, path: str | Path) -> None:
    nn.write_weight_doc(
        path,
        "accuracy_predictor",
        {
            "encoding": {
                "sensing_counts": list(model.encoding.sensing_counts),
                "model_counts": list(model.encoding.model_counts),
            },
            "weights": {
                "w1": nn.to_lists(model.w1),
                "b1": [float(v) for v in model.b1],
                "w2": [float(v) for v in model.w2],
                "b2": model.b2,
                "x_mean": [float(v) for v in model.x_mean],
                "x_scale": [float(v) for v in model.x_scale],
                "y_mean": model.y_mean,
            },
            "training": {
                "seed": model.info.seed,
                "epochs": model.info.epochs,
                "learning_rate": model.info.learning_rate,
                "train_mse": model.info.train_mse,
                "holdout_mse": model.info.holdout_mse,
                "holdout_r2": model.info.holdout_r2,
            },
        },
    )


def load_model(path: str | Path) -> PredictorModel:
    doc = nn.read_weight_doc(path, "accuracy_predictor")
    enc = EncodingSpec(
        sensing_counts=tuple(doc["encoding"]["sensing_counts"]),
        model_counts=tuple(doc["encoding"]["model_counts"]),
    )
    w = doc["weights"]
    t = doc["training"]
    return PredictorModel(
        encoding=enc,
        w1=nn.from_lists(w["w1"]),
        b1=np.asarray(w["b1"], dtype=np.float64),
        w2=np.asarray(w["w2"], dtype=np.float64),
        b2=float(w["b2"]),
        x_mean=np.asarray(w["x_mean"], dtype=np.float64),
        x_scale=np.asarray(w["x_scale"], dtype=np.float64),
        y_mean=float(w["y_mean"]),
        info=TrainingInfo(
            seed=t["seed"],
            epochs=t["epochs"],
            learning_rate=t["learning_rate"],
            train_mse=t["train_mse"],
            holdout_mse=t["holdout_mse"],
            holdout_r2=t["holdout_r2"],
        ),
    )
