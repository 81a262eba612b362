"""Shared pieces for the two small feed-forward models (accuracy predictor
and skip gate): activations, seeded initialization, and the versioned
structured-text weight document both models serialize to.

Weights are written as JSON number literals produced by Python's float repr,
which round-trips every float64 exactly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import rng

WEIGHT_DOC_VERSION = 1


class NonFiniteLoss(Exception):
    pass


class EmptyDataset(Exception):
    pass


def softplus(x: np.ndarray) -> np.ndarray:
    # log(1 + e^x) computed stably for large |x|
    return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


def softplus_grad(x: np.ndarray) -> np.ndarray:
    return sigmoid(x)


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def init_matrix(stream: rng.Stream, rows: int, cols: int) -> np.ndarray:
    """Uniform init scaled by fan-in; built from counter-stream uniforms only."""
    flat = stream.symmetric(rows * cols)
    return flat.reshape(rows, cols) * np.sqrt(3.0 / max(rows, 1))


def standardize_fit(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    std = np.where(std < 1e-9, 1.0, std)
    return mean, std


def to_lists(arr: np.ndarray) -> list:
    return [[float(v) for v in row] for row in np.atleast_2d(arr)]


def from_lists(data: list) -> np.ndarray:
    return np.asarray(data, dtype=np.float64)


def write_weight_doc(path: str | Path, kind: str, body: dict) -> None:
    doc = {"format_version": WEIGHT_DOC_VERSION, "kind": kind, **body}
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n", encoding="utf-8")


def read_weight_doc(path: str | Path, kind: str) -> dict:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("format_version") != WEIGHT_DOC_VERSION:
        raise ValueError(f"unsupported weight document version {doc.get('format_version')!r}")
    if doc.get("kind") != kind:
        raise ValueError(f"expected a {kind!r} document, found {doc.get('kind')!r}")
    return doc
