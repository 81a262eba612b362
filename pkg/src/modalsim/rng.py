"""Counter-based pseudo-random streams with explicit label splitting.

Every random quantity in this package is drawn from a `Stream` keyed by a
64-bit seed plus a tuple of labels (strings and integers).  Values are pure
functions of (seed, labels, index), so any payload, weight matrix, or
scenario can be regenerated bit-identically on any platform without storing
generator state.

The core primitive is SplitMix64 (Steele, Lea, Flood 2014): a 64-bit
finalizer applied to a counter advanced by the golden-ratio increment.
Only 64-bit integer arithmetic and IEEE-754 multiplies/adds are used, so
outputs are reproducible across interpreters and architectures.
"""

from __future__ import annotations

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One SplitMix64 finalizer step on a 64-bit value."""
    x = (x + GOLDEN) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def _mix(key: int, value: int) -> int:
    return splitmix64((key ^ splitmix64(value & MASK64)) & MASK64)


def _fold_label(key: int, label) -> int:
    if isinstance(label, bool):  # bool is an int subclass; keep it distinct
        return _mix(_mix(key, 0x42), int(label))
    if isinstance(label, int):
        return _mix(key, label)
    if isinstance(label, str):
        data = label.encode("utf-8")
        key = _mix(key, len(data))
        for off in range(0, len(data), 8):
            chunk = int.from_bytes(data[off : off + 8], "little")
            key = _mix(key, chunk)
        return key
    raise TypeError(f"stream labels must be int or str, got {type(label)!r}")


class Stream:
    """An indexable random stream: value(i) depends only on (key, i)."""

    __slots__ = ("key",)

    def __init__(self, key: int):
        self.key = key & MASK64

    def u64(self, index: int) -> int:
        return splitmix64((self.key + (index + 1) * GOLDEN) & MASK64)

    def unit(self, index: int) -> float:
        """Uniform float64 in [0, 1) with 53 bits of entropy."""
        return (self.u64(index) >> 11) * 2.0**-53

    def units(self, count: int, offset: int = 0) -> np.ndarray:
        return np.array([self.unit(offset + i) for i in range(count)], dtype=np.float64)

    def symmetric(self, count: int, offset: int = 0) -> np.ndarray:
        """Uniform float64 in [-1, 1)."""
        return self.units(count, offset) * 2.0 - 1.0

    def integers(self, count: int, bound: int, offset: int = 0) -> list[int]:
        """Integers in [0, bound) by rejection-free modulo (bias < 2**-40 for small bounds)."""
        return [self.u64(offset + i) % bound for i in range(count)]

    def sub(self, *labels) -> "Stream":
        return Stream(_fold_labels(self.key, labels))


def _fold_labels(key: int, labels) -> int:
    for label in labels:
        key = _fold_label(key, label)
    return key


def stream(seed: int, *labels) -> Stream:
    """Derive the stream for (seed, *labels)."""
    return Stream(_fold_labels(splitmix64(seed & MASK64), labels))
