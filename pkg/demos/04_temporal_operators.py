#!/usr/bin/env python3
"""The temporal feature operators on a matrix small enough to read.

Walks a 5-unit, 6-channel window through the alternating channel shift,
the multi-scale differences, and the pooled aggregate, then demonstrates
the exact algebraic properties the test suite holds them to.
"""

import numpy as np

from modalsim import rng
from modalsim.aggregation import (
    DiffSpec,
    ShiftSpec,
    aggregate,
    alternating_shift,
    group_slices,
    temporal_differences,
)
from modalsim.core import FeatureMatrix

np.set_printoptions(precision=3, suppress=True)

vals = rng.stream(7, "demo").symmetric(5 * 6).reshape(5, 6)
m = FeatureMatrix(vals, 5)
shift = ShiftSpec(n_groups=3, shift_distance=1)
diff = DiffSpec(scales=(1, 2), encoder_width=4)

print("input rows (5 units x 6 channels):")
print(m.values, "\n")

print("channel groups:", [(s.start, s.stop) for s in group_slices(6, 3)])
shifted = alternating_shift(m, shift)
print("after the alternating shift (group 1 from unit i-1, group 3 from i+1,")
print("boundary units kept as-is):")
print(shifted.values, "\n")

for mat, scale in zip(temporal_differences(m, diff), diff.scales):
    print(f"scale-{scale} differences ({mat.valid_prefix} rows):")
    print(mat.values, "\n")

vec = aggregate(m, shift, diff)
print(f"aggregate vector ({len(vec)} = 6 channels + 2 scales x width 4):")
print(vec, "\n")

x = rng.stream(8, "x").symmetric(5 * 6).reshape(5, 6)
y = rng.stream(9, "y").symmetric(5 * 6).reshape(5, 6)
lhs = aggregate(FeatureMatrix(2 * x - 3 * y, 5), shift, diff)
rhs = 2 * aggregate(FeatureMatrix(x, 5), shift, diff) - 3 * aggregate(FeatureMatrix(y, 5), shift, diff)
print("linearity: aggregate(2x - 3y) == 2*aggregate(x) - 3*aggregate(y):",
      bool(np.allclose(lhs, rhs, atol=1e-12)))

swapped = vals.copy()
swapped[[2, 3]] = swapped[[3, 2]]
print("order sensitivity: swapping two interior units changes the aggregate:",
      not np.allclose(vec, aggregate(FeatureMatrix(swapped, 5), shift, diff)))

print("identity cases: one group ->",
      bool(np.array_equal(alternating_shift(m, ShiftSpec(1, 1)).values, m.values)),
      "| k >= N ->",
      bool(np.array_equal(alternating_shift(m, ShiftSpec(3, 5)).values, m.values)))
