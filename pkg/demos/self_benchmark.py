"""Using the p-value's own confidence posterior as the working posterior.

The closed form max(kappa * pi_low + (1 - kappa) * p, p) can fall below the
lower bound pi_low whenever kappa < 1 and p < pi_low.
"""

import numpy as np

from caution import self_benchmark_blend

pi_low = 0.2
print(" p       " + "  ".join(f"k={k:.2f}" for k in (0.0, 0.25, 0.5, 0.75, 1.0)))
for p in (0.01, 0.05, 0.1, 0.3):
    row = [self_benchmark_blend(p, pi_low, k).p0 for k in (0.0, 0.25, 0.5, 0.75, 1.0)]
    print(f" {p:<6}" + "".join(f"{v:8.4f}" for v in row))

below = [k for k in np.linspace(0, 1, 11) if self_benchmark_blend(0.05, pi_low, k).p0 < pi_low]
print(f"null mass below {pi_low} for {len(below)} of 11 caution levels")
