"""
The infimum condition and the exponential example
=================================================

For increasing g the ratio sqrt(g'(a) g'(b)) / g[a, b] measures how far
g is from linear between a and b. Its infimum decides whether the trace
is the only state for which the inequality can hold.
"""
import numpy as np

from matmono import DomainInterval
from matmono.psineq import (
    exp_example_check,
    golden_thompson_margin,
    trace_condition_inf,
)
from matmono.symmat import random_ordered_pair

for g, lo, hi in [("t", 1e-3, 1e3), ("t^2", 1e-3, 1e3), ("t^2", 1e-4, 1e4), ("exp(t)", 1, 30)]:
    est = trace_condition_inf(g, DomainInterval(lo, hi), 128)
    print(f"{g:7s} on ({lo:g}, {hi:g}): inf {est.value:.3e} at {est.argmin_pair}")

# For t^2 the ratio is 2 sqrt(ab)/(a+b), smallest at the widest pair
a, b = 1e3, 1e-3
print("closed form at the corners:", 2 * np.sqrt(a * b) / (a + b))

# g = e^t, f = t e^-t: check the ordered inequality on random pairs
rng = np.random.default_rng(0)
worst = worst_gt = np.inf
for _ in range(200):
    A, B = random_ordered_pair(4, rng, 0.05, 4.0)
    m, gt = exp_example_check(A, B)
    worst, worst_gt = min(worst, m), min(worst_gt, gt)
print("\nexp example: worst margin", worst, " worst Golden-Thompson gap", worst_gt)

# Golden-Thompson alone for unrelated symmetric X, Y
X = rng.standard_normal((3, 3))
Y = rng.standard_normal((3, 3))
print("Tr(e^X e^Y) - Tr(e^(X+Y)) =", golden_thompson_margin(X + X.T, Y + Y.T))
