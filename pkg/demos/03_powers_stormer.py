"""
The generalized Powers-Stormer trace inequality
===============================================

For positive f with companion g = t/f, the inequality compares
phi(A) + phi(B) - phi(|A - B|) with 2 phi(f(A)^1/2 g(B) f(A)^1/2).
"""
import numpy as np

from matmono import State, parse
from matmono.psineq import (
    SQUARE_FIXTURE_A,
    SQUARE_FIXTURE_B,
    PSCheckConfig,
    check_ps,
    square_fixture_padded,
    ps_margin,
    ps_margin_ordered,
)

trace = State.canonical()

# A fixed 2x2 pair with A <= B where f = t^2 breaks the ordered form
A, B = SQUARE_FIXTURE_A, SQUARE_FIXTURE_B
print("B - A eigenvalues:", np.linalg.eigvalsh(B - A))
print("A B^-1 A =\n", A @ np.linalg.solve(B, A))
print("ordered margin for t^2:", ps_margin_ordered(parse("t^2"), trace, A, B, clamp=0.0))

# Padding with an identity block leaves the margin unchanged
A4, B4 = square_fixture_padded(4)
print("padded to 4x4        :", ps_margin_ordered(parse("t^2"), trace, A4, B4, clamp=0.0))
print("full margin at 4x4   :", ps_margin(parse("t^2"), trace, A4, B4, clamp=0.0))

# Concave choices of f satisfy the inequality on random pairs
for text in ("t", "sqrt(t)", "t/(1+t)"):
    v = check_ps(PSCheckConfig(text, 4, trials=500, seed=3))
    print(f"\n{text:8s}: {v.status}, min margin {v.min_margin:.2e}")

# The trace is special: a skewed density breaks f = 1/t
skewed = State.density(np.diag([0.2, 0.8]))
v = check_ps(PSCheckConfig("1/t", 2, trials=5000, state=skewed, ordered_only=True, seed=1))
print("\n1/t with diag(0.2, 0.8):", v.status, "at trial", v.witness.trial, "margin", v.witness.margin)
v = check_ps(PSCheckConfig("1/t", 2, trials=5000, ordered_only=True, seed=1))
print("1/t with the trace     :", v.status)
