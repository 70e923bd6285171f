"""
Falsifying matrix monotonicity
==============================

A function can be increasing on numbers yet fail to preserve the PSD
order on matrices. The Loewner matrix of divided differences detects
this, and a randomized search turns it into a replayable witness.
"""
import numpy as np

from matmono import (
    chain_consistency,
    check_n_monotone,
    frechet_derivative,
    loewner_matrix,
    parse,
    replay,
)

# t^2 at nodes 1 and 2: the Loewner matrix has a negative determinant
L = loewner_matrix(parse("t^2"), [1.0, 2.0])
print("Loewner matrix of t^2 at (1, 2):\n", L, "\ndet =", np.linalg.det(L))

# sqrt is operator monotone so the same matrix is PSD at every node set
L = loewner_matrix(parse("sqrt(t)"), [0.5, 3.0, 40.0])
print("\neigenvalues for sqrt at (0.5, 3, 40):", np.linalg.eigvalsh(L))

# Randomized search
bad = check_n_monotone("t^2", 2, trials=1000, seed=7)
print("\nt^2 at order 2 :", bad.status, "after", bad.trials_run, "trials")
w = bad.witness
print("  witness kind :", w.property_id, " margin", w.margin)
print("  replayed     :", replay(w))

good = check_n_monotone("sqrt(t)", 4, trials=1000, seed=7)
print("sqrt at order 4:", good.status, " min margin", good.min_margin)

# The derivative in a direction C is the Loewner matrix acting entrywise
A = np.diag([1.0, 4.0])
C = np.array([[0.0, 1.0], [1.0, 0.0]])
print("\nDerivative of sqrt at diag(1, 4) toward C:\n", frechet_derivative(parse("sqrt(t)"), A, C))

# Four related properties checked together
report = chain_consistency("sqrt(t)", 2, trials=300, seed=1)
for leg, verdict in report.legs.items():
    print(f"  {leg:24s} {verdict.status}")
print("implications consistent:", report.consistent)
