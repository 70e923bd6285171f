"""
From a non-monotone g to a violating state
==========================================

If g is not matrix monotone there are 0 < A <= B with g(A) not below
g(B). The top eigenvector of A - f(A)^1/2 g(B) f(A)^1/2 then defines a
vector state for which the ordered inequality fails.
"""
import numpy as np

from matmono import State, companion, parse, replay
from matmono.psineq import counterexample_search, ps_margin_ordered
from matmono.symmat import direct_sum_pad

for g in ("t^3", "t^2"):
    v = counterexample_search(g, 2, trials=100_000, seed=11)
    w = v.witness
    print(f"g = {g}: {v.status} at trial {w.trial}")
    print("  A =", np.round(w.inputs["A"], 4).tolist())
    print("  B =", np.round(w.inputs["B"], 4).tolist())
    print("  order margin      :", w.margin)
    sw = w.extra["state_witness"]
    print("  xi                :", w.extra["xi"])
    print("  state margin      :", sw.margin, " replayed:", replay(sw))

    # the same state still separates after padding with an identity block
    f = companion(parse(g))
    xi = np.concatenate([w.extra["xi"], [0.0, 0.0]])
    padded = ps_margin_ordered(
        f, State.vector(xi), direct_sum_pad(w.inputs["A"], 2), direct_sum_pad(w.inputs["B"], 2)
    )
    print("  padded state margin:", padded)

v = counterexample_search("t", 3, trials=2000, seed=11)
print("\ng = t:", v.status)
