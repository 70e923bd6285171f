"""
Scalar expressions and the matrix functional calculus
=====================================================

A function is written as text, parsed once, then evaluated on numbers,
on arrays, and on symmetric matrices through their eigenvalues.
"""
import numpy as np

from matmono import apply_fn, companion, eig_sym, eval_dual, parse
from matmono.scalarfn import to_text

# A small expression language over the variable t
f = parse("t/(1+t) + sqrt(t)")
print("f        =", to_text(f))
print("f(4)     =", f(4.0))

# Forward-mode derivatives come with the value in one pass
value, slope = eval_dual(f, 4.0)
print("f'(4)    =", slope, "(exact: 1/25 + 1/4 =", 1 / 25 + 1 / 4, ")")

# Arrays broadcast
ts = np.geomspace(0.1, 10, 5)
print("f(ts)    =", np.round(f(ts), 4))

# The companion g(t) = t / f(t) pairs each f with a second function
g = companion(parse("t^2"))
print("\ncompanion of t^2 is", to_text(g), "-> g(2) =", g(2.0))

# Matrix functions act on the spectrum
A = np.array([[2.0, 1.0], [1.0, 2.0]])
spec = eig_sym(A)
print("\neigenvalues of A      :", spec.eigenvalues)
print("A^-1 via calculus     :\n", apply_fn(parse("1/t"), A))
print("A^-1 via linear solve :\n", np.linalg.inv(A))

# f(A)^(1/2) g(A) f(A)^(1/2) = A for any companion pair
fs = parse("t^0.3")
h = apply_fn(lambda w: np.sqrt(fs(w)), A)
print("\nsandwich recovers A   :\n", h @ apply_fn(companion(fs), A) @ h)
