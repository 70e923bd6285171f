"""Shared numerical defaults. Every tolerance in the package is read from here."""

# Working interval for functions on (0, inf).
DOMAIN_LO = 1e-6
DOMAIN_HI = 1e6

# Eigenvalues below this are raised to it before a function is applied.
CLAMP = 1e-6

# PSD verdicts: lambda_min(M) >= -PSD_EPS_REL * max(1, scale).
PSD_EPS_REL = 1e-8

# Scalar inequality margins (trace/state inequalities).
SCALAR_TOL = 1e-7

# Divided differences switch to the derivative below this relative gap.
CONFLUENCE_REL = 1e-7

# Divisors smaller than this in magnitude are domain errors.
DIV_GUARD = 1e-300

# Cyclic Jacobi stopping rule.
JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100

# Boundary cases (C = I, projections, midpoint weights) are injected on
# every trial index divisible by this.
INJECT_EVERY = 16

# Trials handed to a worker at once.
CHUNK_SIZE = 256
