"""Matrix monotonicity and concavity falsifiers.

Loewner matrices of divided differences, the Daleckii-Krein derivative of a
matrix function, randomized tests for n-monotonicity, n-concavity and the
contraction inequality ``f(C^T A C) >= C^T f(A) C``, and a consistency check
across the implication chain linking these properties.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from . import _defaults
from .scalarfn import DomainError, DomainInterval, ScalarFunction, companion, eval_dual, evaluate
from .symmat import (
    apply_fn,
    eig_sym,
    lambda_min,
    psd_tol,
    random_contraction,
    random_ordered_pair,
    random_psd,
    sym,
)
from .verdict import (
    DOMAIN_ERROR,
    HOLDS,
    VIOLATED,
    Verdict,
    Witness,
    as_function,
    margin_function,
    resolve_seed,
    run_trials,
)

__all__ = [
    "NodeGrid",
    "Verdict",
    "Witness",
    "ChainReport",
    "divided_difference",
    "divided_differences",
    "loewner_matrix",
    "frechet_derivative",
    "check_n_monotone",
    "check_n_concave",
    "check_hansen_pedersen",
    "chain_consistency",
]


@dataclass(frozen=True, eq=False)
class NodeGrid:
    """Strictly increasing nodes inside an open domain interval."""

    nodes: np.ndarray
    domain: DomainInterval = field(default_factory=DomainInterval)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=np.float64)
        if nodes.ndim != 1 or nodes.size == 0:
            raise ValueError("nodes must be a non-empty 1-d array")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must be strictly increasing")
        if not self.domain.contains(nodes):
            raise ValueError(f"nodes must lie in ({self.domain.lo}, {self.domain.hi})")
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def log_uniform(cls, k: int, domain: DomainInterval, rng: np.random.Generator) -> "NodeGrid":
        lo, hi = sampling_bounds(domain)
        nodes = np.sort(np.exp(rng.uniform(math.log(lo), math.log(hi), k)))
        return cls(nodes, domain)


def sampling_bounds(domain: DomainInterval) -> tuple[float, float]:
    """Closed sampling range strictly inside ``domain``; caps an infinite top."""
    hi = domain.hi if math.isfinite(domain.hi) else domain.lo * 1e12
    return domain.lo * (1 + 1e-9), hi * (1 - 1e-9)


# --------------------------------------------------------------------------
# Divided differences and derivatives


def _confluent(x, y):
    return np.abs(x - y) < _defaults.CONFLUENCE_REL * np.maximum(1.0, np.maximum(np.abs(x), np.abs(y)))


def divided_difference(fn: ScalarFunction, x: float, y: float) -> float:
    """``(f(x) - f(y)) / (x - y)``, or ``f'((x + y) / 2)`` when ``x ~ y``."""
    if _confluent(x, y):
        return eval_dual(fn, 0.5 * (x + y))[1]
    return (evaluate(fn, x) - evaluate(fn, y)) / (x - y)


def divided_differences(fn: ScalarFunction, x, y) -> np.ndarray:
    """Elementwise :func:`divided_difference` over broadcast arrays."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64))
    out = np.empty(x.shape)
    conf = _confluent(x, y)
    if np.any(conf):
        out[conf] = eval_dual(fn, 0.5 * (x[conf] + y[conf]))[1]
    far = ~conf
    if np.any(far):
        out[far] = (evaluate(fn, x[far]) - evaluate(fn, y[far])) / (x[far] - y[far])
    return out


def loewner_matrix(fn: ScalarFunction, grid) -> np.ndarray:
    """Matrix of divided differences ``[f[x_i, x_j]]`` with ``f'(x_i)`` on the diagonal.

    ``grid`` is a :class:`NodeGrid` or any 1-d array of nodes (repeats allowed).
    """
    x = grid.nodes if isinstance(grid, NodeGrid) else np.asarray(grid, dtype=np.float64)
    X, Y = np.meshgrid(x, x, indexing="ij")
    L = divided_differences(fn, X, Y)
    L[np.diag_indices_from(L)] = eval_dual(fn, x)[1]
    return sym(L)


def frechet_derivative(fn: ScalarFunction, A, C, clamp: float | None = _defaults.CLAMP) -> np.ndarray:
    """Directional derivative ``d/dt fn(A + tC)`` at ``t = 0`` (Daleckii-Krein).

    In the eigenbasis of ``A`` the derivative is the Hadamard product of the
    Loewner matrix at the eigenvalues with the rotated direction.
    """
    A, C = sym(A), sym(C)
    if A.shape != C.shape:
        raise ValueError(f"dimension mismatch: {A.shape} vs {C.shape}")
    spec = eig_sym(A)
    w = spec.eigenvalues if clamp is None else np.maximum(spec.eigenvalues, clamp)
    Q = spec.eigenvectors
    return sym(Q @ (loewner_matrix(fn, w) * (Q.T @ C @ Q)) @ Q.T)


# --------------------------------------------------------------------------
# Margin functions. Each returns (margin, tol); violated iff margin < -tol.


@margin_function("loewner-psd")
def loewner_margin(fn, nodes, psd_eps=_defaults.PSD_EPS_REL):
    L = loewner_matrix(as_function(fn), nodes)
    return lambda_min(L), psd_tol(L, rel=psd_eps)


@margin_function("order-monotone")
def order_margin(fn, A, B, clamp=_defaults.CLAMP, psd_eps=_defaults.PSD_EPS_REL):
    fn = as_function(fn)
    fA = apply_fn(fn, A, clamp)
    fB = apply_fn(fn, B, clamp)
    D = fB - fA
    return lambda_min(D), psd_tol(D, fA, fB, rel=psd_eps)


@margin_function("concave-jensen")
def concave_margin(fn, A, B, weight, clamp=_defaults.CLAMP, psd_eps=_defaults.PSD_EPS_REL):
    fn = as_function(fn)
    mix = apply_fn(fn, weight * np.asarray(A) + (1 - weight) * np.asarray(B), clamp)
    fA = apply_fn(fn, A, clamp)
    fB = apply_fn(fn, B, clamp)
    D = mix - weight * fA - (1 - weight) * fB
    return lambda_min(D), psd_tol(D, mix, fA, fB, rel=psd_eps)


@margin_function("contraction")
def contraction_margin(fn, A, C, clamp=_defaults.CLAMP, psd_eps=_defaults.PSD_EPS_REL):
    fn = as_function(fn)
    A = np.asarray(A)
    C = np.asarray(C)
    lhs = apply_fn(fn, C.T @ A @ C, clamp)
    rhs = sym(C.T @ apply_fn(fn, A, clamp) @ C)
    D = lhs - rhs
    return lambda_min(D), psd_tol(D, lhs, rhs, rel=psd_eps)


@margin_function("nonneg-at-zero")
def nonneg_margin(fn, t):
    """``f(t) >= 0`` at the bottom of the working interval."""
    return evaluate(as_function(fn), t), 0.0


# --------------------------------------------------------------------------
# Samplers (module level so they pickle for worker processes)


def _sample_monotone(i, rng, fn, n, domain, psd_eps):
    lo, hi = sampling_bounds(domain)
    grid = NodeGrid.log_uniform(n, domain, rng)
    A, B = random_ordered_pair(n, rng, lo, hi)
    if i % _defaults.INJECT_EVERY == 0:
        B = A
    return [
        ("loewner-psd", dict(fn=fn, nodes=grid.nodes, psd_eps=psd_eps)),
        ("order-monotone", dict(fn=fn, A=A, B=B, psd_eps=psd_eps)),
    ]


def _sample_concave(i, rng, fn, n, domain, psd_eps):
    lo, hi = sampling_bounds(domain)
    A = random_psd(n, lo, hi, rng)
    B = random_psd(n, lo, hi, rng)
    weight = 0.5 if i % _defaults.INJECT_EVERY == 0 else float(rng.uniform(0.0, 1.0))
    return [("concave-jensen", dict(fn=fn, A=A, B=B, weight=weight, psd_eps=psd_eps))]


def _boundary_contraction(i, n):
    k = i % _defaults.INJECT_EVERY
    if k == 0:
        return np.eye(n)
    if k == 4:
        return np.diag(np.r_[np.ones(n - 1), 0.0])
    if k == 8:
        return np.full((n, n), 1.0 / n)
    return None


def _sample_contraction(i, rng, fn, n, domain, psd_eps):
    lo, hi = sampling_bounds(domain)
    A = random_psd(n, lo, hi, rng)
    C = random_contraction(n, rng)
    boundary = _boundary_contraction(i, n)
    if boundary is not None:
        C = boundary
    return [("contraction", dict(fn=fn, A=A, C=C, psd_eps=psd_eps))]


# --------------------------------------------------------------------------
# Checks


def check_n_monotone(fn, n: int, domain: DomainInterval | None = None, trials: int = 1000,
                     seed=0, jobs: int = 1, psd_eps: float = _defaults.PSD_EPS_REL) -> Verdict:
    """Falsify ``A <= B => f(A) <= f(B)`` for n x n matrices.

    Each trial tests the Loewner matrix at ``n`` log-uniform nodes for
    positivity, then a random ordered pair directly.
    """
    if n < 1:
        raise ValueError("order must be >= 1")
    fn = as_function(fn)
    domain = domain or DomainInterval()
    sampler = partial(_sample_monotone, fn=fn, n=n, domain=domain, psd_eps=psd_eps)
    return run_trials(sampler, trials, resolve_seed(seed), jobs)


def check_n_concave(fn, n: int, domain: DomainInterval | None = None, trials: int = 1000,
                    seed=0, jobs: int = 1, psd_eps: float = _defaults.PSD_EPS_REL) -> Verdict:
    """Falsify ``f(wA + (1-w)B) >= w f(A) + (1-w) f(B)`` for n x n matrices."""
    if n < 1:
        raise ValueError("order must be >= 1")
    fn = as_function(fn)
    domain = domain or DomainInterval()
    sampler = partial(_sample_concave, fn=fn, n=n, domain=domain, psd_eps=psd_eps)
    return run_trials(sampler, trials, resolve_seed(seed), jobs)


def check_hansen_pedersen(fn, n: int, trials: int = 1000, seed=0, jobs: int = 1,
                          domain: DomainInterval | None = None,
                          psd_eps: float = _defaults.PSD_EPS_REL) -> Verdict:
    """Falsify ``f(C^T A C) >= C^T f(A) C`` over contractions ``C``.

    ``C^T A C`` may be singular; its spectrum is clamped to the working
    interval before ``f`` is applied. ``C = I``, a coordinate projection and
    the projection onto the all-ones vector are injected deterministically.
    """
    if n < 1:
        raise ValueError("order must be >= 1")
    fn = as_function(fn)
    domain = domain or DomainInterval()
    sampler = partial(_sample_contraction, fn=fn, n=n, domain=domain, psd_eps=psd_eps)
    return run_trials(sampler, trials, resolve_seed(seed), jobs)


# --------------------------------------------------------------------------
# Implication chain

# Implications (antecedent, consequent) between chain legs, including the
# transitive ones. Concavity at n+1 implies the contraction inequality at n,
# which is equivalent to monotonicity of t/f(t) at n, which implies
# concavity at floor(n/2).
LEGS = ("concave_n_plus_1", "contraction_n", "companion_monotone_n", "concave_half_n")
IMPLICATIONS = (
    ("concave_n_plus_1", "contraction_n"),
    ("concave_n_plus_1", "companion_monotone_n"),
    ("concave_n_plus_1", "concave_half_n"),
    ("contraction_n", "companion_monotone_n"),
    ("companion_monotone_n", "contraction_n"),
    ("contraction_n", "concave_half_n"),
    ("companion_monotone_n", "concave_half_n"),
)


@dataclass
class ChainReport:
    order: int
    legs: dict
    inconsistencies: list

    @property
    def consistent(self) -> bool:
        return not self.inconsistencies

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "legs": {k: v.to_json() for k, v in self.legs.items()},
            "inconsistencies": [list(p) for p in self.inconsistencies],
        }


def _concave_leg(fn, n, domain, trials, seed, jobs, psd_eps):
    # f(0) >= 0 is read at the bottom of the working interval.
    try:
        value, _ = nonneg_margin(fn, domain.lo)
    except DomainError as exc:
        return Verdict(DOMAIN_ERROR, 0, math.nan, error=str(exc), error_point=exc.point)
    if value < 0:
        w = Witness("nonneg-at-zero", dict(fn=fn, t=domain.lo), value, 0.0)
        return Verdict(VIOLATED, 0, value, witness=w)
    return check_n_concave(fn, n, domain, trials, seed, jobs, psd_eps)


def chain_consistency(fn_f, n: int, trials: int = 1000, seed=0, jobs: int = 1,
                      domain: DomainInterval | None = None,
                      psd_eps: float = _defaults.PSD_EPS_REL) -> ChainReport:
    """Run the four chain legs and flag verdict combinations the chain forbids.

    A leg that holds within budget is weak evidence, so only the pattern
    "antecedent holds, consequent violated" is reported. Such a flag means a
    bug in the toolkit or a falsifier that missed a counterexample.
    """
    if n < 2:
        raise ValueError("chain order must be >= 2")
    f = as_function(fn_f)
    g = companion(f)
    domain = domain or DomainInterval()
    seed = resolve_seed(seed)
    legs = {
        "concave_n_plus_1": _concave_leg(f, n + 1, domain, trials, seed, jobs, psd_eps),
        "contraction_n": check_hansen_pedersen(f, n, trials, seed, jobs, domain, psd_eps),
        "companion_monotone_n": check_n_monotone(g, n, domain, trials, seed, jobs, psd_eps),
        "concave_half_n": _concave_leg(f, n // 2, domain, trials, seed, jobs, psd_eps),
    }
    flags = [
        (a, b) for a, b in IMPLICATIONS
        if legs[a].status == HOLDS and legs[b].status == VIOLATED
    ]
    return ChainReport(n, legs, flags)
