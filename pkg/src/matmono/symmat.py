"""Dense real symmetric matrices: eigendecomposition, functional calculus,
states, random generators and direct-sum padding.

Matrices are plain ``numpy`` float arrays. Functions that need symmetry call
:func:`sym`, which symmetrizes exactly by averaging with the transpose.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from . import _defaults
from ._jacobi import jacobi_sweeps
from .scalarfn import DomainError, ScalarFunction, evaluate

__all__ = [
    "MAX_DIM",
    "ConvergenceError",
    "Spectrum",
    "State",
    "sym",
    "eig_sym",
    "apply_fn",
    "abs_diff",
    "lambda_min",
    "psd_tol",
    "is_psd",
    "functional",
    "random_orthogonal",
    "random_psd",
    "random_ordered_pair",
    "random_contraction",
    "direct_sum_pad",
    "matrix_from_json",
    "matrix_to_json",
    "load_matrix",
    "load_state",
]

MAX_DIM = 64


class ConvergenceError(RuntimeError):
    pass


def sym(M) -> np.ndarray:
    """Return ``M`` as a float symmetric array, ``(M + M.T) / 2``."""
    M = np.array(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if not 1 <= M.shape[0] <= MAX_DIM:
        raise ValueError(f"dimension must be in 1..{MAX_DIM}, got {M.shape[0]}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return (M + M.T) / 2


def max_norm(M) -> float:
    return float(np.max(np.abs(M))) if np.size(M) else 0.0


class Spectrum(NamedTuple):
    """Eigenvalues in ascending order with orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def rebuild(self, values=None) -> np.ndarray:
        """``Q diag(values) Q^T`` (the original matrix when ``values`` is None)."""
        w = self.eigenvalues if values is None else values
        Q = self.eigenvectors
        return sym((Q * w) @ Q.T)


def eig_sym(A) -> Spectrum:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations."""
    a = sym(A)
    v, _, converged = jacobi_sweeps(a, _defaults.JACOBI_TOL, _defaults.JACOBI_MAX_SWEEPS)
    if not converged:
        raise ConvergenceError(
            f"Jacobi did not converge in {_defaults.JACOBI_MAX_SWEEPS} sweeps"
        )
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return Spectrum(w[order], np.ascontiguousarray(v[:, order]))


def _values(fn, w):
    if isinstance(fn, ScalarFunction):
        return evaluate(fn, w)
    out = np.asarray(fn(w), dtype=np.float64)
    if not np.all(np.isfinite(out)):
        raise DomainError("non-finite function value on spectrum")
    return out


def apply_fn(
    fn: ScalarFunction | Callable,
    A,
    clamp: float | None = _defaults.CLAMP,
    spectrum: Spectrum | None = None,
) -> np.ndarray:
    """Functional calculus ``Q diag(fn(max(lambda_i, clamp))) Q^T``.

    ``clamp=None`` applies ``fn`` to the raw eigenvalues. ``clamp=0.0`` only
    removes negative rounding noise, which keeps exact fixtures exact.
    """
    spec = eig_sym(A) if spectrum is None else spectrum
    w = spec.eigenvalues
    if clamp is not None:
        w = np.maximum(w, clamp)
    return spec.rebuild(_values(fn, w))


def abs_diff(A, B) -> np.ndarray:
    """Spectral absolute value ``|A - B|``."""
    A, B = sym(A), sym(B)
    if A.shape != B.shape:
        raise ValueError(f"dimension mismatch: {A.shape} vs {B.shape}")
    spec = eig_sym(A - B)
    return spec.rebuild(np.abs(spec.eigenvalues))


def lambda_min(M) -> float:
    return float(eig_sym(M).eigenvalues[0])


def psd_tol(*mats, rel: float = _defaults.PSD_EPS_REL) -> float:
    """Scale-relative PSD tolerance ``rel * max(1, max_i ||M_i||_max)``.

    Pass the operands of a difference as well as the difference itself so
    cancellation error is covered.
    """
    scale = max([1.0] + [max_norm(M) for M in mats])
    return rel * scale


def is_psd(M, eps: float | None = None) -> bool:
    eps = psd_tol(M) if eps is None else eps
    return lambda_min(M) >= -eps


@dataclass(frozen=True, eq=False)
class State:
    """Positive functional ``X -> trace(S X)``.

    ``weight=None`` is the canonical (unnormalized) trace. A density state has
    unit trace; ``unit_trace=False`` admits any positive weight, as in the
    functional ``Tr(diag(s, 1) X)``.
    """

    weight: np.ndarray | None = None
    unit_trace: bool = True

    def __post_init__(self):
        if self.weight is None:
            return
        S = sym(self.weight)
        object.__setattr__(self, "weight", S)
        if lambda_min(S) < -1e-10:
            raise ValueError("state weight is not positive semidefinite")
        if self.unit_trace and abs(np.trace(S) - 1) > 1e-10:
            raise ValueError(f"density state must have unit trace, got {np.trace(S)!r}")

    @classmethod
    def canonical(cls) -> "State":
        return cls(None)

    @classmethod
    def density(cls, S) -> "State":
        return cls(S, True)

    @classmethod
    def positive(cls, S) -> "State":
        return cls(S, False)

    @classmethod
    def vector(cls, xi) -> "State":
        """Rank-one state ``X -> <X xi, xi>`` for a unit vector ``xi``."""
        xi = np.asarray(xi, dtype=np.float64)
        xi = xi / np.linalg.norm(xi)
        return cls(np.outer(xi, xi), True)

    @property
    def is_canonical(self) -> bool:
        return self.weight is None

    def __call__(self, X) -> float:
        return functional(self, X)

    def pad(self, m: int) -> "State":
        """Extend by zero weight on ``m`` extra coordinates."""
        if self.weight is None:
            return self
        return State(direct_sum_pad(self.weight, m, 0.0), self.unit_trace)

    def to_json(self):
        if self.weight is None:
            return "trace"
        return {"unit_trace": self.unit_trace, **matrix_to_json(self.weight)}


def functional(state: State, X) -> float:
    """``trace(S X)``, or ``trace(X)`` for the canonical trace."""
    X = np.asarray(X, dtype=np.float64)
    if state.weight is None:
        return float(np.trace(X))
    if state.weight.shape != X.shape:
        raise ValueError(f"dimension mismatch: state {state.weight.shape} vs {X.shape}")
    return float(np.sum(state.weight * X))


# --------------------------------------------------------------------------
# Random generators. Every generator takes an explicit numpy Generator.


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.where(np.diag(R) < 0, -1.0, 1.0)


def random_psd(n: int, spec_lo: float, spec_hi: float, rng: np.random.Generator) -> np.ndarray:
    """Random symmetric matrix with eigenvalues log-uniform in ``[spec_lo, spec_hi]``."""
    if not 0 < spec_lo <= spec_hi:
        raise ValueError(f"need 0 < spec_lo <= spec_hi, got {spec_lo}, {spec_hi}")
    w = np.exp(rng.uniform(math.log(spec_lo), math.log(spec_hi), n))
    Q = random_orthogonal(n, rng)
    return sym((Q * w) @ Q.T)


def random_ordered_pair(
    n: int,
    rng: np.random.Generator,
    spec_lo: float = 1e-3,
    spec_hi: float = 1e3,
) -> tuple[np.ndarray, np.ndarray]:
    """Random ``0 < A <= B`` with ``B = A + P``, ``P`` PSD of random rank.

    ``A`` has spectrum in ``[spec_lo, spec_hi]``; ``P`` is scaled so the top
    of ``B``'s spectrum stays below ``spec_hi`` (up to rounding).
    """
    spec_lo = max(spec_lo, _defaults.CLAMP)
    A = random_psd(n, spec_lo, spec_hi, rng)
    rank = int(rng.integers(0, n + 1))
    G = rng.standard_normal((n, rank))
    P = G @ G.T
    top = eig_sym(A).eigenvalues[-1]
    room = spec_hi - top
    p_top = eig_sym(P).eigenvalues[-1] if rank else 0.0
    if rank and room > 0 and p_top > 0:
        P = P * (room * math.exp(rng.uniform(math.log(1e-6), 0.0)) / p_top)
    else:
        P = np.zeros((n, n))
    return A, sym(A + P)


def random_contraction(n: int, rng: np.random.Generator) -> np.ndarray:
    """Random real matrix with spectral norm at most 1.

    One draw in eight is an orthogonal matrix (all singular values 1).
    """
    if rng.random() < 0.125:
        return random_orthogonal(n, rng)
    G = rng.standard_normal((n, n))
    u = 1.0 - rng.random()  # (0, 1]
    return G * (u / np.linalg.norm(G, 2))


def direct_sum_pad(A, m: int, fill: float = 1.0) -> np.ndarray:
    """Block diagonal ``A (+) fill * I_m``."""
    A = sym(A)
    if m < 0:
        raise ValueError("padding size must be >= 0")
    n = A.shape[0]
    out = np.zeros((n + m, n + m))
    out[:n, :n] = A
    out[n:, n:] = fill * np.eye(m)
    return out


# --------------------------------------------------------------------------
# JSON matrix format: {"n": <int>, "data": [[row], ...]}


def matrix_from_json(obj) -> np.ndarray:
    if not isinstance(obj, dict) or "data" not in obj:
        raise ValueError("matrix JSON needs a 'data' field")
    M = np.array(obj["data"], dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"matrix data must be square, got shape {M.shape}")
    if "n" in obj and obj["n"] != M.shape[0]:
        raise ValueError(f"declared n={obj['n']} but data is {M.shape[0]}x{M.shape[1]}")
    asym = max_norm(M - M.T)
    if asym > 1e-9:
        warnings.warn(f"matrix asymmetric by {asym:.3g}; symmetrizing", stacklevel=2)
    return sym(M)


def matrix_to_json(M) -> dict:
    M = np.asarray(M, dtype=np.float64)
    return {"n": int(M.shape[0]), "data": M.tolist()}


def load_matrix(path) -> np.ndarray:
    with open(path) as fh:
        return matrix_from_json(json.load(fh))


def load_state(path) -> State:
    """Read a density state (unit-trace PSD weight) from a matrix JSON file."""
    with open(path) as fh:
        obj = json.load(fh)
    return State(matrix_from_json(obj), bool(obj.get("unit_trace", True)))
