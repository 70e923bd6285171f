"""Generalized Powers-Stormer inequality and related trace inequalities.

For ``f > 0`` on ``(0, inf)`` and its companion ``g(t) = t / f(t)`` the
inequality under test is::

    phi(A) + phi(B) - phi(|A - B|) <= 2 phi(f(A)^(1/2) g(B) f(A)^(1/2))

for positive invertible ``A, B`` and a positive functional ``phi``. When
``A <= B`` it reduces to ``phi(A) <= phi(f(A)^(1/2) g(B) f(A)^(1/2))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from . import _defaults
from .monotone import divided_differences, frechet_derivative
from .scalarfn import DomainInterval, ScalarFunction, companion, eval_dual, evaluate, parse
from .symmat import (
    State,
    abs_diff,
    apply_fn,
    direct_sum_pad,
    eig_sym,
    lambda_min,
    psd_tol,
    random_ordered_pair,
    random_psd,
    sym,
)
from .verdict import (
    Verdict,
    Witness,
    as_function,
    margin_function,
    resolve_seed,
    run_trials,
    trial_rng,
)

__all__ = [
    "OrderViolation",
    "TraceConditionError",
    "PSCheckConfig",
    "DerivCondParams",
    "InfEstimate",
    "FixtureResult",
    "SQUARE_FIXTURE_A",
    "SQUARE_FIXTURE_B",
    "ps_margin",
    "ps_margin_ordered",
    "check_ps",
    "first_order_fixture",
    "first_order_lhs",
    "deriv_condition_closed_form",
    "trace_condition_inf",
    "exp_example_check",
    "golden_thompson_margin",
    "counterexample_search",
    "reproduce_fixtures",
]

SQUARE_FIXTURE_A = np.array([[1.0, 1.0], [1.0, 1.0]])
SQUARE_FIXTURE_B = np.array([[2.0, 1.0], [1.0, 2.0]])


class OrderViolation(ValueError):
    """``A <= B`` was required but ``B - A`` is not PSD."""


class TraceConditionError(ValueError):
    """``g`` is not strictly increasing on the sampled range."""


def _sqrt_f(fn_f: ScalarFunction):
    return lambda w: np.sqrt(evaluate(fn_f, w))


def sandwich(fn_f: ScalarFunction, A, B, clamp=_defaults.CLAMP) -> np.ndarray:
    """``f(A)^(1/2) g(B) f(A)^(1/2)`` with ``g = t / f(t)``."""
    h = apply_fn(_sqrt_f(fn_f), A, clamp)
    gB = apply_fn(companion(fn_f), B, clamp)
    return sym(h @ gB @ h)


def ps_margin(fn_f, state: State, A, B, clamp=_defaults.CLAMP) -> float:
    """``2 phi(f(A)^(1/2) g(B) f(A)^(1/2)) - phi(A) - phi(B) + phi(|A - B|)``."""
    fn_f = as_function(fn_f)
    A, B = sym(A), sym(B)
    rhs = state(sandwich(fn_f, A, B, clamp))
    return 2 * rhs - state(A) - state(B) + state(abs_diff(A, B))


def _check_order(A, B):
    D = B - A
    if lambda_min(D) < -psd_tol(D, A, B):
        raise OrderViolation("ordered form requires A <= B")


def ps_margin_ordered(fn_f, state: State, A, B, clamp=_defaults.CLAMP) -> float:
    """``phi(f(A)^(1/2) g(B) f(A)^(1/2)) - phi(A)`` for ``0 < A <= B``."""
    fn_f = as_function(fn_f)
    A, B = sym(A), sym(B)
    _check_order(A, B)
    return state(sandwich(fn_f, A, B, clamp)) - state(A)


def _state_from(weight, unit_trace):
    return State.canonical() if weight is None else State(weight, unit_trace)


def _scalar_tol(state, A, B, tol):
    return tol * max(1.0, abs(state(A)) + abs(state(B)))


@margin_function("ps-inequality")
def _ps_margin_fn(fn, A, B, weight=None, unit_trace=True, clamp=_defaults.CLAMP, tol=_defaults.SCALAR_TOL):
    state = _state_from(weight, unit_trace)
    return ps_margin(fn, state, A, B, clamp), _scalar_tol(state, A, B, tol)


@margin_function("ps-ordered")
def _ps_ordered_fn(fn, A, B, weight=None, unit_trace=True, clamp=_defaults.CLAMP, tol=_defaults.SCALAR_TOL):
    state = _state_from(weight, unit_trace)
    return ps_margin_ordered(fn, state, A, B, clamp), _scalar_tol(state, A, B, tol)


# --------------------------------------------------------------------------
# Randomized check of the inequality


@dataclass
class PSCheckConfig:
    fn_f: ScalarFunction | str
    dim: int
    trials: int = 1000
    state: State = field(default_factory=State.canonical)
    ordered_only: bool = False
    seed: int | None = 0
    spectrum: tuple = (1e-3, 1e3)
    tol: float = _defaults.SCALAR_TOL
    fixtures: bool = False
    jobs: int = 1

    def __post_init__(self):
        self.fn_f = as_function(self.fn_f)
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.state.weight is not None and self.state.weight.shape[0] != self.dim:
            raise ValueError(f"state is {self.state.weight.shape[0]}-dimensional, need {self.dim}")


def square_fixture_padded(dim: int):
    """The 2x2 pair padded by the identity to ``dim``."""
    return direct_sum_pad(SQUARE_FIXTURE_A, dim - 2, 1.0), direct_sum_pad(SQUARE_FIXTURE_B, dim - 2, 1.0)


def _sample_ps(i, rng, fn, dim, weight, unit_trace, ordered_only, spectrum, tol, fixtures):
    lo, hi = spectrum
    if fixtures and i == 0 and dim >= 2:
        A, B = square_fixture_padded(dim)
        # The fixture A is singular; clamp=0 keeps it exact.
        clamp = 0.0
    elif ordered_only:
        A, B = random_ordered_pair(dim, rng, lo, hi)
        clamp = _defaults.CLAMP
    else:
        A = random_psd(dim, lo, hi, rng)
        B = A if i % _defaults.INJECT_EVERY == 0 else random_psd(dim, lo, hi, rng)
        clamp = _defaults.CLAMP
    pid = "ps-ordered" if ordered_only else "ps-inequality"
    return [(pid, dict(fn=fn, A=A, B=B, weight=weight, unit_trace=unit_trace, clamp=clamp, tol=tol))]


def check_ps(config: PSCheckConfig) -> Verdict:
    """Search random pairs for a violation of the (ordered) inequality."""
    sampler = partial(
        _sample_ps,
        fn=config.fn_f,
        dim=config.dim,
        weight=config.state.weight,
        unit_trace=config.state.unit_trace,
        ordered_only=config.ordered_only,
        spectrum=tuple(config.spectrum),
        tol=config.tol,
        fixtures=config.fixtures,
    )
    return run_trials(sampler, config.trials, resolve_seed(config.seed), config.jobs)


# --------------------------------------------------------------------------
# First-order condition


@dataclass(frozen=True)
class DerivCondParams:
    s: float
    alpha: float
    beta: float

    def __post_init__(self):
        if not 0 <= self.s <= 1:
            raise ValueError(f"s must be in [0, 1], got {self.s}")
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if not self.beta > 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")


def first_order_fixture(p: DerivCondParams):
    """``(state, A, C)``: weight ``diag(s, 1)``, ``A = diag(beta, alpha)`` and
    the rank-one projection ``C`` onto ``(alpha, sqrt(1 - alpha^2))``."""
    a, b = p.alpha, math.sqrt(1 - p.alpha**2)
    C = np.array([[a * a, a * b], [a * b, b * b]])
    A = np.diag([p.beta, p.alpha])
    return State.positive(np.diag([p.s, 1.0])), A, C


def first_order_lhs(fn_f, state: State, A, C, clamp=_defaults.CLAMP) -> float:
    """``phi(f(A)^(1/2) Dg(A)[C] f(A)^(1/2))`` with ``Dg`` the Frechet derivative of ``g``."""
    fn_f = as_function(fn_f)
    h = apply_fn(_sqrt_f(fn_f), A, clamp)
    dg = frechet_derivative(companion(fn_f), A, C, clamp)
    return state(sym(h @ dg @ h))


def deriv_condition_closed_form(fn_f, p: DerivCondParams) -> float:
    """``s a^2 (1 - b f'(b)/f(b)) + (1 - a^2)(1 - a f'(a)/f(a))`` for ``a = alpha``, ``b = beta``."""
    fn_f = as_function(fn_f)
    fa, dfa = eval_dual(fn_f, p.alpha)
    fb, dfb = eval_dual(fn_f, p.beta)
    a2 = p.alpha**2
    return p.s * a2 * (1 - p.beta * dfb / fb) + (1 - a2) * (1 - p.alpha * dfa / fa)


# --------------------------------------------------------------------------
# Trace-characterization infimum


@dataclass
class InfEstimate:
    value: float
    argmin_pair: tuple
    grid_size: int
    range: DomainInterval


def _trace_ratio(fn_g, lam, mu):
    _, dl = eval_dual(fn_g, lam)
    _, dm = eval_dual(fn_g, mu)
    return np.sqrt(dl * dm) / divided_differences(fn_g, lam, mu)


def _nested_nodes(range: DomainInterval, grid: int) -> np.ndarray:
    parts = []
    m = grid
    while m >= 2:
        parts.append(np.geomspace(range.lo, range.hi, m))
        m //= 2
    nodes = np.sort(np.concatenate(parts))
    # geomspace at different sizes can differ in the last ulp
    keep = np.concatenate([[True], np.diff(nodes) > 1e-12 * nodes[1:]])
    return nodes[keep]


def trace_condition_inf(fn_g, range: DomainInterval, grid: int = 128) -> InfEstimate:
    """Minimum over ``lam > mu`` on a log grid of ``sqrt(g'(lam) g'(mu)) / g[lam, mu]``.

    The nodes are the union of log-spaced grids of size ``grid``,
    ``grid // 2``, ``grid // 4``, ... (each including both endpoints of
    ``range``), so doubling ``grid`` only adds nodes and the estimate never
    increases. Raises :class:`TraceConditionError` if ``g`` is not strictly
    increasing there.
    """
    fn_g = as_function(fn_g)
    if grid < 2:
        raise ValueError("grid needs at least 2 nodes")
    nodes = _nested_nodes(range, grid)
    grid_nodes = len(nodes)
    i, j = np.triu_indices(grid_nodes, k=1)
    lam, mu = nodes[j], nodes[i]
    _, d = eval_dual(fn_g, nodes)
    if np.any(d < 0):
        k = int(np.flatnonzero(d < 0)[0])
        raise TraceConditionError(f"g' < 0 at t={nodes[k]!r}")
    dd = divided_differences(fn_g, lam, mu)
    if np.any(dd <= 0):
        k = int(np.flatnonzero(dd <= 0)[0])
        raise TraceConditionError(
            f"divided difference not positive at ({lam[k]!r}, {mu[k]!r}); g is not increasing"
        )
    ratio = np.sqrt(d[j] * d[i]) / dd
    k = int(np.argmin(ratio))
    return InfEstimate(float(ratio[k]), (float(lam[k]), float(mu[k])), grid, range)


def trace_ratio(fn_g, lam: float, mu: float) -> float:
    """The ratio at a single pair ``lam > mu``."""
    return float(_trace_ratio(as_function(fn_g), np.array([lam]), np.array([mu]))[0])


# --------------------------------------------------------------------------
# Exponential example and Golden-Thompson


def golden_thompson_margin(X, Y) -> float:
    """``Tr(e^X e^Y) - Tr(e^(X+Y))`` for symmetric ``X, Y``."""
    X, Y = sym(X), sym(Y)
    eX = apply_fn(np.exp, X, None)
    eY = apply_fn(np.exp, Y, None)
    return float(np.sum(eX * eY) - np.trace(apply_fn(np.exp, X + Y, None)))


def exp_example_check(A, B, clamp=_defaults.CLAMP) -> tuple[float, float]:
    """Margins for ``g = e^t`` (so ``f = t e^-t``) at ``0 < A <= B``.

    Returns ``(margin, gt_margin)`` where ``margin = Tr(h^(1/2) e^B h^(1/2)) - Tr(A)``
    with ``h = A e^-A``, and ``gt_margin`` is the Golden-Thompson gap for
    ``X = log(h)``, ``Y = B``.
    """
    A, B = sym(A), sym(B)
    _check_order(A, B)
    spec = eig_sym(A)
    root_h = apply_fn(lambda w: np.sqrt(w * np.exp(-w)), A, clamp, spec)
    eB = apply_fn(np.exp, B, None)
    margin = float(np.sum(root_h * (eB @ root_h)) - np.trace(A))
    X = apply_fn(lambda w: np.log(w) - w, A, clamp, spec)
    return margin, golden_thompson_margin(X, B)


# --------------------------------------------------------------------------
# Counterexample search for non-monotone g


def _sample_ordered(i, rng, fn, dim, spectrum, psd_eps):
    A, B = random_ordered_pair(dim, rng, *spectrum)
    return [("order-monotone", dict(fn=fn, A=A, B=B, psd_eps=psd_eps))]


def witness_state(fn_g, A, B, clamp=_defaults.CLAMP):
    """Rank-one state separating ``A`` from ``B' = f(A)^(1/2) g(B) f(A)^(1/2)``.

    ``f = t / g(t)``. Returns ``(xi, top)`` with ``xi`` the unit eigenvector
    for the largest eigenvalue ``top`` of ``A - B'``; ``top > 0`` exactly when
    ``A`` is not below ``B'``.
    """
    fn_f = companion(as_function(fn_g))
    spec = eig_sym(sym(A) - sandwich(fn_f, A, B, clamp))
    return spec.eigenvectors[:, -1].copy(), float(spec.eigenvalues[-1])


@margin_function("state-witness")
def _state_witness_fn(fn, A, B, xi, clamp=_defaults.CLAMP, tol=_defaults.SCALAR_TOL):
    """Ordered margin for ``f = t / g`` under the vector state at ``xi``."""
    state = State.vector(xi)
    f = companion(as_function(fn))
    return ps_margin_ordered(f, state, A, B, clamp), _scalar_tol(state, A, B, tol)


def counterexample_search(fn_g, dim: int, trials: int = 100_000, seed=0, jobs: int = 1,
                          spectrum: tuple = (1e-1, 1e1),
                          psd_eps: float = _defaults.PSD_EPS_REL) -> Verdict:
    """Look for ``0 < A <= B`` with ``g(A) not <= g(B)`` and extract a state.

    On success the witness carries, in ``extra``, the unit vector ``xi``,
    the rank-one state it defines, and the ordered inequality margin for
    ``f = t / g`` under that state, which is negative.
    """
    if dim < 2:
        raise ValueError("dim must be >= 2")
    fn_g = as_function(fn_g)
    sampler = partial(_sample_ordered, fn=fn_g, dim=dim, spectrum=tuple(spectrum), psd_eps=psd_eps)
    verdict = run_trials(sampler, trials, resolve_seed(seed), jobs)
    if verdict.violated:
        w = verdict.witness
        xi, top = witness_state(fn_g, w.inputs["A"], w.inputs["B"])
        state_inputs = dict(fn=fn_g, A=w.inputs["A"], B=w.inputs["B"], xi=xi)
        margin, tol = _state_witness_fn(**state_inputs)
        w.extra = {
            "xi": xi,
            "state": State.vector(xi),
            "separation": top,
            "state_witness": Witness("state-witness", state_inputs, margin, tol, trial=w.trial),
        }
    return verdict


# --------------------------------------------------------------------------
# Fixture reproduction


@dataclass
class FixtureResult:
    name: str
    claim: str
    values: dict
    consistent: bool | None  # None: recorded, not asserted
    note: str = ""

    def to_json(self) -> dict:
        from .verdict import _jsonable

        return {
            "name": self.name,
            "claim": self.claim,
            "values": _jsonable(self.values),
            "consistent": self.consistent,
            "note": self.note,
        }


def _fixture_square():
    f = parse("t^2")
    A, B = SQUARE_FIXTURE_A, SQUARE_FIXTURE_B
    tr = State.canonical()
    ABA = A @ np.linalg.solve(B, A)
    margin = ps_margin_ordered(f, tr, A, B, clamp=0.0)
    A4, B4 = square_fixture_padded(4)
    margin4 = ps_margin_ordered(f, tr, A4, B4, clamp=0.0)
    full4 = ps_margin(f, tr, A4, B4, clamp=0.0)
    values = {
        "AB^-1A_minus_two_thirds_A": float(np.max(np.abs(ABA - 2 / 3 * A))),
        "tr_AB^-1A": float(np.trace(ABA)),
        "tr_A": float(np.trace(A)),
        "ordered_margin": margin,
        "ordered_margin_dim4": margin4,
        "full_margin_dim4": full4,
    }
    ok = (
        values["AB^-1A_minus_two_thirds_A"] < 1e-12
        and abs(margin + 2 / 3) < 1e-9
        and abs(margin4 - margin) < 1e-10
        and full4 < 0
    )
    return FixtureResult("square-2x2", "t^2 violates the inequality: Tr(AB^-1A) = 4/3 < 2 = Tr(A)", values, ok)


def _fixture_first_order():
    rows = []
    ok = True
    for p_exp in (1.5, 2.0, 3.0):
        f = parse(f"t^{p_exp}")
        for s in (0.0, 0.5, 1.0):
            for alpha in (0.3, 0.6, 0.9):
                params = DerivCondParams(s, alpha, 2.0)
                closed = deriv_condition_closed_form(f, params)
                lhs = first_order_lhs(f, *first_order_fixture(params))
                expected = (s * alpha**2 + 1 - alpha**2) * (1 - p_exp)
                rows.append([p_exp, s, alpha, closed, lhs])
                ok &= closed < 0 and abs(closed - expected) < 1e-12 and abs(lhs - closed) < 1e-9
    return FixtureResult(
        "first-order-power",
        "for t^p, p > 1, the first-order condition equals (s a^2 + 1 - a^2)(1 - p) < 0",
        {"rows[p, s, alpha, closed_form, first_order_lhs]": rows},
        ok,
    )


def _fixture_inverse(trials=200, seed=715):
    f = parse("1/t")
    tr = State.canonical()
    worst = math.inf
    for i in range(trials):
        rng = trial_rng(seed, i)
        dim = 2 + i % 3
        A, B = random_ordered_pair(dim, rng, 1e-2, 1e2)
        m = ps_margin_ordered(f, tr, A, B)
        direct = np.trace(B @ np.linalg.solve(A, B)) - np.trace(A)
        worst = min(worst, m / max(1.0, np.trace(A)), direct / max(1.0, np.trace(A)))
    inf = trace_condition_inf("t^2", DomainInterval(1e-3, 1e3), 128)
    ok = worst >= -_defaults.SCALAR_TOL and inf.value < 3e-3
    return FixtureResult(
        "inverse-trace",
        "g = t^2 (f = 1/t): Tr(A) <= Tr(BA^-1B) for 0 < A <= B; g meets the infimum condition",
        {"worst_relative_margin": worst, "trials": trials, "inf_estimate": inf.value},
        ok,
    )


def _fixture_exponential(trials=200, seed=716):
    worst = math.inf
    worst_gt = math.inf
    for i in range(trials):
        rng = trial_rng(seed, i)
        A, B = random_ordered_pair(2 + i % 3, rng, 0.05, 4.0)
        m, gt = exp_example_check(A, B)
        worst, worst_gt = min(worst, m), min(worst_gt, gt)
    inf = trace_condition_inf("exp(t)", DomainInterval(1.0, 30.0), 128)
    ok = worst >= -_defaults.SCALAR_TOL and worst_gt >= -_defaults.SCALAR_TOL and inf.value <= 1e-2
    return FixtureResult(
        "exponential",
        "g = e^t: Tr(A) <= Tr((Ae^-A)^1/2 e^B (Ae^-A)^1/2) for 0 < A <= B",
        {"worst_margin": worst, "worst_golden_thompson": worst_gt, "trials": trials, "inf_estimate": inf.value},
        ok,
    )


def _fixture_cube():
    A = np.diag([2.0, 2.0])
    B = A.copy()
    Ainv = np.linalg.inv(A)
    printed = float(np.trace(Ainv @ B @ Ainv))
    companion_form = float(np.trace(Ainv @ B @ B @ B @ Ainv))
    via_calculus = ps_margin_ordered(companion(parse("t^3")), State.canonical(), A, B) + np.trace(A)
    search = counterexample_search("t^3", 2, trials=20_000, seed=5)
    values = {
        "tr_A": float(np.trace(A)),
        "printed_tr_A^-1BA^-1": printed,
        "companion_tr_A^-1B^3A^-1": companion_form,
        "companion_via_functional_calculus": float(via_calculus),
        "search_status": search.status,
        "search_state_margin": (
            search.witness.extra["state_witness"].margin if search.violated else None
        ),
    }
    return FixtureResult(
        "cube-dual-reading",
        "g = t^3: Tr(A) = 4 <= Tr(A^-1BA^-1) = 1 fails at A = B = diag(2, 2)",
        values,
        None,
        note=(
            "dual reading: the printed expression gives 4 > 1 (violation); the companion form "
            "f(A)^1/2 g(B) f(A)^1/2 = A^-1 B^3 A^-1 gives equality 4 = 4 at A = B. "
            "t^3 still breaks the ordered inequality at some 0 < A <= B (search_state_margin)."
        ),
    )


def reproduce_fixtures() -> list[FixtureResult]:
    """Re-run every worked example with its exact matrices."""
    return [_fixture_square(), _fixture_first_order(), _fixture_inverse(), _fixture_exponential(), _fixture_cube()]
