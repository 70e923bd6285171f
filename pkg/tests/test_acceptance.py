"""Acceptance criteria, one test each.

Every test records a single PASS/FAIL line (also printed at the end of the
pytest run). Runtimes are measured inside the test and are part of the
criterion.
"""
import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import central_difference, fuzz_corpus
from matmono.monotone import check_n_monotone, frechet_derivative, loewner_matrix
from matmono.psineq import (
    SQUARE_FIXTURE_A,
    SQUARE_FIXTURE_B,
    DerivCondParams,
    PSCheckConfig,
    check_ps,
    counterexample_search,
    deriv_condition_closed_form,
    square_fixture_padded,
    first_order_fixture,
    exp_example_check,
    first_order_lhs,
    ps_margin_ordered,
    trace_condition_inf,
)
from matmono.scalarfn import DomainInterval, eval_dual, parse
from matmono.symmat import State, apply_fn, eig_sym, random_ordered_pair, random_psd, sym
from matmono.verdict import HOLDS, VIOLATED, replay

SEED = 20240601
RESULTS = []


def record(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} | {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def _max(M):
    return float(np.max(np.abs(M)))


def test_criterion_1_square_fixture():
    t0 = time.perf_counter()
    f = parse("t^2")
    tr = State.canonical()
    A, B = SQUARE_FIXTURE_A, SQUARE_FIXTURE_B
    tr_aba = float(np.trace(A @ np.linalg.solve(B, A)))
    margin = ps_margin_ordered(f, tr, A, B, clamp=0.0)
    A4, B4 = square_fixture_padded(4)
    margin4 = ps_margin_ordered(f, tr, A4, B4, clamp=0.0)
    elapsed = time.perf_counter() - t0
    ok = (
        abs(tr_aba - 4 / 3) <= 1e-12
        and np.trace(A) == 2.0
        and abs(margin + 2 / 3) <= 1e-9
        and abs(margin4 - margin) < 1e-10
        and elapsed < 1.0
    )
    record(1, "square fails the ordered inequality on the 2x2 fixture", ok,
           f"Tr(AB^-1A)={tr_aba:.15g} margin={margin:.15g} padded={margin4:.15g} t={elapsed:.3f}s")


def test_criterion_2_first_order_closed_form():
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    worst_closed = worst_lhs = 0.0
    for _ in range(20):
        params = DerivCondParams(
            float(rng.uniform(0, 1)), float(rng.uniform(0.01, 0.99)), float(np.exp(rng.uniform(-2, 2)))
        )
        p = float(rng.uniform(0.2, 4.0))
        f = parse(f"t^{p!r}")
        expected = (params.s * params.alpha**2 + 1 - params.alpha**2) * (1 - p)
        closed = deriv_condition_closed_form(f, params)
        worst_closed = max(worst_closed, abs(closed - expected) / max(1e-300, abs(expected)))
        lhs = first_order_lhs(f, *first_order_fixture(params))
        worst_lhs = max(worst_lhs, abs(lhs - closed))
    elapsed = time.perf_counter() - t0
    ok = worst_closed <= 1e-12 and worst_lhs <= 1e-9 and elapsed < 1.0
    record(2, "power-function closed form and first-order term", ok,
           f"closed-form rel err={worst_closed:.2e} lhs-vs-closed={worst_lhs:.2e} t={elapsed:.3f}s")


def test_criterion_3_positive_suite():
    t0 = time.perf_counter()
    worst = math.inf
    failures = []
    for text in ("t", "sqrt(t)", "t^0.3", "t/(1+t)"):
        for dim in range(2, 7):
            v = check_ps(PSCheckConfig(text, dim, trials=1000, seed=SEED))
            worst = min(worst, v.min_margin)
            if v.status != HOLDS or v.min_margin < -1e-7 or v.trials_run != 1000:
                failures.append((text, dim, v.status, v.min_margin))
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 60
    record(3, "no violations for four concave exemplars, dims 2-6", ok,
           f"worst margin={worst:.3e} failures={failures} t={elapsed:.1f}s")


def test_criterion_4_counterexample_state():
    t0 = time.perf_counter()
    details = []
    ok = True
    for g in ("t^2", "t^3"):
        v = counterexample_search(g, 2, trials=100_000, seed=SEED)
        if v.status != VIOLATED:
            ok = False
            details.append(f"{g}: {v.status}")
            continue
        w = v.witness
        sw = w.extra["state_witness"]
        replay_err = max(abs(replay(w) - w.margin), abs(replay(sw) - sw.margin))
        ok &= sw.margin < -1e-7 and replay_err <= 1e-12
        details.append(f"{g}: trial={w.trial} state margin={sw.margin:.3e} replay err={replay_err:.1e}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 30
    record(4, "non-monotone g yields a separating rank-one state", ok, "; ".join(details) + f" t={elapsed:.2f}s")


def test_criterion_5_loewner_coherence():
    t0 = time.perf_counter()
    L = loewner_matrix(parse("t^2"), [1.0, 2.0])
    det = float(np.linalg.det(L))
    square = check_n_monotone("t^2", 2, trials=2000, seed=SEED)
    sqrt_status = {n: check_n_monotone("sqrt(t)", n, trials=2000, seed=SEED).status for n in range(2, 6)}
    elapsed = time.perf_counter() - t0
    ok = (
        np.array_equal(L, [[2.0, 3.0], [3.0, 4.0]])
        and abs(det + 1) <= 1e-12
        and square.status == VIOLATED
        and all(s == HOLDS for s in sqrt_status.values())
        and elapsed < 10
    )
    record(5, "square is flagged at order 2, sqrt holds at orders 2-5", ok,
           f"det={det:.15g} square={square.status} sqrt={sorted(set(sqrt_status.values()))} t={elapsed:.2f}s")


def test_criterion_6_infimum_estimator():
    t0 = time.perf_counter()
    sq = trace_condition_inf("t^2", DomainInterval(1e-3, 1e3), 128).value
    sq_wide = trace_condition_inf("t^2", DomainInterval(1e-4, 1e4), 128).value
    ident = [trace_condition_inf("t", DomainInterval(lo, hi), k).value
             for lo, hi, k in ((1e-3, 1e3, 128), (0.5, 2, 7), (1e-6, 1e6, 300))]
    ex = trace_condition_inf("exp(t)", DomainInterval(1, 30), 128).value
    elapsed = time.perf_counter() - t0
    ok = sq <= 3e-3 and sq_wide < sq and all(v == 1.0 for v in ident) and ex <= 1e-2 and elapsed < 5
    record(6, "infimum estimator on t^2, t and exp", ok,
           f"t^2={sq:.3e} wider={sq_wide:.3e} t={ident} exp={ex:.3e} time={elapsed:.2f}s")


def test_criterion_7_exponential_example():
    t0 = time.perf_counter()
    worst = worst_gt = math.inf
    for i in range(500):
        rng = np.random.default_rng([SEED, i])
        A, B = random_ordered_pair(4, rng, 0.05, 4.0)
        m, gt = exp_example_check(A, B)
        worst, worst_gt = min(worst, m), min(worst_gt, gt)
    commuting = max(max(abs(x) for x in exp_example_check(c * np.eye(4), c * np.eye(4))) for c in (0.1, 1.0, 3.0))
    elapsed = time.perf_counter() - t0
    ok = worst >= -1e-7 and worst_gt >= -1e-7 and commuting <= 1e-9 and elapsed < 30
    record(7, "exponential example and Golden-Thompson sub-check", ok,
           f"worst={worst:.3e} worst GT={worst_gt:.3e} commuting={commuting:.1e} t={elapsed:.2f}s")


def test_criterion_8_numerical_kernels():
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    eig_err = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 9))
        A = sym(rng.standard_normal((n, n)) * 10.0 ** rng.uniform(-3, 3))
        s = eig_sym(A)
        recon = (s.eigenvectors * s.eigenvalues) @ s.eigenvectors.T
        eig_err = max(eig_err, _max(recon - A) / max(1e-300, _max(A)))
    fr_err = 0.0
    fns = [parse(x) for x in ("sqrt(t)", "log(t)", "t/(1+t)", "exp(t/3)", "t^1.5")]
    h = 1e-6
    for k in range(100):
        fn = fns[k % len(fns)]
        A = random_psd(4, 0.2, 5, rng)
        C = sym(rng.standard_normal((4, 4)))
        fd = (apply_fn(fn, A + h * C) - apply_fn(fn, A - h * C)) / (2 * h)
        fr_err = max(fr_err, _max(fd - frechet_derivative(fn, A, C)))
    dual_err = 0.0
    for text, t in fuzz_corpus():
        fn = parse(text)
        d = eval_dual(fn, t)[1]
        dual_err = max(dual_err, abs(d - central_difference(fn, t)) / max(1.0, abs(d)))
    elapsed = time.perf_counter() - t0
    ok = eig_err <= 1e-9 and fr_err <= 1e-4 and dual_err <= 1e-5 and elapsed < 60
    record(8, "eigensolver, Frechet derivative and dual numbers", ok,
           f"eig={eig_err:.2e} frechet={fr_err:.2e} dual={dual_err:.2e} t={elapsed:.1f}s")


RANDOMIZED_COMMANDS = [
    ["check-monotone", "--fn", "t^3", "--order", "2", "--trials", "2000"],
    ["check-monotone", "--fn", "sqrt(t)", "--order", "3", "--trials", "1000"],
    ["check-concave", "--fn", "sqrt(t)", "--order", "3", "--trials", "1000"],
    ["check-hp", "--fn", "sqrt(t)", "--order", "3", "--trials", "1000"],
    ["chain", "--fn", "sqrt(t)", "--order", "3", "--trials", "500"],
    ["check-ps", "--fn", "sqrt(t)", "--dim", "4", "--trials", "1000"],
    ["check-ps", "--fn", "1/t", "--dim", "3", "--trials", "1000", "--ordered-only"],
    ["find-counterexample", "--g", "t^3", "--dim", "2", "--trials", "100000"],
]


def _report_without_timing(argv):
    proc = subprocess.run([sys.executable, "-m", "matmono", *argv], capture_output=True, text=True, check=False)
    report = json.loads(proc.stdout)
    report.pop("timing")
    return json.dumps(report, indent=2).encode(), proc.returncode


@pytest.mark.slow
def test_criterion_9_determinism():
    t0 = time.perf_counter()
    mismatches = []
    for argv in RANDOMIZED_COMMANDS:
        argv = argv + ["--seed", str(SEED)]
        runs = [_report_without_timing(argv + ["--jobs", j]) for j in ("1", "1", "8", "8")]
        if len({r for r in runs}) != 1:
            mismatches.append(argv[0])
    elapsed = time.perf_counter() - t0
    ok = not mismatches
    record(9, "reports identical across runs and --jobs 1/8", ok,
           f"{len(RANDOMIZED_COMMANDS)} commands x 4 runs, mismatches={mismatches} t={elapsed:.1f}s")
