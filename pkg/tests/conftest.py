import numpy as np
import pytest

from matmono.scalarfn import DomainError, evaluate, parse

# Expressions built from these pieces stay positive and moderate on [0.1, 10].
_LEAVES = ["t", "2", "0.5", "3.25", "(1+t)"]


def _fuzz_expr(rng, depth):
    if depth == 0 or rng.random() < 0.25:
        return _LEAVES[rng.integers(len(_LEAVES))]
    kind = rng.integers(8)
    a = _fuzz_expr(rng, depth - 1)
    if kind == 0:
        return f"({a} + {_fuzz_expr(rng, depth - 1)})"
    if kind == 1:
        return f"({a} * {_fuzz_expr(rng, depth - 1)})"
    if kind == 2:
        return f"({a} / {_fuzz_expr(rng, depth - 1)})"
    if kind == 3:
        p = rng.choice([-1.5, -1, 0.3, 0.5, 1.7, 2, 3])
        return f"({a})^{p}"
    if kind == 4:
        return f"exp(-{a}/10)"
    if kind == 5:
        return f"log(1 + {a})"
    if kind == 6:
        return f"sqrt({a})"
    return f"(3 - {a}/(1+{a}))"


def fuzz_corpus(size=1000, seed=12345):
    """Deterministic (text, t) pairs with finite, moderate values."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < size:
        text = _fuzz_expr(rng, 3)
        t = float(np.exp(rng.uniform(np.log(0.1), np.log(10))))
        try:
            v = evaluate(parse(text), t)
        except DomainError:
            continue
        if abs(v) < 1e4:
            out.append((text, t))
    return out


@pytest.fixture(scope="session")
def corpus():
    return fuzz_corpus()


def central_difference(fn, t):
    h = 1e-6 * max(1.0, abs(t))
    return (evaluate(fn, t + h) - evaluate(fn, t - h)) / (2 * h)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
