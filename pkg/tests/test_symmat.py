import json
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from matmono.scalarfn import DomainError, companion, parse
from matmono.symmat import (
    State,
    abs_diff,
    apply_fn,
    direct_sum_pad,
    eig_sym,
    functional,
    is_psd,
    lambda_min,
    load_matrix,
    load_state,
    matrix_from_json,
    random_contraction,
    random_ordered_pair,
    random_psd,
    sym,
)

A31 = np.array([[1.0, 1.0], [1.0, 1.0]])
B31 = np.array([[2.0, 1.0], [1.0, 2.0]])


def _max(M):
    return float(np.max(np.abs(M)))


def _check_spectrum(A, spec):
    Q = spec.eigenvectors
    assert _max(Q.T @ Q - np.eye(len(A))) <= 1e-10
    assert _max((Q * spec.eigenvalues) @ Q.T - A) <= 1e-9 * max(1.0, _max(A))
    assert np.all(np.diff(spec.eigenvalues) >= 0)


@pytest.mark.parametrize(
    "A, eigenvalues",
    [(np.diag([2.0, 2.0]), [2.0, 2.0]), (A31, [0.0, 2.0]), (B31, [1.0, 3.0])],
)
def test_eig_sym_examples(A, eigenvalues):
    spec = eig_sym(A)
    np.testing.assert_allclose(spec.eigenvalues, eigenvalues, atol=1e-15)
    _check_spectrum(A, spec)


def test_eig_sym_reconstruction_random(rng):
    for _ in range(1000):
        n = int(rng.integers(1, 9))
        scale = 10.0 ** rng.uniform(-3, 3)
        A = sym(rng.standard_normal((n, n)) * scale)
        spec = eig_sym(A)
        _check_spectrum(A, spec)
        # independent oracle: LAPACK
        np.testing.assert_allclose(spec.eigenvalues, np.linalg.eigvalsh(A), atol=1e-12 * max(1, _max(A)))


def test_eig_sym_degenerate_and_larger():
    rng = np.random.default_rng(5)
    Q, _ = np.linalg.qr(rng.standard_normal((64, 64)))
    w = np.repeat([1.0, 2.0, 3.0, 4.0], 16)
    A = sym((Q * w) @ Q.T)
    spec = eig_sym(A)
    _check_spectrum(A, spec)
    np.testing.assert_allclose(spec.eigenvalues, w, atol=1e-12)


def test_eig_sym_is_deterministic(rng):
    A = sym(rng.standard_normal((6, 6)))
    s1, s2 = eig_sym(A), eig_sym(A.copy())
    np.testing.assert_array_equal(s1.eigenvalues, s2.eigenvalues)
    np.testing.assert_array_equal(s1.eigenvectors, s2.eigenvectors)


def test_sym_rejects_bad_shapes():
    with pytest.raises(ValueError):
        sym(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        sym(np.zeros((65, 65)))
    with pytest.raises(ValueError):
        sym([[np.nan]])


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, (4, 4), elements=st.floats(-1e3, 1e3)))
def test_sym_is_exactly_symmetric(M):
    S = sym(M)
    np.testing.assert_array_equal(S, S.T)


# --------------------------------------------------------------------------
# Functional calculus


def test_apply_identity(rng):
    A = random_psd(5, 0.1, 10, rng)
    assert _max(apply_fn(parse("t"), A) - A) <= 1e-9


def test_apply_square_of_example_matrix():
    out = apply_fn(parse("t^2"), A31, clamp=0.0)
    np.testing.assert_allclose(out, [[2.0, 2.0], [2.0, 2.0]], atol=1e-14)


def test_apply_inverse_matches_two_by_two_formula():
    a, b, c, d = B31.ravel()
    oracle = np.array([[d, -b], [-c, a]]) / (a * d - b * c)
    np.testing.assert_allclose(apply_fn(parse("1/t"), B31), oracle, atol=1e-14)
    np.testing.assert_allclose(oracle, np.array([[2, -1], [-1, 2]]) / 3, atol=1e-15)


def test_apply_clamp_raises_small_eigenvalues():
    with pytest.raises(DomainError):
        apply_fn(parse("log(t)"), A31, clamp=None)
    out = apply_fn(parse("t"), A31, clamp=0.5)
    np.testing.assert_allclose(np.linalg.eigvalsh(out), [0.5, 2.0], atol=1e-14)


def test_square_is_homomorphic(rng):
    for _ in range(50):
        n = int(rng.integers(1, 7))
        A = sym(rng.standard_normal((n, n)))
        assert _max(apply_fn(parse("t^2"), A, clamp=None) - A @ A) <= 1e-8 * max(1, _max(A @ A))


def test_composition_on_diagonal_matrices(rng):
    f, g = parse("sqrt(t)"), parse("exp(t)")
    composed = parse("exp(sqrt(t))")
    for _ in range(20):
        D = np.diag(rng.uniform(0.1, 5, 4))
        np.testing.assert_allclose(apply_fn(g, apply_fn(f, D)), apply_fn(composed, D), rtol=1e-13)


@pytest.mark.parametrize("f", ["t", "sqrt(t)", "t^2", "t/(1+t)", "t^0.3", "1/t"])
def test_companion_sandwich_equals_A(f, rng):
    f = parse(f)
    g = companion(f)
    for _ in range(20):
        A = random_psd(4, 0.01, 100, rng)
        h = apply_fn(lambda w: np.sqrt(f(w)), A)
        assert _max(h @ apply_fn(g, A) @ h - A) <= 1e-8 * max(1, _max(A))


def test_direct_sum_pad_commutes_with_calculus():
    f = parse("t^2 + 1")
    padded = direct_sum_pad(B31, 3, 1.0)
    np.testing.assert_allclose(apply_fn(f, padded), direct_sum_pad(apply_fn(f, B31), 3, f(1.0)), atol=1e-13)


def test_direct_sum_pad_examples():
    np.testing.assert_array_equal(direct_sum_pad(A31, 0), A31)
    P = direct_sum_pad(A31, 2, 1.0)
    assert P.shape == (4, 4) and np.trace(P) == 4.0
    with pytest.raises(ValueError):
        direct_sum_pad(A31, -1)


# --------------------------------------------------------------------------
# Absolute value and PSD tests


def test_abs_diff_examples():
    np.testing.assert_array_equal(abs_diff(B31, B31), np.zeros((2, 2)))
    np.testing.assert_allclose(abs_diff(np.diag([3.0, 1.0]), np.diag([1.0, 3.0])), np.diag([2.0, 2.0]), atol=1e-15)
    # B31 - I is PSD (eigenvalues 0, 2) so the absolute value is itself
    np.testing.assert_allclose(abs_diff(B31, np.eye(2)), A31, atol=1e-14)
    with pytest.raises(ValueError):
        abs_diff(A31, np.eye(3))


def test_abs_diff_dominates_both_signs(rng):
    for _ in range(200):
        n = int(rng.integers(1, 7))
        A, B = sym(rng.standard_normal((n, n))), sym(rng.standard_normal((n, n)))
        M = abs_diff(A, B)
        assert lambda_min(M - (A - B)) >= -1e-8
        assert lambda_min(M + (A - B)) >= -1e-8
        assert is_psd(M)


def test_abs_diff_equals_difference_when_ordered(rng):
    A, B = random_ordered_pair(5, rng)
    assert _max(abs_diff(B, A) - (B - A)) <= 1e-9 * max(1, _max(B))


# --------------------------------------------------------------------------
# States


def test_functional_examples():
    assert functional(State.density(np.eye(3) / 3), np.eye(3)) == pytest.approx(1.0)
    assert functional(State.canonical(), A31) == 2.0
    s = 0.0
    S = State.density(np.diag([s, 1.0]) / (1 + s))
    assert functional(S, np.diag([5.0, 7.0])) == 7.0
    with pytest.raises(ValueError):
        functional(S, np.eye(3))


def test_state_invariants():
    with pytest.raises(ValueError):
        State.density(np.diag([0.5, 0.6]))
    with pytest.raises(ValueError):
        State.density(np.diag([1.5, -0.5]))
    assert State.positive(np.diag([0.3, 1.0]))(np.eye(2)) == pytest.approx(1.3)
    v = State.vector([3.0, 4.0])
    assert v(np.diag([1.0, 0.0])) == pytest.approx(9 / 25)


def test_state_padding():
    v = State.vector([1.0, 1.0])
    assert v.pad(2).weight.shape == (4, 4)
    assert v.pad(2)(direct_sum_pad(B31, 2, 5.0)) == pytest.approx(v(B31))


# --------------------------------------------------------------------------
# Generators


def test_random_psd_spectrum_range():
    rng = np.random.default_rng(0)
    for n in (1, 3, 8):
        A = random_psd(n, 0.5, 4.0, rng)
        w = eig_sym(A).eigenvalues
        assert w[0] >= 0.5 - 1e-10 and w[-1] <= 4.0 + 1e-10
    np.testing.assert_allclose(random_psd(4, 2.5, 2.5, rng), 2.5 * np.eye(4), atol=1e-14)
    assert random_psd(1, 1, 2, rng)[0, 0] > 0


def test_random_psd_reproducible():
    A1 = random_psd(3, 1e-3, 1e3, np.random.default_rng(42))
    A2 = random_psd(3, 1e-3, 1e3, np.random.default_rng(42))
    np.testing.assert_array_equal(A1, A2)


def test_random_ordered_pair_is_ordered(rng):
    equal = 0
    for _ in range(300):
        n = int(rng.integers(1, 6))
        A, B = random_ordered_pair(n, rng)
        assert lambda_min(B - A) >= -1e-10 * max(1, _max(B))
        assert lambda_min(A) >= 1e-6 - 1e-12
        equal += np.array_equal(A, B)
    assert equal > 0  # the zero increment is drawn sometimes


def _power_iteration_norm(C, iters=500):
    x = np.ones(C.shape[1])
    for _ in range(iters):
        y = C.T @ (C @ x)
        x = y / np.linalg.norm(y)
    return float(np.sqrt(np.linalg.norm(C.T @ (C @ x))))


def test_random_contraction_norm(rng):
    seen_orthogonal = False
    for _ in range(300):
        n = int(rng.integers(1, 6))
        C = random_contraction(n, rng)
        assert _power_iteration_norm(C) <= 1 + 1e-12
        seen_orthogonal |= np.allclose(C.T @ C, np.eye(n))
    assert seen_orthogonal
    P = np.eye(4)[[2, 0, 3, 1]]
    assert _power_iteration_norm(P) <= 1 + 1e-12


# --------------------------------------------------------------------------
# JSON


def test_matrix_json_round_trip(tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"n": 2, "data": [[2, 1], [1, 2]]}))
    np.testing.assert_array_equal(load_matrix(path), B31)


def test_matrix_json_symmetrizes_with_warning():
    with pytest.warns(UserWarning, match="asymmetric"):
        M = matrix_from_json({"n": 2, "data": [[1, 2], [0, 1]]})
    np.testing.assert_array_equal(M, [[1, 1], [1, 1]])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        matrix_from_json({"n": 2, "data": [[1, 1 + 1e-12], [1, 1]]})


@pytest.mark.parametrize("obj", [{"n": 3, "data": [[1, 0], [0, 1]]}, {"data": [[1, 2, 3]]}, {"n": 1}])
def test_matrix_json_rejects_malformed(obj):
    with pytest.raises(ValueError):
        matrix_from_json(obj)


def test_load_state(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"n": 2, "data": [[0.25, 0], [0, 0.75]]}))
    assert load_state(path)(np.diag([4.0, 0.0])) == 1.0
    path.write_text(json.dumps({"n": 2, "data": [[0.5, 0], [0, 0.75]]}))
    with pytest.raises(ValueError):
        load_state(path)
