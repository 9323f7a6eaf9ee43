import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import nnls

from pfnmf.factor import FactorState, loss, random_init
from pfnmf.nenmf import (NenmfConfig, OgmConfig, momentum_sequence, nenmf_step, ogm, run_nenmf,
                         spectral_norm)
from pfnmf.synthetic import model_instance


def nnls_oracle(W, V):
    """Column-by-column active-set NNLS."""
    return np.column_stack([nnls(W, V[:, j])[0] for j in range(V.shape[1])])


def objective(W, H, V):
    return float(np.linalg.norm(W @ H - V) ** 2)


def subproblem(seed, m=6, r=3, n=4):
    rng = np.random.default_rng(seed)
    return rng.random((m, r)), rng.random((r, n)), rng.standard_normal((m, n))


def test_spectral_norm_diagonal():
    assert spectral_norm(np.diag([3.0, 1.0])) == pytest.approx(3.0, rel=1e-9)


def test_spectral_norm_rank_one():
    u = np.array([2.0, 0.0, 0.0])
    v = np.array([3.0, 4.0])
    assert spectral_norm(np.outer(u, v)) == pytest.approx(10.0, rel=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_spectral_norm_vs_eigensolver(seed):
    W = np.random.default_rng(seed).random((8, 5))
    oracle = np.sqrt(np.linalg.eigvalsh(W.T @ W)[-1])
    est = spectral_norm(W, tol=1e-13, max_iters=100_000)
    assert est == pytest.approx(oracle, rel=1e-8)
    assert spectral_norm(W.T, tol=1e-13, max_iters=100_000) == pytest.approx(oracle, rel=1e-8)


def test_spectral_norm_zero_matrix():
    with pytest.raises(ValueError):
        spectral_norm(np.zeros((3, 2)))


def test_momentum_values():
    a = momentum_sequence(3)
    assert a[0] == 1.0
    assert a[1] == pytest.approx((1 + np.sqrt(5)) / 2)
    # (1 + sqrt(4 * phi**2 + 1)) / 2, evaluated at 30 digits with mpmath
    assert a[2] == pytest.approx(2.19352708533105394, rel=1e-15)


def test_momentum_growth():
    a = momentum_sequence(1001)
    assert np.all(np.diff(a) >= 0.5)


def test_stationary_interior_point():
    rng = np.random.default_rng(0)
    W = rng.random((6, 3))
    H = rng.random((3, 4)) + 0.5
    out = ogm(W, H, W @ H, OgmConfig(inner_iterations=1))
    np.testing.assert_allclose(out, H, rtol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_converges_to_nnls_optimum(seed):
    W, H0, V = subproblem(seed)
    H_star = nnls_oracle(W, V)
    H = ogm(W, H0, V, OgmConfig(inner_iterations=500))
    assert objective(W, H, V) - objective(W, H_star, V) < 1e-6


@pytest.mark.parametrize("seed", range(5))
def test_accelerated_bound(seed):
    W, H0, V = subproblem(seed)
    H_star = nnls_oracle(W, V)
    best = objective(W, H_star, V)
    L = np.linalg.norm(W, 2) ** 2
    d0 = np.linalg.norm(H0 - H_star) ** 2
    for K in range(1, 51):
        H = ogm(W, H0, V, OgmConfig(inner_iterations=K))
        assert objective(W, H, V) <= best + 2 * L * d0 / (K + 2) ** 2 + 1e-8


@given(st.integers(0, 10_000), st.floats(0.01, 100.0))
def test_output_nonnegative_for_any_target(seed, scale):
    W, H0, V = subproblem(seed)
    assert np.all(ogm(W, H0, scale * V, OgmConfig(inner_iterations=7)) >= 0)


def ogm_right_factor(H, W0, R, K):
    """Direct OGM for min_{W >= 0} ||W H - R||^2, without transposing."""
    L = np.linalg.norm(H, 2) ** 2
    W_prev, Y, a = W0, W0, 1.0
    for _ in range(K):
        Wk = np.maximum(Y - (Y @ H - R) @ H.T / L, 0.0)
        a_next = (1 + np.sqrt(4 * a * a + 1)) / 2
        Y = Wk + (a - 1) / a_next * (Wk - W_prev)
        W_prev, a = Wk, a_next
    return W_prev


@settings(max_examples=20)
@given(st.integers(0, 10_000), st.integers(1, 12))
def test_transposed_call_matches_right_factor_variant(seed, K):
    rng = np.random.default_rng(seed)
    H, W0, R = rng.random((3, 9)), rng.random((5, 3)), rng.standard_normal((5, 9))
    cfg = OgmConfig(inner_iterations=K, spectral_norm_tolerance=1e-15, spectral_norm_max_iters=100_000)
    np.testing.assert_allclose(ogm(H.T, W0.T, R.T, cfg).T, ogm_right_factor(H, W0, R, K), rtol=1e-12, atol=1e-12)


def test_single_inner_step_is_projected_gradient():
    V, W_D, *_ = model_instance(10, 12, 2, 3, seed=1)
    s = random_init(10, 12, 2, 3, seed=2)
    cfg = NenmfConfig(outer_iterations=1, ogm=OgmConfig(inner_iterations=1, spectral_norm_tolerance=1e-15,
                                                          spectral_norm_max_iters=100_000))
    out = nenmf_step(V, W_D, s, cfg)

    def pg(W, H, T):
        return np.maximum(H - W.T @ (W @ H - T) / np.linalg.norm(W, 2) ** 2, 0.0)

    H_D = pg(W_D, s.H_D, V - s.W_H @ s.H_H)
    W_H = pg(s.H_H.T, s.W_H.T, (V - W_D @ H_D).T).T
    H_H = pg(W_H, s.H_H, V - W_D @ H_D)
    for a, b in zip((out.H_D, out.W_H, out.H_H), (H_D, W_H, H_H)):
        np.testing.assert_allclose(a, b, rtol=1e-10)


def test_exact_model_drops_tenfold():
    V, W_D, *_ = model_instance(40, 60, 3, 4, seed=3, noise=0.0)
    init = random_init(40, 60, 3, 4, seed=4)
    _, tr = run_nenmf(V, W_D, init, NenmfConfig(outer_iterations=3, ogm=OgmConfig(inner_iterations=50)))
    assert tr.losses[-1] * 10 <= tr.losses[0]


@pytest.mark.parametrize("seed", range(5))
def test_exact_model_trace_does_not_increase(seed):
    V, W_D, *_ = model_instance(30, 40, 3, 4, seed=seed, noise=0.0)
    _, tr = run_nenmf(V, W_D, random_init(30, 40, 3, 4, seed=seed + 100), NenmfConfig())
    assert all(np.isfinite(tr.losses))
    for a, b in zip(tr.losses, tr.losses[1:]):
        assert b <= a * (1 + 1e-8)


def test_trace_length_and_determinism():
    V, W_D, *_ = model_instance(20, 25, 3, 5, seed=5)
    init = random_init(20, 25, 3, 5, seed=0)
    s1, tr = run_nenmf(V, W_D, init, NenmfConfig(outer_iterations=10, ogm=OgmConfig(inner_iterations=10)))
    s2, _ = run_nenmf(V, W_D, init, NenmfConfig(outer_iterations=10, ogm=OgmConfig(inner_iterations=10)))
    assert len(tr) == 11
    assert s1.digest() == s2.digest()
    assert all(np.all(a >= 0) for a in (s1.H_D, s1.W_H, s1.H_H))


def test_collapsed_harmonic_factors_are_skipped():
    V, W_D, *_ = model_instance(10, 12, 2, 3, seed=6)
    s = FactorState(random_init(10, 12, 2, 3, 0).H_D, np.zeros((10, 3)), np.zeros((3, 12)))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        out, tr = run_nenmf(V, W_D, s, NenmfConfig(outer_iterations=2))
    assert len(tr.warnings) == 4
    assert any(issubclass(w.category, RuntimeWarning) for w in caught)
    assert not out.W_H.any() and not out.H_H.any()
    assert tr.losses[-1] < tr.losses[0]


def test_zero_harmonic_rank_rejected():
    with pytest.raises(ValueError):
        random_init(10, 12, 2, 0, seed=0)


@pytest.mark.parametrize("kwargs", [dict(inner_iterations=0), dict(spectral_norm_tolerance=0.0),
                                    dict(spectral_norm_tolerance=1.0), dict(spectral_norm_max_iters=0)])
def test_bad_ogm_config(kwargs):
    with pytest.raises(ValueError):
        OgmConfig(**kwargs)


def test_bad_outer_iterations():
    with pytest.raises(ValueError):
        NenmfConfig(outer_iterations=0)


def test_ogm_shape_mismatch():
    W, H0, V = subproblem(0)
    with pytest.raises(ValueError):
        ogm(W, H0[:, :-1], V)
