import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pfnmf.factor import (ConvergenceTrace, FactorState, loss, random_init, read_activations,
                          write_activations)


def instance(seed, m=6, n=7, r_d=2, r_h=3):
    rng = np.random.default_rng(seed)
    V = rng.random((m, n))
    W_D = rng.random((m, r_d))
    return V, W_D, FactorState(rng.random((r_d, n)), rng.random((m, r_h)), rng.random((r_h, n)))


def loss_oracle(V, W_D, s):
    m, n = V.shape
    total = 0.0
    for i in range(m):
        for j in range(n):
            rec = sum(W_D[i, k] * s.H_D[k, j] for k in range(W_D.shape[1]))
            rec += sum(s.W_H[i, k] * s.H_H[k, j] for k in range(s.W_H.shape[1]))
            total += (V[i, j] - rec) ** 2
    return 0.5 * total


def test_exact_reconstruction_is_zero():
    _, W_D, s = instance(0)
    V = W_D @ s.H_D + s.W_H @ s.H_H
    assert loss(V, W_D, s) == 0.0


def test_scalar_case():
    s = FactorState(np.array([[1.0]]), np.array([[0.0]]), np.array([[1.0]]))
    assert loss(np.array([[2.0]]), np.array([[1.0]]), s) == 0.5


@pytest.mark.parametrize("seed", range(5))
def test_against_summation_oracle(seed):
    V, W_D, s = instance(seed)
    assert loss(V, W_D, s) == pytest.approx(loss_oracle(V, W_D, s), rel=1e-12)


@given(st.integers(0, 10_000))
def test_column_separability(seed):
    V, W_D, s = instance(seed)
    by_col = sum(0.5 * np.sum((V[:, j] - W_D @ s.H_D[:, j] - s.W_H @ s.H_H[:, j]) ** 2) for j in range(V.shape[1]))
    assert loss(V, W_D, s) == pytest.approx(by_col, rel=1e-12)


@given(st.integers(0, 10_000), st.randoms())
def test_harmonic_permutation_invariance(seed, rnd):
    V, W_D, s = instance(seed)
    perm = list(range(s.r_H))
    rnd.shuffle(perm)
    t = FactorState(s.H_D, s.W_H[:, perm], s.H_H[perm])
    assert loss(V, W_D, t) == pytest.approx(loss(V, W_D, s), rel=1e-12)
    assert loss(V, W_D, s) >= 0


def test_shape_mismatch():
    V, W_D, s = instance(0)
    with pytest.raises(ValueError):
        loss(V[:, :-1], W_D, s)
    with pytest.raises(ValueError):
        loss(V, W_D[:-1], s)
    with pytest.raises(ValueError):
        FactorState(s.H_D, s.W_H, s.H_H[:, :-1])


def test_random_init_deterministic():
    a, b = random_init(10, 12, 3, 5, seed=7), random_init(10, 12, 3, 5, seed=7)
    assert a.digest() == b.digest()
    for x, y in zip((a.H_D, a.W_H, a.H_H), (b.H_D, b.W_H, b.H_H)):
        assert np.array_equal(x, y)


@given(st.integers(0, 2**32 - 1))
def test_random_init_open_unit_interval(seed):
    s = random_init(4, 5, 2, 3, seed)
    for a in (s.H_D, s.W_H, s.H_H):
        assert np.all(a > 0) and np.all(a < 1)
    assert s.H_D.shape == (2, 5) and s.W_H.shape == (4, 3) and s.H_H.shape == (3, 5)


def test_random_init_seeds_differ():
    assert random_init(4, 5, 2, 3, 0).digest() != random_init(4, 5, 2, 3, 1).digest()


@pytest.mark.parametrize("dims", [(0, 1, 1, 1), (1, 0, 1, 1), (1, 1, 0, 1), (1, 1, 1, 0)])
def test_random_init_zero_dim(dims):
    with pytest.raises(ValueError):
        random_init(*dims, seed=0)


def test_trace_requires_increasing_iterations():
    tr = ConvergenceTrace()
    tr.append(0, 1.0, 0.0)
    tr.append(1, 0.5, 0.1)
    with pytest.raises(ValueError):
        tr.append(1, 0.4, 0.2)
    assert len(tr) == 2


def test_activation_csv_round_trip(tmp_path):
    H = np.random.default_rng(0).random((3, 9))
    write_activations(tmp_path / "a.csv", H, ["hihat", "snare", "kick"], 0.032)
    header = (tmp_path / "a.csv").read_text().splitlines()[0]
    assert header.startswith("component,0.0,0.032,0.064")
    H2, labels, times = read_activations(tmp_path / "a.csv")
    assert labels == ["hihat", "snare", "kick"]
    assert np.array_equal(H2, H)
    np.testing.assert_array_equal(times, np.arange(9) * 0.032)
