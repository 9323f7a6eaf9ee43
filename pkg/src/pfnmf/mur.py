"""Multiplicative update rule for the partially fixed NMF."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .factor import ConvergenceTrace, FactorState, NumericalError, _as_matrix, check_shapes, loss


@dataclass(frozen=True)
class MurConfig:
    iterations: int = 100
    epsilon: float = 1e-12

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if not 0 < self.epsilon <= 1e-6:
            raise ValueError(f"epsilon must be in (0, 1e-6], got {self.epsilon}")


def mur_step(V, W_D, state: FactorState, epsilon: float = 1e-12, WtV=None) -> FactorState:
    """One sweep of multiplicative updates: H_D, then W_H, then H_H.

    Each update sees the factors already refreshed earlier in the sweep.
    ``epsilon`` is added to every denominator. ``WtV`` optionally supplies the
    precomputed ``W_D.T @ V``.
    """
    V, W_D = _as_matrix(V), _as_matrix(W_D)
    H_D, W_H, H_H = state.H_D, state.W_H, state.H_H
    if WtV is None:
        WtV = W_D.T @ V

    # denominators expanded through Gram products; same values as W^T (W H) but O(r^2 n)
    WdH_H = W_D.T @ W_H
    H_D = H_D * WtV / ((W_D.T @ W_D) @ H_D + WdH_H @ H_H + epsilon)

    HHt = H_H @ H_H.T
    W_H = W_H * (V @ H_H.T) / (W_D @ (H_D @ H_H.T) + W_H @ HHt + epsilon)

    H_H = H_H * (W_H.T @ V) / ((W_H.T @ W_D) @ H_D + (W_H.T @ W_H) @ H_H + epsilon)
    return FactorState(H_D, W_H, H_H)


def run_mur(V, W_D, init: FactorState, config: MurConfig = MurConfig()):
    """Run ``config.iterations`` MUR sweeps from a copy of ``init``.

    Returns the final state and a trace with ``iterations + 1`` entries; the
    elapsed column accumulates update time only, not loss evaluation.
    """
    V, W_D = _as_matrix(V), _as_matrix(W_D)
    check_shapes(V, W_D, init)
    state = init.copy()
    trace = ConvergenceTrace()
    trace.append(0, loss(V, W_D, state), 0.0)
    WtV = W_D.T @ V
    spent = 0.0
    for t in range(1, config.iterations + 1):
        t0 = time.perf_counter()
        with np.errstate(all="ignore"):
            state = mur_step(V, W_D, state, config.epsilon, WtV=WtV)
        spent += time.perf_counter() - t0
        if not state.is_finite():
            raise NumericalError("non-finite factor after MUR update", iteration=t)
        trace.append(t, loss(V, W_D, state), spent)
    return state, trace
