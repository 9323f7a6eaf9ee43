"""Projected gradient with Nesterov momentum (OGM) and the NeNMF driver."""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .factor import ConvergenceTrace, FactorState, NumericalError, _as_matrix, check_shapes, loss


@dataclass(frozen=True)
class OgmConfig:
    inner_iterations: int = 10
    spectral_norm_tolerance: float = 1e-10
    spectral_norm_max_iters: int = 10_000

    def __post_init__(self):
        if self.inner_iterations < 1:
            raise ValueError(f"inner_iterations must be >= 1, got {self.inner_iterations}")
        if not 0 < self.spectral_norm_tolerance < 1:
            raise ValueError("spectral_norm_tolerance must be in (0, 1)")
        if self.spectral_norm_max_iters < 1:
            raise ValueError("spectral_norm_max_iters must be >= 1")


@dataclass(frozen=True)
class NenmfConfig:
    outer_iterations: int = 10
    ogm: OgmConfig = field(default_factory=OgmConfig)

    def __post_init__(self):
        if self.outer_iterations < 1:
            raise ValueError(f"outer_iterations must be >= 1, got {self.outer_iterations}")


def momentum_sequence(count: int) -> np.ndarray:
    """First ``count`` momentum coefficients, starting from 1."""
    alphas = np.empty(count)
    a = 1.0
    for k in range(count):
        alphas[k] = a
        a = (1.0 + np.sqrt(4.0 * a * a + 1.0)) / 2.0
    return alphas


def _gram_top_eigenvalue(G: np.ndarray, tol: float, max_iters: int) -> float:
    # power iteration from the all-ones vector; Rayleigh quotients approach from below
    x = np.ones(G.shape[0])
    x /= np.linalg.norm(x)
    lam = 0.0
    for _ in range(max_iters):
        y = G @ x
        lam_new = float(x @ y)
        ny = np.linalg.norm(y)
        if ny == 0.0:
            break
        x = y / ny
        if lam_new > 0 and abs(lam_new - lam) <= tol * lam_new:
            lam = lam_new
            break
        lam = lam_new
    return float(x @ G @ x) if lam > 0 else lam


def spectral_norm(W: np.ndarray, tol: float = 1e-10, max_iters: int = 10_000) -> float:
    """Largest singular value of ``W`` by power iteration on the smaller Gram matrix."""
    W = np.asarray(W, dtype=np.float64)
    if not np.any(W):
        raise ValueError("spectral norm of an all-zero matrix is undefined for step sizing")
    G = W.T @ W if W.shape[0] >= W.shape[1] else W @ W.T
    lam = _gram_top_eigenvalue(G, tol, max_iters)
    if lam <= 0:
        # all-ones start orthogonal to the top eigenvector; fall back to a dense solve
        lam = float(np.linalg.eigvalsh(G)[-1])
    return float(np.sqrt(lam))


def ogm(W, H0, V, config: OgmConfig = OgmConfig(), norm: float | None = None) -> np.ndarray:
    """Approximately solve ``min_{H >= 0} ||W H - V||_F^2`` with K accelerated steps.

    ``V`` may contain negative entries. ``norm`` is a precomputed spectral norm
    estimate of ``W``; the step uses ``1 / (norm * (1 + tol))**2`` so that it
    never exceeds the exact Lipschitz step.
    """
    W = np.asarray(W, dtype=np.float64)
    H0 = np.asarray(H0, dtype=np.float64)
    V = np.asarray(V, dtype=np.float64)
    if W.shape[1] != H0.shape[0] or W.shape[0] != V.shape[0] or H0.shape[1] != V.shape[1]:
        raise ValueError(f"shape mismatch: W {W.shape}, H0 {H0.shape}, V {V.shape}")
    tol = config.spectral_norm_tolerance
    if norm is None:
        norm = spectral_norm(W, tol, config.spectral_norm_max_iters)
    step = 1.0 / (norm * (1.0 + tol)) ** 2

    # gradient W^T (W Y - V) = G Y - WtV
    G = W.T @ W
    WtV = W.T @ V
    H_prev = H0
    Y = H0
    alpha = 1.0
    for _ in range(config.inner_iterations):
        H = np.maximum(Y - step * (G @ Y - WtV), 0.0)
        alpha_next = (1.0 + np.sqrt(4.0 * alpha * alpha + 1.0)) / 2.0
        Y = H + ((alpha - 1.0) / alpha_next) * (H - H_prev)
        H_prev, alpha = H, alpha_next
    if not np.all(np.isfinite(H_prev)):
        raise NumericalError("non-finite iterate in OGM")
    return H_prev


def nenmf_step(V, W_D, state: FactorState, config: NenmfConfig = NenmfConfig(),
               W_D_norm: float | None = None, notes: list | None = None) -> FactorState:
    """One outer alternating sweep: H_D, then W_H (via the transposed problem), then H_H.

    If H_H or W_H is entirely zero the dependent update is skipped, since its
    step size is undefined; a message is appended to ``notes`` and a
    ``RuntimeWarning`` is raised.
    """
    V, W_D = _as_matrix(V), _as_matrix(W_D)
    cfg = config.ogm
    H_D, W_H, H_H = state.H_D, state.W_H, state.H_H

    H_D = ogm(W_D, H_D, V - W_H @ H_H, cfg, norm=W_D_norm)
    R = V - W_D @ H_D

    def skip(msg):
        if notes is not None:
            notes.append(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=3)

    if np.any(H_H):
        W_H = ogm(H_H.T, W_H.T, R.T, cfg).T
    else:
        skip("H_H is all zero; W_H update skipped")
    if np.any(W_H):
        H_H = ogm(W_H, H_H, R, cfg)
    else:
        skip("W_H is all zero; H_H update skipped")
    return FactorState(H_D, W_H, H_H)


def run_nenmf(V, W_D, init: FactorState, config: NenmfConfig = NenmfConfig()):
    """Run ``config.outer_iterations`` NeNMF sweeps from a copy of ``init``.

    The trace has ``outer_iterations + 1`` entries. The fixed dictionary's
    spectral norm is computed once.
    """
    V, W_D = _as_matrix(V), _as_matrix(W_D)
    check_shapes(V, W_D, init)
    cfg = config.ogm
    state = init.copy()
    trace = ConvergenceTrace()
    trace.append(0, loss(V, W_D, state), 0.0)
    spent = 0.0
    t0 = time.perf_counter()
    W_D_norm = spectral_norm(W_D, cfg.spectral_norm_tolerance, cfg.spectral_norm_max_iters)
    spent += time.perf_counter() - t0
    for t in range(1, config.outer_iterations + 1):
        t0 = time.perf_counter()
        try:
            with np.errstate(all="ignore"):
                state = nenmf_step(V, W_D, state, config, W_D_norm=W_D_norm, notes=trace.warnings)
        except NumericalError as exc:
            raise NumericalError(str(exc), iteration=t) from exc
        spent += time.perf_counter() - t0
        trace.append(t, loss(V, W_D, state), spent)
    return state, trace
