"""Partially fixed NMF model state, loss and initialization.

The model is ``V ~ W_D @ H_D + W_H @ H_H`` where ``W_D`` (the drum dictionary)
is fixed and the other three factors are trained under nonnegativity.
"""

from __future__ import annotations

import csv
import hashlib
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .audio import Spectrogram
from .dictionary import Dictionary


class NumericalError(ArithmeticError):
    """A solver produced a non-finite value."""

    def __init__(self, message: str, iteration: int | None = None):
        super().__init__(message if iteration is None else f"iteration {iteration}: {message}")
        self.iteration = iteration


@dataclass
class FactorState:
    H_D: np.ndarray
    W_H: np.ndarray
    H_H: np.ndarray

    def __post_init__(self):
        r_d, n = self.H_D.shape
        m, r_h = self.W_H.shape
        if self.H_H.shape != (r_h, n):
            raise ValueError(f"H_H has shape {self.H_H.shape}, expected {(r_h, n)}")

    @property
    def r_D(self) -> int:
        return self.H_D.shape[0]

    @property
    def r_H(self) -> int:
        return self.W_H.shape[1]

    def copy(self) -> "FactorState":
        return FactorState(self.H_D.copy(), self.W_H.copy(), self.H_H.copy())

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for a in (self.H_D, self.W_H, self.H_H))

    def digest(self) -> str:
        h = hashlib.sha256()
        for a in (self.H_D, self.W_H, self.H_H):
            h.update(np.ascontiguousarray(a, dtype=np.float64).tobytes())
        return h.hexdigest()


@dataclass
class ConvergenceTrace:
    """Loss after each iteration; entry 0 is the initial state."""

    iterations: list = field(default_factory=list)
    losses: list = field(default_factory=list)
    elapsed: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def append(self, iteration: int, loss_value: float, elapsed_seconds: float) -> None:
        if self.iterations and iteration <= self.iterations[-1]:
            raise ValueError("iteration indices must increase")
        self.iterations.append(iteration)
        self.losses.append(float(loss_value))
        self.elapsed.append(float(elapsed_seconds))

    def __len__(self) -> int:
        return len(self.iterations)


def _as_matrix(x) -> np.ndarray:
    if isinstance(x, Spectrogram):
        return x.magnitudes
    if isinstance(x, Dictionary):
        return x.basis
    return np.asarray(x, dtype=np.float64)


def check_shapes(V, W_D, state: FactorState) -> None:
    V, W_D = _as_matrix(V), _as_matrix(W_D)
    m, n = V.shape
    if W_D.shape[0] != m:
        raise ValueError(f"W_D has {W_D.shape[0]} rows, V has {m}")
    if state.H_D.shape != (W_D.shape[1], n):
        raise ValueError(f"H_D has shape {state.H_D.shape}, expected {(W_D.shape[1], n)}")
    if state.W_H.shape[0] != m:
        raise ValueError(f"W_H has {state.W_H.shape[0]} rows, V has {m}")


def residual(V, W_D, state: FactorState) -> np.ndarray:
    V, W_D = _as_matrix(V), _as_matrix(W_D)
    return V - (W_D @ state.H_D + state.W_H @ state.H_H)


def loss(V, W_D, state: FactorState) -> float:
    """Half the squared Frobenius norm of the reconstruction error."""
    check_shapes(V, W_D, state)
    R = residual(V, W_D, state)
    return 0.5 * float(np.vdot(R, R))


def random_init(m: int, n: int, r_D: int, r_H: int, seed: int = 0) -> FactorState:
    """Draw H_D, W_H, H_H i.i.d. Unif(0, 1) from ``numpy.random.default_rng(seed)`` (PCG64).

    Draw order is H_D, W_H, H_H. Samples are taken on [tiny, 1) so no entry is
    exactly zero.
    """
    for name, v in (("m", m), ("n", n), ("r_D", r_D), ("r_H", r_H)):
        if int(v) < 1:
            raise ValueError(f"{name} must be >= 1, got {v}")
    rng = np.random.default_rng(seed)
    tiny = np.finfo(np.float64).tiny

    def draw(shape):
        return np.maximum(rng.random(shape), tiny)

    return FactorState(H_D=draw((r_D, n)), W_H=draw((m, r_H)), H_H=draw((r_H, n)))


def write_activations(path, H_D: np.ndarray, labels: Sequence[str], time_resolution: float) -> None:
    """One row per drum component; header row holds frame times in seconds."""
    times = np.arange(H_D.shape[1]) * time_resolution
    with open(os.fspath(path), "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["component"] + [repr(float(t)) for t in times])
        for label, row in zip(labels, H_D):
            w.writerow([label] + [repr(float(v)) for v in row])


def read_activations(path):
    """Inverse of :func:`write_activations`; returns (H_D, labels, frame_times)."""
    with open(os.fspath(path), encoding="utf-8", newline="") as f:
        rows = list(csv.reader(f))
    if not rows or not rows[0] or rows[0][0] != "component":
        raise ValueError(f"{path}: not an activation CSV")
    times = np.array([float(t) for t in rows[0][1:]])
    labels, data = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(times) + 1:
            raise ValueError(f"{path}: line {lineno} has {len(row) - 1} values, expected {len(times)}")
        labels.append(row[0])
        data.append([float(v) for v in row[1:]])
    return np.array(data).reshape(len(labels), len(times)), labels, times
