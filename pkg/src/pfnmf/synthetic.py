"""Synthetic fixtures: exact-model matrices and a rendered drum-plus-harmony track."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio import AudioBuffer, Spectrogram, stft_magnitude
from .onsets import OnsetList


def model_instance(m: int, n: int, r_D: int, r_H: int, seed: int, noise: float = 0.05):
    """Return ``(V, W_D, H_D, W_H, H_H)`` with ``V = W_D H_D + W_H H_H + |noise|``.

    Noise is half-normal with scale ``noise * mean(clean V)``.
    """
    rng = np.random.default_rng(seed)
    W_D = rng.random((m, r_D))
    H_D = rng.random((r_D, n))
    W_H = rng.random((m, r_H))
    H_H = rng.random((r_H, n))
    clean = W_D @ H_D + W_H @ H_H
    V = clean + np.abs(rng.normal(0.0, noise * clean.mean(), size=clean.shape))
    return V, W_D, H_D, W_H, H_H


def _decay(n: int, sr: int, tau: float) -> np.ndarray:
    return np.exp(-np.arange(n) / (tau * sr))


def _band_noise(rng, n: int, sr: int, lo: float, hi: float) -> np.ndarray:
    spec = np.fft.rfft(rng.standard_normal(n))
    f = np.fft.rfftfreq(n, 1.0 / sr)
    spec[(f < lo) | (f > hi)] = 0.0
    x = np.fft.irfft(spec, n)
    return x / (np.abs(x).max() + 1e-12)


def render_hit(kind: str, sr: int, rng) -> np.ndarray:
    """One drum hit, about 0.4 s long. ``kind`` is 'kick', 'snare' or 'hihat'."""
    n = int(0.4 * sr)
    t = np.arange(n) / sr
    if kind == "kick":
        freq = 60.0 + 40.0 * np.exp(-t / 0.01)
        x = np.sin(2 * np.pi * np.cumsum(freq) / sr) * _decay(n, sr, 0.08)
    elif kind == "snare":
        x = 0.7 * _band_noise(rng, n, sr, 1000.0, 5000.0) * _decay(n, sr, 0.09)
        x += 0.4 * np.sin(2 * np.pi * 190.0 * t) * _decay(n, sr, 0.06)
    elif kind == "hihat":
        x = 0.6 * _band_noise(rng, n, sr, 6000.0, 7900.0) * _decay(n, sr, 0.05)
    else:
        raise ValueError(f"unknown drum {kind!r}")
    return x


@dataclass
class DrumTrack:
    audio: AudioBuffer
    hits: dict          # label -> AudioBuffer of an isolated hit, for dictionary training
    onsets: list        # list[OnsetList] in label order
    labels: tuple
    background_ratio: float


def drum_track(seed: int = 0, duration: float = 30.0, sr: int = 16000, n_onsets: int = 60,
               background_ratio: float = 0.2, n_notes: int = 5,
               window_length: int = 2048, hop_size: int = 512) -> DrumTrack:
    """Render drums plus a sustained 5-note harmonic background.

    Onsets are spread over the track with at least 0.3 s between any two, and
    components are assigned in shuffled equal shares. The background is scaled
    so that the Frobenius norm of its magnitude spectrogram is
    ``background_ratio`` times that of the drum-only spectrogram.
    """
    rng = np.random.default_rng(seed)
    labels = ("hihat", "snare", "kick")
    n = int(duration * sr)

    slots = np.linspace(0.25, duration - 0.75, n_onsets)
    jitter = rng.uniform(-0.05, 0.05, size=n_onsets)
    times = np.round((slots + jitter) * sr) / sr
    kinds = np.array([labels[i % 3] for i in range(n_onsets)])
    rng.shuffle(kinds)

    drums = np.zeros(n)
    for t, kind in zip(times, kinds):
        hit = render_hit(kind, sr, rng) * rng.uniform(0.7, 1.0)
        s = int(round(t * sr))
        end = min(n, s + len(hit))
        drums[s:end] += hit[: end - s]

    tt = np.arange(n) / sr
    bg = np.zeros(n)
    for _ in range(n_notes):
        f0 = rng.uniform(110.0, 440.0)
        tone = sum(np.sin(2 * np.pi * f0 * h * tt + rng.uniform(0, 2 * np.pi)) / h for h in range(1, 6))
        env = 0.5 + 0.5 * np.sin(2 * np.pi * rng.uniform(0.05, 0.2) * tt + rng.uniform(0, 2 * np.pi))
        bg += tone * env

    S_d = stft_magnitude(AudioBuffer(drums, sr), window_length, hop_size).magnitudes
    S_b = stft_magnitude(AudioBuffer(bg, sr), window_length, hop_size).magnitudes
    bg *= background_ratio * np.linalg.norm(S_d) / np.linalg.norm(S_b)

    hits = {k: AudioBuffer(render_hit(k, sr, rng), sr) for k in labels}
    onsets = [OnsetList(k, tuple(sorted(times[kinds == k]))) for k in labels]
    return DrumTrack(AudioBuffer(drums + bg, sr), hits, onsets, labels, background_ratio)
