"""WAV decoding and magnitude spectrograms."""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from scipy.io import wavfile


class AudioError(Exception):
    """Base class for audio loading failures."""


class WavFormatError(AudioError):
    """Malformed or unsupported WAV file."""


class EmptyAudioError(AudioError):
    """WAV file decoded to zero samples."""


@dataclass(frozen=True)
class AudioBuffer:
    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class Spectrogram:
    """Magnitude spectrogram with its framing metadata.

    ``magnitudes`` has shape (bins, frames). Frame ``j`` starts at sample
    ``j * hop_size``.
    """

    magnitudes: np.ndarray
    sample_rate: int
    window_length: int
    hop_size: int

    @property
    def bin_count(self) -> int:
        return self.magnitudes.shape[0]

    @property
    def frame_count(self) -> int:
        return self.magnitudes.shape[1]

    @property
    def time_resolution(self) -> float:
        return self.hop_size / self.sample_rate

    def frame_times(self) -> np.ndarray:
        return np.arange(self.frame_count) * self.time_resolution


# (divisor, offset) per integer dtype; 8-bit WAV is unsigned
_INT_SCALE = {
    np.dtype(np.uint8): (128.0, 128.0),
    np.dtype(np.int16): (32768.0, 0.0),
    np.dtype(np.int32): (2147483648.0, 0.0),
}


def _to_float(data: np.ndarray) -> np.ndarray:
    if data.dtype in _INT_SCALE:
        div, off = _INT_SCALE[data.dtype]
        return (data.astype(np.float64) - off) / div
    if data.dtype.kind == "f":
        return data.astype(np.float64)
    raise WavFormatError(f"unsupported sample type {data.dtype}")


def load_wav(path) -> AudioBuffer:
    """Read a PCM WAV file and mix it down to mono.

    Integer samples are scaled to [-1, 1] by the magnitude of the type's
    minimum (128, 32768, 2**31); 24-bit files arrive left-justified in int32
    and are scaled the same way. Float samples pass through unclamped.
    Channels are averaged after scaling.
    """
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise FileNotFoundError(f"no such WAV file: {path}")
    try:
        rate, data = wavfile.read(path)
    except (ValueError, EOFError) as exc:
        raise WavFormatError(f"{path}: {exc}") from exc
    samples = _to_float(np.asarray(data))
    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    if samples.size == 0:
        raise EmptyAudioError(f"{path}: no samples")
    return AudioBuffer(samples=samples, sample_rate=int(rate))


def write_wav(path, audio: AudioBuffer, bits: int = 16) -> None:
    """Write mono audio as integer PCM (``bits`` in 8/16/32) or 32-bit float (``bits=0``)."""
    x = np.asarray(audio.samples, dtype=np.float64)
    if bits == 0:
        data = x.astype(np.float32)
    elif bits == 8:
        data = np.clip(np.round(x * 128.0 + 128.0), 0, 255).astype(np.uint8)
    elif bits == 16:
        data = np.clip(np.round(x * 32768.0), -32768, 32767).astype(np.int16)
    elif bits == 32:
        data = np.clip(np.round(x * 2147483648.0), -2147483648, 2147483647).astype(np.int32)
    else:
        raise ValueError(f"unsupported bit depth {bits}")
    wavfile.write(os.fspath(path), audio.sample_rate, data)


def hann_window(length: int) -> np.ndarray:
    # periodic form, so overlapping frames at hop = length/4 sum to a constant
    n = np.arange(length)
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * n / length)


def frame_signal(samples: np.ndarray, window_length: int, hop_size: int) -> np.ndarray:
    """Slice ``samples`` into frames at offsets 0, hop, 2*hop, ... (frames x window).

    The tail is zero-padded so the last frame starting before the end of the
    signal is kept; the frame count is ``ceil(len / hop)``.
    """
    n_frames = -(-len(samples) // hop_size)
    padded_len = (n_frames - 1) * hop_size + window_length
    padded = np.zeros(max(padded_len, len(samples)))
    padded[: len(samples)] = samples
    view = np.lib.stride_tricks.sliding_window_view(padded, window_length)
    return view[::hop_size][:n_frames]


def stft_magnitude(audio: AudioBuffer, window_length: int = 2048, hop_size: int = 512) -> Spectrogram:
    """Hann-windowed one-sided STFT magnitude, shape (window_length//2 + 1, ceil(len/hop))."""
    if window_length < 2 or hop_size < 1:
        raise ValueError(f"need window_length >= 2 and hop_size >= 1, got {window_length}, {hop_size}")
    if hop_size > window_length:
        raise ValueError(f"hop_size {hop_size} exceeds window_length {window_length}")
    samples = np.asarray(audio.samples, dtype=np.float64)
    if samples.ndim != 1 or samples.size == 0:
        raise ValueError("audio must be a non-empty mono buffer")

    frames = frame_signal(samples, window_length, hop_size) * hann_window(window_length)
    mags = np.abs(np.fft.rfft(frames, axis=1)).T
    return Spectrogram(
        magnitudes=np.ascontiguousarray(mags),
        sample_rate=audio.sample_rate,
        window_length=window_length,
        hop_size=hop_size,
    )
