"""Mel-frequency cepstral features for the acoustic channel.

The stages follow the classic recipe: pre-emphasis, fixed-length framing
with a Hamming window, one-sided power spectrum, triangular mel filterbank
on integer FFT bins, log compression, and a cosine transform that keeps
cepstra 1..n_ceps (the scale-dependent DC term is dropped, so features are
invariant to uniform gain).
"""

from __future__ import annotations

import math
import wave
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .resample import nearest_indices

_POOLINGS = ("concat_fixed", "mean")


@dataclass
class MfccConfig:
    frame_len_ms: float = 25.0
    frame_step_ms: float = 10.0
    n_filters: int = 26
    n_ceps: int = 13
    pre_emphasis: float = 0.97
    fft_size: int | None = None  # default: next power of two >= frame length
    low_hz: float = 0.0
    high_hz: float | None = None  # default: Nyquist
    include_c0: bool = False  # shift the cepstral range to n = 0..n_ceps-1
    pooling: str = "concat_fixed"
    n_frames: int = 100
    log_floor: float = 1e-10

    def validate(self) -> None:
        if self.frame_len_ms <= 0 or self.frame_step_ms <= 0:
            raise ValueError("frame length and step must be positive")
        if self.n_filters < 1 or self.n_ceps < 1:
            raise ValueError("filter and cepstrum counts must be >= 1")
        if self.n_ceps > self.n_filters:
            raise ValueError("n_ceps cannot exceed n_filters")
        if not 0.0 <= self.pre_emphasis < 1.0:
            raise ValueError("pre_emphasis must lie in [0, 1)")
        if self.pooling not in _POOLINGS:
            raise ValueError(f"pooling must be one of {_POOLINGS}")
        if self.pooling == "concat_fixed" and self.n_frames < 1:
            raise ValueError("n_frames must be >= 1 for concat_fixed pooling")
        if self.log_floor <= 0.0:
            raise ValueError("log_floor must be positive")

    def feature_dim(self) -> int:
        return self.n_ceps * (self.n_frames if self.pooling == "concat_fixed" else 1)


def next_pow2(n: int) -> int:
    if n < 1:
        raise ValueError("need a positive length")
    return 1 << (n - 1).bit_length()


def pre_emphasize(signal: np.ndarray, alpha: float) -> np.ndarray:
    """First-order high-pass: y[0] = x[0], y[t] = x[t] - alpha * x[t-1]."""
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("signal must be a non-empty 1-D array")
    y = np.empty_like(x)
    y[0] = x[0]
    y[1:] = x[1:] - alpha * x[:-1]
    return y


def frame_signal(signal: np.ndarray, frame_len: int, hop: int) -> np.ndarray:
    """Split into overlapping frames, zero-padding the tail.

    Frame t covers samples [t*hop, t*hop + frame_len); the frame count is
    (len - 1) // hop + 1, so every sample index starts exactly one frame.
    """
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("signal must be a non-empty 1-D array")
    if frame_len < 1 or hop < 1:
        raise ValueError("frame length and hop must be >= 1")
    n_frames = (x.size - 1) // hop + 1
    out = np.zeros((n_frames, frame_len))
    for t in range(n_frames):
        chunk = x[t * hop : t * hop + frame_len]
        out[t, : chunk.size] = chunk
    return out


def hz_to_mel(hz):
    return 2595.0 * np.log10(1.0 + np.asarray(hz, dtype=np.float64) / 700.0)


def mel_to_hz(mel):
    return 700.0 * (10.0 ** (np.asarray(mel, dtype=np.float64) / 2595.0) - 1.0)


def mel_points(
    n_filters: int, sample_rate: float, low_hz: float = 0.0,
    high_hz: float | None = None,
) -> np.ndarray:
    """The n_filters + 2 band edges, uniformly spaced on the mel scale."""
    high_hz = sample_rate / 2.0 if high_hz is None else high_hz
    if not 0.0 <= low_hz < high_hz <= sample_rate / 2.0:
        raise ValueError("need 0 <= low_hz < high_hz <= Nyquist")
    return np.linspace(hz_to_mel(low_hz), hz_to_mel(high_hz), n_filters + 2)


def filter_bins(
    n_filters: int, fft_size: int, sample_rate: float,
    low_hz: float = 0.0, high_hz: float | None = None,
) -> np.ndarray:
    """Band edges snapped to FFT bins: floor((fft_size+1) * hz / rate)."""
    pts = mel_points(n_filters, sample_rate, low_hz, high_hz)
    return np.floor((fft_size + 1) * mel_to_hz(pts) / sample_rate).astype(int)


def mel_filterbank(
    n_filters: int,
    fft_size: int,
    sample_rate: float,
    low_hz: float = 0.0,
    high_hz: float | None = None,
) -> np.ndarray:
    """Triangular filters on integer FFT bins, shape (n_filters, fft_size//2+1).

    Each filter rises linearly from the previous band edge to 1 at its
    center bin and falls back to 0 at the next edge.
    """
    bins = filter_bins(n_filters, fft_size, sample_rate, low_hz, high_hz)
    fb = np.zeros((n_filters, fft_size // 2 + 1))
    for j in range(n_filters):
        left, center, right = bins[j], bins[j + 1], bins[j + 2]
        for k in range(left, center):
            fb[j, k] = (k - left) / (center - left)
        for k in range(center, right):
            fb[j, k] = (right - k) / (right - center)
    return fb


def power_spectrum(frames: np.ndarray, fft_size: int) -> np.ndarray:
    """One-sided squared-magnitude spectrum, length fft_size // 2 + 1."""
    frames = np.asarray(frames, dtype=np.float64)
    if frames.shape[-1] > fft_size:
        raise ValueError("fft_size must be at least the frame length")
    return np.abs(np.fft.rfft(frames, fft_size, axis=-1)) ** 2


@lru_cache(maxsize=8)
def dct_matrix(n_ceps: int, n_filters: int, include_c0: bool = False) -> np.ndarray:
    """Cosine transform rows: M[i, k] = cos(n_i * (k + 1/2) * pi / K).

    Rows carry cepstra n = 1..n_ceps by default; with include_c0 the range
    shifts to n = 0..n_ceps-1, whose first row sums the log energies. All
    n >= 1 rows sum to zero, so constant log energies map to zero cepstra.
    """
    start = 0 if include_c0 else 1
    n = np.arange(start, start + n_ceps)[:, None]
    k = np.arange(n_filters)[None, :]
    return np.cos(n * (k + 0.5) * math.pi / n_filters)


def mfcc_frames(
    signal: np.ndarray, sample_rate: float, cfg: MfccConfig | None = None
) -> np.ndarray:
    """Per-frame cepstra of a mono signal, shape (n_frames, n_ceps)."""
    cfg = cfg or MfccConfig()
    cfg.validate()
    frame_len = int(round(sample_rate * cfg.frame_len_ms / 1000.0))
    hop = int(round(sample_rate * cfg.frame_step_ms / 1000.0))
    if frame_len < 1 or hop < 1:
        raise ValueError("sample rate too low for the configured frame timing")
    fft_size = cfg.fft_size or next_pow2(frame_len)
    if fft_size < frame_len:
        raise ValueError("fft_size must be at least the frame length")
    emphasized = pre_emphasize(signal, cfg.pre_emphasis)
    frames = frame_signal(emphasized, frame_len, hop)
    frames *= np.hamming(frame_len)
    power = power_spectrum(frames, fft_size)
    fb = mel_filterbank(cfg.n_filters, fft_size, sample_rate, cfg.low_hz, cfg.high_hz)
    energies = power @ fb.T
    log_e = np.log(np.maximum(energies, cfg.log_floor))
    return log_e @ dct_matrix(cfg.n_ceps, cfg.n_filters, cfg.include_c0).T


def sequence_features(
    signal: np.ndarray, sample_rate: float, cfg: MfccConfig | None = None
) -> np.ndarray:
    """Fixed-length acoustic feature vector for one utterance.

    concat_fixed pooling resamples the cepstral track to cfg.n_frames
    frames by nearest index and concatenates (default 100 x 13 = 1300);
    mean pooling averages over time instead (n_ceps values). Utterances
    shorter than one analysis frame are rejected.
    """
    cfg = cfg or MfccConfig()
    frame_len = int(round(sample_rate * cfg.frame_len_ms / 1000.0))
    if np.asarray(signal).size < frame_len:
        raise ValueError(
            f"utterance shorter than one {cfg.frame_len_ms:g} ms frame"
        )
    ceps = mfcc_frames(signal, sample_rate, cfg)
    if cfg.pooling == "mean":
        return ceps.mean(axis=0)
    idx = nearest_indices(ceps.shape[0], cfg.n_frames)
    return ceps[idx].reshape(-1)


def read_wav(path: str | Path) -> tuple[int, np.ndarray]:
    """Load a 16-bit PCM WAV as (sample_rate, float64 in [-1, 1)).

    Stereo files are averaged down to mono.
    """
    with wave.open(str(path), "rb") as wf:
        channels = wf.getnchannels()
        if channels not in (1, 2):
            raise ValueError(f"{path}: expected mono or stereo audio")
        if wf.getsampwidth() != 2:
            raise ValueError(f"{path}: expected 16-bit PCM")
        sr = wf.getframerate()
        raw = wf.readframes(wf.getnframes())
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    if channels == 2:
        samples = samples.reshape(-1, 2).mean(axis=1)
    if samples.size == 0:
        raise ValueError(f"{path}: empty audio stream")
    return sr, samples


def write_wav(path: str | Path, sample_rate: int, signal: np.ndarray) -> None:
    """Write float samples in [-1, 1] as a mono 16-bit PCM WAV."""
    x = np.clip(np.asarray(signal, dtype=np.float64), -1.0, 1.0)
    pcm = np.round(x * 32767.0).astype("<i2")
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(int(sample_rate))
        wf.writeframes(pcm.tobytes())
