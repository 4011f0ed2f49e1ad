"""Framing and log-spectral features: the trainable-from-nothing speech encoder front half.

Frames advance by `hop` samples; each frame is Hann-windowed, and triangular
mel-spaced band energies are log-compressed.  Per-utterance mean/variance
normalization then strips per-speaker level and tilt so that quantization sees
only content.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .corpus import Waveform
from .errors import FeatureError

LOG_EPS = 1e-8
VARIANCE_FLOOR = 1e-6

FEATURE_MAGIC = b"FEAT"
FEATURE_VERSION = 1


@dataclass(frozen=True)
class FeatureConfig:
    sample_rate: int = 16000
    hop: int = 320
    window: int = 640  # 2 * hop unless overridden
    n_bands: int = 40
    normalize: bool = True

    def __post_init__(self) -> None:
        if not (0 < self.hop <= self.window):
            raise FeatureError(f"need 0 < hop <= window, got hop={self.hop} window={self.window}")
        if self.n_bands < 2:
            raise FeatureError(f"n_bands must be >= 2, got {self.n_bands}")

    def fingerprint(self) -> str:
        payload = json.dumps(
            {
                "sample_rate": self.sample_rate,
                "hop": self.hop,
                "window": self.window,
                "n_bands": self.n_bands,
                "normalize": self.normalize,
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass
class FeatureSequence:
    frames: np.ndarray  # (T, n_bands) float64
    config: FeatureConfig

    def __len__(self) -> int:
        return len(self.frames)


def frame_count(n_samples: int, cfg: FeatureConfig) -> int:
    if n_samples < cfg.window:
        raise FeatureError(
            f"waveform of {n_samples} samples is shorter than the window ({cfg.window})"
        )
    return (n_samples - cfg.window) // cfg.hop + 1


def hann_window(n: int) -> np.ndarray:
    # periodic form: integer-bin sinusoids leak into adjacent bins only
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def _mel(f: np.ndarray | float) -> np.ndarray | float:
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def _mel_inv(m: np.ndarray) -> np.ndarray:
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(cfg: FeatureConfig) -> np.ndarray:
    """(n_bands, window//2 + 1) triangular weights over rFFT bin frequencies."""
    n_bins = cfg.window // 2 + 1
    bin_freqs = np.arange(n_bins) * cfg.sample_rate / cfg.window
    points = _mel_inv(np.linspace(0.0, _mel(cfg.sample_rate / 2.0), cfg.n_bands + 2))
    bank = np.zeros((cfg.n_bands, n_bins))
    for b in range(cfg.n_bands):
        lo, center, hi = points[b], points[b + 1], points[b + 2]
        rising = (bin_freqs - lo) / (center - lo)
        falling = (hi - bin_freqs) / (hi - center)
        bank[b] = np.maximum(0.0, np.minimum(rising, falling))
    return bank


def extract_features(waveform: Waveform, cfg: FeatureConfig) -> FeatureSequence:
    """Log band energies per frame; applies normalization when cfg.normalize."""
    if waveform.sample_rate != cfg.sample_rate:
        raise FeatureError(
            f"sample rate mismatch: waveform {waveform.sample_rate} Hz vs config {cfg.sample_rate} Hz"
        )
    samples = np.asarray(waveform.samples, dtype=np.float64)
    n_frames = frame_count(len(samples), cfg)
    window = hann_window(cfg.window)
    bank = mel_filterbank(cfg)
    idx = np.arange(cfg.window)[None, :] + cfg.hop * np.arange(n_frames)[:, None]
    segments = samples[idx] * window[None, :]
    power = np.abs(np.fft.rfft(segments, axis=1)) ** 2
    frames = np.log(power @ bank.T + LOG_EPS)
    seq = FeatureSequence(frames=frames, config=cfg)
    if cfg.normalize:
        seq = normalize_features(seq)
    return seq


def normalize_features(features: FeatureSequence) -> FeatureSequence:
    """Per-dimension zero mean / unit variance over the utterance (floored variance)."""
    frames = features.frames
    if len(frames) < 2:
        raise FeatureError("normalization needs at least 2 frames (variance undefined)")
    mean = frames.mean(axis=0)
    var = np.maximum(frames.var(axis=0), VARIANCE_FLOOR)
    return FeatureSequence(frames=(frames - mean) / np.sqrt(var), config=features.config)


def save_features(features: FeatureSequence, path: str | Path) -> None:
    """Binary cache: magic, version u8, T u32, n_bands u32, row-major f32 LE."""
    frames32 = features.frames.astype("<f4")
    with Path(path).open("wb") as fh:
        fh.write(FEATURE_MAGIC)
        fh.write(struct.pack("<B", FEATURE_VERSION))
        fh.write(struct.pack("<II", frames32.shape[0], frames32.shape[1]))
        fh.write(frames32.tobytes())


def load_features(path: str | Path, cfg: FeatureConfig) -> FeatureSequence:
    raw = Path(path).read_bytes()
    if raw[:4] != FEATURE_MAGIC:
        raise FeatureError(f"{path}: not a feature dump")
    version = raw[4]
    if version != FEATURE_VERSION:
        raise FeatureError(f"{path}: unsupported feature dump version {version}")
    n_frames, n_bands = struct.unpack_from("<II", raw, 5)
    if n_bands != cfg.n_bands:
        raise FeatureError(f"{path}: dump has {n_bands} bands, config expects {cfg.n_bands}")
    frames = np.frombuffer(raw, dtype="<f4", count=n_frames * n_bands, offset=13)
    return FeatureSequence(
        frames=frames.reshape(n_frames, n_bands).astype(np.float64), config=cfg
    )


def raw_config(cfg: FeatureConfig) -> FeatureConfig:
    """Same framing with normalization disabled (used by the speaker probe)."""
    return replace(cfg, normalize=False)
