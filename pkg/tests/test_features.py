import numpy as np
import pytest

from unit_tts.corpus import Waveform, synthesize_utterance
from unit_tts.errors import FeatureError
from unit_tts.features import (
    FeatureConfig,
    extract_features,
    frame_count,
    load_features,
    normalize_features,
    raw_config,
    save_features,
)


def _noise(n: int, rate: int = 16000, seed: int = 0) -> Waveform:
    rng = np.random.default_rng(seed)
    return Waveform(samples=rng.uniform(-0.5, 0.5, n), sample_rate=rate)


def test_frame_count_example():
    cfg = FeatureConfig(sample_rate=16000, hop=320, window=640, n_bands=40)
    # floor((64000 - 640)/320) + 1 = 199, not the idealized 64000/320 = 200
    assert frame_count(64000, cfg) == 199
    assert len(extract_features(_noise(64000), cfg)) == 199


def test_single_window_is_one_frame():
    cfg = FeatureConfig(sample_rate=16000, hop=320, window=640, n_bands=40, normalize=False)
    assert len(extract_features(_noise(640), cfg)) == 1


def test_too_short_waveform_errors():
    cfg = FeatureConfig(sample_rate=16000, hop=320, window=640, n_bands=40)
    with pytest.raises(FeatureError, match="shorter"):
        extract_features(_noise(100), cfg)


def test_rate_mismatch_errors():
    cfg = FeatureConfig(sample_rate=16000, hop=320, window=640, n_bands=40)
    with pytest.raises(FeatureError, match="rate"):
        extract_features(_noise(64000, rate=8000), cfg)


def test_frame_count_formula_random_lengths():
    cfg = FeatureConfig(sample_rate=16000, hop=160, window=400, n_bands=10, normalize=False)
    rng = np.random.default_rng(1)
    for _ in range(40):
        n = int(rng.integers(cfg.window, 20000))
        feats = extract_features(_noise(n), cfg)
        assert len(feats) == (n - cfg.window) // cfg.hop + 1


def test_translation_covariance():
    cfg = FeatureConfig(sample_rate=16000, hop=160, window=320, n_bands=12, normalize=False)
    w = _noise(4000, seed=2)
    shifted = Waveform(samples=np.concatenate([np.zeros(cfg.hop), w.samples]), sample_rate=16000)
    a = extract_features(w, cfg).frames
    b = extract_features(shifted, cfg).frames
    assert np.allclose(b[1 : len(a) // 2], a[: len(a) // 2 - 1], atol=1e-9)


def test_normalization_moments():
    cfg = FeatureConfig(sample_rate=16000, hop=160, window=320, n_bands=12, normalize=True)
    feats = extract_features(_noise(8000, seed=3), cfg)
    assert np.all(np.abs(feats.frames.mean(axis=0)) < 1e-6)
    assert np.all(np.abs(feats.frames.var(axis=0) - 1.0) < 1e-6)


def test_normalize_constant_features_floored():
    cfg = FeatureConfig(sample_rate=16000, hop=64, window=64, n_bands=8, normalize=False)
    w = Waveform(samples=np.zeros(640), sample_rate=16000)
    normalized = normalize_features(extract_features(w, cfg))
    assert np.max(np.abs(normalized.frames)) < 1e-9


def test_normalize_idempotent():
    cfg = FeatureConfig(sample_rate=16000, hop=160, window=320, n_bands=12, normalize=False)
    feats = extract_features(_noise(8000, seed=4), cfg)
    once = normalize_features(feats)
    twice = normalize_features(once)
    assert np.max(np.abs(twice.frames - once.frames)) < 1e-6


def test_normalize_single_frame_errors():
    cfg = FeatureConfig(sample_rate=16000, hop=320, window=640, n_bands=8, normalize=False)
    feats = extract_features(_noise(640), cfg)
    with pytest.raises(FeatureError):
        normalize_features(feats)


def test_cross_speaker_normalized_agreement(language_specs, speaker_specs, feature_cfg):
    """Same content, different speakers: normalized features agree to 1e-2 RMS."""
    lang = language_specs[0]
    text = "".join(sorted(lang.grapheme_programs))
    frames = []
    for spk in speaker_specs:
        w, _, _ = synthesize_utterance(lang, spk, text)
        frames.append(extract_features(w, feature_cfg).frames)
    for other in frames[1:]:
        rms = float(np.sqrt(np.mean((other - frames[0]) ** 2)))
        assert rms < 1e-2, rms


def test_feature_dump_round_trip(tmp_path, feature_cfg):
    w = _noise(6400, seed=5)
    feats = extract_features(w, raw_config(feature_cfg))
    save_features(feats, tmp_path / "f.feat")
    back = load_features(tmp_path / "f.feat", raw_config(feature_cfg))
    assert back.frames.shape == feats.frames.shape
    assert np.allclose(back.frames, feats.frames, atol=1e-6)
