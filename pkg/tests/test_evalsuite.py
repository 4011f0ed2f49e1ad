import itertools

import numpy as np
import pytest

from unit_tts.corpus import (
    PhonePrototype,
    SyntheticLanguageSpec,
    SyntheticSpeakerSpec,
    synthesize_utterance,
)
from unit_tts.errors import PipelineError
from unit_tts.evalsuite import (
    duration_mae,
    permuted_agreement,
    speaker_probe,
    truncated_accuracy,
    unit_accuracy,
)
from unit_tts.features import FeatureConfig
from unit_tts.units import UnitSequence


def _u(*ids) -> UnitSequence:
    return UnitSequence(units=tuple(ids))


# --- unit accuracy -------------------------------------------------------------


def test_unit_accuracy_examples():
    assert unit_accuracy(_u(1, 2, 3), _u(1, 2, 4)) == pytest.approx(2 / 3)
    assert unit_accuracy(_u(5, 5), _u(5, 5)) == 1.0
    assert unit_accuracy(_u(1, 2), _u(3, 4)) == 0.0


def test_unit_accuracy_identity_and_symmetry():
    rng = np.random.default_rng(0)
    for _ in range(20):
        a = _u(*rng.integers(0, 5, rng.integers(1, 30)))
        b = _u(*rng.integers(0, 5, len(a)))
        assert unit_accuracy(a, a) == 1.0
        assert unit_accuracy(a, b) == unit_accuracy(b, a)


def test_unit_accuracy_empty_errors():
    with pytest.raises(PipelineError):
        unit_accuracy(_u(), _u())


def test_truncated_accuracy():
    acc, diff = truncated_accuracy(_u(1, 2, 3, 4), _u(1, 2))
    assert acc == 1.0 and diff == 2


# --- permuted agreement ---------------------------------------------------------


def _brute_force_agreement(pred, ref, k):
    total = sum(len(p) for p in pred)
    best = 0
    for perm in itertools.permutations(range(k)):
        hits = 0
        for p, r in zip(pred, ref):
            hits += sum(1 for a, b in zip(p.units, r.units) if perm[a] == b)
        best = max(best, hits)
    return best / total


def test_permuted_agreement_swap():
    pred, ref = [_u(0, 0, 1)], [_u(1, 1, 0)]
    oracle = _brute_force_agreement(pred, ref, 2)
    rate, mapping = permuted_agreement(pred, ref, 2)
    assert rate == pytest.approx(oracle) == 1.0
    assert mapping == {0: 1, 1: 0}


def test_permuted_agreement_identity():
    rate, mapping = permuted_agreement([_u(0, 1, 0)], [_u(0, 1, 0)], 2)
    assert rate == 1.0
    assert mapping == {0: 0, 1: 1}


def test_permuted_agreement_half():
    pred, ref = [_u(0, 1)], [_u(0, 0)]
    oracle = _brute_force_agreement(pred, ref, 2)
    rate, _ = permuted_agreement(pred, ref, 2)
    assert rate == pytest.approx(oracle) == 0.5


def test_permuted_agreement_matches_brute_force_random():
    rng = np.random.default_rng(1)
    for _ in range(10):
        k = 3
        pred = [_u(*rng.integers(0, k, 12))]
        ref = [_u(*rng.integers(0, k, 12))]
        rate, _ = permuted_agreement(pred, ref, k)
        assert rate == pytest.approx(_brute_force_agreement(pred, ref, k))


def test_permuted_agreement_beats_identity():
    rng = np.random.default_rng(2)
    for _ in range(10):
        pred = [_u(*rng.integers(0, 4, 20))]
        ref = [_u(*rng.integers(0, 4, 20))]
        rate, _ = permuted_agreement(pred, ref, 4)
        assert rate >= unit_accuracy(pred[0], ref[0]) - 1e-12


def test_permuted_agreement_small_k_errors():
    with pytest.raises(PipelineError):
        permuted_agreement([_u(0, 5)], [_u(0, 1)], 2)


# --- speaker probe ---------------------------------------------------------------


def _probe_setup(n_per_speaker: int = 10, seed: int = 3):
    lang = SyntheticLanguageSpec(
        name="P",
        grapheme_programs={
            "a": ((0, 3),), "b": ((1, 2),), "c": ((2, 4),), "d": ((3, 3),),
        },
        prototypes={
            0: PhonePrototype((500.0,), (0.3,)),
            1: PhonePrototype((1000.0,), (0.3,)),
            2: PhonePrototype((500.0, 1000.0), (0.3, 0.3)),
            3: PhonePrototype((1500.0,), (0.3,)),
        },
    )
    speakers = [
        SyntheticSpeakerSpec(name="low", f0_scale=1.0),
        SyntheticSpeakerSpec(name="high", f0_scale=1.5),
    ]
    cfg = FeatureConfig(sample_rate=16000, hop=64, window=64, n_bands=24, normalize=False)
    rng = np.random.default_rng(seed)
    data = []
    for spk in speakers:
        for _ in range(n_per_speaker):
            text = "".join(rng.choice(list("abcd")) for _ in range(8))
            wave, _, _ = synthesize_utterance(lang, spk, text)
            data.append((wave, spk.name))
    return data, cfg


def test_probe_separates_f0_scaled_speakers():
    data, cfg = _probe_setup()
    train, test = data[::2], data[1::2]
    assert speaker_probe(train, test, cfg) == 1.0


def test_probe_degenerate_single_utterance():
    data, cfg = _probe_setup(n_per_speaker=1)
    assert speaker_probe(data, data, cfg) == 1.0


def test_probe_shuffled_labels_near_chance():
    data, cfg = _probe_setup(n_per_speaker=20, seed=5)
    rng = np.random.default_rng(17)
    labels = [s for _, s in data]
    rng.shuffle(labels)
    shuffled = [(w, l) for (w, _), l in zip(data, labels)]
    train, test = shuffled[::2], shuffled[1::2]
    acc = speaker_probe(train, test, cfg)
    # binomial 95% bounds around chance (p=0.5, n=20): 0.5 +/- 1.96*sqrt(0.25/20)
    n = len(test)
    half_width = 1.96 * np.sqrt(0.25 / n)
    assert 0.5 - half_width <= acc <= 0.5 + half_width


def test_probe_unseen_test_speaker_errors():
    data, cfg = _probe_setup(n_per_speaker=2)
    train = [(w, s) for w, s in data if s == "low"]
    test = [(w, s) for w, s in data if s == "high"]
    with pytest.raises(PipelineError, match="high"):
        speaker_probe(train, test, cfg)


def test_probe_order_invariant():
    data, cfg = _probe_setup(n_per_speaker=6)
    train, test = data[::2], data[1::2]
    a = speaker_probe(train, test, cfg)
    b = speaker_probe(list(reversed(train)), list(reversed(test)), cfg)
    assert a == b


def test_duration_mae():
    assert duration_mae([2, 3, 4], [2, 3, 4]) == 0.0
    assert duration_mae([1, 3], [2, 3]) == 0.5
    with pytest.raises(PipelineError):
        duration_mae([1], [1, 2])
