"""Shared fixtures: the seeded synthetic corpus, trained models, and a tiny
CLI pipeline run.

The expensive fixtures are session-scoped; acceptance tests and unit tests
share one corpus, one codebook, one text-to-unit model, and one vocoder.
All corpus audio is round-tripped through PCM16 WAV files so tests see
exactly what the file-based pipeline sees.
"""

from __future__ import annotations

import subprocess
import sys
from dataclasses import dataclass
from pathlib import Path

import pytest

from unit_tts import corpus as corpus_mod
from unit_tts import presets
from unit_tts.aligner import DurationSequence, align
from unit_tts.corpus import SyntheticCorpus, Waveform, build_speaker_table
from unit_tts.features import FeatureSequence, extract_features, raw_config
from unit_tts.text_frontend import Vocabulary, build_vocabulary, encode
from unit_tts.text_to_unit import T2UConfig, T2UExample, T2UModel, TrainingState, train
from unit_tts.units import Codebook, UnitSequence, quantize, train_codebook
from unit_tts.vocoder import (
    SpeakerOneHot,
    VocoderConfig,
    VocoderExample,
    VocoderModel,
    VocoderTrainingState,
    train_vocoder,
)

SEED = 20240601
TEXTS_PER_PAIR = 75
TRAIN_TEXTS = 50  # text indices below this are the training split


@dataclass
class CorpusFixture:
    corpus: SyntheticCorpus
    waveforms: dict[str, Waveform]  # PCM16 round-tripped
    features: dict[str, FeatureSequence]  # normalized
    codebook: Codebook
    kmeans_history: list[float]
    encoded_units: dict[str, UnitSequence]
    aligned: dict[str, DurationSequence]
    vocab: Vocabulary
    speaker_index: dict[str, int]
    train_ids: list[str]
    heldout_ids: list[str]

    def text_index(self, utt_id: str) -> int:
        return int(utt_id.rsplit("_", 1)[1])


@pytest.fixture(scope="session")
def language_specs():
    return presets.default_language_specs()


@pytest.fixture(scope="session")
def speaker_specs():
    return presets.default_speaker_specs()


@pytest.fixture(scope="session")
def feature_cfg():
    return presets.default_feature_config()


@pytest.fixture(scope="session")
def feature_cfg_raw(feature_cfg):
    return raw_config(feature_cfg)


@pytest.fixture(scope="session")
def accept_corpus(tmp_path_factory, language_specs, speaker_specs, feature_cfg) -> CorpusFixture:
    wav_dir = tmp_path_factory.mktemp("corpus_wav")
    corpus = corpus_mod.generate_synthetic_corpus(
        language_specs, speaker_specs, texts_per_pair=TEXTS_PER_PAIR, seed=SEED
    )
    waveforms = {}
    for utt in corpus.utterances:
        path = wav_dir / f"{utt.id}.wav"
        corpus_mod.write_wav(corpus.waveforms[utt.id], path)
        waveforms[utt.id] = corpus_mod.read_wav(path)
    features = {
        utt.id: extract_features(waveforms[utt.id], feature_cfg) for utt in corpus.utterances
    }
    codebook, history = train_codebook(list(features.values()), presets.SYNTH_K, seed=SEED)
    encoded = {utt_id: quantize(f, codebook) for utt_id, f in features.items()}
    aligned = {
        utt.id: align(features[utt.id], len(corpus.durations[utt.id]))
        for utt in corpus.utterances
    }
    vocab = build_vocabulary(corpus.utterances, mode="character")
    table = build_speaker_table(corpus.utterances)
    train_ids, heldout_ids = [], []
    for utt in corpus.utterances:
        k = int(utt.id.rsplit("_", 1)[1])
        (train_ids if k < TRAIN_TEXTS else heldout_ids).append(utt.id)
    return CorpusFixture(
        corpus=corpus,
        waveforms=waveforms,
        features=features,
        codebook=codebook,
        kmeans_history=history,
        encoded_units=encoded,
        aligned=aligned,
        vocab=vocab,
        speaker_index={s: i for i, s in enumerate(table.speakers)},
        train_ids=train_ids,
        heldout_ids=heldout_ids,
    )


def t2u_examples(fix: CorpusFixture, ids: list[str]) -> list[T2UExample]:
    by_id = {u.id: u for u in fix.corpus.utterances}
    return [
        T2UExample(
            tokens=encode(by_id[i].text, by_id[i].language, fix.vocab),
            durations=fix.aligned[i],
            units=fix.encoded_units[i],
        )
        for i in ids
    ]


@pytest.fixture(scope="session")
def trained_t2u(accept_corpus) -> tuple[T2UModel, TrainingState, float]:
    import time

    cfg = T2UConfig(vocab_size=accept_corpus.vocab.size, n_units=presets.SYNTH_K)
    model = T2UModel(cfg, seed=SEED)
    examples = t2u_examples(accept_corpus, accept_corpus.train_ids)
    assert len(examples) <= 200
    start = time.monotonic()
    state = train(model, examples, epochs=50, seed=SEED)
    elapsed = time.monotonic() - start
    return model, state, elapsed


def run_cli(args: list[str], cwd: Path) -> subprocess.CompletedProcess:
    return subprocess.run(
        [sys.executable, "-m", "unit_tts.cli"] + args,
        cwd=cwd, capture_output=True, text=True,
    )


def write_tiny_setup(root: Path, seed: int = 77) -> Path:
    """A small but complete pipeline config under `root`; returns the config path."""
    from unit_tts.config import PipelineConfig, TrainParams

    corpus_mod.save_language_specs(presets.default_language_specs(), root / "languages.json")
    corpus_mod.save_speaker_specs(presets.default_speaker_specs(), root / "speakers.json")
    cfg = PipelineConfig(
        seed=seed,
        workdir=str(root / "work"),
        language_specs=str(root / "languages.json"),
        speaker_specs=str(root / "speakers.json"),
        texts_per_pair=8,
        heldout_fraction=0.25,
        t2u_train=TrainParams(epochs=4, batch_size=8, lr=1e-3),
        voc_train=TrainParams(epochs=2, batch_size=8, lr=2e-4),
        voc_base_channels=32,
    )
    path = root / "config.json"
    cfg.save(path)
    return path


ALL_COMMANDS = (
    "gen-corpus", "build-vocab", "train-codebook", "encode-units",
    "align", "train-t2u", "train-vocoder",
)


@pytest.fixture(scope="session")
def tiny_pipeline(tmp_path_factory) -> tuple[Path, Path]:
    """(config path, workdir) for a fully-run small pipeline."""
    root = tmp_path_factory.mktemp("tiny")
    config = write_tiny_setup(root)
    for command in ALL_COMMANDS:
        proc = run_cli([command, "--config", str(config)], cwd=root)
        assert proc.returncode == 0, f"{command} failed:\n{proc.stdout}\n{proc.stderr}"
    return config, root / "work"


@pytest.fixture(scope="session")
def trained_vocoder(accept_corpus) -> tuple[VocoderModel, VocoderTrainingState]:
    fix = accept_corpus
    examples = [
        VocoderExample(
            units=fix.encoded_units[utt.id],
            speaker=SpeakerOneHot(fix.speaker_index[utt.speaker], len(fix.speaker_index)),
            waveform=fix.waveforms[utt.id],
        )
        for utt in fix.corpus.utterances
    ]
    cfg = VocoderConfig(n_units=presets.SYNTH_K, n_speakers=len(fix.speaker_index))
    model = VocoderModel(cfg, seed=SEED)
    state = train_vocoder(model, examples, epochs=30, seed=SEED)
    return model, state
