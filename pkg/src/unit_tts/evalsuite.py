"""Objective evaluation: unit accuracy, duration error, permutation-matched
codebook agreement, a nearest-centroid speaker probe, and the cross-lingual
transfer report.

The probe deliberately uses un-normalized features (speaker cues live in gain
and tilt); the quantizer side uses normalized features.  Those are the two
halves of the content/speaker split the pipeline is built around.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .corpus import Utterance, Waveform
from .errors import PipelineError
from .features import FeatureConfig, extract_features
from .text_frontend import PhonemeLexicon, Vocabulary, encode
from .text_to_unit import T2UModel, predict_units
from .units import Codebook, UnitSequence, quantize
from .vocoder import SpeakerOneHot, VocoderModel, synthesize


def unit_accuracy(pred: UnitSequence, ref: UnitSequence) -> float:
    """Fraction of positions with equal unit ids; requires equal lengths."""
    if not len(pred) or not len(ref):
        raise PipelineError("unit_accuracy needs non-empty sequences")
    if len(pred) != len(ref):
        raise PipelineError(f"length mismatch: {len(pred)} vs {len(ref)}; truncate first")
    hits = sum(1 for a, b in zip(pred.units, ref.units) if a == b)
    return hits / len(pred)


def truncated_accuracy(pred: UnitSequence, ref: UnitSequence) -> tuple[float, int]:
    """unit_accuracy after truncating to the shorter length; also returns |len diff|."""
    n = min(len(pred), len(ref))
    diff = abs(len(pred) - len(ref))
    return (
        unit_accuracy(UnitSequence(pred.units[:n]), UnitSequence(ref.units[:n])),
        diff,
    )


def duration_mae(pred: list[int], ref: list[int]) -> float:
    if len(pred) != len(ref):
        raise PipelineError(f"duration count mismatch: {len(pred)} vs {len(ref)}")
    return float(np.mean(np.abs(np.array(pred) - np.array(ref))))


def permuted_agreement(
    pred: list[UnitSequence], ref: list[UnitSequence], k: int
) -> tuple[float, dict[int, int]]:
    """Best label permutation agreement via optimal assignment on confusion counts.

    Returns (agreement rate, mapping pred id -> ref id).
    """
    confusion = np.zeros((k, k), dtype=np.int64)
    total = 0
    for p, r in zip(pred, ref):
        if len(p) != len(r):
            raise PipelineError(f"sequence length mismatch: {len(p)} vs {len(r)}")
        for a, b in zip(p.units, r.units):
            if a >= k or b >= k:
                raise PipelineError(f"unit id {max(a, b)} >= K={k}")
            confusion[a, b] += 1
        total += len(p)
    if total == 0:
        raise PipelineError("no frames to compare")
    rows, cols = linear_sum_assignment(-confusion)
    agreement = confusion[rows, cols].sum() / total
    return float(agreement), {int(r): int(c) for r, c in zip(rows, cols)}


@dataclass
class SpeakerProbe:
    """Nearest-centroid classifier on utterance-mean un-normalized features."""

    centroids: dict[str, np.ndarray]
    feature_config: FeatureConfig

    def classify(self, waveform: Waveform) -> str:
        mean = extract_features(waveform, self.feature_config).frames.mean(axis=0)
        speakers = sorted(self.centroids)
        dists = [float(np.linalg.norm(mean - self.centroids[s])) for s in speakers]
        return speakers[int(np.argmin(dists))]


def build_speaker_probe(
    train: list[tuple[Waveform, str]], feature_config: FeatureConfig
) -> SpeakerProbe:
    if feature_config.normalize:
        raise PipelineError("the speaker probe requires un-normalized features")
    sums: dict[str, np.ndarray] = {}
    counts: dict[str, int] = {}
    for waveform, speaker in train:
        mean = extract_features(waveform, feature_config).frames.mean(axis=0)
        if speaker in sums:
            sums[speaker] += mean
            counts[speaker] += 1
        else:
            sums[speaker] = mean.copy()
            counts[speaker] = 1
    centroids = {s: sums[s] / counts[s] for s in sums}
    return SpeakerProbe(centroids=centroids, feature_config=feature_config)


def speaker_probe(
    train: list[tuple[Waveform, str]],
    test: list[tuple[Waveform, str]],
    feature_config: FeatureConfig,
) -> float:
    """Train a nearest-centroid probe and return test accuracy."""
    probe = build_speaker_probe(train, feature_config)
    unseen = {s for _, s in test} - set(probe.centroids)
    if unseen:
        raise PipelineError(f"test speakers not in training data: {sorted(unseen)}")
    hits = sum(1 for w, s in test if probe.classify(w) == s)
    return hits / len(test)


# --- corpus-level evaluation -------------------------------------------------


@dataclass
class Metrics:
    unit_accuracy: float = 0.0
    duration_mae: float = 0.0
    aligner_duration_mae: float = 0.0
    codebook_agreement: float = 0.0
    speaker_probe_accuracy: float = 0.0
    unit_recovery: float = 0.0
    utterances: int = 0

    def to_json(self) -> dict:
        return {
            "unit_accuracy": self.unit_accuracy,
            "duration_mae": self.duration_mae,
            "aligner_duration_mae": self.aligner_duration_mae,
            "codebook_agreement": self.codebook_agreement,
            "speaker_probe_accuracy": self.speaker_probe_accuracy,
            "unit_recovery": self.unit_recovery,
            "utterances": self.utterances,
        }


@dataclass
class EvalReport:
    overall: Metrics
    per_language: dict[str, Metrics] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "overall": self.overall.to_json(),
            "per_language": {lang: m.to_json() for lang, m in self.per_language.items()},
        }


@dataclass
class EvalContext:
    vocab: Vocabulary
    codebook: Codebook
    t2u: T2UModel
    vocoder: VocoderModel
    speaker_index: dict[str, int]
    cfg_norm: FeatureConfig
    cfg_raw: FeatureConfig
    lexicon: PhonemeLexicon | None = None


@dataclass
class CorpusData:
    utterances: list[Utterance]
    waveforms: dict[str, Waveform]
    gt_units: dict[str, list[int]]
    gt_durations: dict[str, list[int]]
    encoded_units: dict[str, list[int]]
    aligned_durations: dict[str, list[int]]
    train_ids: list[str]
    heldout_ids: list[str]


def _mean(values: list[float]) -> float:
    return float(np.mean(values)) if values else 0.0


def evaluate_corpus(ctx: EvalContext, data: CorpusData) -> EvalReport:
    """All objective metrics; text-to-unit metrics computed on the held-out split."""
    by_id = {u.id: u for u in data.utterances}
    languages = sorted({u.language for u in data.utterances})

    # codebook agreement (whole corpus, one shared permutation)
    ids_all = [u.id for u in data.utterances]
    agreement_overall, _ = permuted_agreement(
        [UnitSequence(tuple(data.encoded_units[i])) for i in ids_all],
        [UnitSequence(tuple(data.gt_units[i])) for i in ids_all],
        ctx.codebook.k,
    )
    agreement_lang = {}
    for lang in languages:
        ids = [u.id for u in data.utterances if u.language == lang]
        agreement_lang[lang], _ = permuted_agreement(
            [UnitSequence(tuple(data.encoded_units[i])) for i in ids],
            [UnitSequence(tuple(data.gt_units[i])) for i in ids],
            ctx.codebook.k,
        )

    # speaker probe: fit on train split, test on held-out split
    train_pairs = [(data.waveforms[i], by_id[i].speaker) for i in data.train_ids]
    probe = build_speaker_probe(train_pairs, ctx.cfg_raw)
    probe_hits: dict[str, list[float]] = {lang: [] for lang in languages}
    for utt_id in data.heldout_ids:
        utt = by_id[utt_id]
        probe_hits[utt.language].append(
            1.0 if probe.classify(data.waveforms[utt_id]) == utt.speaker else 0.0
        )

    acc: dict[str, list[float]] = {lang: [] for lang in languages}
    dmae: dict[str, list[float]] = {lang: [] for lang in languages}
    amae: dict[str, list[float]] = {lang: [] for lang in languages}
    recovery: dict[str, list[float]] = {lang: [] for lang in languages}

    for utt_id in data.heldout_ids:
        utt = by_id[utt_id]
        tokens = encode(utt.text, utt.language, ctx.vocab, ctx.lexicon)
        pred_units, pred_durs = predict_units(ctx.t2u, tokens)
        ref_units = UnitSequence(tuple(data.encoded_units[utt_id]))
        a, _ = truncated_accuracy(pred_units, ref_units)
        acc[utt.language].append(a)
        dmae[utt.language].append(
            duration_mae(list(pred_durs.durations), data.gt_durations[utt_id])
        )
        spk = SpeakerOneHot(index=ctx.speaker_index[utt.speaker], size=len(ctx.speaker_index))
        audio = synthesize(ctx.vocoder, pred_units, spk)
        reencoded = quantize(extract_features(audio, ctx.cfg_norm), ctx.codebook)
        r, _ = truncated_accuracy(reencoded, pred_units)
        recovery[utt.language].append(r)

    for utt_id, durs in data.aligned_durations.items():
        utt = by_id[utt_id]
        amae[utt.language].append(duration_mae(durs, data.gt_durations[utt_id]))

    def metrics_for(langs: list[str]) -> Metrics:
        return Metrics(
            unit_accuracy=_mean(sum((acc[l] for l in langs), [])),
            duration_mae=_mean(sum((dmae[l] for l in langs), [])),
            aligner_duration_mae=_mean(sum((amae[l] for l in langs), [])),
            codebook_agreement=(
                agreement_overall if len(langs) > 1 else agreement_lang[langs[0]]
            ),
            speaker_probe_accuracy=_mean(sum((probe_hits[l] for l in langs), [])),
            unit_recovery=_mean(sum((recovery[l] for l in langs), [])),
            utterances=sum(len(acc[l]) for l in langs),
        )

    return EvalReport(
        overall=metrics_for(languages),
        per_language={lang: metrics_for([lang]) for lang in languages},
    )


# --- cross-lingual transfer ---------------------------------------------------


@dataclass
class CrossLingualSpeakerResult:
    speaker: str
    probe_accuracy: float
    unit_recovery: float


@dataclass
class CrossLingualReport:
    text_language: str
    units_identical_across_speakers: bool
    results: list[CrossLingualSpeakerResult]
    baseline_speaker: str
    baseline_recovery: float

    def to_json(self) -> dict:
        return {
            "text_language": self.text_language,
            "units_identical_across_speakers": self.units_identical_across_speakers,
            "speakers": [
                {
                    "speaker": r.speaker,
                    "probe_accuracy": r.probe_accuracy,
                    "unit_recovery": r.unit_recovery,
                }
                for r in self.results
            ],
            "baseline_speaker": self.baseline_speaker,
            "baseline_recovery": self.baseline_recovery,
        }


def cross_lingual_report(
    ctx: EvalContext,
    probe: SpeakerProbe,
    texts: list[str],
    text_language: str,
    target_speakers: list[str],
    baseline_speaker: str,
) -> CrossLingualReport:
    """Synthesize language-A text in the voices of speakers native to other languages.

    The text-to-unit stage takes no speaker input, so its output is asserted
    byte-identical across target speakers; only the vocoder hears the one-hot.
    """
    identical = True
    per_speaker: dict[str, list[float]] = {s: [] for s in target_speakers}
    rec: dict[str, list[float]] = {s: [] for s in target_speakers}
    baseline_rec: list[float] = []
    for text in texts:
        tokens = encode(text, text_language, ctx.vocab, ctx.lexicon)
        unit_seqs = [predict_units(ctx.t2u, tokens)[0] for _ in target_speakers]
        if any(seq.units != unit_seqs[0].units for seq in unit_seqs):
            identical = False
        units = unit_seqs[0]
        for speaker in target_speakers:
            onehot = SpeakerOneHot(ctx.speaker_index[speaker], len(ctx.speaker_index))
            audio = synthesize(ctx.vocoder, units, onehot)
            per_speaker[speaker].append(1.0 if probe.classify(audio) == speaker else 0.0)
            reencoded = quantize(extract_features(audio, ctx.cfg_norm), ctx.codebook)
            r, _ = truncated_accuracy(reencoded, units)
            rec[speaker].append(r)
        base = SpeakerOneHot(ctx.speaker_index[baseline_speaker], len(ctx.speaker_index))
        base_audio = synthesize(ctx.vocoder, units, base)
        reencoded = quantize(extract_features(base_audio, ctx.cfg_norm), ctx.codebook)
        r, _ = truncated_accuracy(reencoded, units)
        baseline_rec.append(r)
    return CrossLingualReport(
        text_language=text_language,
        units_identical_across_speakers=identical,
        results=[
            CrossLingualSpeakerResult(
                speaker=s,
                probe_accuracy=_mean(per_speaker[s]),
                unit_recovery=_mean(rec[s]),
            )
            for s in target_speakers
        ],
        baseline_speaker=baseline_speaker,
        baseline_recovery=_mean(baseline_rec),
    )
