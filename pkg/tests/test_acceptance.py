"""Acceptance criteria A1-A9 on the seeded synthetic corpus.

Each test prints one PASS/FAIL line (run with `pytest tests/test_acceptance.py -v -s`
to see them live).  Tolerances are pinned here and nowhere else.
"""

from __future__ import annotations

import hashlib
import itertools
import time
from pathlib import Path

import numpy as np
import pytest
import torch

from conftest import ALL_COMMANDS, run_cli

from unit_tts import presets
from unit_tts.aligner import align, segmentation_cost
from unit_tts.checkpoints import load_checkpoint, save_checkpoint
from unit_tts.corpus import load_manifest, save_manifest, Utterance
from unit_tts.evalsuite import (
    build_speaker_probe,
    cross_lingual_report,
    duration_mae,
    permuted_agreement,
    truncated_accuracy,
    EvalContext,
)
from unit_tts.features import FeatureConfig, FeatureSequence, extract_features, frame_count
from unit_tts.text_frontend import TokenSequence, encode
from unit_tts.text_to_unit import (
    T2UConfig,
    T2UModel,
    forward_train,
    length_regulate,
    predict_units,
)
from unit_tts.units import UnitSequence, expand, run_length, train_codebook, quantize
from unit_tts.vocoder import SpeakerOneHot, synthesize
from unit_tts.aligner import DurationSequence


def report(criterion: str, passed: bool, detail: str) -> None:
    print(f"{criterion}: {'PASS' if passed else 'FAIL'} ({detail})")
    assert passed, f"{criterion} failed: {detail}"


# --- A1: structural invariants -------------------------------------------------


def test_a1_structural_invariants(tmp_path):
    start = time.monotonic()
    rng = np.random.default_rng(0)

    # length-regulator expansion law
    for _ in range(20):
        n = int(rng.integers(1, 8))
        durations = [int(d) for d in rng.integers(1, 5, n)]
        rows = torch.randn(n, 6)
        out = length_regulate(rows, durations)
        assert out.shape[0] == sum(durations)
        pos = 0
        for i, d in enumerate(durations):
            assert torch.equal(out[pos : pos + d], rows[i].expand(d, 6))
            pos += d

    # run-length round trip
    for _ in range(30):
        seq = UnitSequence(tuple(int(u) for u in rng.integers(0, 5, rng.integers(1, 50))))
        assert expand(run_length(seq)) == seq

    # k-means monotone objective
    cfg2 = FeatureConfig(sample_rate=16000, hop=64, window=64, n_bands=3, normalize=False)
    points = FeatureSequence(frames=rng.normal(size=(400, 3)), config=cfg2)
    _, history = train_codebook([points], k=7, seed=1)
    assert all(b <= a * (1 + 1e-12) + 1e-12 for a, b in zip(history, history[1:]))

    # DP aligner equals brute force for N <= 4, T <= 10
    for n in range(1, 5):
        for t in range(n, 11):
            frames = rng.normal(size=(t, 2))
            seq = FeatureSequence(frames=frames, config=cfg2)
            got = segmentation_cost(seq, align(seq, n))
            best = min(
                sum(
                    float(((frames[a:b] - frames[a:b].mean(axis=0)) ** 2).sum())
                    for a, b in zip((0,) + cuts, cuts + (t,))
                )
                for cuts in itertools.combinations(range(1, t), n - 1)
            )
            assert got == pytest.approx(best, abs=1e-9)

    # frame-count formula
    fc = FeatureConfig(sample_rate=16000, hop=320, window=640, n_bands=4)
    for _ in range(30):
        n = int(rng.integers(fc.window, 50000))
        assert frame_count(n, fc) == (n - fc.window) // fc.hop + 1

    # manifest round trip
    utts = [
        Utterance(id=f"u{i}", audio_path=f"wav/u{i}.wav", text="ab c", language="L1", speaker="s")
        for i in range(5)
    ]
    save_manifest(utts, tmp_path / "m.jsonl")
    assert load_manifest(tmp_path / "m.jsonl") == utts

    # checkpoint container round trip (bit exact)
    tensors = {"a.weight": rng.normal(size=(3, 4)).astype(np.float32), "b": np.float32(rng.normal(size=7))}
    save_checkpoint(tmp_path / "c.ckpt", {"kind": "test", "v": 1}, tensors)
    config, back = load_checkpoint(tmp_path / "c.ckpt")
    assert config == {"kind": "test", "v": 1}
    assert all(np.array_equal(back[k], tensors[k]) for k in tensors)

    elapsed = time.monotonic() - start
    report("A1", elapsed < 60.0, f"structural suite green in {elapsed:.1f}s < 60s")


# --- A2: codebook recovery ------------------------------------------------------


def test_a2_codebook_recovery(accept_corpus):
    fix = accept_corpus
    start = time.monotonic()
    codebook, _ = train_codebook(list(fix.features.values()), presets.SYNTH_K, seed=123)
    ids = [u.id for u in fix.corpus.utterances]
    rate, _ = permuted_agreement(
        [quantize(fix.features[i], codebook) for i in ids],
        [UnitSequence(tuple(fix.corpus.units[i])) for i in ids],
        presets.SYNTH_K,
    )
    elapsed = time.monotonic() - start
    report("A2", rate >= 0.95 and elapsed < 60.0,
           f"permutation-matched agreement {rate:.4f} >= 0.95 in {elapsed:.1f}s < 60s")


# --- A3: aligner recovery -------------------------------------------------------


def test_a3_aligner_recovery(accept_corpus):
    fix = accept_corpus
    start = time.monotonic()
    errors = [
        duration_mae(list(align(fix.features[u.id], len(fix.corpus.durations[u.id])).durations),
                     fix.corpus.durations[u.id])
        for u in fix.corpus.utterances
    ]
    mae = float(np.mean(errors))
    elapsed = time.monotonic() - start
    report("A3", mae <= 1.0 and elapsed < 60.0,
           f"duration MAE {mae:.4f} <= 1.0 frame in {elapsed:.1f}s < 60s")


# --- A4: text-to-unit learning ----------------------------------------------------


def test_a4_t2u_learning(accept_corpus, trained_t2u):
    fix = accept_corpus
    model, state, train_seconds = trained_t2u
    by_id = {u.id: u for u in fix.corpus.utterances}
    accs, maes = [], []
    for utt_id in fix.heldout_ids:
        utt = by_id[utt_id]
        pred_units, pred_durs = predict_units(model, encode(utt.text, utt.language, fix.vocab))
        acc, _ = truncated_accuracy(pred_units, fix.encoded_units[utt_id])
        accs.append(acc)
        maes.append(duration_mae(list(pred_durs.durations), fix.corpus.durations[utt_id]))
    acc = float(np.mean(accs))
    mae = float(np.mean(maes))
    ratio = state.loss_history[-1][0] / state.loss_history[0][0]
    ok = acc >= 0.90 and mae <= 1.5 and ratio < 0.25 and train_seconds < 300.0
    report("A4", ok,
           f"held-out unit accuracy {acc:.4f} >= 0.90, duration MAE {mae:.4f} <= 1.5, "
           f"final/epoch-1 loss {ratio:.4f} < 0.25, training {train_seconds:.0f}s < 300s")


# --- A5: vocoder learning ---------------------------------------------------------


def test_a5_vocoder_learning(accept_corpus, trained_vocoder):
    fix = accept_corpus
    model, state = trained_vocoder
    spec_first = state.loss_history[0][1]
    spec_last = state.loss_history[-1][1]
    recoveries = []
    for utt_id in fix.heldout_ids[:40]:
        utt = next(u for u in fix.corpus.utterances if u.id == utt_id)
        units = fix.encoded_units[utt_id]
        onehot = SpeakerOneHot(fix.speaker_index[utt.speaker], len(fix.speaker_index))
        audio = synthesize(model, units, onehot)
        reencoded = quantize(
            extract_features(audio, presets.default_feature_config()), fix.codebook
        )
        r, _ = truncated_accuracy(reencoded, units)
        recoveries.append(r)
    recovery = float(np.mean(recoveries))
    ok = spec_last < 0.5 * spec_first and recovery >= 0.80
    report("A5", ok,
           f"spectral loss {spec_first:.3f} -> {spec_last:.3f} "
           f"(ratio {spec_last / spec_first:.3f} < 0.5), unit recovery {recovery:.4f} >= 0.80")


# --- A6: cross-lingual transfer -----------------------------------------------------


def test_a6_cross_lingual_transfer(accept_corpus, trained_t2u, trained_vocoder):
    fix = accept_corpus
    t2u_model, _, _ = trained_t2u
    voc_model, _ = trained_vocoder
    by_id = {u.id: u for u in fix.corpus.utterances}
    native = {u.speaker: u.language for u in fix.corpus.utterances}
    # foreign pairing: L1 text with speakers native to L2/L3; never trained together
    assert not any(u.language == "L1" and u.speaker in ("s02", "s03")
                   for u in fix.corpus.utterances)
    ctx = EvalContext(
        vocab=fix.vocab, codebook=fix.codebook, t2u=t2u_model, vocoder=voc_model,
        speaker_index=fix.speaker_index,
        cfg_norm=presets.default_feature_config(),
        cfg_raw=presets.default_feature_config(normalize=False),
    )
    probe = build_speaker_probe(
        [(fix.waveforms[i], by_id[i].speaker) for i in fix.train_ids], ctx.cfg_raw
    )
    texts = []
    for utt_id in fix.heldout_ids:
        utt = by_id[utt_id]
        if utt.language == "L1" and utt.text not in texts:
            texts.append(utt.text)
        if len(texts) == 10:
            break
    result = cross_lingual_report(ctx, probe, texts, "L1", ["s02", "s03"], baseline_speaker="s01")
    probe_acc = float(np.mean([r.probe_accuracy for r in result.results]))
    recovery_gap = max(abs(r.unit_recovery - result.baseline_recovery) for r in result.results)
    ok = (result.units_identical_across_speakers
          and probe_acc >= 0.90
          and recovery_gap < 0.10)
    report("A6", ok,
           f"units byte-identical={result.units_identical_across_speakers} (exact), "
           f"probe accuracy {probe_acc:.4f} >= 0.90, "
           f"recovery gap {recovery_gap:.4f} < 0.10 vs native")


# --- A7: speaker/content disentanglement ---------------------------------------------


def test_a7_disentanglement(accept_corpus):
    fix = accept_corpus
    groups: dict[tuple[str, str], list[str]] = {}
    for utt in fix.corpus.utterances:
        groups.setdefault((utt.text, utt.language), []).append(utt.id)
    pairs = 0
    equal = 0
    for ids in groups.values():
        for a, b in itertools.combinations(ids, 2):
            pairs += 1
            equal += int(fix.encoded_units[a] == fix.encoded_units[b])
    rate = equal / pairs
    report("A7", pairs > 0 and rate >= 0.95,
           f"{equal}/{pairs} same-(text,language) speaker pairs quantize identically "
           f"({rate:.4f} >= 0.95)")


# --- A8: gradient check ----------------------------------------------------------------


def test_a8_gradient_check():
    torch.set_num_threads(1)
    cfg = T2UConfig(
        vocab_size=6, n_units=4, embed_dim=8, encoder_layers=1, decoder_layers=1,
        heads=2, dropout=0.0,
    )
    model = T2UModel(cfg, seed=5).double()
    model.eval()
    tokens = TokenSequence(ids=(2, 3, 5), language="L")
    durations = DurationSequence(durations=(2, 1, 3))
    units = UnitSequence(units=(0, 1, 3, 2, 2, 1))

    def loss_fn() -> torch.Tensor:
        total, _, _ = forward_train(model, tokens, durations, units)
        return total

    model.zero_grad()
    loss_fn().backward()
    analytic = {n: p.grad.clone() for n, p in model.named_parameters() if p.grad is not None}

    step = 1e-4
    worst = 0.0
    n_checked = 0
    with torch.no_grad():
        for name, param in model.named_parameters():
            grad = analytic.get(name)
            if grad is None:
                continue
            flat = param.view(-1)
            gflat = grad.view(-1)
            for idx in range(flat.numel()):
                original = flat[idx].item()
                flat[idx] = original + step
                up = loss_fn().item()
                flat[idx] = original - step
                down = loss_fn().item()
                flat[idx] = original
                numeric = (up - down) / (2 * step)
                a = gflat[idx].item()
                scale = max(abs(a), abs(numeric), 1e-4)
                worst = max(worst, abs(a - numeric) / scale)
                n_checked += 1
    report("A8", worst < 1e-3,
           f"max relative gradient error {worst:.2e} < 1e-3 over {n_checked} parameters")


# --- A9: bit-identical re-runs -----------------------------------------------------------


def _hash_tree(root: Path) -> dict[str, str]:
    out = {}
    for path in sorted(root.rglob("*")):
        if path.is_file():
            out[str(path.relative_to(root))] = hashlib.sha256(path.read_bytes()).hexdigest()
    return out


def test_a9_determinism(tiny_pipeline):
    config, workdir = tiny_pipeline
    cwd = config.parent
    synth_args = ["--text", "abc", "--language", "L1", "--speaker", "s02",
                  "--out", str(workdir / "a9.wav")]
    commands = [list(ALL_COMMANDS[i:i + 1]) for i in range(len(ALL_COMMANDS))]
    commands += [["synthesize"] + synth_args, ["eval"],
                 ["cross-lingual", "--text-lang", "L1", "--speaker", "s02", "--num-texts", "2"]]
    # first pass (fixture already ran the training commands; run the rest)
    for extra in commands[-3:]:
        proc = run_cli(extra + ["--config", str(config)], cwd=cwd)
        assert proc.returncode == 0, proc.stderr
    before = _hash_tree(workdir)
    for command in commands:
        proc = run_cli(command + ["--config", str(config), "--force"], cwd=cwd)
        assert proc.returncode == 0, f"{command}: {proc.stderr}"
    after = _hash_tree(workdir)
    differing = sorted(k for k in before if before[k] != after.get(k))
    report("A9", after == before,
           f"all {len(before)} artifacts bit-identical after forced re-run"
           + (f"; differing: {differing[:5]}" if differing else ""))
