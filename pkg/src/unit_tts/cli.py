"""Command-line pipeline: gen-corpus -> build-vocab -> train-codebook ->
encode-units -> align -> train-t2u -> train-vocoder -> synthesize / eval /
cross-lingual.

The vocoder always trains on unit sequences quantized from real audio, while
synthesis always feeds it text-encoder output; that wiring is fixed here and
not configurable.

Exit codes: 0 success, 2 usage error, 3 precondition/artifact error,
4 numerical failure.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import aligner as aligner_mod
from . import corpus as corpus_mod
from . import evalsuite, report
from . import text_to_unit as t2u_mod
from . import vocoder as voc_mod
from .aligner import load_duration_dump, save_duration_dump
from .artifacts import CommandMeta, require_artifact, sha256_file, up_to_date, write_meta
from .config import PipelineConfig
from .errors import ArtifactError, NumericalError, PipelineError
from .features import extract_features, raw_config
from .text_frontend import PhonemeLexicon, Vocabulary, build_vocabulary, encode
from .units import (
    UnitSequence,
    load_codebook,
    load_unit_dump,
    quantize,
    save_codebook,
    save_unit_dump,
    train_codebook,
)

# transitive predecessors, in pipeline order; ordering errors name the
# earliest stage that has not run yet
PIPELINE_DEPS: dict[str, tuple[str, ...]] = {
    "gen-corpus": (),
    "build-vocab": ("gen-corpus",),
    "train-codebook": ("gen-corpus",),
    "encode-units": ("gen-corpus", "train-codebook"),
    "align": ("gen-corpus", "build-vocab"),
    "train-t2u": ("gen-corpus", "build-vocab", "train-codebook", "encode-units", "align"),
    "train-vocoder": ("gen-corpus", "train-codebook", "encode-units"),
    "synthesize": ("gen-corpus", "build-vocab", "train-codebook", "encode-units", "align",
                   "train-t2u", "train-vocoder"),
    "eval": ("gen-corpus", "build-vocab", "train-codebook", "encode-units", "align",
             "train-t2u", "train-vocoder"),
    "cross-lingual": ("gen-corpus", "build-vocab", "train-codebook", "encode-units", "align",
                      "train-t2u", "train-vocoder"),
}


def _check_deps(workdir: Path, command: str, cfg_hash: str) -> None:
    for dep in PIPELINE_DEPS[command]:
        require_artifact(workdir, dep, cfg_hash)


def _load_config(path: str) -> tuple[PipelineConfig, Path, str]:
    cfg = PipelineConfig.load(path)
    workdir = Path(cfg.workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    return cfg, workdir, cfg.config_hash()


def _load_lexicon(cfg: PipelineConfig) -> PhonemeLexicon | None:
    if cfg.text_mode != "phoneme":
        return None
    if not cfg.lexicon_path:
        raise ArtifactError("phoneme text mode requires lexicon_path in the config")
    if not Path(cfg.lexicon_path).exists():
        raise ArtifactError(f"lexicon file not found: {cfg.lexicon_path}")
    return PhonemeLexicon.load(cfg.lexicon_path)


def _corpus_paths(workdir: Path) -> dict[str, Path]:
    c = workdir / "corpus"
    return {
        "manifest": c / "manifest.jsonl",
        "wav_dir": c / "wav",
        "gt_units": c / "gt_units.jsonl",
        "gt_durations": c / "gt_durations.jsonl",
        "speakers": c / "speakers.json",
        "split": c / "split.json",
    }


def _read_corpus(workdir: Path):
    paths = _corpus_paths(workdir)
    utterances = corpus_mod.load_manifest(paths["manifest"])
    waveforms = {
        u.id: corpus_mod.read_wav(workdir / "corpus" / u.audio_path) for u in utterances
    }
    return utterances, waveforms, paths


def _read_split(workdir: Path) -> tuple[list[str], list[str]]:
    data = json.loads((_corpus_paths(workdir)["split"]).read_text(encoding="utf-8"))
    return data["train"], data["heldout"]


def _token_counts(utterances, vocab, lexicon):
    return {
        u.id: len(encode(u.text, u.language, vocab, lexicon)) for u in utterances
    }


@click.group()
def cli() -> None:
    """Discrete-unit multilingual TTS pipeline."""


def _config_option(fn):
    fn = click.option("--config", "config_path", default="config.json",
                      show_default=True, help="pipeline config JSON")(fn)
    return click.option("--force", is_flag=True, help="re-run even if up to date")(fn)


@cli.command("gen-corpus")
@_config_option
def gen_corpus_cmd(config_path: str, force: bool) -> None:
    """Generate the deterministic synthetic corpus with ground truth."""
    cfg, workdir, cfg_hash = _load_config(config_path)
    inputs = {
        "language_specs": sha256_file(cfg.language_specs),
        "speaker_specs": sha256_file(cfg.speaker_specs),
    }
    if not force and up_to_date(workdir, "gen-corpus", cfg_hash, inputs):
        click.echo("gen-corpus: up to date")
        return
    languages = corpus_mod.load_language_specs(cfg.language_specs)
    speakers = corpus_mod.load_speaker_specs(cfg.speaker_specs)
    corpus = corpus_mod.generate_synthetic_corpus(
        languages, speakers, cfg.texts_per_pair, cfg.seed,
        sample_rate=cfg.sample_rate, hop=cfg.hop,
    )
    paths = _corpus_paths(workdir)
    paths["wav_dir"].mkdir(parents=True, exist_ok=True)
    for utt in corpus.utterances:
        corpus_mod.write_wav(corpus.waveforms[utt.id], workdir / "corpus" / utt.audio_path)
    corpus_mod.save_manifest(corpus.utterances, paths["manifest"])
    save_unit_dump(corpus.units, paths["gt_units"])
    save_duration_dump(corpus.durations, paths["gt_durations"])
    corpus_mod.build_speaker_table(corpus.utterances).save(paths["speakers"])
    n_heldout = {
        lang: max(1, round(cfg.texts_per_pair * cfg.heldout_fraction))
        for lang in corpus.texts
    }
    train_ids, heldout_ids = [], []
    for utt in corpus.utterances:
        text_index = int(utt.id.rsplit("_", 1)[1])
        if text_index >= cfg.texts_per_pair - n_heldout[utt.language]:
            heldout_ids.append(utt.id)
        else:
            train_ids.append(utt.id)
    paths["split"].write_text(
        json.dumps({"train": train_ids, "heldout": heldout_ids}, indent=2) + "\n",
        encoding="utf-8",
    )
    outputs = [str(p.relative_to(workdir)) for p in paths.values() if p.suffix]
    write_meta(workdir, CommandMeta("gen-corpus", cfg_hash, cfg.seed, inputs, outputs))
    click.echo(
        f"gen-corpus: {len(corpus.utterances)} utterances "
        f"({len(train_ids)} train / {len(heldout_ids)} held out)"
    )


@cli.command("build-vocab")
@_config_option
def build_vocab_cmd(config_path: str, force: bool) -> None:
    """Build the shared text vocabulary from the corpus manifest."""
    cfg, workdir, cfg_hash = _load_config(config_path)
    _check_deps(workdir, "build-vocab", cfg_hash)
    paths = _corpus_paths(workdir)
    inputs = {"manifest": sha256_file(paths["manifest"])}
    if not force and up_to_date(workdir, "build-vocab", cfg_hash, inputs):
        click.echo("build-vocab: up to date")
        return
    utterances = corpus_mod.load_manifest(paths["manifest"])
    vocab = build_vocabulary(utterances, mode=cfg.text_mode, lexicon=_load_lexicon(cfg))
    vocab.save(workdir / "vocab.json")
    write_meta(workdir, CommandMeta("build-vocab", cfg_hash, cfg.seed, inputs, ["vocab.json"]))
    click.echo(f"build-vocab: {vocab.size} ids ({cfg.text_mode} mode)")


@cli.command("train-codebook")
@_config_option
def train_codebook_cmd(config_path: str, force: bool) -> None:
    """k-means codebook on normalized features of all corpus audio."""
    cfg, workdir, cfg_hash = _load_config(config_path)
    _check_deps(workdir, "train-codebook", cfg_hash)
    paths = _corpus_paths(workdir)
    inputs = {"manifest": sha256_file(paths["manifest"])}
    if not force and up_to_date(workdir, "train-codebook", cfg_hash, inputs):
        click.echo("train-codebook: up to date")
        return
    utterances, waveforms, _ = _read_corpus(workdir)
    feature_cfg = cfg.feature_config()
    feats = [extract_features(waveforms[u.id], feature_cfg) for u in utterances]
    codebook, history = train_codebook(
        feats, cfg.k_units, cfg.seed, max_iters=cfg.kmeans_max_iters, tol=cfg.kmeans_tol
    )
    save_codebook(codebook, workdir / "codebook.bin")
    (workdir / "codebook_history.json").write_text(json.dumps(history) + "\n", encoding="utf-8")
    write_meta(workdir, CommandMeta(
        "train-codebook", cfg_hash, cfg.seed, inputs, ["codebook.bin", "codebook_history.json"]
    ))
    click.echo(
        f"train-codebook: K={cfg.k_units}, {len(history)} iterations, "
        f"objective {history[-1]:.4f}"
    )


@cli.command("encode-units")
@_config_option
def encode_units_cmd(config_path: str, force: bool) -> None:
    """Quantize every corpus waveform to unit ids with the trained codebook."""
    cfg, workdir, cfg_hash = _load_config(config_path)
    _check_deps(workdir, "encode-units", cfg_hash)
    inputs = {"codebook": sha256_file(workdir / "codebook.bin")}
    if not force and up_to_date(workdir, "encode-units", cfg_hash, inputs):
        click.echo("encode-units: up to date")
        return
    utterances, waveforms, _ = _read_corpus(workdir)
    codebook = load_codebook(workdir / "codebook.bin")
    feature_cfg = cfg.feature_config()
    units = {
        u.id: list(quantize(extract_features(waveforms[u.id], feature_cfg), codebook).units)
        for u in utterances
    }
    save_unit_dump(units, workdir / "units.jsonl")
    write_meta(workdir, CommandMeta("encode-units", cfg_hash, cfg.seed, inputs, ["units.jsonl"]))
    click.echo(f"encode-units: {len(units)} utterances quantized")


@cli.command("align")
@_config_option
def align_cmd(config_path: str, force: bool) -> None:
    """Per-token duration targets by monotonic DP segmentation."""
    cfg, workdir, cfg_hash = _load_config(config_path)
    _check_deps(workdir, "align", cfg_hash)
    inputs = {"vocab": sha256_file(workdir / "vocab.json")}
    if not force and up_to_date(workdir, "align", cfg_hash, inputs):
        click.echo("align: up to date")
        return
    utterances, waveforms, _ = _read_corpus(workdir)
    vocab = Vocabulary.load(workdir / "vocab.json")
    lexicon = _load_lexicon(cfg)
    feature_cfg = cfg.feature_config()
    feats = {u.id: extract_features(waveforms[u.id], feature_cfg) for u in utterances}
    counts = _token_counts(utterances, vocab, lexicon)
    durations, skipped = aligner_mod.align_corpus(feats, counts)
    save_duration_dump(
        {i: list(d.durations) for i, d in durations.items()}, workdir / "durations.jsonl"
    )
    write_meta(workdir, CommandMeta("align", cfg_hash, cfg.seed, inputs, ["durations.jsonl"]))
    msg = f"align: {len(durations)} utterances"
    if skipped:
        msg += f", {len(skipped)} skipped: " + "; ".join(f"{i} ({why})" for i, why in skipped)
    click.echo(msg)


@cli.command("train-t2u")
@_config_option
@click.option("--max-paired-per-language", type=int, default=None,
              help="cap paired training data per language, in frames (low-resource mode)")
def train_t2u_cmd(config_path: str, force: bool, max_paired_per_language: int | None) -> None:
    """Train the text-to-unit model on the paired training split."""
    cfg, workdir, cfg_hash = _load_config(config_path)
    _check_deps(workdir, "train-t2u", cfg_hash)
    cap = max_paired_per_language or cfg.max_paired_per_language
    inputs = {
        "vocab": sha256_file(workdir / "vocab.json"),
        "units": sha256_file(workdir / "units.jsonl"),
        "durations": sha256_file(workdir / "durations.jsonl"),
        "max_paired_per_language": str(cap),
    }
    if not force and up_to_date(workdir, "train-t2u", cfg_hash, inputs):
        click.echo("train-t2u: up to date")
        return
    utterances = corpus_mod.load_manifest(_corpus_paths(workdir)["manifest"])
    by_id = {u.id: u for u in utterances}
    train_ids, _ = _read_split(workdir)
    vocab = Vocabulary.load(workdir / "vocab.json")
    lexicon = _load_lexicon(cfg)
    units = load_unit_dump(workdir / "units.jsonl")
    durations = load_duration_dump(workdir / "durations.jsonl")

    examples = []
    frames_used: dict[str, int] = {}
    for utt_id in train_ids:
        utt = by_id[utt_id]
        if utt_id not in durations:
            continue  # skipped by the aligner
        n_frames = len(units[utt_id])
        if cap is not None and frames_used.get(utt.language, 0) + n_frames > cap:
            continue
        frames_used[utt.language] = frames_used.get(utt.language, 0) + n_frames
        examples.append(t2u_mod.T2UExample(
            tokens=encode(utt.text, utt.language, vocab, lexicon),
            durations=aligner_mod.DurationSequence(tuple(durations[utt_id])),
            units=UnitSequence(tuple(units[utt_id])),
        ))
    model_cfg = t2u_mod.T2UConfig(
        vocab_size=vocab.size, n_units=cfg.k_units,
        embed_dim=cfg.t2u_embed_dim, encoder_layers=cfg.t2u_encoder_layers,
        decoder_layers=cfg.t2u_decoder_layers, heads=cfg.t2u_heads,
        dropout=cfg.t2u_dropout,
    )
    model = t2u_mod.T2UModel(model_cfg, seed=cfg.seed)
    state = t2u_mod.train(
        model, examples, epochs=cfg.t2u_train.epochs, batch_size=cfg.t2u_train.batch_size,
        lr=cfg.t2u_train.lr, seed=cfg.seed, lambda_dur=cfg.t2u_lambda_dur,
    )
    t2u_mod.save_t2u(model, workdir / "t2u.ckpt")
    (workdir / "t2u_history.json").write_text(
        json.dumps({"loss": state.loss_history, "steps": state.steps}) + "\n", encoding="utf-8"
    )
    report.write_training_curves(
        {"total": [h[0] for h in state.loss_history],
         "cross-entropy": [h[1] for h in state.loss_history],
         "duration": [h[2] for h in state.loss_history]},
        workdir / "fig_t2u_loss.png", "text-to-unit training loss",
    )
    write_meta(workdir, CommandMeta(
        "train-t2u", cfg_hash, cfg.seed, inputs,
        ["t2u.ckpt", "t2u_history.json", "fig_t2u_loss.png"],
    ))
    final = state.loss_history[-1][0] if state.loss_history else float("nan")
    click.echo(f"train-t2u: {len(examples)} examples, {state.steps} steps, final loss {final:.4f}")


@cli.command("train-vocoder")
@_config_option
def train_vocoder_cmd(config_path: str, force: bool) -> None:
    """Train the unit vocoder on speech-only data (audio units + speaker ids)."""
    cfg, workdir, cfg_hash = _load_config(config_path)
    _check_deps(workdir, "train-vocoder", cfg_hash)
    inputs = {"units": sha256_file(workdir / "units.jsonl")}
    if not force and up_to_date(workdir, "train-vocoder", cfg_hash, inputs):
        click.echo("train-vocoder: up to date")
        return
    utterances, waveforms, paths = _read_corpus(workdir)
    table = corpus_mod.SpeakerTable.load(paths["speakers"])
    units = load_unit_dump(workdir / "units.jsonl")
    examples = [
        voc_mod.VocoderExample(
            units=UnitSequence(tuple(units[u.id])),
            speaker=voc_mod.SpeakerOneHot(table.index(u.speaker), len(table)),
            waveform=waveforms[u.id],
        )
        for u in utterances
    ]
    model_cfg = voc_mod.VocoderConfig(
        n_units=cfg.k_units, n_speakers=len(table), sample_rate=cfg.sample_rate,
        unit_embed_dim=cfg.voc_unit_embed_dim, base_channels=cfg.voc_base_channels,
        upsample_factors=cfg.voc_upsample_factors,
    )
    model = voc_mod.VocoderModel(model_cfg, seed=cfg.seed)
    state = voc_mod.train_vocoder(
        model, examples, epochs=cfg.voc_train.epochs,
        batch_size=cfg.voc_train.batch_size, lr=cfg.voc_train.lr, seed=cfg.seed,
    )
    voc_mod.save_vocoder(model, workdir / "vocoder.ckpt")
    (workdir / "vocoder_history.json").write_text(
        json.dumps({"loss": state.loss_history, "steps": state.steps}) + "\n", encoding="utf-8"
    )
    report.write_training_curves(
        {"total": [h[0] for h in state.loss_history],
         "spectral": [h[1] for h in state.loss_history],
         "waveform L1": [h[2] for h in state.loss_history]},
        workdir / "fig_vocoder_loss.png", "vocoder training loss",
    )
    write_meta(workdir, CommandMeta(
        "train-vocoder", cfg_hash, cfg.seed, inputs,
        ["vocoder.ckpt", "vocoder_history.json", "fig_vocoder_loss.png"],
    ))
    final = state.loss_history[-1][1] if state.loss_history else float("nan")
    click.echo(f"train-vocoder: {state.steps} steps, final spectral loss {final:.4f}")


@cli.command("synthesize")
@_config_option
@click.option("--text", required=True)
@click.option("--language", required=True)
@click.option("--speaker", required=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def synthesize_cmd(config_path: str, force: bool, text: str, language: str,
                   speaker: str, out_path: str) -> None:
    """Text + target speaker -> WAV via units."""
    cfg, workdir, cfg_hash = _load_config(config_path)
    _check_deps(workdir, "synthesize", cfg_hash)
    out = Path(out_path)
    sidecar = out.with_name(out.name + ".meta.json")
    inputs = {
        "text": text, "language": language, "speaker": speaker,
        "config_hash": cfg_hash,
        "t2u": sha256_file(workdir / "t2u.ckpt"),
        "vocoder": sha256_file(workdir / "vocoder.ckpt"),
    }
    if not force and out.exists() and sidecar.exists():
        if json.loads(sidecar.read_text(encoding="utf-8")) == inputs:
            click.echo(f"synthesize: {out} up to date")
            return
    vocab = Vocabulary.load(workdir / "vocab.json")
    table = corpus_mod.SpeakerTable.load(_corpus_paths(workdir)["speakers"])
    t2u = t2u_mod.load_t2u(workdir / "t2u.ckpt")
    voc = voc_mod.load_vocoder(workdir / "vocoder.ckpt")
    tokens = encode(text, language, vocab, _load_lexicon(cfg))
    units, durations = t2u_mod.predict_units(t2u, tokens)
    onehot = voc_mod.SpeakerOneHot(table.index(speaker), len(table))
    audio = voc_mod.synthesize(voc, units, onehot)
    out.parent.mkdir(parents=True, exist_ok=True)
    corpus_mod.write_wav(audio, out)
    sidecar.write_text(json.dumps(inputs, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    click.echo(
        f"synthesize: {len(tokens)} tokens -> {len(units)} frames "
        f"(sum of durations {durations.total_frames}) -> {len(audio.samples)} samples ({out})"
    )


def _build_eval_context(cfg: PipelineConfig, workdir: Path) -> evalsuite.EvalContext:
    vocab = Vocabulary.load(workdir / "vocab.json")
    table = corpus_mod.SpeakerTable.load(_corpus_paths(workdir)["speakers"])
    return evalsuite.EvalContext(
        vocab=vocab,
        codebook=load_codebook(workdir / "codebook.bin"),
        t2u=t2u_mod.load_t2u(workdir / "t2u.ckpt"),
        vocoder=voc_mod.load_vocoder(workdir / "vocoder.ckpt"),
        speaker_index={s: i for i, s in enumerate(table.speakers)},
        cfg_norm=cfg.feature_config(),
        cfg_raw=raw_config(cfg.feature_config()),
        lexicon=_load_lexicon(cfg),
    )


@cli.command("eval")
@_config_option
def eval_cmd(config_path: str, force: bool) -> None:
    """Objective evaluation on the held-out split; writes report + figures."""
    cfg, workdir, cfg_hash = _load_config(config_path)
    _check_deps(workdir, "eval", cfg_hash)
    inputs = {
        name: sha256_file(workdir / name)
        for name in ("t2u.ckpt", "vocoder.ckpt", "codebook.bin", "units.jsonl", "durations.jsonl")
    }
    if not force and up_to_date(workdir, "eval", cfg_hash, inputs):
        click.echo("eval: up to date")
        return
    utterances, waveforms, paths = _read_corpus(workdir)
    train_ids, heldout_ids = _read_split(workdir)
    ctx = _build_eval_context(cfg, workdir)
    data = evalsuite.CorpusData(
        utterances=utterances,
        waveforms=waveforms,
        gt_units=load_unit_dump(paths["gt_units"]),
        gt_durations=load_duration_dump(paths["gt_durations"]),
        encoded_units=load_unit_dump(workdir / "units.jsonl"),
        aligned_durations=load_duration_dump(workdir / "durations.jsonl"),
        train_ids=train_ids,
        heldout_ids=heldout_ids,
    )
    result = evalsuite.evaluate_corpus(ctx, data)
    written = report.write_eval_report(result, workdir / "eval")
    write_meta(workdir, CommandMeta(
        "eval", cfg_hash, cfg.seed, inputs,
        [str(p.relative_to(workdir)) for p in written],
    ))
    click.echo(report.render_table(result))


@cli.command("cross-lingual")
@_config_option
@click.option("--text-lang", required=True, help="language of the input text")
@click.option("--speaker", "speakers", multiple=True,
              help="target speaker(s); default: all speakers not native to --text-lang")
@click.option("--num-texts", default=10, show_default=True)
def cross_lingual_cmd(config_path: str, force: bool, text_lang: str,
                      speakers: tuple[str, ...], num_texts: int) -> None:
    """Synthesize text of one language in the voices of other languages' speakers."""
    cfg, workdir, cfg_hash = _load_config(config_path)
    _check_deps(workdir, "cross-lingual", cfg_hash)
    inputs = {
        "text_lang": text_lang,
        "speakers": ",".join(speakers),
        "num_texts": str(num_texts),
        "t2u": sha256_file(workdir / "t2u.ckpt"),
        "vocoder": sha256_file(workdir / "vocoder.ckpt"),
    }
    if not force and up_to_date(workdir, "cross-lingual", cfg_hash, inputs):
        click.echo("cross-lingual: up to date")
        return
    utterances, waveforms, _ = _read_corpus(workdir)
    train_ids, heldout_ids = _read_split(workdir)
    by_id = {u.id: u for u in utterances}
    native = {u.speaker: u.language for u in utterances}
    if text_lang not in {u.language for u in utterances}:
        raise ArtifactError(f"no corpus utterances in language {text_lang!r}")
    targets = list(speakers) or sorted(s for s, l in native.items() if l != text_lang)
    for s in targets:
        if s not in native:
            raise ArtifactError(f"unknown speaker {s!r}")
        if native[s] == text_lang:
            raise ArtifactError(f"speaker {s!r} is native to {text_lang}; pick a foreign speaker")
    baseline = sorted(s for s, l in native.items() if l == text_lang)[0]
    ctx = _build_eval_context(cfg, workdir)
    probe = evalsuite.build_speaker_probe(
        [(waveforms[i], by_id[i].speaker) for i in train_ids], ctx.cfg_raw
    )
    seen: set[str] = set()
    texts = []
    for utt_id in heldout_ids:
        utt = by_id[utt_id]
        if utt.language == text_lang and utt.text not in seen:
            seen.add(utt.text)
            texts.append(utt.text)
        if len(texts) >= num_texts:
            break
    result = evalsuite.cross_lingual_report(ctx, probe, texts, text_lang, targets, baseline)
    written = report.write_cross_lingual_report(result, workdir / "cross_lingual")
    write_meta(workdir, CommandMeta(
        "cross-lingual", cfg_hash, cfg.seed, inputs,
        [str(p.relative_to(workdir)) for p in written],
    ))
    click.echo(json.dumps(result.to_json(), indent=2))


def main() -> None:
    try:
        cli.main(standalone_mode=False)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.UsageError as exc:
        exc.show()
        sys.exit(2)
    except click.ClickException as exc:
        exc.show()
        sys.exit(exc.exit_code)
    except NumericalError as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(4)
    except PipelineError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(3)


if __name__ == "__main__":
    main()
