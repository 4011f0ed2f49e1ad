"""Dataset manifests, audio I/O, speaker registry, and the synthetic corpus.

The synthetic generator builds waveforms frame by frame: every acoustic frame
belongs to one pseudo-phone, and the frame's samples are a fixed sum of
sinusoids (the phone's prototype) shaped by the speaker's tilt/gain/f0.  The
generator therefore knows the exact unit id of every frame and the exact
duration of every text token, which is what the rest of the pipeline is
verified against.
"""

from __future__ import annotations

import json
import wave
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import AudioIOError, ManifestError, SpecError

MANIFEST_FIELDS = ("id", "audio", "text", "language", "speaker")


@dataclass(frozen=True)
class Utterance:
    id: str
    audio_path: str
    text: str
    language: str
    speaker: str


@dataclass
class Waveform:
    samples: np.ndarray  # float64 in [-1, 1]
    sample_rate: int

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class SpeakerTable:
    """Ordered speaker ids; list position is the one-hot index."""

    speakers: tuple[str, ...]

    def index(self, speaker: str) -> int:
        try:
            return self.speakers.index(speaker)
        except ValueError:
            raise ManifestError(f"unknown speaker {speaker!r}") from None

    def __len__(self) -> int:
        return len(self.speakers)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps({"speakers": list(self.speakers)}, indent=2) + "\n",
            encoding="utf-8",
        )

    @classmethod
    def load(cls, path: str | Path) -> "SpeakerTable":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(speakers=tuple(data["speakers"]))


def load_manifest(path: str | Path) -> list[Utterance]:
    """Read a one-record-per-line UTF-8 manifest.

    Raises ManifestError naming the offending line on missing fields,
    duplicate ids, or unparseable records.
    """
    path = Path(path)
    if not path.exists():
        raise ManifestError(f"manifest not found: {path}")
    utterances: list[Utterance] = []
    seen: set[str] = set()
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"{path}: line {lineno}: invalid record: {exc}") from None
            missing = [k for k in MANIFEST_FIELDS if k not in record]
            if missing:
                raise ManifestError(
                    f"{path}: line {lineno}: missing field(s) {', '.join(missing)}"
                )
            for key in ("id", "language", "speaker", "text"):
                if not str(record[key]):
                    raise ManifestError(f"{path}: line {lineno}: empty {key!r}")
            if record["id"] in seen:
                raise ManifestError(f"{path}: line {lineno}: duplicate id {record['id']!r}")
            seen.add(record["id"])
            utterances.append(
                Utterance(
                    id=str(record["id"]),
                    audio_path=str(record["audio"]),
                    text=str(record["text"]),
                    language=str(record["language"]),
                    speaker=str(record["speaker"]),
                )
            )
    return utterances


def save_manifest(utterances: list[Utterance], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for utt in utterances:
            record = {
                "id": utt.id,
                "audio": utt.audio_path,
                "text": utt.text,
                "language": utt.language,
                "speaker": utt.speaker,
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def build_speaker_table(utterances: list[Utterance]) -> SpeakerTable:
    """Distinct speakers, sorted lexicographically for stable one-hot indices."""
    if not utterances:
        raise ManifestError("cannot build a speaker table from an empty utterance list")
    return SpeakerTable(speakers=tuple(sorted({u.speaker for u in utterances})))


# --- WAV I/O (RIFF PCM16 mono) -------------------------------------------

PCM16_SCALE = 32767.0


def write_wav(waveform: Waveform, path: str | Path) -> None:
    samples = np.asarray(waveform.samples, dtype=np.float64)
    if samples.ndim != 1:
        raise AudioIOError("write_wav expects a mono sample vector")
    if not np.all(np.isfinite(samples)):
        raise AudioIOError("write_wav: non-finite samples")
    if samples.size and (samples.min() < -1.0 or samples.max() > 1.0):
        raise AudioIOError(
            f"write_wav: samples outside [-1, 1] (min {samples.min():.4f}, max {samples.max():.4f})"
        )
    pcm = np.round(samples * PCM16_SCALE).astype("<i2")
    with wave.open(str(path), "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(waveform.sample_rate)
        wav.writeframes(pcm.tobytes())


def read_wav(path: str | Path) -> Waveform:
    try:
        with wave.open(str(path), "rb") as wav:
            if wav.getnchannels() != 1:
                raise AudioIOError(f"{path}: expected mono, got {wav.getnchannels()} channels")
            if wav.getsampwidth() != 2:
                raise AudioIOError(f"{path}: expected 16-bit PCM, got {8 * wav.getsampwidth()}-bit")
            if wav.getcomptype() != "NONE":
                raise AudioIOError(f"{path}: compressed WAV not supported")
            rate = wav.getframerate()
            raw = wav.readframes(wav.getnframes())
    except wave.Error as exc:
        raise AudioIOError(f"{path}: {exc}") from None
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / PCM16_SCALE
    return Waveform(samples=samples, sample_rate=rate)


# --- synthetic corpus ------------------------------------------------------


@dataclass(frozen=True)
class PhonePrototype:
    """Sinusoid recipe for one pseudo-phone: parallel frequency/amplitude lists."""

    freqs_hz: tuple[float, ...]
    amps: tuple[float, ...]


@dataclass(frozen=True)
class SyntheticLanguageSpec:
    name: str
    # grapheme -> ordered (phone id, frame count) program
    grapheme_programs: dict[str, tuple[tuple[int, int], ...]]
    prototypes: dict[int, PhonePrototype]

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "grapheme_programs": {
                g: [[u, d] for u, d in prog] for g, prog in self.grapheme_programs.items()
            },
            "prototypes": {
                str(u): {"freqs_hz": list(p.freqs_hz), "amps": list(p.amps)}
                for u, p in self.prototypes.items()
            },
        }

    @classmethod
    def from_json(cls, data: dict) -> "SyntheticLanguageSpec":
        return cls(
            name=data["name"],
            grapheme_programs={
                g: tuple((int(u), int(d)) for u, d in prog)
                for g, prog in data["grapheme_programs"].items()
            },
            prototypes={
                int(u): PhonePrototype(
                    freqs_hz=tuple(float(f) for f in p["freqs_hz"]),
                    amps=tuple(float(a) for a in p["amps"]),
                )
                for u, p in data["prototypes"].items()
            },
        )


@dataclass(frozen=True)
class SyntheticSpeakerSpec:
    name: str
    f0_scale: float = 1.0
    spectral_tilt: float = 0.0  # dB/octave around 1 kHz
    gain: float = 1.0

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "f0_scale": self.f0_scale,
            "spectral_tilt": self.spectral_tilt,
            "gain": self.gain,
        }

    @classmethod
    def from_json(cls, data: dict) -> "SyntheticSpeakerSpec":
        return cls(
            name=data["name"],
            f0_scale=float(data["f0_scale"]),
            spectral_tilt=float(data["spectral_tilt"]),
            gain=float(data["gain"]),
        )


def load_language_specs(path: str | Path) -> list[SyntheticLanguageSpec]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return [SyntheticLanguageSpec.from_json(entry) for entry in data["languages"]]


def load_speaker_specs(path: str | Path) -> list[SyntheticSpeakerSpec]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return [SyntheticSpeakerSpec.from_json(entry) for entry in data["speakers"]]


def save_language_specs(specs: list[SyntheticLanguageSpec], path: str | Path) -> None:
    payload = {"languages": [s.to_json() for s in specs]}
    Path(path).write_text(json.dumps(payload, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")


def save_speaker_specs(specs: list[SyntheticSpeakerSpec], path: str | Path) -> None:
    payload = {"speakers": [s.to_json() for s in specs]}
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def validate_specs(
    languages: list[SyntheticLanguageSpec],
    speakers: list[SyntheticSpeakerSpec],
    sample_rate: int,
) -> None:
    """Check prototypes, programs, and Nyquist headroom before generating."""
    if not languages or not speakers:
        raise SpecError("need at least one language and one speaker")
    nyquist = sample_rate / 2.0
    merged: dict[int, PhonePrototype] = {}
    for lang in languages:
        if not lang.grapheme_programs:
            raise SpecError(f"language {lang.name!r} has no grapheme programs")
        for grapheme, program in lang.grapheme_programs.items():
            if not program:
                raise SpecError(f"language {lang.name!r}: empty program for grapheme {grapheme!r}")
            for phone, frames in program:
                if frames < 1:
                    raise SpecError(
                        f"language {lang.name!r}: grapheme {grapheme!r} has frame count {frames} < 1"
                    )
                if phone not in lang.prototypes:
                    raise SpecError(
                        f"language {lang.name!r}: grapheme {grapheme!r} uses undefined phone {phone}"
                    )
        for phone, proto in lang.prototypes.items():
            if len(proto.freqs_hz) != len(proto.amps):
                raise SpecError(f"phone {phone}: frequency/amplitude lists differ in length")
            if phone in merged and merged[phone] != proto:
                raise SpecError(
                    f"phone {phone} has conflicting prototypes across languages; "
                    "shared phone ids must share prototypes"
                )
            merged[phone] = proto
    max_scale = max(sp.f0_scale for sp in speakers)
    for sp in speakers:
        if sp.f0_scale <= 0 or sp.gain <= 0:
            raise SpecError(f"speaker {sp.name!r}: f0_scale and gain must be positive")
    for phone, proto in merged.items():
        for f in proto.freqs_hz:
            if f * max_scale >= nyquist:
                raise SpecError(
                    f"phone {phone}: frequency {f:.1f} Hz scaled by {max_scale} reaches "
                    f"Nyquist ({nyquist:.1f} Hz)"
                )


def _tilt_multiplier(freq_hz: float, tilt_db_per_octave: float) -> float:
    return 10.0 ** (tilt_db_per_octave * np.log2(freq_hz / 1000.0) / 20.0)


def phone_frame(
    prototype: PhonePrototype,
    speaker: SyntheticSpeakerSpec,
    sample_rate: int,
    hop: int,
) -> np.ndarray:
    """One hop's worth of samples for a phone as spoken by a speaker.

    All sinusoids start at phase zero, so repeating the frame is seamless
    whenever the frequencies are integer multiples of sample_rate/hop.
    """
    t = np.arange(hop)
    x = np.zeros(hop)
    for f, a in zip(prototype.freqs_hz, prototype.amps):
        f_scaled = f * speaker.f0_scale
        amp = a * _tilt_multiplier(f_scaled, speaker.spectral_tilt) * speaker.gain
        x += amp * np.sin(2.0 * np.pi * f_scaled * t / sample_rate)
    return x


def synthesize_utterance(
    language: SyntheticLanguageSpec,
    speaker: SyntheticSpeakerSpec,
    text: str,
    sample_rate: int = 16000,
    hop: int = 64,
) -> tuple[Waveform, list[int], list[int]]:
    """Render text deterministically; returns (waveform, frame units, token durations)."""
    units: list[int] = []
    durations: list[int] = []
    blocks: list[np.ndarray] = []
    cache: dict[int, np.ndarray] = {}
    for grapheme in text:
        program = language.grapheme_programs.get(grapheme)
        if program is None:
            raise SpecError(f"language {language.name!r} has no program for grapheme {grapheme!r}")
        token_frames = 0
        for phone, frames in program:
            if phone not in cache:
                cache[phone] = phone_frame(language.prototypes[phone], speaker, sample_rate, hop)
            units.extend([phone] * frames)
            blocks.extend([cache[phone]] * frames)
            token_frames += frames
        durations.append(token_frames)
    samples = np.concatenate(blocks) if blocks else np.zeros(0)
    peak = np.abs(samples).max() if samples.size else 0.0
    if peak > 1.0:
        raise SpecError(f"synthesized peak amplitude {peak:.3f} exceeds 1.0; lower amps/gains")
    return Waveform(samples=samples, sample_rate=sample_rate), units, durations


@dataclass
class SyntheticCorpus:
    utterances: list[Utterance]
    waveforms: dict[str, Waveform]
    units: dict[str, list[int]] = field(default_factory=dict)
    durations: dict[str, list[int]] = field(default_factory=dict)
    # texts per language, in generation order (index identifies the text)
    texts: dict[str, list[str]] = field(default_factory=dict)


def _language_texts(
    language: SyntheticLanguageSpec, count: int, seed: int, lang_index: int
) -> list[str]:
    """Balanced texts: each is 1-2 concatenated shuffles of the full grapheme set."""
    rng = np.random.default_rng([seed, lang_index])
    graphemes = sorted(language.grapheme_programs)
    texts = []
    for k in range(count):
        n_rounds = 1 + (k % 2)
        parts = []
        for _ in range(n_rounds):
            order = rng.permutation(len(graphemes))
            parts.extend(graphemes[i] for i in order)
        texts.append("".join(parts))
    return texts


def generate_synthetic_corpus(
    languages: list[SyntheticLanguageSpec],
    speakers: list[SyntheticSpeakerSpec],
    texts_per_pair: int,
    seed: int,
    sample_rate: int = 16000,
    hop: int = 64,
) -> SyntheticCorpus:
    """Deterministic multilingual corpus with known units and durations.

    Speaker i is native to language i % len(languages) and records every text
    of that language, so utterances sharing (text, language) exist across
    same-language speakers while no speaker ever records a foreign language.
    """
    validate_specs(languages, speakers, sample_rate)
    texts = {
        lang.name: _language_texts(lang, texts_per_pair, seed, li)
        for li, lang in enumerate(languages)
    }
    corpus = SyntheticCorpus(utterances=[], waveforms={}, texts=texts)
    for si, speaker in enumerate(speakers):
        language = languages[si % len(languages)]
        for k, text in enumerate(texts[language.name]):
            utt_id = f"{language.name}_{speaker.name}_{k:04d}"
            wave_out, units, durations = synthesize_utterance(
                language, speaker, text, sample_rate=sample_rate, hop=hop
            )
            corpus.utterances.append(
                Utterance(
                    id=utt_id,
                    audio_path=f"wav/{utt_id}.wav",
                    text=text,
                    language=language.name,
                    speaker=speaker.name,
                )
            )
            corpus.waveforms[utt_id] = wave_out
            corpus.units[utt_id] = units
            corpus.durations[utt_id] = durations
    return corpus


