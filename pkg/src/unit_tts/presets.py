"""Bundled synthetic setup: three languages, four speakers, sixteen pseudo-phones.

The acoustic design keeps the whole pipeline verifiable:

* Phone prototypes are sums of sinusoids at exact FFT-bin frequencies of the
  64-sample analysis window, so windowed frames leak no energy beyond the
  bins adjacent to each tone and every occurrence of a phone yields the same
  frame samples for a given speaker.
* Five "slot" tones (on/off per phone) carry phone identity; sixteen quiet
  "bed" tones, present in every phone with a per-phone level, keep every mel
  band active so per-utterance variance normalization stays well-conditioned
  even after 16-bit quantization.
* Speakers differ in spectral tilt and gain, which shift each band's log
  energy by a constant that normalization removes exactly; no f0 scaling in
  the default set, so quantized units are speaker-invariant by construction.
* Languages share the phone inventory but map disjoint grapheme sets onto it
  with different bijections; generated texts are shuffles of the full
  grapheme set, so every utterance has the same phone composition and
  per-utterance feature statistics are text-independent.
"""

from __future__ import annotations

from .corpus import PhonePrototype, SyntheticLanguageSpec, SyntheticSpeakerSpec
from .features import FeatureConfig

SYNTH_SAMPLE_RATE = 16000
SYNTH_HOP = 64
SYNTH_N_BANDS = 24
SYNTH_K = 16

_SLOT_BINS = (4, 8, 13, 19, 27)
_BED_BINS = tuple(
    k for k in range(1, 32) if all(abs(k - s) > 1 for s in _SLOT_BINS)
)
_MAIN_AMP = 0.16
_BED_AMP = 0.016
_BIN_HZ = SYNTH_SAMPLE_RATE / SYNTH_HOP  # 250 Hz


def _phone_patterns() -> list[tuple[int, ...]]:
    """All subsets of the 5 slots with at most 2 members: exactly 16 phones."""
    patterns: list[tuple[int, ...]] = [()]
    patterns += [(i,) for i in range(5)]
    patterns += [(i, j) for i in range(5) for j in range(i + 1, 5)]
    return patterns


def phone_duration(phone: int) -> int:
    return 2 + (phone % 3)


def default_prototypes() -> dict[int, PhonePrototype]:
    prototypes: dict[int, PhonePrototype] = {}
    for u, pattern in enumerate(_phone_patterns()):
        freqs = [float(_SLOT_BINS[s] * _BIN_HZ) for s in pattern]
        amps = [_MAIN_AMP] * len(pattern)
        bed_level = _BED_AMP * (1.0 + 0.06 * u)
        freqs += [float(k * _BIN_HZ) for k in _BED_BINS]
        amps += [bed_level] * len(_BED_BINS)
        prototypes[u] = PhonePrototype(freqs_hz=tuple(freqs), amps=tuple(amps))
    return prototypes


_GRAPHEMES = {
    "L1": "abcdefghijklmnop",
    "L2": "αβγδεζηθικλμνξοπ",
    "L3": "абвгдежзийклмноп",
}
# different grapheme -> phone bijection per language (multipliers coprime to 16)
_MAPPINGS = {"L1": (1, 0), "L2": (5, 3), "L3": (11, 7)}


def default_language_specs() -> list[SyntheticLanguageSpec]:
    prototypes = default_prototypes()
    specs = []
    for name in ("L1", "L2", "L3"):
        mult, add = _MAPPINGS[name]
        programs = {}
        for i, grapheme in enumerate(_GRAPHEMES[name]):
            phone = (mult * i + add) % 16
            programs[grapheme] = ((phone, phone_duration(phone)),)
        specs.append(
            SyntheticLanguageSpec(name=name, grapheme_programs=programs, prototypes=prototypes)
        )
    return specs


def default_speaker_specs() -> list[SyntheticSpeakerSpec]:
    return [
        SyntheticSpeakerSpec(name="s01", f0_scale=1.0, spectral_tilt=-0.5, gain=1.0),
        SyntheticSpeakerSpec(name="s02", f0_scale=1.0, spectral_tilt=0.5, gain=0.72),
        SyntheticSpeakerSpec(name="s03", f0_scale=1.0, spectral_tilt=-0.2, gain=0.52),
        SyntheticSpeakerSpec(name="s04", f0_scale=1.0, spectral_tilt=0.2, gain=0.37),
    ]


def default_feature_config(normalize: bool = True) -> FeatureConfig:
    """Synthetic-corpus analysis: window == hop so frames match generator frames."""
    return FeatureConfig(
        sample_rate=SYNTH_SAMPLE_RATE,
        hop=SYNTH_HOP,
        window=SYNTH_HOP,
        n_bands=SYNTH_N_BANDS,
        normalize=normalize,
    )
