"""Multilingual multi-speaker TTS over discrete sound units.

Pipeline: text -> token ids -> (trained text-to-unit model) -> unit sequence
-> (trained unit vocoder + speaker one-hot) -> waveform.  Unit sequences come
from k-means quantization of normalized log-spectral features, so speaker
identity enters only at the vocoder stage.
"""

__version__ = "0.1.0"
