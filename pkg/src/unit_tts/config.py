"""Pipeline configuration: one JSON document governs every stage.

Every artifact records the hash of the full config that produced it; commands
refuse to mix artifacts from different configs.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .errors import ArtifactError
from .features import FeatureConfig


@dataclass(frozen=True)
class TrainParams:
    epochs: int
    batch_size: int
    lr: float


@dataclass
class PipelineConfig:
    seed: int = 20240601
    workdir: str = "work"
    language_specs: str = "configs/languages.json"
    speaker_specs: str = "configs/speakers.json"
    texts_per_pair: int = 75
    heldout_fraction: float = 1.0 / 3.0
    text_mode: str = "character"
    lexicon_path: str | None = None

    sample_rate: int = 16000
    hop: int = 64
    window: int = 64
    n_bands: int = 24
    normalize: bool = True

    k_units: int = 16
    kmeans_max_iters: int = 100
    kmeans_tol: float = 1e-6

    t2u_embed_dim: int = 64
    t2u_encoder_layers: int = 2
    t2u_decoder_layers: int = 2
    t2u_heads: int = 2
    t2u_dropout: float = 0.1
    t2u_lambda_dur: float = 0.1
    t2u_train: TrainParams = field(default_factory=lambda: TrainParams(50, 8, 1e-3))

    voc_unit_embed_dim: int = 32
    voc_base_channels: int = 128
    voc_upsample_factors: tuple[int, ...] = (4, 4, 4)
    voc_train: TrainParams = field(default_factory=lambda: TrainParams(30, 8, 2e-4))

    max_paired_per_language: int | None = None

    def __post_init__(self) -> None:
        if self.text_mode not in ("character", "phoneme"):
            raise ArtifactError(f"text_mode must be character|phoneme, got {self.text_mode!r}")
        hop_product = 1
        for f in self.voc_upsample_factors:
            hop_product *= f
        if hop_product != self.hop:
            raise ArtifactError(
                f"vocoder upsample factors {self.voc_upsample_factors} multiply to "
                f"{hop_product}, but hop is {self.hop}"
            )

    def feature_config(self) -> FeatureConfig:
        return FeatureConfig(
            sample_rate=self.sample_rate,
            hop=self.hop,
            window=self.window,
            n_bands=self.n_bands,
            normalize=self.normalize,
        )

    def to_json(self) -> dict:
        data = asdict(self)
        data["voc_upsample_factors"] = list(self.voc_upsample_factors)
        return data

    @classmethod
    def from_json(cls, data: dict) -> "PipelineConfig":
        data = dict(data)
        if "t2u_train" in data:
            data["t2u_train"] = TrainParams(**data["t2u_train"])
        if "voc_train" in data:
            data["voc_train"] = TrainParams(**data["voc_train"])
        if "voc_upsample_factors" in data:
            data["voc_upsample_factors"] = tuple(data["voc_upsample_factors"])
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path) -> "PipelineConfig":
        path = Path(path)
        if not path.exists():
            raise ArtifactError(f"config not found: {path}")
        return cls.from_json(json.loads(path.read_text(encoding="utf-8")))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

    def config_hash(self) -> str:
        payload = json.dumps(self.to_json(), sort_keys=True)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]
