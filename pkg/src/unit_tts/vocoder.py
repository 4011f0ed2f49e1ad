"""Unit-to-waveform decoder: embedding + speaker one-hot through transposed
convolutions and dilated residual blocks.

Trained on (unit sequence from real audio, speaker one-hot, waveform) triples
with a multi-resolution spectral reconstruction loss plus a small waveform L1
term.  The signature admits no text or token inputs: the decoder needs only
speech-derived data, which is what makes the pipeline modular.  Adversarial
discriminators would slot in as additional loss terms in train_vocoder; they
are deliberately absent here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from .checkpoints import load_checkpoint, save_checkpoint
from .corpus import Waveform
from .errors import NumericalError, TrainingError
from .units import UnitSequence


@dataclass(frozen=True)
class VocoderConfig:
    n_units: int
    n_speakers: int
    sample_rate: int = 16000
    unit_embed_dim: int = 32
    upsample_factors: tuple[int, ...] = (4, 4, 4)
    base_channels: int = 128
    dilations: tuple[int, ...] = (1, 3, 9)
    kernel: int = 3
    loss_windows: tuple[int, ...] = (128, 256, 512)
    wave_l1_weight: float = 0.1

    @property
    def hop(self) -> int:
        return math.prod(self.upsample_factors)

    def to_json(self) -> dict:
        return {
            "n_units": self.n_units,
            "n_speakers": self.n_speakers,
            "sample_rate": self.sample_rate,
            "unit_embed_dim": self.unit_embed_dim,
            "upsample_factors": list(self.upsample_factors),
            "base_channels": self.base_channels,
            "dilations": list(self.dilations),
            "kernel": self.kernel,
            "loss_windows": list(self.loss_windows),
            "wave_l1_weight": self.wave_l1_weight,
        }

    @classmethod
    def from_json(cls, data: dict) -> "VocoderConfig":
        data = dict(data)
        for key in ("upsample_factors", "dilations", "loss_windows"):
            data[key] = tuple(data[key])
        return cls(**data)


@dataclass(frozen=True)
class SpeakerOneHot:
    index: int
    size: int

    def __post_init__(self) -> None:
        if not (0 <= self.index < self.size):
            raise TrainingError(f"speaker index {self.index} outside [0, {self.size})")

    def vector(self) -> torch.Tensor:
        v = torch.zeros(self.size)
        v[self.index] = 1.0
        return v


class ResidualBlock(nn.Module):
    def __init__(self, channels: int, kernel: int, dilation: int):
        super().__init__()
        pad = (kernel - 1) * dilation // 2
        self.conv1 = nn.Conv1d(channels, channels, kernel, dilation=dilation, padding=pad)
        self.conv2 = nn.Conv1d(channels, channels, kernel, padding=kernel // 2)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        y = self.conv1(F.leaky_relu(x, 0.1))
        y = self.conv2(F.leaky_relu(y, 0.1))
        return x + y


class VocoderModel(nn.Module):
    def __init__(self, cfg: VocoderConfig, seed: int):
        super().__init__()
        torch.manual_seed(seed)
        self.cfg = cfg
        self.seed = seed
        self.unit_embedding = nn.Embedding(cfg.n_units, cfg.unit_embed_dim)
        self.pre = nn.Conv1d(cfg.unit_embed_dim + cfg.n_speakers, cfg.base_channels, 7, padding=3)
        ups = []
        blocks = []
        channels = cfg.base_channels
        for factor in cfg.upsample_factors:
            out_channels = max(channels // 2, 8)
            # padding/output_padding chosen so the output is exactly factor * input
            ups.append(
                nn.ConvTranspose1d(
                    channels, out_channels, 2 * factor, stride=factor,
                    padding=(factor + 1) // 2, output_padding=factor % 2,
                )
            )
            blocks.append(
                nn.ModuleList(
                    ResidualBlock(out_channels, cfg.kernel, d) for d in cfg.dilations
                )
            )
            channels = out_channels
        self.upsamplers = nn.ModuleList(ups)
        self.res_stages = nn.ModuleList(blocks)
        self.post = nn.Conv1d(channels, 1, 7, padding=3)

    def forward(self, units: torch.Tensor, speaker: torch.Tensor) -> torch.Tensor:
        """units (B, T) long, speaker (B, S) one-hot -> samples (B, T * hop)."""
        x = self.unit_embedding(units)  # (B, T, E)
        spk = speaker.unsqueeze(1).expand(-1, x.shape[1], -1)
        x = torch.cat([x, spk], dim=-1).transpose(1, 2)
        x = self.pre(x)
        for up, stage in zip(self.upsamplers, self.res_stages):
            x = up(F.leaky_relu(x, 0.1))
            for block in stage:
                x = block(x)
        return torch.tanh(self.post(F.leaky_relu(x, 0.1))).squeeze(1)


def synthesize(model: VocoderModel, units: UnitSequence, speaker: SpeakerOneHot) -> Waveform:
    """Deterministic unit+speaker -> waveform; length == len(units) * hop."""
    cfg = model.cfg
    if speaker.size != cfg.n_speakers:
        raise TrainingError(f"speaker one-hot size {speaker.size} != model speakers {cfg.n_speakers}")
    if not len(units):
        raise TrainingError("cannot synthesize an empty unit sequence")
    if max(units.units) >= cfg.n_units:
        raise TrainingError(f"unit id {max(units.units)} >= K={cfg.n_units}")
    torch.set_num_threads(1)
    model.eval()
    with torch.no_grad():
        unit_ids = torch.as_tensor(units.units, dtype=torch.long).unsqueeze(0)
        samples = model(unit_ids, speaker.vector().unsqueeze(0))[0]
    return Waveform(samples=samples.double().numpy(), sample_rate=cfg.sample_rate)


def _stft_log_power(x: torch.Tensor, win: int) -> torch.Tensor:
    window = torch.hann_window(win, dtype=x.dtype)
    spec = torch.stft(
        x, n_fft=win, hop_length=win // 4, win_length=win, window=window,
        center=True, return_complex=True,
    )
    power = spec.real**2 + spec.imag**2
    return torch.log(power + 1e-7)


def spectral_loss(pred: torch.Tensor, target: torch.Tensor, windows: tuple[int, ...]) -> torch.Tensor:
    """Mean L1 distance between log power spectra over the given resolutions."""
    losses = [F.l1_loss(_stft_log_power(pred, w), _stft_log_power(target, w)) for w in windows]
    return torch.stack(losses).mean()


@dataclass
class VocoderExample:
    units: UnitSequence
    speaker: SpeakerOneHot
    waveform: Waveform


@dataclass
class VocoderTrainingState:
    steps: int = 0
    # per-epoch means: (total, spectral term, waveform L1 term)
    loss_history: list[tuple[float, float, float]] = field(default_factory=list)


def _prepare(example: VocoderExample, hop: int) -> tuple[torch.Tensor, torch.Tensor]:
    """Truncate the waveform to T * hop samples and convert to tensors."""
    want = len(example.units) * hop
    samples = np.asarray(example.waveform.samples, dtype=np.float64)
    if len(samples) < want:
        raise TrainingError(
            f"waveform has {len(samples)} samples, need {want} for {len(example.units)} units"
        )
    units = torch.as_tensor(example.units.units, dtype=torch.long)
    target = torch.as_tensor(samples[:want], dtype=torch.get_default_dtype())
    return units, target


def train_vocoder(
    model: VocoderModel,
    examples: list[VocoderExample],
    epochs: int,
    batch_size: int = 8,
    lr: float = 2e-4,
    seed: int = 0,
) -> VocoderTrainingState:
    """Adam on spectral + L1 loss over speech-only data; deterministic given seed."""
    torch.set_num_threads(1)
    cfg = model.cfg
    state = VocoderTrainingState()
    if epochs == 0 or not examples:
        return state
    prepared = [_prepare(ex, cfg.hop) for ex in examples]
    speakers = torch.stack([ex.speaker.vector() for ex in examples])
    # batches need equal unit counts; bucket by length
    by_len: dict[int, list[int]] = {}
    for i, (units, _) in enumerate(prepared):
        by_len.setdefault(len(units), []).append(i)
    torch.manual_seed(seed)
    optimizer = torch.optim.Adam(model.parameters(), lr=lr)
    order_rng = np.random.default_rng(seed)
    model.train()
    for epoch in range(epochs):
        batches: list[list[int]] = []
        for length in sorted(by_len):
            idx = [by_len[length][j] for j in order_rng.permutation(len(by_len[length]))]
            batches.extend(idx[s : s + batch_size] for s in range(0, len(idx), batch_size))
        batch_order = order_rng.permutation(len(batches))
        sums = np.zeros(3)
        for bi in batch_order:
            batch = batches[bi]
            units = torch.stack([prepared[i][0] for i in batch])
            targets = torch.stack([prepared[i][1] for i in batch])
            spk = speakers[batch]
            optimizer.zero_grad()
            pred = model(units, spk)
            spec = spectral_loss(pred, targets, cfg.loss_windows)
            l1 = F.l1_loss(pred, targets)
            total = spec + cfg.wave_l1_weight * l1
            if not torch.isfinite(total):
                raise NumericalError(f"non-finite vocoder loss at epoch {epoch}, batch {bi}")
            total.backward()
            optimizer.step()
            state.steps += 1
            sums += np.array([total.item(), spec.item(), l1.item()])
        state.loss_history.append(tuple(float(v) for v in sums / len(batches)))
    model.eval()
    return state


def save_vocoder(model: VocoderModel, path: str | Path) -> None:
    tensors = {name: p.detach().numpy() for name, p in model.state_dict().items()}
    save_checkpoint(path, {"kind": "vocoder", "seed": model.seed, "config": model.cfg.to_json()}, tensors)


def load_vocoder(path: str | Path) -> VocoderModel:
    config, tensors = load_checkpoint(path)
    if config.get("kind") != "vocoder":
        raise TrainingError(f"{path}: not a vocoder checkpoint")
    model = VocoderModel(VocoderConfig.from_json(config["config"]), seed=int(config["seed"]))
    model.load_state_dict({name: torch.from_numpy(arr) for name, arr in tensors.items()})
    model.eval()
    return model
