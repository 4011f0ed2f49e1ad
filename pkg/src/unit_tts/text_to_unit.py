"""Non-autoregressive text-to-unit model.

Encoder (self-attention + 1-D conv blocks) embeds the token sequence, a
duration predictor regresses per-token log frame counts, a length regulator
repeats each token state for its duration, and the decoder predicts one unit
id per frame simultaneously.  No language or speaker conditioning anywhere:
content is carried entirely by the shared unit space.

Training teacher-forces ground-truth durations; inference length-regulates
with rounded predicted durations and takes per-frame argmax units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from .aligner import DurationSequence
from .checkpoints import load_checkpoint, save_checkpoint
from .errors import NumericalError, TrainingError
from .text_frontend import PAD_ID, TokenSequence
from .units import UnitSequence


@dataclass(frozen=True)
class T2UConfig:
    vocab_size: int
    n_units: int
    embed_dim: int = 64
    encoder_layers: int = 2
    decoder_layers: int = 2
    heads: int = 2
    conv_kernel: int = 3
    ffn_mult: int = 4
    duration_kernel: int = 3
    dropout: float = 0.1

    def __post_init__(self) -> None:
        if self.embed_dim % self.heads != 0:
            raise TrainingError(f"embed_dim {self.embed_dim} not divisible by heads {self.heads}")
        for name in ("vocab_size", "n_units", "encoder_layers", "decoder_layers"):
            if getattr(self, name) < 1:
                raise TrainingError(f"{name} must be >= 1")

    def to_json(self) -> dict:
        return {
            "vocab_size": self.vocab_size,
            "n_units": self.n_units,
            "embed_dim": self.embed_dim,
            "encoder_layers": self.encoder_layers,
            "decoder_layers": self.decoder_layers,
            "heads": self.heads,
            "conv_kernel": self.conv_kernel,
            "ffn_mult": self.ffn_mult,
            "duration_kernel": self.duration_kernel,
            "dropout": self.dropout,
        }

    @classmethod
    def from_json(cls, data: dict) -> "T2UConfig":
        return cls(**data)


@dataclass
class TrainingState:
    steps: int = 0
    # per-epoch means: (total, cross-entropy term, duration term)
    loss_history: list[tuple[float, float, float]] = field(default_factory=list)


def sinusoidal_encoding(positions: torch.Tensor, dim: int) -> torch.Tensor:
    """Standard sin/cos encoding for integer position tensor of any shape."""
    half = dim // 2
    freq = torch.exp(
        torch.arange(half, dtype=torch.float64) * (-math.log(10000.0) / max(half - 1, 1))
    )
    angles = positions.double().unsqueeze(-1) * freq
    enc = torch.cat([torch.sin(angles), torch.cos(angles)], dim=-1)
    if dim % 2:
        enc = F.pad(enc, (0, 1))
    return enc.to(torch.get_default_dtype())


class ConvFFN(nn.Module):
    """Two 1-D convolutions with ReLU, FastSpeech-style position-wise FFN."""

    def __init__(self, dim: int, hidden: int, kernel: int, dropout: float):
        super().__init__()
        pad = kernel // 2
        self.conv1 = nn.Conv1d(dim, hidden, kernel, padding=pad)
        self.conv2 = nn.Conv1d(hidden, dim, kernel, padding=pad)
        self.dropout = nn.Dropout(dropout)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        # x: (B, T, D)
        y = x.transpose(1, 2)
        y = self.conv2(self.dropout(F.relu(self.conv1(y))))
        return y.transpose(1, 2)


class FFTBlock(nn.Module):
    """Self-attention + conv FFN, each with residual connection and layer norm."""

    def __init__(self, cfg: T2UConfig):
        super().__init__()
        self.attn = nn.MultiheadAttention(
            cfg.embed_dim, cfg.heads, dropout=cfg.dropout, batch_first=True
        )
        self.norm1 = nn.LayerNorm(cfg.embed_dim)
        self.ffn = ConvFFN(cfg.embed_dim, cfg.ffn_mult * cfg.embed_dim, cfg.conv_kernel, cfg.dropout)
        self.norm2 = nn.LayerNorm(cfg.embed_dim)
        self.dropout = nn.Dropout(cfg.dropout)

    def forward(self, x: torch.Tensor, pad_mask: torch.Tensor | None) -> torch.Tensor:
        attn_out, _ = self.attn(x, x, x, key_padding_mask=pad_mask, need_weights=False)
        x = self.norm1(x + self.dropout(attn_out))
        x = self.norm2(x + self.dropout(self.ffn(x)))
        if pad_mask is not None:
            x = x.masked_fill(pad_mask.unsqueeze(-1), 0.0)
        return x


class DurationPredictor(nn.Module):
    """Two conv layers + scalar projection; outputs per-token log-durations."""

    def __init__(self, cfg: T2UConfig):
        super().__init__()
        pad = cfg.duration_kernel // 2
        self.conv1 = nn.Conv1d(cfg.embed_dim, cfg.embed_dim, cfg.duration_kernel, padding=pad)
        self.norm1 = nn.LayerNorm(cfg.embed_dim)
        self.conv2 = nn.Conv1d(cfg.embed_dim, cfg.embed_dim, cfg.duration_kernel, padding=pad)
        self.norm2 = nn.LayerNorm(cfg.embed_dim)
        self.proj = nn.Linear(cfg.embed_dim, 1)
        self.dropout = nn.Dropout(cfg.dropout)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        y = F.relu(self.conv1(x.transpose(1, 2))).transpose(1, 2)
        y = self.dropout(self.norm1(y))
        y = F.relu(self.conv2(y.transpose(1, 2))).transpose(1, 2)
        y = self.dropout(self.norm2(y))
        return self.proj(y).squeeze(-1)


class T2UModel(nn.Module):
    def __init__(self, cfg: T2UConfig, seed: int):
        super().__init__()
        torch.manual_seed(seed)
        self.cfg = cfg
        self.seed = seed
        self.embedding = nn.Embedding(cfg.vocab_size, cfg.embed_dim, padding_idx=PAD_ID)
        self.encoder = nn.ModuleList(FFTBlock(cfg) for _ in range(cfg.encoder_layers))
        self.duration_predictor = DurationPredictor(cfg)
        self.decoder = nn.ModuleList(FFTBlock(cfg) for _ in range(cfg.decoder_layers))
        self.out_proj = nn.Linear(cfg.embed_dim, cfg.n_units)

    def encode(self, tokens: torch.Tensor, pad_mask: torch.Tensor | None) -> torch.Tensor:
        positions = torch.arange(tokens.shape[1], device=tokens.device).expand(tokens.shape)
        x = self.embedding(tokens) + sinusoidal_encoding(positions, self.cfg.embed_dim)
        if pad_mask is not None:
            x = x.masked_fill(pad_mask.unsqueeze(-1), 0.0)
        for block in self.encoder:
            x = block(x, pad_mask)
        return x

    def decode(self, frames: torch.Tensor, pad_mask: torch.Tensor | None) -> torch.Tensor:
        x = frames
        for block in self.decoder:
            x = block(x, pad_mask)
        return self.out_proj(x)


def length_regulate(token_states: torch.Tensor, durations: list[int]) -> torch.Tensor:
    """Repeat row i of (N, D) token_states durations[i] times -> (sum(d), D)."""
    if token_states.ndim != 2:
        raise TrainingError("length_regulate expects an (N, D) matrix")
    if len(durations) != token_states.shape[0]:
        raise TrainingError(
            f"duration count {len(durations)} != token count {token_states.shape[0]}"
        )
    if any(d < 1 for d in durations):
        raise TrainingError(f"durations must be >= 1, got {list(durations)}")
    repeats = torch.as_tensor(durations, dtype=torch.long, device=token_states.device)
    return torch.repeat_interleave(token_states, repeats, dim=0)


def _offset_positions(durations: list[int], device: torch.device) -> torch.Tensor:
    """Frame offsets within each token: d=[2,3] -> [0,1,0,1,2]."""
    out = [torch.arange(d, device=device) for d in durations]
    return torch.cat(out)


def cross_entropy_frames(logits: torch.Tensor, targets: torch.Tensor) -> torch.Tensor:
    """Mean cross-entropy over frames; shift-invariant in the logits."""
    return F.cross_entropy(logits, targets, reduction="mean")


def _single_item_forward(
    model: T2UModel,
    token_ids: torch.Tensor,
    gt_durations: list[int],
    gt_units: torch.Tensor,
    lambda_dur: float,
) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    enc = model.encode(token_ids.unsqueeze(0), None)[0]
    log_dur_pred = model.duration_predictor(enc.unsqueeze(0))[0]
    frames = length_regulate(enc, gt_durations)
    frames = frames + sinusoidal_encoding(
        _offset_positions(gt_durations, frames.device), model.cfg.embed_dim
    )
    logits = model.decode(frames.unsqueeze(0), None)[0]
    ce = cross_entropy_frames(logits, gt_units)
    dur_target = torch.log(torch.as_tensor(gt_durations, dtype=logits.dtype))
    dur = F.mse_loss(log_dur_pred, dur_target)
    return ce + lambda_dur * dur, ce, dur


def forward_train(
    model: T2UModel,
    tokens: TokenSequence,
    gt_durations: DurationSequence,
    gt_units: UnitSequence,
    lambda_dur: float = 0.1,
) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    """Teacher-forced loss: (total, cross-entropy term, duration term)."""
    if gt_durations.total_frames != len(gt_units):
        raise TrainingError(
            f"durations cover {gt_durations.total_frames} frames but units have {len(gt_units)}"
        )
    if len(tokens) != len(gt_durations):
        raise TrainingError(f"{len(tokens)} tokens vs {len(gt_durations)} durations")
    if max(tokens.ids) >= model.cfg.vocab_size:
        raise TrainingError("token id out of vocabulary range")
    token_ids = torch.as_tensor(tokens.ids, dtype=torch.long)
    units = torch.as_tensor(gt_units.units, dtype=torch.long)
    return _single_item_forward(model, token_ids, list(gt_durations.durations), units, lambda_dur)


@dataclass
class T2UExample:
    tokens: TokenSequence
    durations: DurationSequence
    units: UnitSequence


def _batched_loss(
    model: T2UModel,
    batch: list[T2UExample],
    lambda_dur: float,
) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    n_tok = max(len(ex.tokens) for ex in batch)
    n_frames = max(ex.durations.total_frames for ex in batch)
    bsz = len(batch)
    tokens = torch.full((bsz, n_tok), PAD_ID, dtype=torch.long)
    tok_mask = torch.ones(bsz, n_tok, dtype=torch.bool)
    frame_mask = torch.ones(bsz, n_frames, dtype=torch.bool)
    targets = torch.zeros(bsz, n_frames, dtype=torch.long)
    for b, ex in enumerate(batch):
        tokens[b, : len(ex.tokens)] = torch.as_tensor(ex.tokens.ids)
        tok_mask[b, : len(ex.tokens)] = False
        frame_mask[b, : ex.durations.total_frames] = False
        targets[b, : ex.durations.total_frames] = torch.as_tensor(ex.units.units)

    enc = model.encode(tokens, tok_mask)
    log_dur_pred = model.duration_predictor(enc)
    frames = torch.zeros(bsz, n_frames, model.cfg.embed_dim, dtype=enc.dtype)
    offsets = torch.zeros(bsz, n_frames, dtype=torch.long)
    for b, ex in enumerate(batch):
        durs = list(ex.durations.durations)
        total = ex.durations.total_frames
        frames[b, :total] = length_regulate(enc[b, : len(ex.tokens)], durs)
        offsets[b, :total] = _offset_positions(durs, enc.device)
    frames = frames + sinusoidal_encoding(offsets, model.cfg.embed_dim)
    frames = frames.masked_fill(frame_mask.unsqueeze(-1), 0.0)
    logits = model.decode(frames, frame_mask)

    valid = ~frame_mask
    ce = cross_entropy_frames(logits[valid], targets[valid])
    dur_terms = []
    for b, ex in enumerate(batch):
        target = torch.log(torch.as_tensor(list(ex.durations.durations), dtype=logits.dtype))
        dur_terms.append(((log_dur_pred[b, : len(ex.tokens)] - target) ** 2).mean())
    dur = torch.stack(dur_terms).mean()
    return ce + lambda_dur * dur, ce, dur


def train(
    model: T2UModel,
    examples: list[T2UExample],
    epochs: int,
    batch_size: int = 8,
    lr: float = 1e-3,
    seed: int = 0,
    lambda_dur: float = 0.1,
) -> TrainingState:
    """Adam on the combined loss; deterministic given seed (single-threaded)."""
    torch.set_num_threads(1)
    for ex in examples:
        if ex.durations.total_frames != len(ex.units):
            raise TrainingError(f"example length mismatch: {ex.tokens.ids[:4]}...")
    state = TrainingState()
    if epochs == 0 or not examples:
        return state
    torch.manual_seed(seed)
    optimizer = torch.optim.Adam(model.parameters(), lr=lr)
    order_rng = np.random.default_rng(seed)
    model.train()
    for epoch in range(epochs):
        order = order_rng.permutation(len(examples))
        sums = np.zeros(3)
        n_batches = 0
        for start in range(0, len(order), batch_size):
            batch = [examples[i] for i in order[start : start + batch_size]]
            optimizer.zero_grad()
            total, ce, dur = _batched_loss(model, batch, lambda_dur)
            if not torch.isfinite(total):
                raise NumericalError(
                    f"non-finite loss at epoch {epoch}, batch {n_batches} "
                    f"(ids {[ex.tokens.ids[:3] for ex in batch]})"
                )
            total.backward()
            optimizer.step()
            state.steps += 1
            sums += np.array([total.item(), ce.item(), dur.item()])
            n_batches += 1
        state.loss_history.append(tuple(float(v) for v in sums / n_batches))
    model.eval()
    return state


def predict_units(model: T2UModel, tokens: TokenSequence) -> tuple[UnitSequence, DurationSequence]:
    """Deterministic inference: rounded predicted durations, per-frame argmax units."""
    if not len(tokens):
        raise TrainingError("cannot predict units for an empty token sequence")
    torch.set_num_threads(1)
    model.eval()
    with torch.no_grad():
        token_ids = torch.as_tensor(tokens.ids, dtype=torch.long).unsqueeze(0)
        enc = model.encode(token_ids, None)[0]
        log_dur = model.duration_predictor(enc.unsqueeze(0))[0]
        durations = torch.clamp(torch.round(torch.exp(log_dur)), min=1).long().tolist()
        frames = length_regulate(enc, durations)
        frames = frames + sinusoidal_encoding(
            _offset_positions(durations, frames.device), model.cfg.embed_dim
        )
        logits = model.decode(frames.unsqueeze(0), None)[0]
        units = logits.argmax(dim=-1).tolist()
    return (
        UnitSequence(units=tuple(int(u) for u in units)),
        DurationSequence(durations=tuple(int(d) for d in durations)),
    )


def save_t2u(model: T2UModel, path: str | Path) -> None:
    tensors = {name: p.detach().numpy() for name, p in model.state_dict().items()}
    save_checkpoint(path, {"kind": "text_to_unit", "seed": model.seed, "config": model.cfg.to_json()}, tensors)


def load_t2u(path: str | Path) -> T2UModel:
    config, tensors = load_checkpoint(path)
    if config.get("kind") != "text_to_unit":
        raise TrainingError(f"{path}: not a text-to-unit checkpoint")
    model = T2UModel(T2UConfig.from_json(config["config"]), seed=int(config["seed"]))
    state = {name: torch.from_numpy(arr) for name, arr in tensors.items()}
    model.load_state_dict(state)
    model.eval()
    return model
