"""Discrete sound units: k-means codebook training and frame quantization.

Unit ids are 0-based cluster indices.  Training is k-means++ seeded Lloyd
iteration, single threaded and bit-reproducible for a given seed.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CodebookError
from .features import FeatureSequence

CODEBOOK_MAGIC = b"UCBK"
CODEBOOK_VERSION = 1


@dataclass
class Codebook:
    centroids: np.ndarray  # (K, n_bands) float64
    fingerprint: str  # FeatureConfig fingerprint at training time

    @property
    def k(self) -> int:
        return len(self.centroids)


@dataclass(frozen=True)
class UnitSequence:
    units: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.units)


@dataclass(frozen=True)
class RunLengthUnits:
    runs: tuple[tuple[int, int], ...]  # (unit id, duration)


def _squared_distances(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    # (N, K) without forming the N x K x D intermediate
    p2 = (points**2).sum(axis=1)[:, None]
    c2 = (centroids**2).sum(axis=1)[None, :]
    return np.maximum(p2 + c2 - 2.0 * points @ centroids.T, 0.0)


def _kmeans_pp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    centroids = np.empty((k, points.shape[1]))
    centroids[0] = points[rng.integers(len(points))]
    d2 = ((points - centroids[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            # all remaining mass on existing centroids; reuse any point
            centroids[j] = points[rng.integers(len(points))]
        else:
            centroids[j] = points[rng.choice(len(points), p=d2 / total)]
        d2 = np.minimum(d2, ((points - centroids[j]) ** 2).sum(axis=1))
    return centroids


def train_codebook(
    features: list[FeatureSequence],
    k: int,
    seed: int,
    max_iters: int = 100,
    tol: float = 1e-6,
) -> tuple[Codebook, list[float]]:
    """Lloyd iterations from a k-means++ start; returns (codebook, objective history).

    Empty clusters are re-seeded to the point farthest from its assigned
    centroid.  The objective (total within-cluster SSE, recorded after each
    assignment step) is non-increasing.
    """
    if not features:
        raise CodebookError("no feature sequences given")
    cfg = features[0].config
    points = np.concatenate([f.frames for f in features], axis=0)
    if len(points) < k:
        raise CodebookError(f"need at least K={k} frames, got {len(points)}")
    rng = np.random.default_rng(seed)
    centroids = _kmeans_pp_init(points, k, rng)
    history: list[float] = []
    prev_obj = np.inf
    for _ in range(max_iters):
        d2 = _squared_distances(points, centroids)
        labels = d2.argmin(axis=1)  # argmin breaks ties toward the lowest index
        point_d2 = d2[np.arange(len(points)), labels]
        obj = float(point_d2.sum())
        if obj > prev_obj * (1.0 + 1e-12) + 1e-12:
            raise CodebookError(f"k-means objective increased: {prev_obj} -> {obj}")
        history.append(obj)
        for j in range(k):
            mask = labels == j
            if mask.any():
                centroids[j] = points[mask].mean(axis=0)
            else:
                farthest = int(point_d2.argmax())
                centroids[j] = points[farthest]
                point_d2[farthest] = 0.0
        if prev_obj - obj <= tol * max(obj, 1.0):
            break
        prev_obj = obj
    return Codebook(centroids=centroids, fingerprint=cfg.fingerprint()), history


def quantize(features: FeatureSequence, codebook: Codebook) -> UnitSequence:
    """Nearest-centroid unit per frame; ties break toward the lowest centroid index."""
    fp = features.config.fingerprint()
    if fp != codebook.fingerprint:
        raise CodebookError(
            f"feature config fingerprint {fp} does not match codebook fingerprint "
            f"{codebook.fingerprint}; re-extract features or retrain the codebook"
        )
    d2 = _squared_distances(features.frames, codebook.centroids)
    return UnitSequence(units=tuple(int(u) for u in d2.argmin(axis=1)))


def run_length(units: UnitSequence) -> RunLengthUnits:
    if not len(units):
        raise CodebookError("cannot run-length encode an empty unit sequence")
    runs: list[tuple[int, int]] = []
    for u in units.units:
        if runs and runs[-1][0] == u:
            runs[-1] = (u, runs[-1][1] + 1)
        else:
            runs.append((u, 1))
    return RunLengthUnits(runs=tuple(runs))


def expand(runs: RunLengthUnits) -> UnitSequence:
    if not runs.runs:
        raise CodebookError("cannot expand an empty run-length encoding")
    out: list[int] = []
    for u, d in runs.runs:
        out.extend([u] * d)
    return UnitSequence(units=tuple(out))


def save_codebook(codebook: Codebook, path: str | Path) -> None:
    cents = codebook.centroids.astype("<f4")
    fp = codebook.fingerprint.encode("utf-8")
    with Path(path).open("wb") as fh:
        fh.write(CODEBOOK_MAGIC)
        fh.write(struct.pack("<B", CODEBOOK_VERSION))
        fh.write(struct.pack("<II", cents.shape[0], cents.shape[1]))
        fh.write(cents.tobytes())
        fh.write(struct.pack("<I", len(fp)))
        fh.write(fp)


def load_codebook(path: str | Path) -> Codebook:
    raw = Path(path).read_bytes()
    if raw[:4] != CODEBOOK_MAGIC:
        raise CodebookError(f"{path}: not a codebook file")
    if raw[4] != CODEBOOK_VERSION:
        raise CodebookError(f"{path}: unsupported codebook version {raw[4]}")
    k, n_bands = struct.unpack_from("<II", raw, 5)
    offset = 13
    cents = np.frombuffer(raw, dtype="<f4", count=k * n_bands, offset=offset)
    offset += 4 * k * n_bands
    (fp_len,) = struct.unpack_from("<I", raw, offset)
    fp = raw[offset + 4 : offset + 4 + fp_len].decode("utf-8")
    return Codebook(centroids=cents.reshape(k, n_bands).astype(np.float64), fingerprint=fp)


def quantize_corpus(
    features_by_id: dict[str, FeatureSequence], codebook: Codebook
) -> dict[str, list[int]]:
    return {utt_id: list(quantize(f, codebook).units) for utt_id, f in features_by_id.items()}


def save_unit_dump(units: dict[str, list[int]], path: str | Path) -> None:
    """One record per line: {"id": ..., "units": [...]}."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for utt_id in units:
            fh.write(json.dumps({"id": utt_id, "units": units[utt_id]}) + "\n")


def load_unit_dump(path: str | Path) -> dict[str, list[int]]:
    out: dict[str, list[int]] = {}
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                record = json.loads(line)
                out[record["id"]] = [int(u) for u in record["units"]]
    return out
