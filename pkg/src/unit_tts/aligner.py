"""Duration targets by optimal monotonic segmentation.

Splits an utterance's feature frames into exactly N contiguous spans (one per
text token) minimizing total within-span SSE around span means, by dynamic
programming with prefix-sum span costs, O(N * T^2) overall.  Among equal-cost
segmentations the earliest boundaries win.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import AlignmentError
from .features import FeatureSequence


@dataclass(frozen=True)
class DurationSequence:
    durations: tuple[int, ...]

    @property
    def total_frames(self) -> int:
        return sum(self.durations)

    def __len__(self) -> int:
        return len(self.durations)


def _prefix_sums(frames: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    s1 = np.zeros((len(frames) + 1, frames.shape[1]))
    s2 = np.zeros(len(frames) + 1)
    np.cumsum(frames, axis=0, out=s1[1:])
    np.cumsum((frames**2).sum(axis=1), out=s2[1:])
    return s1, s2


def _span_cost(s1: np.ndarray, s2: np.ndarray, i: int, j: int) -> float:
    """SSE of frames[i:j] around their mean."""
    seg_sum = s1[j] - s1[i]
    return float(s2[j] - s2[i] - (seg_sum @ seg_sum) / (j - i))


def align(features: FeatureSequence, n_tokens: int) -> DurationSequence:
    """Durations of the N-span segmentation minimizing within-span SSE."""
    n_frames = len(features)
    if n_tokens < 1:
        raise AlignmentError("need at least one token")
    if n_tokens > n_frames:
        raise AlignmentError(f"cannot split {n_frames} frames into {n_tokens} spans")
    s1, s2 = _prefix_sums(features.frames)
    # dp[t][j]: best cost of covering frames [0, j) with t spans
    dp = np.full((n_tokens + 1, n_frames + 1), np.inf)
    back = np.zeros((n_tokens + 1, n_frames + 1), dtype=int)
    dp[0][0] = 0.0
    for t in range(1, n_tokens + 1):
        i0 = t - 1  # earliest feasible previous boundary
        j_hi = n_frames - (n_tokens - t)
        for j in range(t, j_hi + 1):
            # candidate boundaries i0..j-1, scanned in increasing order;
            # np.argmin keeps the first minimum, so earlier boundaries win ties
            idx = np.arange(i0, j)
            diffs = s1[j] - s1[i0:j]
            costs = s2[j] - s2[i0:j] - (diffs * diffs).sum(axis=1) / (j - idx)
            totals = dp[t - 1, i0:j] + costs
            best = int(totals.argmin())
            dp[t][j] = totals[best]
            back[t][j] = i0 + best
    bounds = [n_frames]
    for t in range(n_tokens, 0, -1):
        bounds.append(int(back[t][bounds[-1]]))
    bounds.reverse()
    durations = tuple(bounds[i + 1] - bounds[i] for i in range(n_tokens))
    return DurationSequence(durations=durations)


def segmentation_cost(features: FeatureSequence, durations: DurationSequence) -> float:
    """Total within-span SSE of a given segmentation (for verification)."""
    if durations.total_frames != len(features):
        raise AlignmentError("durations do not cover the feature frames")
    s1, s2 = _prefix_sums(features.frames)
    total = 0.0
    start = 0
    for d in durations.durations:
        total += _span_cost(s1, s2, start, start + d)
        start += d
    return total


def align_corpus(
    features_by_id: dict[str, FeatureSequence],
    token_counts: dict[str, int],
) -> tuple[dict[str, DurationSequence], list[tuple[str, str]]]:
    """align() per utterance; returns (durations, [(skipped id, reason), ...])."""
    out: dict[str, DurationSequence] = {}
    skipped: list[tuple[str, str]] = []
    for utt_id, feats in features_by_id.items():
        n = token_counts[utt_id]
        if n < 1 or n > len(feats):
            skipped.append((utt_id, f"{n} tokens vs {len(feats)} frames"))
            continue
        out[utt_id] = align(feats, n)
    return out, skipped


def save_duration_dump(durations: dict[str, list[int]], path: str | Path) -> None:
    """One record per line: {"id": ..., "durations": [...]}."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for utt_id in durations:
            fh.write(json.dumps({"id": utt_id, "durations": durations[utt_id]}) + "\n")


def load_duration_dump(path: str | Path) -> dict[str, list[int]]:
    out: dict[str, list[int]] = {}
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                record = json.loads(line)
                out[record["id"]] = [int(d) for d in record["durations"]]
    return out
