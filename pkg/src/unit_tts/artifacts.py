"""Artifact bookkeeping for the CLI: every command records what it consumed
and the config hash that produced its outputs.

Sidecar files live under <workdir>/meta/<command>.json and contain no
timestamps, so re-running a command with identical inputs yields bit-identical
metadata as well as artifacts.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .errors import ArtifactError


@dataclass
class CommandMeta:
    command: str
    config_hash: str
    seed: int
    inputs: dict[str, str] = field(default_factory=dict)
    outputs: list[str] = field(default_factory=list)


def sha256_file(path: str | Path) -> str:
    path = Path(path)
    if not path.exists():
        raise ArtifactError(f"missing input file: {path}")
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def meta_path(workdir: Path, command: str) -> Path:
    return workdir / "meta" / f"{command}.json"


def write_meta(workdir: Path, meta: CommandMeta) -> None:
    path = meta_path(workdir, meta.command)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(asdict(meta), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_meta(workdir: Path, command: str) -> CommandMeta | None:
    path = meta_path(workdir, command)
    if not path.exists():
        return None
    data = json.loads(path.read_text(encoding="utf-8"))
    return CommandMeta(**data)


def require_artifact(workdir: Path, producer: str, config_hash: str) -> CommandMeta:
    """Fail with a actionable message when a predecessor has not run or is stale."""
    meta = load_meta(workdir, producer)
    if meta is None:
        raise ArtifactError(f"missing artifact from '{producer}'; run '{producer}' first")
    if meta.config_hash != config_hash:
        raise ArtifactError(
            f"artifact from '{producer}' was built with config hash {meta.config_hash}, "
            f"current config hash is {config_hash}; re-run '{producer}' (stale artifact)"
        )
    for out in meta.outputs:
        if not (workdir / out).exists():
            raise ArtifactError(f"artifact file {out} from '{producer}' is missing; re-run it")
    return meta


def up_to_date(workdir: Path, command: str, config_hash: str, inputs: dict[str, str]) -> bool:
    """True when the recorded run matches the config, inputs, and outputs on disk."""
    meta = load_meta(workdir, command)
    if meta is None or meta.config_hash != config_hash or meta.inputs != inputs:
        return False
    return all((workdir / out).exists() for out in meta.outputs)
