"""Run manifests: enough metadata beside every artifact to regenerate it."""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..errors import ContractError

try:
    from importlib.metadata import version as _pkg_version

    TOOL_VERSION = _pkg_version("groundlab")
except Exception:  # pragma: no cover - not installed
    TOOL_VERSION = "0.0.0"


@dataclass
class Manifest:
    command: str
    fingerprint: str
    artifacts: dict[str, str] = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    tool_version: str = TOOL_VERSION
    created_utc: str = ""
    elapsed_seconds: float = 0.0

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")


def load_manifest(path) -> Manifest:
    if not Path(path).is_file():
        raise ContractError(f"manifest file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    known = {f for f in Manifest.__dataclass_fields__}
    unknown = set(data) - known
    if unknown:
        raise ContractError(f"manifest {path} has unknown fields: {sorted(unknown)}")
    return Manifest(**data)


def new_manifest(command: str, fingerprint: str, config: dict | None = None) -> Manifest:
    return Manifest(
        command=command,
        fingerprint=fingerprint,
        config=config or {},
        created_utc=time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    )
