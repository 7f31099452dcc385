"""Run configuration: INI files, flag overrides, fingerprints, epoch table."""

from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from ..corpus import REGIMES
from ..errors import ContractError
from ..models import FUSION_STYLES

# Published budget -> epoch schedule; auto mode snaps to the nearest budget.
EPOCH_TABLE: dict[int, int] = {
    100_000: 200,
    500_000: 40,
    1_000_000: 60,
    5_000_000: 20,
    15_000_000: 10,
    50_000_000: 10,
}

# INI section for each key; every key is also a --flag of the same name.
_SECTIONS = {
    "run": (
        "seed",
        "out",
        "captions",
        "features",
        "regime",
        "fusion",
        "token_budget",
        "epochs",
        "batch_size",
        "peak_lr",
        "warmup_steps",
        "weight_decay",
        "eval_fraction",
        "context_width",
    ),
    "model": (
        "n_layers",
        "hidden_dim",
        "n_heads",
        "ff_dim",
        "max_seq_len",
        "n_latents",
    ),
}


@dataclass
class RunConfig:
    """Everything one training run depends on. Defaults are desk-scale."""

    seed: int | None = None
    out: str = "run_out"
    captions: str | None = None
    features: str | None = None
    regime: str = "full_caption"
    fusion: str = "none"
    token_budget: int | None = None
    epochs: int | None = None
    batch_size: int = 32
    peak_lr: float = 3e-4
    warmup_steps: int = 200
    weight_decay: float = 0.01
    eval_fraction: float = 0.1
    context_width: int = 3
    n_layers: int = 2
    hidden_dim: int = 64
    n_heads: int = 4
    ff_dim: int = 128
    max_seq_len: int = 32
    n_latents: int = 8

    def validate(self) -> None:
        if self.seed is None:
            raise ContractError("seed is required (set in [run] or pass --seed)")
        if self.captions is None or self.features is None:
            raise ContractError("captions and features paths are required")
        for label, path in (("captions", self.captions), ("features", self.features)):
            if not Path(path).exists():
                raise ContractError(f"{label} file not found: {path}")
        if self.regime not in REGIMES:
            raise ContractError(
                f"unknown regime '{self.regime}', expected one of {REGIMES}"
            )
        if self.fusion not in FUSION_STYLES:
            raise ContractError(
                f"unknown fusion '{self.fusion}', expected one of {FUSION_STYLES}"
            )
        if self.epochs is None and self.token_budget is None:
            raise ContractError(
                "set epochs explicitly or provide token_budget for the auto table"
            )
        if self.epochs is not None and self.epochs < 0:
            raise ContractError(f"epochs must be >= 0, got {self.epochs}")
        if self.batch_size < 1:
            raise ContractError(f"batch_size must be >= 1, got {self.batch_size}")
        if not 0.0 < self.eval_fraction < 1.0:
            raise ContractError(
                f"eval_fraction must be in (0, 1), got {self.eval_fraction}"
            )

    def resolved_epochs(self) -> tuple[int, str]:
        """Explicit epochs, or the table entry nearest the token budget."""
        if self.epochs is not None:
            return self.epochs, "explicit"
        budget = self.token_budget
        key = min(EPOCH_TABLE, key=lambda k: (abs(k - budget), k))
        return EPOCH_TABLE[key], f"auto:nearest_budget={key}"

    def to_dict(self) -> dict:
        return asdict(self)

    def fingerprint(self) -> str:
        """Stable hash of everything except the output location."""
        payload = {k: v for k, v in self.to_dict().items() if k != "out"}
        blob = json.dumps(payload, sort_keys=True)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
_ALL_KEYS = {key for keys in _SECTIONS.values() for key in keys}


def _coerce(key: str, raw: str):
    text = raw.strip()
    ftype = _FIELD_TYPES[key]
    if "None" in ftype and text.lower() in ("", "none"):
        return None
    try:
        if ftype.startswith("int"):
            return int(text)
        if ftype.startswith("float"):
            return float(text)
    except ValueError as exc:
        raise ContractError(f"config key '{key}': {exc}") from None
    return text


def load_run_config(config_path=None, overrides: dict | None = None) -> RunConfig:
    """Defaults <- INI file <- non-None overrides, then validate."""
    cfg = RunConfig()
    if config_path is not None:
        if not Path(config_path).exists():
            raise ContractError(f"config file not found: {config_path}")
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        try:
            parser.read(config_path, encoding="utf-8")
        except configparser.Error as exc:
            raise ContractError(f"malformed config file {config_path}: {exc}") from None
        for section in parser.sections():
            if section not in _SECTIONS:
                raise ContractError(
                    f"unknown config section [{section}] in {config_path}"
                )
            for key, raw in parser.items(section):
                if key not in _SECTIONS[section]:
                    raise ContractError(
                        f"unknown key '{key}' in section [{section}] of {config_path}"
                    )
                setattr(cfg, key, _coerce(key, raw))
    for key, value in (overrides or {}).items():
        if key not in _ALL_KEYS:
            raise ContractError(f"unknown config key '{key}'")
        if value is not None:
            setattr(cfg, key, value)
    cfg.validate()
    return cfg


def write_run_config(cfg: RunConfig, path) -> None:
    """Echo a resolved config back out as an INI file."""
    parser = configparser.ConfigParser()
    for section, keys in _SECTIONS.items():
        parser[section] = {}
        for key in keys:
            value = getattr(cfg, key)
            parser[section][key] = "none" if value is None else str(value)
    with open(path, "w", encoding="utf-8") as fh:
        parser.write(fh)
