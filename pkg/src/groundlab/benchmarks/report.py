"""Evaluation reports (schema LGREP1) and seed-derived split membership.

A report stores the full per-layer trace (selection metric and final
metric), so the selected layer and final score can be re-derived from the
trace alone — every report is its own audit trail.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..errors import ContractError
from ..seeding import substream

REPORT_VERSION = "LGREP1"


def derive_split(
    benchmark_id: str,
    seed: int,
    n: int,
    fractions: tuple[float, ...] = (0.8, 0.1, 0.1),
) -> tuple[np.ndarray, ...]:
    """Partition range(n) into len(fractions) disjoint index arrays.

    Membership depends on (benchmark_id, seed) only; the final part
    absorbs rounding left-overs.
    """
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ContractError(f"split fractions must sum to 1, got {fractions}")
    order = substream(seed, f"splits:{benchmark_id}").permutation(n)
    parts = []
    start = 0
    for frac in fractions[:-1]:
        size = int(round(frac * n))
        parts.append(np.sort(order[start : start + size]))
        start += size
    parts.append(np.sort(order[start:]))
    return tuple(parts)


def stratified_split(
    benchmark_id: str,
    seed: int,
    labels: list,
    fractions: tuple[float, ...] = (0.8, 0.1, 0.1),
) -> tuple[np.ndarray, ...]:
    """Like derive_split but per-label, so class shares carry over.

    Rounding leftovers go to the first (train) part, which also guarantees
    single-exemplar labels appear in training.
    """
    rng = substream(seed, f"splits:{benchmark_id}")
    by_label: dict[Any, list[int]] = {}
    for i, lab in enumerate(labels):
        by_label.setdefault(lab, []).append(i)
    parts: list[list[int]] = [[] for _ in fractions]
    for lab in sorted(by_label, key=str):
        idx = np.asarray(by_label[lab])
        idx = idx[rng.permutation(len(idx))]
        sizes = [int(np.floor(f * len(idx))) for f in fractions]
        sizes[0] += len(idx) - sum(sizes)
        start = 0
        for p, size in enumerate(sizes):
            parts[p].extend(idx[start : start + size].tolist())
            start += size
    return tuple(np.sort(np.asarray(p, dtype=int)) for p in parts)


@dataclass
class EvalReport:
    """Per-layer traces, the selected layer, and the reported score."""

    benchmark: str
    selection_criterion: str
    per_layer_selection: dict[int, float | None]
    per_layer_final: dict[int, float | None]
    selected_layer: int
    final_score: float
    splits_seed: int | None = None
    config_fingerprint: str | None = None
    details: dict = field(default_factory=dict)
    version: str = REPORT_VERSION

    def recompute_final(self) -> tuple[int, float]:
        """Re-derive (selected layer, final score) from the stored trace."""
        scored = {
            k: v for k, v in self.per_layer_selection.items() if v is not None
        }
        if not scored:
            raise ContractError("report trace has no scored layers")
        best = min(k for k, v in scored.items() if v == max(scored.values()))
        final = self.per_layer_final[best]
        if final is None:
            raise ContractError(f"selected layer {best} has no final score")
        return best, final

    def to_json(self) -> str:
        def clean(v):
            if isinstance(v, (np.floating, np.integer)):
                return v.item()
            if isinstance(v, np.ndarray):
                return v.tolist()
            if isinstance(v, dict):
                return {str(k): clean(x) for k, x in v.items()}
            if isinstance(v, (list, tuple)):
                return [clean(x) for x in v]
            return v

        payload = {
            "version": self.version,
            "benchmark": self.benchmark,
            "selection_criterion": self.selection_criterion,
            "per_layer_selection": clean(self.per_layer_selection),
            "per_layer_final": clean(self.per_layer_final),
            "selected_layer": int(self.selected_layer),
            "final_score": clean(self.final_score),
            "splits_seed": self.splits_seed,
            "config_fingerprint": self.config_fingerprint,
            "details": clean(self.details),
        }
        return json.dumps(payload, sort_keys=True, indent=2)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json() + "\n")

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        obj = json.loads(text)
        if obj.get("version") != REPORT_VERSION:
            raise ContractError(
                f"unsupported report version {obj.get('version')!r}, "
                f"expected {REPORT_VERSION!r}"
            )
        return cls(
            benchmark=obj["benchmark"],
            selection_criterion=obj["selection_criterion"],
            per_layer_selection={
                int(k): v for k, v in obj["per_layer_selection"].items()
            },
            per_layer_final={int(k): v for k, v in obj["per_layer_final"].items()},
            selected_layer=int(obj["selected_layer"]),
            final_score=obj["final_score"],
            splits_seed=obj["splits_seed"],
            config_fingerprint=obj["config_fingerprint"],
            details=obj["details"],
        )

    @classmethod
    def load(cls, path) -> "EvalReport":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


def select_layer(per_layer: dict[int, float | None]) -> int:
    """Lowest layer index attaining the maximum score (None = unscored)."""
    scored = {k: v for k, v in per_layer.items() if v is not None}
    if not scored:
        raise ContractError("no layer produced a score")
    top = max(scored.values())
    return min(k for k, v in scored.items() if v == top)
