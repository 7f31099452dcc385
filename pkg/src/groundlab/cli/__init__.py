"""Command-line entry point: config-driven training, evaluation, and tooling."""

from .commands import (
    BENCHMARKS,
    VARIANTS,
    cmd_analyze,
    cmd_benchgen,
    cmd_eval,
    cmd_sweep,
    cmd_synth,
    cmd_train,
    parse_variant,
)
from .config import EPOCH_TABLE, RunConfig, load_run_config, write_run_config
from .main import build_parser, main
from .manifest import TOOL_VERSION, Manifest, load_manifest, new_manifest
from .train import TrainOutcome, run_training

__all__ = [
    "BENCHMARKS",
    "EPOCH_TABLE",
    "Manifest",
    "RunConfig",
    "TOOL_VERSION",
    "TrainOutcome",
    "VARIANTS",
    "build_parser",
    "cmd_analyze",
    "cmd_benchgen",
    "cmd_eval",
    "cmd_sweep",
    "cmd_synth",
    "cmd_train",
    "load_manifest",
    "load_run_config",
    "main",
    "new_manifest",
    "parse_variant",
    "run_training",
    "write_run_config",
]
