"""Shared run configuration for the command-line tools.

Values come from, in increasing priority: built-in defaults, a JSON config
file (``--config`` or the ``KPHRASE_CONFIG`` environment variable), then
explicit command-line flags.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .errors import ConfigError
from .evaluate import EvalConfig
from .extract import DEFAULT_THRESHOLD
from .prompts import DEFAULT_SEED

CONFIG_ENV = "KPHRASE_CONFIG"


@dataclass(frozen=True)
class Config:
    threshold: float = DEFAULT_THRESHOLD
    min_run_atomic: int = 6
    min_run: int = 5
    seed: int = DEFAULT_SEED
    target_fps: float = 30.0
    output_dir: str = "."
    jobs: int = 1

    def __post_init__(self):
        if not (isinstance(self.threshold, (int, float)) and self.threshold > 0 and math.isfinite(self.threshold)):
            raise ConfigError(f"threshold must be a positive number, got {self.threshold!r}")
        for name in ("min_run_atomic", "min_run"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ConfigError(f"{name} must be an integer >= 1, got {value!r}")
        if not (isinstance(self.target_fps, (int, float)) and self.target_fps > 0 and math.isfinite(self.target_fps)):
            raise ConfigError(f"target_fps must be a positive number, got {self.target_fps!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")
        if isinstance(self.jobs, bool) or not isinstance(self.jobs, int) or self.jobs < 1:
            raise ConfigError(f"jobs must be an integer >= 1, got {self.jobs!r}")

    @property
    def eval_config(self) -> EvalConfig:
        return EvalConfig(min_run_atomic=self.min_run_atomic, min_run=self.min_run, threshold=self.threshold)

    def to_dict(self) -> dict:
        return asdict(self)

    def updated(self, **overrides) -> "Config":
        """Copy with every non-None override applied."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


def load_config(path: str | Path | None = None) -> Config:
    """Defaults overlaid with a JSON object file.

    With ``path`` None the environment variable is consulted; if that is also
    unset, plain defaults are returned.
    """
    if path is None:
        path = os.environ.get(CONFIG_ENV) or None
    if path is None:
        return Config()
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    known = {f.name for f in fields(Config)}
    unknown = sorted(set(doc) - known)
    if unknown:
        raise ConfigError(f"{path}: unknown config key(s) {', '.join(unknown)}")
    return Config(**doc)
