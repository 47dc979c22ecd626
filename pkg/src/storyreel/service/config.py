"""Service configuration.

Every knob has a sane default; any of them can be overridden through
``STORYREEL_``-prefixed environment variables (names below). Deterministic
mode swaps the wall clock for a logical counter so two runs of the same
project produce identical stores bit for bit.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path

_ENV_PREFIX = "STORYREEL_"


@dataclass
class Config:
    root: Path
    seed: int = 42
    deterministic: bool = True
    retrieval_k: int = 3
    retrieval_min_score: float = 0.25
    update_threshold: float = 0.60
    image_guidance_k: int = 3
    image_guidance_min_score: float = 0.0
    critique_max_rounds: int = 2
    min_shot_ms: int = 2000
    default_shot_budget: int = 12
    max_workers: int = 4
    provider: str = "mock"
    provider_base_url: str = ""
    host: str = "127.0.0.1"
    port: int = 8321

    def __post_init__(self) -> None:
        self.root = Path(self.root)


def _coerce(raw: str, kind: type):
    if kind is bool:
        lowered = raw.strip().lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if kind is int:
        return int(raw)
    if kind is float:
        return float(raw)
    if kind is Path:
        return Path(raw)
    return raw


def load_config(root: Path | str | None = None, env: dict[str, str] | None = None) -> Config:
    """Build a Config from defaults, then apply STORYREEL_* overrides.

    Field ``foo_bar`` maps to ``STORYREEL_FOO_BAR``; ``root`` falls back to
    ``STORYREEL_ROOT`` and finally ``./storyreel-data``.
    """
    source = os.environ if env is None else env
    # field annotations are strings under `from __future__ import annotations`
    kinds = {"Path": Path, "int": int, "float": float, "bool": bool, "str": str}
    values: dict = {}
    for f in fields(Config):
        key = _ENV_PREFIX + f.name.upper()
        if key in source:
            name = f.type if isinstance(f.type, str) else f.type.__name__
            values[f.name] = _coerce(source[key], kinds.get(name, str))
    if root is not None:
        values["root"] = Path(root)
    elif "root" not in values:
        values["root"] = Path("./storyreel-data")
    return Config(**values)
