"""Optional JSON configuration file; command-line flags override it."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from .errors import ValidationError


@dataclass
class StoreConfig:
    backend: str = "normalized"
    path: str = "data"


@dataclass
class ServeConfig:
    port: int = 8080
    host: str = "127.0.0.1"
    max_depth: int = 100
    ui_dir: Optional[str] = None


@dataclass
class IngestConfig:
    dead_letter: Optional[str] = None


@dataclass
class AppConfig:
    store: StoreConfig = field(default_factory=StoreConfig)
    serve: ServeConfig = field(default_factory=ServeConfig)
    ingest: IngestConfig = field(default_factory=IngestConfig)


def load_config(path: Optional[Union[str, Path]]) -> AppConfig:
    """Read a config file like {"store": {...}, "serve": {...}, "ingest": {...}}."""
    config = AppConfig()
    if path is None:
        return config
    with open(path, "r", encoding="utf-8") as f:
        raw = json.load(f)
    if not isinstance(raw, dict):
        raise ValidationError(f"{path}: config must be a JSON object")
    for section, target in (("store", config.store), ("serve", config.serve), ("ingest", config.ingest)):
        body = raw.get(section, {})
        if not isinstance(body, dict):
            raise ValidationError(f"{path}: section {section!r} must be an object")
        for key, value in body.items():
            if not hasattr(target, key):
                raise ValidationError(f"{path}: unknown key {key!r} in section {section!r}")
            setattr(target, key, value)
    return config
