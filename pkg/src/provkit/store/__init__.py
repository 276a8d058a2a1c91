"""Storage layer: one Store/Query interface, two interchangeable backends."""

from __future__ import annotations

from pathlib import Path
from typing import Union

from ..errors import ValidationError
from .base import Lineage, Store
from .denormalized import DenormalizedStore
from .normalized import NormalizedStore

BACKENDS = ("normalized", "denormalized")

__all__ = [
    "BACKENDS",
    "DenormalizedStore",
    "Lineage",
    "NormalizedStore",
    "Store",
    "open_store",
]


def _resolve_path(backend: str, path: Union[str, Path]) -> str:
    if path == ":memory:":
        return ":memory:"
    path = Path(path)
    if path.suffix:  # explicit database file
        path.parent.mkdir(parents=True, exist_ok=True)
        return str(path)
    path.mkdir(parents=True, exist_ok=True)
    return str(path / f"{backend}.db")


def open_store(backend: str, path: Union[str, Path] = ":memory:") -> Store:
    """Open a store. ``path`` is a data directory, a database file, or ":memory:"."""
    if backend == "normalized":
        return NormalizedStore(_resolve_path(backend, path))
    if backend == "denormalized":
        return DenormalizedStore(_resolve_path(backend, path))
    raise ValidationError(f"unknown backend {backend!r}; expected one of {BACKENDS}")
