"""Bundled example programs (``.njava``)."""

from __future__ import annotations

from importlib import resources
from pathlib import Path


def names() -> list[str]:
    return sorted(p.name[:-6] for p in resources.files(__name__).iterdir()
                  if p.name.endswith(".njava"))


def path(name: str) -> Path:
    p = Path(str(resources.files(__name__) / f"{name}.njava"))
    if not p.exists():
        raise FileNotFoundError(f"no bundled program named {name!r}")
    return p


def source(name: str) -> str:
    return path(name).read_text(encoding="utf-8")
