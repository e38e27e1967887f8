"""Access to the bundled corpus of app models."""

from __future__ import annotations

from pathlib import Path

from ..model import AppModel, load_app_model

_CORPUS_DIR = Path(__file__).parent


def corpus_dir() -> Path:
    return _CORPUS_DIR


def list_corpus_models(directory: Path | None = None) -> list[str]:
    directory = directory or _CORPUS_DIR
    return sorted(p.name.removesuffix(".app.json") for p in directory.glob("*.app.json"))


def load_corpus_model(name: str, directory: Path | None = None) -> AppModel:
    directory = directory or _CORPUS_DIR
    path = directory / f"{name}.app.json"
    return load_app_model(path.read_text(encoding="utf-8"))
