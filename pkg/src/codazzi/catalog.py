"""Built-in manifests shipped with the package."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .errors import CatalogNotFoundError

_PACKAGE = "codazzi.manifests"


def _dir():
    return resources.files(_PACKAGE)


def catalog_list() -> list[str]:
    return sorted(p.name[:-5] for p in _dir().iterdir() if p.name.endswith(".yaml"))


def catalog_text(name: str) -> str:
    entry = _dir() / f"{name}.yaml"
    if not entry.is_file():
        raise CatalogNotFoundError(f"no catalog manifest named {name!r}; available: {', '.join(catalog_list())}")
    return entry.read_text(encoding="utf-8")


def catalog_emit(name: str, path) -> Path:
    """Write the named manifest to ``path`` (a directory gets ``<name>.yaml``)."""
    text = catalog_text(name)
    path = Path(path)
    if path.is_dir():
        path = path / f"{name}.yaml"
    path.write_text(text, encoding="utf-8")
    return path


def catalog_load(name: str):
    from .manifest import loads

    return loads(catalog_text(name), f"catalog:{name}")
