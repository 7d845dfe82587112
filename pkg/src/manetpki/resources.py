"""Locations of the shipped parameter, fixture and scenario files."""

from importlib import resources
from pathlib import Path


def data_path(name: str) -> Path:
    return Path(str(resources.files("manetpki") / "data" / name))
