"""Shipped fixtures: the four-stage demo attack graph (scan, ftp overflow,
agent install, flood), its signatures, a runnable profile, and the default
immune configuration."""

from importlib import resources
from pathlib import Path


def _path(name: str) -> Path:
    with resources.as_file(resources.files(__package__) / name) as p:
        return Path(p)


def g1_graph_path() -> Path:
    return _path("g1_graph.json")


def g1_signatures_path() -> Path:
    return _path("g1_signatures.json")


def g1_profile_path() -> Path:
    return _path("g1_profile.json")


def default_config_path() -> Path:
    return _path("default_config.json")
