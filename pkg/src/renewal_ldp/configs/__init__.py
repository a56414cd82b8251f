"""Bundled model configurations used by the CLI, tests, and counterexamples."""

from __future__ import annotations

import json
from importlib import resources

from ..errors import ConfigError
from ..model import RenewalModel, model_from_dict


def names() -> tuple[str, ...]:
    files = resources.files(__package__)
    return tuple(sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".json")))


def load(name: str) -> RenewalModel:
    res = resources.files(__package__).joinpath(f"{name}.json")
    if not res.is_file():
        raise ConfigError(f"no bundled config named {name!r}; have {', '.join(names())}")
    return model_from_dict(json.loads(res.read_text(encoding="utf-8")))
