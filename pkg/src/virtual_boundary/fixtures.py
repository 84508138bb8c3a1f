"""Pinned regression values (period lengths) produced by the grid oracle."""
from __future__ import annotations

import json
from importlib import resources

FIXTURE_VERSION = 1


def load_fixtures() -> dict:
    text = resources.files("virtual_boundary").joinpath("data/fixtures.json").read_text()
    data = json.loads(text)
    if data.get("version") != FIXTURE_VERSION:
        raise ValueError(f"fixture file version {data.get('version')} != {FIXTURE_VERSION}")
    return data


def pinned_periods() -> dict[str, float]:
    """Period lengths keyed by ``f"{eps:.12g}"``."""
    return {k: float(v["period"]) for k, v in load_fixtures()["periods"].items()}
