"""Registry of the six reference vehicles and JSON (de)serialization helpers."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .model import DroneSpec, JetParameters

_REGISTRY: dict[str, DroneSpec] | None = None


def _key(name: str) -> str:
    return "".join(ch for ch in name.lower() if ch.isalnum())


def load_registry(path: str | Path | None = None) -> dict[str, DroneSpec]:
    """Read a preset registry JSON (a list of drone objects) keyed by lower-case name."""
    if path is None:
        text = resources.files("downwash").joinpath("data/presets.json").read_text()
    else:
        text = Path(path).read_text()
    return {_key(d["name"]): DroneSpec.from_dict(d) for d in json.loads(text)}


def presets() -> dict[str, DroneSpec]:
    global _REGISTRY
    if _REGISTRY is None:
        _REGISTRY = load_registry()
    return dict(_REGISTRY)


def get_preset(name: str) -> DroneSpec:
    """Look up a preset; spaces, case and punctuation are ignored (``"offboard-2"`` works)."""
    reg = presets()
    try:
        return reg[_key(name)]
    except KeyError:
        raise KeyError(f"unknown drone preset {name!r}; known: {', '.join(d.name for d in reg.values())}") from None


def dump_registry(drones, path: str | Path | None = None) -> str:
    text = json.dumps([d.to_dict() for d in drones], indent=2)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


def load_jet_parameters(path: str | Path) -> JetParameters:
    data = json.loads(Path(path).read_text())
    return JetParameters.from_dict(data.get("jet_parameters", data))


def dump_jet_parameters(params: JetParameters, path: str | Path | None = None) -> str:
    text = json.dumps(params.to_dict(), indent=2)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text
