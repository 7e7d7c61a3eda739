"""Run configuration: JSON loading, overrides, validation and defaults."""

from __future__ import annotations

import copy
import dataclasses
import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Any

from .dynamics import EmitterConfig
from .lattice import LatticeParams

COMMANDS = (
    "bands",
    "quasienergy-sweep",
    "winding",
    "edge-profile",
    "selfenergy",
    "decay",
    "bound-state",
    "exchange",
    "coupling-profile",
)

FORMATS = ("csv", "json")


class ConfigError(ValueError):
    """Invalid configuration, reported with the offending field path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


# Knob defaults reproduce the matching figure when combined with the shipped
# lattice and emitter settings.
KNOB_DEFAULTS: dict[str, dict[str, Any]] = {
    "bands": {"k_points": 201, "steps": 512, "m": -1},
    "quasienergy-sweep": {"Jp_min": 0.0, "Jp_max": 4.0, "Jp_points": 81, "steps": 512},
    "winding": {"Jp_min": 0.0, "Jp_max": 4.0, "Jp_points": 81, "grid_size": 2001},
    "edge-profile": {"t0_fractions": [0.0, 0.25, 0.5], "steps": 512},
    "selfenergy": {"Delta_min": -5.0, "Delta_max": 5.0, "Delta_points": 401, "eta": [1e-3, 5e-4, 2.5e-4]},
    "decay": {"t_end": 75.0, "samples": 300, "steps": 256},
    "bound-state": {"samples": 16, "steps": 256},
    "exchange": {
        "t_end": None,
        "periods": 3.0,
        "samples": 600,
        "steps": 256,
        "lamb_correction": False,
        "static_control": False,
    },
    "coupling-profile": {"Delta": 0.0, "j_min": -10, "j_max": 10, "bound_state": True, "samples": 16, "steps": 256},
}


@dataclass
class RunConfig:
    """Everything needed to run one CLI command.

    Attributes:
        command: One of COMMANDS.
        lattice: Bath parameters.
        emitters: Emitters, in order.
        knobs: Command-specific settings; see KNOB_DEFAULTS.
        output: Output path, or None for standard output.
        format: "csv" or "json".
    """

    command: str
    lattice: LatticeParams = field(default_factory=LatticeParams)
    emitters: list[EmitterConfig] = field(default_factory=list)
    knobs: dict[str, Any] = field(default_factory=dict)
    output: str | None = None
    format: str = "csv"

    def to_dict(self) -> dict[str, Any]:
        lat = dataclasses.asdict(self.lattice)
        lat["boundary"] = self.lattice.boundary.value
        ems = []
        for e in self.emitters:
            d = dataclasses.asdict(e)
            d["sublattice"] = e.sublattice.value
            ems.append(d)
        return {
            "command": self.command,
            "lattice": lat,
            "emitters": ems,
            "knobs": copy.deepcopy(self.knobs),
            "output": self.output,
            "format": self.format,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RunConfig:
        if not isinstance(data, dict):
            raise ConfigError("", "config must be a JSON object")
        unknown = set(data) - {"command", "lattice", "emitters", "knobs", "output", "format"}
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown top-level key")
        command = data.get("command")
        if command not in COMMANDS:
            raise ConfigError("command", f"must be one of {', '.join(COMMANDS)}, got {command!r}")
        lattice = _build(LatticeParams, data.get("lattice", {}), "lattice")
        raw_emitters = data.get("emitters", [])
        if not isinstance(raw_emitters, list):
            raise ConfigError("emitters", "must be a list")
        emitters = [_build(EmitterConfig, e, f"emitters.{i}") for i, e in enumerate(raw_emitters)]
        for i, e in enumerate(emitters):
            if e.cell > lattice.N:
                raise ConfigError(f"emitters.{i}.cell", f"{e.cell} outside lattice of {lattice.N} cells")
        knobs = _knobs(command, data.get("knobs", {}))
        fmt = data.get("format", "csv")
        if fmt not in FORMATS:
            raise ConfigError("format", f"must be csv or json, got {fmt!r}")
        output = data.get("output")
        if output is not None and not isinstance(output, str):
            raise ConfigError("output", "must be a path string or null")
        return cls(command, lattice, emitters, knobs, output, fmt)


def _build(cls, raw, path):
    if not isinstance(raw, dict):
        raise ConfigError(path, "must be an object")
    names = {f.name: f for f in dataclasses.fields(cls)}
    for key in raw:
        if key not in names:
            raise ConfigError(f"{path}.{key}", "unknown field")
    kwargs = {}
    for key, value in raw.items():
        default = names[key].default
        if isinstance(default, bool) or default is None:
            kwargs[key] = value
        elif isinstance(default, (int, float)) and not isinstance(default, bool):
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{path}.{key}", f"expected a number, got {value!r}")
            kwargs[key] = value
        else:
            kwargs[key] = value
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{path}.{_blamed_field(str(exc), names)}", str(exc)) from None


def _blamed_field(message, names):
    first = message.split()[0] if message else ""
    if first in names:
        return first
    for enum_name, field_name in (("Sublattice", "sublattice"), ("Boundary", "boundary")):
        if enum_name in message and field_name in names:
            return field_name
    return "?"


def _knobs(command, raw):
    if not isinstance(raw, dict):
        raise ConfigError("knobs", "must be an object")
    defaults = KNOB_DEFAULTS[command]
    out = copy.deepcopy(defaults)
    for key, value in raw.items():
        if key not in defaults:
            raise ConfigError(f"knobs.{key}", f"unknown knob for command {command}")
        ref = defaults[key]
        if isinstance(ref, bool):
            ok = isinstance(value, bool)
        elif isinstance(ref, int):
            ok = isinstance(value, int) and not isinstance(value, bool)
        elif isinstance(ref, float):
            ok = isinstance(value, (int, float)) and not isinstance(value, bool)
            value = float(value) if ok else value
        elif isinstance(ref, list):
            ok = isinstance(value, list)
        else:
            ok = value is None or (isinstance(value, (int, float)) and not isinstance(value, bool))
        if not ok:
            raise ConfigError(f"knobs.{key}", f"expected {type(ref).__name__}, got {value!r}")
        out[key] = value
    return out


def default_config_dict(name: str) -> dict[str, Any]:
    """Shipped configuration by name (a command or a figure-panel variant)."""
    try:
        text = resources.files("fwqed").joinpath("configs", f"{name}.json").read_text()
    except FileNotFoundError:
        raise ConfigError("", f"no shipped config named {name!r}") from None
    return json.loads(text)


def shipped_configs() -> list[str]:
    folder = resources.files("fwqed").joinpath("configs")
    return sorted(p.name[:-5] for p in folder.iterdir() if p.name.endswith(".json"))


def parse_override(text: str) -> tuple[list[str], Any]:
    """Split ``a.b.c=value``; the value is parsed as JSON when possible."""
    if "=" not in text:
        raise ConfigError("", f"override {text!r} must look like key=value")
    key, raw = text.split("=", 1)
    key = key.strip()
    if not key:
        raise ConfigError("", f"override {text!r} has an empty key")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.split("."), value


def apply_override(data: dict[str, Any], path: list[str], value: Any) -> None:
    node = data
    for i, part in enumerate(path[:-1]):
        where = ".".join(path[: i + 1])
        if isinstance(node, list):
            if not part.isdigit() or int(part) >= len(node):
                raise ConfigError(where, "no such list element")
            node = node[int(part)]
        elif isinstance(node, dict):
            node = node.setdefault(part, {})
        else:
            raise ConfigError(where, "cannot descend into a scalar")
    last = path[-1]
    if isinstance(node, list):
        if not last.isdigit() or int(last) >= len(node):
            raise ConfigError(".".join(path), "no such list element")
        node[int(last)] = value
    else:
        node[last] = value
