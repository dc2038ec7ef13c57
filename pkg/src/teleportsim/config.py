"""JSON experiment configuration.

Every section is optional; omitted values take the defaults of the
dataclasses below. Unknown keys are rejected. All angles are in degrees.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .counts import TRINE_DEG, NoiseModel
from .optics import ElementSpec
from .teleport import PrepSpec


class ConfigError(ValueError):
    """Invalid configuration; ``str()`` is a ``file:line: message`` diagnostic."""


def load_schema(name: str) -> dict:
    return json.loads(resources.files(__package__).joinpath("schemas", name).read_text())


@dataclass(frozen=True)
class OutputPaths:
    dir: str = "."
    csv: str = "fringes.csv"
    summary: str = "summary.json"


@dataclass(frozen=True)
class ExperimentConfig:
    preparation: PrepSpec = field(default_factory=lambda: PrepSpec(22.5))
    noise: NoiseModel = field(default_factory=NoiseModel)
    pairs_per_point: int = 1000
    analyzer_grid: tuple[float, ...] = tuple(np.arange(-90.0, 90.0, 2.0).tolist())
    seed: int = 0
    output: OutputPaths = field(default_factory=OutputPaths)
    elements: tuple[ElementSpec, ...] = ()
    ensemble_angles: tuple[float, ...] = TRINE_DEG
    ensemble_probs: tuple[float, ...] | None = None
    outcomes: int = 2
    restarts: int = 50
    resolution: int = 128
    verify_states: tuple[float, ...] = TRINE_DEG
    pairs_per_cell: int = 1000

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentConfig:
        jsonschema.validate(d, load_schema("config.schema.json"))
        kw: dict = {}
        if "preparation" in d:
            p = d["preparation"]
            kw["preparation"] = PrepSpec(p.get("theta_deg", 0.0), p.get("gamma_deg"))
        if "noise" in d:
            n = d["noise"]
            kw["noise"] = NoiseModel(
                visibility=n.get("visibility", 1.0),
                detector_eff=tuple(np.broadcast_to(n.get("detector_eff", 1.0), (2,)).tolist()),
                dark_rate=n.get("dark_rate", 0.0),
                phase_drift_std=float(np.radians(n.get("phase_drift_std_deg", 0.0))),
                window=n.get("window_s", 1.0),
            )
        if "pairs_per_point" in d:
            kw["pairs_per_point"] = d["pairs_per_point"]
        if "analyzer_grid_deg" in d:
            g = d["analyzer_grid_deg"]
            if isinstance(g, dict):
                g = np.arange(g["start"], g["stop"], g["step"]).tolist()
            kw["analyzer_grid"] = tuple(float(x) for x in g)
        if "seed" in d:
            kw["seed"] = d["seed"]
        if "output" in d:
            kw["output"] = OutputPaths(**d["output"])
        if "elements" in d:
            kw["elements"] = tuple(
                ElementSpec(e["kind"], e.get("angle_deg", 0.0), e.get("photon", 1), e.get("path", "b"))
                for e in d["elements"]
            )
        if "ensemble" in d:
            e = d["ensemble"]
            kw["ensemble_angles"] = tuple(e.get("angles_deg", TRINE_DEG))
            if e.get("probs") is not None:
                kw["ensemble_probs"] = tuple(e["probs"])
        if "bound" in d:
            kw.update({k: v for k, v in d["bound"].items()})
        if "verify" in d:
            v = d["verify"]
            if "states_deg" in v:
                kw["verify_states"] = tuple(v["states_deg"])
            if "pairs_per_cell" in v:
                kw["pairs_per_cell"] = v["pairs_per_cell"]
        return cls(**kw)


def _line_of(text: str, key: str | None) -> int:
    if key is None:
        return 1
    m = re.search(r'"' + re.escape(str(key)) + r'"\s*:', text)
    return text.count("\n", 0, m.start()) + 1 if m else 1


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    """Parse and validate; raises :class:`ConfigError` with a line number."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{source}:1: top level must be a JSON object")
    try:
        return ExperimentConfig.from_dict(raw)
    except jsonschema.ValidationError as exc:
        key = None
        if exc.validator == "additionalProperties":
            m = re.search(r"'([^']+)' was unexpected", exc.message)
            key = m.group(1) if m else None
        elif exc.absolute_path:
            key = next((k for k in reversed(exc.absolute_path) if isinstance(k, str)), None)
        where = "/".join(map(str, exc.absolute_path)) or "<root>"
        raise ConfigError(f"{source}:{_line_of(text, key)}: {where}: {exc.message}") from None
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{source}:1: {exc}") from None


def load_config(path: str | Path | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}:0: {exc.strerror}") from None
    return parse_config(text, str(path))
