"""Scenario configuration files.

A scenario is a JSON object::

    {
      "schema_version": 1,
      "landscape": {
        "platforms": [{"id": "A", "traffic_weight": 1, "dwell_time": 50}, ...],
        "personalities": [
          {"id": "P", "presence": ["A", "B"], "attraction": {"A": 1, "B": 1},
           "pool": {"enabled": true, "pick_probability": 0.5, "dwell_multiplier": 2}}
        ],
        "return_weight": 1.0,
        "schedule": {"kind": "geometric", "base": 0.5}
      },
      "start": {"personality": "P", "platform": "A"},
      "run": {"n_trips": 100000, "master_seed": 42, "depth_cutoff": 64, "n_jobs": 1},
      "revenue": {"cpc": 2.0, "cpm": 7.0},
      "heterogeneity": {
        "profiles": [{"type_label": "A", "preferred_length": 10, "width": 15}, ...],
        "pool_lengths": [20], "learning_rate": 0.5, "steps": 10,
        "grid_resolution": 0.01, "search_interval": [1, 60]
      }
    }

Every section except ``landscape`` and ``start`` is optional. ``attraction``
may be a single number applied to every platform of the presence.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import PollinateError
from .heterogeneity import EngagementProfile
from .landscape import Diagnostic, Landscape, landscape_from_dict, validate_landscape
from .revenue import RevenueParams
from .trips import DEFAULT_DEPTH_CUTOFF

SCHEMA_VERSION = 1


class ConfigError(PollinateError, ValueError):
    code = "ConfigError"

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


@dataclass(frozen=True)
class RunParams:
    n_trips: int = 100_000
    master_seed: int = 0
    depth_cutoff: int = DEFAULT_DEPTH_CUTOFF
    n_jobs: int = 1


@dataclass(frozen=True)
class HeteroSpec:
    profiles: tuple = ()
    pool_lengths: tuple = ()
    learning_rate: float = 0.5
    steps: int = 10
    grid_resolution: float = 0.01
    search_interval: tuple | None = None


@dataclass(frozen=True)
class ScenarioConfig:
    landscape: Landscape
    start_personality: str
    start_platform: str
    run: RunParams = RunParams()
    revenue: RevenueParams = RevenueParams()
    heterogeneity: HeteroSpec | None = None
    raw: dict = field(default_factory=dict, compare=False)


def _hetero_from_dict(d) -> HeteroSpec:
    profiles = tuple(
        EngagementProfile(str(p.get("type_label", i)), float(p["preferred_length"]), float(p["width"]))
        for i, p in enumerate(d.get("profiles", []))
    )
    interval = d.get("search_interval")
    return HeteroSpec(
        profiles=profiles,
        pool_lengths=tuple(float(x) for x in d.get("pool_lengths", [])),
        learning_rate=float(d.get("learning_rate", 0.5)),
        steps=int(d.get("steps", 10)),
        grid_resolution=float(d.get("grid_resolution", 0.01)),
        search_interval=None if interval is None else (float(interval[0]), float(interval[1])),
    )


def config_from_dict(d: dict) -> ScenarioConfig:
    """Build and validate a scenario; raises :class:`ConfigError` with diagnostics."""
    diags = []
    version = d.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        diags.append(Diagnostic("UnsupportedSchemaVersion", f"schema_version {version!r}"))
    if "landscape" not in d:
        raise ConfigError([Diagnostic("MissingSection", "config has no 'landscape'")])
    try:
        landscape = landscape_from_dict(d["landscape"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError([Diagnostic("MalformedLandscape", repr(exc))]) from None
    diags.extend(validate_landscape(landscape))

    start = d.get("start", {})
    person, platform = start.get("personality"), start.get("platform")
    if person not in landscape.personality_index:
        diags.append(Diagnostic("UnknownStartPersonality", f"{person!r}"))
    if platform not in landscape.platform_index:
        diags.append(Diagnostic("UnknownStartPlatform", f"{platform!r}"))

    try:
        run = RunParams(**d.get("run", {}))
        rev = RevenueParams(**d.get("revenue", {}))
        hetero = _hetero_from_dict(d["heterogeneity"]) if "heterogeneity" in d else None
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(diags + [Diagnostic("MalformedSection", repr(exc))]) from None
    if run.n_trips < 1:
        diags.append(Diagnostic("InvalidTripCount", f"n_trips {run.n_trips}"))
    if run.depth_cutoff < 0:
        diags.append(Diagnostic("InvalidDepthCutoff", f"depth_cutoff {run.depth_cutoff}"))
    if diags:
        raise ConfigError(diags)
    return ScenarioConfig(landscape, person, platform, run, rev, hetero, raw=d)


def load_config(path) -> ScenarioConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError([Diagnostic("ConfigNotReadable", str(exc))]) from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([Diagnostic("MalformedJson", str(exc))]) from None
    return config_from_dict(data)


def s1_config(base=0.0, n_trips=100_000, master_seed=42, depth_cutoff=DEFAULT_DEPTH_CUTOFF):
    """The reference three-platform scenario as a config dict."""
    from .landscape import landscape_to_dict, scenario_s1

    return {
        "schema_version": SCHEMA_VERSION,
        "landscape": landscape_to_dict(scenario_s1(base)),
        "start": {"personality": "P", "platform": "A"},
        "run": {"n_trips": n_trips, "master_seed": master_seed, "depth_cutoff": depth_cutoff},
    }
