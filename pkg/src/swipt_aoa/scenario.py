"""Scenario files: JSON with unit-suffixed fields.

Example::

    {
      "channel": {
        "p_tx1_w": 0.01, "p_tx2_w": 1.0, "p_noise_dbm": -50,
        "d1": 1, "d2": 2, "alpha1": 4, "alpha2": 4,
        "upsilon1": 1, "upsilon2": 1, "rho": 0.99,
        "gamma_d_db": -10, "gamma_e_db": -10
      },
      "policy": {"q1": 1, "q2": 1},
      "battery": "infinite",
      "thresholds": {"aoi": 5, "aoa": 5},
      "sim": {"horizon": 1000000, "replications": 20, "seed": 42}
    }

Power-like quantities (``p_tx1``, ``p_tx2``, ``p_noise``) take exactly one of
the suffixes ``_w`` or ``_dbm``; SINR/energy thresholds (``gamma_d``,
``gamma_e``) take exactly one of ``_lin`` or ``_db``. Everything is stored
in linear units once loaded, and :func:`save_scenario` writes the linear
variants so a save/load round trip is exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path
from typing import Optional

from .channel import ChannelParams
from .metrics import AccessPolicy, Battery
from .sim import SimConfig

__all__ = [
    "ScenarioError",
    "Scenario",
    "dbm_to_watt",
    "db_to_linear",
    "load_scenario",
    "parse_scenario",
    "parse_battery",
    "save_scenario",
    "scenario_to_dict",
    "bundled_scenario",
    "BUNDLED",
]

BUNDLED = ("setup1", "setup2")

_POWER = ("p_tx1", "p_tx2", "p_noise")
_RATIO = ("gamma_d", "gamma_e")
_PLAIN = ("d1", "d2", "alpha1", "alpha2", "upsilon1", "upsilon2", "rho")


class ScenarioError(ValueError):
    """Parse or validation failure, with the offending field in the message."""


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass
class Scenario:
    channel: ChannelParams
    policy: AccessPolicy = field(default_factory=lambda: AccessPolicy(1.0, 1.0))
    battery: Battery = field(default_factory=Battery)
    aoi_threshold: int = 5
    aoa_threshold: int = 5
    sim: Optional[SimConfig] = None
    name: str = ""


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{where}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ScenarioError(f"{where}: must be finite, got {value!r}")
    return float(value)


def _one_of(raw: dict, base: str, variants: dict, where: str) -> float:
    present = [s for s in variants if f"{base}{s}" in raw]
    if not present:
        keys = " or ".join(f"{base}{s}" for s in variants)
        raise ScenarioError(f"{where}.{base}: missing; give {keys}")
    if len(present) > 1:
        keys = ", ".join(f"{base}{s}" for s in present)
        raise ScenarioError(f"{where}.{base}: give exactly one unit variant, found {keys}")
    key = f"{base}{present[0]}"
    return variants[present[0]](_number(raw[key], f"{where}.{key}"))


def _parse_channel(raw) -> ChannelParams:
    if not isinstance(raw, dict):
        raise ScenarioError("channel: expected an object")
    known = set(_PLAIN)
    kwargs = {}
    for base in _POWER:
        kwargs[base] = _one_of(raw, base, {"_w": float, "_dbm": dbm_to_watt}, "channel")
        known.update({f"{base}_w", f"{base}_dbm"})
    for base in _RATIO:
        kwargs[base] = _one_of(raw, base, {"_lin": float, "_db": db_to_linear}, "channel")
        known.update({f"{base}_lin", f"{base}_db"})
    for name in _PLAIN:
        if name not in raw:
            raise ScenarioError(f"channel.{name}: missing")
        kwargs[name] = _number(raw[name], f"channel.{name}")
    extra = sorted(set(raw) - known)
    if extra:
        raise ScenarioError(f"channel: unknown field(s) {', '.join(extra)}")
    try:
        return ChannelParams(**kwargs)
    except ValueError as exc:
        raise ScenarioError(f"channel.{exc}") from None


def _parse_policy(raw) -> AccessPolicy:
    if not isinstance(raw, dict):
        raise ScenarioError("policy: expected an object with q1 and q2")
    for name in ("q1", "q2"):
        if name not in raw:
            raise ScenarioError(f"policy.{name}: missing")
        value = _number(raw[name], f"policy.{name}")
        if not 0 <= value <= 1:
            raise ScenarioError(f"policy.{name}: must lie in [0, 1], got {raw[name]!r}")
    return AccessPolicy(float(raw["q1"]), float(raw["q2"]))


def parse_battery(raw) -> Battery:
    """Battery from ``"infinite"``, ``null``, an integer, or ``{"capacity": m}``."""
    if isinstance(raw, dict):
        raw = raw.get("capacity")
    if raw is None or (isinstance(raw, str) and raw.lower() in ("inf", "infinite")):
        return Battery()
    if isinstance(raw, str):
        try:
            raw = int(raw)
        except ValueError:
            raise ScenarioError(f"battery: expected 'infinite' or an integer, got {raw!r}") from None
    if isinstance(raw, bool) or not isinstance(raw, int) or raw < 1:
        raise ScenarioError(f"battery: capacity must be an integer >= 1, got {raw!r}")
    return Battery(raw)


def _parse_threshold(raw, name):
    if isinstance(raw, bool) or not isinstance(raw, int) or raw < 1:
        raise ScenarioError(f"thresholds.{name}: must be an integer >= 1, got {raw!r}")
    return raw


def _parse_sim(raw) -> SimConfig:
    if not isinstance(raw, dict):
        raise ScenarioError("sim: expected an object")
    allowed = {f.name for f in fields(SimConfig)}
    extra = sorted(set(raw) - allowed)
    if extra:
        raise ScenarioError(f"sim: unknown field(s) {', '.join(extra)}")
    try:
        return SimConfig(**raw)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"sim: {exc}") from None


def parse_scenario(data: dict, name: str = "") -> Scenario:
    """Build a :class:`Scenario` from already decoded JSON."""
    if not isinstance(data, dict):
        raise ScenarioError("scenario: expected a JSON object at the top level")
    allowed = {"channel", "policy", "battery", "thresholds", "sim", "name", "description"}
    extra = sorted(set(data) - allowed)
    if extra:
        raise ScenarioError(f"scenario: unknown field(s) {', '.join(extra)}")
    if "channel" not in data:
        raise ScenarioError("channel: missing")
    scen = Scenario(channel=_parse_channel(data["channel"]), name=data.get("name", name))
    if "policy" in data:
        scen.policy = _parse_policy(data["policy"])
    if "battery" in data:
        scen.battery = parse_battery(data["battery"])
    thr = data.get("thresholds", {})
    if not isinstance(thr, dict):
        raise ScenarioError("thresholds: expected an object")
    scen.aoi_threshold = _parse_threshold(thr.get("aoi", 5), "aoi")
    scen.aoa_threshold = _parse_threshold(thr.get("aoa", 5), "aoa")
    if data.get("sim") is not None:
        scen.sim = _parse_sim(data["sim"])
    return scen


def _read_text(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read scenario {path}: {exc.strerror or exc}") from exc


def load_scenario(path) -> Scenario:
    """Read a scenario file, or a bundled one by name (``setup1``, ``setup2``).

    Raises:
        ScenarioError: malformed JSON (with line and column) or invalid fields.
        OSError: the file cannot be read.
    """
    p = Path(path)
    if not p.exists() and str(path) in BUNDLED:
        return bundled_scenario(str(path))
    text = _read_text(p)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return parse_scenario(data, name=p.stem)


def bundled_scenario(name: str) -> Scenario:
    if name not in BUNDLED:
        raise ScenarioError(f"unknown bundled scenario {name!r}; choose from {BUNDLED}")
    text = resources.files("swipt_aoa.data").joinpath(f"{name}.json").read_text()
    return parse_scenario(json.loads(text), name=name)


def scenario_to_dict(scen: Scenario) -> dict:
    ch = scen.channel
    channel = {f"{b}_w": getattr(ch, b) for b in _POWER}
    channel.update({f"{b}_lin": getattr(ch, b) for b in _RATIO})
    channel.update({b: getattr(ch, b) for b in _PLAIN})
    out = {
        "channel": channel,
        "policy": {"q1": scen.policy.q1, "q2": scen.policy.q2},
        "battery": "infinite" if scen.battery.capacity is None else scen.battery.capacity,
        "thresholds": {"aoi": scen.aoi_threshold, "aoa": scen.aoa_threshold},
    }
    if scen.name:
        out["name"] = scen.name
    if scen.sim is not None:
        out["sim"] = asdict(scen.sim)
    return out


def save_scenario(scen: Scenario, path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(scen), indent=2) + "\n")
