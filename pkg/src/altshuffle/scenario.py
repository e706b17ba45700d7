"""Scenario files: JSON descriptions of simulator runs.

A scenario bundles a protocol configuration, an adversary, a dropout
schedule, the seeds to run, and optional output paths.  Loading is
strict: unknown keys, wrong types, or out-of-range values are rejected
before anything runs, so a scenario that loads is a scenario that
executes.

Shape:

    {
      "config":    {"protocol": "amortized", "n_clients": 24, ...},
      "adversary": {"bad_shuffle": [21], ...},          # optional
      "dropouts":  {"silent_from": {"7": 3}},           # optional
      "seeds":     [0, 1, 2],                           # default [0]
      "outputs":   {"result": "...", "transcript": "..."}  # optional
    }

Integer-keyed maps use string keys in JSON (client ids); the loader
converts them back.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from typing import Any

from .sim import AdversarySpec, DropoutSchedule, ProtocolConfig


class ScenarioError(ValueError):
    """The scenario file does not match the schema."""


@dataclass(frozen=True)
class Scenario:
    config: ProtocolConfig
    adversary: AdversarySpec = field(default_factory=AdversarySpec)
    dropouts: DropoutSchedule = field(default_factory=DropoutSchedule)
    seeds: tuple[int, ...] = (0,)
    outputs: dict = field(default_factory=dict)


def _require(cond: bool, where: str, what: str) -> None:
    if not cond:
        raise ScenarioError(f"{where}: {what}")


def _check_keys(data: dict, allowed: set, where: str) -> None:
    unknown = set(data) - allowed
    _require(not unknown, where, f"unknown keys {sorted(unknown)}")


def _int_value(value: Any, where: str) -> int:
    _require(isinstance(value, int) and not isinstance(value, bool),
             where, f"expected an integer, got {value!r}")
    return value


def _int_list(value: Any, where: str) -> list[int]:
    _require(isinstance(value, list), where, f"expected a list, got {value!r}")
    return [_int_value(v, where) for v in value]


def _int_keyed(value: Any, where: str) -> dict[int, Any]:
    _require(isinstance(value, dict), where, f"expected an object, got {value!r}")
    out = {}
    for key, val in value.items():
        try:
            out[int(key)] = val
        except (TypeError, ValueError):
            raise ScenarioError(f"{where}: key {key!r} is not a client id")
    return out


def _config_from(data: Any) -> ProtocolConfig:
    _require(isinstance(data, dict), "config", f"expected an object, got {data!r}")
    known = {f.name: f.type for f in fields(ProtocolConfig)}
    _check_keys(data, set(known), "config")
    kwargs = {}
    for key, value in data.items():
        if key in ("protocol", "group"):
            _require(isinstance(value, str), f"config.{key}",
                     f"expected a string, got {value!r}")
            kwargs[key] = value
        elif key == "alpha":
            _require(isinstance(value, (int, float)) and not isinstance(value, bool),
                     "config.alpha", f"expected a number, got {value!r}")
            kwargs[key] = float(value)
        else:
            kwargs[key] = _int_value(value, f"config.{key}")
    return ProtocolConfig(**kwargs)


def _adversary_from(data: Any) -> AdversarySpec:
    _require(isinstance(data, dict), "adversary",
             f"expected an object, got {data!r}")
    known = {f.name for f in fields(AdversarySpec)}
    _check_keys(data, known, "adversary")
    kwargs: dict[str, Any] = {}
    for key, value in data.items():
        where = f"adversary.{key}"
        if key in ("bad_offset", "bad_partial_dec", "bad_shuffle",
                   "false_report", "unfounded_report"):
            kwargs[key] = _int_list(value, where)
        elif key in ("bad_share", "go_silent"):
            kwargs[key] = {
                cid: _int_value(v, where)
                for cid, v in _int_keyed(value, where).items()
            }
        elif key == "substitute_input":
            sub = {}
            for cid, v in _int_keyed(value, where).items():
                _require(isinstance(v, str), where,
                         f"expected a hex string, got {v!r}")
                try:
                    bytes.fromhex(v)
                except ValueError:
                    raise ScenarioError(f"{where}: {v!r} is not hex")
                sub[cid] = v
            kwargs[key] = sub
        elif key in ("send_malformed", "send_late"):
            kwargs[key] = {
                cid: _int_list(v, where)
                for cid, v in _int_keyed(value, where).items()
            }
        else:  # pragma: no cover - key set matches the dataclass
            raise ScenarioError(f"{where}: unhandled key")
    return AdversarySpec(**kwargs)


def _dropouts_from(data: Any) -> DropoutSchedule:
    _require(isinstance(data, dict), "dropouts",
             f"expected an object, got {data!r}")
    _check_keys(data, {"silent_from"}, "dropouts")
    silent = {
        cid: _int_value(v, "dropouts.silent_from")
        for cid, v in _int_keyed(data.get("silent_from", {}),
                                 "dropouts.silent_from").items()
    }
    return DropoutSchedule(silent_from=silent)


def scenario_from_dict(data: Any) -> Scenario:
    _require(isinstance(data, dict), "scenario",
             f"expected a JSON object, got {data!r}")
    _check_keys(data, {"config", "adversary", "dropouts", "seeds", "outputs"},
                "scenario")
    _require("config" in data, "scenario", "missing required key 'config'")
    config = _config_from(data["config"])
    adversary = _adversary_from(data.get("adversary", {}))
    dropouts = _dropouts_from(data.get("dropouts", {}))
    seeds = data.get("seeds", [0])
    _require(isinstance(seeds, list) and seeds, "seeds",
             "expected a non-empty list")
    seeds = tuple(_int_value(s, "seeds") for s in seeds)
    outputs = data.get("outputs", {})
    _require(isinstance(outputs, dict), "outputs",
             f"expected an object, got {outputs!r}")
    _check_keys(outputs, {"result", "transcript"}, "outputs")
    for key, value in outputs.items():
        _require(isinstance(value, str) and value, f"outputs.{key}",
                 f"expected a path, got {value!r}")
    config.validate()
    return Scenario(config=config, adversary=adversary, dropouts=dropouts,
                    seeds=seeds, outputs=dict(outputs))


def load_scenario(path: str) -> Scenario:
    """Read and validate one scenario file.

    I/O failures propagate as OSError; content problems raise
    ScenarioError (bad JSON included).
    """
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path} is not valid JSON: {exc}") from exc
    return scenario_from_dict(data)
