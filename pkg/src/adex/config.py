"""Configuration loading: engine parameters, belief tables, personas, graphs.

One YAML file may carry an `engine` section (EngineConfig overrides) and a
`dbn` section (belief filter tables); persona files carry a `personas` list.
Packaged fixtures are addressable by bare name (e.g. "quarto").
"""

from __future__ import annotations

import dataclasses
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .graph import KnowledgeGraph, load_graph
from .partner import FEATURES, DbnParameters
from .personas import PersonaConfig, PersonaCore, default_personas
from .planning import EngineConfig


class ConfigError(ValueError):
    """Raised with a message naming the offending file and field."""


def _read_yaml(path: Path) -> dict:
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read file: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return data


def resolve_graph(spec: str | Path) -> KnowledgeGraph:
    """Loads a graph from a path, or from the packaged fixtures by name."""
    path = Path(spec)
    if path.exists():
        return load_graph(path)
    fixture = resources.files("adex.data").joinpath(f"{spec}.yaml")
    if fixture.is_file():
        with resources.as_file(fixture) as p:
            return load_graph(p)
    raise ConfigError(f"graph {spec!r}: no such file or packaged fixture")


def engine_config_from(data: dict, source: str) -> EngineConfig:
    cfg = EngineConfig()
    section = data.get("engine", {})
    if not isinstance(section, dict):
        raise ConfigError(f"{source}: engine section must be a mapping")
    valid = {f.name for f in dataclasses.fields(EngineConfig)}
    for key, value in section.items():
        if key not in valid:
            raise ConfigError(f"{source}: unknown engine field {key!r}")
        setattr(cfg, key, value)
    try:
        return cfg.validate()
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def dbn_params_from(data: dict, source: str) -> DbnParameters:
    params = DbnParameters()
    section = data.get("dbn", {})
    if not isinstance(section, dict):
        raise ConfigError(f"{source}: dbn section must be a mapping")
    try:
        if "initial" in section:
            for feature, dist in section["initial"].items():
                if feature not in FEATURES:
                    raise ConfigError(
                        f"{source}: unknown feature {feature!r} in dbn.initial")
                params.initial[feature] = np.asarray(dist, dtype=float)
        if "transitions" in section:
            for feature, rows in section["transitions"].items():
                if feature not in FEATURES:
                    raise ConfigError(
                        f"{source}: unknown feature {feature!r} in dbn.transitions")
                params.transitions[feature] = np.asarray(rows, dtype=float)
        obs = section.get("observations", {})
        for key, attr in (("pos_given_e_a", "pos_given_e_a"),
                          ("neg_given_a", "neg_given_a"),
                          ("sub_given_c_a", "sub_given_c_a"),
                          ("tae_given_l_e", "tae_given_l_e")):
            if key in obs:
                setattr(params, attr, np.asarray(obs[key], dtype=float))
        if "value_map" in section:
            params.value_map = np.asarray(section["value_map"], dtype=float)
        return params.validate()
    except ConfigError:
        raise
    except (ValueError, TypeError, AttributeError) as exc:
        raise ConfigError(f"{source}: dbn section invalid: {exc}") from exc


def load_engine_setup(path: str | Path | None) -> tuple[EngineConfig, DbnParameters]:
    """EngineConfig and DbnParameters from one file; defaults when absent."""
    if path is None:
        return EngineConfig().validate(), DbnParameters().validate()
    path = Path(path)
    data = _read_yaml(path)
    return engine_config_from(data, str(path)), dbn_params_from(data, str(path))


def _persona_core(entry: dict, source: str, name: str) -> PersonaCore:
    try:
        return PersonaCore(
            name=entry.get("name", name),
            p_no=float(entry["p_no"]), p_bc=float(entry["p_bc"]),
            p_s=float(entry["p_s"]), p_pos=float(entry["p_pos"]),
            p_neg=float(entry["p_neg"]))
    except KeyError as exc:
        raise ConfigError(f"{source}: persona {name!r} missing field {exc}") from exc


def load_personas(path: str | Path | None) -> list[PersonaConfig]:
    """Persona profiles from a YAML file, or the built-in evaluation set."""
    if path is None or str(path) == "all":
        return default_personas()
    path = Path(path)
    data = _read_yaml(path)
    entries = data.get("personas")
    if not isinstance(entries, list) or not entries:
        raise ConfigError(f"{path}: missing or empty personas list")
    personas = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict) or "name" not in entry:
            raise ConfigError(f"{path}: personas[{i}] must be a mapping with a name")
        name = str(entry["name"])
        schedule = entry.get("mode_schedule")
        try:
            if schedule:
                moods = [_persona_core(m, str(path), f"{name}/mode{j}")
                         for j, m in enumerate(schedule)]
                persona = PersonaConfig(
                    name=name, mode_schedule=moods,
                    mode_length=int(entry.get("mode_length", 30)),
                    p_polar_question=float(entry.get("p_polar_question", 0.7)))
            else:
                persona = PersonaConfig(
                    name=name, core=_persona_core(entry, str(path), name),
                    p_polar_question=float(entry.get("p_polar_question", 0.7)))
            personas.append(persona.validate())
        except ValueError as exc:
            raise ConfigError(f"{path}: persona {name!r}: {exc}") from exc
    return personas
