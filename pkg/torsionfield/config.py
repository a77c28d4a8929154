"""
Copyright (c) torsionfield authors 2026. All Rights Reserved.
Project name: torsionfield
This project is licensed under the MIT License, see LICENSE

Experiment configuration: defaults, JSON files, command line overrides and
schema validation
"""
import copy
import json
import logging
import os

import jsonschema
import numpy as np

from .geometry import MANIFOLDS, get_manifold
from .randomField import FieldSpec
from .reports import SCHEMA_VERSION, config_hash


log = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "TORSIONFIELD_OUTPUT_DIR"
DEGENERATE_POLICIES = ("resample-and-report", "abort")
CURVE_KINDS = ("auto", "latitude", "line", "geodesic")

DEFAULT_CONFIG = {
    "schema": SCHEMA_VERSION,
    "manifold": {"name": "sphere", "params": {"radius": 1.0}},
    "field_spec": {"basis": "auto", "N": 64, "alpha_exp": 3.0, "c": 0.1, "seed": 0},
    "integrator": {"h": 1e-3, "T": 1.0, "p0": None, "v0": [1.0, 0.0]},
    "curve": {"kind": "auto", "latitude": np.pi / 3, "start": None, "direction": [1.0, 0.0], "length": 1.0},
    "probe": {"point": None, "n_points": 10, "seed": 0},
    "monte_carlo": {"n_samples": 10000, "n_realizations": 200, "master_seed": 0,
                    "degenerate_policy": "resample-and-report"},
    "quadrature": {"n_theta": 64, "n_phi": 128},
    "verify": {"n_points": 100, "n_mc": 10000, "n_paths": 10000,
               "manifolds": ["flat-torus", "sphere", "half-plane"]},
    "output": {"directory": "results", "formats": ["json", "csv"]},
}

ALIASES = {
    "c": "field_spec.c",
    "N": "field_spec.N",
    "alpha_exp": "field_spec.alpha_exp",
    "basis": "field_spec.basis",
    "manifold": "manifold.name",
    "radius": "manifold.params.radius",
    "latitude": "curve.latitude",
    "seed": "field_spec.seed",
    "h": "integrator.h",
    "T": "integrator.T",
    "n_paths": "verify.n_paths",
    "n_theta": "quadrature.n_theta",
    "n_phi": "quadrature.n_phi",
    "output": "output.directory",
}

_NUMBER = {"type": "number"}
_POSITIVE = {"type": "number", "exclusiveMinimum": 0}
_POSITIVE_INT = {"type": "integer", "minimum": 1}
_SEED = {"type": "integer", "minimum": 0}
_VECTOR = {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2}
_OPTIONAL_VECTOR = {"anyOf": [_VECTOR, {"type": "null"}]}

def _section(properties, required=None):
    return {
        "type": "object",
        "properties": properties,
        "required": sorted(properties) if required is None else required,
        "additionalProperties": False,
    }

CONFIG_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "manifold": _section({
            "name": {"enum": sorted(MANIFOLDS)},
            "params": _section({"radius": _POSITIVE}, required=[]),
        }),
        "field_spec": _section({
            "basis": {"enum": ["auto", "torus-fourier", "sphere-harmonics", "bumps"]},
            "N": _POSITIVE_INT,
            "alpha_exp": {"type": "number", "exclusiveMinimum": 2},
            "c": {"type": "number", "minimum": 0},
            "seed": _SEED,
        }),
        "integrator": _section({
            "h": _POSITIVE,
            "T": _POSITIVE,
            "p0": _OPTIONAL_VECTOR,
            "v0": _VECTOR,
        }),
        "curve": _section({
            "kind": {"enum": list(CURVE_KINDS)},
            "latitude": _POSITIVE,
            "start": _OPTIONAL_VECTOR,
            "direction": _VECTOR,
            "length": _POSITIVE,
        }),
        "probe": _section({
            "point": _OPTIONAL_VECTOR,
            "n_points": _POSITIVE_INT,
            "seed": _SEED,
        }),
        "monte_carlo": _section({
            "n_samples": {"type": "integer", "minimum": 2},
            "n_realizations": {"type": "integer", "minimum": 2},
            "master_seed": _SEED,
            "degenerate_policy": {"enum": list(DEGENERATE_POLICIES)},
        }),
        "quadrature": _section({
            "n_theta": {"type": "integer", "minimum": 2},
            "n_phi": {"type": "integer", "minimum": 2},
        }),
        "verify": _section({
            "n_points": _POSITIVE_INT,
            "n_mc": {"type": "integer", "minimum": 2},
            "n_paths": {"type": "integer", "minimum": 2},
            "manifolds": {"type": "array", "items": {"enum": sorted(MANIFOLDS)}, "minItems": 1,
                          "uniqueItems": True},
        }),
        "output": _section({
            "directory": {"type": "string", "minLength": 1},
            "formats": {"type": "array", "items": {"enum": ["json", "csv"]}, "uniqueItems": True},
        }),
    },
    "required": sorted(DEFAULT_CONFIG),
    "additionalProperties": False,
}

class ConfigError(ValueError):
    """
    Configuration that does not satisfy the schema

    :param message: description of the violation
    :type message: str
    :param path: dotted path of the offending field
    :type path: str
    """
    def __init__(self, message, path=""):
        super(ConfigError, self).__init__("{0}: {1}".format(path, message) if path else message)
        self.path = path

def _merge(base, update):
    merged = copy.deepcopy(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged

def _parse_value(text):
    try:
        return json.loads(text)
    except ValueError:
        return text

def parse_overrides(args):
    """
    Turn ``--key value`` pairs into a dict of dotted paths

    Keys may be dotted paths (``--field_spec.c``) or short aliases (``--c``),
    values are parsed as JSON when possible, ``--key=value`` is accepted too.

    :param args: remaining command line arguments
    :type args: list
    :returns: mapping of dotted path to value
    :rtype: dict
    :raises ConfigError: for dangling or positional arguments
    """
    overrides = {}
    remaining = list(args)
    while remaining:
        argument = remaining.pop(0)
        if not argument.startswith("--"):
            raise ConfigError("unexpected argument '{0}'".format(argument))
        key = argument[2:]
        if "=" in key:
            key, text = key.split("=", 1)
        elif remaining:
            text = remaining.pop(0)
        else:
            raise ConfigError("'--{0}' needs a value".format(key))
        overrides[ALIASES.get(key, key)] = _parse_value(text)
    return overrides

def _set_path(config, path, value):
    keys = path.split(".")
    node = config
    for key in keys[:-1]:
        if key not in node:
            raise ConfigError("unknown configuration key", path)
        if not isinstance(node[key], dict):
            raise ConfigError("'{0}' is not a section".format(key), path)
        node = node[key]
    node[keys[-1]] = value

def validate_config(config):
    """
    :raises ConfigError: naming the dotted path of the first violation
    """
    validator = jsonschema.Draft7Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(config), key=lambda error: list(error.absolute_path))
    if errors:
        error = errors[0]
        path = ".".join(str(part) for part in error.absolute_path)
        if error.validator in ("additionalProperties", "required") and not path:
            path = "<root>"
        raise ConfigError(error.message, path)
    return config

class ExperimentConfig(object):
    """
    Validated, fully resolved experiment configuration

    :param resolved: configuration with every default filled in
    :type resolved: dict
    """
    def __init__(self, resolved):
        self.resolved = validate_config(resolved)

    def __repr__(self):
        return "ExperimentConfig(manifold={0}, hash={1})".format(self.resolved["manifold"]["name"], self.hash[:12])

    def __getitem__(self, section):
        return self.resolved[section]

    @property
    def hash(self):
        return config_hash(self.resolved)

    @property
    def seed(self):
        return self.resolved["field_spec"]["seed"]

    @property
    def outputDirectory(self):
        return self.resolved["output"]["directory"]

    @staticmethod
    def defaults():
        resolved = copy.deepcopy(DEFAULT_CONFIG)
        if os.environ.get(OUTPUT_DIR_ENV):
            resolved["output"]["directory"] = os.environ[OUTPUT_DIR_ENV]
        return resolved

    @staticmethod
    def from_dict(config, overrides=None):
        """
        Merge a (partial) configuration over the defaults and apply overrides

        :param config: partial configuration
        :type config: dict
        :param overrides: dotted path to value
        :type overrides: dict
        :returns: validated configuration
        :rtype: :class:`ExperimentConfig`
        """
        resolved = _merge(ExperimentConfig.defaults(), config or {})
        for path, value in sorted((overrides or {}).items()):
            _set_path(resolved, path, value)
        return ExperimentConfig(resolved)

    @staticmethod
    def from_file(configFileName=None, overrides=None):
        """
        Load the JSON configuration file, if any, over the defaults

        :param configFileName: path of a JSON configuration file
        :type configFileName: str
        :returns: validated configuration
        :rtype: :class:`ExperimentConfig`
        """
        config = {}
        if configFileName:
            fileName = os.path.expanduser(configFileName)
            try:
                with open(fileName) as configFile:
                    config = json.load(configFile)
            except (IOError, OSError) as error:
                raise ConfigError("cannot read '{0}': {1}".format(fileName, error))
            except ValueError as error:
                raise ConfigError("'{0}' is not valid JSON: {1}".format(fileName, error))
            if not isinstance(config, dict):
                raise ConfigError("'{0}' needs to contain a JSON object".format(fileName))
            log.debug("Loaded configuration '%s'", fileName)
        return ExperimentConfig.from_dict(config, overrides)

    def with_overrides(self, overrides):
        return ExperimentConfig.from_dict(self.resolved, overrides)

    def build_manifold(self, name=None):
        section = self.resolved["manifold"]
        return get_manifold(name or section["name"], **dict(section["params"]))

    def build_field_spec(self, manifold=None):
        manifold = manifold or self.build_manifold()
        section = self.resolved["field_spec"]
        return FieldSpec(manifold, section["basis"], section["N"], section["alpha_exp"], section["c"])

    def to_dict(self):
        return copy.deepcopy(self.resolved)
