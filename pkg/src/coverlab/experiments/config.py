"""Experiment configuration files.

Configs are INI files with the sections ``[experiment]``, ``[space]``,
``[mu]``, ``[model]``, ``[params]`` and ``[tolerances]``. Values are typed
by key (see ``FIELD_TYPES``); lists are comma separated. A config may list
other files in ``experiment.include`` (paths relative to the including
file); included files are read first and the including file overrides them
key by key.

Validation errors name the offending field as ``section.key``.
"""

import configparser
import copy
import os
from dataclasses import dataclass, field

import jsonschema

KINDS = (
    "fixed-concentration",
    "growth-concentration",
    "pch",
    "min-mu-search",
    "segment-example",
    "subset-kappa",
    "bounds-report",
    "even-vs-uniform",
)

SECTIONS = ("experiment", "space", "mu", "model", "params", "tolerances")

# key -> value type; "floats", "ints", "strs" are comma-separated lists,
# "points" are comma-separated points whose coordinates are space separated,
# "edges" are comma-separated "u-v:length" triples.
FIELD_TYPES = {
    "experiment": {
        "kind": "str", "name": "str", "seed": "int", "reps": "int", "n_jobs": "int",
        "output_dir": "str", "include": "strs",
    },
    "space": {
        "kind": "str", "L": "float", "L1": "float", "L2": "float", "m": "int", "d": "float",
        "file": "str", "n_vertices": "int", "edges": "edges",
    },
    "mu": {
        "kind": "str", "points": "points", "weights": "floats", "atom_weight": "float",
        "n_atoms": "int", "offset": "float",
    },
    "model": {"lam": "float", "v": "float", "r0": "float"},
    "params": {
        "r0_values": "floats", "eps": "float", "L_values": "floats", "net_eps": "float",
        "a_grid": "floats", "r_grid": "floats", "gap_L": "float", "gap_reps": "int",
        "uncovered_reps": "int", "arc_length": "float", "support_size": "int",
        "iters": "int", "construction_reps": "int", "n": "float", "samplers": "strs",
        "outer_reps": "int", "inner_reps": "int", "chains": "strs", "chain_reps": "int",
        "models": "strs", "step": "float",
    },
    "tolerances": {
        "ks_pch": "float", "ks_trend_slack": "float", "gap_mean_rel": "float",
        "ks_gap": "float", "min_conditioned": "int", "segment_sup": "float",
        "segment_atom": "float", "kappa_guard": "float",
    },
}

# params keys each experiment kind accepts
KIND_PARAMS = {
    "fixed-concentration": {"r0_values", "eps"},
    "growth-concentration": {"L_values", "net_eps", "a_grid"},
    "pch": {"L_values", "gap_L", "gap_reps", "uncovered_reps", "arc_length"},
    "min-mu-search": {"support_size", "iters", "construction_reps", "r_grid", "step"},
    "segment-example": {"n"},
    "subset-kappa": {"samplers", "outer_reps", "inner_reps", "chains", "chain_reps"},
    "bounds-report": {"r_grid", "a_grid", "net_eps"},
    "even-vs-uniform": {"models"},
}

# Spaces each kind accepts (None: any space)
KIND_SPACES = {
    "fixed-concentration": None,
    "growth-concentration": None,
    "pch": (),
    "min-mu-search": ("circle", "segment", "finite"),
    "segment-example": (),
    "subset-kappa": (),
    "bounds-report": None,
    "even-vs-uniform": ("circle",),
}

DEFAULTS = {
    "experiment": {"reps": 1000, "n_jobs": -1, "output_dir": "coverlab-output"},
    "space": {},
    "mu": {"kind": "uniform"},
    "model": {"lam": 1.0, "v": 1.0},
    "params": {},
    "tolerances": {
        "ks_pch": 0.1, "ks_trend_slack": 0.02, "gap_mean_rel": 0.05, "ks_gap": 0.05,
        "min_conditioned": 1000, "segment_sup": 0.05, "segment_atom": 0.03,
        "kappa_guard": 10.0,
    },
}

_pos = {"type": "number", "exclusiveMinimum": 0}
_pos_int = {"type": "integer", "minimum": 1}
_pos_list = {"type": "array", "items": _pos, "minItems": 1}

SCHEMA = {
    "type": "object",
    "required": ["experiment"],
    "properties": {
        "experiment": {
            "type": "object",
            "required": ["kind", "seed"],
            "properties": {
                "kind": {"enum": list(KINDS)},
                "name": {"type": "string", "pattern": r"^[A-Za-z0-9_.-]+$"},
                "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
                "reps": {"type": "integer", "minimum": 2},
                "n_jobs": {"type": "integer", "not": {"const": 0}},
                "output_dir": {"type": "string", "minLength": 1},
            },
        },
        "space": {
            "type": "object",
            "properties": {
                "kind": {"enum": ["circle", "segment", "torus", "finite", "graph"]},
                "L": _pos, "L1": _pos, "L2": _pos, "d": _pos, "m": _pos_int,
                "n_vertices": _pos_int,
            },
            "allOf": [
                {"if": {"properties": {"kind": {"enum": ["circle", "segment"]}},
                        "required": ["kind"]},
                 "then": {"required": ["L"]}},
                {"if": {"properties": {"kind": {"const": "torus"}}, "required": ["kind"]},
                 "then": {"required": ["L1", "L2"]}},
                {"if": {"properties": {"kind": {"const": "finite"}}, "required": ["kind"]},
                 "then": {"anyOf": [{"required": ["file"]}, {"required": ["m"]}]}},
                {"if": {"properties": {"kind": {"const": "graph"}}, "required": ["kind"]},
                 "then": {"required": ["n_vertices", "edges"]}},
            ],
        },
        "mu": {
            "type": "object",
            "properties": {
                "kind": {"enum": ["uniform", "atoms", "mixture", "evenly-spaced"]},
                "weights": {"type": "array", "items": {"type": "number", "minimum": 0}},
                "atom_weight": {"type": "number", "minimum": 0, "maximum": 1},
                "n_atoms": _pos_int,
            },
            "allOf": [
                {"if": {"properties": {"kind": {"enum": ["atoms", "mixture"]}},
                        "required": ["kind"]},
                 "then": {"required": ["points"]}},
                {"if": {"properties": {"kind": {"const": "evenly-spaced"}}, "required": ["kind"]},
                 "then": {"required": ["n_atoms"]}},
            ],
        },
        "model": {"type": "object", "properties": {"lam": _pos, "v": _pos, "r0": _pos}},
        "params": {
            "type": "object",
            "properties": {
                "r0_values": _pos_list, "eps": _pos, "L_values": _pos_list, "net_eps": _pos,
                "a_grid": _pos_list, "r_grid": _pos_list, "gap_L": _pos, "gap_reps": _pos_int,
                "uncovered_reps": _pos_int, "arc_length": {"type": "number", "minimum": 0},
                "support_size": _pos_int, "iters": {"type": "integer", "minimum": 0},
                "construction_reps": {"type": "integer", "minimum": 2}, "n": _pos,
                "outer_reps": {"type": "integer", "minimum": 2}, "inner_reps": _pos_int,
                "chain_reps": {"type": "integer", "minimum": 2},
                "samplers": {"type": "array", "minItems": 1,
                             "items": {"type": "string",
                                       "pattern": r"^(uniform-singleton:\d+|random-k-subset:\d+:\d+"
                                                  r"|cyclic-arc:\d+:\d+|metric-ball:[0-9.eE+-]+)$"}},
                "chains": {"type": "array",
                           "items": {"type": "string",
                                     "pattern": r"^(coupon:\d+|two-rate:\d+:\d+:[0-9.eE+-]+)$"}},
                "models": {"type": "array", "minItems": 1,
                           "items": {"enum": ["fixed", "growth"]}},
                "step": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
            },
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": {"type": "number", "minimum": 0},
        },
    },
}


class ConfigError(ValueError):
    """Invalid configuration; ``errors`` lists ``"section.key: message"`` strings."""

    def __init__(self, errors, source=None):
        self.errors = list(errors)
        self.source = source
        head = f"invalid config {source}" if source else "invalid config"
        super().__init__(head + ":\n  " + "\n  ".join(self.errors))


@dataclass
class ExperimentConfig:
    """Typed, validated configuration with defaults applied."""

    data: dict
    source: str = None
    files: list = field(default_factory=list)

    @property
    def kind(self):
        return self.data["experiment"]["kind"]

    @property
    def seed(self):
        return self.data["experiment"]["seed"]

    @property
    def reps(self):
        return self.data["experiment"]["reps"]

    @property
    def name(self):
        exp = self.data["experiment"]
        if "name" in exp:
            return exp["name"]
        if self.source:
            return os.path.splitext(os.path.basename(self.source))[0]
        return self.kind

    def section(self, name):
        return self.data.get(name, {})

    def param(self, key, default=None):
        return self.data["params"].get(key, default)

    def tol(self, key):
        return self.data["tolerances"][key]

    def echo(self):
        return copy.deepcopy(self.data)


# ---------------------------------------------------------------------------
# parsing


def _split(text):
    return [p.strip() for p in text.split(",") if p.strip()]


def _coerce(kind, text):
    if kind == "str":
        return text.strip()
    if kind == "int":
        return int(text.strip(), 0)
    if kind == "float":
        return float(text)
    if kind == "floats":
        return [float(p) for p in _split(text)]
    if kind == "ints":
        return [int(p) for p in _split(text)]
    if kind == "strs":
        return _split(text)
    if kind == "points":
        pts = [[float(c) for c in p.split()] for p in _split(text)]
        return [p[0] if len(p) == 1 else p for p in pts]
    if kind == "edges":
        out = []
        for p in _split(text):
            ends, length = p.split(":")
            u, v = ends.split("-")
            out.append([int(u), int(v), float(length)])
        return out
    raise AssertionError(kind)


def _read_ini(path, seen):
    path = os.path.abspath(path)
    if path in seen:
        raise ConfigError([f"experiment.include: include cycle through {path}"], path)
    if not os.path.isfile(path):
        raise ConfigError([f"file not found: {path}"], path)
    parser = configparser.ConfigParser(interpolation=None, default_section="__none__")
    parser.optionxform = str  # keys are case sensitive (L, L1, ...)
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError([f"syntax: {exc}"], path) from exc
    raw = {s: dict(parser.items(s)) for s in parser.sections()}
    files = []
    merged = {}
    includes = raw.get("experiment", {}).pop("include", None)
    if includes is not None:
        for inc in _split(includes):
            inc_path = inc if os.path.isabs(inc) else os.path.join(os.path.dirname(path), inc)
            sub, sub_files = _read_ini(inc_path, seen | {path})
            files.extend(sub_files)
            for sec, vals in sub.items():
                merged.setdefault(sec, {}).update(vals)
    for sec, vals in raw.items():
        merged.setdefault(sec, {}).update(vals)
    files.append(path)
    return merged, files


def _typed(raw):
    errors = []
    data = {}
    for sec, vals in raw.items():
        if sec not in FIELD_TYPES:
            errors.append(f"{sec}: unknown section (expected one of {', '.join(SECTIONS)})")
            continue
        types = FIELD_TYPES[sec]
        out = data.setdefault(sec, {})
        for key, text in vals.items():
            if sec == "tolerances" and key not in types:
                errors.append(f"{sec}.{key}: unknown tolerance")
                continue
            if key not in types:
                errors.append(f"{sec}.{key}: unknown key")
                continue
            try:
                out[key] = _coerce(types[key], text)
            except (ValueError, TypeError):
                errors.append(f"{sec}.{key}: cannot parse {text!r} as {types[key]}")
    return data, errors


def _path(error):
    parts = [str(p) for p in error.absolute_path]
    return ".".join(parts) if parts else "<root>"


def validate_data(data):
    """Schema and cross-field checks; returns a list of error strings."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = [f"{_path(e)}: {e.message}"
              for e in sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))]
    exp = data.get("experiment", {})
    kind = exp.get("kind")
    if kind in KIND_PARAMS:
        for key in data.get("params", {}):
            if key not in KIND_PARAMS[kind]:
                errors.append(f"params.{key}: not used by experiment kind {kind!r}")
        allowed = KIND_SPACES[kind]
        space_kind = data.get("space", {}).get("kind")
        if allowed is not None:
            if allowed == () and data.get("space"):
                errors.append(f"space: experiment kind {kind!r} fixes its own space")
            elif allowed and space_kind not in allowed:
                errors.append(f"space.kind: experiment kind {kind!r} needs one of {allowed}")
        elif "kind" not in data.get("space", {}):
            errors.append(f"space.kind: required for experiment kind {kind!r}")
        if kind == "fixed-concentration" and "r0" not in data.get("model", {}):
            errors.append("model.r0: required for experiment kind 'fixed-concentration'")
    weights = data.get("mu", {}).get("weights")
    points = data.get("mu", {}).get("points")
    if weights is not None and points is not None and len(weights) != len(points):
        errors.append("mu.weights: need one weight per point")
    return errors


def _with_defaults(data):
    out = copy.deepcopy(DEFAULTS)
    for sec, vals in data.items():
        out.setdefault(sec, {}).update(vals)
    return out


def load_config(path):
    """Read, type, default and validate a config file; raises :class:`ConfigError`."""
    raw, files = _read_ini(path, frozenset())
    data, errors = _typed(raw)
    data = _with_defaults(data)
    errors += validate_data(data)
    if errors:
        raise ConfigError(errors, path)
    return ExperimentConfig(data, source=os.path.abspath(path), files=files)


def config_from_dict(data, source=None):
    """Build a validated config from already-typed section mappings."""
    data = _with_defaults(data)
    errors = validate_data(data)
    if errors:
        raise ConfigError(errors, source)
    return ExperimentConfig(data, source=source)
