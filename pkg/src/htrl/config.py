"""Experiment configuration: built-in defaults, TOML files and overrides."""

import copy
import hashlib
import json
import math
import sys
from dataclasses import dataclass

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

COMMANDS = ("mep-growth", "lse-rate", "phase-diagram", "lasso", "counterexample",
            "bound-check", "fn-en")

_GRID_7_14 = [2 ** k for k in range(7, 15)]
_GRID_8_14 = [2 ** k for k in range(8, 15)]

DEFAULTS = {
    "mep-growth": {
        "seed": 1,
        "experiment": {
            "weights": "multiplier",  # or "rademacher"
            "noise": {"kind": "pareto", "tail_index": 2.0},
            "n_grid": _GRID_7_14,
            "reps": 200,
            # max_len = n^(-max_len_exponent); 0 leaves the class unconstrained
            "max_len_exponent": 0.0,
        },
        "criteria": {"slope_min": 0.40, "slope_max": 0.60},
    },
    "lse-rate": {
        "seed": 1,
        "experiment": {
            "estimator": "isotonic",
            "noise": {"kind": "gaussian", "sigma": 1.0},
            "truth": {"kind": "staircase", "steps": 256},
            "n_grid": _GRID_8_14,
            "reps": 200,
            "level_bound": 1.0,
            "k": 1,
            "min_len": 0.0,
            "rule_alpha": 1.0,
            "rule_p": 2.0,
            "min_n": 128,
        },
        "criteria": {"target": 1.0 / 3.0, "below": 0.08, "above": 0.10, "one_sided": False},
    },
    "phase-diagram": {
        "seed": 1,
        "experiment": {
            "alphas": [1e-9, 1.0],
            "ps": [2.0, 3.5, math.inf],
            "n_grid": _GRID_8_14,
            "reps": 100,
            "truth": {"kind": "staircase", "steps": 256},
            "margin": 0.1,
            "min_n": 128,
        },
        "criteria": {"tolerance": 0.10},
    },
    "lasso": {
        "seed": 1,
        "experiment": {
            "d": 64,
            "s": 2,
            "n_grid": [2 ** k for k in range(8, 14)],
            "reps": 100,
            "design": {"kind": "gaussian", "sigma": 1.0},
            "noise": {"kind": "gaussian", "sigma": 1.0},
            "L": 1.0,
            "alpha": 0.5,
        },
        "criteria": {"exponent_min": 0.80, "exponent_max": 1.15, "max_ratio_spread": 10.0},
    },
    "counterexample": {
        "seed": 1,
        "experiment": {
            "delta": 0.1,
            "n_grid": [2 ** k for k in range(8, 17)],
            "reps": 1000,
            "design": "pareto",
        },
        "criteria": {
            "dependent_min": -0.12, "dependent_max": -0.005, "dependent_above": -0.3,
            "independent_min": -0.6, "independent_max": -0.4,
        },
    },
    "bound-check": {
        "seed": 1,
        "experiment": {
            "laws": [
                {"kind": "pareto", "tail_index": 2.0},
                {"kind": "pareto", "tail_index": 3.0},
                {"kind": "pareto", "tail_index": 4.5},
                {"kind": "gaussian", "sigma": 1.0},
            ],
            "n_grid": [2 ** k for k in range(6, 13)],
            "reps": 200,
            "majorant_reps": 200,
            "inflate": 3.0,
        },
        "criteria": {"max_violations": 0},
    },
    "fn-en": {
        "seed": 1,
        "experiment": {
            "instances": 50,
            "n_min": 5,
            "n_max": 200,
            "min_lens": [0.0, 0.01, 0.05],
            "grid_points": 1001,
            "noise": {"kind": "student_t", "dof": 3.0},
        },
        "criteria": {"max_mismatches": 0},
    },
}


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    settings: dict

    @property
    def seed(self):
        return int(self.settings["seed"])

    @property
    def experiment(self):
        return self.settings["experiment"]

    @property
    def criteria(self):
        return self.settings["criteria"]

    def echo(self):
        """JSON-safe copy; non-finite floats become strings."""
        return {"command": self.command, **_json_safe(self.settings)}

    def content_hash(self):
        """Git blob hash of the canonical JSON echo."""
        data = json.dumps(self.echo(), sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()

    @classmethod
    def from_echo(cls, echo):
        echo = dict(echo)
        command = echo.pop("command")
        return build_config(command, overrides_tree=_json_restore(echo))


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def _json_restore(obj):
    if isinstance(obj, dict):
        return {k: _json_restore(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_json_restore(v) for v in obj]
    if obj in ("inf", "-inf", "nan"):
        return float(obj)
    return obj


def _merge(base, update, path=""):
    for key, value in update.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"unknown config key {where!r}")
        if (isinstance(base[key], dict) and _is_record(base[key])
                and isinstance(value, dict) and "kind" not in value):
            base[key] = {**base[key], **value}
        elif isinstance(base[key], dict) and not _is_record(base[key]):
            if not isinstance(value, dict):
                raise ConfigError(f"config key {where!r} must be a table")
            _merge(base[key], value, where + ".")
        else:
            base[key] = value


def _is_record(d):
    """Tagged records (noise laws, truths) are replaced wholesale."""
    return "kind" in d


def _parse_value(text):
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def parse_override(item):
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not of the form key=value")
    key, text = item.split("=", 1)
    key = key.strip()
    if not key:
        raise ConfigError(f"override {item!r} has an empty key")
    tree = _parse_value(text.strip())
    for part in reversed(key.split(".")):
        tree = {part: tree}
    return tree


def load_file(path):
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path} does not parse: {exc}") from None


def build_config(command, file_tree=None, overrides=(), overrides_tree=None):
    """Defaults, then the file, then each ``key=value`` override."""
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}; choose from {', '.join(COMMANDS)}")
    settings = copy.deepcopy(DEFAULTS[command])
    trees = []
    if file_tree:
        file_tree = dict(file_tree)
        named = file_tree.pop("command", command)
        if named != command:
            raise ConfigError(f"config key 'command' is {named!r} but {command!r} was requested")
        trees.append(file_tree)
    if overrides_tree:
        trees.append(overrides_tree)
    trees.extend(parse_override(item) for item in overrides)
    for tree in trees:
        _merge(settings, tree)
    return RunConfig(command, settings)
