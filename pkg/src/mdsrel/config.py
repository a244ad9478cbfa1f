"""Experiment configuration: typed INI sections, flag overrides, JSON manifests.

Grammar: UTF-8 INI with the sections and keys in ``SCHEMA``.  Lists are
comma-separated.  Ranges may be written ``start:stop:step`` (inclusive stop).
Unknown sections or keys are rejected.
"""
from __future__ import annotations

import configparser
import json
from pathlib import Path

import numpy as np

from mdsrel.consensus import ConfigurationError


def _r_prime(v: str):
    """An integer, ``auto`` (largest alpha jump) or ``best`` (maximize over ``r_primes``)."""
    v = v.strip().lower()
    if v in ("", "auto"):
        return None
    if v == "best":
        return "best"
    return int(v)


def _float_list(v: str) -> list[float]:
    out: list[float] = []
    for part in str(v).split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            start, stop, step = (float(x) for x in part.split(":"))
            if step <= 0:
                raise ValueError(f"range step must be positive in {part!r}")
            n = int(np.floor((stop - start) / step + 1e-9))
            out.extend(float(np.round(start + step * i, 12)) for i in range(n + 1))
        else:
            out.append(float(part))
    return out


def _int_list(v: str) -> list[int]:
    vals = _float_list(v)
    if any(x != int(x) for x in vals):
        raise ValueError(f"expected integers in {v!r}")
    return [int(x) for x in vals]


def _bool(v: str) -> bool:
    v = str(v).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


SCHEMA: dict[str, dict[str, callable]] = {
    "code": {
        "n_sym": int, "k_sym": int, "m": int, "t": int,
        "N": int, "K": int, "M": int,
    },
    "channel": {
        "epsilon": float, "model": str, "R_all": int, "lam": float,
        "xi": float, "p_file": str, "seed": int,
    },
    "bound": {
        "r_prime": _r_prime, "trunc_eps": float, "method": str, "r_primes": _int_list,
    },
    "sweep": {
        "r_all_values": _float_list,
    },
    "optimizer": {
        "delta_th": float, "t_values": _int_list, "rho_out_values": _float_list,
        "depth_values": _float_list, "certify": str, "search_lo": float, "search_hi": float,
        "exhaustive": _bool,
    },
    "run": {
        "trials": int, "r_max": int, "profile_file": str, "out": str,
    },
}

DEFAULTS = {
    "code": {"m": 8},
    "channel": {"model": "poisson", "seed": 0},
    "bound": {"r_prime": None, "trunc_eps": 1e-12, "method": "auto", "r_primes": list(range(1, 9))},
    "optimizer": {"delta_th": 1e-6, "certify": "bound", "exhaustive": False},
    "run": {"trials": 1000, "r_max": 50},
}

KEY_SECTION = {key: section for section, keys in SCHEMA.items() for key in keys}
if len(KEY_SECTION) != sum(len(k) for k in SCHEMA.values()):
    raise RuntimeError("configuration keys must be unique across sections")


def flag_name(key: str) -> str:
    return "--" + key.replace("_", "-")


def _parse(section: str, key: str, raw) -> object:
    if section not in SCHEMA:
        raise ConfigurationError(f"unknown config section [{section}]")
    if key not in SCHEMA[section]:
        raise ConfigurationError(f"unknown key {key!r} in section [{section}]")
    if raw is None:
        return None
    if not isinstance(raw, str):
        # values from a JSON manifest already carry their types
        return raw
    try:
        return SCHEMA[section][key](raw)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"[{section}] {key} = {raw!r}: {exc}") from exc


class ExperimentConfig:
    """Resolved configuration: defaults, then file values, then flags."""

    def __init__(self, values: dict[str, dict[str, object]] | None = None, command: str | None = None):
        self.values = {s: dict(DEFAULTS.get(s, {})) for s in SCHEMA}
        self.command = command
        for section, items in (values or {}).items():
            for key, raw in items.items():
                self.set(section, key, raw)

    def set(self, section: str, key: str, raw) -> None:
        self.values[section][key] = _parse(section, key, raw)

    def get(self, key: str, default=None):
        value = self.values[KEY_SECTION[key]].get(key)
        return default if value is None else value

    def require(self, *keys: str):
        missing = [k for k in keys if self.get(k) is None]
        if missing:
            flags = ", ".join(flag_name(k) for k in missing)
            raise ConfigurationError(f"missing required settings: {flags}")
        vals = [self.get(k) for k in keys]
        return vals[0] if len(vals) == 1 else vals

    def to_json(self) -> dict:
        return {s: {k: v for k, v in items.items() if v is not None} for s, items in self.values.items()}

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
        if text.lstrip().startswith("{"):
            try:
                doc = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ConfigurationError(f"{path}: invalid JSON: {exc}") from exc
            if "config" not in doc:
                raise ConfigurationError(f"{path}: JSON manifest has no 'config' field")
            return cls(doc["config"], doc.get("command"))
        parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";",))
        parser.optionxform = str
        try:
            parser.read_string(text, source=str(path))
        except configparser.Error as exc:
            raise ConfigurationError(f"{path}: {exc}") from exc
        return cls({s: dict(parser.items(s)) for s in parser.sections()})
