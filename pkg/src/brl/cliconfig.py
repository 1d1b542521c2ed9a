"""Experiment configuration files and reproducible run records.

Config files are flat ``key = value`` text with sections, read by the
stdlib parser.  Recognized sections and keys:

    [domain]   rho_in
    [series]   max_terms, target_tol
    [points]   sep, xi1 .. xiN   (each xi a comma 4-tuple)
    [ring]     k, r              (alternative to [points])
    [run]      epsilon, seed, workers, grid_n, extent, out

Every command accepts flags that override file values.  A run record
captures the merged snapshot, a content hash over it, wall time, and
the output manifest; identical snapshots hash identically, which is the
package's reproducibility contract.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .annulus import AnnulusGeometry, SeriesControl
from .errors import ConfigError
from .interaction import Configuration
from .rings import RingConfig

__all__ = [
    "SCHEMA_VERSION",
    "default_max_terms",
    "read_config_file",
    "ExperimentConfig",
    "RunRecord",
    "content_hash",
    "fmt17",
]

SCHEMA_VERSION = 1

_SECTIONS = ("domain", "series", "points", "ring", "run")


def default_max_terms() -> int:
    """Series budget default, overridable through BRL_MAX_TERMS."""
    raw = os.environ.get("BRL_MAX_TERMS")
    if raw is None:
        return 200
    try:
        val = int(raw)
    except ValueError as exc:
        raise ConfigError(f"BRL_MAX_TERMS must be an integer, got {raw!r}") from exc
    if val < 1:
        raise ConfigError(f"BRL_MAX_TERMS must be positive, got {val}")
    return val


def fmt17(value: float) -> str:
    """Fixed 17-significant-digit decimal rendering (round-trip exact)."""
    return format(float(value), ".17g")


def read_config_file(path: str) -> dict:
    """Parse a sectioned key = value file into nested string dicts."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, "r", encoding="utf-8") as handle:
            parser.read_file(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file {path!r}: {exc}") from exc
    out = {}
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(
                f"unknown section [{section}] in {path!r}; "
                f"known: {', '.join(_SECTIONS)}"
            )
        out[section] = dict(parser.items(section))
    return out


def _parse_float(raw: str, where: str) -> float:
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{where}: expected a number, got {raw!r}") from exc


def _parse_int(raw: str, where: str) -> int:
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{where}: expected an integer, got {raw!r}") from exc


def _parse_point(raw: str, where: str) -> np.ndarray:
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) != 4:
        raise ConfigError(f"{where}: expected 4 comma-separated coordinates")
    return np.asarray([_parse_float(p, where) for p in parts])


@dataclass
class ExperimentConfig:
    """Merged, validated inputs for one command invocation."""

    rho_in: float = 0.5
    max_terms: int = field(default_factory=default_max_terms)
    target_tol: float = 1e-10
    k: int | None = None
    points: np.ndarray | None = None
    sep: float | None = None
    ring_r: float | None = None
    epsilon: float = 0.1
    seed: int = 0
    workers: int | None = None
    grid_n: int | None = None
    extent: float = 1.0
    out: str | None = None

    @classmethod
    def from_sources(cls, file_map: dict | None = None, **overrides) -> "ExperimentConfig":
        """Build from a parsed file map, then apply non-None overrides."""
        cfg = cls()
        file_map = file_map or {}
        dom = file_map.get("domain", {})
        if "rho_in" in dom:
            cfg.rho_in = _parse_float(dom["rho_in"], "[domain] rho_in")
        ser = file_map.get("series", {})
        if "max_terms" in ser:
            cfg.max_terms = _parse_int(ser["max_terms"], "[series] max_terms")
        if "target_tol" in ser:
            cfg.target_tol = _parse_float(ser["target_tol"], "[series] target_tol")
        pts = file_map.get("points", {})
        ring = file_map.get("ring", {})
        if pts and ring:
            raise ConfigError("give [points] or [ring], not both")
        if pts:
            if "sep" in pts:
                cfg.sep = _parse_float(pts["sep"], "[points] sep")
            coords = []
            i = 1
            while f"xi{i}" in pts:
                coords.append(_parse_point(pts[f"xi{i}"], f"[points] xi{i}"))
                i += 1
            extra = set(pts) - {"sep"} - {f"xi{j}" for j in range(1, i)}
            if extra:
                raise ConfigError(
                    f"[points] keys must be sep, xi1..xiN contiguous; "
                    f"unexpected: {sorted(extra)}"
                )
            if not coords:
                raise ConfigError("[points] section has no xi1")
            cfg.points = np.vstack(coords)
            cfg.k = len(coords)
        if ring:
            if "k" not in ring or "r" not in ring:
                raise ConfigError("[ring] needs both k and r")
            cfg.k = _parse_int(ring["k"], "[ring] k")
            cfg.ring_r = _parse_float(ring["r"], "[ring] r")
        run = file_map.get("run", {})
        if "epsilon" in run:
            cfg.epsilon = _parse_float(run["epsilon"], "[run] epsilon")
        if "seed" in run:
            cfg.seed = _parse_int(run["seed"], "[run] seed")
        if "workers" in run:
            cfg.workers = _parse_int(run["workers"], "[run] workers")
        if "grid_n" in run:
            cfg.grid_n = _parse_int(run["grid_n"], "[run] grid_n")
        if "extent" in run:
            cfg.extent = _parse_float(run["extent"], "[run] extent")
        if "out" in run:
            cfg.out = run["out"]
        for name, value in overrides.items():
            if value is not None:
                if not hasattr(cfg, name):
                    raise ConfigError(f"unknown override {name!r}")
                setattr(cfg, name, value)
        return cfg

    def geometry(self) -> AnnulusGeometry:
        return AnnulusGeometry(self.rho_in)

    def control(self) -> SeriesControl:
        return SeriesControl(self.max_terms, self.target_tol)

    def configuration(self) -> Configuration:
        """Point configuration from [points] or the [ring] shorthand."""
        if self.points is not None:
            sep = self.sep
            if sep is None:
                raise ConfigError("[points] requires sep")
            return Configuration(self.points, sep)
        if self.ring_r is not None:
            if self.k is None:
                raise ConfigError("[ring] requires k")
            return RingConfig(self.k, self.ring_r).to_configuration(self.geometry())
        raise ConfigError("no [points] or [ring] section provided")

    def snapshot(self) -> dict:
        """Flat, JSON-ready view of every effective setting."""
        snap = {
            "domain.rho_in": self.rho_in,
            "series.max_terms": self.max_terms,
            "series.target_tol": self.target_tol,
            "run.epsilon": self.epsilon,
            "run.seed": self.seed,
            "run.extent": self.extent,
        }
        if self.k is not None:
            snap["points.k"] = self.k
        if self.sep is not None:
            snap["points.sep"] = self.sep
        if self.points is not None:
            for i, p in enumerate(self.points, start=1):
                snap[f"points.xi{i}"] = ",".join(fmt17(c) for c in p)
        if self.ring_r is not None:
            snap["ring.r"] = self.ring_r
        if self.workers is not None:
            snap["run.workers"] = self.workers
        if self.grid_n is not None:
            snap["run.grid_n"] = self.grid_n
        if self.out is not None:
            snap["run.out"] = self.out
        return snap


def content_hash(snapshot: dict) -> str:
    """Order-independent hash of a snapshot mapping."""
    lines = []
    for key in sorted(snapshot):
        value = snapshot[key]
        if isinstance(value, float):
            value = fmt17(value)
        lines.append(f"{key}={value}")
    digest = hashlib.sha256("\n".join(lines).encode("utf-8"))
    return digest.hexdigest()


@dataclass
class RunRecord:
    """Reproducibility trailer emitted by every command."""

    command: str
    snapshot: dict
    input_hash: str
    wall_time_s: float
    outputs: list

    def to_json(self, **extra) -> str:
        payload = {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "config": self.snapshot,
            "input_hash": self.input_hash,
            "wall_time_s": round(self.wall_time_s, 6),
            "outputs": self.outputs,
        }
        payload.update(extra)
        return json.dumps(payload, sort_keys=True)
