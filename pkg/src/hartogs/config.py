"""Experiment configuration files (JSON or TOML) and run manifests.

Top-level keys
--------------
grid      {complex_dim, points_per_axis, half_width}
omega     {kind: "ball" | "box", params: {center, radius} | {center, half_widths}}
obstacle  {balls: [{center, radius}, ...]}
subspace  {base_point, directions: [[...], ...]}   (directions may be empty)
r, R      positive reals
chi       {kind: "quintic"}
f         {kind: polynomial | rational | exponential, params}
hardy     {families: [{kind, count, seed, ...}], witness_points, slack}
solve     {datum: {kind: "dbar-bump" | "dbar-gaussian", center, width, amplitude}}
run       {resolution, out, seed, dump_fields}

Each subcommand reads only the sections it needs.
"""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .extension import InputFunction
from .geometry import AffineSubspace, CutoffProfile, DomainSpec, ExtensionConfig, ObstacleSet
from .grid import GridSpec
from .hardy import HARDY_SLACK, TestFunctionFamily

__all__ = [
    "ConfigError",
    "RunOptions",
    "ExperimentConfig",
    "RunManifest",
    "load_config",
    "parse_config",
    "config_hash",
]


class ConfigError(ValueError):
    """The configuration file cannot be read or does not match the schema."""


def _need(d: dict, key: str, where: str):
    if not isinstance(d, dict) or key not in d:
        raise ConfigError(f"missing key '{key}' in {where or 'config'}")
    return d[key]


def _vector(x, where: str) -> np.ndarray:
    try:
        v = np.asarray(x, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: expected a list of numbers") from exc
    if v.ndim != 1 or not np.all(np.isfinite(v)):
        raise ConfigError(f"{where}: expected a finite list of numbers")
    return v


def _number(x, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {x!r}")
    return float(x)


def canonical_json(data) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"), allow_nan=False)


def config_hash(data: dict) -> str:
    """SHA-256 of the canonical serialization; independent of key order."""
    return hashlib.sha256(canonical_json(data).encode()).hexdigest()


@dataclass
class RunOptions:
    resolution: int | None = None
    out: str = "out"
    seed: int | None = None
    dump_fields: bool = False


@dataclass
class ExperimentConfig:
    raw: dict
    run: RunOptions = field(default_factory=RunOptions)

    def effective(self) -> dict:
        """The raw config with run-time overrides applied (what gets hashed)."""
        data = json.loads(canonical_json(self.raw))
        run = data.setdefault("run", {})
        run.update({"resolution": self.run.resolution, "seed": self.run.seed,
                    "dump_fields": self.run.dump_fields})
        run.pop("out", None)
        return data

    @property
    def hash(self) -> str:
        return config_hash(self.effective())

    def grid(self) -> GridSpec:
        g = _need(self.raw, "grid", "")
        try:
            n = int(_need(g, "complex_dim", "grid"))
            P = int(self.run.resolution or _need(g, "points_per_axis", "grid"))
            L = _number(_need(g, "half_width", "grid"), "grid.half_width")
            return GridSpec(n, P, L)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"grid: {exc}") from exc

    def subspace(self) -> AffineSubspace:
        s = _need(self.raw, "subspace", "")
        base = _vector(_need(s, "base_point", "subspace"), "subspace.base_point")
        dirs = s.get("directions", [])
        try:
            if len(dirs) == 0:
                return AffineSubspace(base, np.zeros((0, base.size)))
            return AffineSubspace.from_spanning(base, np.asarray(dirs, dtype=float))
        except ValueError as exc:
            raise ConfigError(f"subspace: {exc}") from exc

    def extension(self) -> ExtensionConfig:
        grid = self.grid()
        om = _need(self.raw, "omega", "")
        kind = _need(om, "kind", "omega")
        params = _need(om, "params", "omega")
        try:
            center = _vector(_need(params, "center", "omega.params"), "omega.params.center")
            if kind == "ball":
                domain = DomainSpec.ball(center, _number(_need(params, "radius", "omega.params"),
                                                         "omega.params.radius"))
            elif kind == "box":
                domain = DomainSpec.box(center, _vector(_need(params, "half_widths", "omega.params"),
                                                        "omega.params.half_widths"))
            else:
                raise ConfigError(f"omega.kind must be 'ball' or 'box', got {kind!r}")
            balls = _need(_need(self.raw, "obstacle", ""), "balls", "obstacle")
            if not isinstance(balls, list):
                raise ConfigError("obstacle.balls must be a list")
            obstacle = ObstacleSet([
                (_vector(_need(b, "center", "obstacle.balls[]"), "obstacle center"),
                 _number(_need(b, "radius", "obstacle.balls[]"), "obstacle radius"))
                for b in balls
            ])
            chi = self.raw.get("chi", {"kind": "quintic"})
            cutoff = CutoffProfile(kind=chi.get("kind", "quintic"))
            return ExtensionConfig(
                grid, domain, obstacle, self.subspace(),
                r=_number(_need(self.raw, "r", ""), "r"),
                R=_number(_need(self.raw, "R", ""), "R"),
                cutoff=cutoff,
            )
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def function(self) -> InputFunction:
        f = _need(self.raw, "f", "")
        try:
            return InputFunction(_need(f, "kind", "f"), f.get("params", {}))
        except ValueError as exc:
            raise ConfigError(f"f: {exc}") from exc

    def hardy_families(self) -> list[TestFunctionFamily]:
        section = _need(self.raw, "hardy", "")
        fams = _need(section, "families", "hardy")
        out = []
        for i, spec in enumerate(fams):
            spec = dict(spec)
            if self.run.seed is not None:
                spec["seed"] = self.run.seed + i
            for key in ("width_range", "amplitude_range", "exponent_range", "center_offset"):
                if spec.get(key) is not None:
                    spec[key] = tuple(spec[key])
            try:
                out.append(TestFunctionFamily(**spec))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"hardy.families[{i}]: {exc}") from exc
        return out

    def hardy_options(self) -> dict:
        section = _need(self.raw, "hardy", "")
        return {"witness_points": int(section.get("witness_points", 100)),
                "slack": float(section.get("slack", HARDY_SLACK))}

    def solve_datum(self) -> dict:
        datum = dict(_need(_need(self.raw, "solve", ""), "datum", "solve"))
        if datum.get("kind") not in ("dbar-bump", "dbar-gaussian"):
            raise ConfigError("solve.datum.kind must be 'dbar-bump' or 'dbar-gaussian'")
        datum["center"] = _vector(_need(datum, "center", "solve.datum"), "solve.datum.center")
        datum["width"] = _number(_need(datum, "width", "solve.datum"), "solve.datum.width")
        datum["amplitude"] = _number(datum.get("amplitude", 1.0), "solve.datum.amplitude")
        return datum


def parse_config(text: str, fmt: str) -> dict:
    try:
        if fmt == "toml":
            return tomllib.loads(text)
        data = json.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse {fmt.upper()} config: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return data


def load_config(path, resolution=None, out=None, seed=None, dump_fields=None) -> ExperimentConfig:
    """Read a JSON (``.json``) or TOML (``.toml``) file; CLI flags override ``run``."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    raw = parse_config(text, "toml" if path.suffix == ".toml" else "json")
    run_section = raw.get("run", {}) or {}
    run = RunOptions(
        resolution=run_section.get("resolution"),
        out=run_section.get("out", "out"),
        seed=run_section.get("seed"),
        dump_fields=bool(run_section.get("dump_fields", False)),
    )
    overrides = {k: v for k, v in (("resolution", resolution), ("out", out), ("seed", seed))
                 if v is not None}
    if dump_fields:
        overrides["dump_fields"] = True
    return ExperimentConfig(raw, replace(run, **overrides))


@dataclass
class RunManifest:
    tool_version: str
    command: str
    config_hash: str
    started: str
    finished: str | None = None
    stage_seconds: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    exit_code: int | None = None

    def to_dict(self) -> dict:
        return {
            "tool_version": self.tool_version,
            "command": self.command,
            "config_hash": self.config_hash,
            "started": self.started,
            "finished": self.finished,
            "stage_seconds": self.stage_seconds,
            "outputs": self.outputs,
            "exit_code": self.exit_code,
        }
