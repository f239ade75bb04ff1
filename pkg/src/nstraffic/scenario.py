"""Scenario configuration, blockade initial data and snapshot CSV files.

Config files are flat ``key = value`` text with dotted keys and ``#``
comments. Dimensional values may carry a unit, which is converted to SI
when the file is read::

    road.length      = 20 km
    road.cells       = 400
    queue.start      = 2.5 km
    queue.end        = 7.5 km
    queue.density    = 0.198 veh/m
    model.alpha      = 125
    model.tau        = 8 s
    model.w_c        = 1.2
    model.rho_c      = 0.04 veh/m
    model.rho_0      = 0.2 veh/m
    model.v_0        = 108 km/h
    model.a          = 3.9
    solver.cfl       = 0.9
    solver.t_end     = 300 s
    solver.snapshot_interval = 10 s
    solver.density_floor     = 2e-7 veh/m
    solver.viscous_limiter   = true
    solver.diffusion_limit   = 0.25
    output.dir       = out

Every key is optional; missing keys take the blockade-removal defaults.
"""
from __future__ import annotations

import configparser
import csv
import io
import os
import re
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError
from .macro import equilibrium_speed
from .params import ModelParams
from .roe import RoadField, Snapshot, SolverConfig

UNITS = {
    "length": {"": 1.0, "m": 1.0, "km": 1000.0},
    "speed": {"": 1.0, "m/s": 1.0, "km/h": 1.0 / 3.6},
    "density": {"": 1.0, "veh/m": 1.0, "veh/km": 1e-3},
    "time": {"": 1.0, "s": 1.0, "min": 60.0, "h": 3600.0},
    "number": {"": 1.0},
}

# key -> (section attribute, field name, kind)
SCHEMA = {
    "road.length": ("road_length", None, "length"),
    "road.cells": ("cells", None, "count"),
    "queue.start": ("queue_start", None, "length"),
    "queue.end": ("queue_end", None, "length"),
    "queue.density": ("queue_density", None, "density"),
    "model.alpha": ("params", "alpha", "number"),
    "model.tau": ("params", "tau", "time"),
    "model.w_c": ("params", "w_c", "number"),
    "model.rho_c": ("params", "rho_c", "density"),
    "model.rho_0": ("params", "rho_0", "density"),
    "model.v_0": ("params", "v_0", "speed"),
    "model.a": ("params", "a", "number"),
    "solver.cfl": ("solver", "cfl", "number"),
    "solver.t_end": ("solver", "t_end", "time"),
    "solver.snapshot_interval": ("solver", "snapshot_interval", "time"),
    "solver.density_floor": ("solver", "density_floor", "density"),
    "solver.viscous_limiter": ("solver", "viscous_limiter", "bool"),
    "solver.diffusion_limit": ("solver", "diffusion_limit", "number"),
    "output.dir": ("out_dir", None, "path"),
}

_NUMBER = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(\S*)\s*$")


@dataclass(frozen=True)
class ScenarioConfig:
    """Blockade-removal scenario on a periodic road (SI units)."""

    road_length: float = 20_000.0
    cells: int = 400
    queue_start: float = 2_500.0
    queue_end: float = 7_500.0
    queue_density: float = 0.198
    params: ModelParams = field(default_factory=ModelParams)
    solver: SolverConfig = field(default_factory=SolverConfig)
    out_dir: str = "out"

    def __post_init__(self):
        if not self.road_length > 0:
            raise ConfigError("must be > 0", field="road.length")
        if not self.cells >= 1:
            raise ConfigError("must be >= 1", field="road.cells")
        if not 0 <= self.queue_start < self.queue_end <= self.road_length:
            raise ConfigError(
                f"need 0 <= queue.start < queue.end <= road.length "
                f"(got {self.queue_start}, {self.queue_end}, {self.road_length})",
                field="queue.end" if self.queue_end <= self.queue_start else "queue.start",
            )
        if not 0 < self.queue_density <= self.params.rho_0:
            raise ConfigError(
                f"must lie in (0, rho_0={self.params.rho_0}]", field="queue.density"
            )

    @property
    def dx(self) -> float:
        return self.road_length / self.cells

    @property
    def density_floor(self) -> float:
        return self.solver.floor(self.params)


def _parse_value(key, raw, kind, line):
    raw = raw.strip()
    if kind == "path":
        return raw
    if kind == "bool":
        low = raw.lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        raise ConfigError(f"expected a boolean, got {raw!r}", field=key, line=line)
    if kind == "count":
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"expected an integer, got {raw!r}", field=key, line=line) from None
    m = _NUMBER.match(raw)
    if not m:
        raise ConfigError(f"expected a number with optional unit, got {raw!r}", field=key, line=line)
    number, unit = float(m.group(1)), m.group(2)
    table = UNITS[kind]
    if unit not in table:
        allowed = ", ".join(u for u in table if u) or "none"
        raise ConfigError(f"unit {unit!r} not allowed (use {allowed})", field=key, line=line)
    return number * table[unit]


def parse_config(text: str, source: str = "<string>") -> ScenarioConfig:
    """Parse config text; see the module docstring for the format."""
    parser = configparser.ConfigParser(
        delimiters=("=",), comment_prefixes=("#",), inline_comment_prefixes=("#",),
        interpolation=None, strict=True,
    )
    parser.optionxform = str
    try:
        parser.read_string("[scenario]\n" + text, source=source)
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ConfigError(f"cannot parse {line.strip()!r}", line=lineno - 1) from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigError("duplicate key", field=exc.option, line=exc.lineno - 1) from None
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None

    lines = text.splitlines()

    def line_of(key):
        for i, ln in enumerate(lines, start=1):
            if ln.split("=", 1)[0].strip() == key:
                return i
        return None

    top, model, solver = {}, {}, {}
    for key, raw in parser["scenario"].items():
        if key not in SCHEMA:
            raise ConfigError("unknown key", field=key, line=line_of(key))
        attr, name, kind = SCHEMA[key]
        value = _parse_value(key, raw, kind, line_of(key))
        if attr == "params":
            model[name] = value
        elif attr == "solver":
            solver[name] = value
        else:
            top[attr] = value
    try:
        params = ModelParams(**model)
    except DomainError as exc:
        raise ConfigError(str(exc), field="model") from None
    try:
        solver_cfg = SolverConfig(**solver)
    except DomainError as exc:
        raise ConfigError(str(exc), field="solver") from None
    return ScenarioConfig(params=params, solver=solver_cfg, **top)


def load_config(path) -> ScenarioConfig:
    """Read and validate a config file. An empty file gives all defaults."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text, source=str(path))


def dump_config(cfg: ScenarioConfig) -> str:
    """Fully resolved config in SI units; ``parse_config`` restores it exactly."""
    out = []
    for key, (attr, name, kind) in SCHEMA.items():
        obj = getattr(cfg, attr)
        value = getattr(obj, name) if name is not None else obj
        if key == "solver.density_floor":
            value = cfg.density_floor
        if kind == "bool":
            text = "true" if value else "false"
        elif kind in ("count", "path"):
            text = str(value)
        else:
            text = repr(float(value))
        out.append(f"{key} = {text}")
    return "\n".join(out) + "\n"


def with_overrides(cfg: ScenarioConfig, **solver_overrides) -> ScenarioConfig:
    """Copy of ``cfg`` with some solver fields or ``cells``/``out_dir`` replaced."""
    top = {k: solver_overrides.pop(k) for k in ("cells", "out_dir") if k in solver_overrides}
    solver = replace(cfg.solver, **solver_overrides) if solver_overrides else cfg.solver
    return replace(cfg, solver=solver, **top)


def blockade_scenario(cfg: ScenarioConfig) -> RoadField:
    """Initial road: density ``queue_density`` strictly inside the queue
    interval, the density floor elsewhere, and equilibrium speed everywhere.
    Cells take their centre values."""
    x = (np.arange(cfg.cells) + 0.5) * cfg.dx
    inside = (x > cfg.queue_start) & (x < cfg.queue_end)
    rho = np.where(inside, cfg.queue_density, cfg.density_floor)
    v = equilibrium_speed(rho, cfg.params)
    return RoadField(rho, rho * v, cfg.dx)


# ---------------------------------------------------------------------------
# snapshots

CSV_HEADER = ("t", "x", "rho", "v", "q")


def format_snapshot(snap: Snapshot) -> str:
    """CSV text with 17 significant digits (exact float round-trip)."""
    buf = io.StringIO()
    buf.write(",".join(CSV_HEADER) + "\n")
    t = f"{snap.t:.17g}"
    for x, r, v, q in zip(snap.x, snap.rho, snap.v, snap.q):
        buf.write(f"{t},{x:.17g},{r:.17g},{v:.17g},{q:.17g}\n")
    return buf.getvalue()


def write_snapshot(snap: Snapshot, sink) -> int:
    """Write ``snap`` as CSV to a path or text stream; returns bytes written."""
    text = format_snapshot(snap)
    data = text.encode("ascii")
    if isinstance(sink, (str, os.PathLike)):
        try:
            with open(sink, "wb") as fh:
                fh.write(data)
        except OSError as exc:
            raise OSError(exc.errno, f"cannot write snapshot: {exc.strerror}", str(sink)) from exc
    else:
        sink.write(text)
    return len(data)


def parse_snapshot(text: str) -> Snapshot:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValueError(f"snapshot header must be {','.join(CSV_HEADER)}")
    data = np.array(rows[1:], dtype=float).reshape(-1, 5)
    t = float(data[0, 0]) if len(data) else 0.0
    return Snapshot(t, data[:, 1], data[:, 2], data[:, 3], data[:, 4])


def read_snapshot(path) -> Snapshot:
    return parse_snapshot(Path(path).read_text())


def snapshot_filename(index: int) -> str:
    return f"snapshot_{index:05d}.csv"


def read_snapshot_dir(path) -> list[Snapshot]:
    """All ``snapshot_*.csv`` files in ``path``, in time order."""
    files = sorted(Path(path).glob("snapshot_*.csv"))
    return sorted((read_snapshot(f) for f in files), key=lambda s: s.t)


class SnapshotWriter:
    """Run sink writing each snapshot to ``<out_dir>/snapshot_NNNNN.csv``."""

    def __init__(self, out_dir):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.count = 0
        self.bytes = 0

    def __call__(self, snap: Snapshot):
        self.bytes += write_snapshot(snap, self.out_dir / snapshot_filename(self.count))
        self.count += 1
