"""Flat ``key = value`` run configuration.

Grammar
-------
* one ``key = value`` pair per line; blank lines and lines starting with
  ``#`` are ignored; text after `` #`` on a value line is a comment
* rectangles are ``x0 x1 z0 z1`` groups separated by ``;`` (commas may
  replace spaces inside a group)
* numbers accept fractions such as ``1/29``

Keys (default in brackets)::

    domain.rectangles      required
    grid.h                 spacing; or grid.points_per_unit (nodes per unit side)
    decomposition.tiles    [domain.rectangles]
    schwarz.d              [6]
    schwarz.tol            [1e-10]
    schwarz.max_iter       [200]
    schwarz.variant        [parallel]   parallel | alternating
    schwarz.workers        [1]
    problem.omega          [1]
    source.mode            [rhs_zero]   rhs_zero | rhs | manufactured | currents
    source.expr            expression id for mode rhs
    source.solution        manufactured solution id for mode manufactured
    source.jx, source.jz   expression ids for mode currents ["zero"]
    init.kind              [zero]       zero | uniform_random
    init.lo, init.hi       [0, 1]
    seed                   [0]
    output.dir             [out]
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .expressions import EXPRESSIONS, MANUFACTURED

SOURCE_MODES = ("rhs_zero", "rhs", "manufactured", "currents")
INIT_KINDS = ("zero", "uniform_random")
VARIANTS = ("parallel", "alternating")

KNOWN_KEYS = (
    "domain.rectangles", "grid.h", "grid.points_per_unit", "decomposition.tiles",
    "schwarz.d", "schwarz.tol", "schwarz.max_iter", "schwarz.variant", "schwarz.workers",
    "problem.omega", "source.mode", "source.expr", "source.solution", "source.jx",
    "source.jz", "init.kind", "init.lo", "init.hi", "seed", "output.dir",
)


class ConfigError(ValueError):
    pass


def _number(text):
    return float(Fraction(text.strip()))


def _rectangles(text):
    rects = []
    for group in text.split(";"):
        group = group.replace(",", " ").split()
        if not group:
            continue
        if len(group) != 4:
            raise ValueError(f"rectangle needs 4 numbers x0 x1 z0 z1, got {' '.join(group)!r}")
        rects.append(tuple(_number(v) for v in group))
    if not rects:
        raise ValueError("no rectangles given")
    return rects


@dataclass
class SolverConfig:
    rectangles: list
    h: float
    tiles: list
    d: int = 6
    omega: float = 1.0
    source_mode: str = "rhs_zero"
    source_expr: str | None = None
    source_solution: str | None = None
    source_jx: str = "zero"
    source_jz: str = "zero"
    init_kind: str = "zero"
    init_lo: float = 0.0
    init_hi: float = 1.0
    tol: float = 1e-10
    max_iter: int = 200
    variant: str = "parallel"
    workers: int = 1
    seed: int = 0
    output_dir: str = "out"
    raw: dict = field(default_factory=dict, repr=False)

    def validate(self):
        if self.d < 2:
            raise ConfigError(f"schwarz.d: must be >= 2, got {self.d}")
        if self.omega == 0:
            raise ConfigError("problem.omega: must be non-zero")
        if self.tol < 0:
            raise ConfigError("schwarz.tol: must be >= 0")
        if self.max_iter < 0:
            raise ConfigError("schwarz.max_iter: must be >= 0")
        if self.workers < 1:
            raise ConfigError("schwarz.workers: must be >= 1")
        if self.source_mode not in SOURCE_MODES:
            raise ConfigError(f"source.mode: {self.source_mode!r} not in {SOURCE_MODES}")
        if self.init_kind not in INIT_KINDS:
            raise ConfigError(f"init.kind: {self.init_kind!r} not in {INIT_KINDS}")
        if self.variant not in VARIANTS:
            raise ConfigError(f"schwarz.variant: {self.variant!r} not in {VARIANTS}")
        if self.init_lo > self.init_hi:
            raise ConfigError("init.lo: must not exceed init.hi")
        if self.source_mode == "rhs":
            if self.source_expr not in EXPRESSIONS:
                raise ConfigError(f"source.expr: unknown expression id {self.source_expr!r}")
        if self.source_mode == "manufactured":
            if self.source_solution not in MANUFACTURED:
                raise ConfigError(f"source.solution: unknown manufactured solution "
                                  f"{self.source_solution!r}")
        if self.source_mode == "currents":
            for key, name in (("source.jx", self.source_jx), ("source.jz", self.source_jz)):
                if name not in EXPRESSIONS:
                    raise ConfigError(f"{key}: unknown expression id {name!r}")
        return self

    def items(self):
        """Resolved settings in a fixed order, for manifests."""
        rects = "; ".join(" ".join(format(v, ".17g") for v in r) for r in self.rectangles)
        tiles = "; ".join(" ".join(format(v, ".17g") for v in r) for r in self.tiles)
        return [
            ("domain.rectangles", rects), ("grid.h", self.h), ("decomposition.tiles", tiles),
            ("schwarz.d", self.d), ("schwarz.tol", self.tol), ("schwarz.max_iter", self.max_iter),
            ("schwarz.variant", self.variant), ("schwarz.workers", self.workers),
            ("problem.omega", self.omega), ("source.mode", self.source_mode),
            ("source.expr", self.source_expr or ""), ("source.solution", self.source_solution or ""),
            ("source.jx", self.source_jx), ("source.jz", self.source_jz),
            ("init.kind", self.init_kind), ("init.lo", self.init_lo), ("init.hi", self.init_hi),
            ("seed", self.seed), ("output.dir", self.output_dir),
        ]


_PARSERS = {
    "domain.rectangles": ("rectangles", _rectangles),
    "grid.h": ("h", _number),
    "decomposition.tiles": ("tiles", _rectangles),
    "schwarz.d": ("d", int),
    "schwarz.tol": ("tol", float),
    "schwarz.max_iter": ("max_iter", int),
    "schwarz.variant": ("variant", str),
    "schwarz.workers": ("workers", int),
    "problem.omega": ("omega", _number),
    "source.mode": ("source_mode", str),
    "source.expr": ("source_expr", str),
    "source.solution": ("source_solution", str),
    "source.jx": ("source_jx", str),
    "source.jz": ("source_jz", str),
    "init.kind": ("init_kind", str),
    "init.lo": ("init_lo", _number),
    "init.hi": ("init_hi", _number),
    "seed": ("seed", int),
    "output.dir": ("output_dir", str),
}


def parse_config(text, source="<config>"):
    """Parse config text; errors name the file, line and key."""
    raw, lines = {}, {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {stripped!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.split(" #", 1)[0].strip()
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        raw[key], lines[key] = value, lineno

    kwargs = {}
    for key, value in raw.items():
        if key == "grid.points_per_unit":
            continue
        attr, conv = _PARSERS[key]
        try:
            kwargs[attr] = conv(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"{source}:{lines[key]}: {key}: {exc}") from None

    if "rectangles" not in kwargs:
        raise ConfigError(f"{source}: missing required key 'domain.rectangles'")
    if "grid.points_per_unit" in raw:
        if "h" in kwargs:
            raise ConfigError(f"{source}:{lines['grid.points_per_unit']}: give either grid.h "
                              "or grid.points_per_unit, not both")
        try:
            ppu = int(raw["grid.points_per_unit"])
            if ppu < 2:
                raise ValueError("need at least 2 points per unit")
        except ValueError as exc:
            raise ConfigError(f"{source}:{lines['grid.points_per_unit']}: "
                              f"grid.points_per_unit: {exc}") from None
        kwargs["h"] = 1.0 / (ppu - 1)
    if "h" not in kwargs:
        raise ConfigError(f"{source}: missing grid.h or grid.points_per_unit")
    kwargs.setdefault("tiles", list(kwargs["rectangles"]))
    cfg = SolverConfig(raw=raw, **kwargs)
    try:
        return cfg.validate()
    except ConfigError as exc:
        key = str(exc).split(":", 1)[0]
        where = f"{source}:{lines[key]}" if key in lines else source
        raise ConfigError(f"{where}: {exc}") from None


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, source=str(path))
