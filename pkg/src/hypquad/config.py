"""JSON experiment configuration."""
from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .dynamics import Bump, HamiltonianSystem
from .quadform import BlockSpec, BlockSpecError, NormalFrame, build_normal_form, rescale_to_small
from .windows import sieve


class ConfigError(ValueError):
    """Invalid configuration; ``field`` and ``line`` locate the problem."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        where = []
        if field:
            where.append(f"field '{field}'")
        if line:
            where.append(f"line {line}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.field = field
        self.line = line


KNOWN = {"name", "blocks", "bumps", "support_radius", "epsilon", "periods", "primes",
         "seed_density", "step", "order", "grid", "seed", "output", "window", "maxprinciple"}


@dataclass
class WindowSettings:
    m: int | None = None            # default: least m with m > n / Delta
    prime_floor: int = 3


@dataclass
class MaxPrincipleSettings:
    solutions: int = 100
    max_mode: int = 4
    grid: int = 64


@dataclass
class ExperimentConfig:
    blocks: list[dict]
    bumps: list[dict] = field(default_factory=list)
    support_radius: float | None = None
    epsilon: list[float] = field(default_factory=lambda: [1.0, 0.1])
    periods: list[int] = field(default_factory=lambda: [1])
    seed_density: int = 15
    step: float = 1e-2
    order: int = 2
    grid: int = 41
    seed: int = 0
    output: str = "out"
    name: str = "experiment"
    window: WindowSettings = field(default_factory=WindowSettings)
    maxprinciple: MaxPrincipleSettings = field(default_factory=MaxPrincipleSettings)

    # -- construction -------------------------------------------------------

    def spec(self) -> BlockSpec:
        return BlockSpec.from_records(self.blocks)

    def frame(self) -> NormalFrame:
        return rescale_to_small(self.raw_frame())

    def raw_frame(self) -> NormalFrame:
        return build_normal_form(self.spec())

    def system(self) -> HamiltonianSystem:
        return HamiltonianSystem(self.frame(), [Bump.from_dict(b) for b in self.bumps],
                                 support_radius=self.support_radius)

    def to_dict(self) -> dict:
        return asdict(self)

    def with_overrides(self, *, epsilon=None, periods=None, seed_density=None, step=None,
                       grid=None, output=None) -> "ExperimentConfig":
        d = self.to_dict()
        for key, val in (("epsilon", epsilon), ("periods", periods),
                         ("seed_density", seed_density), ("step", step), ("grid", grid),
                         ("output", output)):
            if val is not None and val != []:
                d[key] = val
        return from_dict(d)


def _line_of(text: str | None, key: str) -> int | None:
    if not text:
        return None
    m = re.search(rf'"{re.escape(key)}"\s*:', text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _positive(val, key: str, kind, text, *, allow_none=False):
    if val is None and allow_none:
        return None
    try:
        out = kind(val)
    except (TypeError, ValueError):
        raise ConfigError(f"expected {kind.__name__}, got {val!r}", key, _line_of(text, key))
    if isinstance(val, bool) or not out > 0:
        raise ConfigError(f"must be positive, got {val!r}", key, _line_of(text, key))
    return out


def _periods(d: dict, text) -> list[int]:
    if "primes" in d:
        pr = d["primes"]
        if not isinstance(pr, dict) or "max" not in pr:
            raise ConfigError('expected {"min": .., "max": ..}', "primes", _line_of(text, "primes"))
        lo, hi = int(pr.get("min", 2)), int(pr["max"])
        extra = [int(k) for k in d.get("periods", [])]
        ps = [int(p) for p in sieve(hi) if p >= lo]
        return sorted(set(extra) | set(ps))
    raw = d.get("periods", [1])
    if not isinstance(raw, list) or not raw:
        raise ConfigError("expected a non-empty list", "periods", _line_of(text, "periods"))
    out = []
    for i, k in enumerate(raw):
        if isinstance(k, bool) or not isinstance(k, int) or k < 1:
            raise ConfigError(f"period must be an integer >= 1, got {k!r}", f"periods[{i}]",
                              _line_of(text, "periods"))
        out.append(k)
    return out


def from_dict(d: dict, text: str | None = None) -> ExperimentConfig:
    if not isinstance(d, dict):
        raise ConfigError("top level must be an object")
    unknown = sorted(set(d) - KNOWN)
    if unknown:
        raise ConfigError("unknown key", unknown[0], _line_of(text, unknown[0]))
    if "blocks" not in d:
        raise ConfigError("missing", "blocks")
    blocks = d["blocks"]
    if not isinstance(blocks, list):
        raise ConfigError("expected a list", "blocks", _line_of(text, "blocks"))
    try:
        BlockSpec.from_records(blocks)
    except (BlockSpecError, KeyError, TypeError, ValueError) as e:
        raise ConfigError(str(e), "blocks", _line_of(text, "blocks")) from None

    bumps = d.get("bumps", [])
    for i, b in enumerate(bumps):
        try:
            Bump.from_dict(b)
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"invalid bump ({e})", f"bumps[{i}]", _line_of(text, "bumps")) from None

    eps = d.get("epsilon", [1.0, 0.1])
    eps = eps if isinstance(eps, list) else [eps]
    for i, e in enumerate(eps):
        if isinstance(e, bool) or not isinstance(e, (int, float)) or not 0 < e <= 1:
            raise ConfigError(f"epsilon must lie in (0, 1], got {e!r}", f"epsilon[{i}]",
                              _line_of(text, "epsilon"))

    cfg = ExperimentConfig(
        blocks=blocks, bumps=bumps,
        support_radius=_positive(d.get("support_radius"), "support_radius", float, text,
                                 allow_none=True),
        epsilon=[float(e) for e in eps],
        periods=_periods(d, text),
        seed_density=_positive(d.get("seed_density", 15), "seed_density", int, text),
        step=_positive(d.get("step", 1e-2), "step", float, text),
        order=int(d.get("order", 2)),
        grid=_positive(d.get("grid", 41), "grid", int, text),
        seed=int(d.get("seed", 0)),
        output=str(d.get("output", "out")),
        name=str(d.get("name", "experiment")),
    )
    if cfg.order not in (2, 4):
        raise ConfigError("order must be 2 or 4", "order", _line_of(text, "order"))
    w = d.get("window", {}) or {}
    try:
        cfg.window = WindowSettings(**w)
    except TypeError as e:
        raise ConfigError(str(e), "window", _line_of(text, "window")) from None
    if cfg.window.m is not None and cfg.window.m < 1:
        raise ConfigError("must be >= 1", "window.m", _line_of(text, "m"))
    mp = d.get("maxprinciple", {}) or {}
    try:
        cfg.maxprinciple = MaxPrincipleSettings(**mp)
    except TypeError as e:
        raise ConfigError(str(e), "maxprinciple", _line_of(text, "maxprinciple")) from None
    try:
        cfg.system()
    except ValueError as e:
        raise ConfigError(str(e), "bumps", _line_of(text, "bumps")) from None
    return cfg


def loads(text: str) -> ExperimentConfig:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(e.msg, None, e.lineno) from None
    return from_dict(d, text)


def load(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from None
    return loads(text)
