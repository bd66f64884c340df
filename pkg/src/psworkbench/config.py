"""Run configuration: a TOML file plus command-line overrides.

Every key has a default, so an empty config runs.  Points are given in
upper half-plane coordinates ``[x, y]`` and generators as half-plane
matrices ``[[a, b], [c, d]]``.

Example::

    preset = "schottky_perp"
    radius = 12
    s = "auto"
    bins = 2048

    [preset_params]
    lam = 4.0

    [thresholds]
    myrberg = 0.25
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .dynamics import Thresholds
from .groups import MobiusMap, GroupPreset, get_preset, PRESETS
from .hyperbolic import DiskPoint, halfplane_to_disk

DET_TOL = 1e-9
MAX_RADIUS = 30.0


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    preset: str | None = "modular"
    generators: list | None = None
    preset_params: dict = field(default_factory=dict)
    p: tuple[float, float] = (0.0, 1.0)
    q: tuple[float, float] | None = None
    radius: float | None = None
    s: float | str = "auto"
    margin: float = 0.05
    bins: int = 1024
    samples: int = 50
    seed: int = 0
    thresholds: dict = field(default_factory=dict)
    out: str = "out"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.generators is None and self.preset is None:
            raise ConfigError("give a preset name or inline generators")
        if self.generators is None and self.preset not in PRESETS:
            raise ConfigError(f"unknown preset {self.preset!r}; choose from {sorted(PRESETS)}")
        if self.radius is not None and not 0 < float(self.radius) <= MAX_RADIUS:
            raise ConfigError(f"radius must lie in (0, {MAX_RADIUS:g}]")
        b = int(self.bins)
        if b != self.bins or not 64 <= b <= 65536 or b & (b - 1):
            raise ConfigError("bins must be a power of two in [64, 65536]")
        if not (self.s == "auto" or (isinstance(self.s, (int, float)) and self.s >= 0)):
            raise ConfigError("s must be 'auto' or a nonnegative number")
        if not self.margin >= 0:
            raise ConfigError("margin must be nonnegative")
        if self.samples < 1:
            raise ConfigError("samples must be positive")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        for pt in (self.p, self.q):
            if pt is not None and (len(pt) != 2 or not float(pt[1]) > 0):
                raise ConfigError(f"point {pt} is not in the upper half-plane")
        known = {f.name for f in fields(Thresholds)}
        extra = set(self.thresholds) - known
        if extra:
            raise ConfigError(f"unknown threshold keys {sorted(extra)}")

    # derived objects

    def group(self) -> GroupPreset:
        if self.generators is None:
            return get_preset(self.preset, **self.preset_params)
        gens = [MobiusMap.from_matrix(m, det_tol=DET_TOL) for m in self.generators]
        return GroupPreset(self.preset or "custom", gens, default_radius=10.0)

    def radius_for(self, group: GroupPreset) -> float:
        return group.default_radius if self.radius is None else float(self.radius)

    def point_p(self) -> DiskPoint:
        return _disk(self.p)

    def point_q(self) -> DiskPoint:
        return _disk(self.p if self.q is None else self.q)

    def threshold_set(self) -> Thresholds:
        return Thresholds(**{**self.thresholds, "margin": self.margin})

    def to_dict(self) -> dict:
        return {
            "preset": self.preset,
            "generators": self.generators,
            "preset_params": dict(self.preset_params),
            "p": list(self.p),
            "q": None if self.q is None else list(self.q),
            "radius": self.radius,
            "s": self.s,
            "margin": self.margin,
            "bins": self.bins,
            "samples": self.samples,
            "seed": self.seed,
            "thresholds": dict(self.thresholds),
        }


def _disk(pt) -> DiskPoint:
    z = complex(halfplane_to_disk(complex(float(pt[0]), float(pt[1]))))
    # snap the round trip of i to the exact origin
    return DiskPoint(0.0 if abs(z.real) < 1e-15 else z.real, 0.0 if abs(z.imag) < 1e-15 else z.imag)


def load_config(path: str | Path | None = None, **overrides) -> RunConfig:
    """Read ``path`` (TOML) if given, then apply non-None ``overrides``."""
    data: dict = {}
    if path is not None:
        with open(path, "rb") as fh:
            try:
                data = tomllib.load(fh)
            except tomllib.TOMLDecodeError as exc:
                raise ConfigError(f"{path}: {exc}") from None
    known = {f.name for f in fields(RunConfig)}
    extra = set(data) - known
    if extra:
        raise ConfigError(f"unknown config keys {sorted(extra)}")
    data.update({k: v for k, v in overrides.items() if v is not None})
    if "generators" in data and "preset" not in data:
        data["preset"] = None
    for key in ("p", "q"):
        if data.get(key) is not None:
            data[key] = tuple(float(x) for x in data[key])
    if isinstance(data.get("s"), int):
        data["s"] = float(data["s"])
    try:
        return RunConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None

