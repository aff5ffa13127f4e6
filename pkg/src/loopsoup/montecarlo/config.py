"""Loop-soup simulation parameters and their key-value file format.

Config file schema (INI syntax, one ``[soup]`` section)::

    [soup]
    intensity = 1.0              # lambda >= 0
    domain = plane               # plane | upper_half_plane
    t_min = 0.01                 # smallest loop duration
    t_max = 100.0                # largest loop duration
    steps_per_loop = 1024        # power of two, >= 64
    window = -3, 3, -3, 3        # x0, x1, y0, y1 for loop roots
    seed = 12345
    replicas = 200
    strata = 8                   # log-duration strata
    coarse_steps = 32            # prefilter resolution
    richardson = true            # two-level extrapolation of the fill
    workers = 1
    translations = 0             # root translations averaged per loop (0: off)
    tail_strata = 0              # strata used to extrapolate beyond t_max (0: off)
    max_step = 0.0               # rms step bound; longer loops get more steps (0: off)
    max_steps_per_loop = 65536   # cap for the duration-adapted step count

Unknown keys are rejected.
"""
from __future__ import annotations

import configparser
import dataclasses
import hashlib
import json
from dataclasses import dataclass

__all__ = ["ConfigError", "SoupConfig", "load_config", "DOMAINS"]

DOMAINS = ("plane", "upper_half_plane")


class ConfigError(ValueError):
    """Invalid simulation configuration."""


@dataclass(frozen=True)
class SoupConfig:
    intensity: float = 1.0
    domain: str = "plane"
    t_min: float = 0.01
    t_max: float = 100.0
    steps_per_loop: int = 1024
    window: tuple = (-3.0, 3.0, -3.0, 3.0)
    seed: int = 0
    replicas: int = 100
    strata: int = 8
    coarse_steps: int = 32
    richardson: bool = True
    workers: int = 1
    translations: int = 0
    tail_strata: int = 0
    max_step: float = 0.0
    max_steps_per_loop: int = 65536

    def __post_init__(self):
        object.__setattr__(self, "window", tuple(float(v) for v in self.window))
        self.validate()

    def validate(self) -> None:
        if not self.intensity >= 0:
            raise ConfigError("intensity must be non-negative")
        if self.domain not in DOMAINS:
            raise ConfigError(f"domain must be one of {DOMAINS}")
        if not 0 < self.t_min < self.t_max:
            raise ConfigError("need 0 < t_min < t_max")
        n = self.steps_per_loop
        if n < 64 or n & (n - 1):
            raise ConfigError("steps_per_loop must be a power of two >= 64")
        c = self.coarse_steps
        if c < 4 or c & (c - 1) or c > n // 2:
            raise ConfigError("coarse_steps must be a power of two in [4, steps_per_loop/2]")
        if len(self.window) != 4:
            raise ConfigError("window needs four numbers x0, x1, y0, y1")
        x0, x1, y0, y1 = self.window
        if not (x0 < x1 and y0 < y1):
            raise ConfigError("window must have x0 < x1 and y0 < y1")
        if self.domain == "upper_half_plane" and y0 < 0:
            raise ConfigError("upper-half-plane window must have y0 >= 0")
        if self.replicas < 1 or self.strata < 1 or self.workers < 1:
            raise ConfigError("replicas, strata and workers must be positive")
        if not self.max_step >= 0:
            raise ConfigError("max_step must be non-negative")
        m = self.max_steps_per_loop
        if m < n or m & (m - 1):
            raise ConfigError("max_steps_per_loop must be a power of two >= steps_per_loop")
        if not 0 <= self.tail_strata <= self.strata:
            raise ConfigError("tail_strata must lie in [0, strata]")
        if self.translations < 0:
            raise ConfigError("translations must be non-negative")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")

    def replace(self, **changes) -> "SoupConfig":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["window"] = list(self.window)
        return d

    def hash(self) -> str:
        """Content hash of the configuration (hex sha256 prefix)."""
        blob = json.dumps(self.as_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


_CASTS = {
    "intensity": float,
    "domain": str,
    "t_min": float,
    "t_max": float,
    "steps_per_loop": int,
    "window": lambda s: tuple(float(v) for v in s.split(",")),
    "seed": int,
    "replicas": int,
    "strata": int,
    "coarse_steps": int,
    "richardson": lambda s: s.strip().lower() in ("1", "true", "yes", "on"),
    "workers": int,
    "translations": int,
    "tail_strata": int,
    "max_step": float,
    "max_steps_per_loop": int,
}


def load_config(path) -> SoupConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    if "soup" not in parser:
        raise ConfigError("config needs a [soup] section")
    kw = {}
    for key, raw in parser["soup"].items():
        if key not in _CASTS:
            raise ConfigError(f"unknown key {key!r}")
        try:
            kw[key] = _CASTS[key](raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    return SoupConfig(**kw)
