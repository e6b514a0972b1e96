"""Physical constants, unit conventions and run configuration.

Natural units (hbar = c = m0 = 1) are the default. The speed of light may be
set to ``INFINITE`` for the quasi-static limit; every formula that contains
``1/c**2`` reads :attr:`PhysicalConfig.inv_c2`, which is exactly ``0.0`` in
that limit instead of a tiny float.
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from .errors import ConfigError, DomainError

INFINITE = math.inf


class MassMode(str, enum.Enum):
    REST = "rest"
    RELATIVISTIC = "relativistic"
    EFFECTIVE = "effective"


@dataclass(frozen=True)
class PhysicalConfig:
    hbar: float = 1.0
    c: float = 1.0
    q: float = -1.0
    m0: float = 1.0
    mass_mode: MassMode = MassMode.RELATIVISTIC
    quasi_static: bool = False

    def __post_init__(self):
        object.__setattr__(self, "mass_mode", MassMode(self.mass_mode))
        # c = INFINITE is the quasi-static limit by definition
        if math.isinf(self.c) and self.c > 0:
            object.__setattr__(self, "quasi_static", True)

    @property
    def c_is_infinite(self) -> bool:
        return math.isinf(self.c)

    @property
    def inv_c2(self) -> float:
        return 0.0 if self.c_is_infinite else 1.0 / (self.c * self.c)

    @property
    def c2(self) -> float:
        if self.c_is_infinite:
            raise ConfigError("c**2 is undefined in the quasi-static limit")
        return self.c * self.c

    def with_c(self, c: float) -> "PhysicalConfig":
        return replace(self, c=c)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mass_mode"] = self.mass_mode.value
        d["c"] = "inf" if self.c_is_infinite else self.c
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PhysicalConfig":
        d = dict(d)
        c = d.get("c", 1.0)
        if isinstance(c, str):
            if c.lower() not in ("inf", "infinite", "infinity"):
                raise ConfigError(f"unrecognised value for c: {c!r}")
            c = INFINITE
        d["c"] = float(c)
        try:
            d["mass_mode"] = MassMode(d.get("mass_mode", MassMode.RELATIVISTIC))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        unknown = set(d) - {"hbar", "c", "q", "m0", "mass_mode", "quasi_static"}
        if unknown:
            raise ConfigError(f"unknown physics keys: {sorted(unknown)}")
        return cls(**d)


def validate_config(cfg: PhysicalConfig) -> PhysicalConfig:
    """Return ``cfg`` unchanged if it is physically admissible, else raise."""
    for name in ("hbar", "m0"):
        val = getattr(cfg, name)
        if not (math.isfinite(val) and val > 0):
            raise ConfigError(f"{name} must be positive and finite, got {val}")
    if not (cfg.c > 0) or math.isnan(cfg.c):
        raise ConfigError(f"c must be positive or INFINITE, got {cfg.c}")
    if not math.isfinite(cfg.q):
        raise ConfigError(f"q must be finite, got {cfg.q}")
    if cfg.quasi_static:
        if cfg.mass_mode is not MassMode.REST:
            raise ConfigError(
                f"quasi_static requires mass_mode=rest, got {cfg.mass_mode.value}")
        if not cfg.c_is_infinite:
            raise ConfigError("quasi_static requires c = INFINITE")
    return cfg


def quasi_static_config(hbar=1.0, q=-1.0, m0=1.0) -> PhysicalConfig:
    """The Schroedinger-limit configuration (c -> infinity, m -> m0)."""
    return validate_config(PhysicalConfig(hbar=hbar, c=INFINITE, q=q, m0=m0,
                                          mass_mode=MassMode.REST, quasi_static=True))


@dataclass(frozen=True)
class KinematicSample:
    v: np.ndarray
    gamma: float


def lorentz_factor(v, cfg: PhysicalConfig) -> float:
    """gamma = 1/sqrt(1 - v^2/c^2) for a scalar or vector velocity."""
    speed2 = float(np.sum(np.square(np.asarray(v, dtype=float))))
    beta2 = speed2 * cfg.inv_c2
    if beta2 >= 1.0:
        raise DomainError(f"|v| = {math.sqrt(speed2)} is not below c = {cfg.c}")
    return 1.0 / math.sqrt(1.0 - beta2)


def kinematic_sample(v, cfg: PhysicalConfig) -> KinematicSample:
    v = np.atleast_1d(np.asarray(v, dtype=float))
    return KinematicSample(v=v, gamma=lorentz_factor(v, cfg))
