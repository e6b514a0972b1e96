"""Built-in scalar/vector potential pairs with analytic time and space derivatives.

Every built-in satisfies the Lorenz gauge ``dphi/dt / c^2 + dA/dx = 0``
exactly. ``A`` is the x-component of the vector potential.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError
from .fields import Grid
from .quantities import PhysicalConfig


@dataclass(frozen=True)
class PotentialSample:
    phi: np.ndarray
    A: np.ndarray
    dt_phi: np.ndarray
    div_A: np.ndarray


class PotentialSet:
    """Space-time potentials. Subclasses implement ``_eval(t, x)``."""

    kind = "abstract"
    static = True

    def __init__(self):
        self._cache = {}

    def _eval(self, t: float, x: np.ndarray):
        raise NotImplementedError

    def sample(self, t: float, grid: Grid) -> PotentialSample:
        if self.static:
            key = (grid.n, grid.dx)
            if key not in self._cache:
                self._cache[key] = self._build(0.0, grid.x)
            return self._cache[key]
        return self._build(t, grid.x)

    def _build(self, t, x):
        phi, A, dt_phi, div_A = self._eval(t, x)
        b = np.broadcast_to
        return PotentialSample(*(np.array(b(np.asarray(v, dtype=float), x.shape))
                                 for v in (phi, A, dt_phi, div_A)))

    def params(self) -> dict:
        raise NotImplementedError

    def check_charge_sign(self, q: float, grid: Grid, times) -> None:
        """Reject any sample with q*phi > 0; only the particle branch is modelled."""
        for t in times:
            qphi = q * self.sample(t, grid).phi
            if np.any(qphi > 0):
                i = int(np.argmax(qphi))
                raise DomainError(
                    f"{self.kind} potential has q*phi = {qphi[i]:.3g} > 0 at x={grid.x[i]:.4g},"
                    f" t={t:.4g}; a particle requires q*phi <= 0 everywhere")


class UniformPotentials(PotentialSet):
    kind = "uniform"

    def __init__(self, phi0=0.0, A0=0.0):
        super().__init__()
        self.phi0, self.A0 = float(phi0), float(A0)

    def _eval(self, t, x):
        return self.phi0, self.A0, 0.0, 0.0

    def params(self):
        return {"kind": self.kind, "phi0": self.phi0, "A0": self.A0}


class TimeRampPotentials(PotentialSet):
    """phi = phi0 (1 + alpha t), uniform in space.

    The Lorenz partner is ``A = -phi0 alpha (x - x_ref) / c^2``; it is linear
    in x and therefore jumps at the periodic seam, so wave packets driven by
    this pair should stay away from ``x_ref +- L/2``.
    """
    kind = "time-ramp"
    static = False

    def __init__(self, phi0, alpha, x_ref, inv_c2):
        super().__init__()
        self.phi0, self.alpha, self.x_ref = float(phi0), float(alpha), float(x_ref)
        self.inv_c2 = float(inv_c2)

    def _eval(self, t, x):
        rate = self.phi0 * self.alpha
        return (self.phi0 * (1.0 + self.alpha * t), -rate * self.inv_c2 * (x - self.x_ref),
                rate, -rate * self.inv_c2)

    def params(self):
        return {"kind": self.kind, "phi0": self.phi0, "alpha": self.alpha, "x_ref": self.x_ref}


class GaussianWell(PotentialSet):
    """Static phi0 exp(-d^2 / 2 w^2), d the minimum-image distance to ``center``."""
    kind = "gaussian-well"

    def __init__(self, phi0, center, width, length):
        super().__init__()
        if width <= 0:
            raise ConfigError("gaussian-well width must be positive")
        self.phi0, self.center, self.width = float(phi0), float(center), float(width)
        self.length = float(length)

    def _eval(self, t, x):
        d = (x - self.center + 0.5 * self.length) % self.length - 0.5 * self.length
        return self.phi0 * np.exp(-0.5 * (d / self.width) ** 2), 0.0, 0.0, 0.0

    def params(self):
        return {"kind": self.kind, "phi0": self.phi0, "center": self.center,
                "width": self.width}


class TravelingGaugePair(PotentialSet):
    """phi = f(x - ct), A = f(x - ct)/c with a smooth periodic bump f.

    ``f(s) = phi0 exp(kappa (cos(2 pi s / L) - 1))`` with kappa chosen so the
    bump has Gaussian width ``width`` near its peak.
    """
    kind = "traveling-gauge-pair"
    static = False

    def __init__(self, phi0, center, width, length, c):
        super().__init__()
        if not math.isfinite(c):
            raise ConfigError("traveling-gauge-pair needs a finite speed of light")
        self.phi0, self.center, self.width = float(phi0), float(center), float(width)
        self.length, self.c = float(length), float(c)
        self.kappa = (self.length / (2.0 * math.pi * self.width)) ** 2

    def profile(self, s):
        arg = 2.0 * np.pi * s / self.length
        f = self.phi0 * np.exp(self.kappa * (np.cos(arg) - 1.0))
        df = -f * self.kappa * np.sin(arg) * 2.0 * np.pi / self.length
        return f, df

    def _eval(self, t, x):
        f, df = self.profile(x - self.center - self.c * t)
        return f, f / self.c, -self.c * df, df / self.c

    def params(self):
        return {"kind": self.kind, "phi0": self.phi0, "center": self.center,
                "width": self.width}


def build_potentials(spec: dict, grid: Grid, cfg: PhysicalConfig) -> PotentialSet:
    """Instantiate a built-in from its parameter table."""
    spec = dict(spec)
    kind = spec.pop("kind", "uniform")
    mid = 0.5 * grid.length
    try:
        if kind == "uniform":
            pot = UniformPotentials(spec.pop("phi0", 0.0), spec.pop("A0", 0.0))
        elif kind == "time-ramp":
            pot = TimeRampPotentials(spec.pop("phi0"), spec.pop("alpha"),
                                     spec.pop("x_ref", mid), cfg.inv_c2)
        elif kind == "gaussian-well":
            pot = GaussianWell(spec.pop("phi0"), spec.pop("center", mid),
                               spec.pop("width"), grid.length)
        elif kind == "traveling-gauge-pair":
            pot = TravelingGaugePair(spec.pop("phi0"), spec.pop("center", mid),
                                     spec.pop("width"), grid.length, cfg.c)
        else:
            raise ConfigError(f"unknown potential kind {kind!r}")
    except KeyError as exc:
        raise ConfigError(f"{kind} potential is missing parameter {exc}") from None
    if spec:
        raise ConfigError(f"unknown {kind} parameters: {sorted(spec)}")
    return pot
