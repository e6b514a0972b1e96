"""Relativistic and effective mass fields and the gauge/energy identities that tie
them to the potentials.

Energy bookkeeping: ``m0 c^2 = m c^2 + q phi``. In RELATIVISTIC mode the mass
is fixed by the potential at t=0 (conservative processes need static
potentials); in EFFECTIVE mode it starts from the same value and then follows
``dm/dt = -(q/c^2) dphi/dt``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, MisuseError
from .fields import Grid, gradient, l2_norm
from .potentials import PotentialSet
from .quantities import MassMode, PhysicalConfig

GAUGE_TOL = 1e-10


@dataclass(frozen=True)
class MassField:
    m_tilde: np.ndarray
    mode: MassMode


def relativistic_mass(phi, cfg: PhysicalConfig) -> MassField:
    phi = np.asarray(phi, dtype=float)
    qphi = cfg.q * phi
    if np.any(qphi > 0):
        i = int(np.argmax(qphi))
        raise DomainError(f"q*phi = {qphi.flat[i]:.3g} > 0 at index {i}: the relativistic "
                          "mass is only defined for a particle with q*phi <= 0")
    if cfg.quasi_static:
        return MassField(np.full(phi.shape, cfg.m0), MassMode.REST)
    return MassField(cfg.m0 - qphi * cfg.inv_c2, MassMode.RELATIVISTIC)


def initial_mass(potentials: PotentialSet, grid: Grid, cfg: PhysicalConfig,
                 t: float = 0.0) -> MassField:
    if cfg.mass_mode is MassMode.REST:
        return MassField(np.full(grid.n, cfg.m0), MassMode.REST)
    m = relativistic_mass(potentials.sample(t, grid).phi, cfg)
    return MassField(m.m_tilde, cfg.mass_mode)


def mass_rate(potentials: PotentialSet, t: float, grid: Grid, cfg: PhysicalConfig,
              source: str = "dt_phi") -> np.ndarray:
    """dm/dt from the scalar potential (primary) or from div A (cross-check)."""
    s = potentials.sample(t, grid)
    if source == "dt_phi":
        return -cfg.q * cfg.inv_c2 * s.dt_phi
    if source == "div_A":
        return cfg.q * s.div_A
    raise ValueError(f"unknown mass source {source!r}")


def step_effective_mass(mass: MassField, potentials: PotentialSet, t: float, dt: float,
                        grid: Grid, cfg: PhysicalConfig, source: str = "dt_phi") -> MassField:
    """Advance m by one RK4 step; the rate does not depend on m, so this is Simpson's rule."""
    if mass.mode is not MassMode.EFFECTIVE:
        raise MisuseError(f"step_effective_mass needs EFFECTIVE mode, got {mass.mode.value}")
    if potentials.static:
        return mass
    r0 = mass_rate(potentials, t, grid, cfg, source)
    r1 = mass_rate(potentials, t + 0.5 * dt, grid, cfg, source)
    r2 = mass_rate(potentials, t + dt, grid, cfg, source)
    return MassField(mass.m_tilde + dt / 6.0 * (r0 + 4.0 * r1 + r2), mass.mode)


def gauge_residual(potentials: PotentialSet, grid: Grid, cfg: PhysicalConfig,
                   t: float = 0.0, method: str = "analytic") -> np.ndarray:
    """c^-2 dphi/dt + div A; with c infinite this is the Coulomb residual div A.

    ``method="stencil"`` replaces the analytic divergence by the grid gradient of A.
    """
    s = potentials.sample(t, grid)
    div_A = s.div_A if method == "analytic" else gradient(s.A, grid)
    return cfg.inv_c2 * s.dt_phi + div_A


def gauge_residual_norm(potentials, grid, cfg, t=0.0) -> float:
    return l2_norm(gauge_residual(potentials, grid, cfg, t), grid)


def energy_identity_residual(mass: MassField, phi, cfg: PhysicalConfig) -> np.ndarray:
    """m c^2 + q phi - m0 c^2; zero when the mass tracks the potential."""
    if mass.mode is MassMode.REST:
        raise MisuseError("energy identity is defined for RELATIVISTIC/EFFECTIVE mass only")
    c2 = cfg.c2
    return (mass.m_tilde - cfg.m0) * c2 + cfg.q * np.asarray(phi, dtype=float)
