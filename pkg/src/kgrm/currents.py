"""Noether four-current, its polar form, the wave velocity, and the monitors that
check local charge conservation and the energy-advection condition.

Time derivatives of diagnostic quantities come from snapshot triplets
(t - dt, t, t + dt) by central differences, never from integrator stages.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularDenominatorError
from .fields import Grid, PolarView, gradient, integrate, l2_norm
from .massmodel import MassField
from .potentials import PotentialSample
from .quantities import PhysicalConfig


@dataclass(frozen=True)
class FourCurrent:
    Jt: np.ndarray
    Jx: np.ndarray
    time: float = 0.0


@dataclass(frozen=True)
class ConservationReport:
    total_charge: float
    continuity_residual_norm: float
    energy_residual_norm: float
    min_Jt: float
    max_Jt: float = float("nan")
    charge_drift: float = 0.0


def lagrangian_density(psi, dtpsi, sample: PotentialSample, mass: MassField, grid: Grid,
                       cfg: PhysicalConfig) -> np.ndarray:
    """Real Lagrangian density whose Euler-Lagrange equation is the wave equation.

    L = -i (hbar m/2)(psi* psi_t - psi psi_t*) + (hbar^2/2)(|psi_x|^2 - |psi_t|^2/c^2)
        + i (q hbar/2)(psi* A psi_x - psi A psi_x*) + V |psi|^2
    """
    psi = np.asarray(psi, dtype=complex)
    dtpsi = np.asarray(dtpsi, dtype=complex)
    hbar, q, ic2 = cfg.hbar, cfg.q, cfg.inv_c2
    m = mass.m_tilde
    dx_psi = gradient(psi, grid)
    conj = psi.conj()
    time_part = -0.5j * hbar * m * (conj * dtpsi - psi * dtpsi.conj())
    grad_part = 0.5 * hbar ** 2 * (np.abs(dx_psi) ** 2 - np.abs(dtpsi) ** 2 * ic2)
    coupling = 0.5j * q * hbar * sample.A * (conj * dx_psi - psi * dx_psi.conj())
    V = m * q * sample.phi + 0.5 * q * q * (sample.phi ** 2 * ic2 + sample.A ** 2)
    return (time_part + coupling).real + grad_part + V * np.abs(psi) ** 2


def noether_current(psi, dtpsi, mass: MassField, sample: PotentialSample, grid: Grid,
                    cfg: PhysicalConfig, time: float = 0.0) -> FourCurrent:
    """J_t = m psi psi* - i hbar (psi psi_t* - psi* psi_t)/(2 c^2),
    J_x = i hbar (psi psi_x* - psi* psi_x)/2 - q A psi psi*."""
    psi = np.asarray(psi, dtype=complex)
    dtpsi = np.asarray(dtpsi, dtype=complex)
    hbar = cfg.hbar
    rho = (psi * psi.conj()).real
    dx_psi = gradient(psi, grid)
    Jt = mass.m_tilde * rho + (-0.5j * hbar * cfg.inv_c2
                               * (psi * dtpsi.conj() - psi.conj() * dtpsi)).real
    Jx = (0.5j * hbar * (psi * dx_psi.conj() - psi.conj() * dx_psi)).real - cfg.q * sample.A * rho
    return FourCurrent(Jt, Jx, time)


def polar_current(polar: PolarView, mass: MassField, sample: PotentialSample,
                  cfg: PhysicalConfig) -> FourCurrent:
    """J_t = (m - S_t/c^2) R^2, J_x = (S_x - q A) R^2; zero on masked nodes."""
    Jt = (mass.m_tilde - polar.dtS * cfg.inv_c2) * polar.rho
    Jx = (polar.gradS - cfg.q * sample.A) * polar.rho
    return FourCurrent(np.where(polar.mask, 0.0, Jt), np.where(polar.mask, 0.0, Jx),
                       polar.time)


def default_eps_denom(cfg: PhysicalConfig) -> float:
    """Threshold on (m - S_t/c^2), i.e. 1e-9 m0 c^2 expressed in mass units."""
    return 1e-9 * cfg.m0


def wave_velocity(polar: PolarView, mass: MassField, sample: PotentialSample,
                  cfg: PhysicalConfig, eps_denom=None, strict: bool = True) -> np.ndarray:
    """v = (S_x - q A) c^2 / (m c^2 - S_t) on unmasked points, 0 on nodes.

    With ``strict`` a denominator below ``eps_denom`` raises
    :class:`SingularDenominatorError`; otherwise those points are set to NaN.
    """
    eps = default_eps_denom(cfg) if eps_denom is None else eps_denom
    denom = mass.m_tilde - polar.dtS * cfg.inv_c2
    bad = polar.unmasked & (np.abs(denom) < eps)
    if strict and np.any(bad):
        raise SingularDenominatorError(np.flatnonzero(bad), eps)
    safe = np.where(bad | polar.mask, 1.0, denom)
    v = (polar.gradS - cfg.q * sample.A) / safe
    v = np.where(polar.mask, 0.0, v)
    return np.where(bad, np.nan, v)


# --- balances -----------------------------------------------------------------

def continuity_field(prev: FourCurrent, cur: FourCurrent, nxt: FourCurrent, dt: float,
                     grid: Grid) -> np.ndarray:
    """dJ_t/dt + dJ_x/dx with central differences in t and x."""
    return (nxt.Jt - prev.Jt) / (2.0 * dt) + gradient(cur.Jx, grid)


def continuity_residual(prev: FourCurrent, cur: FourCurrent, nxt: FourCurrent, dt: float,
                        grid: Grid, reference_charge=None):
    """Returns ``(field, l2 norm, total charge, relative charge drift)``."""
    field = continuity_field(prev, cur, nxt, dt, grid)
    q_now = integrate(cur.Jt, grid)
    ref = integrate(prev.Jt, grid) if reference_charge is None else reference_charge
    drift = (q_now - ref) / ref if ref != 0 else 0.0
    return field, l2_norm(field, grid), q_now, drift


def density_balance(polar: PolarView, box_S, velocity, mass: MassField,
                    cfg: PhysicalConfig) -> np.ndarray:
    """rho_t + v.grad(rho) + rho c^2 box S/(m c^2 - S_t), multiplied through by (m - S_t/c^2).

    The multiplied form stays finite where the velocity denominator is small
    and is the local Noether balance when the mass obeys dm/dt = q div A.
    """
    rho_t = 2.0 * polar.R * polar.dtR
    rho_x = 2.0 * polar.R * polar.gradR
    energy_over_c2 = mass.m_tilde - polar.dtS * cfg.inv_c2
    out = energy_over_c2 * (rho_t + velocity * rho_x) + polar.rho * box_S
    return np.where(polar.mask, 0.0, out)


def long_form_continuity_residual(prev: PolarView, polar: PolarView, nxt: PolarView,
                                  mass_prev: MassField, mass: MassField, mass_next: MassField,
                                  velocity, dt: float, grid: Grid,
                                  cfg: PhysicalConfig) -> np.ndarray:
    """rho_t + div(rho v) + [D_t (m c^2 - S_t)] rho/(m c^2 - S_t), D_t the material derivative.

    Written per unit c^2 so that it also holds at c = INFINITE.
    """
    ic2 = cfg.inv_c2
    e = lambda p, m: m.m_tilde - p.dtS * ic2  # noqa: E731
    e_now = e(polar, mass)
    de_dt = (e(nxt, mass_next) - e(prev, mass_prev)) / (2.0 * dt)
    de_dx = gradient(mass.m_tilde, grid) - polar.grad_dtS * ic2
    rho_t = (nxt.rho - prev.rho) / (2.0 * dt)
    flux = gradient(polar.rho * velocity, grid)
    safe = np.where(polar.mask, 1.0, e_now)
    out = rho_t + flux + (de_dt + velocity * de_dx) * polar.rho / safe
    return np.where(polar.mask, 0.0, out)


@dataclass(frozen=True)
class EnergyAdvection:
    total_form: np.ndarray      # D_t (m c^2 + E_psi)
    potential_form: np.ndarray  # D_t (E_psi - q phi)

    @property
    def max_disagreement(self) -> float:
        return float(np.max(np.abs(self.total_form - self.potential_form)))


def energy_advection_residual(prev: PolarView, polar: PolarView, nxt: PolarView,
                              mass_prev: MassField, mass: MassField, mass_next: MassField,
                              phi_prev, phi, phi_next, velocity, dt: float, grid: Grid,
                              cfg: PhysicalConfig) -> EnergyAdvection:
    """Material derivative along v of the wave energy, E_psi = -S_t, in two forms.

    ``total_form`` uses m c^2 + E_psi; ``potential_form`` uses E_psi - q phi.
    They coincide whenever m c^2 + q phi = m0 c^2 holds at all three times.
    """
    mask = polar.mask
    dE_dt = -(nxt.dtS - prev.dtS) / (2.0 * dt)
    dE_dx = -polar.grad_dtS
    if cfg.quasi_static:
        dm_dt = np.zeros(grid.n)
        dm_dx = np.zeros(grid.n)
    else:
        dm_dt = cfg.c2 * (mass_next.m_tilde - mass_prev.m_tilde) / (2.0 * dt)
        dm_dx = cfg.c2 * gradient(mass.m_tilde, grid)
    dphi_dt = cfg.q * (np.asarray(phi_next) - np.asarray(phi_prev)) / (2.0 * dt)
    dphi_dx = cfg.q * gradient(np.asarray(phi, dtype=float), grid)
    total = dm_dt + dE_dt + velocity * (dm_dx + dE_dx)
    potential = dE_dt - dphi_dt + velocity * (dE_dx - dphi_dx)
    return EnergyAdvection(np.where(mask, 0.0, total), np.where(mask, 0.0, potential))


def weighted_norm(field, weight, grid: Grid) -> float:
    """sqrt(sum w f^2 / sum w): an L2 norm under the normalised weight ``w``."""
    w = np.asarray(weight, dtype=float)
    f = np.asarray(field, dtype=float)
    tot = math.fsum(w.tolist())
    if tot == 0:
        return 0.0
    return math.sqrt(math.fsum((w * f * f).tolist()) / tot)


def centroid(Jt, grid: Grid) -> float:
    """First moment of J_t on [0, L); packets must stay clear of the seam."""
    tot = integrate(Jt, grid)
    return integrate(grid.x * Jt, grid) / tot if tot != 0 else float("nan")

