"""Dispersion relation, group velocities, the amplitude/phase split of the wave
equation, and the vacuum-analogy scalars.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import Grid, PolarView
from .massmodel import MassField
from .potentials import PotentialSample
from .quantities import PhysicalConfig

BOX_R_GATE = 1e-6


@dataclass(frozen=True)
class DispersionPoint:
    k: float
    omega_plus: float
    omega_minus: float
    vg_plus: float
    vg_minus: float


def _rest_and_kinetic(k, A0, cfg):
    """(m0 c^2/hbar, (k - qA0/hbar) c) as arrays."""
    a = cfg.m0 * cfg.c2 / cfg.hbar
    b = (np.asarray(k, dtype=float) - cfg.q * A0 / cfg.hbar) * cfg.c
    return a, b


def omega_branches(k, A0, m_tilde, cfg: PhysicalConfig):
    """omega_pm = -m c^2/hbar pm sqrt((m0 c^2/hbar)^2 + (k - q A0/hbar)^2 c^2).

    The + branch is evaluated as ``(m0 - m) c^2/hbar + b^2/(a + sqrt(a^2 + b^2))``
    to avoid cancellation at large c. In the quasi-static limit the + branch
    is the Schroedinger dispersion and the - branch is -inf.
    """
    k = np.asarray(k, dtype=float)
    if cfg.quasi_static:
        kin = cfg.hbar * (k - cfg.q * A0 / cfg.hbar) ** 2 / (2.0 * cfg.m0)
        return _scalar(kin), _scalar(np.full(k.shape, -np.inf))
    a, b = _rest_and_kinetic(k, A0, cfg)
    root = np.hypot(a, b)
    bias = (cfg.m0 - m_tilde) * cfg.c2 / cfg.hbar
    omega_plus = bias + b * b / (a + root)
    omega_minus = -m_tilde * cfg.c2 / cfg.hbar - root
    return _scalar(omega_plus), _scalar(omega_minus)


def _scalar(a):
    return float(a) if np.ndim(a) == 0 else a


def group_velocity(k, A0, cfg: PhysicalConfig, branch: str = "+"):
    """d omega_pm / dk = pm (hbar k - q A0) c^2 / sqrt(m0^2 c^4 + (hbar k - q A0)^2 c^2)."""
    p = cfg.hbar * np.asarray(k, dtype=float) - cfg.q * A0
    if cfg.quasi_static:
        v = p / cfg.m0
    else:
        v = p * cfg.c2 / np.sqrt((cfg.m0 * cfg.c2) ** 2 + p * p * cfg.c2)
    if branch == "+":
        return _scalar(v)
    if branch == "-":
        return _scalar(-v)
    raise ValueError(f"branch must be '+' or '-', got {branch!r}")


def dispersion_point(k, A0, m_tilde, cfg) -> DispersionPoint:
    wp, wm = omega_branches(k, A0, m_tilde, cfg)
    return DispersionPoint(float(k), wp, wm, group_velocity(k, A0, cfg, "+"),
                           group_velocity(k, A0, cfg, "-"))


def dispersion_residual_polar(polar: PolarView, mass: MassField, sample: PotentialSample,
                              cfg: PhysicalConfig) -> np.ndarray:
    """(m c^2 - dS/dt)^2 - m0^2 c^4 - (dS/dx - q A)^2 c^2 on unmasked points (0 elsewhere)."""
    c2 = cfg.c2
    energy = mass.m_tilde * c2 - polar.dtS
    p = polar.gradS - cfg.q * sample.A
    res = energy * energy - (cfg.m0 * c2) ** 2 - p * p * c2
    return np.where(polar.mask, 0.0, res)


def box_R_gate(box_R, R, grid: Grid, threshold: float = BOX_R_GATE) -> np.ndarray:
    """Points where the amplitude obeys box R ~ 0 closely enough to test the dispersion relation."""
    return np.abs(box_R) < threshold * float(np.max(R)) / grid.dx ** 2


def second_time_derivatives(prev: PolarView, nxt: PolarView, dt: float):
    """Central differences of dS/dt and dR/dt across a snapshot triplet."""
    return (nxt.dtS - prev.dtS) / (2.0 * dt), (nxt.dtR - prev.dtR) / (2.0 * dt)


def appendix_split_residuals(prev: PolarView, polar: PolarView, nxt: PolarView,
                             mass: MassField, sample: PotentialSample, dt: float,
                             cfg: PhysicalConfig):
    """Imaginary and real parts of the wave equation in amplitude/phase form.

    Returns ``(phase_res, amplitude_res, box_S, box_R)`` where

        phase_res     = box S + (2/(c^2 R)) [(m c^2 - dS/dt) dR/dt + c^2 (S' - qA) R']
        amplitude_res = box R - ((S' - qA)^2 c^2 + m0^2 c^4 - (m c^2 - dS/dt)^2) R/(hbar^2 c^2)

    ``phase_res * R^2`` is the local charge balance; ``amplitude_res`` measures
    how far box R is from the value implied by the local dispersion.
    """
    ic2 = cfg.inv_c2
    ok = polar.unmasked
    dttS, dttR = second_time_derivatives(prev, polar if nxt is None else nxt, dt)
    box_S = polar.lapS - ic2 * dttS
    box_R = polar.lapR - ic2 * dttR
    p = polar.gradS - cfg.q * sample.A
    m = mass.m_tilde
    energy_over_c2 = m - polar.dtS * ic2
    safe_R = np.where(ok, polar.R, 1.0)
    phase = box_S + 2.0 / safe_R * (energy_over_c2 * polar.dtR + p * polar.gradR)
    if cfg.quasi_static:
        mass_term = 2.0 * m * polar.dtS
    else:
        c2 = cfg.c2
        mass_term = (cfg.m0 - m) * (cfg.m0 + m) * c2 + 2.0 * m * polar.dtS - polar.dtS ** 2 * ic2
    amplitude = box_R - (p * p + mass_term) * polar.R / cfg.hbar ** 2
    return (np.where(ok, phase, 0.0), np.where(ok, amplitude, 0.0),
            np.where(ok, box_S, 0.0), np.where(ok, box_R, 0.0))


def vacuum_scalars(m: float, cfg: PhysicalConfig):
    """(omega_V, |K|) with omega_V = 2 m c^2/hbar and |K| = hbar/(2m); |K| omega_V = c^2."""
    if not m > 0:
        raise ValueError(f"mass must be positive, got {m}")
    omega_v = 2.0 * m * cfg.c2 / cfg.hbar
    k_abs = cfg.hbar / (2.0 * m)
    if not math.isclose(k_abs * omega_v, cfg.c2, rel_tol=8 * np.finfo(float).eps):
        raise ArithmeticError("|K| omega_V != c^2")
    return omega_v, k_abs


def complex_diffusivity(m: float, cfg: PhysicalConfig) -> complex:
    """K = hbar/(-2 i m), the coefficient of box psi in the divided form."""
    return cfg.hbar / (-2j * m)
