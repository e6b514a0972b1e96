"""Time evolution of the Klein-Gordon equation with relativistic mass.

The wave equation is advanced in its multiplied-through form

    i hbar m dpsi/dt + (hbar^2/2) box psi - i hbar q A dpsi/dx
        = [m q phi + (q^2/2)(phi^2/c^2 + A^2)] psi,      box = d2/dx2 - c^-2 d2/dt2,

as a first-order system in (psi, dpsi/dt) with classical RK4 (method of
lines). Nothing is ever divided by the mass. The quasi-static reference
(c -> infinity, m -> m0) is the Schroedinger equation, stepped by
:func:`step_schrodinger`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, DivergenceError, MisuseError
from .fields import Grid, gradient, laplacian
from .massmodel import MassField, initial_mass, mass_rate, relativistic_mass
from .potentials import PotentialSample, PotentialSet
from .quantities import MassMode, PhysicalConfig


@dataclass(frozen=True)
class EvolutionState:
    psi: np.ndarray
    dtpsi: np.ndarray
    t: float
    mass: MassField

    def __post_init__(self):
        if not (np.shape(self.psi) == np.shape(self.dtpsi) == np.shape(self.mass.m_tilde)):
            raise ConfigError("psi, dtpsi and mass must share the grid")


@dataclass(frozen=True)
class StepperSpec:
    dt: float
    safety: float = 0.5
    scheme: str = "RK4_MOL"

    def __post_init__(self):
        if self.scheme != "RK4_MOL":
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        if not 0.0 < self.safety <= 1.0:
            raise ConfigError(f"safety factor must lie in (0, 1], got {self.safety}")
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")


def _potential_energy(m, s: PotentialSample, cfg: PhysicalConfig):
    q = cfg.q
    return m * q * s.phi + 0.5 * q * q * (s.phi * s.phi * cfg.inv_c2 + s.A * s.A)


def _kg_accel(psi, dtpsi, m, s: PotentialSample, grid: Grid, cfg: PhysicalConfig):
    hbar = cfg.hbar
    bracket = m * dtpsi
    if np.any(s.A):
        bracket = bracket - cfg.q * s.A * gradient(psi, grid)
    V = _potential_energy(m, s, cfg)
    return cfg.c2 * ((2j / hbar) * bracket - (2.0 / hbar ** 2) * V * psi + laplacian(psi, grid))


def kg_rhs(state: EvolutionState, potentials: PotentialSet, grid: Grid,
           cfg: PhysicalConfig):
    """Right-hand side ``(dpsi/dt, d(dpsi/dt)/dt)`` of the first-order system."""
    if cfg.quasi_static:
        raise MisuseError("kg_rhs is undefined for c = INFINITE; use schrodinger_rhs")
    s = potentials.sample(state.t, grid)
    return state.dtpsi, _kg_accel(state.psi, state.dtpsi, state.mass.m_tilde, s, grid, cfg)


def _mass_of(mass, cfg) -> float:
    if mass is None:
        return cfg.m0
    m = mass.m_tilde if isinstance(mass, MassField) else mass
    return float(np.max(m))


def stable_dt(grid: Grid, cfg: PhysicalConfig, mass=None, safety: float = 0.5) -> float:
    """safety * min(hbar/(m c^2), dx/c, m0 dx^2/hbar).

    The first bound resolves the rest-energy oscillation 2 m c^2/hbar, the
    second is the wave CFL bound, the third the parabolic bound. In the
    quasi-static limit only the parabolic bound remains.
    """
    parabolic = cfg.m0 * grid.dx ** 2 / cfg.hbar
    if cfg.quasi_static:
        return safety * parabolic
    m = _mass_of(mass, cfg)
    return safety * min(cfg.hbar / (m * cfg.c2), grid.dx / cfg.c, parabolic)


def check_dt(spec: StepperSpec, grid: Grid, cfg: PhysicalConfig, mass=None) -> None:
    limit = stable_dt(grid, cfg, mass, spec.safety)
    if spec.dt > limit * (1.0 + 1e-12):
        raise ConfigError(f"dt={spec.dt:.6g} exceeds the stable step {limit:.6g}")


def _check_finite(arrays, t, dt):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise DivergenceError(t, dt)


def step_kg(state: EvolutionState, potentials: PotentialSet, grid: Grid,
            spec: StepperSpec | float, cfg: PhysicalConfig,
            mass_source: str = "dt_phi", check: bool = True) -> EvolutionState:
    """One RK4 step of (psi, dpsi/dt) and, in EFFECTIVE mode, of the mass."""
    if cfg.quasi_static:
        raise MisuseError("step_kg needs finite c; use step_schrodinger")
    h = spec.dt if isinstance(spec, StepperSpec) else float(spec)
    t = state.t
    s0 = potentials.sample(t, grid)
    s1 = potentials.sample(t + 0.5 * h, grid)
    s2 = potentials.sample(t + h, grid)
    m0 = state.mass.m_tilde
    evolve_mass = state.mass.mode is MassMode.EFFECTIVE and not potentials.static
    if evolve_mass:
        r0 = mass_rate(potentials, t, grid, cfg, mass_source)
        r1 = mass_rate(potentials, t + 0.5 * h, grid, cfg, mass_source)
        r2 = mass_rate(potentials, t + h, grid, cfg, mass_source)
        m_half_a = m0 + 0.5 * h * r0
        m_half_b = m0 + 0.5 * h * r1
        m_full = m0 + h * r1
        m_new = m0 + h / 6.0 * (r0 + 4.0 * r1 + r2)
    else:
        m_half_a = m_half_b = m_full = m_new = m0

    psi, v = state.psi, state.dtpsi
    k1p, k1v = v, _kg_accel(psi, v, m0, s0, grid, cfg)
    p2, v2 = psi + 0.5 * h * k1p, v + 0.5 * h * k1v
    k2p, k2v = v2, _kg_accel(p2, v2, m_half_a, s1, grid, cfg)
    p3, v3 = psi + 0.5 * h * k2p, v + 0.5 * h * k2v
    k3p, k3v = v3, _kg_accel(p3, v3, m_half_b, s1, grid, cfg)
    p4, v4 = psi + h * k3p, v + h * k3v
    k4p, k4v = v4, _kg_accel(p4, v4, m_full, s2, grid, cfg)
    psi_new = psi + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
    v_new = v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    if check:
        _check_finite((psi_new, v_new), t + h, h)
    mass = state.mass if m_new is m0 else MassField(m_new, state.mass.mode)
    return EvolutionState(psi_new, v_new, t + h, mass)


def evolve_kg(state: EvolutionState, potentials: PotentialSet, grid: Grid,
              cfg: PhysicalConfig, dt: float, nsteps: int, mass_source: str = "dt_phi",
              observer=None) -> EvolutionState:
    """Apply ``nsteps`` RK4 steps; ``observer(step, state)`` is called after each."""
    for i in range(nsteps):
        state = step_kg(state, potentials, grid, dt, cfg, mass_source)
        if observer is not None:
            observer(i + 1, state)
    return state


def time_reversed(state: EvolutionState) -> EvolutionState:
    """psi -> psi*, dpsi/dt -> -(dpsi/dt)*: the discrete time-reversal map."""
    return replace(state, psi=state.psi.conj(), dtpsi=-state.dtpsi.conj())


# --- quasi-static reference ---------------------------------------------------

def schrodinger_rhs(psi, t: float, potentials: PotentialSet, grid: Grid,
                    cfg: PhysicalConfig) -> np.ndarray:
    """dpsi/dt = (i hbar/2 m0) psi'' + (q/m0) A psi' + [q phi + q^2 A^2/(2 m0)] psi/(i hbar)."""
    if not cfg.quasi_static or cfg.mass_mode is not MassMode.REST:
        raise MisuseError("schrodinger_rhs needs the quasi-static REST configuration")
    s = potentials.sample(t, grid)
    hbar, m0, q = cfg.hbar, cfg.m0, cfg.q
    out = (0.5j * hbar / m0) * laplacian(psi, grid)
    if np.any(s.A):
        out = out + (q / m0) * s.A * gradient(psi, grid)
    return out - (1j / hbar) * (q * s.phi + (0.5 * q * q / m0) * s.A * s.A) * psi


def step_schrodinger(psi, t, potentials, grid, dt, cfg, check=True):
    k1 = schrodinger_rhs(psi, t, potentials, grid, cfg)
    k2 = schrodinger_rhs(psi + 0.5 * dt * k1, t + 0.5 * dt, potentials, grid, cfg)
    k3 = schrodinger_rhs(psi + 0.5 * dt * k2, t + 0.5 * dt, potentials, grid, cfg)
    k4 = schrodinger_rhs(psi + dt * k3, t + dt, potentials, grid, cfg)
    out = psi + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if check:
        _check_finite((out,), t + dt, dt)
    return out


def evolve_schrodinger(psi, t, potentials, grid, cfg, dt, nsteps):
    for _ in range(nsteps):
        psi = step_schrodinger(psi, t, potentials, grid, dt, cfg)
        t += dt
    return psi


# --- initial data -------------------------------------------------------------

def gaussian_packet(grid: Grid, x0: float, sigma: float, k0: float) -> np.ndarray:
    """exp(-(x-x0)^2/4 sigma^2 + i k0 (x-x0)), unit norm; |psi|^2 has std ``sigma``."""
    if sigma <= 0:
        raise ConfigError("packet width must be positive")
    L = grid.length
    d = (grid.x - x0 + 0.5 * L) % L - 0.5 * L
    psi = np.exp(-d * d / (4.0 * sigma * sigma) + 1j * k0 * d)
    return psi / math.sqrt(np.sum(np.abs(psi) ** 2) * grid.dx)


def plane_wave(grid: Grid, k: float, amplitude: float = 1.0) -> np.ndarray:
    if not math.isclose(grid.grid_mode(k), k, rel_tol=1e-9, abs_tol=1e-12):
        raise ConfigError(f"k={k} is not periodic on the grid; nearest mode {grid.grid_mode(k)}")
    return amplitude * np.exp(1j * k * grid.x)


def particle_branch_dtpsi(psi, mass: MassField, sample: PotentialSample, grid: Grid,
                          cfg: PhysicalConfig) -> np.ndarray:
    """dpsi/dt that puts every Fourier mode of ``psi`` on the positive-energy branch.

    Each mode exp(ikx) gets frequency
    ``omega_+ = [-m c^2 + sqrt(E0^2 + c^2 (hbar^2 kappa^2 - 2 hbar q A s + q^2 A^2))]/hbar``
    where ``kappa^2`` and ``s`` are the grid symbols of -d2/dx2 and -i d/dx and
    ``E0 = m c^2 + q phi`` (equal to m0 c^2 whenever the mass tracks the
    potential). Exact for uniform potentials; for non-uniform ones the bias
    ``-m(x) c^2`` is applied pointwise and E0, A are density-weighted means.
    """
    if cfg.quasi_static:
        raise MisuseError("the particle branch needs finite c")
    psi = np.asarray(psi, dtype=complex)
    m = mass.m_tilde
    c2, hbar, q = cfg.c2, cfg.hbar, cfg.q
    w = np.abs(psi) ** 2
    w = w / w.sum() if w.sum() > 0 else np.full(grid.n, 1.0 / grid.n)
    E0 = float(np.sum(w * (m * c2 + q * sample.phi)))
    A0 = float(np.sum(w * sample.A))
    kap2 = -grid.laplacian_symbol()
    s = grid.gradient_symbol()
    E = np.sqrt(E0 * E0 + c2 * (hbar * hbar * kap2 - 2.0 * hbar * q * A0 * s + q * q * A0 * A0))
    Epsi = np.fft.ifft(E * np.fft.fft(psi))
    return (1j / hbar) * (m * c2 * psi - Epsi)


def initial_state(psi, potentials: PotentialSet, grid: Grid, cfg: PhysicalConfig,
                  t: float = 0.0) -> EvolutionState:
    """Particle-branch state with the mass set from the potential at ``t``."""
    mass = initial_mass(potentials, grid, cfg, t)
    s = potentials.sample(t, grid)
    return EvolutionState(np.asarray(psi, dtype=complex),
                          particle_branch_dtpsi(psi, mass, s, grid, cfg), t, mass)


def plane_wave_residual(k, omega, phi0, A0, cfg: PhysicalConfig, m_tilde=None) -> complex:
    """Residual of the wave equation for psi = exp(i(kx - omega t)), uniform static potentials.

    Exact substitution; no grid. ``m_tilde`` defaults to the relativistic mass
    of ``phi0``.
    """
    if m_tilde is None:
        m_tilde = float(relativistic_mass(np.asarray(phi0, dtype=float), cfg).m_tilde)
    hbar, q, ic2 = cfg.hbar, cfg.q, cfg.inv_c2
    omega = complex(omega)
    lhs = (hbar * m_tilde * omega + 0.5 * hbar ** 2 * (omega * omega * ic2 - k * k)
           + hbar * q * A0 * k)
    rhs = m_tilde * q * phi0 + 0.5 * q * q * (phi0 * phi0 * ic2 + A0 * A0)
    return complex(lhs - rhs)
