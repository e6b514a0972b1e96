import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import smooth_random_state
from kgrm import diagnostics
from kgrm.currents import (continuity_residual, lagrangian_density, noether_current,
                           polar_current, wave_velocity, weighted_norm, centroid)
from kgrm.dispersion import omega_branches
from kgrm.dynamics import (EvolutionState, evolve_kg, gaussian_packet, initial_state,
                           plane_wave, stable_dt, step_kg)
from kgrm.errors import SingularDenominatorError
from kgrm.fields import Grid, gradient, polar_decompose
from kgrm.massmodel import MassField, initial_mass
from kgrm.potentials import GaussianWell, TimeRampPotentials, UniformPotentials
from kgrm.quantities import MassMode, PhysicalConfig


def _rest(n, m=1.0):
    return MassField(np.full(n, m), MassMode.REST)


def test_lagrangian_zero_and_uniform(grid, natural):
    pot = UniformPotentials(0.2, 0.1)
    s = pot.sample(0.0, grid)
    m = initial_mass(pot, grid, natural)
    z = np.zeros(grid.n, complex)
    assert not np.any(lagrangian_density(z, z, s, m, grid, natural))
    psi = plane_wave(grid, grid.grid_mode(0.7))
    L = lagrangian_density(psi, -0.3j * psi, s, m, grid, natural)
    assert np.ptp(L) < 1e-13


def test_lagrangian_euler_lagrange_variation():
    """d(action)/d(psi*) at an interior node reproduces the discrete wave residual.

    Action: dt dx sum_n sum_x L(psi^n, (psi^{n+1} - psi^n)/dt). Its variation gives
    central time differences and the D o D Laplacian of the central stencil.
    """
    cfg = PhysicalConfig(hbar=1.1, c=1.7, q=-0.8, m0=0.9)
    g = Grid(16, 0.4)
    dt = 0.05
    pot = UniformPotentials(0.3, 0.25)
    s = pot.sample(0.0, g)
    m = initial_mass(pot, g, cfg)
    rng = np.random.default_rng(7)
    levels = [smooth_random_state(g, rng, modes=3)[0] for _ in range(3)]

    def action(lv):
        total = 0.0
        for n in range(2):
            dpsi = (lv[n + 1] - lv[n]) / dt
            total += lagrangian_density(lv[n], dpsi, s, m, g, cfg).sum()
        return total * dt * g.dx

    j, eps = 5, 1e-4
    grad = 0.0
    for unit in (1.0, 1j):
        plus = [lv.copy() for lv in levels]
        minus = [lv.copy() for lv in levels]
        plus[1][j] += eps * unit
        minus[1][j] -= eps * unit
        grad += unit * (action(plus) - action(minus)) / (2 * eps)

    p0, p1, p2 = levels
    hbar, q, ic2, mt = cfg.hbar, cfg.q, cfg.inv_c2, m.m_tilde
    psi_t = (p2 - p0) / (2 * dt)
    psi_tt = (p2 - 2 * p1 + p0) / dt ** 2
    lap = gradient(gradient(p1, g), g)
    V = mt * q * s.phi + 0.5 * q * q * (s.phi ** 2 * ic2 + s.A ** 2)
    wave = (1j * hbar * mt * psi_t + 0.5 * hbar ** 2 * (lap - ic2 * psi_tt)
            - 1j * hbar * q * s.A * gradient(p1, g) - V * p1)
    expected = -2.0 * dt * g.dx * wave[j]
    assert abs(grad - expected) < 1e-7 * abs(expected)


def test_noether_plane_wave(natural):
    g = Grid(64, 0.25)
    k = 2 * np.pi * 3 / g.length
    omega, A0 = 0.37, 0.2
    psi = plane_wave(g, k)
    pot = UniformPotentials(0.1, A0)
    m = initial_mass(pot, g, natural)
    J = noether_current(psi, -1j * omega * psi, m, pot.sample(0, g), g, natural)
    assert np.allclose(J.Jt, m.m_tilde + natural.hbar * omega * natural.inv_c2, atol=1e-14)
    assert np.allclose(J.Jx, np.sin(k * g.dx) / g.dx - natural.q * A0, atol=1e-13)


def test_noether_real_static(grid, natural):
    psi = np.exp(-((grid.x - 25) / 4) ** 2).astype(complex)
    m = _rest(grid.n, 1.3)
    J = noether_current(psi, np.zeros_like(psi), m, UniformPotentials().sample(0, grid), grid,
                        natural)
    assert np.allclose(J.Jt, 1.3 * np.abs(psi) ** 2, rtol=1e-15)
    assert not np.any(J.Jx)
    z = np.zeros(grid.n, complex)
    Z = noether_current(z, z, m, UniformPotentials().sample(0, grid), grid, natural)
    assert not np.any(Z.Jt) and not np.any(Z.Jx)


@given(st.integers(0, 2 ** 31))
@settings(max_examples=15, deadline=None)
def test_polar_current_identity(seed):
    cfg = PhysicalConfig(hbar=0.8, c=1.3, q=-0.6)
    g = Grid(96, 0.3)
    pot = GaussianWell(0.2, 10.0, 2.0, g.length)
    s = pot.sample(0, g)
    m = initial_mass(pot, g, cfg)
    psi, dtpsi = smooth_random_state(g, np.random.default_rng(seed))
    J = noether_current(psi, dtpsi, m, s, g, cfg)
    P = polar_current(polar_decompose(psi, dtpsi, g, cfg.hbar), m, s, cfg)
    for a, b in ((J.Jt, P.Jt), (J.Jx, P.Jx)):
        assert np.max(np.abs(a - b)) < 1e-13 * np.max(np.abs(a))


def test_polar_current_masked_node_zero(natural):
    g = Grid(32, 0.5)
    psi = np.exp(1j * 2 * np.pi * g.x / g.length) * (1 + 0.2 * np.sin(g.x))
    psi[4] = 0
    pv = polar_decompose(psi, 0.5j * psi, g)
    P = polar_current(pv, _rest(32), UniformPotentials(0.0, 0.3).sample(0, g), natural)
    assert P.Jt[4] == 0.0 and P.Jx[4] == 0.0


@given(st.floats(0.1, 10.0), st.floats(0, 2 * np.pi), st.integers(0, 1000))
@settings(max_examples=15, deadline=None)
def test_scaling_invariance(a, theta, seed):
    cfg = PhysicalConfig()
    g = Grid(64, 0.3)
    s = UniformPotentials(0.1, 0.2).sample(0, g)
    m = _rest(64, 1.1)
    psi, dtpsi = smooth_random_state(g, np.random.default_rng(seed))
    c = a * np.exp(1j * theta)
    J1 = noether_current(psi, dtpsi, m, s, g, cfg)
    J2 = noether_current(c * psi, c * dtpsi, m, s, g, cfg)
    assert np.allclose(J2.Jt, a * a * J1.Jt, rtol=1e-12, atol=1e-14 * a * a)
    assert np.allclose(J2.Jx, a * a * J1.Jx, rtol=1e-12, atol=1e-14 * a * a)
    v1 = wave_velocity(polar_decompose(psi, dtpsi, g), m, s, cfg, strict=False)
    v2 = wave_velocity(polar_decompose(c * psi, c * dtpsi, g), m, s, cfg, strict=False)
    assert np.allclose(v1, v2, rtol=1e-12, atol=1e-14)


def test_wave_velocity_examples():
    cfg = PhysicalConfig(q=0.0)
    g = Grid(64, 8 * np.pi / 64, "spectral")   # k = 1 is the 4th grid mode
    s = UniformPotentials().sample(0, g)
    m = _rest(64)
    wp, _ = omega_branches(1.0, 0.0, 1.0, cfg)
    psi = np.exp(1j * g.x)
    v = wave_velocity(polar_decompose(psi, -1j * wp * psi, g), m, s, cfg)
    assert np.allclose(v, 1 / np.sqrt(2), rtol=1e-13)
    rest = np.ones(64, complex)
    v0 = wave_velocity(polar_decompose(rest, np.zeros(64, complex), g), m, s, cfg)
    assert not np.any(v0)


def test_wave_velocity_subluminal_on_particle_branch(natural):
    g = Grid(512, 0.1)
    pot = GaussianWell(0.3, 25.6, 3.0, g.length)
    st0 = initial_state(gaussian_packet(g, 20.0, 2.0, 2.0), pot, g, natural)
    st1 = evolve_kg(st0, pot, g, natural, stable_dt(g, natural, st0.mass), 200)
    for st_ in (st0, st1):
        pv = polar_decompose(st_.psi, st_.dtpsi, g)
        v = wave_velocity(pv, st_.mass, pot.sample(st_.t, g), natural)
        assert np.max(np.abs(v[pv.unmasked])) < natural.c


def test_wave_velocity_singular_denominator(natural):
    g = Grid(16, 0.5)
    psi = np.ones(16, complex)
    # dS/dt = m c^2 makes m - S_t/c^2 vanish
    pv = polar_decompose(psi, 1j * psi, g)
    with pytest.raises(SingularDenominatorError):
        wave_velocity(pv, _rest(16), UniformPotentials().sample(0, g), natural)
    v = wave_velocity(pv, _rest(16), UniformPotentials().sample(0, g), natural, strict=False)
    assert np.all(np.isnan(v))


def _triplet(st0, pot, g, cfg, dt, nsteps=0):
    cur = evolve_kg(st0, pot, g, cfg, dt, nsteps) if nsteps else st0
    prev = step_kg(cur, pot, g, -dt, cfg, check=False)
    nxt = step_kg(cur, pot, g, dt, cfg)
    return prev, cur, nxt


def test_continuity_plane_wave_and_zero(natural):
    g = Grid(64, 0.25)
    pot = UniformPotentials(0.1, 0.2)
    st0 = initial_state(plane_wave(g, g.grid_mode(1.0)), pot, g, natural)
    d = diagnostics.triplet(*_triplet(st0, pot, g, natural, 0.01), pot, g, natural,
                            keep_fields=True)
    assert d.report.continuity_residual_norm < 1e-8
    assert np.max(np.abs(d.fields["energy_advection"].total_form)) < 1e-8
    m = st0.mass
    zs = [EvolutionState(np.zeros(64, complex), np.zeros(64, complex), t, m)
          for t in (-0.01, 0.0, 0.01)]
    zd = diagnostics.triplet(*zs, pot, g, natural)
    assert zd.report.continuity_residual_norm == 0.0


def test_continuity_converges_second_order(free_cfg):
    norms = []
    for n in (128, 256, 512):
        g = Grid(n, 40.0 / n)
        pot = UniformPotentials()
        st0 = initial_state(gaussian_packet(g, 15.0, 2.0, 1.0), pot, g, free_cfg)
        dt = stable_dt(Grid(512, 40.0 / 512), free_cfg)
        prev, cur, nxt = _triplet(st0, pot, g, free_cfg, dt * (512 // n), 0)
        Jp, Jc, Jn = (noether_current(s.psi, s.dtpsi, s.mass, pot.sample(s.t, g), g, free_cfg)
                      for s in (prev, cur, nxt))
        _, norm, _, _ = continuity_residual(Jp, Jc, Jn, cur.t - prev.t, g)
        norms.append(norm)
    assert norms[0] / norms[1] == pytest.approx(4.0, rel=0.15)
    assert norms[1] / norms[2] == pytest.approx(4.0, rel=0.15)


def test_energy_advection_flags_frozen_mass_under_ramp():
    g = Grid(256, 0.2)
    ramp = {"phi0": 0.1, "alpha": 0.5, "x_ref": g.length / 2}
    out = {}
    for mode in (MassMode.RELATIVISTIC, MassMode.EFFECTIVE):
        cfg = PhysicalConfig(mass_mode=mode)
        pot = TimeRampPotentials(inv_c2=cfg.inv_c2, **ramp)
        st0 = initial_state(gaussian_packet(g, g.length / 2, 3.0, 0.3), pot, g, cfg)
        d = diagnostics.triplet(*_triplet(st0, pot, g, cfg, 0.01, 100), pot, g, cfg,
                                keep_fields=True)
        out[mode] = (d.fields["energy_advection"].max_disagreement,
                     d.energy_identity_residual_norm)
    assert out[MassMode.EFFECTIVE][0] < 1e-10 and out[MassMode.EFFECTIVE][1] < 1e-12
    assert out[MassMode.RELATIVISTIC][0] > 1e-2 and out[MassMode.RELATIVISTIC][1] > 1e-3


def test_weighted_norm_and_centroid():
    g = Grid(16, 1.0)
    w = np.zeros(16)
    w[3] = 2.0
    f = np.arange(16.0)
    assert weighted_norm(f, w, g) == 3.0
    assert weighted_norm(f, np.zeros(16), g) == 0.0
    assert centroid(w, g) == 3.0
