import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import smooth_random_state
from kgrm.errors import ConfigError, IntegrityError
from kgrm.fields import (Grid, gradient, integrate, l2_norm, laplacian, load_field,
                         polar_decompose, save_field, total_norm)


@pytest.mark.parametrize("mode", ["stencil", "spectral"])
def test_constant_field_has_zero_derivatives(mode):
    g = Grid(64, 0.3, mode)
    f = np.full(64, 2.5 - 1j)
    assert np.max(np.abs(gradient(f, g))) < 1e-13
    assert np.max(np.abs(laplacian(f, g))) < 1e-13


def test_sine_gradient_second_order():
    errs = []
    for n in (64, 128, 256):
        g = Grid(n, 10.0 / n)
        kk = 2 * np.pi / g.length
        errs.append(np.max(np.abs(gradient(np.sin(kk * g.x), g) - kk * np.cos(kk * g.x))))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.01)
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.01)


@pytest.mark.parametrize("mode", ["stencil", "spectral"])
@pytest.mark.parametrize("j", [1, 5, 17, 40])
def test_grid_mode_symbols_exact(mode, j):
    g = Grid(128, 0.25, mode)
    k = 2 * np.pi * j / g.length
    f = np.exp(1j * k * g.x)
    grad_sym = g.gradient_symbol(k)
    lap_sym = g.laplacian_symbol(k)
    if mode == "stencil":
        assert grad_sym == pytest.approx(np.sin(k * g.dx) / g.dx, rel=1e-15)
        assert lap_sym == pytest.approx(2 * (np.cos(k * g.dx) - 1) / g.dx ** 2, rel=1e-15)
    assert np.max(np.abs(gradient(f, g) - 1j * grad_sym * f)) < 1e-12 * abs(grad_sym)
    assert np.max(np.abs(laplacian(f, g) - lap_sym * f)) < 1e-12 * abs(lap_sym)


def test_gaussian_laplacian_second_order():
    sigma, errs = 1.0, []
    for n in (128, 256, 512):
        g = Grid(n, 20.0 / n)
        x = g.x - 10.0
        f = np.exp(-x * x / (2 * sigma ** 2))
        exact = (x * x / sigma ** 4 - 1 / sigma ** 2) * f
        errs.append(np.max(np.abs(laplacian(f, g) - exact)))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.02)
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.02)


def test_spectral_is_exact_on_smooth_periodic_data():
    g = Grid(64, 2 * np.pi / 64, "spectral")
    f = np.exp(np.sin(g.x))
    assert np.max(np.abs(gradient(f, g) - np.cos(g.x) * f)) < 1e-12


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-5, 5), st.integers(0, 2 ** 31))
@settings(max_examples=30, deadline=None)
def test_operators_linear_and_shift_invariant(a, b, shift, seed):
    g = Grid(64, 0.4)
    rng = np.random.default_rng(seed)
    f1, f2 = smooth_random_state(g, rng)
    for op in (gradient, laplacian):
        combo = op(a * f1 + b * f2, g)
        assert np.allclose(combo, a * op(f1, g) + b * op(f2, g), atol=1e-11)
        assert np.allclose(op(f1 + shift, g), op(f1, g), atol=1e-11)


def test_total_norm_examples():
    g = Grid(64, 0.5)
    assert total_norm(np.ones(64), g) == 32.0
    rho = np.ones(64)
    rho[7] = -1e-3
    with pytest.raises(IntegrityError):
        total_norm(rho, g)


def test_total_norm_of_gaussian():
    sigma = 2.0
    g = Grid(512, 0.1)
    x = g.x - g.length / 2
    rho = np.exp(-x * x / (2 * sigma ** 2)) / np.sqrt(2 * np.pi * sigma ** 2)
    assert total_norm(rho, g) == pytest.approx(1.0, abs=1e-12)


def test_integration_order_independent():
    g = Grid(1024, 0.01)
    rng = np.random.default_rng(3)
    f = rng.standard_normal(1024) * 10.0 ** rng.integers(-8, 8, 1024)
    assert integrate(f, g) == integrate(f[::-1], g)
    assert l2_norm(f, g) == l2_norm(np.sort(f), g)


def test_polar_plane_wave():
    g = Grid(128, 0.25)
    k = 2 * np.pi * 5 / g.length
    omega, hbar = 0.7, 1.3
    psi = np.exp(1j * k * g.x)
    pv = polar_decompose(psi, -1j * omega * psi, g, hbar)
    assert np.allclose(pv.rho, 1.0, atol=1e-14)
    assert np.allclose(pv.gradS, hbar * np.sin(k * g.dx) / g.dx, rtol=1e-13)
    assert np.allclose(pv.dtS, -hbar * omega, rtol=1e-13)
    assert np.max(np.abs(pv.gradR)) < 1e-13 and np.max(np.abs(pv.dtR)) < 1e-13


def test_polar_real_gaussian_has_no_phase():
    g = Grid(128, 0.25)
    psi = np.exp(-((g.x - 16) / 3) ** 2).astype(complex)
    pv = polar_decompose(psi, np.zeros_like(psi), g)
    for f in (pv.gradS, pv.dtS, pv.lapS, pv.grad_dtS):
        assert np.max(np.abs(f)) == 0.0


def test_polar_node_masked():
    g = Grid(64, 0.5)
    psi = np.exp(1j * 2 * np.pi * g.x / g.length) * (1.0 + 0.1 * np.cos(g.x))
    psi[20] = 0.0
    pv = polar_decompose(psi, 0.3j * psi, g)
    assert pv.mask[20] and pv.mask.sum() == 1
    assert pv.gradS[20] == 0.0 and pv.dtS[20] == 0.0
    assert np.all(np.isfinite(pv.gradS)) and np.all(np.isfinite(pv.lapR))
    assert not pv.mask[19] and not pv.mask[21]


def test_polar_rejects_shape_mismatch(grid):
    with pytest.raises(ConfigError):
        polar_decompose(np.ones(grid.n), np.ones(grid.n + 1), grid)


@given(st.integers(0, 2 ** 31))
@settings(max_examples=20, deadline=None)
def test_polar_reconstructs_phase_currents(seed):
    g = Grid(96, 0.3)
    psi, dtpsi = smooth_random_state(g, np.random.default_rng(seed))
    hbar = 0.7
    pv = polar_decompose(psi, dtpsi, g, hbar)
    ok = pv.unmasked
    for d, dS in ((gradient(psi, g), pv.gradS), (dtpsi, pv.dtS)):
        direct = (0.5j * hbar * (psi * d.conj() - psi.conj() * d)).real
        scale = np.max(np.abs(direct))
        assert np.max(np.abs(dS * pv.rho - direct)[ok]) < 1e-13 * scale


def test_polar_second_derivatives_match_stencil_on_smooth_phase():
    # S = hbar*a*cos(x), R = 1 + 0.2 sin(x) on a fine spectral grid
    g = Grid(128, 2 * np.pi / 128, "spectral")
    x = g.x
    R = 1 + 0.2 * np.sin(x)
    S = 0.5 * np.cos(x)
    psi = R * np.exp(1j * S)
    pv = polar_decompose(psi, np.zeros_like(psi), g)
    assert np.allclose(pv.lapS, -0.5 * np.cos(x), atol=1e-10)
    assert np.allclose(pv.lapR, -0.2 * np.sin(x), atol=1e-10)
    assert np.allclose(pv.gradR, 0.2 * np.cos(x), atol=1e-10)


def test_snapshot_round_trip(tmp_path):
    g = Grid(32, 0.125, "spectral")
    rng = np.random.default_rng(0)
    z = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    r = rng.standard_normal(32)
    save_field(tmp_path / "z", z, g, 1.5, "abc", role="psi")
    save_field(tmp_path / "r", r, g, 1.5)
    z2, g2, meta = load_field(tmp_path / "z.bin")
    r2, _, _ = load_field(tmp_path / "r.bin")
    assert np.array_equal(z, z2) and np.array_equal(r, r2)
    assert g2 == g and meta["config_hash"] == "abc" and meta["role"] == "psi"
    assert (tmp_path / "z.bin").stat().st_size == 32 * 16


def test_snapshot_rejects_nonfinite(tmp_path, grid):
    f = np.zeros(grid.n)
    f[3] = np.nan
    with pytest.raises(IntegrityError):
        save_field(tmp_path / "bad", f, grid, 0.0)


@pytest.mark.parametrize("kwargs", [dict(n=4, dx=0.1), dict(n=16, dx=0.0),
                                    dict(n=16, dx=0.1, derivative="fd4")])
def test_grid_validation(kwargs):
    with pytest.raises(ConfigError):
        Grid(**kwargs)


def test_grid_mode_snaps():
    g = Grid(100, 0.1)
    assert g.grid_mode(1.0) == pytest.approx(2 * np.pi * 2 / 10.0)
