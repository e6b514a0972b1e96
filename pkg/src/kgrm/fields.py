"""Periodic 1-D grid, discrete derivative operators and the polar view of a field.

All reductions (``total_norm``, ``l2_norm``) use :func:`math.fsum`, which is
correctly rounded and therefore independent of summation order or of how the
grid is partitioned.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, IntegrityError

STENCIL = "stencil"
SPECTRAL = "spectral"


@dataclass(frozen=True)
class Grid:
    n: int
    dx: float
    derivative: str = STENCIL
    dim: int = 1

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 8:
            raise ConfigError(f"grid needs n >= 8 points, got {self.n}")
        if not (math.isfinite(self.dx) and self.dx > 0):
            raise ConfigError(f"grid spacing must be positive, got {self.dx}")
        if self.derivative not in (STENCIL, SPECTRAL):
            raise ConfigError(f"unknown derivative mode {self.derivative!r}")
        if self.dim != 1:
            raise ConfigError("only 1-D grids are implemented")
        object.__setattr__(self, "n", int(self.n))

    @property
    def length(self) -> float:
        return self.n * self.dx

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.n) * self.dx

    @property
    def k(self) -> np.ndarray:
        """Angular wavenumbers of the FFT modes."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)

    def grid_mode(self, k: float) -> float:
        """Nearest wavenumber that is periodic on this grid."""
        dk = 2.0 * np.pi / self.length
        return round(k / dk) * dk

    def gradient_symbol(self, k=None):
        """Eigenvalue of d/dx on exp(ikx), divided by i."""
        if self.derivative == SPECTRAL:
            if k is not None:
                return np.asarray(k, dtype=float)
            s = self.k
            if self.n % 2 == 0:
                s[self.n // 2] = 0.0  # odd derivative of the Nyquist mode
            return s
        k = self.k if k is None else np.asarray(k, dtype=float)
        return np.sin(k * self.dx) / self.dx

    def laplacian_symbol(self, k=None):
        """Eigenvalue of d^2/dx^2 on exp(ikx) (non-positive)."""
        k = self.k if k is None else np.asarray(k, dtype=float)
        if self.derivative == SPECTRAL:
            return -np.square(k)
        return 2.0 * (np.cos(k * self.dx) - 1.0) / self.dx ** 2


def gradient(f, grid: Grid) -> np.ndarray:
    """d/dx with periodic wrap: 2nd-order central difference or spectral."""
    f = np.asarray(f)
    if grid.derivative == SPECTRAL:
        out = np.fft.ifft(1j * grid.gradient_symbol() * np.fft.fft(f))
        return out if np.iscomplexobj(f) else out.real
    return (np.roll(f, -1) - np.roll(f, 1)) / (2.0 * grid.dx)


def laplacian(f, grid: Grid) -> np.ndarray:
    f = np.asarray(f)
    if grid.derivative == SPECTRAL:
        out = np.fft.ifft(grid.laplacian_symbol() * np.fft.fft(f))
        return out if np.iscomplexobj(f) else out.real
    return (np.roll(f, -1) - 2.0 * f + np.roll(f, 1)) / grid.dx ** 2


def total_norm(rho, grid: Grid) -> float:
    """Riemann sum of a non-negative density over the torus."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        bad = np.flatnonzero(rho < 0)
        raise IntegrityError(f"negative density at {bad[:10].tolist()}")
    return math.fsum(rho.tolist()) * grid.dx


def integrate(f, grid: Grid) -> float:
    return math.fsum(np.asarray(f, dtype=float).tolist()) * grid.dx


def l2_norm(f, grid: Grid) -> float:
    a = np.abs(np.asarray(f))
    return math.sqrt(math.fsum((a * a).tolist()) * grid.dx)


@dataclass(frozen=True)
class PolarView:
    """psi = R exp(iS/hbar), with every derivative taken from psi, never from S.

    ``S`` itself is never formed, so no phase unwrapping is needed. Quotients
    like ``Im(psi* dpsi)/rho`` are evaluated only where ``rho >= eps_node``;
    masked samples hold 0.
    """
    rho: np.ndarray
    gradS: np.ndarray
    dtS: np.ndarray
    mask: np.ndarray
    R: np.ndarray
    gradR: np.ndarray
    dtR: np.ndarray
    lapS: np.ndarray
    lapR: np.ndarray
    grad_dtS: np.ndarray
    time: float = 0.0
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def unmasked(self) -> np.ndarray:
        return ~self.mask


def default_eps_node(rho) -> float:
    return 1e-12 * float(np.max(rho)) if np.size(rho) else 0.0


def polar_decompose(psi, dtpsi, grid: Grid, hbar: float = 1.0, eps_node=None,
                    time: float = 0.0) -> PolarView:
    psi = np.asarray(psi, dtype=complex)
    dtpsi = np.asarray(dtpsi, dtype=complex)
    if psi.shape != dtpsi.shape or psi.shape != (grid.n,):
        raise ConfigError("psi and dtpsi must both live on the grid")
    rho = (psi.real ** 2 + psi.imag ** 2)
    if eps_node is None:
        eps_node = default_eps_node(rho)
    mask = rho < eps_node
    if eps_node == 0.0:
        mask = rho == 0.0
    ok = ~mask

    dpsi = gradient(psi, grid)
    lpsi = laplacian(psi, grid)
    dtdpsi = gradient(dtpsi, grid)

    wx = np.zeros_like(psi)
    wt = np.zeros_like(psi)
    wxx = np.zeros_like(psi)
    wxt = np.zeros_like(psi)
    inv = np.zeros_like(psi)
    inv[ok] = 1.0 / psi[ok]
    wx[ok] = dpsi[ok] * inv[ok]
    wt[ok] = dtpsi[ok] * inv[ok]
    wxx[ok] = lpsi[ok] * inv[ok]
    wxt[ok] = dtdpsi[ok] * inv[ok]

    R = np.sqrt(rho)
    # d^2 ln(psi) = psi''/psi - (psi'/psi)^2 ; real part -> ln R, imaginary -> S/hbar
    d2log = wxx - wx * wx
    gradS = hbar * np.where(ok, np.imag(psi.conj() * dpsi) / np.where(ok, rho, 1.0), 0.0)
    dtS = hbar * np.where(ok, np.imag(psi.conj() * dtpsi) / np.where(ok, rho, 1.0), 0.0)
    gradR = np.where(ok, R * wx.real, 0.0)
    dtR = np.where(ok, R * wt.real, 0.0)
    lapS = np.where(ok, hbar * d2log.imag, 0.0)
    lapR = np.where(ok, R * (d2log.real + wx.real ** 2), 0.0)
    grad_dtS = np.where(ok, hbar * (wxt - wx * wt).imag, 0.0)
    return PolarView(rho=rho, gradS=gradS, dtS=dtS, mask=mask, R=R, gradR=gradR,
                     dtR=dtR, lapS=lapS, lapR=lapR, grad_dtS=grad_dtS, time=time)


# --- snapshot files: little-endian float64 payload + JSON sidecar -------------

def save_field(path, values, grid: Grid, time: float, config_hash: str = "",
               **meta) -> Path:
    """Write ``<path>.bin`` (re, im pairs for complex data) and ``<path>.json``."""
    path = Path(path)
    values = np.asarray(values)
    if not np.all(np.isfinite(values)):
        raise IntegrityError(f"refusing to write non-finite field {path.name}")
    is_complex = np.iscomplexobj(values)
    if is_complex:
        flat = np.empty(2 * values.size, dtype="<f8")
        flat[0::2] = values.real.ravel()
        flat[1::2] = values.imag.ravel()
    else:
        flat = values.astype("<f8").ravel()
    path.with_suffix(".bin").write_bytes(flat.tobytes())
    sidecar = {"n": grid.n, "dx": grid.dx, "derivative": grid.derivative,
               "time": float(time), "config_hash": config_hash,
               "dtype": "complex128" if is_complex else "float64",
               "layout": "little-endian float64" + (" (re, im) pairs" if is_complex else "")}
    sidecar.update(meta)
    path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True))
    return path.with_suffix(".bin")


def load_field(path):
    """Inverse of :func:`save_field`; returns ``(values, grid, sidecar)``."""
    path = Path(path)
    sidecar = json.loads(path.with_suffix(".json").read_text())
    raw = np.frombuffer(path.with_suffix(".bin").read_bytes(), dtype="<f8")
    grid = Grid(sidecar["n"], sidecar["dx"], sidecar.get("derivative", STENCIL))
    if sidecar["dtype"] == "complex128":
        values = raw[0::2] + 1j * raw[1::2]
    else:
        values = raw.copy()
    if values.size != grid.n:
        raise IntegrityError(f"{path.name}: {values.size} samples, sidecar says {grid.n}")
    return values, grid, sidecar
