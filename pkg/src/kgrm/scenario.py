"""Scenario files and the drivers behind the command-line front end.

A scenario is a TOML document::

    name = "free-packet"
    duration = 10.0
    seed = 0

    [physics]            # hbar, c ("inf" allowed), q, m0, mass_mode, quasi_static
    [grid]               # n, dx, derivative = "stencil" | "spectral"
    [potentials]         # kind = uniform | time-ramp | gaussian-well | traveling-gauge-pair
    [initial_state]      # kind = plane_wave (k) | gaussian_packet (x0, sigma, k0)
    [stepper]            # safety, optional dt, mass_source = "dt_phi" | "div_A"
    [output]             # cadence, snapshot_cadence (both in steps)
"""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import diagnostics
from .dynamics import (EvolutionState, evolve_kg, evolve_schrodinger, gaussian_packet,
                       initial_state, plane_wave, stable_dt, step_kg)
from .currents import default_eps_denom
from .dispersion import group_velocity, omega_branches
from .errors import ConfigError, SingularDenominatorError
from .fields import Grid, l2_norm, load_field, save_field
from .massmodel import GAUGE_TOL, MassField, gauge_residual, relativistic_mass
from .potentials import PotentialSet, build_potentials
from .quantities import (MassMode, PhysicalConfig, quasi_static_config, validate_config)

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger(__name__)

CSV_COLUMNS = ["t", "total_charge", "min_Jt", "continuity_residual_norm",
               "energy_residual_norm", "gauge_residual_norm",
               "energy_identity_residual_norm", "centroid", "centroid_velocity"]
NONRELATIVISTIC_FRACTION = 0.1
# a vanishing velocity denominator is fatal only where the density carries weight
SINGULAR_WEIGHT = 1e-6


@dataclass
class Scenario:
    name: str
    config: PhysicalConfig
    grid: Grid
    potentials: dict
    initial_state: dict
    duration: float
    cadence: int = 100
    snapshot_cadence: int = 0
    safety: float = 0.5
    dt: float | None = None
    mass_source: str = "dt_phi"
    seed: int = 0
    warnings: list = field(default_factory=list)

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        d = dict(d)
        try:
            phys = PhysicalConfig.from_dict(d.pop("physics", {}))
            g = d.pop("grid")
            grid = Grid(int(g["n"]), float(g["dx"]), g.get("derivative", "stencil"))
            stepper = dict(d.pop("stepper", {}))
            output = dict(d.pop("output", {}))
            sc = cls(name=str(d.pop("name", "scenario")), config=phys, grid=grid,
                     potentials=dict(d.pop("potentials", {"kind": "uniform"})),
                     initial_state=dict(d.pop("initial_state")),
                     duration=float(d.pop("duration")),
                     cadence=int(output.pop("cadence", 100)),
                     snapshot_cadence=int(output.pop("snapshot_cadence", 0)),
                     safety=float(stepper.pop("safety", 0.5)),
                     dt=stepper.pop("dt", None),
                     mass_source=str(stepper.pop("mass_source", "dt_phi")),
                     seed=int(d.pop("seed", 0)))
        except KeyError as exc:
            raise ConfigError(f"scenario is missing required key {exc}") from None
        leftovers = {k: v for k, v in (("top-level", d), ("stepper", stepper),
                                       ("output", output)) if v}
        if leftovers:
            raise ConfigError(f"unknown scenario keys: {leftovers}")
        return sc

    def to_dict(self) -> dict:
        out = {"name": self.name, "duration": self.duration, "seed": self.seed,
               "physics": self.config.to_dict(),
               "grid": {"n": self.grid.n, "dx": self.grid.dx,
                        "derivative": self.grid.derivative},
               "potentials": dict(self.potentials),
               "initial_state": dict(self.initial_state),
               "stepper": {"safety": self.safety, "mass_source": self.mass_source},
               "output": {"cadence": self.cadence, "snapshot_cadence": self.snapshot_cadence}}
        if self.dt is not None:
            out["stepper"]["dt"] = self.dt
        return out

    @property
    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def load_scenario(path) -> Scenario:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    sc = Scenario.from_dict(data)
    validate_scenario(sc)
    return sc


def validate_scenario(sc: Scenario) -> tuple[PotentialSet, np.ndarray]:
    """Check every parameter before a run; returns the potentials and initial psi."""
    cfg = validate_config(sc.config)
    if sc.duration < 0 or not math.isfinite(sc.duration):
        raise ConfigError(f"duration must be finite and >= 0, got {sc.duration}")
    if sc.cadence < 1 or sc.snapshot_cadence < 0:
        raise ConfigError("cadence must be >= 1 and snapshot_cadence >= 0")
    if not 0 < sc.safety <= 1:
        raise ConfigError(f"safety must lie in (0, 1], got {sc.safety}")
    if sc.mass_source not in ("dt_phi", "div_A"):
        raise ConfigError(f"unknown mass_source {sc.mass_source!r}")
    pot = build_potentials(sc.potentials, sc.grid, cfg)
    times = np.linspace(0.0, sc.duration, 5) if not pot.static else [0.0]
    pot.check_charge_sign(cfg.q, sc.grid, times)
    for t in times:
        res = gauge_residual(pot, sc.grid, cfg, t)
        s = pot.sample(t, sc.grid)
        scale = max(1.0, float(np.max(np.abs(s.div_A))), float(np.max(np.abs(s.dt_phi))) * cfg.inv_c2)
        if float(np.max(np.abs(res))) > GAUGE_TOL * scale:
            raise ConfigError(f"potentials violate the Lorenz gauge at t={t}")
    psi = build_initial_psi(sc)
    return pot, psi


def build_initial_psi(sc: Scenario) -> np.ndarray:
    spec = dict(sc.initial_state)
    kind = spec.pop("kind", "gaussian_packet")
    noise = float(spec.pop("perturbation", 0.0))
    try:
        if kind == "plane_wave":
            k = float(spec.pop("k"))
            k_grid = sc.grid.grid_mode(k)
            if not math.isclose(k, k_grid, rel_tol=1e-9, abs_tol=1e-12):
                msg = f"plane-wave k={k} snapped to grid mode {k_grid}"
                if msg not in sc.warnings:
                    sc.warnings.append(msg)
                    log.warning(msg)
            psi = plane_wave(sc.grid, k_grid, float(spec.pop("amplitude", 1.0)))
        elif kind == "gaussian_packet":
            psi = gaussian_packet(sc.grid, float(spec.pop("x0")), float(spec.pop("sigma")),
                                  float(spec.pop("k0", 0.0)))
        else:
            raise ConfigError(f"unknown initial_state kind {kind!r}")
    except KeyError as exc:
        raise ConfigError(f"{kind} initial state is missing parameter {exc}") from None
    if spec:
        raise ConfigError(f"unknown {kind} parameters: {sorted(spec)}")
    if noise:
        # smooth seeded perturbation: random low modes, |k| < 8 * 2pi/L
        rng = np.random.default_rng(sc.seed)
        coeffs = np.zeros(sc.grid.n, dtype=complex)
        low = np.abs(np.fft.fftfreq(sc.grid.n) * sc.grid.n) < 8
        coeffs[low] = rng.standard_normal(low.sum()) + 1j * rng.standard_normal(low.sum())
        bump = np.fft.ifft(coeffs)
        psi = psi * (1.0 + noise * bump / np.max(np.abs(bump)))
    return psi


def _step_plan(sc: Scenario, cfg: PhysicalConfig, pot: PotentialSet, mass) -> tuple[int, float]:
    if sc.duration == 0:
        return 0, 0.0
    masses = [np.max(mass)]
    if not pot.static and cfg.mass_mode is not MassMode.REST:
        masses.append(np.max(relativistic_mass(pot.sample(sc.duration, sc.grid).phi, cfg).m_tilde))
    dt_max = stable_dt(sc.grid, cfg, max(masses), sc.safety)
    if sc.dt is not None:
        if sc.dt > dt_max * (1 + 1e-12):
            raise ConfigError(f"stepper.dt={sc.dt} exceeds the stable step {dt_max:.6g}")
        dt_max = float(sc.dt)
    n = max(1, math.ceil(sc.duration / dt_max - 1e-9))
    return n, sc.duration / n


# --- simulate -----------------------------------------------------------------

@dataclass
class RunRecord:
    scenario_hash: str
    rows: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    nsteps: int = 0
    dt: float = 0.0
    warnings: list = field(default_factory=list)

    def column(self, name):
        return np.array([r[name] for r in self.rows])


def _fmt(x) -> str:
    return repr(float(x))


def write_csv(path, rows, columns=CSV_COLUMNS) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r[c]) if isinstance(r[c], (float, int, np.floating)) else r[c]
                        for c in columns])


def _save_state(stem: Path, state: EvolutionState, grid: Grid, chash: str, **meta):
    save_field(stem.with_name(stem.name + "_psi"), state.psi, grid, state.t, chash, **meta)
    save_field(stem.with_name(stem.name + "_dtpsi"), state.dtpsi, grid, state.t, chash, **meta)
    save_field(stem.with_name(stem.name + "_mass"), state.mass.m_tilde, grid, state.t, chash,
               mass_mode=state.mass.mode.value, **meta)


def write_snapshot(directory: Path, step: int, sc: Scenario, cur, prev=None, nxt=None) -> Path:
    """One bundle: JSON index + binary fields for the state and its time neighbours."""
    directory.mkdir(parents=True, exist_ok=True)
    chash = sc.hash
    tag = f"step_{step:07d}"
    members = {}
    for label, st in (("prev", prev), ("cur", cur), ("next", nxt)):
        if st is None:
            continue
        stem = directory / f"{tag}_{label}"
        _save_state(stem, st, sc.grid, chash, step=step, role=label)
        members[label] = {"time": st.t, "psi": f"{stem.name}_psi.bin",
                          "dtpsi": f"{stem.name}_dtpsi.bin", "mass": f"{stem.name}_mass.bin"}
    index = {"step": step, "time": cur.t, "config_hash": chash, "scenario": sc.to_dict(),
             "n": sc.grid.n, "dx": sc.grid.dx, "states": members}
    path = directory / f"{tag}.json"
    path.write_text(json.dumps(index, indent=2, sort_keys=True))
    return path


def run_simulate(sc: Scenario, outdir=None) -> RunRecord:
    """Evolve the scenario, recording a ConservationReport row every ``cadence`` steps.

    Rows need the neighbouring states, so the first row is at step ``cadence``
    and the final step is always reported (one look-ahead step is taken).
    """
    t_start = time.perf_counter()
    cfg = sc.config
    pot, psi = validate_scenario(sc)
    grid = sc.grid
    if cfg.quasi_static:
        raise ConfigError("simulate evolves the relativistic equation; c must be finite")
    state = initial_state(psi, pot, grid, cfg)
    nsteps, dt = _step_plan(sc, cfg, pot, state.mass.m_tilde)
    rec = RunRecord(sc.hash, nsteps=nsteps, dt=dt, warnings=list(sc.warnings))
    out = Path(outdir) if outdir is not None else None
    snapdir = out / "snapshots" if out is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "scenario.json").write_text(json.dumps(sc.to_dict(), indent=2, sort_keys=True))
        rec.snapshots.append(str(write_snapshot(snapdir, 0, sc, state)))

    prev, cur = None, state
    for j in range(nsteps + 1):
        want_row = j >= 1 and (j % sc.cadence == 0 or j == nsteps)
        want_snap = (j >= 1 and sc.snapshot_cadence and
                     (j % sc.snapshot_cadence == 0 or j == nsteps))
        nxt = None
        if j < nsteps or want_row or want_snap:
            nxt = step_kg(cur, pot, grid, dt, cfg, sc.mass_source)
        if want_row:
            d = diagnostics.triplet(prev, cur, nxt, pot, grid, cfg)
            _check_singular(d, cur.t, sc, rec)
            rec.rows.append(d.row(cur.t))
        if want_snap and snapdir is not None:
            rec.snapshots.append(str(write_snapshot(snapdir, j, sc, cur, prev, nxt)))
        prev, cur = cur, nxt
    rec.timings["wall_seconds"] = time.perf_counter() - t_start
    if out is not None:
        write_csv(out / "timeseries.csv", rec.rows)
        summary = {"scenario": sc.name, "scenario_hash": rec.scenario_hash,
                   "nsteps": nsteps, "dt": dt, "rows": len(rec.rows),
                   "snapshots": [Path(p).name for p in rec.snapshots],
                   "warnings": rec.warnings, "timings": rec.timings}
        (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
    return rec


def _check_singular(d, t: float, sc: Scenario, rec: RunRecord) -> None:
    if not d.singular.size:
        return
    if d.singular_weight >= SINGULAR_WEIGHT:
        raise SingularDenominatorError(d.singular, default_eps_denom(sc.config),
                                       f"t={t:.6g}, scenario {sc.name!r}")
    msg = (f"t={t:.6g}: velocity denominator vanishes at {d.singular.size} tail point(s) "
           f"(rho <= {d.singular_weight:.1e} max rho); velocity set to 0 there")
    rec.warnings.append(msg)
    log.warning(msg)


# --- limit scan ---------------------------------------------------------------

def phase_aligned_error(psi, reference, grid: Grid) -> float:
    """L2 distance after removing the best-fit global phase of ``psi``."""
    overlap = np.vdot(reference, psi)
    phase = overlap / abs(overlap) if overlap != 0 else 1.0
    return l2_norm(psi / phase - reference, grid)


def run_limit_scan(sc: Scenario, c_values, outdir=None) -> list[dict]:
    """Distance between the relativistic and Schroedinger solutions at ``duration`` for each c."""
    _, psi0 = validate_scenario(sc)
    grid = sc.grid
    base = sc.config
    qs_cfg = quasi_static_config(base.hbar, base.q, base.m0)
    qs_pot = build_potentials(sc.potentials, grid, qs_cfg)
    qs_pot.check_charge_sign(qs_cfg.q, grid, [0.0, sc.duration])
    ns = max(1, math.ceil(sc.duration / stable_dt(grid, qs_cfg, safety=sc.safety))) \
        if sc.duration > 0 else 0
    psi_s = evolve_schrodinger(psi0, 0.0, qs_pot, grid, qs_cfg,
                               sc.duration / ns if ns else 0.0, ns)
    k0 = float(sc.initial_state.get("k0", sc.initial_state.get("k", 0.0)))
    rows = []
    for c in c_values:
        c = float(c)
        row = {"c": c, "warning": ""}
        if math.isinf(c):
            row.update(l2_error=phase_aligned_error(psi_s, psi_s, grid), kg_steps=0,
                       schrodinger_steps=ns)
            rows.append(row)
            continue
        cfg = validate_config(replace(base, c=c, quasi_static=False))
        if base.hbar * abs(k0) > NONRELATIVISTIC_FRACTION * base.m0 * c:
            row["warning"] = (f"hbar*k0={base.hbar * abs(k0):.3g} is not << m0*c={base.m0 * c:.3g};"
                              " the packet is relativistic at this c")
            log.warning(row["warning"])
        pot = build_potentials(sc.potentials, grid, cfg)
        pot.check_charge_sign(cfg.q, grid, [0.0, sc.duration])
        state = initial_state(psi0, pot, grid, cfg)
        sub = replace(sc, config=cfg, dt=None)
        n, dt = _step_plan(sub, cfg, pot, state.mass.m_tilde)
        final = evolve_kg(state, pot, grid, cfg, dt, n, sc.mass_source)
        row.update(l2_error=phase_aligned_error(final.psi, psi_s, grid), kg_steps=n,
                   schrodinger_steps=ns)
        rows.append(row)
    if outdir is not None:
        out = Path(outdir)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(out / "limit_scan.csv", rows,
                  ["c", "l2_error", "kg_steps", "schrodinger_steps", "warning"])
        (out / "limit_scan.json").write_text(json.dumps(
            {"scenario": sc.name, "scenario_hash": sc.hash, "rows": rows}, indent=2,
            sort_keys=True, default=float))
    return rows


# --- dispersion sweep ---------------------------------------------------------

DISPERSION_COLUMNS = ["k", "omega_plus", "omega_minus", "vg_plus", "vg_minus"]


def run_dispersion(k_min: float, k_max: float, dk: float, A0: float, cfg: PhysicalConfig,
                   m_tilde=None) -> list[dict]:
    """Sweep k on [k_min, k_max] in steps of dk (endpoints included)."""
    if dk <= 0 or k_max < k_min:
        raise ConfigError("dispersion sweep needs dk > 0 and k_max >= k_min")
    cfg = validate_config(cfg)
    n = int(math.floor((k_max - k_min) / dk + 1e-9)) + 1
    ks = k_min + dk * np.arange(n)
    m = cfg.m0 if m_tilde is None else m_tilde
    wp, wm = omega_branches(ks, A0, m, cfg)
    vp = group_velocity(ks, A0, cfg, "+")
    vm = group_velocity(ks, A0, cfg, "-")
    return [{"k": float(k), "omega_plus": float(a), "omega_minus": float(b),
             "vg_plus": float(c), "vg_minus": float(d)}
            for k, a, b, c, d in zip(ks, np.atleast_1d(wp), np.atleast_1d(wm),
                                     np.atleast_1d(vp), np.atleast_1d(vm))]


# --- diagnose -----------------------------------------------------------------

def _load_state(directory: Path, member: dict, mode: str) -> EvolutionState:
    psi, grid, meta = load_field(directory / member["psi"])
    dtpsi, _, _ = load_field(directory / member["dtpsi"])
    m, _, mmeta = load_field(directory / member["mass"])
    return EvolutionState(psi, dtpsi, float(meta["time"]),
                          MassField(m, MassMode(mmeta.get("mass_mode", mode))))


def diagnose_snapshot(path) -> dict:
    """Recompute diagnostics from a stored snapshot bundle (JSON index file)."""
    path = Path(path)
    if path.is_dir():
        candidates = sorted(path.glob("step_*.json"))
        candidates = [p for p in candidates if "_" not in p.stem[5:]]
        if not candidates:
            raise ConfigError(f"no snapshot index in {path}")
        path = candidates[-1]
    index = json.loads(path.read_text())
    sc = Scenario.from_dict(index["scenario"])
    if sc.hash != index["config_hash"]:
        raise ConfigError("snapshot scenario does not match its config hash")
    pot, _ = validate_scenario(sc)
    cfg = sc.config
    states = {k: _load_state(path.parent, v, cfg.mass_mode.value)
              for k, v in index["states"].items()}
    out = {"snapshot": path.name, "step": index["step"], "config_hash": index["config_hash"]}
    out.update(diagnostics.instantaneous(states["cur"], pot, sc.grid, cfg))
    if "prev" in states and "next" in states:
        d = diagnostics.triplet(states["prev"], states["cur"], states["next"], pot, sc.grid, cfg)
        out.update(d.row(states["cur"].t))
    return out
