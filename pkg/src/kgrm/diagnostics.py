"""Everything that can be measured on a (t - dt, t, t + dt) snapshot triplet."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .currents import (ConservationReport, centroid, continuity_field, density_balance,
                       energy_advection_residual, long_form_continuity_residual,
                       noether_current, polar_current, wave_velocity, weighted_norm)
from .dispersion import appendix_split_residuals, dispersion_residual_polar
from .dynamics import EvolutionState
from .fields import Grid, integrate, l2_norm, polar_decompose
from .massmodel import energy_identity_residual, gauge_residual
from .potentials import PotentialSet
from .quantities import MassMode, PhysicalConfig


@dataclass
class TripletDiagnostics:
    report: ConservationReport
    gauge_residual_norm: float
    energy_identity_residual_norm: float
    centroid: float
    centroid_velocity: float
    singular: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    singular_weight: float = 0.0
    fields: dict = field(default_factory=dict, repr=False)

    def row(self, t: float) -> dict:
        r = self.report
        return {"t": t, "total_charge": r.total_charge, "min_Jt": r.min_Jt,
                "continuity_residual_norm": r.continuity_residual_norm,
                "energy_residual_norm": r.energy_residual_norm,
                "gauge_residual_norm": self.gauge_residual_norm,
                "energy_identity_residual_norm": self.energy_identity_residual_norm,
                "centroid": self.centroid, "centroid_velocity": self.centroid_velocity}


def instantaneous(state: EvolutionState, potentials: PotentialSet, grid: Grid,
                  cfg: PhysicalConfig) -> dict:
    """Diagnostics that need one snapshot only."""
    s = potentials.sample(state.t, grid)
    polar = polar_decompose(state.psi, state.dtpsi, grid, cfg.hbar, time=state.t)
    J = noether_current(state.psi, state.dtpsi, state.mass, s, grid, cfg, state.t)
    Jp = polar_current(polar, state.mass, s, cfg)
    ok = polar.unmasked
    scale = max(float(np.max(np.abs(J.Jt))), float(np.max(np.abs(J.Jx))), 1e-300)
    polar_err = float(np.max(np.abs(np.concatenate([(J.Jt - Jp.Jt)[ok], (J.Jx - Jp.Jx)[ok]])),
                             initial=0.0)) / scale
    out = {"t": state.t, "total_charge": integrate(J.Jt, grid),
           "min_Jt": float(J.Jt.min()), "max_Jt": float(J.Jt.max()),
           "norm_rho": integrate(polar.rho, grid), "polar_identity_rel_err": polar_err,
           "gauge_residual_norm": l2_norm(gauge_residual(potentials, grid, cfg, state.t), grid),
           "centroid": centroid(J.Jt, grid)}
    if not cfg.quasi_static:
        v = wave_velocity(polar, state.mass, s, cfg, strict=False)
        out["max_abs_velocity"] = float(np.nanmax(np.abs(v)))
        disp = dispersion_residual_polar(polar, state.mass, s, cfg)
        out["dispersion_residual_weighted"] = weighted_norm(disp, polar.rho, grid)
    if state.mass.mode is not MassMode.REST:
        out["energy_identity_residual_norm"] = l2_norm(
            energy_identity_residual(state.mass, s.phi, cfg), grid)
    return out


def triplet(prev: EvolutionState, cur: EvolutionState, nxt: EvolutionState,
            potentials: PotentialSet, grid: Grid, cfg: PhysicalConfig,
            keep_fields: bool = False) -> TripletDiagnostics:
    dt = 0.5 * (nxt.t - prev.t)
    samples = [potentials.sample(st.t, grid) for st in (prev, cur, nxt)]
    polars = [polar_decompose(st.psi, st.dtpsi, grid, cfg.hbar, time=st.t)
              for st in (prev, cur, nxt)]
    currents = [noether_current(st.psi, st.dtpsi, st.mass, s, grid, cfg, st.t)
                for st, s in zip((prev, cur, nxt), samples)]
    p0, p1, p2 = polars
    s1 = samples[1]

    cont = continuity_field(*currents, dt, grid)
    v = wave_velocity(p1, cur.mass, s1, cfg, strict=False)
    v_ok = np.nan_to_num(v)
    adv = energy_advection_residual(p0, p1, p2, prev.mass, cur.mass, nxt.mass,
                                    samples[0].phi, s1.phi, samples[2].phi, v_ok, dt, grid, cfg)
    Jt = currents[1].Jt
    report = ConservationReport(
        total_charge=integrate(Jt, grid),
        continuity_residual_norm=l2_norm(cont, grid),
        energy_residual_norm=weighted_norm(adv.total_form, p1.rho, grid),
        min_Jt=float(Jt.min()), max_Jt=float(Jt.max()))

    if cur.mass.mode is MassMode.REST:
        eid = 0.0
    else:
        eid = l2_norm(energy_identity_residual(cur.mass, s1.phi, cfg), grid)
    xc = centroid(Jt, grid)
    vc = (centroid(currents[2].Jt, grid) - centroid(currents[0].Jt, grid)) / (2.0 * dt)
    singular = np.flatnonzero(np.isnan(v))
    weight = float(np.max(p1.rho[singular])) / float(np.max(p1.rho)) if singular.size else 0.0
    diag = TripletDiagnostics(report, l2_norm(gauge_residual(potentials, grid, cfg, cur.t), grid),
                              eid, xc, vc, singular, weight)
    if keep_fields:
        phase, amp, box_S, box_R = appendix_split_residuals(p0, p1, p2, cur.mass, s1, dt, cfg)
        diag.fields = {
            "polar": p1, "polars": polars, "currents": currents, "velocity": v,
            "continuity": cont, "energy_advection": adv,
            "density_balance": density_balance(p1, box_S, v_ok, cur.mass, cfg),
            "long_form": long_form_continuity_residual(p0, p1, p2, prev.mass, cur.mass,
                                                       nxt.mass, v_ok, dt, grid, cfg),
            "appendix_phase": phase, "appendix_amplitude": amp,
            "box_S": box_S, "box_R": box_R,
        }
    return diag
