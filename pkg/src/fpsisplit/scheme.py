"""Time stepping (pressure, then structure, then fluid) and the energy monitor."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import SolverError
from .model import StateVector
from .problem import Discretization
from .step_pressure import solve_pressure
from .step_stokes import solve_stokes
from .step_structure import solve_structure

ENERGY_NAMES = ("rho_b_xi", "lambda_b_div_eta", "mu_b_D_eta", "gamma_eta", "rho_p_v",
                "bend_Lam", "gamma_p_w", "c0_p", "c0p_q", "rho_f_u")
DISSIPATION_NAMES = ("darcy_b", "darcy_p", "visc_f", "slip_f")


def advance(disc: Discretization, prev: StateVector, step: int | None = None) -> StateVector:
    """One step of the splitting scheme from ``prev.t`` to ``prev.t + dt``."""
    t1 = prev.t + disc.dt
    if step is None:
        step = int(round(t1 / disc.dt))
    try:
        pq, u_b, u_p = solve_pressure(disc, prev, t1)
        xi, Lam, eta = solve_structure(disc, prev, pq, u_p, t1)
        v = xi[disc.gamma_plus_y]
        u, pi = solve_stokes(disc, prev, pq, v, u_p, t1)
    except SolverError as exc:
        raise SolverError(exc.system, f"time step {step} (t={t1:.6g}): {exc}") from exc
    return StateVector(t=t1, eta=eta, xi=xi, pq=pq, u_b=u_b, Lam=Lam, u_p=u_p, u=u, pi=pi,
                       n_gamma=prev.n_gamma, n_q=prev.n_q)


@dataclass(frozen=True)
class EnergyReport:
    t: float
    components: dict
    dissipation: dict

    @property
    def E(self) -> float:
        return float(sum(self.components.values()))

    @property
    def Dsp(self) -> float:
        return float(sum(self.dissipation.values()))

    def row(self) -> list:
        return ([self.t, self.E] + [self.components[k] for k in ENERGY_NAMES]
                + [self.Dsp] + [self.dissipation[k] for k in DISSIPATION_NAMES])

    @staticmethod
    def header() -> list:
        return ["t", "E", *ENERGY_NAMES, "Dsp", *DISSIPATION_NAMES]


def _quad(A, x):
    # every form here is positive semidefinite; clip the roundoff below zero
    return max(float(x @ (A @ x)), 0.0)


def energy(disc: Discretization, st: StateVector) -> EnergyReport:
    """Energy and dissipation of a discrete state (exact for the discrete spaces)."""
    d, prm = disc, disc.params
    H = prm.H
    comps = {
        "rho_b_xi": prm.rho_b * _quad(d.Mv_b, st.xi),
        "lambda_b_div_eta": prm.lambda_b * _quad(d.Div_b, st.eta),
        "mu_b_D_eta": 2 * prm.mu_b * _quad(d.Sym_b, st.eta),
        "gamma_eta": prm.gamma * _quad(d.Mv_b, st.eta),
        "rho_p_v": H * prm.rho_p * _quad(d.M11, st.v),
        "bend_Lam": H ** 3 * prm.bendD * _quad(d.M11, st.Lam),
        "gamma_p_w": H * prm.gamma_p * _quad(d.M11, st.w),
        "c0_p": prm.c0 * _quad(d.M_b, st.p),
        "c0p_q": prm.c0_p * _quad(d.M_p, st.q),
        "rho_f_u": prm.rho_f * _quad(d.M_u, st.u),
    }
    dsp = {
        "darcy_b": _quad(d.Darcy_b, st.u_b),
        "darcy_p": _quad(d.M_p, st.u_p) / prm.kappa_p,
        "visc_f": 2 * prm.mu_f * _quad(d.Sym_u, st.u),
        "slip_f": prm.beta * _quad(d.M22, st.u[d.gamma_minus_ux]),
    }
    return EnergyReport(st.t, comps, dsp)


def run(disc: Discretization, state: StateVector, n_steps: int, callback=None) -> StateVector:
    """Advance ``n_steps`` times; ``callback(step, state)`` is called after each step."""
    for k in range(1, n_steps + 1):
        state = advance(disc, state, k)
        if callback is not None:
            callback(k, state)
    return state
