"""Pressure-pulse driven flow in a channel bounded by a plate and a poroelastic wall."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .model import Geometry, MeshResolution, PhysicalParams, RunConfig, vessel_params
from .problem import BoundarySpec, Discretization, Problem
from .scheme import EnergyReport, advance, energy

T_STAR = 0.0075
SWEEP_H = (0.05, 0.025, 0.0125, 0.00625)


@dataclass(frozen=True)
class PulseInflow:
    P_max: float = 13333.0
    T_pulse: float = 0.003

    def __post_init__(self):
        if self.P_max < 0:
            raise ValueError(f"P_max must be >= 0 (got {self.P_max})")
        if not self.T_pulse > 0:
            raise ValueError(f"T_pulse must be > 0 (got {self.T_pulse})")

    def __call__(self, t: float) -> float:
        return pulse(t, self)


def pulse(t: float, p: PulseInflow) -> float:
    if t < 0:
        raise ValueError("pulse is defined for t >= 0")
    if t >= p.T_pulse:
        return 0.0
    return 0.5 * p.P_max * (1.0 - np.cos(2 * np.pi * t / p.T_pulse))


def vessel_config(half: bool = False, **changes) -> RunConfig:
    """Vessel layout: L = 5, R_f = 0.5, R_b = 0.1 with h_L = L/300, h_f = R_f/25, h_b = R_b/4.

    ``half`` doubles every mesh size (the plate keeps three layers).
    """
    res = MeshResolution(nx=150, ny_thick=2, ny_plate=3, ny_fluid=13) if half else \
        MeshResolution(nx=300, ny_thick=4, ny_plate=3, ny_fluid=25)
    cfg = RunConfig(geometry=Geometry(length=5.0, R_b=0.1, R_f=0.5), mesh=res,
                    dt=5e-4, T_final=0.014, d_h=5.0 / res.nx, bc="vessel")
    return cfg.with_(**changes) if changes else cfg


def vessel_boundary(inflow: PulseInflow) -> BoundarySpec:
    return BoundarySpec(
        p_tags=("GammaDr",),
        eta_tags=("GammaIm",),
        uy_tags=("GammaSym",),
        fluid_traction={"GammaIn": lambda x, y, t: (inflow(t) + 0.0 * x, 0.0 * x)},
    )


def vessel_problem(H: float, cfg: RunConfig | None = None,
                   params: PhysicalParams | None = None) -> Problem:
    cfg = cfg or vessel_config()
    params = params.with_(H=H) if params is not None else vessel_params(H)
    inflow = PulseInflow(cfg.P_max, cfg.T_pulse)
    return Problem(cfg, params, bcs=vessel_boundary(inflow))


@dataclass
class VesselResult:
    H: float
    x: np.ndarray
    times: np.ndarray
    w: np.ndarray                       # (n_times, n_columns)
    energy: list = field(default_factory=list)
    snapshots: dict = field(default_factory=dict)   # step -> StateVector

    def w_at(self, t: float) -> np.ndarray:
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[k] - t) > 1e-9 * max(1.0, t):
            raise KeyError(f"no stored time level at t={t}")
        return self.w[k]


def run_vessel(H: float, cfg: RunConfig | None = None, params: PhysicalParams | None = None,
               snapshot_every: int = 0, callback=None) -> VesselResult:
    """March the vessel problem from rest to ``cfg.T_final``.

    States are kept every ``snapshot_every`` steps (0 keeps none). ``callback``
    receives ``(step, state, disc)`` after each step.
    """
    if not H > 0:
        raise ValueError("plate thickness H must be positive")
    problem = vessel_problem(H, cfg, params)
    disc = Discretization(problem)
    st = disc.zero_state(0.0)
    times, ws, reports, snaps = [0.0], [st.w.copy()], [energy(disc, st)], {}
    if snapshot_every:
        snaps[0] = st
    for k in range(1, problem.cfg.n_steps + 1):
        st = advance(disc, st, k)
        times.append(st.t)
        ws.append(st.w.copy())
        reports.append(energy(disc, st))
        if snapshot_every and k % snapshot_every == 0:
            snaps[k] = st
        if callback is not None:
            callback(k, st, disc)
    return VesselResult(H, disc.mesh.xs.copy(), np.array(times), np.array(ws), reports, snaps)


# ------------------------------------------------------------ sweep

def profile_l2(x: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    """L2 norm of a - b as a piecewise-linear function on the grid ``x``."""
    d = a - b
    h = np.diff(x)
    return float(np.sqrt(np.sum(h / 3 * (d[:-1] ** 2 + d[:-1] * d[1:] + d[1:] ** 2))))


def oscillation(w: np.ndarray) -> tuple[int, float]:
    """Number of interior local extrema and the largest half peak-to-trough swing between neighbours."""
    s = np.sign(np.diff(w))
    s = s[s != 0]
    turns = np.flatnonzero(s[1:] != s[:-1])
    if turns.size == 0:
        return 0, 0.0
    # values at the extrema, in order
    nz = np.flatnonzero(np.diff(w) != 0)
    ext = w[nz[turns + 1]]
    if ext.size < 2:
        return int(ext.size), 0.0
    return int(ext.size), float(np.abs(np.diff(ext)).max() / 2)


@dataclass
class SweepResult:
    H: list
    x: np.ndarray
    profiles: list
    t_star: float

    @property
    def differences(self) -> list:
        return [profile_l2(self.x, a, b) for a, b in zip(self.profiles, self.profiles[1:])]

    @property
    def amplitudes(self) -> list:
        return [oscillation(w)[1] for w in self.profiles]

    @property
    def extrema_counts(self) -> list:
        return [oscillation(w)[0] for w in self.profiles]


def _sweep_member(args):
    H, cfg, params = args
    return run_vessel(H, cfg, params).w_at(cfg.T_final)


def h_sweep(H_values=SWEEP_H, cfg: RunConfig | None = None, params: PhysicalParams | None = None,
            t_star: float = T_STAR, jobs: int = 1) -> SweepResult:
    """Interface displacement w(., t_star) for each plate thickness, thickest first."""
    H_values = sorted((float(h) for h in H_values), reverse=True)
    if len(H_values) < 3:
        raise ValueError("an H sweep needs at least three thicknesses")
    cfg = (cfg or vessel_config()).with_(T_final=t_star)
    items = [(H, cfg, params) for H in H_values]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            profiles = list(pool.map(_sweep_member, items))
    else:
        profiles = [_sweep_member(a) for a in items]
    x = np.linspace(0.0, cfg.geometry.length, cfg.mesh.nx + 1)
    return SweepResult(H_values, x, profiles, t_star)
