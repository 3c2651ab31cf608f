"""Manufactured-solution runs, convergence tables, energy tracking and inequality checks."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import fem
from .mms import MmsSolution, generate_forcings
from .model import PhysicalParams, RunConfig, mms_config, unit_params
from .problem import Discretization, Problem, generic_boundary
from .scheme import EnergyReport, advance, energy

ERROR_NAMES = ("p", "q", "eta", "xi", "w", "v", "u", "pi")

# relative errors at h = 1/120, dt = 1e-3, T = 0.1 reported for the reference implementation
REFERENCE_TABLE = {"p": 1.6e-3, "q": 2.2e-2, "eta": 1.9e-3, "xi": 8.1e-3,
                   "w": 5.5e-3, "v": 3.7e-2, "u": 1.5e-4, "pi": 7.2e-3}


def mms_problem(cfg: RunConfig, params: PhysicalParams | None = None,
                q_lateral: bool = False) -> tuple[Problem, MmsSolution]:
    params = params or unit_params()
    ex = MmsSolution(params)
    return Problem(cfg, params, generate_forcings(ex), generic_boundary(ex, q_lateral)), ex


def mms_errors(disc: Discretization, st, ex: MmsSolution) -> dict:
    """Relative L2 errors of the eight reported fields at ``st.t``."""
    t, xs = st.t, disc.mesh.xs
    return {
        "p": fem.l2_error(disc.Sb, st.p, ex.p, t),
        "q": fem.l2_error(disc.Sp, st.q, ex.q, t),
        "eta": fem.l2_error(disc.Vb, st.eta, ex.eta, t),
        "xi": fem.l2_error(disc.Vb, st.xi, ex.xi, t),
        "w": fem.seg_l2_error(xs, st.w, lambda x: ex.w(x, t)),
        "v": fem.seg_l2_error(xs, st.v, lambda x: ex.v(x, t)),
        "u": fem.l2_error(disc.Uf, st.u, ex.u, t),
        "pi": fem.l2_error(disc.Pf, st.pi, ex.pi, t),
    }


def run_mms(cfg: RunConfig, params: PhysicalParams | None = None, q_lateral: bool = False) -> dict:
    """Run from the interpolated exact data to ``cfg.T_final`` and return the errors."""
    problem, ex = mms_problem(cfg, params, q_lateral)
    disc = Discretization(problem)
    st = disc.interpolate_state(ex, 0.0)
    for k in range(1, cfg.n_steps + 1):
        st = advance(disc, st, k)
    return mms_errors(disc, st, ex)


# ------------------------------------------------------------ convergence

def fit_slope(scales, errors) -> float:
    """Least-squares slope of log(error) against log(scale)."""
    x, y = np.log(np.asarray(scales, float)), np.log(np.asarray(errors, float))
    return float(np.polyfit(x, y, 1)[0])


@dataclass
class ConvergenceTable:
    key: str                      # 'h' or 'dt'
    scales: list
    errors: list = field(default_factory=list)

    def __post_init__(self):
        s = self.scales
        if len(s) < 2 or len(set(s)) != len(s):
            raise ValueError("need at least two distinct resolutions")

    @property
    def slopes(self) -> dict:
        return {k: fit_slope(self.scales, [e[k] for e in self.errors]) for k in ERROR_NAMES}

    def rows(self) -> list:
        order = np.argsort(self.scales)[::-1]
        out = [[self.scales[i]] + [self.errors[i][k] for k in ERROR_NAMES] for i in order]
        return out

    def header(self) -> list:
        return [self.key] + [f"e_{k}" for k in ERROR_NAMES]


def _run_entry(args):
    cfg, params = args
    return run_mms(cfg, params)


def _map(fn, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [fn(a) for a in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def convergence_space(levels, dt: float = 1e-3, T: float = 0.1,
                      params: PhysicalParams | None = None, jobs: int = 1) -> ConvergenceTable:
    """Errors for n = levels cells per unit length at fixed dt."""
    levels = sorted(int(n) for n in levels)
    if len(levels) < 3:
        raise ValueError("a spatial study needs at least three levels")
    cfgs = [(mms_config(n, dt, T), params) for n in levels]
    errs = _map(_run_entry, cfgs, jobs)
    return ConvergenceTable("h", [1.0 / n for n in levels], errs)


def convergence_time(steps, n: int = 100, T: float = 1.0,
                     params: PhysicalParams | None = None, jobs: int = 1) -> ConvergenceTable:
    """Errors for the time steps in ``steps`` at fixed mesh ``n``."""
    steps = sorted(float(s) for s in steps)
    if len(steps) < 3:
        raise ValueError("a temporal study needs at least three step sizes")
    cfgs = [(mms_config(n, dt, T), params) for dt in steps]
    errs = _map(_run_entry, cfgs, jobs)
    return ConvergenceTable("dt", steps, errs)


# ------------------------------------------------------------ energy

def exact_energy(disc: Discretization, ex: MmsSolution, t: float, degree: int = 10) -> float:
    """Energy of the exact fields by dense quadrature over the mesh cells."""
    prm = disc.params
    rule = fem.triangle_rule(degree)

    def integral(space, fn):
        es = fem.ElementSet(space.corners, rule)
        return float(np.sum(es.wdet * fn(es.X[..., 0], es.X[..., 1])))

    def sq(vals):
        return sum(np.asarray(v) ** 2 for v in vals)

    def elastic(x, y):
        (a, b), (c, d) = ex.grad_eta(x, y, t)
        div = a + d
        Dnorm = a ** 2 + d ** 2 + 0.5 * (b + c) ** 2
        ex_, ey_ = ex.eta(x, y, t)
        return (prm.lambda_b * div ** 2 + 2 * prm.mu_b * Dnorm
                + prm.gamma * (ex_ ** 2 + ey_ ** 2))

    E = integral(disc.Sb, lambda x, y: prm.rho_b * sq(ex.xi(x, y, t)) + elastic(x, y)
                 + prm.c0 * ex.p(x, y, t) ** 2)
    E += integral(disc.Sp, lambda x, y: prm.c0_p * ex.q(x, y, t) ** 2)
    E += integral(disc.Pf, lambda x, y: prm.rho_f * sq(ex.u(x, y, t)))
    g, gw = np.polynomial.legendre.leggauss(8)
    xs = disc.mesh.xs
    h = np.diff(xs)
    X = (xs[:-1, None] + 0.5 * h[:, None] * (g[None, :] + 1)).ravel()
    W = (0.5 * h[:, None] * gw[None, :]).ravel()
    H = prm.H
    E += float(np.sum(W * (H * prm.rho_p * ex.v(X, t) ** 2 + H ** 3 * prm.bendD * ex.Lam(X, t) ** 2
                           + H * prm.gamma_p * ex.w(X, t) ** 2)))
    return E


@dataclass
class EnergySeries:
    t: np.ndarray
    numeric: np.ndarray
    exact: np.ndarray
    reports: list

    @property
    def rel_deviation(self) -> np.ndarray:
        return np.abs(self.numeric - self.exact) / np.abs(self.exact)


def long_term_energy(cfg: RunConfig, params: PhysicalParams | None = None) -> EnergySeries:
    """Discrete and exact energy of the driven manufactured solution at every step."""
    problem, ex = mms_problem(cfg, params)
    disc = Discretization(problem)
    st = disc.interpolate_state(ex, 0.0)
    reports = [energy(disc, st)]
    exact = [exact_energy(disc, ex, 0.0)]
    for k in range(1, cfg.n_steps + 1):
        st = advance(disc, st, k)
        reports.append(energy(disc, st))
        exact.append(exact_energy(disc, ex, st.t))
    return EnergySeries(np.array([r.t for r in reports]), np.array([r.E for r in reports]),
                        np.array(exact), reports)


def isolated_problem(cfg: RunConfig, params: PhysicalParams | None = None) -> Problem:
    """Zero forcing and homogeneous boundary data on the manufactured-solution layout."""
    return Problem(cfg, params or unit_params(), bcs=generic_boundary(None))


def random_admissible_state(disc: Discretization, rng: np.random.Generator):
    """Random state vanishing on every essential boundary of the isolated problem."""
    st = disc.zero_state(0.0)
    for name in ("eta", "xi", "pq", "u", "Lam"):
        arr = getattr(st, name)
        arr[:] = rng.standard_normal(arr.size)
    bcs = disc.problem.bcs
    fixed = disc.Vb.nodes_on(bcs.eta_tags)
    for arr in (st.eta, st.xi):
        arr[fixed] = 0.0
        arr[fixed + disc.nb] = 0.0
    st.xi[disc.gamma_plus_x] = 0.0
    st.eta[disc.gamma_plus_x] = 0.0
    st.pq[disc.off_b + disc.Sb.nodes_on(bcs.p_tags)] = 0.0
    un = disc.Uf.nodes_on(bcs.u_tags)
    st.u[un] = 0.0
    st.u[un + disc.Uf.n_nodes] = 0.0
    return st


def energy_decay_run(n: int = 20, dt: float = 1e-4, steps: int = 200, seed: int = 0,
                     params: PhysicalParams | None = None) -> np.ndarray:
    """Energy history of the isolated system from random admissible data."""
    cfg = mms_config(n, dt, steps * dt)
    disc = Discretization(isolated_problem(cfg, params))
    st = random_admissible_state(disc, np.random.default_rng(seed))
    E = [energy(disc, st).E]
    for k in range(1, steps + 1):
        st = advance(disc, st, k)
        E.append(energy(disc, st).E)
    return np.array(E)


# ------------------------------------------------------------ inequalities

def check_thm51(disc: Discretization, pq: np.ndarray) -> tuple[float, float]:
    """Slacks (RHS - LHS) of the plate trace inequality and the weighted-average inequality.

    ``||q||^2_{G-} <= 2||p||^2_{G+} + 2H||d_z q||^2`` and
    ``||avg((z+H/2) q)||^2_{G+} <= H^3/64 ||d_z q||^2``.
    """
    H = disc.params.H
    q, p = disc.q_of(pq), disc.p_of(pq)
    dzq = float(q @ (disc.Dy_p @ q))
    qm = q[disc.gamma_minus_q]
    pg = p[: disc.n_gamma]
    slack1 = 2 * float(pg @ (disc.M11 @ pg)) + 2 * H * dzq - float(qm @ (disc.M11 @ qm))
    Q = disc.avg_w @ q
    slack2 = H ** 3 / 64 * dzq - float(Q @ (disc.M11 @ Q))
    return slack1, slack2
