"""Step 3: Taylor-Hood Stokes solve in the fluid with slip and pressure data on Gamma-.

Unknown layout ``[u | pi]`` with P2 velocity (component-major) and P1 pressure.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from . import fem
from .coupling import transfer_plus_to_minus
from .linalg import Factorized, constrain_matrix, constrain_rhs
from .model import StateVector
from .problem import Discretization
from .step_structure import _traction_load


def _embed(n_rows, rows, n):
    return sp.csr_matrix((np.ones(n), (rows, np.arange(n))), shape=(n_rows, n))


class StokesSystemCache:
    def __init__(self, disc: Discretization):
        d, prm = disc, disc.params
        nu = d.Uf.n_dofs
        self.Ex = _embed(nu, d.gamma_minus_ux, d.gamma_minus_ux.size)
        self.Ey = _embed(nu, d.gamma_minus_uy, d.gamma_minus_uy.size)
        Auu = prm.rho_f / d.dt * d.M_u + 2 * prm.mu_f * d.Sym_u
        if prm.beta != 0.0:
            Auu = Auu + prm.beta * (self.Ex @ d.M22 @ self.Ex.T)
        if d.pen > 0:
            Auu = Auu + d.pen * (self.Ey @ d.M22 @ self.Ey.T)
        self.A = sp.bmat([[Auu, -d.Bdiv], [-d.Bdiv.T, None]], format="csr")
        self.n = self.A.shape[0]
        self.nu = nu
        bcs = disc.problem.bcs
        self.u_nodes = d.Uf.nodes_on(bcs.u_tags)
        uy_only = np.setdiff1d(d.Uf.nodes_on(bcs.uy_tags), self.u_nodes)
        self.uy_nodes = np.concatenate([self.u_nodes, uy_only])
        self.dir_dofs = np.concatenate([self.u_nodes, self.uy_nodes + d.Uf.n_nodes])
        self.lu = Factorized(constrain_matrix(self.A, self.dir_dofs), "stokes (step 3)")
        self.traction_edges = {tag: disc.mesh.facets_of(tag) for tag in bcs.fluid_traction}


def _cache(disc: Discretization) -> StokesSystemCache:
    c = disc.__dict__.get("_stokes_cache")
    if c is None:
        c = disc._stokes_cache = StokesSystemCache(disc)
    return c


def stokes_rhs(disc: Discretization, prev: StateVector, pq_new, v_new, u_p_new, t_next) -> np.ndarray:
    d, prm, f = disc, disc.params, disc.problem.forcing
    c = _cache(disc)
    b = np.zeros(c.n)
    r = prm.rho_f / d.dt * (d.M_u @ prev.u)
    if f.F_f is not None:
        r += fem.load_vector(d.Uf, f.F_f, t_next, d.es_f)
    for tag, fn in disc.problem.bcs.fluid_traction.items():
        _traction_load(disc, d.Uf, c.traction_edges[tag], fn, t_next, r)
    q_minus = d.q_of(pq_new)[d.gamma_minus_q]
    gy = -(d.M12.T @ q_minus)
    if d.pen > 0:
        gy += d.pen * (d.M12.T @ (transfer_plus_to_minus(v_new, d.mesh) + u_p_new[d.gamma_minus_q]))
    r[d.gamma_minus_uy] += gy
    b[: c.nu] = r
    return b


def dirichlet_values(disc: Discretization, t: float) -> np.ndarray:
    d, c = disc, _cache(disc)
    fn = disc.problem.bcs.u_value
    n_x, n_y = c.u_nodes.size, c.uy_nodes.size
    if fn is None:
        return np.zeros(n_x + n_y)
    X = d.Uf.coords
    ux, _ = fn(X[c.u_nodes, 0], X[c.u_nodes, 1], t)
    _, uy = fn(X[c.uy_nodes, 0], X[c.uy_nodes, 1], t)
    vals = np.concatenate([np.broadcast_to(ux, (n_x,)), np.broadcast_to(uy, (n_y,))]).astype(float)
    # nodes that only carry the normal condition keep u.n = 0
    vals[n_x + c.u_nodes.size:] = 0.0
    return vals


def solve_stokes(disc: Discretization, prev: StateVector, pq_new, v_new, u_p_new, t_next: float):
    """Return ``(u, pi)`` at ``t_next``."""
    c = _cache(disc)
    b = stokes_rhs(disc, prev, pq_new, v_new, u_p_new, t_next)
    b = constrain_rhs(c.A, b, c.dir_dofs, dirichlet_values(disc, t_next))
    x = c.lu.solve(b)
    return x[: c.nu].copy(), x[c.nu:].copy()
