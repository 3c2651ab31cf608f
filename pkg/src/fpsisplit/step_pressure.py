"""Step 1: coupled Darcy pressure solve in the thick layer and the plate.

Unknown layout ``[pq | u_b | u_p]`` where ``pq`` stacks plate pressure q and
thick-layer pressure p with the shared Gamma+ row stored once. Structure and
fluid data are lagged (taken from the previous time level).
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from . import fem
from .coupling import extend, transfer_plus_to_minus
from .linalg import Factorized, constrain_matrix, constrain_rhs
from .model import StateVector
from .problem import Discretization


def _embed(n_rows, offset, n):
    return sp.csr_matrix((np.ones(n), (offset + np.arange(n), np.arange(n))), shape=(n_rows, n))


class PressureSystemCache:
    """Constant Step-1 matrix, its constrained LU, and the Dirichlet dofs."""

    def __init__(self, disc: Discretization):
        d, prm = disc, disc.params
        self.Eb = _embed(d.n_pq, d.off_b, d.nb)
        self.Ep = _embed(d.n_pq, 0, d.n_q)
        self.C = (prm.c0 * (self.Eb @ d.M_b @ self.Eb.T)
                  + prm.c0_p * (self.Ep @ d.M_p @ self.Ep.T)) / d.dt
        G = d.G_b @ self.Eb.T                # (grad p, U_b)
        B = d.B_p @ self.Ep.T                # (d_y q, U_p)
        Kp = d.M_p / prm.kappa_p
        Pg = _embed(d.n_q, 0, d.n_gamma)
        self.Pg = Pg
        if d.pen > 0:
            Kp = Kp + d.pen * (Pg @ d.M11 @ Pg.T)
        self.A = sp.bmat([[self.C, -G.T, -B.T],
                          [G, d.Darcy_b, None],
                          [B, None, Kp]], format="csr")
        self.n = self.A.shape[0]
        self.sl_pq = slice(0, d.n_pq)
        self.sl_ub = slice(d.n_pq, d.n_pq + d.Vb.n_dofs)
        self.sl_up = slice(d.n_pq + d.Vb.n_dofs, self.n)
        bcs = disc.problem.bcs
        self.dir_nodes = d.Sb.nodes_on(bcs.p_tags)
        # plate nodes already fixed through the shared Gamma+ row are skipped
        qn = d.Sp.nodes_on(bcs.q_tags)
        self.q_nodes = qn[~np.isin(qn - d.off_b, self.dir_nodes)]
        self.dir_dofs = np.concatenate([d.off_b + self.dir_nodes, self.q_nodes])
        self.lu = Factorized(constrain_matrix(self.A, self.dir_dofs), "pressure (step 1)")


def _cache(disc: Discretization) -> PressureSystemCache:
    c = disc.__dict__.get("_pressure_cache")
    if c is None:
        c = disc._pressure_cache = PressureSystemCache(disc)
    return c


def pressure_rhs(disc: Discretization, prev: StateVector, t_next: float) -> np.ndarray:
    d, prm, f = disc, disc.params, disc.problem.forcing
    c = _cache(disc)
    b = np.zeros(c.n)
    r = c.C @ prev.pq
    if f.G_b is not None:
        r += c.Eb @ fem.load_vector(d.Sb, f.G_b, t_next, d.es_b)
    if f.G_p is not None:
        r += c.Ep @ fem.load_vector(d.Sp, f.G_p, t_next, d.es_p)
    if prm.alpha != 0.0:
        r -= prm.alpha * (c.Eb @ (d.D_b @ prev.xi))
    v_ext = extend(prev.v, d.mesh)
    if prm.alpha_p != 0.0:
        r[: d.n_q] -= prm.alpha_p * (d.Wx_p @ v_ext)
    # lagged normal flux through Gamma-: u^n.n - v~^n
    flux = d.M12 @ prev.u[d.gamma_minus_uy] - d.M11 @ transfer_plus_to_minus(prev.v, d.mesh)
    r[d.gamma_minus_q] += flux
    b[c.sl_pq] = r
    if d.pen > 0:
        b[c.sl_up.start + d.gamma_minus_q] += d.pen * flux
    return b


def _values(fn, X, t):
    if fn is None or X.shape[0] == 0:
        return np.zeros(X.shape[0])
    return np.broadcast_to(fn(X[:, 0], X[:, 1], t), (X.shape[0],)).astype(float)


def dirichlet_values(disc: Discretization, t: float) -> np.ndarray:
    c, bcs = _cache(disc), disc.problem.bcs
    return np.concatenate([_values(bcs.p_value, disc.Sb.coords[c.dir_nodes], t),
                           _values(bcs.q_value, disc.Sp.coords[c.q_nodes], t)])


def solve_pressure(disc: Discretization, prev: StateVector, t_next: float):
    """Return ``(pq, u_b, u_p)`` at ``t_next``."""
    c = _cache(disc)
    b = pressure_rhs(disc, prev, t_next)
    b = constrain_rhs(c.A, b, c.dir_dofs, dirichlet_values(disc, t_next))
    x = c.lu.solve(b)
    return x[c.sl_pq].copy(), x[c.sl_ub].copy(), x[c.sl_up].copy()
