"""Step 2: thick-layer elastodynamics coupled to the plate bending system.

Unknown layout ``[xi | Lam]``. The plate velocity v is the normal (y)
component of xi on the Gamma+ row; the tangential component there is held
at zero. Displacements are recovered as ``eta = eta^n + dt * xi``.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from . import fem
from .coupling import transfer_minus_to_plus
from .linalg import Factorized, constrain_matrix, constrain_rhs
from .model import StateVector
from .problem import Discretization


def _embed(n_rows, rows, n):
    return sp.csr_matrix((np.ones(n), (rows, np.arange(n))), shape=(n_rows, n))


class StructureSystemCache:
    def __init__(self, disc: Discretization):
        d, prm = disc, disc.params
        dt, H = d.dt, prm.H
        nxi = d.Vb.n_dofs
        self.Ke = 2 * prm.mu_b * d.Sym_b + prm.lambda_b * d.Div_b
        self.Eg = _embed(nxi, d.gamma_plus_y, d.n_gamma)    # Gamma+ row -> xi_y dofs
        plate_mass = H * prm.rho_p / dt + H * prm.gamma_p * dt + d.pen
        bend = H ** 3 * prm.bendD
        Axx = ((prm.rho_b / dt + prm.gamma * dt) * d.Mv_b + dt * self.Ke
               + plate_mass * (self.Eg @ d.M11 @ self.Eg.T))
        Axl = bend * (self.Eg @ d.S11)
        Alx = -bend * (d.S11 @ self.Eg.T)
        All = bend / dt * d.M11
        self.A = sp.bmat([[Axx, Axl], [Alx, All]], format="csr")
        self.n = self.A.shape[0]
        self.nxi = nxi

        eta_nodes = d.Vb.nodes_on(disc.problem.bcs.eta_tags)
        ex = np.setdiff1d(eta_nodes, d.gamma_plus_x)
        self.eta_nodes_x = ex
        self.eta_nodes_y = eta_nodes
        self.dir_dofs = np.concatenate([d.gamma_plus_x, ex, eta_nodes + d.nb])
        self.lu = Factorized(constrain_matrix(self.A, self.dir_dofs), "structure (step 2)")
        self.traction_edges = {
            tag: disc.mesh.facets_of(tag) for tag in disc.problem.bcs.structure_traction}


def _cache(disc: Discretization) -> StructureSystemCache:
    c = disc.__dict__.get("_structure_cache")
    if c is None:
        c = disc._structure_cache = StructureSystemCache(disc)
    return c


def _traction_load(disc, space, edges, fn, t, out):
    nodes = space.edge_nodes(edges)
    P = disc.mesh.vertices
    p0, p1 = P[edges[:, 0]], P[edges[:, 1]]
    for comp in range(2):
        g = lambda x, y, c=comp: np.asarray(fn(x, y, t)[c], float) + 0.0 * x
        loc = fem.edge_load(p0, p1, space.degree, g)
        np.add.at(out, nodes + comp * space.n_nodes, loc)


def structure_rhs(disc: Discretization, prev: StateVector, pq_new, u_p_new, t_next) -> np.ndarray:
    d, prm, f = disc, disc.params, disc.problem.forcing
    c = _cache(disc)
    dt, H = d.dt, prm.H
    bend = H ** 3 * prm.bendD
    b = np.zeros(c.n)
    r = (prm.rho_b / dt) * (d.Mv_b @ prev.xi) - c.Ke @ prev.eta
    if prm.gamma != 0.0:
        r -= prm.gamma * (d.Mv_b @ prev.eta)
    if f.F_b is not None:
        r += fem.load_vector(d.Vb, f.F_b, t_next, d.es_b)
    if prm.alpha != 0.0:
        r += prm.alpha * (d.D_b.T @ d.p_of(pq_new))
    for tag, fn in disc.problem.bcs.structure_traction.items():
        _traction_load(disc, d.Vb, c.traction_edges[tag], fn, t_next, r)

    q_new = d.q_of(pq_new)
    g = H * prm.rho_p / dt * (d.M11 @ prev.v)
    if prm.gamma_p != 0.0:
        g -= H * prm.gamma_p * (d.M11 @ prev.w)
    if prm.alpha_p != 0.0:
        g += H * prm.alpha_p * (d.S11 @ (d.avg_w @ q_new))
    g += d.M11 @ transfer_minus_to_plus(q_new[d.gamma_minus_q], d.mesh)
    if d.pen > 0:
        g += d.pen * (d.M12 @ prev.u[d.gamma_minus_uy]
                      - d.M11 @ transfer_minus_to_plus(u_p_new[d.gamma_minus_q], d.mesh))
    if f.F_p is not None:
        g += fem.seg_load(d.mesh.xs, 1, lambda x: f.F_p(x, 0.0 * x, t_next))
    r[d.gamma_plus_y] += g
    b[: c.nxi] = r
    b[c.nxi:] = bend / dt * (d.M11 @ prev.Lam)
    return b


def dirichlet_values(disc: Discretization, prev: StateVector, t: float) -> np.ndarray:
    d, c = disc, _cache(disc)
    fn = disc.problem.bcs.eta_value
    vx = np.zeros(c.eta_nodes_x.size)
    vy = np.zeros(c.eta_nodes_y.size)
    if fn is not None:
        X = d.Vb.coords
        ex, _ = fn(X[c.eta_nodes_x, 0], X[c.eta_nodes_x, 1], t)
        _, ey = fn(X[c.eta_nodes_y, 0], X[c.eta_nodes_y, 1], t)
        vx = np.broadcast_to(ex, vx.shape).astype(float)
        vy = np.broadcast_to(ey, vy.shape).astype(float)
    # xi chosen so that eta^{n+1} hits the boundary data
    vx = (vx - prev.eta[c.eta_nodes_x]) / d.dt
    vy = (vy - prev.eta[c.eta_nodes_y + d.nb]) / d.dt
    return np.concatenate([np.zeros(d.n_gamma), vx, vy])


def solve_structure(disc: Discretization, prev: StateVector, pq_new, u_p_new, t_next: float):
    """Return ``(xi, Lam, eta)`` at ``t_next``; v and w are views into xi and eta."""
    c = _cache(disc)
    b = structure_rhs(disc, prev, pq_new, u_p_new, t_next)
    b = constrain_rhs(c.A, b, c.dir_dofs, dirichlet_values(disc, prev, t_next))
    x = c.lu.solve(b)
    xi = x[: c.nxi].copy()
    xi[disc.gamma_plus_x] = 0.0
    eta = prev.eta + disc.dt * xi
    return xi, x[c.nxi:].copy(), eta
