"""Boundary data, problem definition and the cached discrete operators.

:class:`Discretization` owns the finite-element spaces on a glued mesh and
every time-independent matrix used by the three sub-steps. All matrices are
unconstrained; each step applies its own essential conditions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import fem
from .coupling import ColumnQuadrature, average_matrix
from .linalg import assemble_local
from .mesh import GluedMesh, build_glued_mesh
from .model import ForcingSpec, PhysicalParams, RunConfig, StateVector


@dataclass
class BoundarySpec:
    """Essential tags/values and natural tractions for the three sub-problems.

    Traction callables return ``(tx, ty)`` and enter the right-hand side as
    ``+ int t . test``. A ``None`` value callable means homogeneous data.
    """

    p_tags: tuple = ()
    eta_tags: tuple = ()
    u_tags: tuple = ()
    uy_tags: tuple = ()
    q_tags: tuple = ()
    p_value: Optional[Callable] = None
    q_value: Optional[Callable] = None
    eta_value: Optional[Callable] = None
    u_value: Optional[Callable] = None
    structure_traction: dict = field(default_factory=dict)
    fluid_traction: dict = field(default_factory=dict)


def generic_boundary(exact=None, q_lateral: bool = False) -> BoundarySpec:
    """Dirichlet p, eta on the outer thick-layer sides and u on the outer fluid sides.

    ``q_lateral`` additionally prescribes the plate pressure on x = 0 and x = L.
    """
    return BoundarySpec(
        p_tags=("GammaB_top", "GammaB_side"),
        q_tags=("GammaP_side",) if q_lateral else (),
        q_value=None if exact is None else exact.q,
        eta_tags=("GammaB_top", "GammaB_side"),
        u_tags=("GammaF_bottom", "GammaF_side"),
        p_value=None if exact is None else exact.p,
        eta_value=None if exact is None else exact.eta,
        u_value=None if exact is None else exact.u,
    )


@dataclass
class Problem:
    cfg: RunConfig
    params: PhysicalParams
    forcing: ForcingSpec = field(default_factory=ForcingSpec)
    bcs: BoundarySpec = field(default_factory=BoundarySpec)


def _segment_assemble(local, test_cells, trial_cells, shape):
    return assemble_local(local, test_cells, trial_cells, shape)


class Discretization:
    """Spaces, index maps and constant matrices for one problem."""

    def __init__(self, problem: Problem, mesh: GluedMesh | None = None):
        self.problem = problem
        self.params = prm = problem.params
        self.cfg = problem.cfg
        self.mesh = mesh = mesh or build_glued_mesh(problem.cfg, prm.H)
        self.dt = problem.cfg.dt
        self.pen = prm.gamma_pen * prm.mu_f / problem.cfg.d_h

        self.Sb = fem.lagrange_space(mesh, ("B",), 1, 1)
        self.Vb = fem.lagrange_space(mesh, ("B",), 1, 2)
        self.Sp = fem.lagrange_space(mesh, ("P",), 1, 1)
        self.PQ = fem.lagrange_space(mesh, ("P", "B"), 1, 1)
        self.Uf = fem.lagrange_space(mesh, ("F",), 2, 2)
        self.Pf = fem.lagrange_space(mesh, ("F",), 1, 1)

        self.ncol = mesh.ncol
        self.n_gamma = mesh.ncol
        self.n_q = self.Sp.n_nodes
        self.nb = self.Sb.n_nodes
        self.n_pq = self.PQ.n_nodes
        self.off_b = self.n_q - self.n_gamma
        assert self.off_b + self.nb == self.n_pq

        self.es_b = fem.ElementSet(self.Sb.corners)
        self.es_p = fem.ElementSet(self.Sp.corners)
        self.es_f = fem.ElementSet(self.Uf.corners)
        self.cq = ColumnQuadrature.from_mesh(mesh)
        self._build()

    # ------------------------------------------------------------ matrices
    def _build(self):
        prm, Sb, Vb, Sp, Uf, Pf = self.params, self.Sb, self.Vb, self.Sp, self.Uf, self.Pf
        esb, esp, esf = self.es_b, self.es_p, self.es_f
        nb2, nu = Vb.n_dofs, Uf.n_dofs

        self.M_b = assemble_local(fem.mass_local(esb, 1), Sb.cells, Sb.cells, (self.nb,) * 2)
        self.M_p = assemble_local(fem.mass_local(esp, 1), Sp.cells, Sp.cells, (self.n_q,) * 2)
        self.Mv_b = assemble_local(fem.tensor_mass_local(esb, 1, np.eye(2)),
                                   Vb.cell_dofs, Vb.cell_dofs, (nb2, nb2))
        self.Sym_b = assemble_local(fem.sym_grad_local(esb, 1), Vb.cell_dofs, Vb.cell_dofs, (nb2, nb2))
        self.Div_b = assemble_local(fem.div_div_local(esb, 1), Vb.cell_dofs, Vb.cell_dofs, (nb2, nb2))
        self.Darcy_b = assemble_local(fem.tensor_mass_local(esb, 1, prm.kappa_inv),
                                      Vb.cell_dofs, Vb.cell_dofs, (nb2, nb2))
        # (grad p, U_b): rows U_b, cols p on Sb nodes
        self.G_b = assemble_local(fem.grad_coupling_local(esb, 1, 1), Vb.cell_dofs, Sb.cells, (nb2, self.nb))
        # (div xi, r): rows r, cols xi
        self.D_b = assemble_local(fem.div_coupling_local(esb, 1, 1), Sb.cells, Vb.cell_dofs, (self.nb, nb2))
        # (d_y q, U_p): rows U_p, cols q
        self.B_p = assemble_local(fem.normal_derivative_local(esp, 1), Sp.cells, Sp.cells, (self.n_q,) * 2)
        H = prm.H
        self.Wx_p = assemble_local(fem.dx_stiffness_local(esp, 1, coef=lambda x, y: y + 0.5 * H),
                                   Sp.cells, Sp.cells, (self.n_q,) * 2)
        self.Dy_p = assemble_local(_dy_stiffness(esp), Sp.cells, Sp.cells, (self.n_q,) * 2)

        self.M_u = assemble_local(fem.tensor_mass_local(esf, 2, np.eye(2)), Uf.cell_dofs, Uf.cell_dofs, (nu, nu))
        self.Sym_u = assemble_local(fem.sym_grad_local(esf, 2), Uf.cell_dofs, Uf.cell_dofs, (nu, nu))
        # (pi, div U): rows U, cols pi
        self.Bdiv = assemble_local(fem.grad_coupling_local_div(esf, 2, 1), Uf.cell_dofs, Pf.cells,
                                   (nu, Pf.n_nodes))

        xs, nx = self.mesh.xs, self.mesh.nx
        c1, c2 = fem.seg_cells(nx, 1), fem.seg_cells(nx, 2)
        n1, n2 = nx + 1, 2 * nx + 1
        self.M11 = _segment_assemble(fem.seg_mass_local(xs, 1, 1), c1, c1, (n1, n1))
        self.M12 = _segment_assemble(fem.seg_mass_local(xs, 1, 2), c1, c2, (n1, n2))
        self.M22 = _segment_assemble(fem.seg_mass_local(xs, 2, 2), c2, c2, (n2, n2))
        self.S11 = _segment_assemble(fem.seg_stiffness_local(xs), c1, c1, (n1, n1))

        self.avg_w = average_matrix(self.mesh, weighted=True, cq=self.cq)

        # index maps
        self.gamma_plus_y = nb2 // 2 + np.arange(self.n_gamma)     # v dofs inside xi
        self.gamma_plus_x = np.arange(self.n_gamma)                # tangential xi on Gamma+
        self.gamma_minus_q = np.arange(self.n_gamma)               # Gamma- row of the plate
        rm = self.mesh.row_of("GammaMinus")
        self.gamma_minus_u = Uf.row_nodes(rm)                      # P2 nodes on Gamma-, by x
        self.gamma_minus_ux = self.gamma_minus_u
        self.gamma_minus_uy = Uf.n_nodes + self.gamma_minus_u

    # ------------------------------------------------------------ helpers
    def p_of(self, pq):
        return pq[self.off_b:]

    def q_of(self, pq):
        return pq[: self.n_q]

    def zero_state(self, t: float = 0.0) -> StateVector:
        return StateVector(
            t=t, eta=np.zeros(self.Vb.n_dofs), xi=np.zeros(self.Vb.n_dofs),
            pq=np.zeros(self.n_pq), u_b=np.zeros(self.Vb.n_dofs),
            Lam=np.zeros(self.n_gamma), u_p=np.zeros(self.n_q),
            u=np.zeros(self.Uf.n_dofs), pi=np.zeros(self.Pf.n_nodes),
            n_gamma=self.n_gamma, n_q=self.n_q)

    def interpolate_state(self, exact, t: float) -> StateVector:
        """Nodal interpolant of an exact solution object (see :mod:`fpsisplit.mms`)."""
        st = self.zero_state(t)
        st.eta[:] = fem.interpolate(exact.eta, self.Vb, t)
        st.xi[:] = fem.interpolate(exact.xi, self.Vb, t)
        st.xi[self.gamma_plus_x] = 0.0
        st.pq[: self.n_q] = fem.interpolate(exact.q, self.Sp, t)
        st.pq[self.off_b:] = fem.interpolate(exact.p, self.Sb, t)
        st.u_b[:] = fem.interpolate(exact.u_b, self.Vb, t)
        st.u_p[:] = fem.interpolate(exact.u_p, self.Sp, t)
        st.Lam[:] = exact.Lam(self.mesh.xs, t)
        st.u[:] = fem.interpolate(exact.u, self.Uf, t)
        st.pi[:] = fem.interpolate(exact.pi, self.Pf, t)
        return st

    def structure_dirichlet_dofs(self) -> np.ndarray:
        nodes = self.Vb.nodes_on(self.problem.bcs.eta_tags)
        return np.concatenate([nodes, nodes + self.nb])


def _dy_stiffness(es: fem.ElementSet) -> np.ndarray:
    _, G = es.basis(1)
    return np.einsum("eq,eqa,eqb->eab", es.wdet, G[..., 1], G[..., 1])
