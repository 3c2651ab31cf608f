"""Lagrange P1/P2 elements on triangles and interface segments.

Local matrices are computed for many elements at once: every kernel returns
an array of shape ``(n_elements, n_test_local, n_trial_local)``. Vector-valued
spaces use component-major local ordering (all x-components, then all
y-components), matching the global layout ``dof = comp * n_nodes + node``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from math import ceil

import numpy as np

from .mesh import GluedMesh


class FormError(ValueError):
    pass


# ---------------------------------------------------------------- quadrature

@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray   # (nq, dim) on the reference cell
    weights: np.ndarray  # (nq,), sum = reference measure
    degree: int


def _dunavant4() -> QuadratureRule:
    a, wa = 0.445948490915965, 0.223381589678011
    b, wb = 0.091576213509771, 0.109951743655322
    pts = np.array([[a, a], [1 - 2 * a, a], [a, 1 - 2 * a],
                    [b, b], [1 - 2 * b, b], [b, 1 - 2 * b]])
    w = 0.5 * np.array([wa, wa, wa, wb, wb, wb])
    return QuadratureRule(pts, w, 4)


TRIANGLE_DEG4 = _dunavant4()


def triangle_rule(degree: int = 4) -> QuadratureRule:
    """Positive-weight rule on the reference triangle exact to ``degree``.

    Degree <= 4 returns the 6-point rule; higher degrees use a collapsed
    (Duffy) tensor Gauss-Legendre rule.
    """
    if degree <= 4:
        return TRIANGLE_DEG4
    n = int(ceil((degree + 2) / 2))
    g, gw = np.polynomial.legendre.leggauss(n)
    g, gw = 0.5 * (g + 1), 0.5 * gw
    U, V = np.meshgrid(g, g, indexing="ij")
    WU, WV = np.meshgrid(gw, gw, indexing="ij")
    s = U.ravel()
    t = (V * (1 - U)).ravel()
    w = (WU * WV * (1 - U)).ravel()
    return QuadratureRule(np.column_stack([s, t]), w, degree)


def segment_rule(npts: int = 3) -> QuadratureRule:
    g, gw = np.polynomial.legendre.leggauss(npts)
    return QuadratureRule(0.5 * (g + 1)[:, None], 0.5 * gw, 2 * npts - 1)


# --------------------------------------------------------- reference bases

def tri_basis(degree: int, pts: np.ndarray):
    """Values (nq, nl) and reference gradients (nq, nl, 2) at ``pts``."""
    s, t = pts[:, 0], pts[:, 1]
    l0, l1, l2 = 1 - s - t, s, t
    dl = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
    if degree == 1:
        V = np.column_stack([l0, l1, l2])
        G = np.broadcast_to(dl, (pts.shape[0], 3, 2)).copy()
        return V, G
    if degree == 2:
        L = [l0, l1, l2]
        V = np.column_stack([l0 * (2 * l0 - 1), l1 * (2 * l1 - 1), l2 * (2 * l2 - 1),
                             4 * l1 * l2, 4 * l0 * l2, 4 * l0 * l1])
        G = np.empty((pts.shape[0], 6, 2))
        for i in range(3):
            G[:, i] = (4 * L[i] - 1)[:, None] * dl[i]
        for k, (i, j) in enumerate(((1, 2), (0, 2), (0, 1))):
            G[:, 3 + k] = 4 * (L[j][:, None] * dl[i] + L[i][:, None] * dl[j])
        return V, G
    raise FormError(f"unsupported degree {degree}")


def seg_basis(degree: int, s: np.ndarray):
    """1D values/derivatives on [0,1]; P2 node order is (left, mid, right)."""
    if degree == 1:
        return np.column_stack([1 - s, s]), np.column_stack([-np.ones_like(s), np.ones_like(s)])
    if degree == 2:
        V = np.column_stack([(1 - s) * (1 - 2 * s), 4 * s * (1 - s), s * (2 * s - 1)])
        D = np.column_stack([4 * s - 3, 4 - 8 * s, 4 * s - 1])
        return V, D
    raise FormError(f"unsupported degree {degree}")


# ------------------------------------------------------------------ spaces

@dataclass(frozen=True)
class Space:
    """Continuous Lagrange space on a set of glued-mesh triangles.

    ``cells`` maps each carrier triangle's local nodes to space nodes;
    ``corners`` are the geometric vertices of those triangles.
    """

    kind: str
    carrier: tuple
    degree: int
    ncomp: int
    coords: np.ndarray
    cells: np.ndarray
    corners: np.ndarray
    mesh: GluedMesh = field(repr=False, compare=False)
    row0: int = 0

    @property
    def n_nodes(self) -> int:
        return self.coords.shape[0]

    @property
    def n_dofs(self) -> int:
        return self.ncomp * self.n_nodes

    @property
    def nloc(self) -> int:
        return self.cells.shape[1]

    def dof(self, node, comp=0):
        return comp * self.n_nodes + np.asarray(node)

    @cached_property
    def cell_dofs(self) -> np.ndarray:
        return np.concatenate([self.cells + c * self.n_nodes for c in range(self.ncomp)], axis=1)

    @property
    def _ncol_nodes(self) -> int:
        return self.degree * self.mesh.nx + 1

    def vertex_node(self, vid):
        """Space node of a glued-mesh vertex (must lie in the carrier rows)."""
        vid = np.asarray(vid)
        row, col = np.divmod(vid, self.mesh.ncol)
        return (self.degree * (row - self.row0)) * self._ncol_nodes + self.degree * col

    def edge_nodes(self, edges: np.ndarray) -> np.ndarray:
        """(E, degree+1) nodes along each mesh edge: start, [mid], end."""
        a, b = self.vertex_node(edges[:, 0]), self.vertex_node(edges[:, 1])
        if self.degree == 1:
            return np.column_stack([a, b])
        ra, ca = np.divmod(a, self._ncol_nodes)
        rb, cb = np.divmod(b, self._ncol_nodes)
        mid = ((ra + rb) // 2) * self._ncol_nodes + (ca + cb) // 2
        return np.column_stack([a, mid, b])

    def row_nodes(self, mesh_row: int) -> np.ndarray:
        """Nodes lying on a horizontal grid line, ordered by x."""
        r = self.degree * (mesh_row - self.row0)
        return r * self._ncol_nodes + np.arange(self._ncol_nodes)

    def nodes_on(self, tags) -> np.ndarray:
        from .mesh import facet_vertices
        if isinstance(tags, str):
            tags = (tags,)
        present = [t for t in tags if t in set(self.mesh.facet_tag.tolist())]
        if not present:
            return np.zeros(0, dtype=np.int64)
        edges = np.concatenate([self.mesh.facets_of(t) for t in present])
        return np.unique(self.edge_nodes(edges).ravel())


def lagrange_space(mesh: GluedMesh, carrier, degree: int = 1, ncomp: int = 1) -> Space:
    """P1/P2 space on the union of contiguous subdomains ``carrier`` (e.g. ('P','B'))."""
    carrier = tuple(carrier)
    rows = [mesh.row_ranges[c] for c in carrier]
    r0, r1 = min(r[0] for r in rows), max(r[1] for r in rows)
    if sum(r[1] - r[0] for r in rows) != r1 - r0:
        raise FormError(f"carrier {carrier} is not contiguous")
    mask = np.isin(mesh.tri_tag, carrier)
    tri = mesh.triangles[mask]
    corners = mesh.vertices[tri]
    ncol = mesh.ncol
    if degree == 1:
        xs = mesh.xs
        ys = mesh.ys[r0:r1 + 1]
        cells = tri - r0 * ncol
    elif degree == 2:
        xs = np.empty(2 * mesh.nx + 1)
        xs[0::2] = mesh.xs
        xs[1::2] = 0.5 * (mesh.xs[:-1] + mesh.xs[1:])
        yv = mesh.ys[r0:r1 + 1]
        ys = np.empty(2 * (r1 - r0) + 1)
        ys[0::2] = yv
        ys[1::2] = 0.5 * (yv[:-1] + yv[1:])
        nc2 = 2 * mesh.nx + 1
        row, col = np.divmod(tri, ncol)
        R, C = 2 * (row - r0), 2 * col
        v = R * nc2 + C
        mid = lambda i, j: ((R[:, i] + R[:, j]) // 2) * nc2 + (C[:, i] + C[:, j]) // 2
        cells = np.column_stack([v, mid(1, 2), mid(0, 2), mid(0, 1)])
    else:
        raise FormError(f"unsupported degree {degree}")
    X, Y = np.meshgrid(xs, ys)
    coords = np.column_stack([X.ravel(), Y.ravel()])
    kind = f"P{degree}_{'vector' if ncomp == 2 else 'scalar'}"
    return Space(kind, carrier, degree, ncomp, coords, cells.astype(np.int64), corners, mesh, r0)


# ------------------------------------------------------ element geometry

class ElementSet:
    """Affine geometry and basis tables for a batch of triangles."""

    def __init__(self, corners: np.ndarray, rule: QuadratureRule = TRIANGLE_DEG4):
        corners = np.asarray(corners, dtype=float)
        if corners.ndim == 2:
            corners = corners[None]
        self.corners = corners
        self.rule = rule
        x0 = corners[:, 0]
        J = np.stack([corners[:, 1] - x0, corners[:, 2] - x0], axis=2)  # (ne,2,2)
        self.det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
        self.invJT = np.linalg.inv(J).transpose(0, 2, 1)
        self.X = x0[:, None, :] + np.einsum("eij,qj->eqi", J, rule.points)
        self.wdet = np.abs(self.det)[:, None] * rule.weights[None, :]
        self._tables = {}

    def basis(self, degree: int):
        if degree not in self._tables:
            V, Gr = tri_basis(degree, self.rule.points)
            G = np.einsum("eij,qaj->eqai", self.invJT, Gr)
            self._tables[degree] = (V, G)
        return self._tables[degree]


def _vec_blocks(blocks) -> np.ndarray:
    """Assemble a (ne, 2n, 2m) array from a 2x2 nested list of (ne, n, m) blocks."""
    return np.concatenate([np.concatenate(row, axis=2) for row in blocks], axis=1)


def _coef_at(coef, es: ElementSet):
    if coef is None:
        return 1.0
    if callable(coef):
        return coef(es.X[..., 0], es.X[..., 1])
    return coef


def mass_local(es: ElementSet, deg_test: int, deg_trial: int | None = None, coef=None):
    deg_trial = deg_test if deg_trial is None else deg_trial
    Vt, _ = es.basis(deg_test)
    Vs, _ = es.basis(deg_trial)
    w = es.wdet * _coef_at(coef, es)
    return np.einsum("eq,qa,qb->eab", w, Vt, Vs)


def tensor_mass_local(es: ElementSet, degree: int, K: np.ndarray):
    """Vector mass with a constant 2x2 tensor coefficient, (K u, v)."""
    M = mass_local(es, degree)
    return _vec_blocks([[K[0, 0] * M, K[0, 1] * M], [K[1, 0] * M, K[1, 1] * M]])


def stiffness_local(es: ElementSet, degree: int, coef=None):
    _, G = es.basis(degree)
    w = es.wdet * _coef_at(coef, es)
    return np.einsum("eq,eqai,eqbi->eab", w, G, G)


def dx_stiffness_local(es: ElementSet, degree: int, coef=None):
    """(c d/dx u, d/dx v)."""
    _, G = es.basis(degree)
    w = es.wdet * _coef_at(coef, es)
    return np.einsum("eq,eqa,eqb->eab", w, G[..., 0], G[..., 0])


def _grad_pair(es: ElementSet, degree: int, i: int, j: int):
    _, G = es.basis(degree)
    return np.einsum("eq,eqa,eqb->eab", es.wdet, G[..., i], G[..., j])


def sym_grad_local(es: ElementSet, degree: int):
    """(D(u), D(v)) for vector fields."""
    S = stiffness_local(es, degree)
    P = [[_grad_pair(es, degree, i, j) for j in range(2)] for i in range(2)]
    # block (i,j): 0.5*delta_ij*S + 0.5*int d_j phi_a d_i phi_b
    return _vec_blocks([[0.5 * S + 0.5 * P[0][0], 0.5 * P[1][0]],
                        [0.5 * P[0][1], 0.5 * S + 0.5 * P[1][1]]])


def div_div_local(es: ElementSet, degree: int):
    P = [[_grad_pair(es, degree, i, j) for j in range(2)] for i in range(2)]
    return _vec_blocks([[P[0][0], P[0][1]], [P[1][0], P[1][1]]])


def grad_coupling_local(es: ElementSet, deg_vec: int, deg_scalar: int):
    """(grad p, U): rows vector test U, columns scalar trial p."""
    Vt, _ = es.basis(deg_vec)
    _, Gs = es.basis(deg_scalar)
    blocks = [np.einsum("eq,qa,eqb->eab", es.wdet, Vt, Gs[..., i]) for i in range(2)]
    return np.concatenate(blocks, axis=1)


def div_coupling_local(es: ElementSet, deg_scalar: int, deg_vec: int):
    """(div u, r): rows scalar test r, columns vector trial u."""
    Vt, _ = es.basis(deg_scalar)
    _, Gv = es.basis(deg_vec)
    blocks = [np.einsum("eq,qa,eqb->eab", es.wdet, Vt, Gv[..., i]) for i in range(2)]
    return np.concatenate(blocks, axis=2)


def normal_derivative_local(es: ElementSet, degree: int):
    """(d/dy q, U): rows test U, columns trial q."""
    V, G = es.basis(degree)
    return np.einsum("eq,qa,eqb->eab", es.wdet, V, G[..., 1])


def rigid_motions(corners: np.ndarray, degree: int = 1) -> np.ndarray:
    """Nodal vectors (3, 2*nl) of x-, y-translation and rotation on one triangle."""
    c = np.asarray(corners, float)
    if degree == 2:
        c = np.vstack([c, 0.5 * (c[1] + c[2]), 0.5 * (c[0] + c[2]), 0.5 * (c[0] + c[1])])
    n = c.shape[0]
    tx = np.concatenate([np.ones(n), np.zeros(n)])
    ty = np.concatenate([np.zeros(n), np.ones(n)])
    rot = np.concatenate([-c[:, 1], c[:, 0]])
    return np.vstack([tx, ty, rot])


_FORMS = {
    "mass": lambda es, deg=1, coef=None, **_: mass_local(es, deg, coef=coef),
    "stiffness": lambda es, deg=1, coef=None, **_: stiffness_local(es, deg, coef),
    "div_div": lambda es, deg=1, **_: div_div_local(es, deg),
    "sym_grad_sym_grad": lambda es, deg=1, **_: sym_grad_local(es, deg),
    "grad_pressure_coupling": lambda es, deg=1, deg_scalar=1, **_: grad_coupling_local(es, deg, deg_scalar),
    "darcy_mass": lambda es, deg=1, kappa_inv=None, **_: tensor_mass_local(
        es, deg, np.eye(2) if kappa_inv is None else np.asarray(kappa_inv)),
    "normal_derivative": lambda es, deg=1, **_: normal_derivative_local(es, deg),
    "pressure_div": lambda es, deg=2, deg_scalar=1, **_: grad_coupling_local_div(es, deg, deg_scalar),
}


def grad_coupling_local_div(es: ElementSet, deg_vec: int, deg_scalar: int):
    """(pi, div U): rows vector test U, columns scalar trial pi."""
    _, Gv = es.basis(deg_vec)
    Vs, _ = es.basis(deg_scalar)
    blocks = [np.einsum("eq,eqa,qb->eab", es.wdet, Gv[..., i], Vs) for i in range(2)]
    return np.concatenate(blocks, axis=1)


_SEGMENT_FORMS = ("plate_bending", "tangential_slip", "penalty_facet", "segment_mass")


def local_matrix(form: str, element, **params) -> np.ndarray:
    """Dense local matrix of ``form`` on one element.

    ``element`` is a (3, 2) array of triangle corners, or for the segment
    forms ('plate_bending', 'tangential_slip', 'penalty_facet', 'segment_mass')
    a pair of x-coordinates. Keyword ``deg`` selects the polynomial degree.
    """
    if form in _SEGMENT_FORMS:
        x0, x1 = np.asarray(element, float).ravel()[:2]
        xs = np.array([x0, x1])
        deg = params.get("deg", 1)
        if form == "plate_bending":
            if deg != 1:
                raise FormError("plate_bending is defined on P1 interface spaces")
            return seg_stiffness_local(xs)[0] * params.get("coef", 1.0)
        return seg_mass_local(xs, deg, deg)[0] * params.get("coef", 1.0)
    if form not in _FORMS:
        raise FormError(f"unknown form {form!r}")
    corners = np.asarray(element, float)
    if corners.shape != (3, 2):
        raise FormError(f"form {form!r} needs a triangle, got shape {corners.shape}")
    return _FORMS[form](ElementSet(corners), **params)[0]


# ------------------------------------------------------------- segments

def seg_mass_local(xs: np.ndarray, deg_test: int, deg_trial: int, npts: int = 3, coef=None):
    """Local 1D mass matrices on the partition ``xs`` (shape (nseg, nt, ns))."""
    rule = segment_rule(npts)
    s = rule.points[:, 0]
    Vt, _ = seg_basis(deg_test, s)
    Vs, _ = seg_basis(deg_trial, s)
    h = np.diff(xs)
    w = h[:, None] * rule.weights[None, :]
    if coef is not None:
        X = xs[:-1, None] + h[:, None] * s[None, :]
        w = w * coef(X)
    return np.einsum("eq,qa,qb->eab", w, Vt, Vs)


def seg_stiffness_local(xs: np.ndarray):
    h = np.diff(xs)
    k = np.array([[1.0, -1.0], [-1.0, 1.0]])
    return k[None] / h[:, None, None]


def seg_cells(nx: int, degree: int) -> np.ndarray:
    i = np.arange(nx)
    if degree == 1:
        return np.column_stack([i, i + 1])
    return np.column_stack([2 * i, 2 * i + 1, 2 * i + 2])


def seg_load(xs: np.ndarray, degree: int, f, npts: int = 3) -> np.ndarray:
    """Nodal load (f, phi) on the 1D partition for a callable f(x)."""
    rule = segment_rule(npts)
    s = rule.points[:, 0]
    V, _ = seg_basis(degree, s)
    h = np.diff(xs)
    X = xs[:-1, None] + h[:, None] * s[None, :]
    w = h[:, None] * rule.weights[None, :] * f(X)
    loc = np.einsum("eq,qa->ea", w, V)
    out = np.zeros(degree * (xs.size - 1) + 1)
    np.add.at(out, seg_cells(xs.size - 1, degree), loc)
    return out


def edge_load(p0: np.ndarray, p1: np.ndarray, degree: int, g, npts: int = 3):
    """Local loads (E, degree+1) of ``g(x, y)`` over straight edges p0 -> p1."""
    rule = segment_rule(npts)
    s = rule.points[:, 0]
    V, _ = seg_basis(degree, s)
    L = np.linalg.norm(p1 - p0, axis=1)
    X = p0[:, None, :] + s[None, :, None] * (p1 - p0)[:, None, :]
    w = L[:, None] * rule.weights[None, :] * g(X[..., 0], X[..., 1])
    return np.einsum("eq,qa->ea", w, V)


# ------------------------------------------------------ functions on spaces

def interpolate(expr, space: Space, t: float = 0.0) -> np.ndarray:
    """Nodal interpolant; vector ``expr`` returns a pair ``(fx, fy)``."""
    x, y = space.coords[:, 0], space.coords[:, 1]
    val = expr(x, y, t)
    if space.ncomp == 1:
        return np.broadcast_to(np.asarray(val, float), x.shape).astype(float).copy()
    fx, fy = val
    return np.concatenate([np.broadcast_to(np.asarray(fx, float), x.shape),
                           np.broadcast_to(np.asarray(fy, float), x.shape)]).astype(float)


def evaluate_at_quadrature(space: Space, nodal: np.ndarray, es: ElementSet) -> np.ndarray:
    """Values (ncomp, ne, nq) of a discrete field at the quadrature points of ``es``."""
    V, _ = es.basis(space.degree)
    out = []
    for c in range(space.ncomp):
        coef = nodal[c * space.n_nodes:(c + 1) * space.n_nodes][space.cells]
        out.append(np.einsum("qa,ea->eq", V, coef))
    return np.array(out)


def load_vector(space: Space, f, t: float, es: ElementSet | None = None) -> np.ndarray:
    """(f, phi) for every basis function; vector ``f`` returns ``(fx, fy)``."""
    es = es or ElementSet(space.corners)
    V, _ = es.basis(space.degree)
    val = f(es.X[..., 0], es.X[..., 1], t)
    comps = [val] if space.ncomp == 1 else list(val)
    out = np.zeros(space.n_dofs)
    for c, fc in enumerate(comps):
        fc = np.broadcast_to(np.asarray(fc, float), es.wdet.shape)
        loc = np.einsum("eq,qa->ea", es.wdet * fc, V)
        np.add.at(out, space.cells + c * space.n_nodes, loc)
    return out


def l2_norms(space: Space, nodal: np.ndarray, exact, t: float, degree: int | None = None):
    """(||exact - u_h||, ||exact||) over the carrier."""
    degree = degree if degree is not None else space.degree + 4
    es = ElementSet(space.corners, triangle_rule(degree))
    uh = evaluate_at_quadrature(space, nodal, es)
    val = exact(es.X[..., 0], es.X[..., 1], t)
    ex = np.array([val] if space.ncomp == 1 else list(val), dtype=float)
    ex = np.broadcast_to(ex, uh.shape)
    err = np.sqrt(np.sum(es.wdet * np.sum((uh - ex) ** 2, axis=0)))
    nrm = np.sqrt(np.sum(es.wdet * np.sum(ex ** 2, axis=0)))
    return float(err), float(nrm)


def l2_error(space: Space, nodal: np.ndarray, exact, t: float, degree: int | None = None) -> float:
    """Relative L2 error ||exact - u_h|| / ||exact||."""
    err, nrm = l2_norms(space, nodal, exact, t, degree)
    if nrm == 0.0:
        raise ZeroDivisionError("exact field has zero L2 norm on the carrier")
    return err / nrm


def seg_l2_error(xs: np.ndarray, nodal: np.ndarray, exact, degree: int = 1, npts: int = 6) -> float:
    """Relative L2 error of a P1/P2 interface field against ``exact(x)``."""
    rule = segment_rule(npts)
    s = rule.points[:, 0]
    V, _ = seg_basis(degree, s)
    h = np.diff(xs)
    X = xs[:-1, None] + h[:, None] * s[None, :]
    uh = np.einsum("qa,ea->eq", V, nodal[seg_cells(xs.size - 1, degree)])
    ex = exact(X)
    w = h[:, None] * rule.weights[None, :]
    nrm = np.sqrt(np.sum(w * ex ** 2))
    if nrm == 0.0:
        raise ZeroDivisionError("exact field has zero L2 norm on the interface")
    return float(np.sqrt(np.sum(w * (uh - ex) ** 2)) / nrm)
