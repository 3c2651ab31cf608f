"""Structured triangulation of the glued three-layer domain.

The glued domain is one rectangle ``[0, L] x [-H-R_f, R_b]`` whose horizontal
grid lines are the union of the three subdomain grids, so every plate vertex
sits on a vertical grid line shared with both interfaces. Each grid cell is
split along its lower-left to upper-right diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import RunConfig

SUBDOMAINS = ("F", "P", "B")

GENERIC_TAGS = ("GammaPlus", "GammaMinus", "GammaB_top", "GammaB_side",
                "GammaF_bottom", "GammaF_side", "GammaP_side")
VESSEL_TAGS = ("GammaPlus", "GammaMinus", "GammaDr", "GammaIm", "GammaIn",
               "GammaOut", "GammaSym", "GammaP_side")


class MeshError(ValueError):
    pass


@dataclass(frozen=True)
class InterfaceMap:
    plus_vertex_order: np.ndarray
    minus_vertex_order: np.ndarray
    plus_to_minus: dict

    def minus_of(self, plus_vertex: int) -> int:
        return self.plus_to_minus[plus_vertex]


@dataclass(frozen=True)
class GluedMesh:
    vertices: np.ndarray          # (N, 2)
    triangles: np.ndarray         # (T, 3), counter-clockwise
    tri_tag: np.ndarray           # (T,) of 'F' | 'P' | 'B'
    facets: np.ndarray            # (E, 2) vertex pairs on boundaries/interfaces
    facet_tag: np.ndarray         # (E,) tag strings
    columns: tuple                # per x-grid line, plate vertex ids bottom->top
    xs: np.ndarray                # x grid (nx+1,)
    ys: np.ndarray                # y grid over the whole glued domain
    row_ranges: dict              # subdomain -> (first_row, last_row) inclusive
    H: float

    @property
    def nx(self) -> int:
        return self.xs.size - 1

    @property
    def ncol(self) -> int:
        return self.xs.size

    def vid(self, row, col):
        return np.asarray(row) * self.ncol + np.asarray(col)

    def row_of(self, name: str) -> int:
        """Grid row of an interface: 'GammaMinus' or 'GammaPlus'."""
        if name == "GammaMinus":
            return self.row_ranges["P"][0]
        if name == "GammaPlus":
            return self.row_ranges["P"][1]
        raise KeyError(name)

    def triangles_of(self, tag: str) -> np.ndarray:
        return self.triangles[self.tri_tag == tag]

    def facets_of(self, tag: str) -> np.ndarray:
        if tag not in set(self.facet_tag.tolist()):
            raise KeyError(f"unknown facet tag {tag!r}")
        return self.facets[self.facet_tag == tag]

    @property
    def tags(self) -> tuple:
        return tuple(dict.fromkeys(self.facet_tag.tolist()))

    def interface_map(self) -> InterfaceMap:
        plus = self.vid(self.row_of("GammaPlus"), np.arange(self.ncol))
        minus = self.vid(self.row_of("GammaMinus"), np.arange(self.ncol))
        xp, xm = self.vertices[plus, 0], self.vertices[minus, 0]
        plus, minus = plus[np.argsort(xp, kind="stable")], minus[np.argsort(xm, kind="stable")]
        if not np.array_equal(self.vertices[plus, 0], self.vertices[minus, 0]):
            raise MeshError("interface vertices are not vertically aligned")
        return InterfaceMap(plus, minus, dict(zip(plus.tolist(), minus.tolist())))

    def shape_regularity(self, tags=("B", "F")) -> float:
        """max over triangles of diameter / inscribed-circle diameter."""
        tri = np.concatenate([self.triangles_of(t) for t in tags])
        P = self.vertices[tri]
        e = np.linalg.norm(P[:, [1, 2, 0]] - P[:, [2, 0, 1]], axis=2)
        d1 = P[:, 1] - P[:, 0]
        d2 = P[:, 2] - P[:, 0]
        area = 0.5 * np.abs(d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
        rho = 4.0 * area / e.sum(axis=1)
        return float((e.max(axis=1) / rho).max())


def _nx_from(cfg: RunConfig) -> int:
    m = cfg.mesh
    given = {name: v for name, v in (("thick", m.nx_thick), ("plate", m.nx_plate),
                                      ("fluid", m.nx_fluid)) if v is not None}
    if any(v != m.nx for v in given.values()):
        raise MeshError(f"x-resolutions differ across subdomains ({given}, nx={m.nx}); "
                        "column alignment is impossible")
    return m.nx


def build_glued_mesh(cfg: RunConfig, H: float) -> GluedMesh:
    """Conforming mesh of fluid, plate and thick layer for plate thickness ``H``."""
    m, g = cfg.mesh, cfg.geometry
    nx = _nx_from(cfg)
    for name in ("nx", "ny_thick", "ny_plate", "ny_fluid"):
        if getattr(m, name) < 1:
            raise MeshError(f"{name} must be >= 1")
    if H <= 0:
        raise MeshError("plate thickness must be positive")

    xs = np.linspace(0.0, g.length, nx + 1)
    yf = np.linspace(-H - g.R_f, -H, m.ny_fluid + 1)
    yp = np.linspace(-H, 0.0, m.ny_plate + 1)
    yb = np.linspace(0.0, g.R_b, m.ny_thick + 1)
    yp[0], yp[-1], yb[0] = -H, 0.0, 0.0
    ys = np.concatenate([yf, yp[1:], yb[1:]])
    rf = (0, m.ny_fluid)
    rp = (m.ny_fluid, m.ny_fluid + m.ny_plate)
    rb = (rp[1], rp[1] + m.ny_thick)
    ncol = nx + 1

    X, Y = np.meshgrid(xs, ys)
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    tris, tags = [], []
    for name, (r0, r1) in (("F", rf), ("P", rp), ("B", rb)):
        J, I = np.meshgrid(np.arange(r0, r1), np.arange(nx), indexing="ij")
        a = (J * ncol + I).ravel()
        b, c, d = a + 1, a + ncol + 1, a + ncol
        t = np.empty((2 * a.size, 3), dtype=np.int64)
        t[0::2] = np.column_stack([a, b, c])
        t[1::2] = np.column_stack([a, c, d])
        tris.append(t)
        tags.append(np.full(t.shape[0], name))
    triangles = np.concatenate(tris)
    tri_tag = np.concatenate(tags)

    vessel = cfg.bc == "vessel"
    facets, ftags = [], []

    def horiz(row, tag):
        v = row * ncol + np.arange(ncol)
        facets.append(np.column_stack([v[:-1], v[1:]]))
        ftags.extend([tag] * nx)

    def vert(r0, r1, col, tag):
        v = np.arange(r0, r1 + 1) * ncol + col
        facets.append(np.column_stack([v[:-1], v[1:]]))
        ftags.extend([tag] * (r1 - r0))

    horiz(rp[1], "GammaPlus")
    horiz(rp[0], "GammaMinus")
    horiz(rb[1], "GammaDr" if vessel else "GammaB_top")
    horiz(rf[0], "GammaSym" if vessel else "GammaF_bottom")
    for col in (0, nx):
        vert(*rb, col, "GammaIm" if vessel else "GammaB_side")
        vert(*rp, col, "GammaP_side")
        if vessel:
            vert(*rf, col, "GammaIn" if col == 0 else "GammaOut")
        else:
            vert(*rf, col, "GammaF_side")

    columns = tuple(tuple((np.arange(rp[0], rp[1] + 1) * ncol + i).tolist())
                    for i in range(ncol))
    return GluedMesh(vertices=vertices, triangles=triangles, tri_tag=tri_tag,
                     facets=np.concatenate(facets), facet_tag=np.array(ftags),
                     columns=columns, xs=xs, ys=ys,
                     row_ranges={"F": rf, "P": rp, "B": rb}, H=float(H))


def facet_measure(mesh: GluedMesh, tag: str) -> float:
    e = mesh.facets_of(tag)
    return float(np.linalg.norm(mesh.vertices[e[:, 1]] - mesh.vertices[e[:, 0]], axis=1).sum())


def facet_vertices(mesh: GluedMesh, tags) -> np.ndarray:
    """Sorted unique vertex ids touched by facets carrying any of ``tags``."""
    if isinstance(tags, str):
        tags = (tags,)
    present = [t for t in tags if t in set(mesh.facet_tag.tolist())]
    if not present:
        return np.zeros(0, dtype=np.int64)
    return np.unique(np.concatenate([mesh.facets_of(t).ravel() for t in present]))
