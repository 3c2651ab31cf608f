"""Plate operators: extension from Gamma+, through-thickness averages, interface transfer.

Plate nodal fields are stored row-major from Gamma- (row 0) up to Gamma+
(last row); interface fields are indexed by grid column, i.e. sorted by x.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .mesh import GluedMesh, MeshError


@dataclass(frozen=True)
class ColumnQuadrature:
    """Exact integration weights for piecewise-linear fields along one column.

    ``plain @ q_col`` equals (1/H) * integral of q over [-H, 0] and
    ``weighted @ q_col`` equals (1/H) * integral of (z + H/2) q.
    The same weights serve every column of a structured plate mesh.
    """

    z: np.ndarray
    plain: np.ndarray
    weighted: np.ndarray
    H: float

    @classmethod
    def from_mesh(cls, mesh: GluedMesh) -> "ColumnQuadrature":
        r0, r1 = mesh.row_ranges["P"]
        z = mesh.ys[r0:r1 + 1]
        H = mesh.H
        _check_columns(mesh)
        h = np.diff(z)
        plain = np.zeros(z.size)
        plain[:-1] += 0.5 * h
        plain[1:] += 0.5 * h
        wz = z + 0.5 * H
        weighted = np.zeros(z.size)
        # int over [z0,z1] of linear weight times linear hat, closed form
        weighted[:-1] += h / 6.0 * (2 * wz[:-1] + wz[1:])
        weighted[1:] += h / 6.0 * (wz[:-1] + 2 * wz[1:])
        return cls(z, plain / H, weighted / H, H)


def _check_columns(mesh: GluedMesh) -> None:
    xs = mesh.vertices[:, 0]
    for k, col in enumerate(mesh.columns):
        if not np.all(xs[list(col)] == mesh.xs[k]):
            raise MeshError(f"plate column {k} is not vertically aligned")


def n_plate_rows(mesh: GluedMesh) -> int:
    r0, r1 = mesh.row_ranges["P"]
    return r1 - r0 + 1


def extend(trace: np.ndarray, mesh: GluedMesh) -> np.ndarray:
    """Constant-in-z lift of a Gamma+ field to every plate node."""
    trace = np.asarray(trace, float)
    if trace.shape != (mesh.ncol,):
        raise MeshError(f"trace has {trace.shape} values, expected {mesh.ncol}")
    return np.tile(trace, n_plate_rows(mesh))


def column_average(q: np.ndarray, mesh: GluedMesh, weighted: bool = False,
                   cq: ColumnQuadrature | None = None) -> np.ndarray:
    """(1/H) int q dz, or (1/H) int (z + H/2) q dz, per column."""
    cq = cq or ColumnQuadrature.from_mesh(mesh)
    Q = np.asarray(q, float).reshape(n_plate_rows(mesh), mesh.ncol)
    c = cq.weighted if weighted else cq.plain
    return c @ Q


def average_matrix(mesh: GluedMesh, weighted: bool = False,
                   cq: ColumnQuadrature | None = None) -> sp.csr_matrix:
    """Sparse (ncol x n_plate_nodes) form of :func:`column_average`."""
    cq = cq or ColumnQuadrature.from_mesh(mesh)
    c = cq.weighted if weighted else cq.plain
    return sp.kron(sp.csr_matrix(c[None, :]), sp.identity(mesh.ncol), format="csr")


def _perm(mesh: GluedMesh) -> np.ndarray:
    im = mesh.interface_map()
    ncol = mesh.ncol
    plus_cols = im.plus_vertex_order % ncol
    minus_cols = np.array([im.plus_to_minus[v] for v in im.plus_vertex_order.tolist()]) % ncol
    perm = np.empty(ncol, dtype=np.int64)
    perm[plus_cols] = minus_cols
    return perm


def transfer_minus_to_plus(values: np.ndarray, mesh: GluedMesh) -> np.ndarray:
    """Gamma- column values to the Gamma+ node vertically above each."""
    values = np.asarray(values)
    if values.shape[0] != mesh.ncol:
        raise MeshError("interface field length does not match the column count")
    return values[_perm(mesh)]


def transfer_plus_to_minus(values: np.ndarray, mesh: GluedMesh) -> np.ndarray:
    values = np.asarray(values)
    if values.shape[0] != mesh.ncol:
        raise MeshError("interface field length does not match the column count")
    out = np.empty_like(values)
    out[_perm(mesh)] = values
    return out
