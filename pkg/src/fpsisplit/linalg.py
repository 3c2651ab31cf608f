"""Deterministic sparse assembly, essential constraints and direct solves."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.io
import scipy.sparse as sp
import scipy.sparse.linalg as spla

log = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-10


class SolverError(RuntimeError):
    """Factorization or solve failure for a named system."""

    def __init__(self, system: str, detail: str):
        super().__init__(f"{system}: {detail}")
        self.system = system


def assemble(rows, cols, vals, shape) -> sp.csr_matrix:
    """Sum duplicate (row, col) entries into a CSR matrix.

    Entries are sorted by (row, col, value) before summation so the stored
    values do not depend on the order contributions arrive in.
    """
    rows = np.asarray(rows, dtype=np.int64).ravel()
    cols = np.asarray(cols, dtype=np.int64).ravel()
    vals = np.asarray(vals, dtype=float).ravel()
    n, m = shape
    if rows.size and (rows.min() < 0 or rows.max() >= n or cols.min() < 0 or cols.max() >= m):
        raise IndexError(f"assembly index out of range for shape {shape}")
    if rows.size == 0:
        return sp.csr_matrix(shape)
    order = np.lexsort((vals, cols, rows))
    r, c, v = rows[order], cols[order], vals[order]
    key = r * m + c
    start = np.flatnonzero(np.r_[True, key[1:] != key[:-1]])
    summed = np.add.reduceat(v, start)
    A = sp.csr_matrix((summed, (r[start], c[start])), shape=shape)
    A.sort_indices()
    return A


def assemble_local(local: np.ndarray, test_dofs: np.ndarray, trial_dofs: np.ndarray,
                   shape) -> sp.csr_matrix:
    """Scatter a batch of local matrices (ne, nt, ns) into a global matrix."""
    ne, nt, ns = local.shape
    R = np.broadcast_to(test_dofs[:, :, None], (ne, nt, ns))
    C = np.broadcast_to(trial_dofs[:, None, :], (ne, nt, ns))
    return assemble(R, C, local, shape)


@dataclass
class SparseSystem:
    """Square system with essential constraints ``x[dofs] = values``."""

    matrix: sp.csr_matrix
    rhs: np.ndarray
    constrained: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    values: np.ndarray = field(default_factory=lambda: np.zeros(0))
    name: str = "system"

    def __post_init__(self):
        n, m = self.matrix.shape
        if n != m or self.rhs.shape != (n,):
            raise ValueError(f"{self.name}: inconsistent dimensions {self.matrix.shape} / {self.rhs.shape}")


def constrain_matrix(A: sp.spmatrix, dofs: np.ndarray) -> sp.csr_matrix:
    """Zero constrained rows and columns and put 1 on their diagonal."""
    n = A.shape[0]
    keep = np.ones(n)
    keep[dofs] = 0.0
    D = sp.diags(keep)
    E = sp.diags(1.0 - keep)
    out = (D @ A @ D + E).tocsr()
    out.eliminate_zeros()
    out.sort_indices()
    return out


def constrain_rhs(A: sp.spmatrix, b: np.ndarray, dofs: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Right-hand side matching :func:`constrain_matrix` (A is the unconstrained matrix)."""
    g = np.zeros(A.shape[0])
    g[dofs] = values
    out = b - A @ g
    out[dofs] = values
    return out


class Factorized:
    """LU factorization of a constrained matrix, reusable across time steps."""

    def __init__(self, A: sp.spmatrix, name: str = "system"):
        self.A = A.tocsc()
        self.name = name
        try:
            self.lu = spla.splu(self.A, permc_spec="COLAMD")
        except RuntimeError as exc:  # scipy raises RuntimeError on exact singularity
            raise SolverError(name, f"factorization failed ({exc}); n={A.shape[0]}") from exc

    def solve(self, b: np.ndarray) -> np.ndarray:
        x = self.lu.solve(b)
        if not np.all(np.isfinite(x)):
            raise SolverError(self.name, "non-finite solution (singular or ill-posed system)")
        nb = np.linalg.norm(b)
        if nb == 0.0:
            return x
        res = np.linalg.norm(self.A @ x - b) / nb
        for _ in range(3):
            if res <= RESIDUAL_TOL:
                break
            x = x + self.lu.solve(b - self.A @ x)
            res = np.linalg.norm(self.A @ x - b) / nb
        if res > RESIDUAL_TOL:
            log.warning("%s: relative residual %.3e above %.0e", self.name, res, RESIDUAL_TOL)
        return x


def solve(system: SparseSystem) -> np.ndarray:
    """Apply constraints symmetrically and solve by sparse LU."""
    A = constrain_matrix(system.matrix, system.constrained)
    b = constrain_rhs(system.matrix, system.rhs, system.constrained, system.values)
    return Factorized(A, system.name).solve(b)


def dump_matrix_market(path, A: sp.spmatrix, comment: str = "") -> None:
    scipy.io.mmwrite(str(path), sp.coo_matrix(A), comment=comment)
