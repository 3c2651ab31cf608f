"""Time-step restrictions of the splitting scheme and estimates of their constants.

The two bounds take user-supplied inequality constants. Terms whose
denominator vanishes (e.g. no pressure-structure coupling) are treated as
unrestricted.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .model import PhysicalParams, check_parameter_conditions

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class StabilityConstants:
    """Poincare, trace, inverse and trace-inverse constants plus mesh scales."""

    C_P: float = 1.0
    C_TR: float = 1.0
    C_INV: float = 1.0
    B_INV: float = 1.0
    C_TI: float = 1.0
    A_TI: float = 1.0
    h: float = 1.0
    H: float = 1.0

    def __post_init__(self):
        for name, val in vars(self).items():
            if not (np.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be positive (got {val})")


def _ratio(num: float, den: float) -> float:
    return np.inf if den == 0 else num / den


def _M(params: PhysicalParams, c: StabilityConstants) -> float:
    return min(params.rho_b / c.C_TI ** 2, params.rho_f / c.A_TI ** 2)


def thm54_terms(params: PhysicalParams, c: StabilityConstants) -> tuple:
    kmin, hH = params.k_min, c.h / c.H
    M = _M(params, c)
    return (
        _ratio(params.rho_b * kmin * c.h ** 2, 24 * params.alpha ** 2 * c.C_INV ** 2 * c.C_P ** 2),
        _ratio(128 * params.rho_p * params.kappa_p * hH ** 4, 3 * params.alpha_p ** 2 * c.B_INV ** 4),
        M * kmin * c.h / (16 * c.C_TR ** 2),
        M * params.kappa_p / 6 * hH,
    )


def dt_bound_thm54(params: PhysicalParams, consts: StabilityConstants) -> float:
    """Largest admissible time step for energy decay without parameter conditions."""
    return float(min(thm54_terms(params, consts)))


def dt_bound_thm55(params: PhysicalParams, consts: StabilityConstants) -> float:
    """Time-step bound valid when :func:`thm55_applicable` holds."""
    M = _M(params, consts)
    return float(M / 4 * min(params.k_min * consts.h / consts.C_TR ** 2,
                             params.kappa_p * consts.h / consts.H))


def thm55_applicable(params: PhysicalParams) -> bool:
    return all(check_parameter_conditions(params))


def check_time_step(params: PhysicalParams, dt: float, consts: StabilityConstants) -> list[str]:
    """Advisory comparison of ``dt`` with the applicable bounds; logs a warning per violation."""
    msgs = []
    b54 = dt_bound_thm54(params, consts)
    if dt >= b54:
        msgs.append(f"dt = {dt:g} exceeds the unconditional energy-decay bound {b54:.3e}")
    if thm55_applicable(params):
        b55 = dt_bound_thm55(params, consts)
        if dt >= b55:
            msgs.append(f"dt = {dt:g} exceeds the conditional energy-decay bound {b55:.3e}")
    for m in msgs:
        log.warning("%s (bounds are sufficient, not necessary)", m)
    return msgs


def lemma53_condition(A) -> bool:
    """Sufficient condition for positive definiteness: A_ij^2 < A_ii A_jj / (n-1)^2."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    if not np.allclose(A, A.T, rtol=0, atol=1e-14 * max(1.0, np.abs(A).max())):
        raise ValueError("matrix must be symmetric")
    n = A.shape[0]
    if n == 1:
        return bool(A[0, 0] > 0)
    d = np.diag(A)
    if np.any(d <= 0):
        return False
    bound = np.outer(d, d) / (n - 1) ** 2
    off = ~np.eye(n, dtype=bool)
    return bool(np.all(A[off] ** 2 < bound[off]))


# ------------------------------------------------------------ estimation

def _restrict(A, keep):
    return A.tocsr()[keep][:, keep]


def gen_eig_extreme(A, B, largest: bool = True) -> float:
    """Extreme eigenvalue of the pencil A x = lam B x with B SPD."""
    n = A.shape[0]
    if n <= 2500:
        Ad = A.toarray() if sp.issparse(A) else np.asarray(A)
        Bd = B.toarray() if sp.issparse(B) else np.asarray(B)
        w = sla.eigh(Ad, Bd, eigvals_only=True)
        return float(w[-1] if largest else w[0])
    if largest:
        w = spla.eigsh(A.tocsc(), k=1, M=B.tocsc(), which="LA", return_eigenvectors=False)
    else:
        w = spla.eigsh(A.tocsc(), k=1, M=B.tocsc(), sigma=0.0, which="LM", return_eigenvectors=False)
    return float(w[0])


def estimate_constants(disc) -> StabilityConstants:
    """Measure the inequality constants on the discrete spaces of ``disc``.

    Each constant is the square root of an extreme generalized eigenvalue of
    the matching pair of assembled matrices.
    """
    from . import fem
    from .linalg import assemble_local

    d = disc
    h = float(np.diff(d.mesh.xs).max())
    H = d.params.H
    K = assemble_local(fem.stiffness_local(d.es_b, 1), d.Sb.cells, d.Sb.cells, (d.nb, d.nb))
    fixed = d.Sb.nodes_on(d.problem.bcs.eta_tags)
    free = np.setdiff1d(np.arange(d.nb), fixed)
    Kf, Mf = _restrict(K, free), _restrict(d.M_b, free)
    C_P = 1.0 / np.sqrt(gen_eig_extreme(Kf, Mf, largest=False))
    # trace on Gamma+ (first row of the thick layer)
    E = sp.csr_matrix((np.ones(d.n_gamma), (np.arange(d.n_gamma), np.arange(d.n_gamma))),
                      shape=(d.nb, d.n_gamma))
    MG = (E @ d.M11 @ E.T).tocsr()
    C_TR = np.sqrt(gen_eig_extreme(_restrict(MG, free), Kf))
    C_INV = h * np.sqrt(gen_eig_extreme(K, d.M_b))
    B_INV = h * np.sqrt(gen_eig_extreme(d.S11, d.M11))
    C_TI = np.sqrt(h * gen_eig_extreme(MG, d.M_b))
    n2 = d.Uf.n_nodes
    Ms = d.M_u.tocsr()[:n2][:, :n2]
    rows = d.gamma_minus_u
    E2 = sp.csr_matrix((np.ones(rows.size), (rows, np.arange(rows.size))), shape=(n2, rows.size))
    MG2 = E2 @ d.M22 @ E2.T
    A_TI = np.sqrt(h * gen_eig_extreme(MG2.tocsr(), Ms))
    return StabilityConstants(C_P=C_P, C_TR=C_TR, C_INV=C_INV, B_INV=B_INV,
                              C_TI=C_TI, A_TI=A_TI, h=h, H=H)
