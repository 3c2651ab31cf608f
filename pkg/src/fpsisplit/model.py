"""Physical parameters, forcing, run configuration and the discrete state.

All quantities are CGS. The computational ("glued") layout stacks the fluid
channel below the plate and the plate below the thick poroelastic layer:

    thick layer   y in [0, R_b]
    plate         y in [-H, 0]
    fluid         y in [-H - R_f, -H]
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

ScalarField = Callable[[np.ndarray, np.ndarray, float], np.ndarray]
VectorField = Callable[[np.ndarray, np.ndarray, float], tuple]


@dataclass(frozen=True)
class PhysicalParams:
    rho_b: float = 1.0
    mu_b: float = 1.0
    lambda_b: float = 1.0
    c0: float = 1.0
    alpha: float = 1.0
    kappa: tuple = ((1.0, 0.0), (0.0, 1.0))
    gamma: float = 0.0
    rho_p: float = 1.0
    c0_p: float = 1.0
    alpha_p: float = 1.0
    kappa_p: float = 1.0
    bendD: float = 1.0
    gamma_p: float = 0.0
    rho_f: float = 1.0
    mu_f: float = 1.0
    beta: float = 1.0
    gamma_pen: float = 0.0
    H: float = 1.0

    def __post_init__(self):
        k = np.asarray(self.kappa, dtype=float)
        if k.ndim == 0:
            k = float(k) * np.eye(2)
        object.__setattr__(self, "kappa", tuple(map(tuple, k.tolist())))

    @property
    def kappa_matrix(self) -> np.ndarray:
        return np.array(self.kappa, dtype=float)

    @property
    def kappa_inv(self) -> np.ndarray:
        return np.linalg.inv(self.kappa_matrix)

    @property
    def k_min(self) -> float:
        return float(np.linalg.eigvalsh(self.kappa_matrix).min())

    def with_(self, **changes) -> "PhysicalParams":
        return replace(self, **changes)


def unit_params(**overrides) -> PhysicalParams:
    """Unit constants with zero springs and penalty (manufactured-solution setting)."""
    return PhysicalParams(**overrides)


def plate_bending_stiffness(mu_b: float, lambda_b: float) -> float:
    return 4.0 * mu_b * (lambda_b + mu_b) / (3.0 * (lambda_b + 2.0 * mu_b))


def vessel_params(H: float = 0.02, **overrides) -> PhysicalParams:
    """Physiological parameter set for the pressure-driven vessel problem."""
    mu_b, lambda_b = 5.58e5, 1.7e6
    base = dict(
        rho_b=1.1, mu_b=mu_b, lambda_b=lambda_b, c0=1e-3, alpha=1.0,
        kappa=1e-8, gamma=4e6,
        rho_p=1.1, c0_p=1e-3, alpha_p=1.0, kappa_p=1e-8,
        bendD=plate_bending_stiffness(mu_b, lambda_b), gamma_p=4e6,
        rho_f=1.0, mu_f=0.035, beta=1.0, gamma_pen=1.2e3, H=H,
    )
    base.update(overrides)
    return PhysicalParams(**base)


_POSITIVE = ("rho_b", "mu_b", "rho_p", "rho_f", "mu_f", "c0", "c0_p",
             "kappa_p", "bendD", "H")
_NONNEGATIVE = ("gamma", "gamma_p", "gamma_pen", "beta", "lambda_b")


def validate_params(p: PhysicalParams) -> list[str]:
    """Return a list of human-readable violations; empty when ``p`` is admissible."""
    out = []
    for name in _POSITIVE:
        val = getattr(p, name)
        if not np.isfinite(val) or val <= 0:
            out.append(f"{name}: must be > 0 (got {val!r})")
    for name in _NONNEGATIVE:
        val = getattr(p, name)
        if not np.isfinite(val) or val < 0:
            out.append(f"{name}: must be >= 0 (got {val!r})")
    k = p.kappa_matrix
    if k.shape != (2, 2) or not np.all(np.isfinite(k)):
        out.append("kappa: must be a finite 2x2 tensor")
    elif not np.allclose(k, k.T, rtol=0, atol=1e-14 * max(1.0, abs(k).max())):
        out.append("kappa: must be symmetric")
    elif np.linalg.eigvalsh(k).min() <= 0:
        out.append(f"kappa: must be positive definite (k_min={np.linalg.eigvalsh(k).min():g})")
    return out


def check_parameter_conditions(p: PhysicalParams) -> tuple[bool, bool]:
    """Coupling-strength conditions for the CFL-type stability result.

    Returns ``(alpha^2 < c0*lambda_b, alpha_p^2 < 12*c0_p*D)``.
    """
    return (p.alpha ** 2 < p.c0 * p.lambda_b,
            p.alpha_p ** 2 < 12.0 * p.c0_p * p.bendD)


@dataclass
class ForcingSpec:
    """Body and interface forcing, each a callable of ``(x, y, t)`` or ``None`` for zero.

    ``F_b`` and ``F_f`` return a pair ``(fx, fy)``; ``F_p`` is evaluated on the
    plate mid-surface (``y`` is passed but carries no information).
    """

    F_b: Optional[VectorField] = None
    G_b: Optional[ScalarField] = None
    F_p: Optional[ScalarField] = None
    G_p: Optional[ScalarField] = None
    F_f: Optional[VectorField] = None

    @classmethod
    def isolated(cls) -> "ForcingSpec":
        return cls()

    def is_isolated(self) -> bool:
        return all(getattr(self, f.name) is None for f in dataclasses.fields(self))


@dataclass(frozen=True)
class Geometry:
    length: float = 1.0
    R_b: float = 1.0
    R_f: float = 1.0


@dataclass(frozen=True)
class MeshResolution:
    """Cell counts. ``nx`` is the number of columns over the whole length."""

    nx: int = 20
    ny_thick: int = 20
    ny_plate: int = 20
    ny_fluid: int = 20
    # optional per-subdomain column counts; all must agree with nx
    nx_thick: Optional[int] = None
    nx_plate: Optional[int] = None
    nx_fluid: Optional[int] = None


@dataclass(frozen=True)
class RunConfig:
    geometry: Geometry = field(default_factory=Geometry)
    mesh: MeshResolution = field(default_factory=MeshResolution)
    dt: float = 1e-3
    T_final: float = 0.1
    d_h: float = 1.0
    bc: str = "mms"
    P_max: float = 13333.0
    T_pulse: float = 0.003
    output_dir: str = "output"
    cadence: int = 0

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive (got {self.dt})")
        if self.T_final < self.dt * (1 - 1e-12):
            raise ValueError(f"T_final={self.T_final} must be >= dt={self.dt}")
        if not self.d_h > 0:
            raise ValueError(f"d_h must be positive (got {self.d_h})")
        if self.bc not in ("mms", "vessel"):
            raise ValueError(f"bc must be 'mms' or 'vessel' (got {self.bc!r})")

    @property
    def n_steps(self) -> int:
        return int(round(self.T_final / self.dt))

    def with_(self, **changes) -> "RunConfig":
        return replace(self, **changes)


def mms_config(n: int = 20, dt: float = 1e-3, T_final: float = 0.1, **kw) -> RunConfig:
    """Unit-square layout [0,1]x[-2,1] with ``n`` cells per unit length everywhere."""
    return RunConfig(geometry=Geometry(1.0, 1.0, 1.0),
                     mesh=MeshResolution(n, n, n, n), dt=dt, T_final=T_final,
                     bc="mms", **kw)


@dataclass
class StateVector:
    """Discrete solution at one time level.

    ``pq`` holds the plate pressure followed by the thick-layer pressure; the
    row of nodes on the upper plate interface is stored once, so ``q`` and
    ``p`` are overlapping views. Likewise ``v``/``w`` are views of the normal
    (y) components of ``xi``/``eta`` on that interface row.
    """

    t: float
    eta: np.ndarray
    xi: np.ndarray
    pq: np.ndarray
    u_b: np.ndarray
    Lam: np.ndarray
    u_p: np.ndarray
    u: np.ndarray
    pi: np.ndarray
    n_gamma: int
    n_q: int

    @property
    def n_thick(self) -> int:
        return self.eta.size // 2

    @property
    def q(self) -> np.ndarray:
        return self.pq[: self.n_q]

    @property
    def p(self) -> np.ndarray:
        return self.pq[self.n_q - self.n_gamma:]

    @property
    def v(self) -> np.ndarray:
        nb = self.n_thick
        return self.xi[nb: nb + self.n_gamma]

    @property
    def w(self) -> np.ndarray:
        nb = self.n_thick
        return self.eta[nb: nb + self.n_gamma]

    def copy(self) -> "StateVector":
        return replace(self, **{k: getattr(self, k).copy() for k in
                                ("eta", "xi", "pq", "u_b", "Lam", "u_p", "u", "pi")})

    def arrays(self) -> dict:
        return {k: getattr(self, k) for k in
                ("eta", "xi", "pq", "u_b", "Lam", "u_p", "u", "pi")}

    def check_invariants(self) -> list[str]:
        """Dof-sharing checks; an empty list means the invariants hold."""
        bad = []
        if not np.shares_memory(self.p, self.q):
            bad.append("p and q do not share interface storage")
        if not np.array_equal(self.p[: self.n_gamma], self.q[-self.n_gamma:]):
            bad.append("p|Gamma+ != q|Gamma+")
        if not np.shares_memory(self.v, self.xi):
            bad.append("v is not a view of xi")
        if not np.shares_memory(self.w, self.eta):
            bad.append("w is not a view of eta")
        if np.any(self.xi[: self.n_gamma] != 0.0):
            bad.append("tangential xi on Gamma+ is nonzero")
        return bad
