import numpy as np
import pytest

from _oracles import column_darcy_1d
from fpsisplit import step_pressure, step_stokes, step_structure
from fpsisplit.model import mms_config, unit_params
from fpsisplit.problem import BoundarySpec, Discretization, Problem
from fpsisplit.step_pressure import solve_pressure
from fpsisplit.step_stokes import solve_stokes
from fpsisplit.step_structure import solve_structure
from fpsisplit.verification import mms_problem


def _free_residual(A, x, b, fixed):
    r = A @ x - b
    free = np.setdiff1d(np.arange(A.shape[0]), fixed)
    return np.abs(r[free]).max() / max(np.abs(b[free]).max(), 1e-300)


@pytest.fixture(scope="module")
def mms40():
    problem, ex = mms_problem(mms_config(40, 1e-3, 1e-3))
    return Discretization(problem), ex


# ------------------------------------------------------------ zero data

def test_zero_data_gives_zero_in_every_step(isolated_disc6):
    d = isolated_disc6
    st = d.zero_state(0.0)
    pq, ub, up = solve_pressure(d, st, d.dt)
    xi, Lam, eta = solve_structure(d, st, pq, up, d.dt)
    u, pi = solve_stokes(d, st, pq, xi[d.gamma_plus_y], up, d.dt)
    for a in (pq, ub, up, xi, Lam, eta, u, pi):
        assert np.abs(a).max() == 0.0


# ------------------------------------------------------------ Darcy step

def test_pressure_step_satisfies_weak_equations(mms_disc8):
    d, ex = mms_disc8
    st = d.interpolate_state(ex, 0.0)
    pq, ub, up = solve_pressure(d, st, d.dt)
    c = step_pressure._cache(d)
    x = np.concatenate([pq, ub, up])
    b = step_pressure.pressure_rhs(d, st, d.dt)
    assert _free_residual(c.A, x, b, c.dir_dofs) < 1e-9


def test_darcy_flux_is_projected_pressure_gradient(mms_disc8):
    d, ex = mms_disc8
    st = d.interpolate_state(ex, 0.0)
    pq, ub, _ = solve_pressure(d, st, d.dt)
    r = d.Darcy_b @ ub + d.G_b @ d.p_of(pq)
    assert np.abs(r).max() <= 1e-9 * np.abs(d.G_b @ d.p_of(pq)).max()


def test_pressure_step_keeps_shared_interface_row(mms_disc8):
    d, ex = mms_disc8
    st = d.interpolate_state(ex, 0.0)
    pq, ub, up = solve_pressure(d, st, d.dt)
    st.pq[:] = pq
    assert st.check_invariants() == []


def test_pressure_step_dirichlet_dofs_exact(mms_disc8):
    d, ex = mms_disc8
    st = d.interpolate_state(ex, 0.0)
    pq, _, _ = solve_pressure(d, st, d.dt)
    c = step_pressure._cache(d)
    vals = step_pressure.dirichlet_values(d, d.dt)
    assert np.array_equal(pq[c.dir_dofs], vals)


def test_pressure_single_step_error(mms40):
    d, ex = mms40
    st = d.interpolate_state(ex, 0.0)
    pq, _, _ = solve_pressure(d, st, d.dt)
    st.pq[:] = pq
    from fpsisplit import fem
    assert fem.l2_error(d.Sb, st.p, ex.p, d.dt) < 5e-2


def test_large_storage_slows_pressure_change(isolated_disc6, rng):
    d0 = isolated_disc6
    p0 = rng.standard_normal(d0.n_pq)
    changes = []
    for c0 in (1.0, 10.0, 100.0):
        prm = d0.params.with_(c0=c0, c0_p=c0)
        d = Discretization(Problem(d0.problem.cfg, prm, bcs=d0.problem.bcs))
        st = d.zero_state(0.0)
        st.pq[:] = p0
        st.pq[d.off_b + d.Sb.nodes_on(d.problem.bcs.p_tags)] = 0.0
        pq, _, _ = solve_pressure(d, st, d.dt)
        changes.append(np.linalg.norm(pq - st.pq))
    assert changes[0] > changes[1] > changes[2]


def _column_run(n, steps=10):
    dt, c0, kap = 1e-2, 0.5, 2.0
    prm = unit_params(alpha=0.0, alpha_p=0.0, c0=c0, kappa=((kap, 0.0), (0.0, kap)))
    d = Discretization(Problem(mms_config(n, dt, steps * dt), prm,
                               bcs=BoundarySpec(p_tags=("GammaPlus",))))
    st = d.zero_state(0.0)
    X = d.Sb.coords
    st.pq[d.off_b:] = np.sin(np.pi * X[:, 1] / 2)
    for _ in range(steps):
        pq, _, _ = solve_pressure(d, st, st.t + dt)
        st.pq[:] = pq
        st.t += dt
    y = np.linspace(0.0, 1.0, n + 1)
    ref = column_darcy_1d(n, 1.0, c0, kap, dt, steps, np.sin(np.pi * y / 2))
    row = np.round(X[:, 1] * n).astype(int)
    return np.abs(st.p - ref[row]).max() / np.abs(ref).max()


def test_column_darcy_matches_three_point_scheme_to_second_order():
    devs = [_column_run(n) for n in (10, 20, 40)]
    assert devs[0] < 5e-3
    rates = np.log2(np.array(devs[:-1]) / np.array(devs[1:]))
    assert np.all(rates > 1.7)


# ------------------------------------------------------------ structure step

def test_structure_step_satisfies_weak_equations(mms_disc8):
    d, ex = mms_disc8
    st = d.interpolate_state(ex, 0.0)
    pq, _, up = solve_pressure(d, st, d.dt)
    xi, Lam, eta = solve_structure(d, st, pq, up, d.dt)
    c = step_structure._cache(d)
    x = np.concatenate([xi, Lam])
    b = step_structure.structure_rhs(d, st, pq, up, d.dt)
    assert _free_residual(c.A, x, b, c.dir_dofs) < 1e-9


def test_structure_update_and_interface_views(mms_disc8):
    d, ex = mms_disc8
    st = d.interpolate_state(ex, 0.0)
    pq, _, up = solve_pressure(d, st, d.dt)
    xi, Lam, eta = solve_structure(d, st, pq, up, d.dt)
    np.testing.assert_allclose(eta, st.eta + d.dt * xi, rtol=0, atol=1e-14)
    assert np.all(xi[d.gamma_plus_x] == 0.0)


def test_bending_moment_tracks_discrete_laplacian(mms_disc8):
    # if Lam starts as the discrete -w'' it stays so, since M Lam' = S v
    d, ex = mms_disc8
    st = d.interpolate_state(ex, 0.0)
    import scipy.sparse.linalg as sla
    st.Lam[:] = sla.spsolve(d.M11.tocsc(), d.S11 @ st.w)
    pq, _, up = solve_pressure(d, st, d.dt)
    xi, Lam, eta = solve_structure(d, st, pq, up, d.dt)
    w_new = eta[d.gamma_plus_y]
    ref = sla.spsolve(d.M11.tocsc(), d.S11 @ w_new)
    assert np.abs(Lam - ref).max() <= 1e-9 * np.abs(ref).max()


def test_structure_single_step_error(mms40):
    from fpsisplit import fem
    d, ex = mms40
    st = d.interpolate_state(ex, 0.0)
    pq, _, up = solve_pressure(d, st, d.dt)
    xi, _, _ = solve_structure(d, st, pq, up, d.dt)
    assert fem.l2_error(d.Vb, xi, ex.xi, d.dt) < 1e-1


def test_static_patch_is_reproduced():
    mu, lam = 1.3, 0.7
    prm = unit_params(mu_b=mu, lambda_b=lam, alpha=0.0, alpha_p=0.0)
    exx = 1e-2
    eyy = -lam * exx / (2 * mu + lam)
    sig = exx * 4 * mu * (mu + lam) / (2 * mu + lam)

    def trac(x, y, t):
        return np.where(x < 0.5, -sig, sig), 0.0 * x

    bcs = BoundarySpec(p_tags=("GammaB_top",), structure_traction={"GammaB_side": trac})
    d = Discretization(Problem(mms_config(10, 1e-3, 1e-3), prm, bcs=bcs))
    st = d.zero_state(0.0)
    X = d.Vb.coords
    st.eta[: d.nb] = exx * X[:, 0]
    st.eta[d.nb:] = eyy * X[:, 1]
    xi, _, eta = solve_structure(d, st, np.zeros(d.n_pq), np.zeros(d.n_q), d.dt)
    assert np.abs(eta - st.eta).max() <= 1e-10 * np.abs(st.eta).max()
    assert np.abs(xi).max() < 1e-10


# ------------------------------------------------------------ Stokes step

def test_stokes_step_satisfies_weak_equations(mms_disc8):
    d, ex = mms_disc8
    st = d.interpolate_state(ex, 0.0)
    pq, _, up = solve_pressure(d, st, d.dt)
    xi, _, _ = solve_structure(d, st, pq, up, d.dt)
    v = xi[d.gamma_plus_y]
    u, pi = solve_stokes(d, st, pq, v, up, d.dt)
    c = step_stokes._cache(d)
    b = step_stokes.stokes_rhs(d, st, pq, v, up, d.dt)
    assert _free_residual(c.A, np.concatenate([u, pi]), b, c.dir_dofs) < 1e-9


def test_stokes_velocity_is_discretely_divergence_free(mms_disc8):
    d, ex = mms_disc8
    st = d.interpolate_state(ex, 0.0)
    pq, _, up = solve_pressure(d, st, d.dt)
    xi, _, _ = solve_structure(d, st, pq, up, d.dt)
    u, _ = solve_stokes(d, st, pq, xi[d.gamma_plus_y], up, d.dt)
    div = d.Bdiv.T @ u
    scale = np.abs(d.Bdiv).sum(axis=0).max() * np.abs(u).max()
    assert np.abs(div).max() <= 1e-9 * scale


def test_stokes_dirichlet_dofs_exact(mms_disc8):
    d, ex = mms_disc8
    st = d.interpolate_state(ex, 0.0)
    u, _ = solve_stokes(d, st, st.pq, st.v, st.u_p, d.dt)
    c = step_stokes._cache(d)
    assert np.array_equal(u[c.dir_dofs], step_stokes.dirichlet_values(d, d.dt))


def test_stokes_single_step_error(mms40):
    from fpsisplit import fem
    d, ex = mms40
    st = d.interpolate_state(ex, 0.0)
    pq, _, up = solve_pressure(d, st, d.dt)
    xi, _, _ = solve_structure(d, st, pq, up, d.dt)
    u, _ = solve_stokes(d, st, pq, xi[d.gamma_plus_y], up, d.dt)
    assert fem.l2_error(d.Uf, u, ex.u, d.dt) < 1e-2


def test_poiseuille_channel_is_reproduced():
    prm = unit_params(alpha=0.0, alpha_p=0.0, beta=0.0, gamma_pen=0.0, mu_f=0.8)
    W, p_in, p_out = 1.0, 2.0, 0.5
    G = p_in - p_out
    y0 = -prm.H - W

    def ux(y):
        s = y - y0
        return G / (2 * prm.mu_f) * s * (2 * W - s)

    def dux(y):
        return G / (2 * prm.mu_f) * (2 * W - 2 * (y - y0))

    def traction(x, y, t):
        s = np.where(x < 0.5, -1.0, 1.0)
        return -(p_in - G * x) * s, prm.mu_f * dux(y) * s

    bcs = BoundarySpec(p_tags=("GammaB_top",), u_tags=("GammaF_bottom",), uy_tags=("GammaMinus",),
                       u_value=lambda x, y, t: (ux(y), 0.0 * y),
                       fluid_traction={"GammaF_side": traction})
    d = Discretization(Problem(mms_config(10, 1e-3, 1e-3), prm, bcs=bcs))
    st = d.zero_state(0.0)
    st.u[: d.Uf.n_nodes] = ux(d.Uf.coords[:, 1])
    u, pi = solve_stokes(d, st, np.zeros(d.n_pq), np.zeros(d.n_gamma), np.zeros(d.n_q), d.dt)
    pe = p_in - G * d.Pf.coords[:, 0]
    assert np.abs(u - st.u).max() <= 1e-10 * np.abs(st.u).max()
    assert np.abs(pi - pe).max() <= 1e-10 * np.abs(pe).max()


def test_vessel_inflow_load_matches_pulse_pressure():
    from fpsisplit.vessel import PulseInflow, vessel_config, vessel_problem
    cfg = vessel_config(half=True)
    d = Discretization(vessel_problem(0.02, cfg))
    st = d.zero_state(0.0)
    b = step_stokes.stokes_rhs(d, st, st.pq, st.v, st.u_p, d.dt)
    P = PulseInflow(cfg.P_max, cfg.T_pulse)(d.dt)
    n = d.Uf.n_nodes
    # inflow traction (P, 0) on x = 0 integrates to P * R_f over the x components
    assert np.isclose(b[:n].sum(), P * cfg.geometry.R_f, rtol=1e-12)
    assert abs(b[n:].sum()) < 1e-9 * P
