import numpy as np
import pytest

from _oracles import param_args, symbolic_forcings
from fpsisplit.mms import MmsSolution, generate_forcings
from fpsisplit.model import unit_params

GENERAL = unit_params(rho_b=1.3, mu_b=0.7, lambda_b=2.1, c0=0.4, alpha=0.8,
                      kappa=((1.5, 0.2), (0.2, 0.9)), gamma=0.3, rho_p=1.7, c0_p=0.6,
                      alpha_p=1.2, kappa_p=0.45, bendD=2.2, gamma_p=0.5, rho_f=0.9,
                      mu_f=1.4, H=0.8)


def _close(a, b, tol=1e-9):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return np.all(np.abs(a - b) <= tol * (1.0 + np.abs(b)))


@pytest.mark.parametrize("prm", [unit_params(), GENERAL], ids=["unit", "general"])
def test_forcings_match_symbolic_oracle(prm, rng):
    ora = symbolic_forcings()
    f = generate_forcings(MmsSolution(prm))
    a = param_args(prm)
    n = 1000
    x, t = rng.uniform(0, 1, n), rng.uniform(0, 1, n)
    yb = rng.uniform(0, 1, n)
    yp = rng.uniform(-prm.H, 0, n)
    yf = rng.uniform(-prm.H - 1, -prm.H, n)
    fb = f.F_b(x, yb, t)
    assert _close(fb[0], ora["F_b0"](x, yb, t, *a)) and _close(fb[1], ora["F_b1"](x, yb, t, *a))
    assert _close(f.G_b(x, yb, t), ora["G_b"](x, yb, t, *a))
    assert _close(f.G_p(x, yp, t), ora["G_p"](x, yp, t, *a))
    assert _close(f.F_p(x, 0 * x, t), ora["F_p"](x, 0 * x, t, *a))
    ff = f.F_f(x, yf, t)
    assert _close(ff[0], ora["F_f0"](x, yf, t, *a)) and _close(ff[1], ora["F_f1"](x, yf, t, *a))


def test_pointwise_examples():
    ora = symbolic_forcings()
    prm = unit_params()
    f = generate_forcings(MmsSolution(prm))
    a = param_args(prm)
    assert f.G_b(0.25, 0.5, 0.0) == pytest.approx(float(ora["G_b"](0.25, 0.5, 0.0, *a)), rel=1e-12)
    fx, fy = f.F_f(0.5, -1.5, 0.0)
    assert fx == pytest.approx(float(ora["F_f0"](0.5, -1.5, 0.0, *a)), rel=1e-12)
    assert fy == pytest.approx(float(ora["F_f1"](0.5, -1.5, 0.0, *a)), rel=1e-12)


def _d(f, h=1e-5):
    return lambda z: (f(z + h) - f(z - h)) / (2 * h)


def test_derived_fields_are_consistent(rng):
    ex = MmsSolution(GENERAL)
    K = GENERAL.kappa_matrix
    x, y, t = rng.uniform(0, 1, 50), rng.uniform(0, 1, 50), rng.uniform(0, 1, 50)
    gx = _d(lambda s: ex.p(s, y, t))(x)
    gy = _d(lambda s: ex.p(x, s, t))(y)
    ub = ex.u_b(x, y, t)
    assert np.allclose(ub[0], -(K[0, 0] * gx + K[0, 1] * gy), atol=1e-7)
    assert np.allclose(ub[1], -(K[1, 0] * gx + K[1, 1] * gy), atol=1e-7)
    for c in range(2):
        assert np.allclose(ex.xi(x, y, t)[c], _d(lambda s: ex.eta(x, y, s)[c])(t), atol=1e-7)
    assert np.allclose(ex.w(x, t), ex.eta(x, 0 * x, t)[1])
    assert np.allclose(ex.v(x, t), _d(lambda s: ex.w(x, s))(t), atol=1e-7)
    assert np.allclose(ex.Lam(x, t), -_d(_d(lambda s: ex.w(s, t), 1e-4), 1e-4)(x), atol=1e-5)
    yp = rng.uniform(-GENERAL.H, 0, 50)
    assert np.allclose(ex.u_p(x, yp, t), -GENERAL.kappa_p * _d(lambda s: ex.q(x, s, t))(yp), atol=1e-7)


def test_plate_displacement_has_zero_slope_at_ends():
    ex = MmsSolution(unit_params())
    for t in (0.0, 0.3, 1.0):
        assert abs(_d(lambda s: ex.w(s, t))(np.array([0.0, 1.0]))).max() < 1e-8


def test_weighted_average_of_manufactured_q():
    prm = unit_params(H=0.7)
    ex = MmsSolution(prm)
    z = np.linspace(-prm.H, 0, 200001)
    for x, t in ((0.1, 0.0), (0.6, 0.4)):
        ref = np.trapezoid((z + prm.H / 2) * ex.q(x, z, t), z) / prm.H
        assert ex.Qbar(np.array([x]), t)[0] == pytest.approx(ref, rel=1e-8, abs=1e-12)


def test_gradients_match_fields(rng):
    ex = MmsSolution(unit_params())
    x, y, t = rng.uniform(0, 1, 20), rng.uniform(-2, -1, 20), rng.uniform(0, 1, 20)
    (a, b), (c, d) = ex.grad_u(x, y, t)
    assert np.allclose(a, _d(lambda s: ex.u(s, y, t)[0])(x), atol=1e-7)
    assert np.allclose(d, _d(lambda s: ex.u(x, s, t)[1])(y), atol=1e-7)
    yb = rng.uniform(0, 1, 20)
    (a, b), (c, d) = ex.grad_eta(x, yb, t)
    assert np.allclose(b, _d(lambda s: ex.eta(x, s, t)[0])(yb), atol=1e-6)
    assert np.allclose(c, _d(lambda s: ex.eta(s, yb, t)[1])(x), atol=1e-6)
