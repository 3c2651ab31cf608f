import numpy as np
import pytest

from fpsisplit.coupling import (ColumnQuadrature, average_matrix, column_average, extend,
                                transfer_minus_to_plus, transfer_plus_to_minus)
from fpsisplit.mesh import MeshError, build_glued_mesh
from fpsisplit.model import Geometry, MeshResolution, RunConfig


def _mesh(nx=7, ny_plate=3, H=0.4):
    cfg = RunConfig(geometry=Geometry(2.0, 1.0, 1.0), mesh=MeshResolution(nx, 2, ny_plate, 2))
    return build_glued_mesh(cfg, H)


def _plate_z(mesh):
    r0, r1 = mesh.row_ranges["P"]
    return np.repeat(mesh.ys[r0:r1 + 1], mesh.ncol)


def test_extend_is_constant_in_z():
    m = _mesh()
    f = np.sin(m.xs)
    ext = extend(f, m).reshape(-1, m.ncol)
    assert np.all(ext == f[None, :])
    assert np.all(extend(np.zeros(m.ncol), m) == 0.0)


def test_extend_hat_gives_column_indicator():
    m = _mesh()
    hat = np.zeros(m.ncol)
    hat[3] = 1.0
    ext = extend(hat, m).reshape(-1, m.ncol)
    assert np.all(ext[:, 3] == 1.0) and ext.sum() == ext.shape[0]


def test_extend_rejects_wrong_length():
    with pytest.raises((MeshError, ValueError)):
        extend(np.zeros(3), _mesh())


@pytest.mark.parametrize("ny_plate", [1, 3, 4, 7])
def test_column_weights(ny_plate):
    m = _mesh(ny_plate=ny_plate)
    cq = ColumnQuadrature.from_mesh(m)
    assert cq.plain.sum() == pytest.approx(1.0)
    assert cq.weighted.sum() == pytest.approx(0.0, abs=1e-15)


def test_averages_of_simple_fields():
    H = 0.4
    m = _mesh(H=H)
    z = _plate_z(m)
    c = np.full(z.size, 2.5)
    assert np.allclose(column_average(c, m), 2.5)
    assert np.allclose(column_average(c, m, weighted=True), 0.0, atol=1e-15)
    assert np.allclose(column_average(z + H / 2, m, weighted=True), H ** 2 / 12)


def test_average_is_exact_for_piecewise_linear_columns(rng):
    H = 0.4
    m = _mesh(ny_plate=5, H=H)
    zs = np.unique(_plate_z(m))
    vals = rng.standard_normal(zs.size)
    q = np.repeat(vals, m.ncol)
    # dense reference integration of the piecewise-linear profile
    zz = np.linspace(-H, 0, 200001)
    prof = np.interp(zz, zs, vals)
    ref_plain = np.trapezoid(prof, zz) / H
    ref_w = np.trapezoid((zz + H / 2) * prof, zz) / H
    assert np.allclose(column_average(q, m), ref_plain, rtol=1e-8)
    assert np.allclose(column_average(q, m, weighted=True), ref_w, rtol=1e-6, atol=1e-10)


def test_average_matrix_matches_function(rng):
    m = _mesh()
    q = rng.standard_normal(_plate_z(m).size)
    for weighted in (False, True):
        assert np.allclose(average_matrix(m, weighted) @ q, column_average(q, m, weighted))


def test_average_is_left_inverse_of_extend(rng):
    m = _mesh()
    f = rng.standard_normal(m.ncol)
    assert np.allclose(column_average(extend(f, m), m), f)


def test_transfers(rng):
    m = _mesh()
    f = rng.standard_normal(m.ncol)
    assert np.array_equal(transfer_plus_to_minus(transfer_minus_to_plus(f, m), m), f)
    assert np.all(transfer_minus_to_plus(np.full(m.ncol, 3.0), m) == 3.0)
    hat = np.zeros(m.ncol)
    hat[2] = 1.0
    assert np.array_equal(transfer_plus_to_minus(hat, m), hat)


def test_extend_then_trace_on_gamma_minus_equals_transfer(rng):
    m = _mesh()
    f = rng.standard_normal(m.ncol)
    ext = extend(f, m).reshape(-1, m.ncol)
    assert np.array_equal(ext[0], transfer_plus_to_minus(f, m))
