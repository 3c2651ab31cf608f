import json
from pathlib import Path

import numpy as np
import pytest

from fpsisplit import config
from fpsisplit.output import fluid_vtk, read_csv, structure_vtk, write_csv, write_manifest, write_vtk

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def test_defaults_follow_boundary_case():
    s = config.parse("")
    assert s.run.bc == "mms" and s.preset == "unit" and s.run.mesh.nx == 20
    v = config.parse("[run]\nbc = vessel\n")
    assert v.preset == "vessel" and v.run.mesh.nx == 300
    assert v.params.rho_f == pytest.approx(1.0)


@pytest.mark.parametrize("name", ["mms.cfg", "vessel.cfg"])
def test_shipped_configs_load_and_round_trip(name):
    s = config.load(CONFIGS / name)
    assert config.parse(config.dump(s)) == s


def test_round_trip_with_tensor_permeability():
    s = config.parse("[params]\nkappa = 2.0, 0.5, 0.5, 3.0\nalpha = 0.3\n")
    assert s.params.kappa == ((2.0, 0.5), (0.5, 3.0))
    assert config.parse(config.dump(s)) == s


def test_scalar_kappa():
    assert config.parse("[params]\nkappa = 4\n").params.kappa == ((4.0, 0.0), (0.0, 4.0))


def test_overrides_win_over_file_text():
    s = config.parse("[run]\ndt = 0.01\n", {"run.dt": "0.02", "mesh.nx": "8"})
    assert s.run.dt == 0.02 and s.run.mesh.nx == 8


@pytest.mark.parametrize("text, match", [
    ("[bogus]\nx = 1\n", "unknown section"),
    ("[run]\nspeed = 1\n", "unknown key"),
    ("[run]\ndt = fast\n", "dt"),
    ("[run]\nbc = pipe\n", "bc"),
    ("[params]\npreset = rubber\n", "preset"),
    ("[params]\nkappa = 1, 2\n", "kappa"),
    ("[params]\nrho_f = -1\n", "rho_f"),
    ("[params]\nkappa = 1, 2, 3, 1\n", "positive definite|symmetric"),
    ("[study]\nlevels = 0, 10\n", "levels"),
    ("no section header\n", "malformed"),
])
def test_invalid_configurations(text, match):
    with pytest.raises(config.ConfigError, match=match):
        config.parse(text)


def test_bad_override_key():
    with pytest.raises(config.ConfigError, match="section.key"):
        config.parse("", {"dt": "1"})


def test_missing_file_names_path(tmp_path):
    with pytest.raises(config.ConfigError, match="nope.cfg"):
        config.load(tmp_path / "nope.cfg")


# ------------------------------------------------------------ output

def test_csv_format(tmp_path):
    p = write_csv(tmp_path / "a.csv", ["k", "v"], [[1, 0.1], [2, 12345.678901234]], ["slope", 2.0])
    lines = p.read_text().splitlines()
    assert lines == ["k,v", "1,1.00000000e-01", "2,1.23456789e+04", "slope,2.00000000e+00"]
    head, rows = read_csv(p)
    assert head == ["k", "v"] and len(rows) == 3


def test_vtk_layout(tmp_path):
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    p = write_vtk(tmp_path / "t.vtk", pts, [[0, 1, 2]], {"s": [1.0, 2.0, 3.0], "v": np.ones((3, 2))})
    lines = p.read_text().splitlines()
    assert lines[0] == "# vtk DataFile Version 2.0"
    assert lines[2] == "ASCII" and lines[3] == "DATASET UNSTRUCTURED_GRID"
    assert "CELLS 1 4" in lines and "CELL_TYPES 1" in lines and "POINT_DATA 3" in lines
    assert "SCALARS s double 1" in lines and "VECTORS v double" in lines


def test_vtk_rejects_wrong_field_length(tmp_path):
    with pytest.raises(ValueError, match="field 's'"):
        write_vtk(tmp_path / "t.vtk", np.zeros((3, 2)), [[0, 1, 2]], {"s": [1.0]})


def test_state_snapshots(tmp_path, mms_disc8):
    d, ex = mms_disc8
    st = d.interpolate_state(ex, 0.0)
    f = fluid_vtk(tmp_path / "f.vtk", d, st).read_text()
    assert f"POINTS {d.Pf.n_nodes} double" in f and "SCALARS speed double 1" in f
    s = structure_vtk(tmp_path / "s.vtk", d, st).read_text()
    assert f"POINTS {d.nb} double" in s and "VECTORS eta double" in s


def test_fluid_snapshot_samples_velocity_at_vertices(tmp_path, mms_disc8):
    d, ex = mms_disc8
    st = d.interpolate_state(ex, 0.0)
    text = fluid_vtk(tmp_path / "f.vtk", d, st).read_text().splitlines()
    i = text.index("VECTORS u double")
    ux = np.array([float(l.split()[0]) for l in text[i + 1: i + 1 + d.Pf.n_nodes]])
    X = d.Pf.coords
    np.testing.assert_allclose(ux, ex.u(X[:, 0], X[:, 1], 0.0)[0], rtol=1e-8, atol=1e-12)


def test_manifest_is_stable(tmp_path):
    s = config.as_dict(config.parse(""))
    a = write_manifest(tmp_path / "a.json", "run-mms", s).read_text()
    b = write_manifest(tmp_path / "b.json", "run-mms", s).read_text()
    assert a == b
    doc = json.loads(a)
    assert doc["command"] == "run-mms" and doc["settings"]["run"]["dt"] == 1e-3
