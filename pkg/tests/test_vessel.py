import numpy as np
import pytest

from fpsisplit.model import check_parameter_conditions, vessel_params
from fpsisplit.vessel import (SWEEP_H, PulseInflow, SweepResult, oscillation, profile_l2, pulse,
                              run_vessel, vessel_config)


def test_pulse_values():
    p = PulseInflow()
    assert pulse(0.0, p) == 0.0
    assert pulse(p.T_pulse / 2, p) == pytest.approx(13333.0, rel=1e-15)
    assert pulse(2 * p.T_pulse, p) == 0.0
    assert pulse(p.T_pulse, p) == 0.0
    assert p(p.T_pulse / 4) == pytest.approx(13333.0 / 2)


def test_pulse_rejects_negative_time_and_bad_fields():
    with pytest.raises(ValueError):
        pulse(-1e-6, PulseInflow())
    with pytest.raises(ValueError):
        PulseInflow(P_max=-1.0)
    with pytest.raises(ValueError):
        PulseInflow(T_pulse=0.0)


def test_vessel_layout():
    cfg = vessel_config()
    assert (cfg.geometry.length, cfg.geometry.R_b, cfg.geometry.R_f) == (5.0, 0.1, 0.5)
    assert cfg.mesh.nx == 300 and cfg.mesh.ny_fluid == 25 and cfg.mesh.ny_thick == 4
    assert cfg.mesh.ny_plate == 3
    assert cfg.dt == 5e-4 and cfg.n_steps == 28
    half = vessel_config(half=True)
    assert half.mesh.nx == 150 and half.mesh.ny_plate == 3


def test_vessel_parameters_meet_conditions():
    for H in SWEEP_H:
        assert check_parameter_conditions(vessel_params(H)) == (True, True)


def test_zero_pulse_gives_zero_solution():
    cfg = vessel_config(half=True, P_max=0.0, T_final=2e-3)
    res = run_vessel(0.02, cfg)
    assert np.abs(res.w).max() == 0.0
    assert all(r.E == 0.0 for r in res.energy)


@pytest.fixture(scope="module")
def short_run():
    cfg = vessel_config(half=True, T_final=0.005)
    return run_vessel(0.02, cfg, snapshot_every=5)


def test_vessel_run_records_history(short_run):
    r = short_run
    assert r.times.size == 11 and r.w.shape == (11, 151)
    assert sorted(r.snapshots) == [0, 5, 10]
    np.testing.assert_array_equal(r.w_at(0.0025), r.w[5])
    with pytest.raises(KeyError):
        r.w_at(0.00123)


def test_clamped_ends_do_not_move(short_run):
    assert np.all(short_run.w[:, 0] == 0.0) and np.all(short_run.w[:, -1] == 0.0)


def test_pulse_deflects_the_wall_outward(short_run):
    w = short_run.w[-1]
    assert np.abs(w).max() > 0
    # the interface is pushed into the wall (negative y is the fluid side)
    assert w.max() > -w.min()


def test_energy_after_pulse_stays_below_running_maximum():
    cfg = vessel_config(half=True, T_final=0.006)
    res = run_vessel(0.02, cfg)
    E = np.array([r.E for r in res.energy])
    assert np.all(np.isfinite(E))
    k = int(round(cfg.T_pulse / cfg.dt))
    assert np.all(E[k + 1:] <= E[: k + 1].max() * (1 + 1e-12))


def test_run_vessel_rejects_nonpositive_thickness():
    with pytest.raises(ValueError):
        run_vessel(0.0, vessel_config(half=True))


# ------------------------------------------------------------ sweep helpers

def test_profile_l2_of_linear_difference():
    x = np.linspace(0, 2, 11)
    assert profile_l2(x, x, np.zeros_like(x)) == pytest.approx(np.sqrt(8 / 3))
    assert profile_l2(x, x, x) == 0.0


def test_oscillation_helper():
    assert oscillation(np.linspace(0, 1, 9)) == (0, 0.0)
    x = np.linspace(0, 4 * np.pi, 401)
    count, amp = oscillation(np.sin(x))
    assert count == 4
    assert amp == pytest.approx(1.0, rel=1e-3)


def test_identical_thickness_gives_zero_difference():
    x = np.linspace(0, 1, 5)
    w = np.array([0.0, 1.0, -0.5, 0.2, 0.0])
    r = SweepResult([0.02, 0.02, 0.01], x, [w, w.copy(), 2 * w], 0.0075)
    assert r.differences[0] == 0.0
    assert r.differences[1] > 0
