import numpy as np
import pytest

from fpsisplit.model import (ForcingSpec, RunConfig, check_parameter_conditions, mms_config,
                             plate_bending_stiffness, unit_params, validate_params, vessel_params)


def test_vessel_parameters_are_admissible():
    assert validate_params(vessel_params()) == []


def test_unit_parameters_are_admissible():
    p = unit_params()
    assert validate_params(p) == []
    assert (p.gamma, p.gamma_p, p.gamma_pen) == (0.0, 0.0, 0.0)


def test_indefinite_kappa_is_reported_once():
    bad = validate_params(unit_params(kappa=((1.0, 0.0), (0.0, -1.0))))
    assert len(bad) == 1 and bad[0].startswith("kappa")


def test_nonsymmetric_kappa_is_reported():
    bad = validate_params(unit_params(kappa=((1.0, 0.3), (0.0, 1.0))))
    assert any("symmetric" in b for b in bad)


@pytest.mark.parametrize("field,value", [("rho_b", 0.0), ("H", -1.0), ("mu_f", np.nan)])
def test_nonpositive_fields_are_named(field, value):
    bad = validate_params(unit_params(**{field: value}))
    assert any(b.startswith(field) for b in bad)


def test_negative_spring_is_reported():
    assert any(b.startswith("gamma") for b in validate_params(unit_params(gamma=-1.0)))


def test_vessel_conditions_hold_with_margin():
    p = vessel_params()
    assert check_parameter_conditions(p) == (True, True)
    assert p.c0 * p.lambda_b == pytest.approx(1700.0)
    assert 12 * p.c0_p * p.bendD == pytest.approx(7.16e3, rel=1e-3)


def test_unit_conditions():
    # 1 < 1 fails; 1 < 12 * 1 * 1 holds
    assert check_parameter_conditions(unit_params()) == (False, True)


def test_zero_coupling_conditions_hold():
    assert check_parameter_conditions(unit_params(alpha=0.0, alpha_p=0.0)) == (True, True)


def test_bending_stiffness_formula():
    assert plate_bending_stiffness(1.0, 1.0) == pytest.approx(8.0 / 9.0)


def test_scalar_kappa_becomes_tensor():
    p = unit_params(kappa=3.0)
    assert np.array_equal(p.kappa_matrix, 3.0 * np.eye(2))
    assert p.k_min == pytest.approx(3.0)


@pytest.mark.parametrize("kw", [dict(dt=0.0), dict(dt=0.1, T_final=0.01), dict(d_h=0.0),
                                dict(bc="other")])
def test_run_config_rejects_bad_values(kw):
    with pytest.raises(ValueError):
        RunConfig(**kw)


def test_step_count():
    assert mms_config(10, 1e-3, 0.1).n_steps == 100


def test_isolated_forcing():
    assert ForcingSpec.isolated().is_isolated()
    assert not ForcingSpec(G_b=lambda x, y, t: x).is_isolated()


def test_state_views_share_storage(mms_disc8):
    disc, ex = mms_disc8
    st = disc.interpolate_state(ex, 0.0)
    assert st.check_invariants() == []
    st.p[0] = 42.0
    assert st.q[disc.n_q - disc.n_gamma] == 42.0
    c = st.copy()
    c.pq[:] = 0.0
    assert st.p[0] == 42.0
