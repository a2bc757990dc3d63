import numpy as np
import pytest
from hypothesis import given, strategies as st

from qball_vortex.exceptions import ConfigurationError
from qball_vortex.potential import (
    PotentialModel,
    eval_N,
    eval_Nprime,
    eval_W,
    eval_Wprime,
    quintic_well,
    sample_points,
    sign_condition,
    verify_hypotheses,
)

exponent = st.floats(2.05, 5.95)
coeff = st.floats(-5.0, 5.0)


@given(terms=st.lists(st.tuples(coeff, exponent), min_size=1, max_size=3),
       s=st.floats(0.01, 3.0), m=st.floats(0.2, 3.0))
def test_derivatives_match_finite_differences(terms, s, m):
    model = PotentialModel(m, terms)
    h = 1e-6 * max(s, 1.0)
    fd = (model.W(s + h) - model.W(s - h)) / (2 * h)
    assert eval_Wprime(model, s) == pytest.approx(fd, rel=1e-6, abs=1e-7)
    fdN = (model.N(s + h) - model.N(s - h)) / (2 * h)
    assert eval_Nprime(model, s) == pytest.approx(fdN, rel=1e-6, abs=1e-7)


@given(terms=st.lists(st.tuples(coeff, exponent), max_size=3), s=st.floats(-3.0, 3.0))
def test_even_in_s(terms, s):
    model = PotentialModel(1.0, terms)
    assert eval_W(model, s) == pytest.approx(eval_W(model, -s), rel=1e-14, abs=0)
    assert eval_N(model, s) == pytest.approx(eval_N(model, -s), rel=1e-14, abs=0)
    assert model.dW(s) == pytest.approx(-model.dW(-s), rel=1e-14, abs=0)


def test_w2_structure_at_zero():
    model = PotentialModel(1.7, ((-1.0, 2.5), (2.0, 4.0)))
    assert model.W(0.0) == 0.0 and model.dW(0.0) == 0.0
    h = 1e-4
    second = (model.W(h) - 2 * model.W(0.0) + model.W(-h)) / h**2
    assert second == pytest.approx(1.7**2, rel=1e-2)


@pytest.mark.parametrize("p", [2.0, 6.0, 7.0, 1.5])
def test_exponent_out_of_range_rejected(p):
    with pytest.raises(ConfigurationError, match="p < 6"):
        PotentialModel(1.0, ((1.0, p),))


@pytest.mark.parametrize("kw", [dict(m=0.0), dict(m=1.0, D=-1.0), dict(m=1.0, tau=2.0), dict(m=1.0, eps0=0.0)])
def test_bad_parameters_rejected(kw):
    with pytest.raises(ConfigurationError):
        PotentialModel(**kw)


def test_shifted_moment_matches_direct_evaluation():
    model = PotentialModel(1.0, ((-2.0, 3.0), (0.7, 5.5)))
    s = np.linspace(0, 2, 50)
    for k in (2.0, 6.0):
        coeffs = model.shifted_moment(k)
        direct = model.dN(s) * s - k * model.N(s)
        series = sum(c * s**p for c, p in coeffs)
        assert np.allclose(series, direct, atol=1e-12)


def test_sample_points_include_zero_and_endpoint():
    s = sample_points(3.0, 1000)
    assert s.size == 1000 and s[0] == 0.0 and s[-1] == pytest.approx(3.0)
    assert np.all(np.diff(s) > 0)


def test_verify_hypotheses_on_quintic_well():
    model = quintic_well(1000.0)
    rep = verify_hypotheses(model)
    assert rep.all_ok, rep.as_dict()


def test_quintic_well_stays_positive_and_meets_w4():
    for D in (30.0, 1000.0, 2000.0):
        model = quintic_well(D)
        s = np.linspace(0, 1, 200001)[1:]
        assert np.all(model.W(s) > 0)
        t = np.linspace(0, model.eps0, 10001)[1:]
        assert np.all(model.N(t) <= -D * t**4 + 1e-15)


def test_quintic_well_kappa_one_touches_zero():
    D = 100.0
    model = quintic_well(D, kappa=1.0)
    s_star = np.sqrt(3.0 / (4 * D))
    assert model.W(s_star) == pytest.approx(0.0, abs=1e-15)


def test_w1_failure_reports_witness():
    model = PotentialModel(1.0, ((-5.0, 3.0),), D=1.0, tau=3.0, eps0=0.1)
    rep = verify_hypotheses(model, s_max=2.0)
    assert not rep.W1_ok
    assert model.W(rep.witness["W1"]) < 0


def test_w4_false_without_attraction():
    rep = verify_hypotheses(PotentialModel(1.0, ((1.0 / 3.0, 3.0),)))
    assert rep.W1_ok and rep.W2_ok and rep.W3_ok and not rep.W4_ok


def test_verify_hypotheses_argument_checks():
    model = quintic_well(1000.0)
    with pytest.raises(ConfigurationError):
        verify_hypotheses(model, s_max=model.eps0 / 2)
    with pytest.raises(ConfigurationError):
        verify_hypotheses(model, samples=10)


def test_sign_condition_analytic_and_sampled():
    s = sample_points(2.0, 2000)
    assert sign_condition(((1.0, 3.0), (2.0, 4.0)), s, +1)
    assert not sign_condition(((1.0, 3.0), (-2.0, 4.0)), s, +1)
    # -s^3 + s^4 is negative only on (0, 1)
    assert sign_condition(((-1.0, 3.0), (1.0, 4.0)), np.linspace(1.0, 2.0, 100), +1)
