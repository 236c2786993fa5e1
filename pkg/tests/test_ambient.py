import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from willmore_lab.ambient import (MetricParams, conformal_factor, curvature_at,
                                  curvature_fields, decay_report, metric_jet_at, metric_jets,
                                  schwarzschild_ricci)
from willmore_lab.exceptions import ConfigurationError, DomainError

FAMILY_PARAMS = [
    MetricParams(mass=1.0),
    MetricParams(mass=1.0, eta=0.1, family="isotropic"),
    MetricParams(mass=1.0, eta=0.1, family="radial"),
    MetricParams(mass=1.0, eta=0.1, family="tracefree"),
    MetricParams(mass=0.0, eta=0.2, family="tracefree",
                 family_params={"Q": [[0, 1, 0], [1, 0, 0.5], [0, 0.5, 0]]}),
]


def test_schwarzschild_metric_value():
    jet = metric_jet_at(MetricParams(mass=1.0), [10.0, 0, 0])
    assert np.allclose(jet.g, 1.21550625 * np.eye(3), rtol=0, atol=1e-15)


def test_euclidean_mode():
    jet = metric_jet_at(MetricParams(mass=0.0), [3.0, -1.0, 2.0])
    assert np.array_equal(jet.g, np.eye(3))
    assert not jet.dg.any() and not jet.ddg.any()


def test_isotropic_family_value():
    jet = metric_jet_at(MetricParams(mass=1.0, eta=0.1, family="isotropic"), [10.0, 0, 0])
    assert abs(jet.g[0, 0] - (1.21550625 + 0.001)) < 1e-15


def test_eta_zero_kills_perturbation():
    p = MetricParams(mass=1.0, eta=0.0, family="tracefree")
    q = MetricParams(mass=1.0)
    x = [4.0, 5.0, -6.0]
    assert np.array_equal(metric_jet_at(p, x).g, metric_jet_at(q, x).g)


def test_ricci_at_reference_point():
    c = curvature_at(MetricParams(mass=1.0), [10.0, 0, 0])
    assert abs(c.ricci[0, 0] - (-2e-3 / 1.05 ** 2)) < 1e-15
    assert abs(c.ricci[1, 1] - 1e-3 / 1.05 ** 2) < 1e-15
    assert abs(c.ricci[0, 0] + 1.81406e-3) < 1e-8


@settings(max_examples=30, deadline=None)
@given(r=st.floats(5.0, 500.0), u=st.floats(-1, 1), az=st.floats(0, 2 * np.pi))
def test_schwarzschild_curvature_identities(r, u, az):
    s = np.sqrt(1 - u * u)
    x = r * np.array([s * np.cos(az), s * np.sin(az), u])
    c = curvature_at(MetricParams(mass=1.0), x)
    assert abs(c.scalar) < 1e-10
    assert np.max(np.abs(c.potential_hessian_defect)) < 1e-10
    assert np.max(np.abs(c.ricci - schwarzschild_ricci(1.0, x))) < 1e-10


def test_radial_component_is_phi4():
    p = MetricParams(mass=2.0)
    x = np.array([3.0, 4.0, 12.0])
    r = np.linalg.norm(x)
    g = metric_jet_at(p, x).g
    n = x / r
    assert abs(n @ g @ n - conformal_factor(2.0, r) ** 4) < 1e-14


@pytest.mark.parametrize("params", FAMILY_PARAMS)
def test_jets_match_finite_differences(params):
    x = np.array([7.0, -3.0, 5.0])
    g, dg, ddg = metric_jets(params, x)
    h = 1e-4
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        gp, dgp, _ = metric_jets(params, x + e)
        gm, dgm, _ = metric_jets(params, x - e)
        assert np.max(np.abs((gp - gm) / (2 * h) - dg[..., k])) < 1e-9
        assert np.max(np.abs((dgp - dgm) / (2 * h) - ddg[..., k])) < 1e-9


@pytest.mark.parametrize("params", FAMILY_PARAMS)
def test_jet_symmetries(params):
    jet = metric_jet_at(params, [6.0, 2.0, -3.0])
    assert np.allclose(jet.g, jet.g.T, atol=0)
    assert np.all(np.linalg.eigvalsh(jet.g) > 0)
    assert np.allclose(jet.dg, jet.dg.transpose(1, 0, 2), atol=1e-18)
    assert np.allclose(jet.ddg, jet.ddg.transpose(0, 1, 3, 2), atol=1e-18)


@pytest.mark.parametrize("family", ["isotropic"])
def test_conformal_fast_path_matches_generic(family):
    p = MetricParams(mass=1.0, eta=0.05, family=family)
    x = np.random.default_rng(0).normal(size=(20, 3)) * 10
    a = curvature_fields(p, x)
    b = curvature_fields(p, x, generic=True)
    for key in ("gamma", "ricci", "scalar"):
        assert np.max(np.abs(a[key] - b[key])) < 1e-15


def test_ricci_trace_gives_scalar():
    p = MetricParams(mass=1.0, eta=0.1, family="tracefree")
    c = curvature_fields(p, np.array([5.0, 6.0, 7.0]), generic=True)
    assert abs(np.einsum("ij,ij->", c["ginv"], c["ricci"]) - c["scalar"]) < 1e-15


def test_domain_and_configuration_errors():
    with pytest.raises(DomainError):
        metric_jet_at(MetricParams(mass=1.0), [0.1, 0, 0])
    with pytest.raises(ConfigurationError):
        MetricParams(mass=1.0, family="spiral")
    with pytest.raises(ConfigurationError):
        MetricParams(mass=-1.0)
    with pytest.raises(ConfigurationError):
        MetricParams(mass=1.0, eta=0.1, family="tracefree", family_params={"Q": np.eye(3)})
    with pytest.raises(ValueError):
        metric_jet_at(MetricParams(mass=1.0), [1.0, 2.0])


def test_decay_report_zero_perturbation():
    rep = decay_report(MetricParams(mass=1.0), [10, 20])
    assert not rep["h_scaled"].any()


def test_decay_report_isotropic_value():
    rep = decay_report(MetricParams(mass=1.0, eta=0.1, family="isotropic"), [20])
    assert abs(rep["h_scaled"][0, 0] - 0.1 * np.sqrt(3)) < 1e-12


def test_decay_report_radial_rate():
    rep = decay_report(MetricParams(mass=1.0, eta=0.1, family="radial"), [50, 100, 200])
    assert all(rep["rate_ok"])
    # the zeroth-order bound holds with constant one, the higher ones only as rates
    assert rep["literal_ok"][0]


def test_decay_report_empty():
    with pytest.raises(ValueError):
        decay_report(MetricParams(mass=1.0), [])
