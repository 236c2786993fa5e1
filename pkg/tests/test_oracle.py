import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from willmore_lab.ambient import MetricParams
from willmore_lab.diagnostics import barycenters, tau_evolution_rhs
from willmore_lab.exceptions import DomainError
from willmore_lab.flow import FlowState
from willmore_lab.oracle import (SphereSpec, centered_quantities, drift_rate, offcenter_area,
                                 offcenter_barycenter, offcenter_willmore, pohozaev_integral,
                                 sphere_drift)
from willmore_lab.surface import RadialGraph, geometry_bundle, integrate

from conftest import random_graph


# -- centred spheres --------------------------------------------------------

def test_centered_reference_values():
    q = centered_quantities(1.0, 10.0)
    assert q["H_bar"] == pytest.approx(0.164129, abs=5e-7)
    assert q["willmore_integral"] == pytest.approx(41.1470, abs=5e-5)
    assert q["hawking_mass"] == pytest.approx(1.0, abs=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.floats(1.0, 1e4), st.floats(0.0, 5.0))
def test_centered_hawking_mass_equals_mass(R, m):
    if R <= 1.1 * m / 2:
        return
    q = centered_quantities(m, R)
    assert q["hawking_mass"] == pytest.approx(m, rel=1e-11, abs=1e-12)


def test_centered_euclidean_limit():
    q = centered_quantities(0.0, 7.0)
    assert q["H_bar"] == pytest.approx(2 / 7.0, rel=1e-15)
    assert q["willmore_integral"] == pytest.approx(16 * math.pi, rel=1e-15)
    assert q["hawking_mass"] == 0.0
    assert q["lambda_star"] == 0.0


def test_centered_matches_surface_quadrature(schwarzschild):
    b = geometry_bundle(RadialGraph.round(10.0, 16), "full", schwarzschild)
    q = centered_quantities(1.0, 10.0)
    assert integrate(b.H ** 2, b) == pytest.approx(q["willmore_integral"], rel=1e-12)
    assert b.area == pytest.approx(q["area"], rel=1e-12)
    assert np.max(np.abs(b.H - q["H_bar"])) < 1e-12


def test_centered_rejects_inner_radius():
    with pytest.raises(DomainError):
        centered_quantities(1.0, 0.5)


# -- off-centre energy -------------------------------------------------------

def test_quadrature_closed_gap_cubic():
    gaps = [abs(offcenter_willmore(SphereSpec(1, R, 0.1))
                - offcenter_willmore(SphereSpec(1, R, 0.1), "closed")) for R in (100, 200)]
    assert gaps[0] / gaps[1] == pytest.approx(8, rel=0.05)
    radii = np.array([50, 100, 200, 400.0])
    g = [abs(offcenter_willmore(SphereSpec(1, R, 0.1))
             - offcenter_willmore(SphereSpec(1, R, 0.1), "closed")) for R in radii]
    slope = np.polyfit(np.log(radii), np.log(g), 1)[0]
    assert slope == pytest.approx(-3, abs=0.15)


def test_closed_minus_taylor_small():
    s = SphereSpec(1, 100, 0.1)
    assert abs(offcenter_willmore(s, "closed") - offcenter_willmore(s, "taylor")) < 1e-5


def test_quadrature_continuous_at_centre():
    s = SphereSpec(1, 10, 1e-6)
    ref = centered_quantities(1, 10)["willmore_integral"]
    assert abs(offcenter_willmore(s) - ref) < 1e-8
    assert offcenter_area(s) == pytest.approx(centered_quantities(1, 10)["area"], rel=1e-10)


def test_closed_small_tau_limit():
    R = 50.0
    expansion = 16 * math.pi - 32 * math.pi / R + 32 * math.pi / R ** 2
    assert offcenter_willmore(SphereSpec(1, R, 1e-5), "closed") == pytest.approx(expansion, abs=1e-10)
    assert offcenter_willmore(SphereSpec(1, R, 0.0), "closed") == pytest.approx(expansion, rel=1e-15)


def _tau2_coefficient(R, mode="quadrature"):
    taus = np.linspace(0.02, 0.1, 5)
    w = [offcenter_willmore(SphereSpec(1, R, t), mode) for t in taus]
    return np.polyfit(taus ** 2, w, 2)[1] / (32 * math.pi / R ** 2)


def test_tau_squared_coefficient():
    assert _tau2_coefficient(200) == pytest.approx(1, rel=0.01)
    assert _tau2_coefficient(100, "closed") == pytest.approx(1, rel=1e-3)
    # the exact energy deviates by O(m/R)
    e100, e200 = _tau2_coefficient(100) - 1, _tau2_coefficient(200) - 1
    assert e100 / e200 == pytest.approx(2, rel=0.05)


def test_spec_domain_errors():
    with pytest.raises(DomainError):
        SphereSpec(1, 10, 1.0)
    with pytest.raises(DomainError):
        SphereSpec(1, 10, 0.95)
    with pytest.raises(DomainError):
        SphereSpec(1, 1.0, 0.5)
    with pytest.raises(DomainError):
        SphereSpec(1, 10, 0.1, axis=(0, 0, 0))
    with pytest.raises(ValueError):
        offcenter_willmore(SphereSpec(1, 10, 0.1), "series")


# -- barycentres -----------------------------------------------------------

def test_barycenter_matches_surface_quadrature(schwarzschild):
    R, tau = 20.0, 0.1
    spec = SphereSpec(1, R, tau)
    o = offcenter_barycenter(spec)
    d = barycenters(RadialGraph.offcenter(R, spec.center, 24), schwarzschild)
    assert np.allclose(d["a_e"], o["a_e"], rtol=0, atol=1e-10 * R)
    assert np.allclose(d["a_g"], o["a_g"], rtol=0, atol=1e-10 * R)
    assert d["tau_g"] == pytest.approx(o["tau_g"], rel=1e-9)


# -- drift -------------------------------------------------------------------

def test_drift_vanishes_without_mass():
    d = drift_rate(SphereSpec(0, 20, 0.05))
    assert d["leading_rate"] == 0.0
    assert d["sphere_rate"] == 0.0


def test_drift_recentres():
    d = drift_rate(SphereSpec(1, 20, 0.05))
    assert d["leading_rate"] < 0
    assert d["sphere_rate"] < 0
    assert d["headline_rate"] < d["uncorrected_rate"] < 0


def test_drift_linear_in_tau():
    ratios = []
    for tau in (0.01, 0.02, 0.05):
        ratios.append(drift_rate(SphereSpec(1, 20, tau))["leading_rate"] * 20 ** 6 / tau)
    assert np.ptp(ratios) < 0.02 * abs(ratios[0])


def test_drift_coefficients_large_radius():
    # Richardson in 1/R at small tau removes the leading corrections
    c = {R: drift_rate(SphereSpec(1, R, 0.005)) for R in (2000, 4000)}
    ext = {k: 2 * c[4000][k] - c[2000][k]
           for k in ("dfds_coefficient", "lambda_coefficient", "conversion_coefficient")}
    assert ext["dfds_coefficient"] == pytest.approx(64 * math.pi, rel=5e-4)
    assert ext["lambda_coefficient"] == pytest.approx(32 * math.pi / 3, rel=5e-4)
    assert ext["conversion_coefficient"] == pytest.approx(-32 * math.pi / 3, rel=5e-3)


def test_leading_rate_constant_at_large_radius():
    d = drift_rate(SphereSpec(1, 4000, 0.01))
    assert d["leading_rate"] * d["R_g"] ** 6 / 0.01 == pytest.approx(-24, rel=5e-3)


def test_sphere_drift_parts():
    spec = SphereSpec(1, 20, 0.05)
    s = sphere_drift(spec)
    d = drift_rate(spec)
    assert s["translation_check"] == pytest.approx(d["translation_term"], rel=1e-6)
    assert s["lambda"] > 0
    assert 0.5 < s["rate"] / d["leading_rate"] < 2
    with pytest.raises(DomainError):
        sphere_drift(SphereSpec(1, 20, 0.0))


def test_sphere_drift_matches_spectral_rhs(schwarzschild):
    spec = SphereSpec(1, 20, 0.05)
    state = FlowState(RadialGraph.offcenter(20, spec.center, 24), schwarzschild)
    spectral = tau_evolution_rhs(state)
    assert spectral == pytest.approx(sphere_drift(spec)["rate"], rel=1e-6)


# -- Pohozaev ----------------------------------------------------------------

def test_pohozaev_centered():
    g = RadialGraph.round(10.0, 16)
    for d in np.eye(3):
        assert abs(pohozaev_integral(g, d, 1.0)) < 1e-10


def test_pohozaev_offcenter():
    g = RadialGraph.offcenter(10.0, [0, 0, 3.0], 24)
    assert abs(pohozaev_integral(g, [0, 0, 1], 1.0)) < 1e-8
    assert abs(pohozaev_integral(g, [1, 0, 0], 1.0)) < 1e-12
    assert abs(pohozaev_integral(g, [0, 1, 0], 1.0)) < 1e-12


def test_pohozaev_random_graph(rng):
    g = random_graph(rng, 10.0, 24, amp=0.05)
    for d in np.eye(3):
        assert abs(pohozaev_integral(g, d, 1.0)) < 1e-7


def test_pohozaev_linear_in_direction(rng):
    g = random_graph(rng, 10.0, 16, amp=0.05)
    u, v = rng.normal(size=3), rng.normal(size=3)
    lhs = pohozaev_integral(g, 2 * u - 3 * v, 1.0)
    rhs = 2 * pohozaev_integral(g, u, 1.0) - 3 * pohozaev_integral(g, v, 1.0)
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_pohozaev_integrand_not_trivial():
    from willmore_lab.ambient import schwarzschild_ricci

    g = RadialGraph.offcenter(10.0, [0, 0, 3.0], 16)
    b = geometry_bundle(g, "schwarzschild", MetricParams(mass=1.0))
    field = np.einsum("...ij,i,...j->...", schwarzschild_ricci(1.0, b.x), [0, 0, 1.0], b.normal)
    assert integrate(np.abs(field), b) > 1e-3
