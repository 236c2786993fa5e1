import math

import numpy as np
import pytest

from willmore_lab.ambient import MetricParams
from willmore_lab.diagnostics import willmore_energy
from willmore_lab.exceptions import StabilityBoundError
from willmore_lab.flow import (FlowState, StepConfig, StopCriteria, _filter, area_of,
                               lagrange_multiplier, radial_velocity, run_flow, stable_dt, step,
                               willmore_speed)
from willmore_lab.spectral import pad_coeffs
from willmore_lab.surface import (RadialGraph, geometry_bundle, integrate, laplace_beltrami,
                                  surface_derivatives)

M0 = MetricParams(mass=0.0)
M1 = MetricParams(mass=1.0)


def test_multiplier_round_sphere_euclidean():
    assert abs(lagrange_multiplier(FlowState(RadialGraph.round(5.0, 8), M0))) < 1e-14


def test_multiplier_centered_schwarzschild():
    lam = lagrange_multiplier(FlowState(RadialGraph.round(10.0, 16), M1))
    assert abs(lam - 2e-3 / 1.05 ** 6) < 1e-12
    assert abs(lam - 1.49244e-3) < 1e-8
    assert abs((2e-3 - lam) - 5.08e-4) < 1e-6


def test_multiplier_equals_projection_form():
    p = MetricParams(mass=1.0, eta=0.05, family="tracefree")
    g = RadialGraph.perturbed(10.0, [(2, 1, 0.05), (3, 0, 0.03)], 12, center=[0.5, 0, 1.0])
    b = geometry_bundle(g, "full", p)
    sp = willmore_speed(b)
    ref = -integrate(sp["W"] * b.H, b) / integrate(b.H ** 2, b)
    assert abs(sp["lam"] - ref) < 1e-12 * abs(ref) + 1e-15


def test_speed_vanishes_on_round_spheres():
    assert np.max(np.abs(willmore_speed(FlowState(RadialGraph.round(5.0, 8), M0))["speed"])) < 1e-12
    sp = willmore_speed(FlowState(RadialGraph.round(10.0, 16), M1))
    assert np.max(np.abs(sp["speed"])) < 1e-8


def test_speed_is_orthogonal_to_mean_curvature():
    g = RadialGraph.perturbed(10.0, [(2, 0, 0.01)], 12)
    b = geometry_bundle(g, "full", M0)
    assert abs(integrate(willmore_speed(b)["speed"] * b.H, b)) < 1e-9


def test_step_preserves_area_and_centered_sphere():
    st = FlowState(RadialGraph.round(10.0, 12), M1)
    for _ in range(20):
        st, s = step(st, StepConfig())
    assert abs(area_of(st.graph, M1) / st.target_area - 1) < 1e-12
    assert np.max(np.abs(st.graph.values - 10.0)) < 1e-10


def test_euclidean_flow_rounds_out():
    st = FlowState(RadialGraph.perturbed(5.0, [(2, 0, 0.05)], 8), M0)
    cfg = StepConfig(c_stab=2.0)
    w = [willmore_energy(st.bundle)]
    spread0 = np.ptp(st.graph.values)
    for _ in range(120):
        st, _ = step(st, cfg)
        w.append(willmore_energy(st.bundle))
    assert np.all(np.diff(w) < 0)
    assert 4 * math.pi < w[-1] < w[0]
    assert np.ptp(st.graph.values) < 0.35 * spread0
    assert abs(area_of(st.graph, M0) / st.target_area - 1) < 1e-9


def test_projection_scale_is_spectrally_small():
    # the area drift of one step is (dt) x (velocity truncation error), which
    # decays spectrally in L
    rates = []
    for L in (10, 16, 24):
        g = RadialGraph.perturbed(5.0, [(2, 0, 0.1), (3, 1, 0.1), (5, 2, 0.05)], L)
        dt = stable_dt(g, 0.5)
        rates.append(abs(step(FlowState(g, M1), StepConfig(dt=dt))[1] - 1) / dt)
    assert rates[1] < rates[0] / 30 and rates[2] < rates[1] / 30
    g = RadialGraph.perturbed(10.0, [(2, 0, 0.05), (3, 1, 0.03)], 10)
    assert abs(step(FlowState(g, M1), StepConfig())[1] - 1) < 1e-11


def test_dissipation_identity_first_order():
    g = RadialGraph.perturbed(10.0, [(2, 0, 0.05), (3, 1, 0.03)], 12)
    st = FlowState(g, M1)
    b = st.bundle
    f = willmore_speed(b)["speed"]
    rate = 0.5 * integrate(f * f, b)
    dt = stable_dt(g, 0.5) / 4
    errs = []
    for h in (dt, dt / 2):
        new, _ = step(st, StepConfig(dt=h, scheme="euler"))
        fd = -(willmore_energy(new.bundle) - willmore_energy(b)) / h
        errs.append(abs(fd / rate - 1))
    assert errs[0] < 1e-2
    assert 1.5 < errs[0] / errs[1] < 2.5


def test_mean_curvature_evolution():
    # dH/dt at fixed omega = -Lap f - f |A|^2 - f Rc(nu, nu) + dH(T), T the tangential motion
    p = MetricParams(mass=1.0)
    g = RadialGraph.perturbed(10.0, [(2, 1, 0.05), (3, 0, 0.03)], 12)
    b = geometry_bundle(g, "full", p)
    rate_c, _ = radial_velocity(g, p)
    vel = b.grid.synthesize(pad_coeffs(rate_c, b.grid.L))
    V = vel[..., None] * b.grid.omega
    gV = np.einsum("...ij,...j->...i", b.ambient_metric, V)
    f = np.einsum("...i,...i->...", gV, b.normal)
    Tup = np.einsum("...ab,...b->...a", b.gamma_inv, np.einsum("...ai,...i->...a", b.tangents, gV))
    dH, _ = surface_derivatives(b.H, b)
    predicted = (-laplace_beltrami(f, b) - f * b.a2 - f * b.ric_nn
                 + np.einsum("...a,...a->...", Tup, dH))
    errs = []
    for h in (1e-2, 5e-3):
        new = RadialGraph(g.coeffs + h * rate_c)
        Hn = geometry_bundle(new, "full", p).H
        errs.append(np.max(np.abs((Hn - b.H) / h - predicted)) / np.max(np.abs(predicted)))
    assert errs[0] < 1e-3
    assert 1.5 < errs[0] / errs[1] < 2.5


def test_stability_bound_enforced():
    st = FlowState(RadialGraph.round(10.0, 8), M1)
    with pytest.raises(StabilityBoundError):
        step(st, StepConfig(dt=10 * stable_dt(st.graph, 0.5)))


def test_dealias_mismatch():
    st = FlowState(RadialGraph.round(10.0, 8), M1)
    with pytest.raises(ValueError):
        step(st, StepConfig(dealias=False))


def test_step_config_validation():
    with pytest.raises(ValueError):
        StepConfig(scheme="leapfrog")
    with pytest.raises(ValueError):
        StepConfig(dt=-1.0)
    with pytest.raises(ValueError):
        StepConfig(c_stab=0)


def test_run_flow_stop_reasons():
    g = RadialGraph.perturbed(10.0, [(2, 0, 0.02)], 8)
    st = FlowState(g, M1)
    cfg = StepConfig(c_stab=2.0)
    r = run_flow(st, cfg, StopCriteria(max_steps=3))
    assert r.stop_reason == "max_steps" and r.steps == 3 and len(r.records) == 4
    dt = stable_dt(g, 2.0)
    r = run_flow(st, StepConfig(dt=dt, c_stab=2.0), StopCriteria(T_max=2.5 * dt))
    assert r.stop_reason == "t_max" and r.steps == 3
    r = run_flow(st, cfg, StopCriteria(residual_tol=1.0))
    assert r.stop_reason == "converged" and r.steps == 0
    r = run_flow(st, cfg, StopCriteria(max_steps=4, record_every=3))
    assert [round(rec.t / r.state.t * 4) for rec in r.records] == [0, 3, 4]


def test_run_flow_reports_errors():
    g = RadialGraph.perturbed(10.0, [(2, 0, 0.1), (7, 3, 0.05)], 8)
    st = FlowState(g, M1)
    r = run_flow(st, StepConfig(c_stab=200.0), StopCriteria(max_steps=50))
    assert r.stop_reason == "error"
    assert r.error and r.records


def test_euler_and_rk4_agree_for_small_steps():
    g = RadialGraph.perturbed(10.0, [(2, 0, 0.03)], 8)
    st = FlowState(g, M1)
    dt = stable_dt(g, 0.5) / 10
    a, _ = step(st, StepConfig(dt=dt))
    b, _ = step(st, StepConfig(dt=dt, scheme="euler"))
    assert np.max(np.abs(a.graph.coeffs - b.graph.coeffs)) < 1e-6


def test_filter_acts_on_top_modes_only():
    c = np.ones(81)
    out = _filter(c, 8, 10.0)
    l = np.floor(np.sqrt(np.arange(81))).astype(int)
    assert np.all(out[l <= 5] == 1.0)
    assert np.all(out[l > 5] < 1.0)
    assert np.array_equal(_filter(c, 8, 0.0), c)
