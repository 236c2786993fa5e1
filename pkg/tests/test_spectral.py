import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from willmore_lab.spectral import (SphereGrid, degree_of, get_grid, lm_index, n_coeffs,
                                   spectral_transform)


def test_grid_shape():
    g = SphereGrid(10)
    assert (g.n_theta, g.n_phi) == (11, 22)
    assert g.size == 11 * 22
    assert np.all(np.diff(g.mu) < 0)


def test_index_helpers():
    assert n_coeffs(3) == 16
    assert lm_index(2, -1) == 5
    assert degree_of(25) == 4
    with pytest.raises(ValueError):
        degree_of(24)
    with pytest.raises(ValueError):
        lm_index(1, 2)


def test_constant_field():
    g = get_grid(8)
    c = spectral_transform(np.ones(g.shape), g, "analyze")
    assert abs(c[0] - np.sqrt(4 * np.pi)) < 1e-14
    assert np.max(np.abs(c[1:])) < 1e-14


def test_single_harmonic():
    g = get_grid(8)
    c = np.zeros(n_coeffs(8))
    c[lm_index(2, 1)] = 1.0
    back = spectral_transform(spectral_transform(c, g, "synthesize"), g, "analyze")
    assert np.max(np.abs(back - c)) < 1e-12


def test_real_harmonic_formula():
    # Y_1^1 = sqrt(3/(4 pi)) sin(theta) cos(phi), no Condon-Shortley phase
    g = get_grid(6)
    c = np.zeros(n_coeffs(6))
    c[lm_index(1, 1)] = 1.0
    vals = g.synthesize(c)
    ref = np.sqrt(3 / (4 * np.pi)) * np.outer(g.sin_theta, np.cos(g.phi))
    assert np.max(np.abs(vals - ref)) < 1e-14


@settings(max_examples=25, deadline=None)
@given(L=st.integers(2, 16), seed=st.integers(0, 2 ** 31))
def test_round_trip(L, seed):
    g = get_grid(L)
    c = np.random.default_rng(seed).normal(size=n_coeffs(L))
    back = g.analyze(g.synthesize(c))
    assert np.max(np.abs(back - c)) < 1e-12


@settings(max_examples=20, deadline=None)
@given(l1=st.integers(0, 6), m1=st.integers(-6, 6), l2=st.integers(0, 6), m2=st.integers(-6, 6))
def test_orthonormality(l1, m1, l2, m2):
    if abs(m1) > l1 or abs(m2) > l2:
        return
    g = get_grid(6)
    y = []
    for l, m in ((l1, m1), (l2, m2)):
        c = np.zeros(n_coeffs(6))
        c[lm_index(l, m)] = 1.0
        y.append(g.synthesize(c))
    expected = 1.0 if (l1, m1) == (l2, m2) else 0.0
    assert abs(g.integrate_sphere(y[0] * y[1]) - expected) < 1e-13


def test_quadrature_exact_to_degree_2L():
    g = get_grid(5)
    c = np.zeros(n_coeffs(5))
    c[lm_index(5, 3)] = 1.0
    y = g.synthesize(c)
    assert abs(g.integrate_sphere(y * y) - 1.0) < 1e-13


def test_derivatives_against_fft_and_closed_form():
    L = 10
    g = get_grid(L)
    c = np.random.default_rng(3).normal(size=n_coeffs(L))
    d = g.derivatives_c(g.analyze_c(g.synthesize(c)))
    # phi-derivative against an FFT derivative of the sampled field
    f = g.synthesize(c)
    k = np.fft.rfftfreq(g.n_phi, 1.0 / g.n_phi)
    fp = np.fft.irfft(1j * k * np.fft.rfft(f, axis=1), n=g.n_phi, axis=1)
    assert np.max(np.abs(d["p"] - fp)) < 1e-11
    # theta-derivative of z = cos(theta) is -sin(theta)
    from willmore_lab.spectral import real_to_complex
    cz = np.zeros(n_coeffs(L))
    cz[lm_index(1, 0)] = 1.0 / np.sqrt(3 / (4 * np.pi))
    dz = g.derivatives_c(real_to_complex(cz))
    assert np.max(np.abs(dz["t"] + g.sin_theta[:, None])) < 1e-13
    assert np.max(np.abs(dz["tt"] + np.cos(g.theta)[:, None])) < 1e-13


def test_transform_errors():
    g = get_grid(4)
    with pytest.raises(ValueError):
        spectral_transform(np.ones((3, 3)), g, "analyze")
    with pytest.raises(ValueError):
        spectral_transform(np.ones(7), g, "synthesize")
    with pytest.raises(ValueError):
        spectral_transform(np.ones(g.shape), g, "sideways")
