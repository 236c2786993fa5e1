"""Spherical-harmonic transforms on a Gauss-Legendre x equispaced grid.

Real orthonormal harmonics are used throughout::

    Y_l^m  = Lambda_l^m(cos theta) cos(m phi) / sqrt(pi)      m > 0
    Y_l^0  = Lambda_l^0(cos theta) / sqrt(2 pi)
    Y_l^-m = Lambda_l^m(cos theta) sin(m phi) / sqrt(pi)      m > 0

with ``Lambda`` normalised to unit L2 norm on [-1, 1] (no Condon-Shortley
phase). A field of degree <= L is stored as a real vector of length
(L+1)^2 with index ``l*l + l + m``. Internally the transforms use a complex
triangular array ``C[l, m] = t_m (a_lm - i b_lm)`` so that the longitude
direction is a plain real FFT.
"""

from functools import lru_cache

import numpy as np
from scipy.special import roots_legendre

from .exceptions import ConfigurationError

__all__ = [
    "SphereGrid",
    "get_grid",
    "spectral_transform",
    "n_coeffs",
    "lm_index",
    "real_to_complex",
    "complex_to_real",
    "degree_of",
]


def n_coeffs(L):
    return (L + 1) ** 2


def lm_index(l, m):
    if abs(m) > l:
        raise ConfigurationError(f"|m| must not exceed l (got l={l}, m={m})")
    return l * l + l + m


def degree_of(ncoef):
    L = int(round(np.sqrt(ncoef))) - 1
    if (L + 1) ** 2 != ncoef:
        raise ValueError(f"{ncoef} is not a valid coefficient count")
    return L


def _legendre_tables(L, mu):
    """Normalised associated Legendre functions and two theta-derivatives.

    Returns arrays of shape (L+1, L+1, len(mu)) indexed [m, l, node]; entries
    with l < m are zero.
    """
    s = np.sqrt(1.0 - mu * mu)
    n = mu.size
    lam = np.zeros((L + 1, L + 1, n))
    pmm = np.full(n, np.sqrt(0.5))
    for m in range(L + 1):
        if m > 0:
            pmm = np.sqrt((2 * m + 1) / (2.0 * m)) * s * pmm
        lam[m, m] = pmm
        if m + 1 <= L:
            lam[m, m + 1] = np.sqrt(2 * m + 3.0) * mu * pmm
        for l in range(m + 2, L + 1):
            a = np.sqrt((4.0 * l * l - 1) / (l * l - m * m))
            b = np.sqrt((2 * l + 1.0) * (l - 1 - m) * (l - 1 + m) / ((2 * l - 3.0) * (l * l - m * m)))
            lam[m, l] = a * mu * lam[m, l - 1] - b * lam[m, l - 2]

    dlam = np.zeros_like(lam)
    for m in range(L + 1):
        for l in range(m, L + 1):
            c = np.sqrt((2 * l + 1.0) * (l * l - m * m) / (2 * l - 1.0)) if l > m else 0.0
            prev = lam[m, l - 1] if l > m else 0.0
            dlam[m, l] = (l * mu * lam[m, l] - c * prev) / s

    ls = np.arange(L + 1)[None, :, None]
    ms = np.arange(L + 1)[:, None, None]
    d2lam = -(mu / s) * dlam + (ms * ms / (s * s) - ls * (ls + 1)) * lam
    d2lam[lam == 0.0] = 0.0
    return lam, dlam, d2lam


class SphereGrid:
    """Quadrature grid exact for spherical harmonics up to degree 2L.

    Colatitudes are the L+1 Gauss-Legendre nodes (no pole on the grid),
    longitudes are 2L+2 equispaced points.
    """

    def __init__(self, L):
        if L < 1:
            raise ConfigurationError("grid degree L must be positive")
        self.L = int(L)
        self.n_theta = self.L + 1
        self.n_phi = 2 * self.L + 2
        mu, w = roots_legendre(self.n_theta)
        order = np.argsort(-mu)
        self.mu = mu[order]
        self.gl_weights = w[order]
        self.theta = np.arccos(self.mu)
        self.sin_theta = np.sqrt(1.0 - self.mu ** 2)
        self.phi = 2.0 * np.pi * np.arange(self.n_phi) / self.n_phi
        self.shape = (self.n_theta, self.n_phi)
        self.size = self.n_theta * self.n_phi

        # weights for integrals against d(Omega) on the unit sphere
        self.weights = np.outer(self.gl_weights, np.full(self.n_phi, 2.0 * np.pi / self.n_phi))

        th, ph = np.meshgrid(self.theta, self.phi, indexing="ij")
        st, ct = np.sin(th), np.cos(th)
        sp, cp = np.sin(ph), np.cos(ph)
        self.omega = np.stack([st * cp, st * sp, ct], axis=-1)
        self.omega_theta = np.stack([ct * cp, ct * sp, -st], axis=-1)
        self.omega_phi = np.stack([-st * sp, st * cp, np.zeros_like(st)], axis=-1)
        self.omega_theta_phi = np.stack([-ct * sp, ct * cp, np.zeros_like(st)], axis=-1)
        self.omega_phi_phi = np.stack([-st * cp, -st * sp, np.zeros_like(st)], axis=-1)

        self.lam, self.dlam, self.d2lam = _legendre_tables(self.L, self.mu)
        m = np.arange(self.L + 1)
        self._tm2 = np.where(m == 0, 1.0 / (2.0 * np.pi), 1.0 / np.pi)
        self._scale = np.where(m == 0, float(self.n_phi), self.n_phi / 2.0)

    def __repr__(self):
        return f"SphereGrid(L={self.L}, n_theta={self.n_theta}, n_phi={self.n_phi})"

    # -- complex triangular coefficient arrays -----------------------------

    def analyze_c(self, values, lmax=None):
        """Grid values -> complex coefficient array C[l, m] up to ``lmax``."""
        values = np.asarray(values, dtype=float)
        if values.shape != self.shape:
            raise ValueError(f"expected grid values of shape {self.shape}, got {values.shape}")
        K = self.L if lmax is None else int(lmax)
        if K > self.L:
            raise ValueError("cannot analyse beyond the grid degree")
        F = np.fft.rfft(values, axis=1)[:, : K + 1]
        F = F * (self.gl_weights * (2.0 * np.pi / self.n_phi))[:, None]
        C = np.einsum("mli,im->lm", self.lam[: K + 1, : K + 1], F)
        return C * self._tm2[None, : K + 1]

    def synthesize_c(self, C, d_theta=0, d_phi=0):
        """Complex coefficients -> grid values of a theta/phi derivative."""
        K = C.shape[0] - 1
        if K > self.L:
            raise ValueError("coefficient degree exceeds the grid degree")
        table = (self.lam, self.dlam, self.d2lam)[d_theta]
        G = np.einsum("mli,lm->mi", table[: K + 1, : K + 1], C)
        if d_phi:
            G = G * ((1j * np.arange(K + 1)) ** d_phi)[:, None]
        X = np.zeros((self.n_theta, self.n_phi // 2 + 1), dtype=complex)
        X[:, : K + 1] = (G * self._scale[: K + 1, None]).T
        return np.fft.irfft(X, n=self.n_phi, axis=1)

    def derivatives_c(self, C):
        """Value and all derivatives up to second order, as a dict."""
        return {
            "f": self.synthesize_c(C),
            "t": self.synthesize_c(C, 1, 0),
            "p": self.synthesize_c(C, 0, 1),
            "tt": self.synthesize_c(C, 2, 0),
            "tp": self.synthesize_c(C, 1, 1),
            "pp": self.synthesize_c(C, 0, 2),
        }

    # -- real coefficient vectors ------------------------------------------

    def analyze(self, values, lmax=None):
        return complex_to_real(self.analyze_c(values, lmax))

    def synthesize(self, coeffs):
        return self.synthesize_c(real_to_complex(coeffs))

    def integrate_sphere(self, values):
        """Integral over the unit sphere against d(Omega)."""
        return float(np.sum(self.weights * values))


def real_to_complex(coeffs):
    coeffs = np.asarray(coeffs, dtype=float)
    K = degree_of(coeffs.size)
    C = np.zeros((K + 1, K + 1), dtype=complex)
    for l in range(K + 1):
        base = l * l + l
        C[l, 0] = coeffs[base] / np.sqrt(2.0 * np.pi)
        if l:
            m = np.arange(1, l + 1)
            C[l, 1 : l + 1] = (coeffs[base + m] - 1j * coeffs[base - m]) / np.sqrt(np.pi)
    return C


def complex_to_real(C):
    K = C.shape[0] - 1
    out = np.zeros((K + 1) ** 2)
    for l in range(K + 1):
        base = l * l + l
        out[base] = C[l, 0].real * np.sqrt(2.0 * np.pi)
        if l:
            m = np.arange(1, l + 1)
            out[base + m] = C[l, 1 : l + 1].real * np.sqrt(np.pi)
            out[base - m] = -C[l, 1 : l + 1].imag * np.sqrt(np.pi)
    return out


def pad_coeffs(coeffs, L):
    """Zero-pad (or truncate) a real coefficient vector to degree L."""
    coeffs = np.asarray(coeffs, dtype=float)
    n = n_coeffs(L)
    out = np.zeros(n)
    k = min(n, coeffs.size)
    out[:k] = coeffs[:k]
    return out


@lru_cache(maxsize=32)
def get_grid(L):
    """Shared, cached grid instance (grids are read-only after construction)."""
    return SphereGrid(L)


def spectral_transform(data, grid, direction):
    """Forward (``"analyze"``) or backward (``"synthesize"``) transform.

    ``analyze`` maps grid values of shape ``grid.shape`` to a real coefficient
    vector of length (L+1)^2; ``synthesize`` is its inverse on band-limited
    data.
    """
    data = np.asarray(data, dtype=float)
    if direction == "analyze":
        if data.shape != grid.shape:
            raise ValueError(f"grid values must have shape {grid.shape}, got {data.shape}")
        return grid.analyze(data)
    if direction == "synthesize":
        if data.ndim != 1 or data.size != n_coeffs(grid.L):
            raise ValueError(f"expected {n_coeffs(grid.L)} coefficients, got shape {data.shape}")
        return grid.synthesize(data)
    raise ValueError(f"direction must be 'analyze' or 'synthesize', not {direction!r}")
