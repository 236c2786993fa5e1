"""Star-shaped surfaces as radial graphs and their induced geometry.

A surface is ``x(omega) = rho(omega) * omega`` with ``rho`` stored as real
spherical-harmonic coefficients of degree ``L``. Geometry is evaluated in
one of three metric flavours:

``euclidean``
    the flat chart metric;
``schwarzschild``
    ``phi**4`` times the flat metric;
``full``
    Schwarzschild plus the configured perturbation.

The second fundamental form is ``A(X, Y) = g(D_X nu, Y)`` with ``nu`` the
outward unit normal, so a Euclidean round sphere of radius ``R`` has
``H = 2/R``.
"""

from dataclasses import dataclass, replace
import math

import numpy as np

from .ambient import MetricParams, curvature_fields
from .exceptions import ConfigurationError, DegeneracyError, DomainError
from .spectral import (degree_of, get_grid, lm_index, n_coeffs,
                       pad_coeffs, real_to_complex, spectral_transform)

__all__ = [
    "FLAVORS",
    "RadialGraph",
    "GeometryBundle",
    "geometry_bundle",
    "flavor_params",
    "integrate",
    "laplace_beltrami",
    "surface_derivatives",
    "gradient_norm2",
    "spectral_transform",
    "eval_degree",
]

FLAVORS = ("euclidean", "schwarzschild", "full")


def eval_degree(L, dealias=True):
    """Degree of the evaluation grid: 3/2-padded when dealiasing."""
    return int(math.ceil(1.5 * L)) if dealias else int(L)


class RadialGraph:
    """Immutable radial graph ``rho(omega) omega`` over the unit sphere.

    Parameters
    ----------
    coeffs : array_like
        Real spherical-harmonic coefficients of ``rho``, length ``(L+1)**2``.
    """

    def __init__(self, coeffs):
        coeffs = np.array(coeffs, dtype=float)
        if coeffs.ndim != 1:
            raise ValueError("coefficients must be a flat vector")
        self.L = degree_of(coeffs.size)
        if self.L < 1:
            raise ConfigurationError("graph degree must be at least 1")
        if not np.all(np.isfinite(coeffs)):
            raise DomainError("non-finite radius coefficients")
        coeffs.setflags(write=False)
        self.coeffs = coeffs
        self.grid = get_grid(self.L)
        self._values = None
        self._bundles = {}

    # -- constructors -------------------------------------------------------

    @classmethod
    def round(cls, R, L):
        """Centred coordinate sphere of radius ``R``."""
        c = np.zeros(n_coeffs(L))
        c[0] = R * math.sqrt(4.0 * math.pi)
        return cls(c)

    @classmethod
    def from_function(cls, func, L, oversample=None):
        """Project ``func(omega) -> rho`` (vectorised over ``(..., 3)``) onto degree ``L``.

        The function is sampled on a finer grid and truncated, so smooth
        non-band-limited radii are represented to their spectral accuracy.
        """
        K = oversample if oversample is not None else max(2 * L, L + 16)
        fine = get_grid(K)
        vals = np.asarray(func(fine.omega), dtype=float)
        return cls(fine.analyze(vals, lmax=L))

    @classmethod
    def offcenter(cls, R, center, L):
        """Coordinate sphere ``|x - center| = R`` seen from the origin.

        ``rho = omega.a + sqrt((omega.a)**2 - |a|**2 + R**2)``, which needs
        ``|a| < R``.
        """
        a = np.asarray(center, dtype=float)
        if np.linalg.norm(a) >= R:
            raise DomainError("the sphere must enclose the origin (|center| < R)")

        def rho(w):
            wa = w @ a
            return wa + np.sqrt(wa * wa - a @ a + R * R)

        return cls.from_function(rho, L)

    @classmethod
    def perturbed(cls, R, modes, L, center=None):
        """``rho = R (1 + sum eps Y_lm)`` for modes ``[(l, m, eps), ...]``.

        With ``center`` given, the perturbation multiplies the off-centre
        sphere radius instead.
        """
        base = cls.round(R, L) if center is None else cls.offcenter(R, center, L)
        c = np.array(base.coeffs)
        for l, m, eps in modes:
            if l > L:
                raise ConfigurationError(f"mode l={l} exceeds the graph degree L={L}")
            if center is None:
                c[lm_index(int(l), int(m))] += R * eps
        if center is not None:
            grid = base.grid
            factor = 1.0 + sum(eps * _real_harmonic(grid, l, m) for l, m, eps in modes)
            return cls(grid.analyze(base.values * factor))
        return cls(c)

    # -- values -------------------------------------------------------------

    @property
    def values(self):
        """Radius on the native grid (cached)."""
        if self._values is None:
            v = self.grid.synthesize(self.coeffs)
            v.setflags(write=False)
            self._values = v
        return self._values

    def values_on(self, grid):
        return grid.synthesize_c(real_to_complex(self.coeffs))

    def derivatives_on(self, grid):
        return grid.derivatives_c(real_to_complex(self.coeffs))

    @property
    def min_radius(self):
        return float(self.values.min())

    @property
    def mean_radius(self):
        return float(self.coeffs[0] / math.sqrt(4.0 * math.pi))

    def scaled(self, s):
        return RadialGraph(s * self.coeffs)

    def with_coeffs(self, coeffs):
        return RadialGraph(coeffs)

    def resampled(self, L):
        """Same surface represented at degree ``L`` (padding or truncating)."""
        return RadialGraph(pad_coeffs(self.coeffs, L))

    def __repr__(self):
        return f"RadialGraph(L={self.L}, mean_radius={self.mean_radius:.6g})"

    # -- plain-text I/O -----------------------------------------------------

    def to_text(self):
        g = self.grid
        lines = [f"{g.L} {g.n_theta} {g.n_phi}"]
        lines += [repr(float(c)) for c in self.coeffs]
        return "\n".join(lines) + "\n"

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_text())

    @classmethod
    def from_text(cls, text):
        rows = [ln.strip() for ln in text.splitlines()
                if ln.strip() and not ln.lstrip().startswith("#")]
        if not rows:
            raise ValueError("empty radial graph file")
        head = rows[0].split()
        if len(head) != 3:
            raise ValueError("header must read 'L N_theta N_phi'")
        L, nt, nphi = (int(v) for v in head)
        if (nt, nphi) != (L + 1, 2 * L + 2):
            raise ValueError(f"grid size {nt}x{nphi} does not match L={L}")
        coeffs = np.array([float(v) for v in rows[1:]])
        if coeffs.size != n_coeffs(L):
            raise ValueError(f"expected {n_coeffs(L)} coefficients, found {coeffs.size}")
        return cls(coeffs)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_text(fh.read())


def _real_harmonic(grid, l, m):
    c = np.zeros(n_coeffs(grid.L))
    c[lm_index(int(l), int(m))] = 1.0
    return grid.synthesize(c)


def flavor_params(params, flavor):
    if flavor not in FLAVORS:
        raise ConfigurationError(f"unknown flavor {flavor!r}; use one of {FLAVORS}")
    if flavor == "euclidean":
        return MetricParams(mass=0.0, r_floor=params.r_floor if params is not None else None)
    if params is None:
        raise ConfigurationError(f"flavor {flavor!r} needs metric parameters")
    return params.schwarzschild() if flavor == "schwarzschild" else params


@dataclass(frozen=True)
class GeometryBundle:
    """Induced geometry at the nodes of an evaluation grid.

    All per-node arrays have leading shape ``grid.shape``. Tangent index 0 is
    the colatitude, 1 the longitude.
    """

    flavor: str
    params: MetricParams
    grid: object
    x: np.ndarray
    rho: np.ndarray
    tangents: np.ndarray
    normal: np.ndarray
    gamma: np.ndarray
    gamma_inv: np.ndarray
    second_form: np.ndarray
    H: np.ndarray
    acirc2: np.ndarray
    a2: np.ndarray
    dmu: np.ndarray
    surface_christoffel: np.ndarray
    ambient_metric: np.ndarray
    ric_nn: np.ndarray
    ric_tan2: np.ndarray
    scalar: np.ndarray
    einstein_nn: np.ndarray
    omega_dot_nu: np.ndarray
    x_dot_nu: np.ndarray

    @property
    def area(self):
        return float(self.dmu.sum())

    def integrate(self, field):
        return integrate(field, self)


def geometry_bundle(graph, flavor="full", params=None, dealias=True):
    """Induced geometry of ``graph`` in the requested metric flavour.

    Parameters
    ----------
    graph : RadialGraph
    flavor : {"euclidean", "schwarzschild", "full"}
    params : MetricParams
        Required for the two curved flavours.
    dealias : bool
        Evaluate on the 3/2-padded grid of degree ``ceil(3L/2)``.

    Raises
    ------
    DegeneracyError
        If the induced metric is singular at some node.
    DomainError
        If the surface dips below ``r_floor``.
    """
    mp = flavor_params(params, flavor)
    # flavours that resolve to the same metric share one cached bundle
    key = (repr(mp.to_dict()), bool(dealias))
    cached = graph._bundles.get(key)
    if cached is not None:
        return cached if cached.flavor == flavor else replace(cached, flavor=flavor)
    grid = get_grid(eval_degree(graph.L, dealias))
    d = graph.derivatives_on(grid)
    rho, rt, rp = d["f"], d["t"], d["p"]
    if np.any(rho <= mp.r_floor):
        raise DomainError(f"surface reaches r={rho.min():.6g} below r_floor={mp.r_floor:.6g}")

    w, wt, wp = grid.omega, grid.omega_theta, grid.omega_phi
    wtp, wpp = grid.omega_theta_phi, grid.omega_phi_phi
    e = lambda s: s[..., None]
    x = e(rho) * w
    xt = e(rt) * w + e(rho) * wt
    xp = e(rp) * w + e(rho) * wp
    xtt = e(d["tt"]) * w + 2 * e(rt) * wt - e(rho) * w
    xtp = e(d["tp"]) * w + e(rt) * wp + e(rp) * wt + e(rho) * wtp
    xpp = e(d["pp"]) * w + 2 * e(rp) * wp + e(rho) * wpp
    T = np.stack([xt, xp], axis=-2)
    X2 = np.stack([np.stack([xtt, xtp], axis=-2), np.stack([xtp, xpp], axis=-2)], axis=-3)

    amb = curvature_fields(mp, x, with_ricci=True)
    g, ginv, Gam = amb["g"], amb["ginv"], amb["gamma"]

    gT = np.einsum("...ij,...bj->...bi", g, T)
    gam = np.einsum("...ai,...bi->...ab", T, gT)
    det = gam[..., 0, 0] * gam[..., 1, 1] - gam[..., 0, 1] ** 2
    if not np.all(det > 1e-300) or not np.all(np.isfinite(det)):
        raise DegeneracyError("induced metric is singular at some node")
    gam_inv = np.stack([np.stack([gam[..., 1, 1], -gam[..., 0, 1]], -1),
                        np.stack([-gam[..., 0, 1], gam[..., 0, 0]], -1)], -2) / det[..., None, None]

    ncov = np.cross(xt, xp)
    nup = np.einsum("...ij,...j->...i", ginv, ncov)
    nnorm = np.sqrt(np.einsum("...i,...i->...", ncov, nup))
    nu = nup / nnorm[..., None]
    ncov_unit = ncov / nnorm[..., None]

    GT = np.einsum("...kij,...bj->...bki", Gam, T)
    D = X2 + np.einsum("...bki,...ai->...abk", GT, T)
    A = -np.einsum("...abk,...k->...ab", D, ncov_unit)
    H = np.einsum("...ab,...ab->...", gam_inv, A)
    AU = np.einsum("...ac,...cb->...ab", gam_inv, A)
    a2 = np.einsum("...ab,...ba->...", AU, AU)
    # trace-free part first: avoids cancellation in |A|^2 - H^2/2
    AU0 = AU - 0.5 * H[..., None, None] * np.eye(2)
    acirc2 = np.einsum("...ab,...ba->...", AU0, AU0)
    DT = np.einsum("...abk,...dk->...dab", D, gT)
    christ = np.einsum("...cd,...dab->...cab", gam_inv, DT)

    sqrt_det = np.sqrt(det)
    quad = np.outer(grid.gl_weights / grid.sin_theta, np.full(grid.n_phi, 2 * np.pi / grid.n_phi))
    dmu = sqrt_det * quad

    ric = amb["ricci"]
    ric_nu = np.einsum("...ij,...j->...i", ric, nu)
    ric_nn = np.einsum("...i,...i->...", ric_nu, nu)
    om = np.einsum("...ai,...i->...a", T, ric_nu)
    ric_tan2 = np.einsum("...a,...a->...", np.einsum("...ab,...b->...a", gam_inv, om), om)
    scalar = amb["scalar"]

    gnu = np.einsum("...ij,...j->...i", g, nu)
    bundle = GeometryBundle(
        flavor=flavor, params=mp, grid=grid, x=x, rho=rho, tangents=T, normal=nu,
        gamma=gam, gamma_inv=gam_inv, second_form=A, H=H, acirc2=acirc2, a2=a2,
        dmu=dmu, surface_christoffel=christ, ambient_metric=g, ric_nn=ric_nn,
        ric_tan2=ric_tan2, scalar=scalar, einstein_nn=ric_nn - 0.5 * scalar,
        omega_dot_nu=np.einsum("...i,...i->...", w, gnu),
        x_dot_nu=np.einsum("...i,...i->...", x, gnu),
    )
    graph._bundles[key] = bundle
    return bundle


def integrate(field, bundle):
    """Surface integral of grid values against the bundle's area element."""
    field = np.asarray(field, dtype=float)
    if field.shape != bundle.dmu.shape:
        raise ValueError(f"field shape {field.shape} does not match grid {bundle.dmu.shape}")
    return float(np.sum(field * bundle.dmu))


def surface_derivatives(field, bundle):
    """First and second coordinate derivatives of a field on the bundle grid.

    Returns ``(df, ddf)`` with ``df[..., a]`` and ``ddf[..., a, b]``.
    """
    grid = bundle.grid
    C = grid.analyze_c(field)
    d = grid.derivatives_c(C)
    df = np.stack([d["t"], d["p"]], axis=-1)
    ddf = np.stack([np.stack([d["tt"], d["tp"]], -1), np.stack([d["tp"], d["pp"]], -1)], -2)
    return df, ddf


def gradient_norm2(field, bundle):
    df, _ = surface_derivatives(field, bundle)
    return np.einsum("...ab,...a,...b->...", bundle.gamma_inv, df, df)


def laplace_beltrami(field, bundle):
    """Laplace-Beltrami operator ``gamma^ab (f_ab - Gamma^c_ab f_c)``."""
    field = np.asarray(field, dtype=float)
    if field.shape != bundle.grid.shape:
        raise ValueError(f"field shape {field.shape} does not match grid {bundle.grid.shape}")
    df, ddf = surface_derivatives(field, bundle)
    hess = ddf - np.einsum("...cab,...c->...ab", bundle.surface_christoffel, df)
    return np.einsum("...ab,...ab->...", bundle.gamma_inv, hess)
