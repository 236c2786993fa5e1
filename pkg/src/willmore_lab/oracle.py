"""Ground truth for coordinate spheres in exact Schwarzschild.

Off-centre spheres ``S_R(a)`` with ``a = tau R axis`` are axisymmetric, so
their integrals reduce to one dimension. With ``r = |x|`` as the variable
on the sphere,

* ``cos(theta) = (r**2 - R**2 (1 + tau**2)) / (2 R**2 tau)`` (angle about ``a``),
* ``d_r . nu_e = (r**2 + R**2 (1 - tau**2)) / (2 r R)``,
* ``dmu_e = (2 pi / tau) r dr`` on ``[R (1 - tau), R (1 + tau)]``.

All one-dimensional integrals use adaptive Gauss-Kronrod quadrature
(:func:`scipy.integrate.quad`) at a relative tolerance of ``1e-12``.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.integrate import quad

from .ambient import conformal_factor, schwarzschild_ricci
from .exceptions import DomainError
from .surface import geometry_bundle, integrate

__all__ = [
    "SphereSpec",
    "centered_quantities",
    "offcenter_willmore",
    "offcenter_area",
    "offcenter_barycenter",
    "drift_rate",
    "sphere_drift",
    "pohozaev_integral",
    "headline_coefficient",
]

_QUAD = dict(epsabs=0.0, epsrel=1e-12, limit=400)

headline_coefficient = 160.0


@dataclass(frozen=True)
class SphereSpec:
    """Coordinate sphere of Euclidean radius ``R`` centred at ``tau R axis``."""

    m: float
    R: float
    tau: float = 0.0
    axis: tuple = (0.0, 0.0, 1.0)
    tau_max: float = 0.9
    r_floor: float = None

    def __post_init__(self):
        if self.m < 0 or not self.R > 0:
            raise DomainError("need m >= 0 and R > 0")
        if not 0 <= self.tau < 1:
            raise DomainError(f"tau must lie in [0, 1), got {self.tau}")
        if self.tau > self.tau_max:
            raise DomainError(f"tau={self.tau} exceeds tau_max={self.tau_max}")
        ax = np.asarray(self.axis, dtype=float)
        n = np.linalg.norm(ax)
        if not n > 0:
            raise DomainError("axis must be a non-zero vector")
        object.__setattr__(self, "axis", tuple(ax / n))
        floor = self.r_floor if self.r_floor is not None else 1.1 * self.m / 2
        if self.R * (1 - self.tau) <= floor:
            raise DomainError("the sphere reaches below r_floor")

    @property
    def center(self):
        return self.tau * self.R * np.asarray(self.axis)


def centered_quantities(m, R):
    """Closed-form quantities of the centred sphere ``|x| = R``.

    Returns
    -------
    dict
        ``H_bar`` (mean curvature), ``area``, ``willmore_integral``
        (``int H**2``), ``hawking_mass`` and ``lambda_star``.
    """
    if m > 0 and R <= 1.1 * m / 2:
        raise DomainError("R must exceed r_floor")
    phi = conformal_factor(m, R)
    area = 4 * math.pi * R ** 2 * phi ** 4
    w = 16 * math.pi * (1 - m / (R * phi)) ** 2
    return {
        "H_bar": 2 / (R * phi ** 2) - 2 * m / (R ** 2 * phi ** 3),
        "area": area,
        "willmore_integral": w,
        "hawking_mass": math.sqrt(area) * (16 * math.pi - w) / (16 * math.pi) ** 1.5,
        "lambda_star": 2 * m / (R ** 3 * phi ** 6),
    }


def _cos_r(r, R, tau):
    return (r * r + R * R * (1 - tau * tau)) / (2 * r * R)


def _cos_theta(r, R, tau):
    return (r * r - R * R * (1 + tau * tau)) / (2 * R * R * tau)


def _shell(spec, integrand, cancelling=False):
    """``int integrand(r) dmu_e`` over the sphere (axisymmetric reduction).

    With ``cancelling=True`` the absolute tolerance is set relative to
    ``int |integrand|``, for integrands whose value is far below their size.
    """
    R, tau = spec.R, spec.tau
    a, b = R * (1 - tau), R * (1 + tau)
    opts = dict(_QUAD)
    if cancelling:
        size, _ = quad(lambda r: abs(integrand(r)) * r, a, b, **_QUAD)
        opts["epsabs"] = 1e-13 * size
    val, _ = quad(lambda r: integrand(r) * r, a, b, **opts)
    return 2 * math.pi / tau * val


def _willmore_excess(spec):
    """``int H_S**2 dmu_S - 16 pi`` with all powers of ``phi`` kept."""
    m, R, tau = spec.m, spec.R, spec.tau
    if tau == 0:
        phi = conformal_factor(m, R)
        return 16 * math.pi * ((1 - m / (R * phi)) ** 2 - 1)

    def integrand(r):
        c = _cos_r(r, R, tau)
        phi = 1 + m / (2 * r)
        return -8 * m * c / (R * r * r * phi) + 4 * m * m * c * c / (r ** 4 * phi * phi)

    return _shell(spec, integrand)


def offcenter_willmore(spec, mode="quadrature"):
    """``int H_S**2 dmu_S`` over the off-centre sphere.

    Parameters
    ----------
    spec : SphereSpec
    mode : {"quadrature", "closed", "taylor"}
        ``quadrature`` integrates the exact integrand; ``closed`` is the
        logarithmic expression accurate to ``O(R**-3)``; ``taylor`` its
        expansion to ``O(tau**4 R**-2)``.
    """
    m, R, tau = spec.m, spec.R, spec.tau
    if mode == "quadrature":
        return 16 * math.pi + _willmore_excess(spec)
    base = 16 * math.pi - 32 * math.pi * m / R
    if mode == "closed":
        if tau == 0:
            return base + 32 * math.pi * m * m / R ** 2
        log_term = 6 * math.pi * m * m / (R * R * tau) * math.log((1 + tau) / (1 - tau))
        rat = 4 * math.pi * m * m / R ** 2 * (5 - 3 * tau * tau) / (1 - tau * tau) ** 2
        return base + log_term + rat
    if mode == "taylor":
        return base + 32 * math.pi * m * m / R ** 2 + 32 * math.pi * m * m * tau * tau / R ** 2
    raise ValueError(f"mode must be 'quadrature', 'closed' or 'taylor', not {mode!r}")


def offcenter_area(spec):
    """Schwarzschild area ``int phi**4 dmu_e`` of the off-centre sphere."""
    if spec.tau == 0:
        return centered_quantities(spec.m, spec.R)["area"]
    m = spec.m
    return _shell(spec, lambda r: (1 + m / (2 * r)) ** 4)


def offcenter_barycenter(spec):
    """Barycentres with the area ``|Sigma|_g`` in the denominator.

    Returns
    -------
    dict
        ``a_e``, ``a_g`` (3-vectors), ``area_g``, ``R_g``, ``tau_g``.
    """
    area = offcenter_area(spec)
    axis = np.asarray(spec.axis)
    R, tau, m = spec.R, spec.tau, spec.m
    a_e = spec.center * 4 * math.pi * R * R / area
    if tau == 0:
        a_g = np.zeros(3)
    else:
        mom = _shell(spec, lambda r: (tau * R + R * _cos_theta(r, R, tau)) * (1 + m / (2 * r)) ** 4,
                     cancelling=True)
        a_g = axis * mom / area
    R_g = math.sqrt(area / (4 * math.pi))
    return {"a_e": a_e, "a_g": a_g, "area_g": area, "R_g": R_g,
            "tau_g": float(np.linalg.norm(a_g) / R_g)}


def _dfdtau(spec, h=None):
    """Derivative of the energy excess in ``tau``; Richardson-extrapolated central differences."""
    tau = spec.tau
    if h is None:
        h = min(0.25 * tau, 1e-3) if tau > 0 else 1e-3

    def f(t):
        return _willmore_excess(SphereSpec(spec.m, spec.R, abs(t), spec.axis, 0.999, spec.r_floor))

    def D(step):
        return (f(tau + step) - f(tau - step)) / (2 * step)

    return (4 * D(h / 2) - D(h)) / 3


def _lambda_integral(spec):
    """``int (b . nu_e) r**-2 phi**-1 (d_r . nu_e) dmu_e`` with ``b`` the offset axis."""
    m, R, tau = spec.m, spec.R, spec.tau
    if tau == 0:
        return 0.0

    def integrand(r):
        return _cos_theta(r, R, tau) * _cos_r(r, R, tau) / (r * r * (1 + m / (2 * r)))

    return _shell(spec, integrand, cancelling=True)


def _sphere_fields(spec):
    """Mean curvature and Willmore operator on the off-centre sphere, as functions of ``r``.

    The sphere is round in the flat metric, so ``Acirc_S = 0`` and the
    surface Laplacian is ``phi**-4`` times the flat one. For an
    axisymmetric function ``F(r)`` on the flat sphere,
    ``Lap_e F = -2 tau (2 cos(theta) F_u - 2 R**2 tau sin(theta)**2 F_uu)``
    with ``u = r**2``.
    """
    m, R, tau = spec.m, spec.R, spec.tau
    K = R * R * (1 - tau * tau)

    def fields(r):
        phi = 1 + m / (2 * r)
        p1, p2 = -m / (2 * r * r), m / r ** 3
        A = 2 / (R * phi ** 2)
        A1 = -4 * p1 / (R * phi ** 3)
        A2 = -4 * p2 / (R * phi ** 3) + 12 * p1 * p1 / (R * phi ** 4)
        psi = phi ** -3
        psi1 = -3 * phi ** -4 * p1
        psi2 = 12 * phi ** -5 * p1 * p1 - 3 * phi ** -4 * p2
        D = psi / r ** 3
        D1 = -3 * psi / r ** 4 + psi1 / r ** 3
        D2 = 12 * psi / r ** 5 - 6 * psi1 / r ** 4 + psi2 / r ** 3
        N, N1, N2 = r * r + K, 2 * r, 2.0
        B, B1, B2 = N * D, N1 * D + N * D1, N2 * D + 2 * N1 * D1 + N * D2
        H = A - m / R * B
        H1 = A1 - m / R * B1
        H2 = A2 - m / R * B2
        Fu = H1 / (2 * r)
        Fuu = (H2 - H1 / r) / (4 * r * r)
        ct = _cos_theta(r, R, tau)
        lap_e = -2 * tau * (2 * ct * Fu - 2 * R * R * tau * (1 - ct * ct) * Fuu)
        c = _cos_r(r, R, tau)
        ric_nn = m / r ** 3 * phi ** -6 * (1 - 3 * c * c)
        W = phi ** -4 * lap_e + H * ric_nn
        return phi, ct, H, W

    return fields


def sphere_drift(spec):
    """Exact instantaneous ``d tau_g/dt`` of the off-centre sphere.

    Evaluates both lines of the barycentre evolution identity by
    one-dimensional quadrature, with the exact multiplier
    ``lam = -int W H / int H**2`` of the sphere.

    Returns
    -------
    dict
        ``rate``, ``lambda``, ``first_line``, ``second_line``,
        ``translation_check`` (``int g(b, nu) W dmu``) and
        ``conversion_term`` (``int (b . nu - g(b, nu)) W dmu``).
    """
    if spec.tau == 0:
        raise DomainError("the drift direction is undefined for a centred sphere")
    fields = _sphere_fields(spec)
    R, tau = spec.R, spec.tau
    bary = offcenter_barycenter(spec)
    a_e = float(np.asarray(bary["a_e"]) @ np.asarray(spec.axis))

    def integral(fn):
        def integrand(r):
            phi, ct, H, W = fields(r)
            return fn(phi, ct, H, W) * phi ** 4
        return _shell(spec, integrand, cancelling=True)

    wh = integral(lambda phi, ct, H, W: W * H)
    hh = integral(lambda phi, ct, H, W: H * H)
    lam = -wh / hh
    first = integral(lambda phi, ct, H, W: ct / phi ** 2 * (W + lam * H))
    second = integral(lambda phi, ct, H, W: (tau * R + R * ct - a_e) * H * (W + lam * H))
    trans = integral(lambda phi, ct, H, W: phi ** 2 * ct * W)
    conv = integral(lambda phi, ct, H, W: (phi ** -2 - phi ** 2) * ct * W)
    return {
        "rate": (first + second) / (bary["area_g"] * bary["R_g"]),
        "lambda": lam,
        "first_line": first,
        "second_line": second,
        "translation_check": trans,
        "conversion_term": conv,
    }


def drift_rate(spec, lam=None):
    """Leading-order re-centring rate ``d tau_g/dt`` of a near-round sphere.

    The rate is assembled as ``prefactor * first_line`` with
    ``prefactor = (3 - 2m/R_g) / (|Sigma|_g R_g)`` and ``first_line`` the
    sum of three terms:

    ``translation_term``
        ``int g(b, nu) W dmu = -(1/2) d/ds int H**2 dmu``, the first
        variation along ``x -> x + s b``; ``d/ds`` is taken from the exact
        one-dimensional energy.
    ``conversion_term``
        ``int (b . nu - g(b, nu)) W dmu``: the barycentre identity pairs
        ``W`` with the flat dot product ``b . nu`` while the translation
        speed is ``g(b, nu) = phi**4 b . nu``.
    ``lambda_term``
        ``lam int b . nu H dmu = -2 m lam int (b . nu_e) r**-2 phi**-1
        (d_r . nu_e) dmu_e``.

    Parameters
    ----------
    spec : SphereSpec
    lam : float, optional
        Multiplier; defaults to its leading value ``2 m R**-3``.

    Returns
    -------
    dict
        ``leading_rate`` with every component, ``uncorrected_rate``
        (``-dfds`` as the whole translation contribution, no conversion
        term), ``headline_rate = -160 m**2 R_g**-6 tau_g``, the exact
        instantaneous rate of the sphere (``sphere_rate``) and normalised
        coefficients in units of ``m**2 R**-3 tau``: ``dfds_coefficient``
        (tends to ``64 pi``), ``lambda_coefficient`` (``32 pi / 3``) and
        ``conversion_coefficient`` (``-32 pi / 3``).
    """
    m, R, tau = spec.m, spec.R, spec.tau
    lam = 2 * m / R ** 3 if lam is None else lam
    bary = offcenter_barycenter(spec)
    area, R_g = bary["area_g"], bary["R_g"]
    prefactor = (3 - 2 * m / R_g) / (area * R_g)
    if m == 0 or tau == 0:
        dfds = lam_term = conv = sphere_rate = 0.0
    else:
        dfds = _dfdtau(spec) / R
        lam_term = -2 * m * lam * _lambda_integral(spec)
        exact = sphere_drift(spec)
        conv = exact["conversion_term"]
        sphere_rate = exact["rate"]
    translation = -0.5 * dfds
    first = translation + conv + lam_term
    unit = m * m * tau / R ** 3 if m > 0 and tau > 0 else float("nan")
    return {
        "leading_rate": prefactor * first,
        "first_line": first,
        "dfds": dfds,
        "translation_term": translation,
        "conversion_term": conv,
        "lambda": lam,
        "lambda_term": lam_term,
        "prefactor": prefactor,
        "area_g": area,
        "R_g": R_g,
        "sphere_rate": sphere_rate,
        "uncorrected_rate": prefactor * (-dfds + lam_term),
        "headline_rate": -headline_coefficient * m * m * R_g ** -6 * bary["tau_g"],
        "dfds_coefficient": dfds / unit,
        "lambda_coefficient": lam_term / unit,
        "conversion_coefficient": conv / unit,
    }


def pohozaev_integral(graph, direction, m, dealias=True):
    """``int Rc_S(direction, nu_S) dmu_S`` over a radial graph.

    Vanishes for every star-shaped surface enclosing the origin.
    """
    from .ambient import MetricParams

    d = np.asarray(direction, dtype=float)
    b = geometry_bundle(graph, "schwarzschild", MetricParams(mass=m), dealias)
    ric = schwarzschild_ricci(m, b.x)
    field = np.einsum("...ij,i,...j->...", ric, d, b.normal)
    return integrate(field, b)
