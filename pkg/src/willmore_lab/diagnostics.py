"""Monitored scalars of a surface: energies, masses, barycentres, residuals.

Quantities without a flavour qualifier are computed in the full metric.
Barycentres use the area ``|Sigma|_g`` of the full metric in the
denominator for both the Euclidean and the full version::

    a_e = int x dmu_e / |Sigma|_g,      a_g = int x dmu_g / |Sigma|_g,

and the centring parameters use Euclidean vector norms,
``tau_e = |a_e| / R_e`` and ``tau_g = |a_g| / R_g`` with
``R = sqrt(area / 4 pi)`` in the respective metric.
"""

from dataclasses import asdict, dataclass
import math

import numpy as np
from scipy.optimize import least_squares

from .exceptions import DomainError, FitError
from .flow import FlowState, willmore_speed
from .oracle import pohozaev_integral
from .surface import geometry_bundle, integrate
from .ambient import conformal_factor

__all__ = [
    "DiagnosticsRecord",
    "CSV_COLUMNS",
    "hawking_mass",
    "willmore_energy",
    "barycenters",
    "willmore_type_residual",
    "gauss_defect",
    "sphere_fit",
    "tau_evolution_rhs",
    "tangential_ricci_defect",
    "conformal_identity_defects",
    "diagnostics_record",
]

CSV_COLUMNS = ("t", "area_g", "area_e", "R_e", "R_g", "willmore", "hawking_mass", "lambda",
               "tau_e", "tau_g", "acirc_l2", "residual", "gauss_defect", "pohozaev",
               "step_scale_s")


@dataclass(frozen=True)
class DiagnosticsRecord:
    """One time slice of every monitored scalar."""

    t: float
    area_e: float
    area_S: float
    area_g: float
    R_e: float
    R_g: float
    willmore: float
    hawking_mass: float
    lam: float
    a_e: tuple
    a_g: tuple
    tau_e: float
    tau_g: float
    acirc_l2: float
    residual: float
    gauss_defect: float
    pohozaev: float
    step_scale_s: float = 1.0
    fit_center: tuple = None
    fit_radius: float = None
    fit_rms: float = None

    def row(self):
        """Values in :data:`CSV_COLUMNS` order."""
        d = self.as_dict()
        return [d[c] for c in CSV_COLUMNS]

    def as_dict(self):
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return d


def willmore_energy(bundle):
    """``(1/4) int H**2 dmu``."""
    return 0.25 * integrate(bundle.H ** 2, bundle)


def hawking_mass(bundle, area=None):
    """``sqrt(|Sigma|) (16 pi - int H**2) / (16 pi)**1.5``."""
    area = bundle.area if area is None else area
    return math.sqrt(area) * (16 * math.pi - integrate(bundle.H ** 2, bundle)) / (16 * math.pi) ** 1.5


def _moment(bundle):
    return np.einsum("abi,ab->i", bundle.x, bundle.dmu)


def barycenters(graph, params, dealias=True):
    """Barycentres, radii and centring parameters.

    Returns
    -------
    dict
        ``a_e``, ``a_g``, ``area_e``, ``area_g``, ``R_e``, ``R_g``,
        ``tau_e``, ``tau_g``.
    """
    be = geometry_bundle(graph, "euclidean", params, dealias)
    bg = geometry_bundle(graph, "full", params, dealias)
    area_e, area_g = be.area, bg.area
    a_e = _moment(be) / area_g
    a_g = _moment(bg) / area_g
    R_e = math.sqrt(area_e / (4 * math.pi))
    R_g = math.sqrt(area_g / (4 * math.pi))
    return {"a_e": a_e, "a_g": a_g, "area_e": area_e, "area_g": area_g, "R_e": R_e, "R_g": R_g,
            "tau_e": float(np.linalg.norm(a_e) / R_e), "tau_g": float(np.linalg.norm(a_g) / R_g)}


def willmore_type_residual(state):
    """``||W + lam H||`` in ``L2`` of the full metric."""
    b = state.bundle
    f = willmore_speed(b)["speed"]
    return math.sqrt(max(integrate(f * f, b), 0.0))


def gauss_defect(bundle):
    """``16 pi - int H**2 + 2 int |Acirc|**2 + 4 int G(nu, nu)`` (zero for spheres)."""
    return (16 * math.pi - integrate(bundle.H ** 2, bundle) + 2 * integrate(bundle.acirc2, bundle)
            + 4 * integrate(bundle.einstein_nn, bundle))


def sphere_fit(graph, params=None, dealias=True):
    """Weighted least-squares round sphere through the graph.

    Minimises ``sum w (|x - c| - r)**2`` with ``w`` the Euclidean area
    weights of the nodes.

    Returns
    -------
    dict
        ``center``, ``radius``, ``rms`` (weighted) and ``ratio``
        ``= rms / (radius ||Acirc_e||)``, ``None`` when ``Acirc_e`` vanishes.
    """
    b = geometry_bundle(graph, "euclidean", params, dealias)
    x = b.x.reshape(-1, 3)
    w = b.dmu.ravel()
    sw = np.sqrt(w / w.sum())
    c0 = x.T @ w / w.sum()
    r0 = float(np.sum(np.linalg.norm(x - c0, axis=1) * w) / w.sum())
    scale = max(r0, 1.0)

    def resid(p):
        return sw * (np.linalg.norm(x - p[:3] * scale, axis=1) / scale - p[3])

    sol = least_squares(resid, np.r_[c0 / scale, r0 / scale], method="lm", xtol=1e-15, ftol=1e-15,
                        gtol=1e-15, max_nfev=2000)
    if not sol.success:
        raise FitError(f"sphere fit did not converge: {sol.message}")
    center = sol.x[:3] * scale
    radius = sol.x[3] * scale
    rms = float(np.sqrt(np.sum(resid(sol.x) ** 2))) * scale
    acirc = math.sqrt(max(integrate(b.acirc2, b), 0.0))
    ratio = rms / (radius * acirc) if acirc > 1e-14 else None
    return {"center": center, "radius": float(radius), "rms": rms, "ratio": ratio}


def tau_evolution_rhs(state):
    """Instantaneous ``d tau_g/dt`` along the flow from the current geometry.

    ``(1/(|Sigma|_g R_g)) b_g . [int nu f dmu + int (x - a_e) H f dmu]`` with
    ``f = W + lam H`` and ``b_g = a_g / |a_g|``.

    Raises
    ------
    DomainError
        If ``tau_g = 0`` so that ``b_g`` is undefined.
    """
    bary = barycenters(state.graph, state.params, state.dealias)
    a_g = bary["a_g"]
    na = np.linalg.norm(a_g)
    if not na > 1e-14 * bary["R_g"]:
        raise DomainError("tau_g = 0: the drift direction b_g is undefined")
    b = state.bundle
    f = willmore_speed(b)["speed"]
    v = (np.einsum("abi,ab->i", b.normal, f * b.dmu)
         + np.einsum("abi,ab->i", b.x - bary["a_e"], b.H * f * b.dmu))
    return float(a_g @ v / na) / (bary["area_g"] * bary["R_g"])


def tangential_ricci_defect(graph, m, dealias=True):
    """Nodewise ``r**6 phi**12 |Rc_S(nu_S, .)^T|**2_S - 9 m**2 c**2 (1 - c**2)``.

    ``c = d_r . nu_e``; the difference vanishes identically in Schwarzschild.
    """
    from .ambient import MetricParams

    p = MetricParams(mass=m)
    bs = geometry_bundle(graph, "schwarzschild", p, dealias)
    be = geometry_bundle(graph, "euclidean", p, dealias)
    r = np.linalg.norm(bs.x, axis=-1)
    c = np.einsum("...i,...i->...", be.normal, be.x) / r
    phi = conformal_factor(m, r)
    return r ** 6 * phi ** 12 * bs.ric_tan2 - 9 * m * m * c * c * (1 - c * c)


def conformal_identity_defects(graph, m, dealias=True):
    """Relative defects of the flat-to-Schwarzschild comparison identities.

    With ``c = d_r . nu_e`` the identities are ``nu_S = phi**-2 nu_e``,
    ``|Acirc_S|_S**2 = phi**-4 |Acirc_e|**2``, ``dmu_S = phi**4 dmu_e`` and
    ``H_S = phi**-2 H_e - 2 m r**-2 phi**-3 c``. Each entry is a nodewise
    maximum, scaled to be dimensionless.
    """
    from .ambient import MetricParams

    p = MetricParams(mass=m)
    bs = geometry_bundle(graph, "schwarzschild", p, dealias)
    be = geometry_bundle(graph, "euclidean", p, dealias)
    r = np.linalg.norm(be.x, axis=-1)
    c = np.einsum("...i,...i->...", be.normal, be.x) / r
    phi = conformal_factor(m, r)
    scale = graph.mean_radius
    e = lambda a: a[..., None]
    h_rel = phi ** -2 * be.H - 2 * m * c / (r * r * phi ** 3)
    return {
        "normal": float(np.max(np.abs(bs.normal - e(phi ** -2) * be.normal))),
        "acirc": float(np.max(np.abs(bs.acirc2 - phi ** -4 * be.acirc2))) * scale ** 2,
        "area_element": float(np.max(np.abs(bs.dmu - phi ** 4 * be.dmu)) / np.max(bs.dmu)),
        "mean_curvature": float(np.max(np.abs(bs.H - h_rel))) * scale,
    }


def diagnostics_record(state, step_scale=1.0, fit=False):
    """Assemble a :class:`DiagnosticsRecord` for ``state``."""
    if not isinstance(state, FlowState):
        raise TypeError("diagnostics_record needs a FlowState")
    params = state.params
    b = state.bundle
    bary = barycenters(state.graph, params, state.dealias)
    sp = willmore_speed(b)
    f = sp["speed"]
    area_S = geometry_bundle(state.graph, "schwarzschild", params, state.dealias).area \
        if params.mass > 0 else bary["area_e"]
    direction = bary["a_g"] / np.linalg.norm(bary["a_g"]) if bary["tau_g"] > 1e-14 else np.array([0, 0, 1.0])
    poh = pohozaev_integral(state.graph, direction, params.mass, state.dealias) if params.mass > 0 else 0.0
    rec = dict(
        t=float(state.t), area_e=bary["area_e"], area_S=area_S, area_g=bary["area_g"],
        R_e=bary["R_e"], R_g=bary["R_g"], willmore=willmore_energy(b),
        hawking_mass=hawking_mass(b), lam=float(sp["lam"]),
        a_e=tuple(float(v) for v in bary["a_e"]), a_g=tuple(float(v) for v in bary["a_g"]),
        tau_e=bary["tau_e"], tau_g=bary["tau_g"],
        acirc_l2=math.sqrt(max(integrate(b.acirc2, b), 0.0)),
        residual=math.sqrt(max(integrate(f * f, b), 0.0)),
        gauss_defect=gauss_defect(b), pohozaev=float(poh), step_scale_s=float(step_scale),
    )
    if fit:
        sf = sphere_fit(state.graph, params, state.dealias)
        rec.update(fit_center=tuple(float(v) for v in sf["center"]), fit_radius=sf["radius"],
                   fit_rms=sf["rms"])
    return DiagnosticsRecord(**rec)
