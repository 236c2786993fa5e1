"""Ambient 3-metrics on the chart at infinity and their curvature.

The metric is ``g = phi**4 * delta + h`` with ``phi = 1 + m/(2r)``. The
perturbation ``h`` comes from a small catalogue of analytic families whose
derivatives are coded by hand:

``zero``
    ``h = 0``.
``isotropic``
    ``h_ij = eta r^-2 delta_ij``.
``radial``
    ``h_ij = eta r^-4 x_i x_j``.
``tracefree``
    ``h_ij = eta r^-2 Q_ij`` with ``Q`` constant, symmetric and trace-free
    (default ``diag(1, -1, 0)``); not spherically symmetric.

All batch routines take points of shape ``(..., 3)`` and return arrays with
the same leading shape. Derivative indices always come last:
``dg[..., i, j, k] = d_k g_ij`` and ``ddg[..., i, j, k, l] = d_k d_l g_ij``.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigurationError, DomainError

__all__ = [
    "FAMILIES",
    "MetricParams",
    "MetricJet",
    "CurvatureData",
    "conformal_factor",
    "metric_jet_at",
    "curvature_at",
    "metric_values",
    "metric_jets",
    "curvature_fields",
    "schwarzschild_ricci",
    "static_potential",
    "perturbation_jets",
    "decay_report",
]

FAMILIES = ("zero", "isotropic", "radial", "tracefree")

_I3 = np.eye(3)


@dataclass(frozen=True)
class MetricParams:
    """Mass, decay coefficient and perturbation family of the ambient metric.

    Parameters
    ----------
    mass : float
        Schwarzschild mass ``m``; ``0`` selects flat space.
    eta : float
        Decay coefficient; ``eta = 0`` makes the perturbation vanish.
    family : str
        One of :data:`FAMILIES`.
    family_params : dict
        Family-specific parameters (``Q`` for ``tracefree``).
    r_floor : float, optional
        Smallest admissible chart radius. Defaults to ``1.1 m / 2``.
    """

    mass: float = 1.0
    eta: float = 0.0
    family: str = "zero"
    family_params: dict = field(default_factory=dict)
    r_floor: float = None

    def __post_init__(self):
        if not np.isfinite(self.mass) or self.mass < 0:
            raise ConfigurationError(f"mass must be non-negative, got {self.mass}")
        if not np.isfinite(self.eta) or self.eta < 0:
            raise ConfigurationError(f"eta must be non-negative, got {self.eta}")
        if self.family not in FAMILIES:
            raise ConfigurationError(
                f"unknown metric family {self.family!r}; available: {', '.join(FAMILIES)}"
            )
        if self.family == "tracefree":
            q = self.tracefree_matrix
            if not np.allclose(q, q.T) or abs(np.trace(q)) > 1e-12:
                raise ConfigurationError("tracefree family needs a symmetric trace-free Q")
        if self.r_floor is None:
            floor = 1.1 * self.mass / 2 if self.mass > 0 else 1e-8
            object.__setattr__(self, "r_floor", floor)
        elif self.r_floor <= 0:
            raise ConfigurationError("r_floor must be positive")

    @property
    def tracefree_matrix(self):
        return np.asarray(self.family_params.get("Q", np.diag([1.0, -1.0, 0.0])), dtype=float)

    @property
    def has_perturbation(self):
        return self.eta > 0 and self.family != "zero"

    def schwarzschild(self):
        """The same mass with the perturbation switched off."""
        return MetricParams(mass=self.mass, r_floor=self.r_floor)

    def euclidean(self):
        return MetricParams(mass=0.0, r_floor=self.r_floor)

    def to_dict(self):
        fp = {k: np.asarray(v).tolist() for k, v in self.family_params.items()}
        return {"mass": self.mass, "eta": self.eta, "family": self.family,
                "family_params": fp, "r_floor": self.r_floor}


@dataclass(frozen=True)
class MetricJet:
    point: np.ndarray
    g: np.ndarray
    dg: np.ndarray
    ddg: np.ndarray


@dataclass(frozen=True)
class CurvatureData:
    ricci: np.ndarray
    scalar: float
    christoffels: np.ndarray
    potential_hessian_defect: np.ndarray = None


def conformal_factor(m, r):
    """``phi = 1 + m / (2 r)``."""
    return 1.0 + m / (2.0 * np.asarray(r, dtype=float))


def _radius(x, params):
    r = np.linalg.norm(x, axis=-1)
    if np.any(r < params.r_floor):
        raise DomainError(
            f"point with r={np.min(r):.6g} lies below r_floor={params.r_floor:.6g}"
        )
    return r


def _radial_power_jets(x, r, p):
    """Derivatives of ``r**p`` up to third order."""
    d = _I3
    rp = r ** p
    f1 = p * r ** (p - 2)
    f2 = p * (p - 2) * r ** (p - 4)
    f3 = p * (p - 2) * (p - 4) * r ** (p - 6)
    d1 = f1[..., None] * x
    d2 = f1[..., None, None] * d + f2[..., None, None] * np.einsum("...k,...l->...kl", x, x)
    sym = (np.einsum("kl,...m->...klm", d, x) + np.einsum("km,...l->...klm", d, x)
           + np.einsum("lm,...k->...klm", d, x))
    d3 = f2[..., None, None, None] * sym + f3[..., None, None, None] * np.einsum(
        "...k,...l,...m->...klm", x, x, x)
    return rp, d1, d2, d3


def perturbation_jets(params, x, order=2):
    """Perturbation ``h`` and its derivatives up to ``order`` (at most 3).

    Returns a list ``[h, dh, ddh, (dddh)]`` with derivative indices last.
    """
    x = np.asarray(x, dtype=float)
    lead = x.shape[:-1]
    shapes = [lead + (3, 3) + (3,) * j for j in range(order + 1)]
    if not params.has_perturbation:
        return [np.zeros(s) for s in shapes]
    r = np.linalg.norm(x, axis=-1)
    eta = params.eta
    if params.family in ("isotropic", "tracefree"):
        P = _I3 if params.family == "isotropic" else params.tracefree_matrix
        s = _radial_power_jets(x, r, -2.0)
        out = [eta * np.einsum("ij,...->...ij", P, s[0])]
        for j in range(1, order + 1):
            out.append(eta * np.einsum("ij,...K->...ijK", P, s[j].reshape(lead + (-1,))).reshape(shapes[j]))
        return out
    # radial: h_ij = eta * r^-4 * x_i x_j, Leibniz with P_ij = x_i x_j
    s0, s1, s2, s3 = _radial_power_jets(x, r, -4.0)
    P0 = np.einsum("...i,...j->...ij", x, x)
    P1 = np.einsum("ik,...j->...ijk", _I3, x) + np.einsum("...i,jk->...ijk", x, _I3)
    P2 = np.broadcast_to(np.einsum("ik,jl->ijkl", _I3, _I3) + np.einsum("il,jk->ijkl", _I3, _I3),
                         lead + (3, 3, 3, 3))
    h = s0[..., None, None] * P0
    dh = np.einsum("...ijk,...->...ijk", P1, s0) + np.einsum("...ij,...k->...ijk", P0, s1)
    out = [eta * h, eta * dh]
    if order >= 2:
        ddh = (np.einsum("...ijkl,...->...ijkl", P2, s0)
               + np.einsum("...ijk,...l->...ijkl", P1, s1)
               + np.einsum("...ijl,...k->...ijkl", P1, s1)
               + np.einsum("...ij,...kl->...ijkl", P0, s2))
        out.append(eta * ddh)
    if order >= 3:
        dddh = (np.einsum("...ijkl,...n->...ijkln", P2, s1)
                + np.einsum("...ijkn,...l->...ijkln", P2, s1)
                + np.einsum("...ijln,...k->...ijkln", P2, s1)
                + np.einsum("...ijk,...ln->...ijkln", P1, s2)
                + np.einsum("...ijl,...kn->...ijkln", P1, s2)
                + np.einsum("...ijn,...kl->...ijkln", P1, s2)
                + np.einsum("...ij,...kln->...ijkln", P0, s3))
        out.append(eta * dddh)
    return out


def _phi_jets(m, x, r):
    """``phi`` with its gradient and Hessian."""
    phi = conformal_factor(m, r)
    r3 = r ** 3
    dphi = -0.5 * m * x / r3[..., None]
    ddphi = -0.5 * m * (_I3 / r3[..., None, None]
                        - 3.0 * np.einsum("...k,...l->...kl", x, x) / (r ** 5)[..., None, None])
    return phi, dphi, ddphi


def metric_values(params, x):
    """Metric components only, shape (..., 3, 3)."""
    x = np.asarray(x, dtype=float)
    r = _radius(x, params)
    g = (conformal_factor(params.mass, r) ** 4)[..., None, None] * _I3
    if params.has_perturbation:
        g = g + perturbation_jets(params, x, order=0)[0]
    return g


def metric_jets(params, x):
    """Vectorised 2-jet ``(g, dg, ddg)`` at chart points ``x`` of shape (..., 3)."""
    x = np.asarray(x, dtype=float)
    r = _radius(x, params)
    m = params.mass
    phi, dphi, ddphi = _phi_jets(m, x, r)
    conf = phi ** 4
    dconf = 4.0 * (phi ** 3)[..., None] * dphi
    ddconf = (12.0 * (phi ** 2)[..., None, None] * np.einsum("...k,...l->...kl", dphi, dphi)
              + 4.0 * (phi ** 3)[..., None, None] * ddphi)
    g = conf[..., None, None] * _I3
    dg = np.einsum("ij,...k->...ijk", _I3, dconf)
    ddg = np.einsum("ij,...kl->...ijkl", _I3, ddconf)
    if params.has_perturbation:
        h, dh, ddh = perturbation_jets(params, x, order=2)
        g = g + h
        dg = dg + dh
        ddg = ddg + ddh
    return g, dg, ddg


def _conformal_jets(params, x):
    """``Psi`` with gradient and Hessian when ``g = Psi delta``, else None."""
    if params.has_perturbation and params.family != "isotropic":
        return None
    x = np.asarray(x, dtype=float)
    r = _radius(x, params)
    phi, dphi, ddphi = _phi_jets(params.mass, x, r)
    psi = phi ** 4
    dpsi = 4.0 * (phi ** 3)[..., None] * dphi
    ddpsi = (12.0 * (phi ** 2)[..., None, None] * np.einsum("...k,...l->...kl", dphi, dphi)
             + 4.0 * (phi ** 3)[..., None, None] * ddphi)
    if params.has_perturbation:
        s0, s1, s2, _ = _radial_power_jets(x, r, -2.0)
        psi = psi + params.eta * s0
        dpsi = dpsi + params.eta * s1
        ddpsi = ddpsi + params.eta * s2
    return psi, dpsi, ddpsi


def _conformal_curvature(psi, dpsi, ddpsi, with_ricci):
    """Curvature of ``g = exp(2u) delta`` with ``u = log(Psi)/2``."""
    du = dpsi / (2.0 * psi)[..., None]
    ddu = ddpsi / (2.0 * psi)[..., None, None] - 2.0 * np.einsum("...i,...j->...ij", du, du)
    g = psi[..., None, None] * _I3
    ginv = (1.0 / psi)[..., None, None] * _I3
    gamma = (np.einsum("ki,...j->...kij", _I3, du) + np.einsum("kj,...i->...kij", _I3, du)
             - np.einsum("ij,...k->...kij", _I3, du))
    out = {"g": g, "ginv": ginv, "gamma": gamma}
    if with_ricci:
        lap = np.trace(ddu, axis1=-2, axis2=-1)
        grad2 = np.einsum("...i,...i->...", du, du)
        ricci = (-(ddu - np.einsum("...i,...j->...ij", du, du))
                 - (lap + grad2)[..., None, None] * _I3)
        out["ricci"] = ricci
        out["scalar"] = (-4.0 * lap - 2.0 * grad2) / psi
    return out


def curvature_fields(params, x, with_ricci=True, generic=False):
    """Metric, inverse, Christoffels, and optionally Ricci and scalar curvature.

    Returns a dict with keys ``g``, ``ginv``, ``gamma`` (``gamma[..., k, i, j]
    = Gamma^k_ij``) and, if requested, ``ricci`` and ``scalar``. Conformally
    flat metrics take a closed-form shortcut unless ``generic`` is set.
    """
    if not generic:
        conf = _conformal_jets(params, x)
        if conf is not None:
            return _conformal_curvature(*conf, with_ricci)
    g, dg, ddg = metric_jets(params, x)
    ginv = np.linalg.inv(g)
    # first kind: G[l, i, j] = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
    first = 0.5 * (np.einsum("...jli->...lij", dg) + np.einsum("...ilj->...lij", dg)
                   - np.einsum("...ijl->...lij", dg))
    gamma = np.einsum("...kl,...lij->...kij", ginv, first)
    out = {"g": g, "ginv": ginv, "gamma": gamma}
    if not with_ricci:
        return out
    # d_m of the first-kind symbols
    dfirst = 0.5 * (np.einsum("...jlim->...lijm", ddg) + np.einsum("...iljm->...lijm", ddg)
                    - np.einsum("...ijlm->...lijm", ddg))
    dginv = -np.einsum("...ka,...abm,...bl->...klm", ginv, dg, ginv)
    dgamma = (np.einsum("...klm,...lij->...kijm", dginv, first)
              + np.einsum("...kl,...lijm->...kijm", ginv, dfirst))
    ricci = (np.einsum("...kijk->...ij", dgamma) - np.einsum("...kikj->...ij", dgamma)
             + np.einsum("...kkl,...lij->...ij", gamma, gamma)
             - np.einsum("...kjl,...lik->...ij", gamma, gamma))
    ricci = 0.5 * (ricci + np.swapaxes(ricci, -1, -2))
    out["ricci"] = ricci
    out["scalar"] = np.einsum("...ij,...ij->...", ginv, ricci)
    return out


def schwarzschild_ricci(m, x):
    """Closed-form ``Rc_S = m r^-3 phi^-2 (delta - 3 xhat xhat)``."""
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    xh = x / r[..., None]
    pref = m / (r ** 3 * conformal_factor(m, r) ** 2)
    return pref[..., None, None] * (_I3 - 3.0 * np.einsum("...i,...j->...ij", xh, xh))


def static_potential(m, x):
    """Static potential ``f = (2 - phi)/phi`` with gradient and Hessian."""
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    phi, dphi, ddphi = _phi_jets(m, x, r)
    f = (2.0 - phi) / phi
    df = -2.0 * dphi / (phi ** 2)[..., None]
    ddf = (4.0 * np.einsum("...k,...l->...kl", dphi, dphi) / (phi ** 3)[..., None, None]
           - 2.0 * ddphi / (phi ** 2)[..., None, None])
    return f, df, ddf


def metric_jet_at(params, point):
    """Closed-form 2-jet of the ambient metric at one chart point.

    Examples
    --------
    >>> jet = metric_jet_at(MetricParams(mass=1.0), [10.0, 0.0, 0.0])
    >>> round(float(jet.g[0, 0]), 8)
    1.21550625
    """
    point = np.asarray(point, dtype=float)
    if point.shape != (3,):
        raise ValueError("point must be a 3-vector")
    g, dg, ddg = metric_jets(params, point)
    return MetricJet(point=point, g=g, dg=dg, ddg=ddg)


def curvature_at(params, point):
    """Christoffels, Ricci and scalar curvature assembled from the 2-jet.

    For exact Schwarzschild (no perturbation, ``m > 0``) the static defect
    ``-Hess f + f Rc`` of the potential ``f = (2 - phi)/phi`` is included.
    """
    point = np.asarray(point, dtype=float)
    if point.shape != (3,):
        raise ValueError("point must be a 3-vector")
    c = curvature_fields(params, point, generic=True)
    defect = None
    if params.mass > 0 and not params.has_perturbation:
        f, df, ddf = static_potential(params.mass, point)
        hess = ddf - np.einsum("kij,k->ij", c["gamma"], df)
        defect = -hess + f * c["ricci"]
    return CurvatureData(ricci=c["ricci"], scalar=float(c["scalar"]),
                         christoffels=c["gamma"], potential_hessian_defect=defect)


def _direction_sample(n):
    """Deterministic, nearly uniform unit vectors (Fibonacci lattice)."""
    k = np.arange(n) + 0.5
    z = 1.0 - 2.0 * k / n
    az = np.pi * (1.0 + 5 ** 0.5) * k
    s = np.sqrt(1.0 - z * z)
    return np.stack([s * np.cos(az), s * np.sin(az), z], axis=-1)


def decay_report(params, radii, n_directions=64, rtol=1e-9):
    """Measure the decay of the perturbation and of the scalar curvature.

    For each radius the maxima over a fixed direction sample of
    ``r**(2+j) |d^j h|`` (Frobenius norm in the chart, ``j = 0..3``) and of
    ``r**5 |Sc|`` are reported.

    Two checks are made for ``j <= 3``: ``literal_ok`` compares the scaled
    norms with ``eta`` itself, ``rate_ok`` only requires the scaled norms not
    to grow with ``r`` (the decay rate). The scalar-curvature bound is
    measured but never enforced.

    Returns
    -------
    dict
        ``radii``, ``h_scaled`` (shape ``(n_radii, 4)``), ``sc_scaled``,
        ``literal_ok`` and ``rate_ok`` (per ``j``), ``sc_ok``, ``norm``.
    """
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    if radii.size == 0:
        raise ValueError("radii must not be empty")
    if np.any(radii < params.r_floor):
        raise DomainError("all radii must be at least r_floor")
    dirs = _direction_sample(n_directions)
    h_scaled = np.zeros((radii.size, 4))
    sc_scaled = np.zeros(radii.size)
    for i, r in enumerate(radii):
        x = r * dirs
        jets = perturbation_jets(params, x, order=3)
        for j, t in enumerate(jets):
            norms = np.sqrt(np.sum(t.reshape(len(x), -1) ** 2, axis=1))
            h_scaled[i, j] = r ** (2 + j) * norms.max()
        sc = curvature_fields(params, x)["scalar"]
        sc_scaled[i] = r ** 5 * np.abs(sc).max()
    eta = params.eta
    slack = rtol * max(eta, 1.0)
    literal_ok = np.all(h_scaled <= eta + slack, axis=0)
    if radii.size > 1:
        order = np.argsort(radii)
        hs = h_scaled[order]
        rate_ok = np.all(hs[1:] <= hs[:-1] * (1 + rtol) + slack, axis=0)
    else:
        rate_ok = np.ones(4, dtype=bool)
    return {
        "radii": radii,
        "h_scaled": h_scaled,
        "sc_scaled": sc_scaled,
        "literal_ok": literal_ok,
        "rate_ok": rate_ok,
        "sc_ok": bool(np.all(sc_scaled <= eta + slack)),
        "norm": "frobenius",
    }
