"""Area-preserving Willmore flow of radial graphs.

The normal speed is ``f = W + lam H`` with::

    W   = Lap H + H Rc(nu, nu) + H |Acirc|^2
    lam = int(|grad H|^2 - H^2 Rc(nu, nu) - H^2 |Acirc|^2) / int H^2

so that ``int f H = 0``. Graphs move radially, ``d rho/dt = f / g(omega, nu)``,
which differs from the normal flow only by a tangential reparametrisation.
Every step ends with a uniform rescaling ``rho -> s rho`` that restores the
initial area exactly.
"""

from dataclasses import dataclass, field, replace
import math

import numpy as np

from .ambient import metric_values
from .exceptions import (DegeneracyError, InstabilityError, ProjectionError,
                         StabilityBoundError, StarShapeLossError, WillmoreLabError)
from .spectral import get_grid
from .surface import (RadialGraph, eval_degree, geometry_bundle, gradient_norm2,
                      integrate, laplace_beltrami)

__all__ = [
    "FlowState",
    "StepConfig",
    "StopCriteria",
    "FlowResult",
    "lagrange_multiplier",
    "willmore_speed",
    "radial_velocity",
    "area_of",
    "project_area",
    "stable_dt",
    "step",
    "run_flow",
]


@dataclass(frozen=True)
class FlowState:
    """A surface at time ``t`` together with the area it must keep."""

    graph: RadialGraph
    params: object
    t: float = 0.0
    target_area: float = None
    dealias: bool = True

    def __post_init__(self):
        if self.target_area is None:
            object.__setattr__(self, "target_area", area_of(self.graph, self.params, self.dealias))

    @property
    def bundle(self):
        return geometry_bundle(self.graph, "full", self.params, self.dealias)

    def evolve(self, graph, t):
        return replace(self, graph=graph, t=t)


@dataclass(frozen=True)
class StepConfig:
    """Time-stepping controls.

    ``dt = None`` picks the largest step allowed by the stability bound
    ``dt <= c_stab * (R_min / L)**4``.
    """

    dt: float = None
    scheme: str = "rk4"
    area_tol: float = 1e-9
    dealias: bool = True
    max_newton: int = 20
    c_stab: float = 0.5
    filter_strength: float = 0.0

    def __post_init__(self):
        if self.scheme not in ("rk4", "euler"):
            raise ValueError(f"scheme must be 'rk4' or 'euler', not {self.scheme!r}")
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.c_stab > 0:
            raise ValueError("c_stab must be positive")
        if self.area_tol <= 0 or self.max_newton < 1:
            raise ValueError("area_tol must be positive and max_newton at least 1")


@dataclass(frozen=True)
class StopCriteria:
    T_max: float = math.inf
    residual_tol: float = 0.0
    record_every: int = 1
    max_steps: int = 10_000


@dataclass
class FlowResult:
    """Outcome of :func:`run_flow`."""

    state: FlowState
    records: list
    stop_reason: str
    steps: int
    step_scales: list = field(default_factory=list)
    error: str = None


def lagrange_multiplier(state_or_bundle):
    """Multiplier making the flow area-preserving.

    Parameters
    ----------
    state_or_bundle : FlowState or GeometryBundle
        Geometry in the full flavour.

    Returns
    -------
    float
    """
    b = _bundle(state_or_bundle)
    H = b.H
    h2 = integrate(H * H, b)
    if not h2 > 0:
        raise DegeneracyError("int H^2 vanishes; the multiplier is undefined")
    num = integrate(gradient_norm2(H, b) - H * H * (b.ric_nn + b.acirc2), b)
    return num / h2


def _bundle(obj):
    return obj.bundle if isinstance(obj, FlowState) else obj


def willmore_speed(state_or_bundle):
    """Willmore operator, multiplier and normal speed on the evaluation grid.

    Returns
    -------
    dict
        ``W``, ``speed`` (``W + lam H``) and ``lam``.
    """
    b = _bundle(state_or_bundle)
    H = b.H
    W = laplace_beltrami(H, b) + H * (b.ric_nn + b.acirc2)
    lam = lagrange_multiplier(b)
    return {"W": W, "speed": W + lam * H, "lam": lam}


def _filter(coeffs, L, strength):
    if strength <= 0:
        return coeffs
    cut = 2 * L // 3
    l = np.floor(np.sqrt(np.arange(coeffs.size))).astype(int)
    sigma = np.ones(coeffs.size)
    hi = l > cut
    sigma[hi] = np.exp(-strength * ((l[hi] - cut) / max(L - cut, 1)) ** 8)
    return coeffs * sigma


def radial_velocity(graph, params, dealias=True):
    """Coefficients of ``d rho/dt`` and the normal speed on the evaluation grid."""
    b = geometry_bundle(graph, "full", params, dealias)
    sp = willmore_speed(b)
    wn = b.omega_dot_nu
    if np.any(wn <= 0):
        raise StarShapeLossError("g(omega, nu) <= 0: the surface is no longer a radial graph")
    rate = sp["speed"] / wn
    return b.grid.analyze(rate, lmax=graph.L), sp


def area_of(graph, params, dealias=True):
    """Area in the full metric using only the metric (no curvature)."""
    grid = get_grid(eval_degree(graph.L, dealias))
    d = graph.derivatives_on(grid)
    rho, rt, rp = d["f"], d["t"], d["p"]
    e = lambda s: s[..., None]
    x = e(rho) * grid.omega
    xt = e(rt) * grid.omega + e(rho) * grid.omega_theta
    xp = e(rp) * grid.omega + e(rho) * grid.omega_phi
    g = metric_values(params, x)
    gt = np.einsum("...ij,...j->...i", g, xt)
    gp = np.einsum("...ij,...j->...i", g, xp)
    E = np.einsum("...i,...i->...", xt, gt)
    F = np.einsum("...i,...i->...", xp, gt)
    G = np.einsum("...i,...i->...", xp, gp)
    det = E * G - F * F
    quad = np.outer(grid.gl_weights / grid.sin_theta, np.full(grid.n_phi, 2 * np.pi / grid.n_phi))
    return float(np.sum(np.sqrt(det) * quad))


def project_area(coeffs, params, target, cfg, dealias=True):
    """Rescale ``rho`` uniformly so the full-metric area equals ``target``.

    Secant iteration on the scale ``s``, started from the Euclidean scaling
    law ``dA/ds = 2A`` and run to rounding level, so that the projection is
    a smooth function of the unprojected surface.

    Returns
    -------
    coeffs, s

    Raises
    ------
    ProjectionError
        If the final relative area error exceeds ``cfg.area_tol``.
    """
    graph = RadialGraph(coeffs)
    s0, a0 = 1.0, area_of(graph, params, dealias)
    s1 = 1.0 - (a0 - target) / (2.0 * a0)
    best_s, best_err = s0, abs(a0 - target)
    for _ in range(cfg.max_newton):
        if best_err == 0 or abs(s1 - s0) <= 4 * np.finfo(float).eps * abs(s1):
            break
        a1 = area_of(graph.scaled(s1), params, dealias)
        err = abs(a1 - target)
        if err < best_err:
            best_s, best_err = s1, err
        if a1 == a0:
            break
        s0, a0, s1 = s1, a1, s1 - (a1 - target) * (s1 - s0) / (a1 - a0)
    if not best_err <= cfg.area_tol * target:
        raise ProjectionError(f"area projection failed: relative error {best_err / target:.3e}")
    return best_s * np.asarray(coeffs), best_s


def stable_dt(graph, c_stab=0.5):
    """Largest admissible step ``c_stab * (R_min / L)**4``."""
    return c_stab * (graph.min_radius / graph.L) ** 4


def step(state, cfg):
    """Advance one time step and restore the area.

    Returns
    -------
    new_state : FlowState
    s : float
        Projection scale factor.
    """
    if cfg.dealias != state.dealias:
        raise ValueError("StepConfig.dealias must match the state's dealias flag")
    graph = state.graph
    limit = stable_dt(graph, cfg.c_stab)
    dt = limit if cfg.dt is None else cfg.dt
    if dt > limit * (1 + 1e-12):
        raise StabilityBoundError(
            f"dt={dt:.4g} exceeds the stability bound {limit:.4g} = c_stab (R_min/L)^4"
        )
    params, dl = state.params, state.dealias
    c0 = np.asarray(graph.coeffs)

    def vel(c):
        g = graph if c is c0 else RadialGraph(c)
        return radial_velocity(g, params, dl)[0]

    try:
        with np.errstate(over="raise", invalid="raise"):
            if cfg.scheme == "euler":
                c_new = c0 + dt * vel(c0)
            else:
                k1 = vel(c0)
                k2 = vel(c0 + 0.5 * dt * k1)
                k3 = vel(c0 + 0.5 * dt * k2)
                k4 = vel(c0 + dt * k3)
                c_new = c0 + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    except FloatingPointError as exc:
        raise InstabilityError(f"non-finite values during the step ({exc}); try a smaller dt") from exc
    if not np.all(np.isfinite(c_new)):
        raise InstabilityError("non-finite coefficients; try a smaller dt")
    c_new = _filter(c_new, graph.L, cfg.filter_strength)
    c_new, s = project_area(c_new, params, state.target_area, cfg, dl)
    return state.evolve(RadialGraph(c_new), state.t + dt), s


def run_flow(state, cfg, stop=None, record=None, on_record=None):
    """Iterate :func:`step` and collect diagnostics.

    Parameters
    ----------
    state : FlowState
    cfg : StepConfig
    stop : StopCriteria
    record : callable, optional
        ``record(state, step_scale) -> record``; defaults to
        :func:`willmore_lab.diagnostics.diagnostics_record`.
    on_record : callable, optional
        Called with each new record (streaming output).

    Returns
    -------
    FlowResult
        Stop reason is ``"converged"``, ``"t_max"``, ``"max_steps"`` or
        ``"error"`` (the message is kept in ``error``).
    """
    if stop is None:
        stop = StopCriteria()
    if record is None:
        from .diagnostics import diagnostics_record as record
    records, scales = [], []

    def emit(st, s):
        rec = record(st, s)
        records.append(rec)
        if on_record is not None:
            on_record(rec)
        return rec

    rec = emit(state, 1.0)
    n = 0
    reason, err = "max_steps", None
    while True:
        if stop.residual_tol > 0 and rec.residual < stop.residual_tol:
            reason = "converged"
            break
        if state.t >= stop.T_max * (1 - 1e-12):
            reason = "t_max"
            break
        if n >= stop.max_steps:
            reason = "max_steps"
            break
        try:
            state, s = step(state, cfg)
        except WillmoreLabError as exc:
            reason, err = "error", f"{type(exc).__name__}: {exc}"
            break
        n += 1
        scales.append(s)
        if n % stop.record_every == 0:
            rec = emit(state, s)
        elif stop.residual_tol > 0:
            from .diagnostics import willmore_type_residual
            if willmore_type_residual(state) < stop.residual_tol:
                rec = emit(state, s)
    if records[-1].t != state.t:
        emit(state, scales[-1] if scales else 1.0)
    return FlowResult(state=state, records=records, stop_reason=reason, steps=n,
                      step_scales=scales, error=err)
