"""Ball and sphere integral averages of the profile and its gradient.

All n >= 2 averages reduce to 1D integrals in the radius t against the
cap kernels; n = 1 uses exact piecewise integration of the even extension
F(|u|).  Quadrature nodes always include profile knots and cap regime
boundaries, with a geometric presplit at the regime endpoints where the
kernels have square-root behavior.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import AmbientParams, RadialProfile
from .geometry import AxisBall, cap_area, cap_first_moment, sin_power_total
from .quadrature import QuadratureConfig, geometric_presplit, integrate_adaptive


@dataclass(frozen=True)
class RadialWeight:
    """Weight w(t) = t / s."""

    s: float


@dataclass(frozen=True)
class LevelSetWeight:
    """Weight = indicator of a union of radius intervals."""

    intervals: tuple


def _ball_range(profile: RadialProfile, ball: AxisBall):
    lo = max(0.0, ball.d - ball.r)
    hi = min(ball.d + ball.r, profile.support_radius)
    return lo, hi


_GEO_OFFSETS = 0.25 ** np.arange(1, 11)


def _ball_breakpoints(profile: RadialProfile, ball: AxisBall, lo: float, hi: float):
    """Knots plus regime boundaries, refined toward the sqrt endpoints."""
    d, r = ball.d, ball.r
    i0 = np.searchsorted(profile.knots_t, lo, side="right")
    i1 = np.searchsorted(profile.knots_t, hi, side="left")
    segs = [np.array((lo, hi)), profile.knots_t[i0:i1]]
    inner = abs(d - r)
    length = hi - lo
    if lo <= inner < hi:
        segs.append(inner + length * _GEO_OFFSETS)
        if inner > lo:
            segs.append(np.array((inner,)))
    if hi == d + r:
        segs.append(hi - length * _GEO_OFFSETS)
    return np.unique(np.clip(np.concatenate(segs), lo, hi))


def _odd_antiderivative(profile: RadialProfile, u):
    """Integral of F(|w|) over [0, u], odd in u."""
    u = np.asarray(u, dtype=float)
    return np.sign(u) * profile.integral_to(np.abs(u))


def _slope_moment_to(profile: RadialProfile, c: float) -> float:
    """Integral of t F'(t) over [0, c], exact."""
    t0 = np.minimum(profile.knots_t[:-1], c)
    t1 = np.minimum(profile.knots_t[1:], c)
    return float(np.sum(profile.slopes * (t1 * t1 - t0 * t0)) / 2.0)


def _abs_slope_weighted_to(profile: RadialProfile, c: float, weight) -> float:
    """Integral of |F'(t)| w(t) over [0, c], exact for the supported weights."""
    t0 = np.minimum(profile.knots_t[:-1], c)
    t1 = np.minimum(profile.knots_t[1:], c)
    g = np.abs(profile.slopes)
    if weight is None:
        return float(np.sum(g * (t1 - t0)))
    if isinstance(weight, RadialWeight):
        return float(np.sum(g * (t1 * t1 - t0 * t0)) / (2.0 * weight.s))
    if isinstance(weight, LevelSetWeight):
        total = 0.0
        for a, b in weight.intervals:
            seg = np.maximum(0.0, np.minimum(t1, b) - np.maximum(t0, a))
            total += float(np.sum(g * seg))
        return total
    raise TypeError(f"unsupported weight {weight!r}")


def _even_integral(fn_to, a: float, b: float) -> float:
    """Integral over [a, b] of an even integrand given its [0, c] primitive."""
    if a >= 0.0:
        return fn_to(b) - fn_to(a)
    return fn_to(b) + fn_to(-a)


def ball_average(profile: RadialProfile, ball: AxisBall, params: AmbientParams,
                 qcfg: QuadratureConfig) -> float:
    """Integral average of |f| over the ball."""
    d, r = ball.d, ball.r
    if params.n == 1:
        vals = _odd_antiderivative(profile, np.array([d + r, d - r]))
        return float(vals[0] - vals[1]) / (2.0 * r)
    lo, hi = _ball_range(profile, ball)
    if hi <= lo:
        return 0.0
    volume = params.omega_n * r ** params.n
    scale = profile.max_value * params.sigma_n * hi ** (params.n - 1) * (hi - lo)
    cfg = QuadratureConfig(qcfg.rel_tol, max(qcfg.abs_tol, qcfg.rel_tol * scale),
                           qcfg.max_subdivisions)
    fun = lambda t: profile.value(t) * cap_area(t, d, r, params)
    return integrate_adaptive(fun, _ball_breakpoints(profile, ball, lo, hi), cfg) / volume


def sphere_average(profile: RadialProfile, ball: AxisBall, params: AmbientParams,
                   qcfg: QuadratureConfig) -> float:
    """Integral average of |f| over the boundary sphere of the ball."""
    d, r = ball.d, ball.r
    if params.n == 1:
        return 0.5 * float(profile.value(abs(d - r)) + profile.value(d + r))
    if d == 0.0:
        return float(profile.value(r))
    # rho(phi) = |d*e + r*omega(phi)| decreases from d+r to |d-r|
    def rho_vals(phi):
        return np.sqrt(np.maximum(d * d + r * r + 2.0 * d * r * np.cos(phi), 0.0))

    pts = [0.0, np.pi]
    for t in profile.knots_t:
        if abs(d - r) < t < d + r:
            u = (t * t - d * d - r * r) / (2.0 * d * r)
            pts.append(float(np.arccos(np.clip(u, -1.0, 1.0))))
    k = params.n - 2
    fun = lambda phi: profile.value(rho_vals(phi)) * np.sin(phi) ** k
    scale = profile.max_value * np.pi
    cfg = QuadratureConfig(qcfg.rel_tol, max(qcfg.abs_tol, qcfg.rel_tol * scale),
                           qcfg.max_subdivisions)
    return integrate_adaptive(fun, np.unique(pts), cfg) / sin_power_total(k)


def gradient_axial_component(profile: RadialProfile, ball: AxisBall, params: AmbientParams,
                             qcfg: QuadratureConfig) -> float:
    """Axial component of the average gradient over the ball.

    By rotational symmetry this is the only nonzero component of the
    vector average of Df; it vanishes identically when d = 0.
    """
    d, r = ball.d, ball.r
    if params.n == 1:
        return float(profile.value(d + r) - profile.value(abs(d - r))) / (2.0 * r)
    if d == 0.0:
        return 0.0
    lo, hi = _ball_range(profile, ball)
    if hi <= lo:
        return 0.0
    volume = params.omega_n * r ** params.n
    slope_max = float(np.max(np.abs(profile.slopes)))
    scale = slope_max * params.sigma_n * hi ** (params.n - 1) * (hi - lo)
    cfg = QuadratureConfig(qcfg.rel_tol, max(qcfg.abs_tol, qcfg.rel_tol * scale),
                           qcfg.max_subdivisions)
    fun = lambda t: profile.slope(t) * cap_first_moment(t, d, r, params)
    return integrate_adaptive(fun, _ball_breakpoints(profile, ball, lo, hi), cfg) / volume


def gradient_radial_moment(profile: RadialProfile, ball: AxisBall, params: AmbientParams,
                           qcfg: QuadratureConfig) -> float:
    """Average of Df(y) . y over the ball."""
    d, r = ball.d, ball.r
    if params.n == 1:
        val = _even_integral(lambda c: _slope_moment_to(profile, c), d - r, d + r)
        return val / (2.0 * r)
    lo, hi = _ball_range(profile, ball)
    if hi <= lo:
        return 0.0
    volume = params.omega_n * r ** params.n
    slope_max = float(np.max(np.abs(profile.slopes)))
    scale = slope_max * hi * params.sigma_n * hi ** (params.n - 1) * (hi - lo)
    cfg = QuadratureConfig(qcfg.rel_tol, max(qcfg.abs_tol, qcfg.rel_tol * scale),
                           qcfg.max_subdivisions)
    fun = lambda t: profile.slope(t) * t * cap_area(t, d, r, params)
    return integrate_adaptive(fun, _ball_breakpoints(profile, ball, lo, hi), cfg) / volume


def weighted_gradient_average(profile: RadialProfile, ball: AxisBall, params: AmbientParams,
                              qcfg: QuadratureConfig, weight=None) -> float:
    """Average of |Df(y)| w(|y|) over the ball.

    weight: None for w = 1, :class:`RadialWeight` for w(t) = t/s, or
    :class:`LevelSetWeight` for an indicator of radius intervals.
    """
    d, r = ball.d, ball.r
    if params.n == 1:
        val = _even_integral(lambda c: _abs_slope_weighted_to(profile, c, weight), d - r, d + r)
        return val / (2.0 * r)
    lo, hi = _ball_range(profile, ball)
    if hi <= lo:
        return 0.0
    volume = params.omega_n * r ** params.n
    if isinstance(weight, LevelSetWeight):
        # restrict the domain to the level set so the integrand stays continuous
        total = 0.0
        for a, b in weight.intervals:
            a2, b2 = max(lo, a), min(hi, b)
            if b2 <= a2:
                continue
            pts = _ball_breakpoints(profile, ball, lo, hi)
            pts = np.unique(np.clip(np.concatenate((pts, [a2, b2])), a2, b2))
            fun = lambda t: np.abs(profile.slope(t)) * cap_area(t, d, r, params)
            slope_max = float(np.max(np.abs(profile.slopes)))
            scale = slope_max * params.sigma_n * hi ** (params.n - 1) * (b2 - a2)
            cfg = QuadratureConfig(qcfg.rel_tol, max(qcfg.abs_tol, qcfg.rel_tol * scale),
                                   qcfg.max_subdivisions)
            total += integrate_adaptive(fun, pts, cfg)
        return total / volume

    if weight is None:
        wfun = lambda t: 1.0
    elif isinstance(weight, RadialWeight):
        s = weight.s
        wfun = lambda t: t / s
    else:
        raise TypeError(f"unsupported weight {weight!r}")
    slope_max = float(np.max(np.abs(profile.slopes)))
    wmax = 1.0 if weight is None else hi / weight.s
    scale = slope_max * wmax * params.sigma_n * hi ** (params.n - 1) * (hi - lo)
    cfg = QuadratureConfig(qcfg.rel_tol, max(qcfg.abs_tol, qcfg.rel_tol * scale),
                           qcfg.max_subdivisions)
    fun = lambda t: np.abs(profile.slope(t)) * wfun(t) * cap_area(t, d, r, params)
    return integrate_adaptive(fun, _ball_breakpoints(profile, ball, lo, hi), cfg) / volume


def batch_objective(profile: RadialProfile, ds, rs, params: AmbientParams,
                    beta: float | None = None, n_nodes: int = 96):
    """Vectorized r^beta * ball-average for arrays of balls (coarse search).

    Composite midpoint rule with ~1e-4 relative accuracy; used only to
    rank candidate balls, never for reported values.
    """
    ds = np.asarray(ds, dtype=float)
    rs = np.asarray(rs, dtype=float)
    beta = params.beta if beta is None else beta
    if params.n == 1:
        upper = _odd_antiderivative(profile, ds + rs)
        lower = _odd_antiderivative(profile, ds - rs)
        avg = (upper - lower) / (2.0 * rs)
        return rs**beta * avg
    lo = np.maximum(0.0, ds - rs)
    hi = np.minimum(ds + rs, profile.support_radius)
    length = np.maximum(hi - lo, 0.0)
    out = np.zeros_like(ds)
    live = length > 0.0
    if np.any(live):
        xi = (np.arange(n_nodes) + 0.5) / n_nodes
        t = lo[live, None] + length[live, None] * xi[None, :]
        area = cap_area(t, ds[live, None], rs[live, None], params)
        vals = profile.value(t.ravel()).reshape(t.shape)
        integral = (vals * area).sum(axis=1) * (length[live] / n_nodes)
        out[live] = integral / (params.omega_n * rs[live] ** params.n)
    return rs**beta * out
