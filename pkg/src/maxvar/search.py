"""Global search for best balls and the maximal-value profile m(s).

The objective r^beta * (ball average) is maximized over axis balls
(d, r) with d >= 0, |d - s| <= r, r_min <= r <= s + T.  Rotational
symmetry about the evaluation axis and the mirror-domination argument
justify the 2D reduction; the covering ball (0, s + T) dominates every
larger radius.  Strategy: coarse grid (log in r, linear in d per row)
plus a dedicated sweep of the boundary family r = |d - s|, then top-K
deduplicated compass refinement.  All moves are comparison-based, so
scaling the profile by a positive constant reproduces the exact same
search path.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .averages import ball_average, batch_objective, gradient_axial_component
from .core import AmbientParams, RadialProfile
from .geometry import AxisBall, Contact, InfeasibleBallError, classify_contact
from .quadrature import IDENTITY_QUADRATURE, QuadratureConfig

REGION_LABELS = ("zero_derivative", "E1", "E2", "E3", "unclassified")


@dataclass(frozen=True)
class SearchConfig:
    """Knobs for the coarse grid, multistart refinement and tie-breaking."""

    r_per_decade: int = 24
    d_per_row: int = 48
    multistarts: int = 8
    refine_tol: float = 1e-7
    tie_tol: float = 1e-9
    r_min_frac: float = 1e-4
    contact_tol: float = 1e-6
    boundary_points: int = 256
    coarse_nodes: int = 96
    refine_max_evals: int = 4000

    def __post_init__(self):
        if min(self.r_per_decade, self.d_per_row, self.multistarts, self.boundary_points) < 1:
            raise ValueError("grid sizes and multistart count must be positive")
        if not (0.0 < self.r_min_frac < 1.0):
            raise ValueError("r_min fraction must lie in (0, 1)")
        if min(self.refine_tol, self.tie_tol, self.contact_tol) <= 0.0:
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class BestBallResult:
    """Search outcome at one evaluation radius."""

    s: float
    value: float
    ball: AxisBall
    contact: Contact
    region: str
    objective_evals: int
    converged: bool
    tie_candidates: int = 1


@dataclass
class MaximalProfile:
    """m(s) on a grid with per-point results and both derivative channels."""

    grid: np.ndarray
    values: np.ndarray
    results: list
    deriv_fd: np.ndarray | None = None
    deriv_formula: np.ndarray | None = None
    corner_flags: np.ndarray | None = None


@dataclass(frozen=True)
class GridSpec:
    """Evaluation grid lo..hi with count points, log- or linearly spaced."""

    lo: float
    hi: float
    count: int
    log: bool = True

    def __post_init__(self):
        if not (0.0 < self.lo < self.hi) or self.count < 3:
            raise ValueError("need 0 < lo < hi and at least 3 grid points")

    def points(self) -> np.ndarray:
        if self.log:
            return np.geomspace(self.lo, self.hi, self.count)
        return np.linspace(self.lo, self.hi, self.count)

    def refined(self) -> np.ndarray:
        """Doubled density; contains the original points exactly."""
        base = self.points()
        mids = np.sqrt(base[:-1] * base[1:]) if self.log else 0.5 * (base[:-1] + base[1:])
        out = np.empty(2 * self.count - 1)
        out[0::2] = base
        out[1::2] = mids
        return out

    @staticmethod
    def standard(profile: RadialProfile, count: int = 64) -> "GridSpec":
        T = profile.support_radius
        return GridSpec(1e-2 * T, 8.0 * T, count, log=True)

    def label(self) -> str:
        kind = "log" if self.log else "lin"
        return f"{self.lo:g}:{self.hi:g}:{self.count}:{kind}"


def objective(profile: RadialProfile, s: float, ball: AxisBall, params: AmbientParams,
              qcfg: QuadratureConfig) -> float:
    """r^beta times the ball average; the ball must contain s."""
    if not ball.contains(s, tol=1e-12 * max(ball.r, s)):
        raise InfeasibleBallError(f"ball (d={ball.d}, r={ball.r}) does not contain s={s}")
    return ball.r ** params.beta * ball_average(profile, ball, params, qcfg)


class _Objective:
    """Counts evaluations and dispatches to the fast or accurate integrator."""

    def __init__(self, profile, s, params, qcfg, coarse_nodes):
        self.profile = profile
        self.s = s
        self.params = params
        self.qcfg = qcfg
        self.coarse_nodes = coarse_nodes
        self.evals = 0

    def batch(self, ds, rs):
        self.evals += len(ds)
        return batch_objective(self.profile, ds, rs, self.params, n_nodes=self.coarse_nodes)

    def fast(self, d, r):
        self.evals += 1
        return float(batch_objective(self.profile, np.array([d]), np.array([r]),
                                     self.params, n_nodes=self.coarse_nodes)[0])

    def accurate(self, d, r):
        self.evals += 1
        return r ** self.params.beta * ball_average(
            self.profile, AxisBall(d, r), self.params, self.qcfg)


def _compass_2d(fun, d0, r0, step_d, step_r, project, tol, max_evals, batch_fun=None):
    """Derivative-free maximization by comparisons only (scale-equivariant).

    After an improving move the step doubles along the same direction while
    it keeps improving, so long travels cost log many evaluations.  With
    batch_fun the four neighbors are evaluated in one vectorized call.
    """
    d, r = project(d0, r0)
    best = fun(d, r)
    evals = 1
    sd, sr = step_d, step_r
    dirs = ((1, 0), (-1, 0), (0, 1), (0, -1))
    while evals < max_evals:
        if max(sd, sr) <= tol:
            return d, r, best, evals, True
        cands = [project(d + vd * sd, r + vr * sr) for vd, vr in dirs]
        pick = None
        if batch_fun is not None:
            fresh = [(i, c) for i, c in enumerate(cands) if c != (d, r)]
            if fresh:
                vals = batch_fun(np.array([c[0] for _, c in fresh]),
                                 np.array([c[1] for _, c in fresh]))
                evals += len(fresh)
                k = int(np.argmax(vals))
                if vals[k] > best:
                    pick = (fresh[k][0], fresh[k][1], float(vals[k]))
        else:
            for i, c in enumerate(cands):
                if c == (d, r):
                    continue
                val = fun(*c)
                evals += 1
                if val > best:
                    pick = (i, c, val)
                    break
        if pick is None:
            sd *= 0.5
            sr *= 0.5
            continue
        i, (d, r), best = pick
        vd, vr = dirs[i]
        grow = 2.0
        while evals < max_evals:
            cand = project(d + vd * sd * grow, r + vr * sr * grow)
            if cand == (d, r):
                break
            val = fun(*cand)
            evals += 1
            if val <= best:
                break
            (d, r), best = cand, val
            grow *= 2.0
    return d, r, best, evals, False


def _compass_1d(fun, u0, step, lo, hi, tol, max_evals):
    u = min(max(u0, lo), hi)
    best = fun(u)
    evals = 1
    st = step
    while evals < max_evals:
        if st <= tol:
            return u, best, evals, True
        moved = False
        for sign in (1.0, -1.0):
            cu = min(max(u + sign * st, lo), hi)
            if cu == u:
                continue
            val = fun(cu)
            evals += 1
            if val > best:
                u, best, moved = cu, val, True
                grow = 2.0
                while evals < max_evals:
                    cu = min(max(u + sign * st * grow, lo), hi)
                    if cu == u:
                        break
                    val = fun(cu)
                    evals += 1
                    if val <= best:
                        break
                    u, best = cu, val
                    grow *= 2.0
                break
        if not moved:
            st *= 0.5
    return u, best, evals, False


def _dedupe_candidates(cands, limit, rel=0.05):
    """Keep the top candidates that differ by more than rel in (d, r)."""
    kept = []
    for val, d, r in cands:
        close = False
        for _, dk, rk in kept:
            scale = max(r, rk)
            if abs(d - dk) <= rel * scale and abs(r - rk) <= rel * scale:
                close = True
                break
        if not close:
            kept.append((val, d, r))
            if len(kept) >= limit:
                break
    return kept


def search(profile: RadialProfile, s: float, params: AmbientParams,
           scfg: SearchConfig | None = None, qcfg: QuadratureConfig | None = None,
           warm: AxisBall | None = None) -> BestBallResult:
    """Globally maximize the objective over feasible axis balls at radius s.

    Among maxima within the tie tolerance the smallest radius wins, then
    the smallest center distance.  The returned value is recomputed at the
    identity-suite quadrature tolerance.
    """
    scfg = scfg or SearchConfig()
    qcfg = qcfg or QuadratureConfig(rel_tol=1e-6, max_subdivisions=400)
    if s < 0.0:
        raise ValueError("evaluation radius must be nonnegative")
    T = profile.support_radius
    r_min = scfg.r_min_frac * T
    r_max = s + T
    ob = _Objective(profile, s, params, qcfg, scfg.coarse_nodes)

    def project(d, r):
        d = max(d, 0.0)
        r = min(max(r, abs(d - s), r_min), r_max)
        return d, r

    # --- coarse stage: log-spaced radii, linear centers per row; rows whose
    # balls cannot reach the support (r <= (s - T)/2) carry zero objective
    r_low = max(r_min, 0.5 * (s - T))
    decades = math.log10(r_max / max(r_low, 1e-300))
    n_r = max(2, int(math.ceil(scfg.r_per_decade * decades)) + 1)
    rs_rows = np.geomspace(r_low, r_max, n_r)
    lo_d = np.maximum(0.0, s - rs_rows)
    hi_d = np.minimum(s, T) + rs_rows
    frac = np.linspace(0.0, 1.0, scfg.d_per_row)
    ds_grid = (lo_d[:, None] + np.maximum(hi_d - lo_d, 0.0)[:, None] * frac[None, :]).ravel()
    rs_grid = np.repeat(rs_rows, scfg.d_per_row)

    # --- dedicated boundary family r = |d - s|
    rs_b = np.geomspace(r_low, r_max, scfg.boundary_points)
    if s <= T:  # outer-contact balls span [s, s+2r]; dead beyond the support
        d_outer, rs_outer = s + rs_b, rs_b
    else:
        d_outer = rs_outer = np.empty(0)
    keep_inner = rs_b <= s
    d_inner = s - rs_b[keep_inner]
    ds_all = np.concatenate((ds_grid, d_outer, d_inner))
    rs_all = np.concatenate((rs_grid, rs_outer, rs_b[keep_inner]))

    values = ob.batch(ds_all, rs_all)
    order = np.argsort(values)[::-1]
    top_val = float(values[order[0]])
    pool = []
    for i in order[: 16 * scfg.multistarts]:
        v = float(values[i])
        if v < 0.5 * top_val or v <= 0.0:
            break
        pool.append((v, float(ds_all[i]), float(rs_all[i])))
    if not pool:
        pool = [(top_val, float(ds_all[order[0]]), float(rs_all[order[0]]))]
    starts = _dedupe_candidates(pool, scfg.multistarts)
    if warm is not None:
        dw, rw = project(warm.d, warm.r)
        starts.append((ob.fast(dw, rw), dw, rw))

    # --- refinement: fast compass per start, dedupe the survivors, then
    # accurate compass only on distinct local optima
    grid_step_r = rs_rows[1] / rs_rows[0] - 1.0 if n_r > 1 else 0.1
    stage_one = []
    for _, d0, r0 in starts:
        scale = max(r0, r_min)
        step_r = grid_step_r * scale
        step_d = max(scale * grid_step_r, 1e-3 * scale)
        d1, r1, v1, _, _ = _compass_2d(ob.fast, d0, r0, step_d, step_r, project,
                                       1e-4 * scale, scfg.refine_max_evals,
                                       batch_fun=ob.batch)
        stage_one.append((v1, d1, r1))
    # fast-stage endpoints scatter within the midpoint-rule noise plateau,
    # so clusters tighter than 1% are the same basin
    stage_one.sort(key=lambda c: -c[0])
    survivors = _dedupe_candidates(stage_one, scfg.multistarts, rel=0.01)

    finals = []
    for _, d1, r1 in survivors:
        scale = max(r1, r_min)
        d2, r2, v2, _, ok = _compass_2d(ob.accurate, d1, r1, 1e-3 * scale, 1e-3 * scale,
                                        project, scfg.refine_tol * scale,
                                        scfg.refine_max_evals)
        finals.append((v2, d2, r2, ok))

    # slide along the boundary family from the leaders pinned at the constraint
    provisional = max(f[0] for f in finals)
    for v2, d2, r2, _ in list(finals):
        if v2 < provisional * (1.0 - 0.02):
            continue
        if r2 - abs(d2 - s) > 4.0 * scfg.contact_tol * r2:
            continue
        scale = max(r2, r_min)
        if d2 >= s:
            lo_u, hi_u = s + r_min, s + r_max
        else:
            lo_u, hi_u = 0.0, max(s - r_min, 0.0)
        if hi_u <= lo_u:
            continue
        fun_u = lambda u: ob.accurate(u, max(abs(u - s), r_min))
        u3, v3, _, ok3 = _compass_1d(fun_u, d2, 1e-3 * scale, lo_u, hi_u,
                                     scfg.refine_tol * scale, scfg.refine_max_evals)
        finals.append((v3, u3, max(abs(u3 - s), r_min), ok3))

    best_val = max(f[0] for f in finals)
    tie = [f for f in finals if f[0] >= best_val - scfg.tie_tol * abs(best_val)]
    tie.sort(key=lambda f: (f[2], f[1]))
    v, d, r, ok = tie[0]
    ball = AxisBall(d, r)
    final_value = ball.r ** params.beta * ball_average(profile, ball, params,
                                                       IDENTITY_QUADRATURE)
    contact = classify_contact(ball, s, scfg.contact_tol)
    region = _region_label(contact, s)
    return BestBallResult(s=s, value=float(final_value), ball=ball, contact=contact,
                          region=region, objective_evals=ob.evals, converged=bool(ok),
                          tie_candidates=len(tie))


def _region_label(contact: Contact, s: float) -> str:
    if contact.kind == "interior":
        return "zero_derivative"
    if s <= 0.0 or math.isnan(contact.c):
        return "unclassified"
    c = contact.c
    if c > 1.25:
        return "E1"
    if c < 0.75:
        return "E2"
    return "E3"


def _sweep_chunk(args):
    profile, pts, params, scfg, qcfg, warm_start = args
    results = []
    prev = None
    for s in pts:
        res = search(profile, float(s), params, scfg, qcfg,
                     warm=prev.ball if (warm_start and prev is not None) else None)
        results.append(res)
        prev = res
    return results


def maximal_profile(profile: RadialProfile, grid, params: AmbientParams,
                    scfg: SearchConfig | None = None, qcfg: QuadratureConfig | None = None,
                    warm_start: bool = True, workers: int | None = None,
                    deriv_qcfg: QuadratureConfig | None = None) -> MaximalProfile:
    """Sweep the grid, warm-starting each point from its neighbor's ball.

    Warm starts only add refinement candidates; the global coarse stage
    always runs, so disabling them changes nothing beyond tie tolerance.
    With workers > 1 (default: MAXVAR_THREADS) contiguous chunks run in
    parallel processes, each warm-starting internally.
    """
    pts = grid.points() if isinstance(grid, GridSpec) else np.asarray(grid, dtype=float)
    if np.any(pts <= 0.0):
        raise ValueError("maximal-profile grids must be strictly positive")
    if workers is None:
        workers = int(os.environ.get("MAXVAR_THREADS", "1"))
    workers = max(1, min(workers, len(pts)))
    if workers == 1:
        results = _sweep_chunk((profile, pts, params, scfg, qcfg, warm_start))
    else:
        from concurrent.futures import ProcessPoolExecutor
        chunks = np.array_split(pts, workers)
        jobs = [(profile, c, params, scfg, qcfg, warm_start) for c in chunks if len(c)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = [r for part in pool.map(_sweep_chunk, jobs) for r in part]
    mp = MaximalProfile(grid=pts, values=np.array([r.value for r in results]),
                        results=results)
    dq = deriv_qcfg or IDENTITY_QUADRATURE
    mp.deriv_formula = np.array([
        derivative_by_formula(profile, r, params, dq) for r in results])
    derivative_by_fd(mp, profile)
    return mp


def derivative_by_formula(profile: RadialProfile, result: BestBallResult,
                          params: AmbientParams, qcfg: QuadratureConfig) -> float:
    """Signed radial derivative r^beta * (axial gradient average).

    Exactly zero at interior contact; at boundary contact the sign agrees
    with sign(d - s) whenever the derivative is nonzero.
    """
    if result.contact.kind == "interior":
        return 0.0
    ball = result.ball
    return ball.r ** params.beta * gradient_axial_component(profile, ball, params, qcfg)


def derivative_by_fd(mp: MaximalProfile, profile: RadialProfile | None = None,
                     jump_rel: float = 0.10) -> np.ndarray:
    """Central differences on the grid plus corner-suspect flags.

    A point is flagged when the best ball jumps by more than jump_rel
    between neighbors or the contact kind changes there (a genuine corner
    of m), and, when the profile is supplied, when s or an edge of the
    best ball crosses a profile knot inside the stencil: m loses second
    derivatives at those structural events, which makes the finite
    difference a biased estimate there.
    """
    s = mp.grid
    m = mp.values
    if len(s) < 3:
        raise ValueError("need at least 3 grid points for finite differences")
    d = np.empty_like(m)
    hm = s[1:-1] - s[:-2]
    hp = s[2:] - s[1:-1]
    d[1:-1] = (hm**2 * m[2:] - hp**2 * m[:-2] + (hp**2 - hm**2) * m[1:-1]) \
        / (hm * hp * (hm + hp))
    # second-order one-sided stencils at the ends
    h1, h2 = s[1] - s[0], s[2] - s[1]
    d[0] = (-(2 * h1 + h2) / (h1 * (h1 + h2)) * m[0]
            + (h1 + h2) / (h1 * h2) * m[1] - h1 / (h2 * (h1 + h2)) * m[2])
    g1, g2 = s[-1] - s[-2], s[-2] - s[-3]
    d[-1] = ((2 * g1 + g2) / (g1 * (g1 + g2)) * m[-1]
             - (g1 + g2) / (g1 * g2) * m[-2] + g1 / (g2 * (g1 + g2)) * m[-3])

    flags = np.zeros(len(s), dtype=bool)
    knots = profile.knots_t if profile is not None else None
    for i in range(len(s) - 1):
        a, b = mp.results[i], mp.results[i + 1]
        scale = max(a.ball.r, b.ball.r)
        jump = max(abs(a.ball.d - b.ball.d), abs(a.ball.r - b.ball.r)) / scale
        if jump > jump_rel or a.contact.kind != b.contact.kind:
            flags[i] = flags[i + 1] = True
        elif knots is not None and _crosses_knot(a, b, knots):
            flags[i] = flags[i + 1] = True
    mp.deriv_fd = d
    mp.corner_flags = flags
    return d


def _crosses_knot(a: BestBallResult, b: BestBallResult, knots) -> bool:
    """True when s or a best-ball edge passes a profile knot between a and b."""
    for fn in (lambda x: x.s, lambda x: x.ball.d + x.ball.r, lambda x: x.ball.d - x.ball.r):
        va, vb = fn(a), fn(b)
        lo, hi = (va, vb) if va <= vb else (vb, va)
        if np.any((knots > lo) & (knots < hi)):
            return True
    return False
