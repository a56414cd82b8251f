"""Rate functions as certified Legendre-type suprema.

Three kinds share one ascent engine. Writing z0 = z(0) and (ell_inf,
ell_sup) for the survival decay exponents:

  constrained   I(w)     = sup_phi  phi.w - z(phi) + z0
  free-lower    Iinf(w)  = sup_phi  phi.w - max(z(phi), ell_inf) + max(z0, ell_sup)
  free-upper    Isup(w)  = sup_phi  phi.w - max(z(phi), ell_sup) + max(z0, ell_inf)

The objective is concave, so a maximum is certified either by an interior
bracket or by a flat search-box boundary; a boundary where the outward slope
stays above slope_min certifies divergence (value +inf). A magnitude runaway
past the value cap with positive slope is the fast path to the same verdict.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .errors import EligibilityError
from .model import RenewalModel, TailExponents, tail_exponents
from .tilt import ZFunction

FINITE = "finite"
INFINITE = "infinite"
LOWER_BOUND_ONLY = "lower_bound_only"

SEARCH_BOX = 200.0
VALUE_CAP = 1e6
SLOPE_MIN = 1e-6
FD_STEP_REL = 1e-6
X_TOL = 1e-9
EVAL_BUDGET = 2000
SWEEP_BUDGET = 60

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_INVPHI2 = (3.0 - math.sqrt(5.0)) / 2.0


class RateKind(Enum):
    CONSTRAINED = "constrained"
    FREE_LOWER = "free-lower"
    FREE_UPPER = "free-upper"


@dataclass(frozen=True)
class RateValue:
    value: float
    status: str
    arg_phi: tuple[float, ...] | None
    certificate: float | None
    detail: str = ""


class _Shared:
    """Model-level pieces reused across many rate evaluations."""

    def __init__(self, model: RenewalModel):
        self.model = model
        self.zfun = ZFunction(model)
        self.z0 = self.zfun([0.0] * model.dim).value
        self.ells: TailExponents = tail_exponents(model)

    def objective(self, kind: RateKind, w: np.ndarray) -> Callable[[np.ndarray], float]:
        if kind is RateKind.CONSTRAINED:
            floor, shift = -math.inf, self.z0
        elif kind is RateKind.FREE_LOWER:
            floor, shift = self.ells.ell_inf, max(self.z0, self.ells.ell_sup)
        elif kind is RateKind.FREE_UPPER:
            floor, shift = self.ells.ell_sup, max(self.z0, self.ells.ell_inf)
        else:
            raise EligibilityError(f"unknown rate kind {kind!r}")
        zfun = self.zfun

        def g(phi: np.ndarray) -> float:
            try:
                z = zfun(phi).value
            except EligibilityError:
                # tilting a heavy-tailed coordinate: the transform diverges
                return -math.inf
            return float(phi @ w) - max(z, floor) + shift

        return g


class _Budget(Exception):
    pass


class _LineResult:
    __slots__ = ("kind", "x", "value", "slope", "evals")

    def __init__(self, kind: str, x: float, value: float, slope: float, evals: int):
        self.kind = kind  # "interior" | "boundary" | "infinite"
        self.x = x
        self.value = value
        self.slope = slope
        self.evals = evals


def _maximize_1d(
    g: Callable[[float], float],
    *,
    box: float = SEARCH_BOX,
    x_tol: float = X_TOL,
    budget: int = EVAL_BUDGET,
    x_start: float = 0.0,
) -> _LineResult:
    """Maximize a concave scalar function over [-box, box] with certificates."""
    memo: dict[float, float] = {}
    best = {"x": min(max(x_start, -box), box), "v": -math.inf}

    def ev(x: float) -> float:
        if x in memo:
            return memo[x]
        if len(memo) >= budget:
            raise _Budget()
        v = g(x)
        memo[x] = v
        if v > best["v"]:
            best["x"], best["v"] = x, v
        return v

    def outward_slope(x_edge: float, sign: float) -> float:
        h = FD_STEP_REL * max(1.0, abs(x_edge))
        return (ev(x_edge) - ev(x_edge - sign * h)) / h

    def golden(a: float, b: float) -> tuple[float, float]:
        h = b - a
        c, d = a + _INVPHI2 * h, a + _INVPHI * h
        gc, gd = ev(c), ev(d)
        while h > x_tol:
            if gc >= gd:
                b, d, gd = d, c, gc
                h = b - a
                c = a + _INVPHI2 * h
                gc = ev(c)
            else:
                a, c, gc = c, d, gd
                h = b - a
                d = a + _INVPHI * h
                gd = ev(d)
        x = c if gc >= gd else d
        return x, ev(x)

    try:
        x0 = min(max(x_start, -box), box)
        g0 = ev(x0)
        xp = min(x0 + 1.0, box)
        xm = max(x0 - 1.0, -box)
        # a probe clamped onto the start means we sit at an edge: certify it
        if xp == x0:
            sl = outward_slope(x0, 1.0)
            if sl >= SLOPE_MIN:
                return _LineResult("infinite", x0, g0, sl, len(memo))
            gp = -math.inf
        else:
            gp = ev(xp)
        if xm == x0:
            sl = outward_slope(x0, -1.0)
            if sl >= SLOPE_MIN:
                return _LineResult("infinite", x0, g0, sl, len(memo))
            gm = -math.inf
        else:
            gm = ev(xm)
        if gp <= g0 and gm <= g0:
            x, v = golden(xm, xp)
            # ties go to the start point so plateaus read as stationary
            if g0 >= v:
                x, v = x0, g0
            return _LineResult("interior", x, v, 0.0, len(memo))
        sign = 1.0 if gp > gm else -1.0
        x_prev = x0
        x_cur = min(max(x0 + sign, -box), box)
        g_cur = ev(x_cur)
        step = 2.0
        while True:
            x_next = min(max(x_cur + sign * step, -box), box)
            if x_next == x_cur:
                # already at the box edge and still not decreasing
                sl = outward_slope(x_cur, sign)
                if sl >= SLOPE_MIN:
                    return _LineResult("infinite", x_cur, g_cur, sl, len(memo))
                lo, hi = (x_prev, x_cur) if sign > 0 else (x_cur, x_prev)
                x, v = golden(lo, hi)
                if g_cur > v:
                    x, v = x_cur, g_cur
                return _LineResult("boundary", x, v, sl, len(memo))
            g_next = ev(x_next)
            if g_next > VALUE_CAP and g_next > g_cur:
                sl = (g_next - g_cur) / abs(x_next - x_cur)
                return _LineResult("infinite", x_next, g_next, sl, len(memo))
            if g_next <= g_cur:
                lo, hi = (x_prev, x_next) if sign > 0 else (x_next, x_prev)
                x, v = golden(lo, hi)
                if g_cur > v:
                    x, v = x_cur, g_cur
                return _LineResult("interior", x, v, 0.0, len(memo))
            x_prev = x_cur
            x_cur, g_cur = x_next, g_next
            step *= 2.0
    except _Budget:
        return _LineResult("budget", best["x"], best["v"], math.nan, len(memo))


def _rate_1d(g: Callable[[np.ndarray], float], *, box: float) -> RateValue:
    def gs(x: float) -> float:
        return g(np.array([x]))

    res = _maximize_1d(gs, box=box)
    if res.kind == "budget":
        return RateValue(
            value=res.value,
            status=LOWER_BOUND_ONLY,
            arg_phi=(res.x,),
            certificate=gs(res.x),
            detail=f"evaluation budget {EVAL_BUDGET} exhausted",
        )
    if res.kind == "infinite":
        return RateValue(
            value=math.inf,
            status=INFINITE,
            arg_phi=None,
            certificate=None,
            detail=(
                f"outward slope {res.slope:.3e} >= {SLOPE_MIN:.0e} at phi={res.x:+.6g}"
                f" with objective {res.value:.6g}"
            ),
        )
    cert = gs(res.x)
    where = "interior maximum" if res.kind == "interior" else (
        f"box-edge maximum, outward slope {res.slope:.3e} < {SLOPE_MIN:.0e}"
    )
    return RateValue(
        value=res.value,
        status=FINITE,
        arg_phi=(res.x,),
        certificate=cert,
        detail=f"{where}; {res.evals} evaluations",
    )


def _rate_nd(g: Callable[[np.ndarray], float], dim: int, *, box: float) -> RateValue:
    phi = np.zeros(dim)
    value = g(phi)
    evals = dim  # rough accounting only, reported in detail
    for sweep in range(SWEEP_BUDGET):
        moved = 0.0
        for j in range(dim):
            def line(x: float, j=j) -> float:
                p = phi.copy()
                p[j] = x
                return g(p)

            res = _maximize_1d(line, box=box, x_start=float(phi[j]))
            evals += res.evals
            if res.kind == "budget":
                phi[j] = res.x
                return RateValue(
                    value=res.value,
                    status=LOWER_BOUND_ONLY,
                    arg_phi=tuple(float(x) for x in phi),
                    certificate=g(phi),
                    detail=f"line-search budget exhausted in sweep {sweep}",
                )
            if res.kind == "infinite":
                return RateValue(
                    value=math.inf,
                    status=INFINITE,
                    arg_phi=None,
                    certificate=None,
                    detail=(
                        f"coordinate {j}: outward slope {res.slope:.3e} >= {SLOPE_MIN:.0e}"
                        f" at the box edge"
                    ),
                )
            moved = max(moved, abs(res.x - phi[j]))
            phi[j] = res.x
            value = res.value
        if moved <= 1e-6:
            cert = g(phi)
            return RateValue(
                value=value,
                status=FINITE,
                arg_phi=tuple(float(x) for x in phi),
                certificate=cert,
                detail=f"coordinate-stationary after {sweep + 1} sweeps, {evals} evaluations",
            )
    return RateValue(
        value=value,
        status=LOWER_BOUND_ONLY,
        arg_phi=tuple(float(x) for x in phi),
        certificate=g(phi),
        detail=f"sweep budget {SWEEP_BUDGET} exhausted",
    )


def rate(
    model: RenewalModel,
    kind: RateKind,
    w,
    *,
    box: float = SEARCH_BOX,
    _shared: _Shared | None = None,
) -> RateValue:
    """Evaluate the rate function of the given kind at reward-per-time w."""
    shared = _shared if _shared is not None else _Shared(model)
    w_arr = np.atleast_1d(np.asarray(w, dtype=np.float64))
    if w_arr.shape != (model.dim,):
        raise EligibilityError(f"w has shape {w_arr.shape}, model dimension is {model.dim}")
    g = shared.objective(kind, w_arr)
    if model.dim == 1:
        return _rate_1d(g, box=box)
    return _rate_nd(g, model.dim, box=box)


def rate_curve(
    model: RenewalModel,
    kind: RateKind,
    w_grid,
    *,
    box: float = SEARCH_BOX,
    workers: int | None = None,
) -> tuple[RateValue, ...]:
    """Evaluate the rate function on a grid, sharing the tilt evaluator."""
    shared = _Shared(model)
    points = [np.atleast_1d(np.asarray(w, dtype=np.float64)) for w in w_grid]

    def one(w: np.ndarray) -> RateValue:
        return rate(model, kind, w, box=box, _shared=shared)

    if workers is not None and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return tuple(pool.map(one, points))
    return tuple(one(w) for w in points)


# ---------------------------------------------------------------------------
# grid minimizer


def _domain_box(model: RenewalModel, kind: RateKind) -> list[tuple[float, float]]:
    """Per-coordinate hull of achievable long-run reward ratios f(s)/s.

    The free laws can freeze the reward short of the hull, so they include
    the origin.
    """
    w = model.waiting
    ratios = []
    for s in w.support:
        f = model.f(s)
        ratios.append([f[j] / s for j in range(model.dim)])
    if w.tail is not None:
        s1 = w.s0 + 1
        rows = model.reward.tail_affine
        ratios.append([alpha / s1 + beta for alpha, beta in rows])
        ratios.append([beta for _, beta in rows])
    if kind is not RateKind.CONSTRAINED:
        ratios.append([0.0] * model.dim)
    arr = np.asarray(ratios, dtype=np.float64)
    return [(float(arr[:, j].min()), float(arr[:, j].max())) for j in range(model.dim)]


def rate_minimum(
    model: RenewalModel,
    kind: RateKind,
    *,
    grid_points: int | None = None,
    refinements: int | None = None,
    box: float = SEARCH_BOX,
) -> tuple[tuple[float, ...], RateValue]:
    """Coarse-to-fine grid minimizer of the rate function, dimensions 1 and 2."""
    if model.dim > 2:
        raise EligibilityError("rate_minimum supports dimensions 1 and 2 only")
    shared = _Shared(model)
    bounds = _domain_box(model, kind)
    n = grid_points if grid_points is not None else (101 if model.dim == 1 else 15)
    levels = refinements if refinements is not None else (3 if model.dim == 1 else 2)

    def evaluate(w_pt: np.ndarray) -> RateValue:
        return rate(model, kind, w_pt, box=box, _shared=shared)

    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    best_w, best_rv = None, None
    for level in range(levels + 1):
        axes = [np.linspace(lo[j], hi[j], n) if hi[j] > lo[j] else np.array([lo[j]]) for j in range(model.dim)]
        if model.dim == 1:
            grid = [np.array([x]) for x in axes[0]]
        else:
            grid = [np.array([x, y]) for x in axes[0] for y in axes[1]]
        vals = [evaluate(p) for p in grid]
        finite = [i for i, rv in enumerate(vals) if rv.status == FINITE]
        pool = finite if finite else range(len(vals))
        i_star = min(pool, key=lambda i: vals[i].value)
        best_w, best_rv = grid[i_star], vals[i_star]
        # shrink to a window of two cells around the incumbent per coordinate
        new_lo, new_hi = [], []
        for j in range(model.dim):
            ax = axes[j]
            if len(ax) == 1:
                new_lo.append(ax[0])
                new_hi.append(ax[0])
                continue
            stepj = ax[1] - ax[0]
            new_lo.append(max(lo[j], best_w[j] - 2 * stepj))
            new_hi.append(min(hi[j], best_w[j] + 2 * stepj))
        lo, hi = np.array(new_lo), np.array(new_hi)
        n = 41 if model.dim == 1 else 9
    return tuple(float(x) for x in best_w), best_rv


# ---------------------------------------------------------------------------
# duality check


@dataclass(frozen=True)
class BiconjugateLevel:
    n_points: int
    max_gap: float
    min_gap: float


@dataclass(frozen=True)
class BiconjugateReport:
    """Gap z(phi) - sup_w {phi.w - (I(w) - z0)} over a phi grid.

    The discrete sup runs over w grid points with finite I, so the gap is
    nonnegative up to numerical tolerance and shrinks as the w grid refines.
    """

    levels: tuple[BiconjugateLevel, ...]
    eps: float

    @property
    def upper_ok(self) -> bool:
        return all(lv.min_gap >= -self.eps for lv in self.levels)

    @property
    def shrunk(self) -> bool:
        return self.levels[-1].max_gap <= self.levels[0].max_gap + 1e-9

    @property
    def ok(self) -> bool:
        return self.upper_ok and self.shrunk


def _refine_grid(points: np.ndarray) -> np.ndarray:
    mids = 0.5 * (points[:-1] + points[1:])
    out = np.empty((points.shape[0] + mids.shape[0],) + points.shape[1:], dtype=np.float64)
    out[0::2] = points
    out[1::2] = mids
    return out


def biconjugate_check(
    model: RenewalModel,
    w_grid,
    phi_grid,
    *,
    eps: float = 1e-6,
    box: float = SEARCH_BOX,
) -> BiconjugateReport:
    """Check that the discrete double transform of I stays below z."""
    shared = _Shared(model)
    w_pts = np.asarray(w_grid, dtype=np.float64)
    if w_pts.ndim == 1:
        w_pts = w_pts[:, None]
    phi_pts = np.asarray(phi_grid, dtype=np.float64)
    if phi_pts.ndim == 1:
        phi_pts = phi_pts[:, None]
    z_vals = np.array([shared.zfun(p).value for p in phi_pts])

    levels = []
    grid = w_pts
    for _level in range(2):
        rvs = [rate(model, RateKind.CONSTRAINED, wp, box=box, _shared=shared) for wp in grid]
        finite = np.array([rv.status == FINITE for rv in rvs])
        ivals = np.array([rv.value if rv.status == FINITE else math.inf for rv in rvs])
        gaps = []
        for z, phi in zip(z_vals, phi_pts):
            scores = grid[finite] @ phi - ivals[finite] + shared.z0
            jstar = float(np.max(scores)) if scores.size else -math.inf
            gaps.append(z - jstar)
        gaps_arr = np.asarray(gaps)
        levels.append(
            BiconjugateLevel(
                n_points=grid.shape[0],
                max_gap=float(np.max(gaps_arr)),
                min_gap=float(np.min(gaps_arr)),
            )
        )
        grid = _refine_grid(grid)
    return BiconjugateReport(levels=tuple(levels), eps=eps)
