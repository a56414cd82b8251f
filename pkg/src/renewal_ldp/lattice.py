"""Exact finite-horizon reward distributions on a lattice.

When every reward increment f(s) sits on a common lattice per coordinate,
the unnormalized constrained measure

  mu_t({W = w}) = sum over renewal paths ending at t with total reward w
                  of exp(sum v(s_i)) prod p(s_i)

satisfies the same renewal recursion as the partition function, cell by
cell. The free measure follows by one survival-weighted convolution:

  nu_t = delta_0 P[S > t] + sum_{tau=1..t} mu_tau P[S > t - tau]

Only the last s0 slices and, when P[S = infinity] > 0, a running sum of all
mu_tau are needed, so memory stays at O(cells) regardless of the horizon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import _core
from .errors import BudgetError, EligibilityError
from .model import RenewalModel, require_valid

CELL_BUDGET = 100_000_000
BOX_TOL = 1e-9

CONSTRAINED = "constrained"
FREE = "free"


def _fraction_gcd(a: Fraction, b: Fraction) -> Fraction:
    num = math.gcd(a.numerator * b.denominator, b.numerator * a.denominator)
    return Fraction(num, a.denominator * b.denominator)


@dataclass(frozen=True)
class LatticeSpec:
    """Per-coordinate cell width for reward values; the origin is always 0."""

    step: tuple[float, ...]

    def __post_init__(self):
        if not self.step or any(not (h > 0) or not math.isfinite(h) for h in self.step):
            raise EligibilityError("lattice steps must be positive finite floats")

    @property
    def dim(self) -> int:
        return len(self.step)

    @classmethod
    def infer(cls, model: RenewalModel) -> "LatticeSpec":
        """Smallest common cell width per coordinate of the head rewards."""
        steps = []
        for j in range(model.dim):
            vals = [model.f(s)[j] for s in model.waiting.support]
            nonzero = [abs(v) for v in vals if abs(v) > 1e-12]
            if not nonzero:
                steps.append(1.0)
                continue
            fracs = [Fraction(v).limit_denominator(10**6) for v in nonzero]
            g = fracs[0]
            for fr in fracs[1:]:
                g = _fraction_gcd(g, fr)
            steps.append(float(g))
        return cls(step=tuple(steps))


def check_eligibility(model: RenewalModel, spec: LatticeSpec) -> None:
    """Raise unless the model admits an exact lattice dynamic program."""
    if model.reward.noise is not None:
        raise EligibilityError("heavy-tailed noise has no lattice representation")
    if model.waiting.tail is not None:
        raise EligibilityError("geometric waiting tails give unbounded reward support")
    if model.dim > 2:
        raise EligibilityError("lattice dynamic program supports dimensions 1 and 2 only")
    if spec.dim != model.dim:
        raise EligibilityError(f"lattice has {spec.dim} coordinates, model has {model.dim}")
    for s in model.waiting.support:
        f = model.f(s)
        for j, h in enumerate(spec.step):
            n = round(f[j] / h)
            if abs(f[j] - n * h) > BOX_TOL * h:
                raise EligibilityError(
                    f"reward f({s})[{j}] = {f[j]!r} is off the lattice of width {h!r}"
                )


@dataclass(frozen=True)
class LatticeMeasure:
    """Unnormalized log masses of one time slice on the reward lattice.

    Cell index i along coordinate j carries reward value
    (offsets[j] + i) * spec.step[j]. log_normalizer is the log of the
    total mass, ln Z^c_t for the constrained law and ln Z_t for the free
    law.
    """

    t: int
    law: str
    spec: LatticeSpec
    offsets: tuple[int, ...]
    log_mass: np.ndarray
    log_normalizer: float

    def axis_values(self, j: int = 0, *, scaled: bool = False) -> np.ndarray:
        n = self.log_mass.shape[j]
        vals = (self.offsets[j] + np.arange(n)) * self.spec.step[j]
        if scaled:
            if self.t == 0:
                raise ValueError("scaled values are undefined at t = 0")
            vals = vals / self.t
        return vals


def _box_pairs(box, dim: int) -> list[tuple[float, float]]:
    seq = list(box)
    if dim == 1 and len(seq) == 2 and not isinstance(seq[0], (tuple, list, np.ndarray)):
        seq = [tuple(seq)]
    if len(seq) != dim:
        raise ValueError(f"box needs {dim} (lo, hi) pairs, got {box!r}")
    pairs = []
    for lo, hi in seq:
        lo, hi = float(lo), float(hi)
        if math.isnan(lo) or math.isnan(hi) or lo > hi:
            raise ValueError(f"bad box interval ({lo!r}, {hi!r})")
        pairs.append((lo, hi))
    return pairs


def _box_logmass(measure: LatticeMeasure, box, *, scaled: bool) -> float:
    """Unnormalized log mass of a closed box, optionally in W/t units."""
    pairs = _box_pairs(box, measure.spec.dim)
    if scaled and measure.t == 0:
        raise ValueError("scaled boxes are undefined at t = 0")
    masks = []
    for j, (lo, hi) in enumerate(pairs):
        vals = measure.axis_values(j, scaled=scaled)
        unit = measure.spec.step[j] / (measure.t if scaled else 1)
        tol = BOX_TOL * unit
        masks.append((vals >= lo - tol) & (vals <= hi + tol))
    if measure.spec.dim == 1:
        sel = measure.log_mass[masks[0]]
    else:
        sel = measure.log_mass[np.ix_(masks[0], masks[1])].ravel()
    return _core.logsumexp_arr(np.ascontiguousarray(sel, dtype=np.float64))


def prob_box(measure: LatticeMeasure, box, *, scaled: bool = False) -> float:
    """Normalized log probability of a closed box under the measure's law."""
    if measure.log_normalizer == -math.inf:
        raise ValueError(f"law {measure.law!r} has zero total mass at t = {measure.t}")
    return _box_logmass(measure, box, scaled=scaled) - measure.log_normalizer


def _displacement_bounds(model: RenewalModel, shifts: dict[int, tuple[int, ...]], T: int):
    lo, hi = [], []
    for j in range(model.dim):
        ratios = [shifts[s][j] / s for s in shifts]
        lo.append(math.floor(T * min(0.0, min(ratios))))
        hi.append(math.ceil(T * max(0.0, max(ratios))))
    return tuple(lo), tuple(hi)


def _materialize(t, law, spec, offsets, arr, normalizer=None):
    out = np.array(arr, dtype=np.float64, copy=True)
    out.setflags(write=False)
    z = _core.logsumexp_arr(np.ascontiguousarray(out.ravel())) if normalizer is None else normalizer
    return LatticeMeasure(t=t, law=law, spec=spec, offsets=offsets, log_mass=out, log_normalizer=z)


def _accumulate(acc: np.ndarray, src: np.ndarray, shifts: tuple[int, ...], const: float):
    if acc.ndim == 1:
        _core.shift_logaddexp_1d(acc, src, shifts[0], const)
    else:
        _core.shift_logaddexp_2d(acc, src, shifts[0], shifts[1], const)


def _run_lattice(
    model: RenewalModel,
    spec: LatticeSpec,
    T: int,
    times: Sequence[int],
    law: str,
) -> dict[int, LatticeMeasure]:
    require_valid(model)
    check_eligibility(model, spec)
    if T < 0:
        raise ValueError("horizon T must be nonnegative")
    wanted = sorted(set(int(t) for t in times))
    if wanted and (wanted[0] < 0 or wanted[-1] > T):
        raise ValueError(f"requested times {wanted} outside [0, {T}]")
    w = model.waiting
    s0 = w.s0
    log_p = {s: math.log(p) for s, p in w.head.items()}
    shifts = {
        s: tuple(round(model.f(s)[j] / spec.step[j]) for j in range(model.dim))
        for s in w.support
    }
    lo, hi = _displacement_bounds(model, shifts, T)
    shape = tuple(hi[j] - lo[j] + 1 for j in range(model.dim))
    cells = 1
    for n in shape:
        cells *= n
    if cells * (T + 1) > CELL_BUDGET:
        raise BudgetError(
            f"lattice run needs {cells} cells x {T + 1} steps, over the {CELL_BUDGET} budget"
        )
    zero_idx = tuple(-lo[j] for j in range(model.dim))
    steps = [(s, model.v(s) + log_p[s], shifts[s]) for s in sorted(w.head)]

    window = [np.full(shape, -math.inf) for _ in range(s0 + 1)]
    window[0][zero_idx] = 0.0
    p_inf = w.p_infinity
    track_total = law == FREE and p_inf > 0.0
    total = np.full(shape, -math.inf) if track_total else None
    # ln(P[S > r] - p_inf) for r < s0; exact because the head is finite
    head_excess = [
        math.log(sum(p for s, p in w.head.items() if s > r)) for r in range(s0)
    ]

    out: dict[int, LatticeMeasure] = {}
    wanted_set = set(wanted)

    def assemble_free(t: int, mu_of) -> LatticeMeasure:
        acc = np.full(shape, -math.inf)
        for r in range(min(s0, t + 1)):
            if t - r == 0:
                break
            _accumulate(acc, mu_of(t - r), (0,) * model.dim, head_excess[r])
        if track_total:
            _accumulate(acc, total, (0,) * model.dim, math.log(p_inf))
        ls = w.log_survival(t)
        if ls > -math.inf:
            acc[zero_idx] = np.logaddexp(acc[zero_idx], ls)
        return _materialize(t, FREE, spec, lo, acc)

    if 0 in wanted_set:
        if law == CONSTRAINED:
            out[0] = _materialize(0, CONSTRAINED, spec, lo, window[0], normalizer=0.0)
        else:
            out[0] = assemble_free(0, lambda tau: window[0])
    for t in range(1, T + 1):
        acc = window[t % (s0 + 1)]
        acc.fill(-math.inf)
        for s, la, sh in steps:
            if s > t:
                continue
            _accumulate(acc, window[(t - s) % (s0 + 1)], sh, la)
        if track_total:
            _accumulate(total, acc, (0,) * model.dim, 0.0)
        if t in wanted_set:
            if law == CONSTRAINED:
                out[t] = _materialize(t, CONSTRAINED, spec, lo, acc)
            else:
                out[t] = assemble_free(t, lambda tau: window[tau % (s0 + 1)])
    return {t: out[t] for t in wanted}


def exact_constrained(
    model: RenewalModel,
    T: int,
    *,
    spec: LatticeSpec | None = None,
    times: Iterable[int] | None = None,
) -> dict[int, LatticeMeasure]:
    """Exact constrained-law slices mu_t at the requested times (default: T)."""
    spec = spec if spec is not None else LatticeSpec.infer(model)
    times = list(times) if times is not None else [T]
    return _run_lattice(model, spec, T, times, CONSTRAINED)


def exact_free(
    model: RenewalModel,
    T: int,
    *,
    spec: LatticeSpec | None = None,
    times: Iterable[int] | None = None,
) -> dict[int, LatticeMeasure]:
    """Exact free-law slices nu_t at the requested times (default: T)."""
    spec = spec if spec is not None else LatticeSpec.infer(model)
    times = list(times) if times is not None else [T]
    return _run_lattice(model, spec, T, times, FREE)


# ---------------------------------------------------------------------------
# empirical decay rates and structure checks


@dataclass(frozen=True)
class EmpiricalRatePoint:
    t: int
    log_prob: float
    rate: float


def empirical_rate(
    model: RenewalModel,
    box,
    t_list: Sequence[int],
    *,
    law: str = CONSTRAINED,
    spec: LatticeSpec | None = None,
) -> tuple[EmpiricalRatePoint, ...]:
    """Finite-t decay rates -(1/t) ln P_t[W/t in box] from the exact DP."""
    if law not in (CONSTRAINED, FREE):
        raise ValueError(f"law must be {CONSTRAINED!r} or {FREE!r}")
    ts = [int(t) for t in t_list]
    if any(t <= 0 for t in ts):
        raise ValueError("empirical rates need t >= 1")
    runner = exact_constrained if law == CONSTRAINED else exact_free
    measures = runner(model, max(ts), spec=spec, times=ts)
    points = []
    for t in ts:
        lp = prob_box(measures[t], box, scaled=True)
        points.append(EmpiricalRatePoint(t=t, log_prob=lp, rate=-lp / t))
    return tuple(points)


@dataclass(frozen=True)
class SupermultViolation:
    tau: int
    t: int
    defect: float


@dataclass(frozen=True)
class SupermultReport:
    """Raw-mass supermultiplicativity mu_{tau+t}(C) >= mu_tau(C) mu_t(C).

    C is a scaled convex box, masses are unnormalized, and the check runs
    over every pair with tau <= t and tau + t <= t_max. min_margin is the
    smallest ln mu_{tau+t} - ln mu_tau - ln mu_t seen over pairs with a
    finite right-hand side.
    """

    t_max: int
    n_checked: int
    violations: tuple[SupermultViolation, ...]
    min_margin: float

    @property
    def ok(self) -> bool:
        return not self.violations


def supermult_check(
    model: RenewalModel,
    box,
    *,
    t_max: int,
    spec: LatticeSpec | None = None,
    tol: float = 1e-9,
) -> SupermultReport:
    measures = exact_constrained(model, t_max, spec=spec, times=range(1, t_max + 1))
    raw = {t: _box_logmass(measures[t], box, scaled=True) for t in range(1, t_max + 1)}
    violations = []
    min_margin = math.inf
    n_checked = 0
    for tau in range(1, t_max // 2 + 1):
        for t in range(tau, t_max - tau + 1):
            n_checked += 1
            rhs = raw[tau] + raw[t]
            if rhs == -math.inf:
                continue
            margin = raw[tau + t] - rhs
            min_margin = min(min_margin, margin)
            if margin < -tol:
                violations.append(SupermultViolation(tau=tau, t=t, defect=margin))
    return SupermultReport(
        t_max=t_max,
        n_checked=n_checked,
        violations=tuple(violations),
        min_margin=min_margin,
    )


# ---------------------------------------------------------------------------
# the open-convex-set counterexample


@dataclass(frozen=True)
class OpenConvexPoint:
    t: int
    log_prob: float
    rate: float


@dataclass(frozen=True)
class OpenConvexReport:
    """Free-law mass of the open set {w < 1} for the pure-waiting model.

    Every point of the set has infinite lower rate function, so a large
    deviation lower bound would force the probability to vanish faster
    than any exponential. It converges to a positive constant instead.
    """

    points: tuple[OpenConvexPoint, ...]
    probes: tuple[tuple[float, str], ...]
    cross_check_max_err: float

    @property
    def ok(self) -> bool:
        from .rate import INFINITE

        return self.cross_check_max_err <= 1e-9 and all(
            status == INFINITE for _, status in self.probes
        )


def open_convex_counterexample(
    t_list: Sequence[int],
    *,
    probe_ws: Sequence[float] = (0.0, 0.5, 0.9),
) -> OpenConvexReport:
    from .configs import load as load_config
    from .kernel import partition_constrained
    from .rate import RateKind, rate

    model = load_config("xs23")
    ts = sorted(set(int(t) for t in t_list))
    if not ts or ts[0] <= 0:
        raise ValueError("need positive horizons")
    T = ts[-1]
    free = exact_free(model, T, times=ts)
    ln_zc = partition_constrained(model, T)
    points = []
    max_err = 0.0
    for t in ts:
        # all lattice atoms below w = 1 sit at or below 1 - 1/t, so the
        # closed box up to 1 - 1/(2t) captures the open event {W/t < 1}
        lp = prob_box(free[t], (-1.0, 1.0 - 1.0 / (2.0 * t)), scaled=True)
        points.append(OpenConvexPoint(t=t, log_prob=lp, rate=-lp / t))
        direct = -math.expm1(ln_zc[t] - free[t].log_normalizer)
        max_err = max(max_err, abs(math.exp(lp) - direct))
    probes = tuple(
        (float(wv), rate(model, RateKind.FREE_LOWER, wv).status) for wv in probe_ws
    )
    return OpenConvexReport(points=tuple(points), probes=probes, cross_check_max_err=max_err)
