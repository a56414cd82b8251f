"""Generalized renewal sequences and partition functions.

Everything here works on log-domain weight sequences a_s >= 0 with a finite
head and an optional log-affine tail. The two central objects are the
renewal-type sequence Psi_t = sum_{s<=t} a_s Psi_{t-s} and its growth rate
psi = inf{zeta : A(zeta) <= 1} where A(zeta) = sum_s a_s e^{-zeta s}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _core
from .errors import BudgetError, ConfigError, ConvergenceError
from .model import RenewalModel, require_valid, tail_exponents

LN2 = math.log(2.0)

BISECT_TOL = 1e-12
BISECT_BUDGET = 200


@dataclass(frozen=True)
class LogSequence:
    """An immutable array ln x_t for t = 0..T."""

    values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64)
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def T(self) -> int:
        return self.values.shape[0] - 1

    def __getitem__(self, t: int) -> float:
        return float(self.values[t])

    def __len__(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class LogWeightSequence:
    """ln a_s for s = 1..s0 in `head`, plus an optional log-affine tail.

    tail = (u, r) means ln a_s = u + r*s for every s > s0. Entries may be
    -inf (zero weight) but never +inf or nan, and at least one weight must be
    positive.
    """

    head: tuple[float, ...]
    tail: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        head = tuple(float(x) for x in self.head)
        for x in head:
            if math.isnan(x) or x == math.inf:
                raise ConfigError(f"log-weights must be finite or -inf, got {x}")
        if self.tail is not None:
            u, r = (float(x) for x in self.tail)
            if not (math.isfinite(u) and math.isfinite(r)):
                raise ConfigError("tail log-affine coefficients must be finite")
            object.__setattr__(self, "tail", (u, r))
        if all(x == -math.inf for x in head) and self.tail is None:
            raise ConfigError("weight sequence has no positive entry")
        object.__setattr__(self, "head", head)

    @property
    def s0(self) -> int:
        return len(self.head)

    @property
    def abscissa(self) -> float:
        """Infimum of the zeta-domain where A(zeta) is finite."""
        return self.tail[1] if self.tail is not None else -math.inf

    def growth_bound(self) -> float:
        """sup_s (ln a_s)/s; A(growth_bound + ln 2) <= 1 is guaranteed."""
        best = -math.inf
        for i, x in enumerate(self.head):
            if x != -math.inf:
                best = max(best, x / (i + 1))
        if self.tail is not None:
            u, r = self.tail
            s1 = self.s0 + 1
            best = max(best, r + u / s1, r)
        return best

    def transform(self, zeta: float) -> float:
        """A(zeta) = sum_s a_s e^{-zeta s}; +inf at or below the abscissa."""
        total = 0.0
        for i, x in enumerate(self.head):
            if x != -math.inf:
                total += math.exp(x - zeta * (i + 1))
                if total == math.inf:
                    return math.inf
        if self.tail is not None:
            u, r = self.tail
            if zeta <= r:
                return math.inf
            s1 = self.s0 + 1
            # sum_{s > s0} e^{u + (r - zeta) s} = e^{u + (r-zeta)(s0+1)} / (1 - e^{r-zeta})
            log_tail = u + (r - zeta) * s1 - math.log1p(-math.exp(r - zeta))
            total += math.exp(log_tail)
        return total

    @classmethod
    def from_model(cls, model: RenewalModel) -> "LogWeightSequence":
        """Weights a_s = e^{v(s)} p(s) of the given model."""
        w = model.waiting
        head = []
        for s in range(1, w.s0 + 1):
            p = w.head.get(s, 0.0)
            head.append(model.v(s) + math.log(p) if p > 0.0 else -math.inf)
        tail = None
        if w.tail is not None:
            gamma, delta = model.potential.tail_affine
            tail = (gamma + math.log(w.tail.c), delta + math.log(w.tail.rho))
        return cls(head=tuple(head), tail=tail)


def bisect_growth(
    weights: LogWeightSequence,
    *,
    tol: float = BISECT_TOL,
    budget: int = BISECT_BUDGET,
) -> tuple[float, tuple[float, float], int]:
    """Locate inf{zeta : A(zeta) <= 1} with a certified bracket.

    Returns (value, (lo, hi), iterations) where A(lo) > 1 >= A(hi) and
    hi - lo <= tol, so A(value + tol) <= 1 and A(value - tol) > 1 by
    monotonicity. Raises ConvergenceError if the budget runs out.
    """
    hi = weights.growth_bound() + LN2
    if not (weights.transform(hi) <= 1.0):
        # cannot happen for finite growth bounds; guard against NaN surprises
        raise ConvergenceError("upper bracket failed its certificate")
    a = weights.abscissa
    if a == -math.inf:
        gap = 1.0
        lo = hi - gap
        for _ in range(1100):
            if weights.transform(lo) > 1.0:
                break
            gap *= 2.0
            lo = hi - gap
        else:
            raise ConvergenceError("no lower bracket found; A stays <= 1 everywhere")
    else:
        gap = (hi - a) / 2.0
        lo = a + gap
        for _ in range(1100):
            if weights.transform(lo) > 1.0:
                break
            gap /= 2.0
            lo = a + gap
        else:
            raise ConvergenceError("no lower bracket found above the abscissa")
    iters = 0
    while hi - lo > tol:
        if iters >= budget:
            raise ConvergenceError(
                f"bisection budget {budget} exhausted with bracket width {hi - lo:.3e}"
            )
        mid = 0.5 * (lo + hi)
        if weights.transform(mid) <= 1.0:
            hi = mid
        else:
            lo = mid
        iters += 1
    return 0.5 * (lo + hi), (lo, hi), iters


def psi_rate(weights: LogWeightSequence, *, tol: float = BISECT_TOL) -> float:
    """Growth rate psi of the renewal sequence driven by `weights`."""
    value, _, _ = bisect_growth(weights, tol=tol)
    return value


def solve_renewal(weights: LogWeightSequence, T: int) -> LogSequence:
    """ln Psi_t for t = 0..T via the exact log-domain recursion.

    Cost is O(T * s0); a geometric tail is folded in exactly through a
    constant-time accumulator rather than by truncation.
    """
    if T < 0:
        raise ConfigError(f"horizon must be nonnegative, got {T}")
    gb = weights.growth_bound()
    scale = max(abs(gb), max((abs(x) for x in weights.head if x != -math.inf), default=0.0))
    if weights.tail is not None:
        scale = max(scale, abs(weights.tail[0]) + abs(weights.tail[1]) * (T + 1))
    if T * max(1.0, scale) > 1e305:
        raise BudgetError(f"horizon T={T} would overflow the log-domain exponent budget")
    has_tail = weights.tail is not None
    u, r = weights.tail if has_tail else (0.0, 0.0)
    head = np.array(weights.head, dtype=np.float64)
    return LogSequence(_core.renewal_logrec(head, T, has_tail, u, r))


def log_survival_array(model: RenewalModel, T: int) -> np.ndarray:
    """ln P[S > t] for t = 0..T, exact closed forms per segment."""
    w = model.waiting
    out = np.empty(T + 1, dtype=np.float64)
    for t in range(min(w.s0, T + 1)):
        out[t] = w.log_survival(t)
    if T >= w.s0:
        # past the head the survival is p_inf plus the geometric remainder
        ts = np.arange(w.s0, T + 1, dtype=np.float64)
        if w.tail is not None:
            tail_logs = (
                math.log(w.tail.c)
                + (ts + 1.0) * math.log(w.tail.rho)
                - math.log1p(-w.tail.rho)
            )
            if w.p_infinity > 0.0:
                out[w.s0 :] = np.logaddexp(math.log(w.p_infinity), tail_logs)
            else:
                out[w.s0 :] = tail_logs
        else:
            out[w.s0 :] = math.log(w.p_infinity) if w.p_infinity > 0.0 else -math.inf
    return out


def partition_constrained(model: RenewalModel, T: int) -> LogSequence:
    """ln Z^c_t for t = 0..T: renewal-pinned partition function."""
    require_valid(model)
    return solve_renewal(LogWeightSequence.from_model(model), T)


def partition_free(model: RenewalModel, T: int) -> LogSequence:
    """ln Z_t for t = 0..T: free partition function.

    Uses the decomposition over the last renewal time,
    Z_t = P[S > t] + sum_{tau=1..t} Z^c_tau P[S > t - tau].
    """
    require_valid(model)
    ln_zc = partition_constrained(model, T)
    ln_surv = log_survival_array(model, T)
    return LogSequence(_core.free_log_conv(ln_zc.values, ln_surv))


@dataclass(frozen=True)
class SandwichReport:
    """Observed (1/t) ln Z_t at the horizon against its limiting bracket."""

    T: int
    average: float
    lower: float
    upper: float
    margin: float

    @property
    def ok(self) -> bool:
        return self.lower - self.margin <= self.average <= self.upper + self.margin


def partition_sandwich(model: RenewalModel, T: int, *, margin: float | None = None) -> SandwichReport:
    """Check (1/T) ln Z_T against max{z(0), ell_inf} and max{z(0), ell_sup}."""
    from .tilt import z_of  # local import, tilt builds on this module

    if T < 1:
        raise ConfigError("sandwich check needs T >= 1")
    ln_z = partition_free(model, T)
    z0 = z_of(model, [0.0] * model.dim).value
    ells = tail_exponents(model)
    lower = max(z0, ells.ell_inf)
    upper = max(z0, ells.ell_sup)
    return SandwichReport(
        T=T,
        average=ln_z[T] / T,
        lower=lower,
        upper=upper,
        margin=5.0 / T if margin is None else margin,
    )
