"""Monte Carlo estimates of weighted path probabilities.

Paths are simulated under the bare waiting law and reweighted by exp(H_t),
with the renewal indicator U_t as an extra factor for the constrained law:

  P^c_t[A] = E[U_t e^{H_t} 1_A] / E[U_t e^{H_t}]      (free law drops U_t)

All randomness comes from the counter-based generator keyed by the global
path index, so estimates are bit-for-bit reproducible for a fixed seed and
sample count no matter how many worker threads run. Batches have a fixed
size and are combined in index order; per-batch sums are kept in a shifted
exponential scale to survive large potentials.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from . import rng
from .errors import ConfigError, EligibilityError
from .model import RenewalModel, require_valid

BATCH_SIZE = 1 << 15
LOW_ESS = 100.0
STREAM_WAITS = 0
STREAM_NOISE = 1
_TINY = 2.0**-54

CONSTRAINED = "constrained"
FREE = "free"


def resolve_workers(workers: int | None = None) -> int:
    """Explicit argument, else the RENEWAL_LDP_THREADS variable, else 1."""
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("RENEWAL_LDP_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"RENEWAL_LDP_THREADS={env!r} is not an integer") from exc
    return 1


class _Tables:
    """Flat sampling tables for one model."""

    def __init__(self, model: RenewalModel):
        w = model.waiting
        self.dim = model.dim
        self.s0 = w.s0
        self.s_vals = np.array(sorted(w.head), dtype=np.int64)
        self.cum = np.cumsum(np.array([w.head[int(s)] for s in self.s_vals]))
        self.head_mass = float(self.cum[-1])
        self.v_vals = np.array([model.v(int(s)) for s in self.s_vals])
        self.f_vals = np.array([model.f(int(s)) for s in self.s_vals], dtype=np.float64)
        self.p_inf = w.p_infinity
        self.tail = w.tail
        self.tail_mass = w.tail_mass if w.tail is not None else 0.0
        self.noise_coord = None if model.reward.noise is None else model.reward.noise.coord


def _resolve_waits(tab: _Tables, model: RenewalModel, u: np.ndarray):
    """Map uniforms to waits: int64 values, -1 marking an infinite wait."""
    n = u.shape[0]
    s = np.full(n, -1, dtype=np.int64)
    vv = np.zeros(n)
    ff = np.zeros((n, tab.dim))
    k = np.searchsorted(tab.cum, u, side="right")
    in_head = k < tab.s_vals.size
    # without overshoot regions, rounding at the top edge stays in the head
    if tab.tail is None and tab.p_inf == 0.0:
        in_head = np.ones(n, dtype=bool)
        k = np.minimum(k, tab.s_vals.size - 1)
    kh = k[in_head]
    s[in_head] = tab.s_vals[kh]
    vv[in_head] = tab.v_vals[kh]
    ff[in_head] = tab.f_vals[kh]
    beyond = np.nonzero(~in_head)[0]
    if beyond.size and tab.tail is not None:
        ub = u[beyond]
        in_tail = ub < tab.head_mass + tab.tail_mass
        if tab.p_inf == 0.0:
            in_tail = np.ones(beyond.size, dtype=bool)
        tidx = beyond[in_tail]
        if tidx.size:
            uprime = (u[tidx] - tab.head_mass) / tab.tail_mass
            uprime = np.clip(uprime, _TINY, 1.0 - _TINY)
            log_rho = math.log(tab.tail.rho)
            m = np.floor(np.log(uprime) / log_rho).astype(np.int64) + 1
            st = tab.s0 + m
            s[tidx] = st
            gamma, delta = model.potential.tail_affine
            vv[tidx] = gamma + delta * st
            for j, (alpha, beta) in enumerate(model.reward.tail_affine):
                ff[tidx, j] = alpha + beta * st
    return s, vv, ff


def _simulate_batch(model: RenewalModel, tab: _Tables, t: int, seed: int, start: int, count: int):
    """Simulate paths [start, start+count) to horizon t, vectorized per draw."""
    ids = np.arange(start, start + count, dtype=np.uint64)
    cum = np.zeros(count, dtype=np.int64)
    W = np.zeros((count, tab.dim))
    H = np.zeros(count)
    done = np.zeros(count, dtype=bool)
    had_inf = np.zeros(count, dtype=bool)
    for i in range(t + 2):
        active = ~done & (cum <= t - 1)
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        u = rng.uniform01(seed, ids[idx], i, STREAM_WAITS)
        s, vv, ff = _resolve_waits(tab, model, u)
        new_cum = cum[idx] + s
        renew = (s > 0) & (new_cum <= t)
        ridx = idx[renew]
        if ridx.size:
            W[ridx] += ff[renew]
            H[ridx] += vv[renew]
            cum[ridx] = new_cum[renew]
            if tab.noise_coord is not None:
                un = rng.uniform01(seed, ids[ridx], i, STREAM_NOISE)
                W[ridx, tab.noise_coord] += np.tan(np.pi * (un - 0.5))
        done[idx[(s > 0) & (new_cum > t)]] = True
        inf_mask = s < 0
        done[idx[inf_mask]] = True
        had_inf[idx[inf_mask]] = True
    else:  # pragma: no cover - waits are >= 1, so t+2 rounds always suffice
        raise RuntimeError("path simulation failed to terminate")
    return W, H, cum == t, had_inf


def _batch_stats(W, H, U, had_inf, law, predicate):
    lw = H.copy()
    if law == CONSTRAINED:
        lw[~U] = -math.inf
    ev = np.asarray(predicate(W, U, had_inf), dtype=bool)
    m = float(np.max(lw))
    if m == -math.inf:
        return (-math.inf, 0.0, 0.0, 0.0, 0.0)
    x = np.exp(lw - m)
    x2 = np.exp(2.0 * (lw - m))
    return (m, float(x[ev].sum()), float(x.sum()), float(x2[ev].sum()), float(x2.sum()))


@dataclass(frozen=True)
class WeightedEstimate:
    """Self-normalized estimate of a weighted event probability.

    log_numerator_mean and log_normalizer_mean estimate ln E[weight 1_A]
    and ln E[weight]; their difference is ln(estimate). The standard error
    comes from the delta method for the ratio, and ess is the effective
    sample size (sum w)^2 / sum w^2.
    """

    estimate: float
    std_error: float
    log_numerator_mean: float
    log_normalizer_mean: float
    n_samples: int
    seed: int
    ess: float
    flags: tuple[str, ...]

    @property
    def degenerate(self) -> bool:
        return "degenerate_denominator" in self.flags


def _estimate_event(
    model: RenewalModel,
    t: int,
    predicate: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray],
    *,
    law: str,
    n: int,
    seed: int,
    workers: int | None = None,
) -> WeightedEstimate:
    require_valid(model)
    if law not in (CONSTRAINED, FREE):
        raise ValueError(f"law must be {CONSTRAINED!r} or {FREE!r}")
    t = int(t)
    n = int(n)
    if t < 1:
        raise ValueError("horizon t must be >= 1")
    if n < 1:
        raise ValueError("need at least one sample path")
    seed = int(seed)
    tab = _Tables(model)
    jobs = [(start, min(BATCH_SIZE, n - start)) for start in range(0, n, BATCH_SIZE)]

    def run(job):
        start, count = job
        W, H, U, had_inf = _simulate_batch(model, tab, t, seed, start, count)
        return _batch_stats(W, H, U, had_inf, law, predicate)

    n_workers = resolve_workers(workers)
    if n_workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            stats = list(pool.map(run, jobs))
    else:
        stats = [run(job) for job in jobs]

    # combine in batch order under one global shift so totals are exact
    M = max(st[0] for st in stats)
    flags: list[str] = []
    if M == -math.inf:
        return WeightedEstimate(
            estimate=math.nan,
            std_error=math.nan,
            log_numerator_mean=-math.inf,
            log_normalizer_mean=-math.inf,
            n_samples=n,
            seed=seed,
            ess=0.0,
            flags=("degenerate_denominator",),
        )
    Sa = Sw = Saa = Sww = 0.0
    for m, sa, sw, saa, sww in stats:
        if m == -math.inf:
            continue
        c = math.exp(m - M)
        c2 = math.exp(2.0 * (m - M))
        Sa += sa * c
        Sw += sw * c
        Saa += saa * c2
        Sww += sww * c2
    if Sw <= 0.0:
        return WeightedEstimate(
            estimate=math.nan,
            std_error=math.nan,
            log_numerator_mean=-math.inf,
            log_normalizer_mean=-math.inf,
            n_samples=n,
            seed=seed,
            ess=0.0,
            flags=("degenerate_denominator",),
        )
    ratio = Sa / Sw
    abar, wbar = Sa / n, Sw / n
    var_a = max(0.0, Saa / n - abar * abar)
    var_w = max(0.0, Sww / n - wbar * wbar)
    cov_aw = Saa / n - abar * wbar  # a = 1_A w makes E[aw] = E[a^2]
    var_ratio = (var_a - 2.0 * ratio * cov_aw + ratio * ratio * var_w) / (n * wbar * wbar)
    se = math.sqrt(max(0.0, var_ratio))
    ess = Sw * Sw / Sww if Sww > 0.0 else 0.0
    if ess < LOW_ESS:
        flags.append("low_ess")
    return WeightedEstimate(
        estimate=ratio,
        std_error=se,
        log_numerator_mean=(M + math.log(Sa) - math.log(n)) if Sa > 0.0 else -math.inf,
        log_normalizer_mean=M + math.log(Sw) - math.log(n),
        n_samples=n,
        seed=seed,
        ess=ess,
        flags=tuple(flags),
    )


def estimate_prob(
    model: RenewalModel,
    t: int,
    box,
    *,
    law: str = CONSTRAINED,
    n: int = 100_000,
    seed: int,
    workers: int | None = None,
) -> WeightedEstimate:
    """Estimate P_t[W_t/t in box] under the chosen law; the box is closed."""
    from .lattice import _box_pairs

    pairs = _box_pairs(box, model.dim)

    def predicate(W, U, had_inf):
        scaled = W / t
        mask = np.ones(W.shape[0], dtype=bool)
        for j, (lo, hi) in enumerate(pairs):
            mask &= (scaled[:, j] >= lo) & (scaled[:, j] <= hi)
        return mask

    return _estimate_event(model, t, predicate, law=law, n=n, seed=seed, workers=workers)


# ---------------------------------------------------------------------------
# single-path view, for audits and tests


@dataclass(frozen=True)
class PathSample:
    """One simulated path, reproducing exactly what the batch engine saw.

    waits lists every drawn wait, including the final overshoot or math.inf
    when the path drew an infinite wait. rewards lists the increments that
    landed within the horizon, noise included.
    """

    path_index: int
    t_horizon: int
    waits: tuple[float, ...]
    rewards: tuple[tuple[float, ...], ...]
    w_t: tuple[float, ...]
    h_t: float
    u_t: bool

    @property
    def had_inf(self) -> bool:
        return bool(self.waits) and self.waits[-1] == math.inf


def sample_paths(
    model: RenewalModel,
    t: int,
    n: int,
    seed: int,
    *,
    start: int = 0,
) -> Iterator[PathSample]:
    """Yield paths one at a time with the same draws as the batch engine."""
    require_valid(model)
    if int(t) < 1:
        raise ValueError("horizon t must be >= 1")
    tab = _Tables(model)
    t = int(t)
    for p in range(int(start), int(start) + int(n)):
        cum = 0
        waits: list[float] = []
        rewards: list[tuple[float, ...]] = []
        W = np.zeros(tab.dim)
        H = 0.0
        i = 0
        while cum <= t - 1:
            u = np.array([float(rng.uniform01(seed, p, i, STREAM_WAITS))])
            s, vv, ff = _resolve_waits(tab, model, u)
            if s[0] < 0:
                waits.append(math.inf)
                break
            new_cum = cum + int(s[0])
            if new_cum <= t:
                x = ff[0].copy()
                if tab.noise_coord is not None:
                    un = float(rng.uniform01(seed, p, i, STREAM_NOISE))
                    x[tab.noise_coord] += math.tan(math.pi * (un - 0.5))
                rewards.append(tuple(float(v) for v in x))
                W += x
                H += float(vv[0])
                cum = new_cum
                waits.append(float(s[0]))
                i += 1
            else:
                waits.append(float(s[0]))
                break
        yield PathSample(
            path_index=p,
            t_horizon=t,
            waits=tuple(waits),
            rewards=tuple(rewards),
            w_t=tuple(float(v) for v in W),
            h_t=H,
            u_t=cum == t,
        )


# ---------------------------------------------------------------------------
# the closed-convex-set counterexample


@dataclass(frozen=True)
class CauchyBoundPoint:
    t: int
    log_bound: float
    bound_rate: float


@dataclass(frozen=True)
class CauchyReport:
    """Lower bounds on the free-law mass of a closed convex set.

    The set C = {(a, b): a <= 1, b(1 - a) >= 1} in scaled coordinates pairs
    the waiting-time coordinate with a heavy-tailed one. Paths whose last
    renewal falls at t-1 and whose noise sum clears t^2 land in C, giving

      ln P_t[C] >= ln P[xi >= t^2] + ln Z^c_{t-1}

    which decays far slower than any exponential, while every point of C
    has infinite upper rate function. probes record that verdict; mc, when
    run, checks the direct estimate against the bound.
    """

    points: tuple[CauchyBoundPoint, ...]
    probes: tuple[tuple[tuple[float, ...], str], ...]
    mc: WeightedEstimate | None = None
    mc_t: int | None = None
    mc_log_bound: float | None = None

    @property
    def mc_ok(self) -> bool:
        if self.mc is None:
            return True
        if self.mc.degenerate:
            return False
        return self.mc.estimate + 3.0 * self.mc.std_error >= math.exp(self.mc_log_bound)

    @property
    def ok(self) -> bool:
        from .rate import INFINITE

        return all(status == INFINITE for _, status in self.probes) and self.mc_ok


def cauchy_counterexample(
    t_list: Sequence[int],
    *,
    mc_at: int | None = None,
    n: int = 200_000,
    seed: int | None = None,
    workers: int | None = None,
    probe_ws: Sequence[Sequence[float]] = ((0.0, 1.0), (0.5, 2.0), (0.9, 10.0)),
) -> CauchyReport:
    from .configs import load as load_config
    from .kernel import partition_constrained
    from .rate import RateKind, rate

    model = load_config("cauchy23")
    ts = sorted(set(int(t) for t in t_list))
    if not ts or ts[0] < 2:
        raise ValueError("need horizons t >= 2")
    ln_zc = partition_constrained(model, ts[-1])

    def log_bound(t: int) -> float:
        # arctan form of the Cauchy tail avoids cancellation at large t
        return math.log(math.atan(1.0 / (t * t)) / math.pi) + ln_zc[t - 1]

    points = tuple(
        CauchyBoundPoint(t=t, log_bound=log_bound(t), bound_rate=-log_bound(t) / t) for t in ts
    )
    probes = tuple(
        (tuple(float(x) for x in wp), rate(model, RateKind.FREE_UPPER, wp).status)
        for wp in probe_ws
    )
    mc = mc_t = mc_log_bound = None
    if mc_at is not None:
        mc_t = int(mc_at)
        if mc_t < 2:
            raise ValueError("mc_at must be >= 2")
        if seed is None:
            raise ValueError("Monte Carlo needs an explicit seed")

        def predicate(W, U, had_inf, t=mc_t):
            return (t - W[:, 0]) * W[:, 1] >= float(t) * float(t)

        mc = _estimate_event(model, mc_t, predicate, law=FREE, n=n, seed=seed, workers=workers)
        mc_log_bound = log_bound(mc_t) if mc_t <= ts[-1] else math.log(
            math.atan(1.0 / (mc_t * mc_t)) / math.pi
        ) + partition_constrained(model, mc_t)[mc_t - 1]
    return CauchyReport(points=points, probes=probes, mc=mc, mc_t=mc_t, mc_log_bound=mc_log_bound)
