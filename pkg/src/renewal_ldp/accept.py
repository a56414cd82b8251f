"""Acceptance suite: end-to-end checks with frozen tolerances.

Each criterion returns a CriterionResult and prints nothing; run_all emits
one PASS/FAIL line per criterion. The suite is deterministic: fixed seeds,
fixed grids, fixed horizons.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .configs import load as load_config
from .kernel import (
    LogWeightSequence,
    partition_constrained,
    partition_sandwich,
    psi_rate,
    solve_renewal,
)
from .lattice import (
    empirical_rate,
    exact_constrained,
    exact_free,
    open_convex_counterexample,
    prob_box,
    supermult_check,
)
from .montecarlo import cauchy_counterexample, estimate_prob
from .rate import FINITE, INFINITE, RateKind, biconjugate_check, rate, rate_curve
from .tilt import ZFunction


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    ok: bool
    detail: str

    def line(self) -> str:
        mark = "PASS" if self.ok else "FAIL"
        return f"[{mark}] criterion {self.number:2d} {self.name}: {self.detail}"


def _result(number: int, name: str, ok: bool, detail: str) -> CriterionResult:
    return CriterionResult(number=number, name=name, ok=bool(ok), detail=detail)


# 1 ------------------------------------------------------------------------


def _criterion_fibonacci(workers: int) -> CriterionResult:
    model = load_config("fibonacci")
    T = 80
    seq = partition_constrained(model, T)
    fib = [1, 1]
    while len(fib) <= T + 1:
        fib.append(fib[-1] + fib[-2])
    max_err = max(abs(seq[t] - math.log(fib[t])) for t in range(T + 1))
    psi = psi_rate(LogWeightSequence.from_model(model))
    golden = math.log((1.0 + math.sqrt(5.0)) / 2.0)
    psi_err = abs(psi - golden)
    ok = max_err <= 1e-9 and psi_err <= 1e-10
    return _result(
        1,
        "unit-weight partition vs integer recursion",
        ok,
        f"max ln-partition error {max_err:.2e} (tol 1e-09), growth-rate error {psi_err:.2e} (tol 1e-10)",
    )


# 2 ------------------------------------------------------------------------


def _criterion_z_identity(workers: int) -> CriterionResult:
    model = load_config("uniform12")
    zf = ZFunction(model)
    errs = [abs(zf([phi]).value - phi) for phi in np.linspace(-5.0, 5.0, 101)]
    ok = max(errs) <= 1e-10
    return _result(
        2,
        "tilted growth identity z(phi)=phi when rewards equal waits",
        ok,
        f"max |z(phi)-phi| = {max(errs):.2e} over 101 points in [-5,5] (tol 1e-10)",
    )


# 3 ------------------------------------------------------------------------


def _criterion_chernoff(workers: int) -> CriterionResult:
    worst = -math.inf
    T = 500
    for name in ("count", "xs23"):
        model = load_config(name)
        zf = ZFunction(model)
        for phi in np.linspace(-2.0, 2.0, 21):
            z = zf([phi]).value
            seq = solve_renewal(zf.weights_for([phi]), T)
            for t in range(T + 1):
                worst = max(worst, seq[t] - t * z)
    ok = worst <= 1e-9
    return _result(
        3,
        "finite-t Chernoff bound ln Psi_t(phi) <= t z(phi)",
        ok,
        f"max excess {worst:.2e} over two models, 21 tilts, t<=500 (tol 1e-09)",
    )


# 4 ------------------------------------------------------------------------


def _criterion_supermult(workers: int) -> CriterionResult:
    model = load_config("count")
    boxes = [(0.45, 0.55), (0.5, 0.75), (0.7, 1.0)]
    worst_violations = 0
    margins = []
    for box in boxes:
        rep = supermult_check(model, box, t_max=200)
        worst_violations += len(rep.violations)
        margins.append(rep.min_margin)
    ok = worst_violations == 0
    return _result(
        4,
        "raw-mass supermultiplicativity on convex boxes",
        ok,
        f"{worst_violations} violations over 3 boxes, pairs to tau+t<=200, min margins "
        + ", ".join(f"{m:.2e}" for m in margins),
    )


# 5 ------------------------------------------------------------------------


def _brute_measures(model, t):
    """Enumerate renewal compositions; returns ({w: ln mu}, {w: ln nu})."""
    w = model.waiting
    mu: dict[float, float] = {}
    nu: dict[float, float] = {}

    def put(d, key, logw):
        d[key] = np.logaddexp(d.get(key, -math.inf), logw)

    def rec(total_s, total_f, logw):
        if total_s == t:
            put(mu, round(total_f, 9), logw)
        surv = w.survival(t - total_s)
        if surv > 0.0:
            put(nu, round(total_f, 9), logw + math.log(surv))
        if total_s >= t:
            return
        for s, p in w.head.items():
            if total_s + s <= t:
                rec(total_s + s, total_f + model.f(s)[0], logw + model.v(s) + math.log(p))

    rec(0, 0.0, 0.0)
    return mu, nu


def _criterion_brute_force(workers: int) -> CriterionResult:
    names = ("count", "uniform12", "fibonacci", "xs23", "transient", "deterministic1")
    worst = 0.0
    for name in names:
        model = load_config(name)
        for t in range(0, 13):
            mu_bf, nu_bf = _brute_measures(model, t)
            mu = exact_constrained(model, t, times=[t])[t]
            nu = exact_free(model, t, times=[t])[t]
            for measure, oracle in ((mu, mu_bf), (nu, nu_bf)):
                vals = measure.axis_values(0)
                for i, lm in enumerate(measure.log_mass):
                    want = oracle.get(round(float(vals[i]), 9), -math.inf)
                    if lm == -math.inf and want == -math.inf:
                        continue
                    worst = max(worst, abs(lm - want))
    ok = worst <= 1e-10
    return _result(
        5,
        "lattice dynamic program vs path enumeration",
        ok,
        f"max |ln mass| error {worst:.2e} over 6 models, both laws, t<=12 (tol 1e-10)",
    )


# 6 ------------------------------------------------------------------------


def _criterion_empirical_rate(workers: int) -> CriterionResult:
    model = load_config("count")
    box = (0.45, 0.55)
    grid = [np.array([x]) for x in np.linspace(box[0], box[1], 101)]
    values = rate_curve(model, RateKind.CONSTRAINED, grid)
    inf_rate = min(rv.value for rv in values if rv.status == FINITE)
    ts = (500, 1000, 2000, 4000, 8000)
    points = empirical_rate(model, box, ts)
    diffs = {p.t: abs(p.rate - inf_rate) for p in points}
    decreasing = all(
        diffs[ts[i + 1]] < diffs[ts[i]] for i in range(len(ts) - 1)
    )
    ok = decreasing and diffs[2000] <= 0.02 and diffs[8000] <= 0.005
    return _result(
        6,
        "finite-t decay rate converges to the rate-function infimum",
        ok,
        f"inf I = {inf_rate:.6f}; |deviation| at t=2000: {diffs[2000]:.4f} (tol 0.02), "
        f"t=8000: {diffs[8000]:.5f} (tol 0.005), decreasing={decreasing}",
    )


# 7 ------------------------------------------------------------------------


def _criterion_sandwich(workers: int) -> CriterionResult:
    details = []
    ok = True
    for name in ("transient", "geom_tail"):
        rep = partition_sandwich(load_config(name), 5000)
        ok = ok and rep.ok
        details.append(
            f"{name}: avg {rep.average:.6f} in [{rep.lower:.6f}, {rep.upper:.6f}] +/- {rep.margin:.0e}"
        )
    return _result(7, "free-energy sandwich at t=5000", ok, "; ".join(details))


# 8 ------------------------------------------------------------------------


def _criterion_open_convex(workers: int) -> CriterionResult:
    rep = open_convex_counterexample([100, 300, 1000])
    final = rep.points[-1]
    ok = rep.ok and final.rate <= 0.01
    probe_txt = ", ".join(f"I_inf({w})={status}" for w, status in rep.probes)
    return _result(
        8,
        "open convex set: vanishing decay rate, infinite rate function",
        ok,
        f"rate at t=1000 is {final.rate:.2e} (tol 0.01), prob {math.exp(final.log_prob):.4f}; "
        f"{probe_txt}; cross-check {rep.cross_check_max_err:.1e}",
    )


# 9 ------------------------------------------------------------------------


def _criterion_closed_convex(workers: int) -> CriterionResult:
    ts = (10, 20, 50, 100)
    rep = cauchy_counterexample(ts, mc_at=20, n=1_000_000, seed=20260816, workers=workers)
    rates = [p.bound_rate for p in rep.points]
    decreasing = all(rates[i + 1] < rates[i] for i in range(len(rates) - 1))
    ok = rep.ok and decreasing and rates[-1] <= 0.12
    mc = rep.mc
    return _result(
        9,
        "closed convex set: subexponential lower bound beats the upper rate",
        ok,
        f"bound rates {', '.join(f'{r:.4f}' for r in rates)} (last tol 0.12, decreasing={decreasing}); "
        f"mc at t=20: {mc.estimate:.3e} +/- {mc.std_error:.1e} vs bound {math.exp(rep.mc_log_bound):.3e}; "
        f"probes all infinite={all(s == INFINITE for _, s in rep.probes)}",
    )


# 10 -----------------------------------------------------------------------


def _criterion_biconjugate(workers: int) -> CriterionResult:
    phi_grid = np.linspace(-2.0, 2.0, 21)
    rep_count = biconjugate_check(
        load_config("count"), np.linspace(0.5, 1.0, 201), phi_grid
    )
    rep_u12 = biconjugate_check(
        load_config("uniform12"), np.linspace(0.5, 1.5, 201), phi_grid
    )
    coarse = rep_count.levels[0].max_gap
    fine = rep_count.levels[1].max_gap
    ok = (
        rep_count.ok
        and rep_u12.ok
        and coarse <= 0.02
        and fine <= 0.005
    )
    return _result(
        10,
        "double transform of I recovers z on refining grids",
        ok,
        f"count gaps {coarse:.2e} -> {fine:.2e} (tols 0.02/0.005), lower bound ok={rep_count.upper_ok}; "
        f"waits-as-rewards gaps {rep_u12.levels[0].max_gap:.1e} -> {rep_u12.levels[1].max_gap:.1e}",
    )


# 11 -----------------------------------------------------------------------


def _criterion_free_rate_linear(workers: int) -> CriterionResult:
    model = load_config("transient")
    errs = []
    for k in range(11):
        w = k / 10.0
        rv = rate(model, RateKind.FREE_LOWER, w)
        errs.append(abs(rv.value - w * math.log(2.0)))
    ok = max(errs) <= 1e-6
    return _result(
        11,
        "transient free lower rate is w ln 2",
        ok,
        f"max error {max(errs):.2e} over 11 points in [0,1] (tol 1e-06)",
    )


# 12 -----------------------------------------------------------------------


def _criterion_mc_calibration(workers: int) -> CriterionResult:
    model = load_config("count")
    t, box, n = 50, (0.55, 0.75), 20_000
    exact = math.exp(prob_box(exact_constrained(model, t, times=[t])[t], box, scaled=True))
    zs = []
    for seed in range(50):
        est = estimate_prob(model, t, box, law="constrained", n=n, seed=seed, workers=workers)
        zs.append((est.estimate - exact) / est.std_error)
    max_abs = max(abs(z) for z in zs)
    mean_z = sum(zs) / len(zs)
    ok = max_abs <= 3.0 and abs(mean_z) <= 0.5
    return _result(
        12,
        "Monte Carlo calibration against the exact law",
        ok,
        f"50 seeds: max |z| = {max_abs:.2f} (tol 3), mean z = {mean_z:+.3f} (tol 0.5), exact p = {exact:.4f}",
    )


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Spec:
    number: int
    name: str
    fn: Callable[[int], CriterionResult]


CRITERIA: tuple[_Spec, ...] = (
    _Spec(1, "unit-weight-partition", _criterion_fibonacci),
    _Spec(2, "z-identity", _criterion_z_identity),
    _Spec(3, "chernoff-bound", _criterion_chernoff),
    _Spec(4, "supermultiplicativity", _criterion_supermult),
    _Spec(5, "lattice-vs-enumeration", _criterion_brute_force),
    _Spec(6, "empirical-rate-convergence", _criterion_empirical_rate),
    _Spec(7, "partition-sandwich", _criterion_sandwich),
    _Spec(8, "open-convex-counterexample", _criterion_open_convex),
    _Spec(9, "closed-convex-counterexample", _criterion_closed_convex),
    _Spec(10, "biconjugate-duality", _criterion_biconjugate),
    _Spec(11, "transient-free-rate", _criterion_free_rate_linear),
    _Spec(12, "mc-calibration", _criterion_mc_calibration),
)


def run_criterion(number: int, *, workers: int = 1) -> CriterionResult:
    for spec in CRITERIA:
        if spec.number == number:
            return spec.fn(workers)
    raise ValueError(f"no criterion {number}; have 1..{len(CRITERIA)}")


def run_all(numbers=None, *, workers: int = 1, stream=None) -> list[CriterionResult]:
    stream = stream if stream is not None else sys.stdout
    selected = set(numbers) if numbers else None
    results = []
    for spec in CRITERIA:
        if selected is not None and spec.number not in selected:
            continue
        res = spec.fn(workers)
        print(res.line(), file=stream, flush=True)
        results.append(res)
    return results
