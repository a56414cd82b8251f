"""Counter-based sampling and weighted Monte Carlo estimation."""

import math

import numpy as np
import pytest

from renewal_ldp import configs, rng
from renewal_ldp.kernel import partition_constrained
from renewal_ldp.lattice import exact_constrained, exact_free, prob_box
from renewal_ldp.montecarlo import (
    CONSTRAINED,
    FREE,
    cauchy_counterexample,
    estimate_prob,
    resolve_workers,
    sample_paths,
)

# -- the counter-based generator ---------------------------------------------


def test_uniform01_deterministic_and_open():
    a = rng.uniform01(7, np.arange(1000), 3)
    b = rng.uniform01(7, np.arange(1000), 3)
    assert np.array_equal(a, b)
    assert np.all(a > 0.0) and np.all(a < 1.0)


def test_uniform01_scalar_matches_array():
    arr = rng.uniform01(11, np.arange(5), 2)
    for p in range(5):
        assert float(rng.uniform01(11, p, 2)) == arr[p]


def test_uniform01_broadcasts():
    grid = rng.uniform01(3, np.arange(4)[:, None], np.arange(6)[None, :])
    assert grid.shape == (4, 6)
    assert len(np.unique(grid)) == 24


def test_uniform01_streams_and_seeds_decorrelate():
    base = rng.uniform01(5, np.arange(100), 0)
    other_stream = rng.uniform01(5, np.arange(100), 0, stream=1)
    other_seed = rng.uniform01(6, np.arange(100), 0)
    assert not np.any(base == other_stream)
    assert not np.any(base == other_seed)


def test_uniform01_no_integer_warnings():
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("error")
        rng.uniform01(2**63 + 11, 0, 0)
        rng.uniform01(1, np.uint64(2**64 - 1), 2**62)


# -- estimator plumbing --------------------------------------------------------


def test_estimates_identical_across_workers():
    model = configs.load("count")
    kw = dict(t=64, box=(0.6, 0.8), law=CONSTRAINED, n=70_000, seed=99)
    one = estimate_prob(model, workers=1, **kw)
    two = estimate_prob(model, workers=2, **kw)
    four = estimate_prob(model, workers=4, **kw)
    assert one == two == four


def test_seed_is_required():
    with pytest.raises(TypeError):
        estimate_prob(configs.load("count"), 10, (0.5, 1.0), n=100)


def test_input_guards():
    model = configs.load("count")
    with pytest.raises(ValueError):
        estimate_prob(model, 0, (0.5, 1.0), n=10, seed=1)
    with pytest.raises(ValueError):
        estimate_prob(model, 5, (0.5, 1.0), n=0, seed=1)
    with pytest.raises(ValueError):
        estimate_prob(model, 5, (0.5, 1.0), law="tilted", n=10, seed=1)


def test_degenerate_when_event_impossible():
    # waits are 2 or 3, so no path renews exactly at t = 1
    est = estimate_prob(configs.load("xs23"), 1, (0.0, 10.0), n=500, seed=4)
    assert est.degenerate
    assert math.isnan(est.estimate)
    assert est.ess == 0.0


def test_estimate_agrees_with_exact_law():
    model = configs.load("count")
    t, box = 40, (0.6, 0.8)
    exact = math.exp(prob_box(exact_constrained(model, t)[t], box, scaled=True))
    est = estimate_prob(model, t, box, n=120_000, seed=12)
    assert est.flags == ()
    assert abs(est.estimate - exact) <= 4.0 * est.std_error
    assert 0 < est.ess <= est.n_samples


def test_constrained_normalizer_with_potential_and_tail():
    # every pinned path carries weight e^{-2t}, so the weighted mean must
    # land on ln Z^c_t up to the error of the renewal-probability estimate
    model = configs.load("geom_tail")
    t = 18
    est = estimate_prob(model, t, (0.0, 100.0), n=60_000, seed=21)
    assert est.flags == ()
    assert est.estimate == pytest.approx(1.0, abs=1e-12)
    ln_zc = partition_constrained(model, t)[t]
    assert est.log_normalizer_mean == pytest.approx(ln_zc, abs=0.02)


def test_free_law_estimate_matches_exact_distribution():
    model = configs.load("transient")
    t, box = 10, (-0.5, 0.45)
    exact = math.exp(prob_box(exact_free(model, t)[t], box, scaled=True))
    est = estimate_prob(model, t, box, law=FREE, n=80_000, seed=6)
    assert est.flags == ()
    assert abs(est.estimate - exact) <= 4.0 * est.std_error


def test_weight_mismatch_is_flagged():
    # the free law of this model concentrates on few renewals while the
    # proposal packs them in; the estimator must flag the collapsed ESS
    est = estimate_prob(
        configs.load("geom_tail"), 18, (-100.0, 100.0), law=FREE, n=60_000, seed=21
    )
    assert "low_ess" in est.flags
    assert est.ess < 100.0


# -- single-path view ----------------------------------------------------------


def test_sample_paths_reproduce_batch_statistics():
    model = configs.load("geom_tail")
    t, n, seed, box = 25, 4000, 17, (0.2, 0.6)
    num = den = 0.0
    for path in sample_paths(model, t, n, seed):
        w = math.exp(path.h_t) if path.u_t else 0.0
        den += w
        scaled = path.w_t[0] / t
        if box[0] <= scaled <= box[1]:
            num += w
    est = estimate_prob(model, t, box, n=n, seed=seed)
    assert est.estimate == pytest.approx(num / den, rel=1e-9)


def test_sample_paths_free_law_consistency():
    model = configs.load("transient")
    t, n, seed = 12, 5000, 30
    num = den = 0.0
    for path in sample_paths(model, t, n, seed):
        w = math.exp(path.h_t)
        den += w
        if path.w_t[0] / t <= 0.5:
            num += w
    est = estimate_prob(model, t, (-1.0, 0.5), law=FREE, n=n, seed=seed)
    assert est.estimate == pytest.approx(num / den, rel=1e-9)


def test_sample_path_fields():
    model = configs.load("count")
    paths = list(sample_paths(model, 10, 50, 8))
    assert [p.path_index for p in paths] == list(range(50))
    for p in paths:
        finite = [s for s in p.waits if s != math.inf]
        landed = sum(finite[: len(p.rewards)])
        assert p.u_t == (landed == 10 and len(p.rewards) == len(finite))
        assert p.w_t[0] == pytest.approx(sum(r[0] for r in p.rewards))
        assert p.h_t == 0.0


def test_transient_paths_hit_the_graveyard():
    # each step continues with probability 1/2, so surviving to t = 8 has mass 2^-8
    paths = list(sample_paths(configs.load("transient"), 8, 20_000, 5))
    frac = sum(p.had_inf for p in paths) / len(paths)
    assert frac == pytest.approx(1.0 - 0.5**8, abs=0.01)
    for p in paths:
        if p.had_inf:
            assert p.waits[-1] == math.inf
            assert not p.u_t


def test_noise_coordinate_is_sampled():
    paths = list(sample_paths(configs.load("cauchy23"), 12, 200, 3))
    spread = {round(p.w_t[1], 6) for p in paths if p.rewards}
    assert len(spread) > 150
    for p in paths:
        assert p.w_t[0] == pytest.approx(sum(r[0] for r in p.rewards))


# -- reports -------------------------------------------------------------------


def test_resolve_workers_env(monkeypatch):
    monkeypatch.delenv("RENEWAL_LDP_THREADS", raising=False)
    assert resolve_workers(None) == 1
    assert resolve_workers(3) == 3
    monkeypatch.setenv("RENEWAL_LDP_THREADS", "5")
    assert resolve_workers(None) == 5


def test_cauchy_counterexample_report():
    rep = cauchy_counterexample([10, 20], mc_at=10, n=40_000, seed=2)
    assert rep.ok
    assert [p.t for p in rep.points] == [10, 20]
    # the bound is ln P[xi >= t^2] + ln Z^c_{t-1}
    ln_zc = partition_constrained(configs.load("cauchy23"), 19)
    want = math.log(math.atan(1.0 / 100.0) / math.pi) + ln_zc[9]
    assert rep.points[0].log_bound == pytest.approx(want, abs=1e-12)
    assert rep.mc_t == 10
    assert rep.mc.estimate + 3 * rep.mc.std_error >= math.exp(rep.mc_log_bound)


def test_cauchy_counterexample_needs_seed_for_mc():
    with pytest.raises(ValueError, match="seed"):
        cauchy_counterexample([10], mc_at=10, n=1000)
