"""Rate functions via certified concave maximization."""

import math

import numpy as np
import pytest

from renewal_ldp import configs
from renewal_ldp.errors import EligibilityError
from renewal_ldp.rate import (
    FINITE,
    INFINITE,
    RateKind,
    biconjugate_check,
    rate,
    rate_curve,
    rate_minimum,
)

LN2 = math.log(2.0)


def count_rate(w: float) -> float:
    """Legendre transform of the count model's z in closed form, w in (1/2, 1)."""
    x = (1.0 - w) / (2.0 * w - 1.0)
    phi = -math.log((x * x + x) / 2.0)
    return w * phi + math.log(x)


def test_count_rate_closed_form():
    model = configs.load("count")
    for w in (0.52, 0.55, 0.6, 2.0 / 3.0, 0.75, 0.9, 0.98):
        rv = rate(model, RateKind.CONSTRAINED, w)
        assert rv.status == FINITE
        assert rv.value == pytest.approx(count_rate(w), abs=1e-9), w
    assert rate(model, RateKind.CONSTRAINED, 2.0 / 3.0).value == pytest.approx(0.0, abs=1e-11)


def test_count_rate_boundary_values():
    model = configs.load("count")
    # w = 1/2 forces every wait to 2, w = 1 forces every wait to 1
    lo = rate(model, RateKind.CONSTRAINED, 0.5)
    hi = rate(model, RateKind.CONSTRAINED, 1.0)
    assert lo.status == FINITE and hi.status == FINITE
    assert lo.value == pytest.approx(LN2 / 2.0, abs=1e-9)
    assert hi.value == pytest.approx(LN2, abs=1e-9)


def test_count_rate_infinite_outside_hull():
    model = configs.load("count")
    for w in (-1.0, 0.3, 0.49, 1.01, 2.0):
        rv = rate(model, RateKind.CONSTRAINED, w)
        assert rv.status == INFINITE, w
        assert rv.value == math.inf
        assert rv.arg_phi is None
        assert "slope" in rv.detail


def test_degenerate_reward_rate():
    # rewards equal waits: only w = 1 is reachable
    model = configs.load("uniform12")
    at_one = rate(model, RateKind.CONSTRAINED, 1.0)
    assert at_one.status == FINITE
    assert at_one.value == pytest.approx(0.0, abs=1e-10)
    assert rate(model, RateKind.CONSTRAINED, 0.9).status == INFINITE
    assert rate(model, RateKind.CONSTRAINED, 1.1).status == INFINITE


def test_transient_free_rates_are_linear():
    model = configs.load("transient")
    for w in (0.0, 0.25, 0.5, 1.0):
        lo = rate(model, RateKind.FREE_LOWER, w)
        hi = rate(model, RateKind.FREE_UPPER, w)
        assert lo.status == FINITE and hi.status == FINITE
        assert lo.value == pytest.approx(w * LN2, abs=1e-8)
        assert hi.value == pytest.approx(w * LN2, abs=1e-8)
    assert rate(model, RateKind.FREE_LOWER, 1.5).status == INFINITE
    assert rate(model, RateKind.FREE_LOWER, -0.2).status == INFINITE


def test_finite_support_free_lower_diverges_off_one():
    # with no surviving mass past s0 the free floors push I_inf to infinity
    model = configs.load("xs23")
    for w in (0.0, 0.5, 0.9):
        assert rate(model, RateKind.FREE_LOWER, w).status == INFINITE
    assert rate(model, RateKind.FREE_LOWER, 1.0).value == pytest.approx(0.0, abs=1e-10)


def test_two_dim_noise_coordinate():
    model = configs.load("cauchy23")
    # the heavy coordinate contributes zero rate wherever the clean one fits
    rv = rate(model, RateKind.CONSTRAINED, (1.0, 7.3))
    assert rv.status == FINITE
    assert rv.value == pytest.approx(0.0, abs=1e-9)
    rv = rate(model, RateKind.FREE_UPPER, (1.0, 5.0))
    assert rv.status == FINITE
    assert rv.value == pytest.approx(0.0, abs=1e-9)
    # off the clean hull the certificate comes from the first coordinate
    assert rate(model, RateKind.FREE_UPPER, (0.9, 10.0)).status == INFINITE
    assert rate(model, RateKind.CONSTRAINED, (1.2, 0.0)).status == INFINITE


def test_w_shape_checked():
    with pytest.raises(EligibilityError):
        rate(configs.load("count"), RateKind.CONSTRAINED, (0.5, 0.5))


def test_rate_curve_matches_pointwise():
    model = configs.load("count")
    grid = [np.array([x]) for x in np.linspace(0.55, 0.95, 9)]
    curve = rate_curve(model, RateKind.CONSTRAINED, grid)
    threaded = rate_curve(model, RateKind.CONSTRAINED, grid, workers=3)
    for wp, a, b in zip(grid, curve, threaded):
        single = rate(model, RateKind.CONSTRAINED, wp)
        assert a.value == pytest.approx(single.value, abs=1e-12)
        assert b.value == pytest.approx(single.value, abs=1e-12)
        assert a.status == b.status == single.status


def test_rate_minimum_finds_the_mean():
    w_star, rv = rate_minimum(configs.load("count"), RateKind.CONSTRAINED)
    assert rv.status == FINITE
    assert rv.value <= 1e-6
    assert w_star[0] == pytest.approx(2.0 / 3.0, abs=1e-3)
    # free laws include the frozen point w = 0 in the search box
    w_star, rv = rate_minimum(configs.load("transient"), RateKind.FREE_LOWER)
    assert rv.value == pytest.approx(0.0, abs=1e-8)
    assert w_star[0] == pytest.approx(0.0, abs=1e-3)


def test_biconjugate_gaps_shrink():
    rep = biconjugate_check(
        configs.load("count"), np.linspace(0.5, 1.0, 41), np.linspace(-1.5, 1.5, 11)
    )
    assert rep.ok
    assert rep.levels[0].n_points == 41
    assert rep.levels[1].n_points == 81
    assert rep.levels[1].max_gap <= rep.levels[0].max_gap + 1e-12
    assert rep.levels[0].min_gap >= -1e-6
