"""Tilted growth rate z and its convexity certificate."""

import math

import numpy as np
import pytest

from renewal_ldp import configs
from renewal_ldp.errors import EligibilityError
from renewal_ldp.tilt import ZFunction, z_graph, z_of

LN2 = math.log(2.0)


def count_z(phi: float) -> float:
    # A(zeta; phi) = e^phi (x + x^2)/2 = 1 with x = e^-zeta
    x = (-1.0 + math.sqrt(1.0 + 8.0 * math.exp(-phi))) / 2.0
    return -math.log(x)


def fibonacci_z(phi: float) -> float:
    x = (-1.0 + math.sqrt(1.0 + 4.0 * math.exp(-phi))) / 2.0
    return -math.log(x)


def geom_tail_z(phi: float) -> float:
    # count rewards scale every weight by e^phi; solve q/(1-q) = e^-phi
    return math.log1p(math.exp(phi)) - LN2 - 2.0


@pytest.mark.parametrize(
    "name,oracle",
    [
        ("count", count_z),
        ("fibonacci", fibonacci_z),
        ("geom_tail", geom_tail_z),
        ("uniform12", lambda phi: phi),
        ("xs23", lambda phi: phi),
        ("transient", lambda phi: phi - LN2),
    ],
)
def test_z_against_closed_forms(name, oracle):
    zf = ZFunction(configs.load(name))
    for phi in np.linspace(-4.0, 4.0, 33):
        assert zf([phi]).value == pytest.approx(oracle(float(phi)), abs=1e-10), (name, phi)


def test_bracket_is_tight_and_ordered():
    res = z_of(configs.load("count"), [0.3])
    lo, hi = res.bracket
    assert lo <= res.value <= hi
    assert hi - lo <= 1e-12
    assert res.iterations > 0
    assert res.status == "converged"


def test_weights_for_applies_reward_tilt():
    zf = ZFunction(configs.load("count"))
    w = zf.weights_for([0.7])
    assert w.head == pytest.approx((math.log(0.5) + 0.7, math.log(0.5) + 0.7))
    # tail coefficients pick up phi . (alpha, beta) from the affine reward
    zf = ZFunction(configs.load("geom_tail"))
    w0 = zf.weights_for([0.0])
    w1 = zf.weights_for([1.0])
    u0, r0 = w0.tail
    u1, r1 = w1.tail
    assert u1 - u0 == pytest.approx(1.0)  # f(s) = 1 + 0 s, so only u shifts
    assert r1 == pytest.approx(r0)


def test_vector_phi_shape_checked():
    zf = ZFunction(configs.load("count"))
    with pytest.raises(EligibilityError):
        zf([0.1, 0.2])


def test_noise_coordinate_cannot_be_tilted():
    zf = ZFunction(configs.load("cauchy23"))
    with pytest.raises(EligibilityError):
        zf([0.0, 0.5])
    with pytest.raises(EligibilityError):
        zf([1.0, -1e-6])
    # the clean coordinate still works and rewards there equal the waits
    assert zf([0.8, 0.0]).value == pytest.approx(0.8, abs=1e-10)


def test_z_graph_convexity_certificate():
    graph = z_graph(configs.load("count"), [[x] for x in np.linspace(-2, 2, 41)])
    assert len(graph.rows) == 41
    assert graph.convexity.triples > 0
    assert graph.convexity.ok
    phis = [row[0][0] for row in graph.rows]
    assert phis == sorted(phis)


def test_z_graph_workers_match_serial():
    pts = [[x] for x in np.linspace(-1, 1, 9)]
    model = configs.load("xs23")
    serial = z_graph(model, pts)
    threaded = z_graph(model, pts, workers=3)
    for (_, a), (_, b) in zip(serial.rows, threaded.rows):
        assert a.value == b.value
