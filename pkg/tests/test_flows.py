from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from switchmlsi import calibration
from switchmlsi.chain import build_chain
from switchmlsi.errors import PathNotInSourceGraph, RatioOutOfRange
from switchmlsi.flows import (Flow, classical_congestion, comparison_bound, congestion_A, entropy_comparison,
                              flow_from_json, flow_to_json, telescope_check, telescope_terms, validate_flow)


@pytest.fixture(scope="module")
def path4():
    pi = [Fraction(1, 4)] * 4
    rates = {}
    for i in range(3):
        rates[(i, i + 1)] = 1
        rates[(i + 1, i)] = 1
    return build_chain(range(4), pi, rates)


def test_identity_flow_conserves(qu4):
    fr = validate_flow(Flow.identity(qu4), qu4, qu4)
    assert fr.ok and fr.max_abs == 0


def test_halved_weight_shows_residual(qu4):
    flow = Flow.identity(qu4)
    bad = flow.with_weight(5, flow.weight(5) / 2)
    fr = validate_flow(bad, qu4, qu4)
    assert not fr.ok
    a, b = flow.path(5)[0], flow.path(5)[-1]
    assert fr.n_nonzero == 1
    assert fr.nonzero[0] == (a, b, -flow.weight(5) / 2)


@pytest.mark.parametrize("r", [1.0, 2.0, 1e6])
def test_identity_congestion_is_one(qu4, r):
    assert congestion_A(Flow.identity(qu4), qu4, r).value == 1.0
    assert classical_congestion(Flow.identity(qu4), qu4).value == 1.0


def test_single_long_path_contribution(path4):
    w = Fraction(1, 100)
    flow = Flow.from_paths([[0, 1, 2, 3]], [w])
    r = 5.0
    mass = 0.25  # π(x)Q(x,y) on every path edge
    A = congestion_A(flow, path4, r)
    assert A.value == pytest.approx(float(w) * (1 + 4 * math.log(r)) / mass)
    assert classical_congestion(flow, path4).value == pytest.approx(3 * float(w) / mass)


def test_path_must_follow_source_edges(path4):
    flow = Flow.from_paths([[0, 2]], [Fraction(1, 10)])
    with pytest.raises(PathNotInSourceGraph):
        congestion_A(flow, path4, 2.0)


def test_telescope_single_step():
    lhs, rhs, factor = telescope_terms([1.0, 3.0], 3.0)
    assert lhs == pytest.approx(rhs) and factor == pytest.approx(1.0)


def test_telescope_geometric_within_calibration():
    r = 4.0
    lhs, rhs, factor, bound = telescope_check([1, r, r**2, r**3], r)
    assert factor <= bound
    assert factor == pytest.approx(3.0)


def test_telescope_ratio_guard():
    with pytest.raises(RatioOutOfRange):
        telescope_terms([1.0, 5.0], 2.0)
    with pytest.raises(RatioOutOfRange):
        telescope_terms([1.0, -1.0], 2.0)


def test_telescope_unregularized_sequence_blows_up():
    # ε, 1/log(1/ε), 1: the first ratio grows without bound as ε → 0
    factors = []
    for eps in (1e-2, 1e-6, 1e-12):
        v = [eps, 1 / math.log(1 / eps), 1.0]
        r = max(v[1] / v[0], v[2] / v[1])
        factors.append(telescope_terms(v, r)[2])
        with pytest.raises(RatioOutOfRange):
            telescope_terms(v, 10.0)
    assert factors[0] < factors[1] < factors[2]


def test_comparison_bound_identity():
    C = calibration.constant("comparison_C")
    assert comparison_bound(1.0, 1.0, 0.3) == pytest.approx(C * 0.3)
    with pytest.raises(ValueError):
        comparison_bound(1.0, 0.0, 0.3)


def test_entropy_comparison_same_measure(qu4):
    f = np.random.default_rng(0).lognormal(0, 1, 90)
    ent, bound, a = entropy_comparison(qu4, qu4.pi, f)
    assert a == 1.0 and ent == pytest.approx(bound)


def test_entropy_comparison_random_measures(qu4):
    rng = np.random.default_rng(1)
    for _ in range(50):
        pt = rng.dirichlet(np.ones(90))
        f = rng.lognormal(0, 2, 90)
        ent, bound, a = entropy_comparison(qu4, pt, f)
        assert ent <= bound * (1 + 1e-12)


def test_flow_json_round_trip(path4):
    flow = Flow.from_paths([[0, 1, 2], [1, 2]], [Fraction(1, 3), Fraction(2, 7)])
    back = flow_from_json(flow_to_json(flow))
    assert sorted(back.path(p) for p in range(back.n_paths)) == [[0, 1, 2], [1, 2]]
    assert sorted(back.weight(p) for p in range(back.n_paths)) == [Fraction(2, 7), Fraction(1, 3)]
