from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from switchmlsi import oracles
from switchmlsi.chain import (build_chain, chain_from_json, chain_to_json, detailed_balance_residuals, dirichlet,
                              entropy, entropy_production, estimate_mlsi, graph_distances, mlsi_ratio,
                              regularity_constants, tv_curve, tv_mixing_time)
from switchmlsi.errors import (BadMeasure, DimensionMismatch, GridTooCoarse, NonPositiveFunction, NotIrreducible,
                               NotReversible)


def test_symmetric_two_state_is_valid(two_state):
    assert two_state.size == 2
    assert two_state.n_edges == 2
    assert not np.any(detailed_balance_residuals(two_state))


def test_detailed_balance_failure_raises():
    with pytest.raises(NotReversible):
        build_chain([0, 1], [Fraction(1, 3), Fraction(2, 3)], {(0, 1): 1, (1, 0): 1})


def test_measure_must_sum_to_one():
    with pytest.raises(BadMeasure):
        build_chain([0, 1], [Fraction(1, 2), Fraction(1, 3)], {(0, 1): 1, (1, 0): 1})


def test_reducible_chain_rejected():
    pi = [Fraction(1, 4)] * 4
    with pytest.raises(NotIrreducible):
        build_chain(range(4), pi, {(0, 1): 1, (1, 0): 1, (2, 3): 1, (3, 2): 1})


def test_missing_reverse_edge_rejected():
    with pytest.raises(NotReversible):
        build_chain([0, 1], [Fraction(1, 2)] * 2, {(0, 1): 1})


def test_qu4_has_90_states(qu4):
    assert qu4.size == 90
    assert not np.any(detailed_balance_residuals(qu4))


@pytest.mark.parametrize("c", [1.0, 0.3, 7.5])
def test_entropy_of_constants_vanishes(two_state, c):
    assert entropy(two_state, [c, c]) == pytest.approx(0.0, abs=1e-15)


def test_entropy_rejects_nonpositive(two_state):
    with pytest.raises(NonPositiveFunction):
        entropy(two_state, [1.0, 0.0])


def test_entropy_rejects_wrong_length(two_state):
    with pytest.raises(DimensionMismatch):
        entropy(two_state, [1.0, 2.0, 3.0])


def test_dirichlet_two_state_hand_value(two_state):
    # ½ Σ_x Σ_y π(x)Q(x,y)(f(x)−f(y))(log f(x)−log f(y)) with two oriented terms of ½(e−1)
    assert entropy_production(two_state, [1.0, math.e]) == pytest.approx((math.e - 1) / 2, rel=1e-14)


def test_dirichlet_constant_is_zero(qu4):
    g = np.random.default_rng(0).random(90)
    assert dirichlet(qu4, np.full(90, 2.0), g) == 0.0


def test_mlsi_ratio_constant_is_none(qu4):
    assert mlsi_ratio(qu4, np.ones(90)) is None


def test_mlsi_estimate_dominates_single_function(two_state):
    est = estimate_mlsi(two_state, budget=50, seed=1)
    assert est.value >= mlsi_ratio(two_state, [1.0, 2.0]) - 1e-12


def test_mlsi_estimate_monotone_in_budget(path3):
    vals = [estimate_mlsi(path3, budget=b, seed=3).value for b in (5, 20, 80)]
    assert vals[0] <= vals[1] <= vals[2]


def test_regularity_two_state(two_state):
    rc = regularity_constants(two_state)
    assert rc.gamma == 1
    assert rc.upsilon == 16


def test_regularity_qu4(qu4):
    rc = regularity_constants(qu4)
    assert rc.gamma == 1
    assert rc.upsilon == 7168
    assert int(qu4.degrees.max()) == 16


def test_graph_distances_against_bfs(qu4):
    dist = graph_distances(qu4)
    adj = {i: [int(j) for j in qu4.neighbors(i)] for i in range(qu4.size)}
    for s in (0, 17, 89):
        ref = oracles.bfs_distances(adj, s)
        assert all(dist[s, t] == ref[t] for t in range(qu4.size))
    assert (dist[qu4.rows, qu4.indices] == 1).all()


def test_tv_curve_matches_dense(qu4):
    for t in (0.0, 0.5, 3.0, 9.0):
        assert tv_curve(qu4, [t])[0] == pytest.approx(oracles.dense_tv(qu4, t), abs=1e-10)


def test_tv_mixing_time_matches_dense(qu4):
    res = tv_mixing_time(qu4, 0.25, np.arange(0, 40, 0.5))
    assert abs(res.t_refined - oracles.dense_mixing_time(qu4, 0.25)) <= 1e-8
    assert res.t_grid == 7.0


def test_tv_mixing_time_grid_too_coarse(qu4):
    with pytest.raises(GridTooCoarse):
        tv_mixing_time(qu4, 0.25, [0.0, 0.5, 1.0])


def test_tv_mixing_time_rejects_bad_epsilon(qu4):
    with pytest.raises(ValueError):
        tv_mixing_time(qu4, 1.5, [0.0, 1.0])


def test_single_state_chain_is_mixed_at_zero():
    ch = build_chain(["only"], [1], {})
    res = tv_mixing_time(ch, 0.9, [0.0, 1.0])
    assert res.t_refined == 0.0


def test_json_round_trip(path3):
    back = chain_from_json(chain_to_json(path3))
    assert back.states == path3.states
    assert [back.pi_of(i) for i in range(3)] == [path3.pi_of(i) for i in range(3)]
    assert back.rate(1, 2) == Fraction(1, 2)
