from __future__ import annotations

import io
import math
from fractions import Fraction

import numpy as np
import pytest

from switchmlsi import oracles
from switchmlsi.errors import SpaceTooLarge
from switchmlsi.graphs import (UNSTRUCTURED, BipMultiGraph, Switching, categorize, circulant, connecting_switching,
                               count_space, default_m, enumerate_multi, enumerate_simple, neighbors_switch,
                               orbit_representatives, pi_bc, pi_bc_denominator, pi_bc_numerators, read_graphs,
                               simple_mass, write_graphs)


@pytest.mark.parametrize("n,expect", [(4, 90), (5, 2040), (6, 67950)])
def test_simple_counts(n, expect):
    assert count_space(n, 2, True) == expect
    assert len(enumerate_simple(n, 2)) == expect


@pytest.mark.parametrize("n,expect", [(4, 282), (5, 6210)])
def test_multi_counts(n, expect):
    assert count_space(n, 2, False) == expect
    assert len(enumerate_multi(n, 2)) == expect


@pytest.mark.parametrize("n,d", [(4, 2), (5, 2), (6, 3)])
def test_counts_match_oracle(n, d):
    assert count_space(n, d, True) == oracles.count_line_sum_matrices(n, d, 1)


def test_count_oracle_permutation_matrices():
    assert oracles.count_line_sum_matrices(2, 1, 1) == 2


def test_enumeration_sorted_and_regular():
    sp = enumerate_simple(5, 2)
    assert (np.diff(sp.codes) > 0).all()
    assert (sp.mats.sum(axis=1) == 2).all() and (sp.mats.sum(axis=2) == 2).all()
    assert sp.index(sp[123]) == 123


def test_infeasible_parameters():
    with pytest.raises(ValueError):
        enumerate_simple(3, 2)


def test_cap_raises():
    with pytest.raises(SpaceTooLarge):
        enumerate_simple(8, 4, cap=1000)


def test_pi_bc_sums_to_one():
    sp = enumerate_multi(4, 2)
    assert int(pi_bc_numerators(sp.mats, 2).sum()) == pi_bc_denominator(4, 2)


def test_pi_bc_matches_configuration_oracle():
    conf = oracles.configuration_measure(4, 2)
    assert len(conf) == 282
    for g, p in list(conf.items())[::17]:
        assert pi_bc(BipMultiGraph.from_array(np.array(g), 2)) == p


def test_pi_bc_simple_and_double():
    g = circulant(4, 2)
    assert pi_bc(g) == Fraction(math.factorial(2) ** 8, math.factorial(8))
    h = BipMultiGraph.from_array([[2, 0, 0, 0], [0, 1, 1, 0], [0, 1, 0, 1], [0, 0, 1, 1]], 2)
    assert pi_bc(h) == pi_bc(g) / 2


def test_simple_mass_n4():
    sm = simple_mass(4, 2)
    assert sm.mass == Fraction(4, 7)
    assert sm.ratio == pytest.approx(float(Fraction(4, 7)) / math.exp(-0.5))
    assert simple_mass(4, 2, method="count").mass == sm.mass


def test_categories():
    assert categorize(circulant(5, 2), 1) == 0
    triple = BipMultiGraph.from_array([[3, 0, 0, 0, 0], [0, 3, 0, 0, 0], [0, 0, 1, 1, 1],
                                       [0, 0, 1, 1, 1], [0, 0, 1, 1, 1]], 3)
    assert categorize(triple, 5) == UNSTRUCTURED
    incident = BipMultiGraph.from_array([[2, 0, 0, 0], [0, 0, 1, 1], [0, 1, 1, 0], [0, 1, 0, 1]], 2)
    assert categorize(incident, 2) == 1
    two_touching = BipMultiGraph.from_array([[2, 0, 0, 0], [0, 2, 0, 0], [0, 0, 1, 1], [0, 0, 1, 1]], 2)
    assert categorize(two_touching, 2) == 2
    same_row = BipMultiGraph.from_array([[1, 1, 0, 0], [1, 1, 0, 0], [0, 0, 2, 0], [0, 0, 0, 2]], 2)
    assert categorize(same_row, 1) == UNSTRUCTURED


def test_categories_agree_with_oracle():
    for g in oracles.all_graphs(4, 2, 2):
        for m in (1, 2):
            assert categorize(BipMultiGraph.from_array(np.array(g), 2), m) == oracles.category(g, m)


def test_default_m_clamped():
    assert [default_m(n) for n in (4, 8, 15)] == [1, 1, 1]


def test_switching_roundtrip():
    g = circulant(5, 2)
    for s, h in neighbors_switch(g):
        assert connecting_switching(g, h) == s
        assert h.apply(s.reverse()) == g


def test_switch_neighbours_match_oracle():
    for g in oracles.all_graphs(4, 2, 1)[:20]:
        mine = sorted(h.key for _, h in neighbors_switch(BipMultiGraph.from_array(np.array(g), 2)))
        ref = sorted("".join(str(x) for row in h for x in row) for h, c in oracles.switch_neighbours(g).items()
                     for _ in range(c))
        assert mine == ref


def test_apply_rejects_bad_switching():
    with pytest.raises(ValueError):
        circulant(4, 2).apply(Switching(0, 0, 1, 2))


def test_orbits_d2_are_cycle_types():
    # 2-regular bipartite graphs are disjoint even cycles: partitions of n into parts ≥ 2
    assert [len(orbit_representatives(enumerate_simple(n, 2))) for n in (4, 5)] == [2, 2]


def test_file_format_round_trip():
    sp = enumerate_simple(4, 2)
    buf = io.StringIO()
    assert write_graphs(buf, sp) == 90
    buf.seek(0)
    back = read_graphs(buf)
    assert [g.key for g in back] == sp.keys()


def test_invalid_graph_rejected():
    with pytest.raises(ValueError):
        BipMultiGraph.from_array([[1, 1], [1, 0]], 2)
