from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from switchmlsi import auxchain as ax
from switchmlsi import oracles
from switchmlsi.errors import MembershipViolated, NotAdjacent, NotInCategory
from switchmlsi.flows import validate_flow
from switchmlsi.graphs import BipMultiGraph, Switching, categorize, circulant, enumerate_multi, neighbors_switch

from conftest import release_caches

DOUBLE = BipMultiGraph.from_array([[2, 0, 0, 0, 0], [0, 1, 1, 0, 0], [0, 0, 1, 1, 0], [0, 0, 0, 1, 1],
                                   [0, 1, 0, 0, 1]], 2)


@pytest.fixture(scope="module", autouse=True)
def _free():
    yield
    release_caches()


def _perfect_pairs(n, m=1, limit=5):
    out = []
    for g in (BipMultiGraph.from_array(a, 2) for a in enumerate_multi(n, 2).mats):
        if categorize(g, m) != 1:
            continue
        for _, h in neighbors_switch(g, simple=False):
            if ax.is_perfect_pair(g, h, m):
                out.append((g, h))
                if len(out) == limit:
                    return out
    return out


def test_simple_graph_neighbourhood_is_itself():
    g = circulant(5, 2)
    sn = ax.s_neighborhood(g, 1)
    assert len(sn) == 1 and sn.endpoints[0] == g


def test_unstructured_graph_rejected():
    g = BipMultiGraph.from_array([[2, 0, 0, 0], [0, 2, 0, 0], [0, 0, 1, 1], [0, 0, 1, 1]], 2)
    with pytest.raises(NotInCategory):
        ax.s_neighborhood(g, 1)


def test_neighbourhood_matches_oracle():
    sn = ax.s_neighborhood(DOUBLE, 1)
    ref = oracles.sn_single(tuple(tuple(r) for r in DOUBLE.mult))
    assert sn.keys() == {"".join(map(str, sum(g, ()))) for g in ref}
    for e in sn.endpoints:
        assert e.is_simple
        assert len(sn.paths[e.key]) == 2


def test_bulk_neighbourhood_sizes_match_per_graph():
    st = ax.aux_structure(5, 2, 1)
    idx = np.flatnonzero(st.cat == 1)[::97]
    for i in idx:
        g = BipMultiGraph.from_array(st.M.mats[i], 2)
        assert st.sn.size[i] == len(ax.s_neighborhood(g, 1))


def test_not_adjacent_raises():
    with pytest.raises(NotAdjacent):
        ax.is_perfect_pair(DOUBLE, DOUBLE, 1)


def test_switching_touching_multiedge_is_not_perfect():
    s = Switching(0, 1, 0, 1)
    h = DOUBLE.apply(s)
    assert categorize(h, 1) == 0 or not ax.is_perfect_pair(DOUBLE, h, 1)


def test_perfect_classification_matches_bruteforce():
    for g, h in _perfect_pairs(5, limit=20):
        tg, th = (tuple(tuple(r) for r in x.mult) for x in (g, h))
        assert oracles.perfect_pair_bruteforce(tg, th, 1)


def test_psi_is_adjacency_preserving_bijection():
    for g1p, g2p in _perfect_pairs(5, limit=5):
        sn1 = ax.s_neighborhood(g1p, 1)
        sn2 = ax.s_neighborhood(g2p, 1)
        images = [ax.psi(g1p, g2p, e, 1) for e in sn1.endpoints]
        assert {x.key for x in images} == sn2.keys()
        for e, x in zip(sn1.endpoints, images):
            assert ax._adjacent(e, x)
            assert ax.psi(g2p, g1p, x, 1) == e


def test_psi_outside_neighbourhood_raises():
    g1p, g2p = _perfect_pairs(5, limit=1)[0]
    with pytest.raises(MembershipViolated):
        ax.psi(g1p, g2p, circulant(5, 2), 1)


def test_beta_rows_sum_to_one():
    g1p, g2p = _perfect_pairs(5, limit=1)[0]
    sn1, sn2 = ax.s_neighborhood(g1p, 1), ax.s_neighborhood(g2p, 1)
    for g1 in sn1.endpoints:
        total = sum(ax.beta(g1p, g2p, g1, g2, 1) for g2 in sn2.endpoints)
        assert total == Fraction(1, len(sn1))


def test_beta_non_perfect_is_product():
    g = circulant(5, 2)
    s, h = neighbors_switch(g)[0]
    assert ax.beta(g, h, g, h, 1) == 1


def test_kuhn_matching_small():
    mt = ax.kuhn_matching([0, 1, 2], ["a", "b", "c"], lambda u, v: (u, v) in {(0, "a"), (0, "b"), (1, "a"),
                                                                             (2, "c")})
    assert mt == {0: 1, 1: 0, 2: 2}
    assert ax.kuhn_matching([0, 1], ["a", "b"], lambda u, v: v == "a") is None


@pytest.mark.parametrize("n", [4, 5])
def test_aux_chain_exact_properties(n):
    st = ax.aux_structure(n, 2, 1)
    aux = ax.build_aux_chain(n, 2, 1)
    assert aux.size == len(st.S)
    fr = validate_flow(ax.build_flow(n, 2, 1), st.Qu, aux)
    assert fr.ok
    assert ax.row_mass_exact_max(aux) <= 1
    b = ax.beta_normalization(st)
    assert b["normalization_violations"] == 0 and b["symmetry_violations"] == 0


def test_psi_suite_n4_counts():
    r = ax.psi_property_suite(ax.aux_structure(4, 2, 1))
    bad = ("invalid", "not_injective", "size_mismatch", "not_adjacent", "involution_failures", "uniqueness_failures")
    assert all(r[k] == 0 for k in bad)
    assert r["identical_switching_inapplicable"] == 576
    assert r["tuples"] == 1728


def test_hard_paths_are_short():
    st = ax.aux_structure(5, 2, 1)
    flow = ax.build_flow(5, 2, 1)
    hard = flow.kind == ax.HARD
    assert hard.any()
    assert flow.lengths[hard].max() <= 2


def test_congestion_split_n4():
    c = ax.congestion_lemma_check(4, 2, 1, 0.0)
    assert c["perfect_tuple_ratio"] <= 4
    assert c["hard_length_max"] <= 2


def test_sn_counting_reverse_bound_n5():
    c = ax.sn_counting(ax.aux_structure(5, 2, 1))["1"]
    assert c["reverse_ok"]
    assert c["reverse_max"] == c["reverse_bound"]
