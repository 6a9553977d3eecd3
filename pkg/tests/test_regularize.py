from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from switchmlsi import calibration
from switchmlsi.chain import build_chain, entropy
from switchmlsi.errors import PreconditionViolated
from switchmlsi.regularize import (check_dirichlet_contraction, check_entropy_preservation, check_witness_paths,
                                   default_truncation_level, flat_entropy_check, is_r_regular,
                                   is_r_regular_all_pairs, regularize, relaxed_duality_bound,
                                   relaxed_exponential_mean, truncate_normalize, upsilon)


def test_constants_are_one_regular(qu4):
    assert is_r_regular(qu4, np.full(90, 3.0), 1)


def test_any_function_is_infinitely_regular(qu4):
    f = np.random.default_rng(1).lognormal(0, 5, 90)
    assert is_r_regular(qu4, f, math.inf)


def test_two_state_regularity_threshold(two_state):
    assert not is_r_regular(two_state, [1.0, 3.0], 2)
    assert is_r_regular(two_state, [1.0, 3.0], 3)


def test_edge_and_all_pairs_definitions_agree(qu4):
    rng = np.random.default_rng(2)
    for _ in range(20):
        f = rng.lognormal(0, 1.5, 90)
        r = float(rng.uniform(1.5, 30))
        assert is_r_regular(qu4, f, r) == is_r_regular_all_pairs(qu4, f, r)


def test_regular_function_is_fixed(path3):
    res = regularize(path3, [1.0, 1.5, 2.0], 2.0)
    assert np.allclose(res.f_reg, res.f)
    assert res.witness == {}


def test_path_hand_example():
    ch = build_chain(["a", "b"], [Fraction(1, 2)] * 2, {(0, 1): 1, (1, 0): 1})
    r = 3.0
    res = regularize(ch, [1.0, r * r], r)
    assert res.f_reg == pytest.approx([r, r * r])
    assert res.witness == {0: 1}


def test_regularized_is_regular_majorant(qu4):
    rng = np.random.default_rng(3)
    for _ in range(10):
        f = rng.lognormal(0, 3, 90)
        res = regularize(qu4, f, 4.0)
        assert (res.f_reg >= f - 1e-12).all()
        assert is_r_regular(qu4, res.f_reg, 4.0, tol=1e-9)
        assert check_witness_paths(qu4, res) < 1e-12


def test_regularize_rejects_r_one(two_state):
    with pytest.raises(ValueError):
        regularize(two_state, [1.0, 2.0], 1.0)


def test_contraction_constant_f(qu4):
    lhs, rhs, ratio = check_dirichlet_contraction(qu4, np.ones(90))
    assert lhs == rhs == 0 and ratio is None


def test_identity_cases_exact(qu4):
    f = np.exp(np.random.default_rng(4).uniform(-0.5, 0.5, 90))
    U = upsilon(qu4)
    assert is_r_regular(qu4, f, U)
    assert check_dirichlet_contraction(qu4, f, U)[2] == 1.0
    assert check_entropy_preservation(qu4, f, U)[2] == 1.0


def test_entropy_preservation_constant_excluded(qu4):
    assert check_entropy_preservation(qu4, np.full(90, 2.0))[2] is None


def test_calibrated_bounds_hold_on_fresh_sample(qu4):
    dmax = calibration.constant("dirichlet_contraction_max")
    emin = calibration.constant("entropy_preservation_min")
    rng = np.random.default_rng(5)
    for _ in range(50):
        f = rng.lognormal(0, 4, 90)
        rd = check_dirichlet_contraction(qu4, f)[2]
        re = check_entropy_preservation(qu4, f)[2]
        assert rd is None or rd <= dmax
        assert re is None or re >= emin


def test_truncation_level_solves_inequality():
    c = default_truncation_level()
    assert 0 < c <= 1 / 3
    assert 1 - c + c * math.log(c) >= 0.5 - 1e-12
    assert c / (1 - c) <= 0.5


def test_truncation_identity_cases(two_state):
    t = truncate_normalize(two_state, [1.0, 1.0])
    assert list(t.f) == [1.0, 1.0]
    t = truncate_normalize(two_state, [0.8, 1.2])
    assert t.alpha == 0.0 and list(t.f) == [0.8, 1.2]


def test_truncation_two_state_exact(two_state):
    c = Fraction(1, 8)
    f = [c / 2, 2 - c / 2]
    t = truncate_normalize(two_state, f, c=c, exact=True)
    # α solves ½(c − c/2) = ½ α (f₂ − 1)
    assert t.alpha == (c / 2) / (1 - c / 2)
    assert Fraction(1, 2) * t.f[0] + Fraction(1, 2) * t.f[1] == 1
    assert t.f[0] == c


def test_truncation_preconditions(two_state):
    with pytest.raises(PreconditionViolated):
        truncate_normalize(two_state, [0.5, 2.0])
    with pytest.raises(PreconditionViolated):
        truncate_normalize(two_state, [0.1, 1.9], c=0.45)


def test_relaxed_duality(two_state):
    ent, rhs = relaxed_duality_bound(two_state, [1.0, 3.0])
    assert rhs >= ent > 0
    assert relaxed_exponential_mean(two_state, [1.0, 3.0]) == pytest.approx(1.0, abs=1e-15)
    ent0, rhs0 = relaxed_duality_bound(two_state, [2.0, 2.0])
    assert ent0 == pytest.approx(0, abs=1e-15) and rhs0 >= -1e-15


def test_flat_entropy_bounded_values(qu4):
    rng = np.random.default_rng(6)
    for _ in range(30):
        g = rng.uniform(0.5, 10, 90)
        f = g / float(qu4.pi @ g)
        delta = float(f.min())
        if delta > 0.5:
            continue
        lhs, rhs = flat_entropy_check(qu4, f, delta)
        assert lhs <= 12 * entropy(qu4, f) + 1e-12
        assert lhs / rhs <= calibration.constant("flat_entropy_ratio_max") * 1.5


def test_flat_entropy_constant(qu4):
    lhs, rhs = flat_entropy_check(qu4, np.ones(90), 0.5)
    assert lhs == 0 and rhs == pytest.approx(0, abs=1e-15)
