"""Property-based checks of inequalities that hold for every admissible input."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from switchmlsi.chain import build_chain, dirichlet, entropy, entropy_production
from switchmlsi.flows import telescope_terms
from switchmlsi.regularize import (is_r_regular, regularize, relaxed_duality_bound, relaxed_exponential_mean,
                                   truncate_normalize)


def _cycle(k):
    pi = [Fraction(1, k)] * k
    rates = {}
    for i in range(k):
        rates[(i, (i + 1) % k)] = 1
        rates[((i + 1) % k, i)] = 1
    return build_chain(range(k), pi, rates)


CYCLES = {k: _cycle(k) for k in (3, 5, 8)}
positive = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False)


@st.composite
def chain_and_f(draw):
    k = draw(st.sampled_from(sorted(CYCLES)))
    f = np.array(draw(st.lists(positive, min_size=k, max_size=k)))
    return CYCLES[k], f


@settings(max_examples=150, deadline=None)
@given(chain_and_f())
def test_entropy_and_dirichlet_nonnegative(cf):
    ch, f = cf
    assert entropy(ch, f) >= -1e-12
    assert entropy_production(ch, f) >= -1e-12


@settings(max_examples=150, deadline=None)
@given(chain_and_f(), st.floats(min_value=0.01, max_value=100))
def test_entropy_homogeneous(cf, c):
    ch, f = cf
    assert math.isclose(entropy(ch, c * f), c * entropy(ch, f), rel_tol=1e-9, abs_tol=1e-9)


@settings(max_examples=150, deadline=None)
@given(chain_and_f())
def test_dirichlet_symmetric(cf):
    ch, f = cf
    g = np.log(f) ** 2
    assert math.isclose(dirichlet(ch, f, g), dirichlet(ch, g, f), rel_tol=1e-12, abs_tol=1e-12)


@settings(max_examples=100, deadline=None)
@given(chain_and_f(), st.floats(min_value=1.05, max_value=50))
def test_regularization_is_smallest_regular_majorant(cf, r):
    ch, f = cf
    res = regularize(ch, f, r)
    assert (res.f_reg >= f * (1 - 1e-12)).all()
    assert is_r_regular(ch, res.f_reg, r, tol=1e-9)
    # idempotent
    again = regularize(ch, res.f_reg, r)
    assert np.allclose(again.f_reg, res.f_reg, rtol=1e-12)


@settings(max_examples=150, deadline=None)
@given(chain_and_f())
def test_relaxed_duality_dominates(cf):
    ch, f = cf
    ent, rhs = relaxed_duality_bound(ch, f)
    assert rhs >= ent - 1e-9 * max(1.0, abs(ent))
    assert math.isclose(relaxed_exponential_mean(ch, f), 1.0, rel_tol=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(min_value=1, max_value=60), min_size=3, max_size=3))
def test_truncation_keeps_mean_exactly(raw):
    ch = CYCLES[3]
    tot = sum(raw)
    f = [Fraction(3 * x, tot) for x in raw]
    c = Fraction(1, 8)
    if not any(x < c for x in f):
        return
    t = truncate_normalize(ch, f, c=c, exact=True)
    assert sum(Fraction(1, 3) * x for x in t.f) == 1
    assert min(t.f) >= c
    assert 0 <= t.alpha <= 1


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(min_value=-1, max_value=1), min_size=1, max_size=12), st.sampled_from([2.0, math.e, 10.0]))
def test_telescope_lower_bound(steps, r):
    lr = math.log(r)
    v = np.exp(np.concatenate([[0.0], np.cumsum(np.array(steps) * lr)]))
    lhs, rhs, factor = telescope_terms(v, r, tol=1e-9)
    # rhs is a sum of nonnegative terms; lhs is nonnegative too
    assert rhs >= -1e-12 and lhs >= -1e-12
    if len(steps) == 1 and factor is not None:
        assert math.isclose(factor, 1.0, rel_tol=1e-9)
