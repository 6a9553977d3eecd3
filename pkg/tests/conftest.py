from __future__ import annotations

import gc
from fractions import Fraction

import pytest

from switchmlsi.chain import build_chain
from switchmlsi.switch import build_Qu


@pytest.fixture(scope="session")
def two_state():
    return build_chain(["a", "b"], [Fraction(1, 2), Fraction(1, 2)], {(0, 1): 1, (1, 0): 1})


@pytest.fixture(scope="session")
def path3():
    # birth-death chain on a path, reversible w.r.t. (1/4, 1/2, 1/4)
    pi = [Fraction(1, 4), Fraction(1, 2), Fraction(1, 4)]
    return build_chain(["x", "y", "z"], pi, {(0, 1): 1, (1, 0): Fraction(1, 2), (1, 2): Fraction(1, 2), (2, 1): 1})


@pytest.fixture(scope="session")
def qu4():
    return build_Qu(4, 2)


def release_caches():
    from switchmlsi import auxchain
    auxchain.aux_structure.cache_clear()
    auxchain._pair_matching.cache_clear()
    gc.collect()


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import LINES
    except ImportError:
        return
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
