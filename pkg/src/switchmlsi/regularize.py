"""r-regular functions, r-regularization and the per-function inequalities around it."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .chain import (FiniteChain, _values, entropy, entropy_production, graph_distances, is_constant,
                    regularity_constants)
from .errors import DegenerateMass, PreconditionViolated

# log-space slack used to decide whether the regularization strictly lifts a value
LIFT_TOL = 1e-12


def _log_r(r) -> float:
    r = float(r)
    if r < 1:
        raise ValueError("r must be at least 1")
    return math.log(r)


def is_r_regular(chain: FiniteChain, f, r, tol: float = 1e-12) -> bool:
    """``f(x)/f(y) ≤ r`` on every edge, which is equivalent to the all-pairs definition."""
    f = _values(chain, f, positive=True)
    if math.isinf(float(r)):
        return True
    lf = np.log(f)
    diff = lf[chain.rows] - lf[chain.indices]
    return bool((diff <= _log_r(r) + tol).all())


def is_r_regular_all_pairs(chain: FiniteChain, f, r, tol: float = 1e-12) -> bool:
    """Direct check of ``f(x)/f(y) ≤ r^dist(x,y)`` over all ordered pairs."""
    f = _values(chain, f, positive=True)
    if math.isinf(float(r)):
        return True
    lf = np.log(f)
    dist = graph_distances(chain)
    return bool((lf[:, None] - lf[None, :] <= dist * _log_r(r) + tol).all())


@dataclass
class RegularizationResult:
    f: np.ndarray
    f_reg: np.ndarray
    r: float
    witness: dict  # state index -> witness index, only where f_reg > f

    @property
    def lifted(self) -> np.ndarray:
        return np.array(sorted(self.witness), dtype=np.int64)


def regularize(chain: FiniteChain, f, r) -> RegularizationResult:
    """``f_r(x) = max_y f(y) / r^dist(x,y)`` with witnesses for strictly lifted states.

    Among maximisers the witness is the smallest state index.
    """
    f = _values(chain, f, positive=True)
    lr = _log_r(r)
    if lr == 0:
        raise ValueError("r must be strictly greater than 1")
    lf = np.log(f)
    dist = graph_distances(chain)
    n = chain.size
    out = f.copy()
    witness: dict[int, int] = {}
    block = max(1, 4_000_000 // max(n, 1))
    for s in range(0, n, block):
        cand = lf[None, :] - dist[s:s + block] * lr
        best = cand.max(axis=1)
        for off, x in enumerate(range(s, min(n, s + block))):
            if best[off] > lf[x] + LIFT_TOL:
                w = int(np.flatnonzero(cand[off] >= best[off] - LIFT_TOL)[0])
                witness[x] = w
                out[x] = f[w] / float(r) ** int(dist[x, w])
    return RegularizationResult(f, out, float(r), witness)


def witness_path(chain: FiniteChain, x: int, w: int) -> list[int]:
    """A geodesic from ``x`` to ``w``, stepping to the smallest-index neighbour closer to ``w``."""
    dist = graph_distances(chain)
    path = [x]
    cur = x
    while cur != w:
        nb = chain.neighbors(cur)
        nxt = nb[dist[nb, w] == dist[cur, w] - 1]
        cur = int(nxt.min())
        path.append(cur)
    return path


def check_witness_paths(chain: FiniteChain, res: RegularizationResult) -> float:
    """Largest relative violation of ``f_r(P[τ]) = f(P[end]) / r^(|P|−τ)`` over witness geodesics."""
    worst = 0.0
    for x, w in res.witness.items():
        p = witness_path(chain, x, w)
        L = len(p) - 1
        for tau, y in enumerate(p):
            want = res.f[w] / res.r ** (L - tau)
            worst = max(worst, abs(res.f_reg[y] - want) / want)
    return worst


def upsilon(chain: FiniteChain) -> float:
    return float(regularity_constants(chain).upsilon)


def check_dirichlet_contraction(chain: FiniteChain, f, r: float | None = None):
    """``(E(f_Υ, log f_Υ), E(f, log f), ratio)``; ratio is ``None`` when both vanish."""
    r = upsilon(chain) if r is None else r
    f = _values(chain, f, positive=True)
    reg = regularize(chain, f, r).f_reg
    lhs = entropy_production(chain, reg)
    rhs = entropy_production(chain, f)
    if rhs <= 0:
        return lhs, rhs, None
    return lhs, rhs, lhs / rhs


def check_entropy_preservation(chain: FiniteChain, f, r: float | None = None):
    """``(Ent(f_Υ), Ent(f), ratio)``; ratio is ``None`` for constant ``f``."""
    r = upsilon(chain) if r is None else r
    f = _values(chain, f, positive=True)
    reg = regularize(chain, f, r).f_reg
    a = entropy(chain, reg)
    b = entropy(chain, f)
    if is_constant(f):
        return a, b, None
    return a, b, a / b


# ---------------------------------------------------------------------------
# truncation

@lru_cache(maxsize=None)
def default_truncation_level() -> float:
    """Largest ``c ≤ 1/3`` with ``1 − c + c log c ≥ 1/2`` (which also gives ``c/(1−c) ≤ 1/2``)."""
    g = lambda c: 1 - c + c * math.log(c) - 0.5
    if g(1 / 3) >= 0:
        return 1 / 3
    return brentq(g, 1e-6, 1 / 3, xtol=1e-15)


@dataclass
class Truncation:
    f: list | np.ndarray
    alpha: object
    c: object


def truncate_normalize(chain: FiniteChain, f, c=None, exact: bool = False) -> Truncation:
    """Raise values below ``c`` to ``c`` and pull values above 1 towards 1 so the mean stays 1.

    On ``{f > 1}`` the new value is ``α + (1 − α) f`` with ``α`` solved from the
    linear mean constraint.  With ``exact=True`` all arithmetic is in Fractions
    (``f`` and ``c`` must be rationals) and ``E f′ = 1`` holds exactly.
    """
    if exact:
        pi = [chain.pi_of(i) for i in range(chain.size)]
        fv = [Fraction(x) for x in f]
        c = Fraction(c) if c is not None else Fraction(default_truncation_level()).limit_denominator(10**6)
        mean = sum(p * x for p, x in zip(pi, fv))
        one, zero = Fraction(1), Fraction(0)
    else:
        pi = chain.pi
        fv = _values(chain, f, positive=True)
        c = default_truncation_level() if c is None else float(c)
        mean = float(pi @ fv)
        one, zero = 1.0, 0.0
    if not (0 < c <= 0.5 and 1 - c + c * math.log(c) >= 0.5 - 1e-15):
        raise PreconditionViolated(f"truncation level c={c} violates 1-c+c log c >= 1/2")
    if (mean != 1) if exact else abs(mean - 1) > 1e-12:
        raise PreconditionViolated(f"E f must equal 1, got {mean}")
    low = [i for i in range(chain.size) if fv[i] < c]
    high = [i for i in range(chain.size) if fv[i] > 1]
    if not low:
        return Truncation(list(fv) if exact else fv.copy(), zero, c)
    if not high:
        raise DegenerateMass("values below c but none above 1")
    num = sum(pi[i] * (c - fv[i]) for i in low)
    den = sum(pi[i] * (fv[i] - 1) for i in high)
    alpha = num / den
    out = list(fv) if exact else fv.copy()
    for i in range(chain.size):
        if fv[i] <= 1:
            out[i] = max(fv[i], c)
        else:
            out[i] = alpha + (one - alpha) * fv[i]
    return Truncation(out, alpha, c)


# ---------------------------------------------------------------------------
# entropy duality and the flat-entropy estimate

def relaxed_duality_bound(chain: FiniteChain, f) -> tuple[float, float]:
    """``(Ent f, 2 E[f h̃])`` with ``e^h̃ = (f/E f + 1)/2``; the second always dominates."""
    f = _values(chain, f, positive=True)
    pi = chain.pi
    g = f / float(pi @ f)
    ht = np.log((g + 1) / 2)
    return entropy(chain, f), 2 * float(pi @ (f * ht))


def relaxed_exponential_mean(chain: FiniteChain, f) -> float:
    f = _values(chain, f, positive=True)
    g = f / float(chain.pi @ f)
    return float(chain.pi @ ((g + 1) / 2))


def flat_entropy_check(chain: FiniteChain, f, delta: float) -> tuple[float, float]:
    """``(Σ π (f−1) log f, |log δ| Ent f)`` for ``E f = 1`` and ``f ≥ δ``."""
    f = _values(chain, f, positive=True)
    if not 0 < delta <= 0.5:
        raise PreconditionViolated("delta must lie in (0, 1/2]")
    if abs(float(chain.pi @ f) - 1) > 1e-10:
        raise PreconditionViolated("E f must equal 1")
    if f.min() < delta * (1 - 1e-12):
        raise PreconditionViolated(f"f drops below delta={delta}")
    pi = chain.pi
    lhs = float(pi @ ((f - 1) * np.log(f)))
    return lhs, abs(math.log(delta)) * entropy(chain, f)


def flat_entropy_ratio(pi: np.ndarray, f: np.ndarray, delta: float) -> float | None:
    """``lhs / (|log δ| Ent)`` straight from arrays; ``None`` at zero entropy."""
    ent = float(pi @ (f * np.log(f / (pi @ f))))
    if ent <= 1e-14:
        return None
    lhs = float(pi @ ((f - 1) * np.log(f)))
    return lhs / (abs(math.log(delta)) * ent)
