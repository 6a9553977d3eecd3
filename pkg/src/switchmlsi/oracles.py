"""Brute-force reference implementations.

Nothing here imports the production modules: inputs are plain arrays, tuples
of rows, or a chain object read only through its raw data fields.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from fractions import Fraction

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize, minimize_scalar


# ---------------------------------------------------------------------------
# counting and enumeration

def count_line_sum_matrices(n: int, d: int, max_mult: int) -> int:
    """Number of n×n matrices with entries in ``[0, max_mult]`` and all line sums ``d``.

    Cell-by-cell recursion in row-major order, pruning on the remaining row
    and column budgets.
    """
    cols = [d] * n

    def cell(i: int, j: int, row_left: int) -> int:
        if i == n:
            return 1
        if j == n:
            return cell(i + 1, 0, d) if row_left == 0 else 0
        # the remaining columns of this row must be able to absorb row_left
        if row_left > sum(min(max_mult, cols[c]) for c in range(j, n)):
            return 0
        total = 0
        for v in range(min(max_mult, row_left, cols[j]) + 1):
            cols[j] -= v
            if i == n - 1 and cols[j] != 0:
                cols[j] += v
                continue
            total += cell(i, j + 1, row_left - v)
            cols[j] += v
        return total

    return cell(0, 0, d)


def all_graphs(n: int, d: int, max_mult: int = 1) -> list[tuple]:
    """Every matrix as a tuple of row tuples, in lexicographic order."""
    rows = [r for r in itertools.product(range(max_mult + 1), repeat=n) if sum(r) == d]
    out = []

    def rec(acc: list, colsum: list):
        if len(acc) == n:
            if all(c == d for c in colsum):
                out.append(tuple(acc))
            return
        for r in rows:
            if all(c + x <= d for c, x in zip(colsum, r)):
                rec(acc + [r], [c + x for c, x in zip(colsum, r)])

    rec([], [0] * n)
    return sorted(out)


def switch_neighbours(g: tuple, simple: bool = True) -> Counter:
    """Neighbours by one switching, with the number of switchings producing each."""
    n = len(g)
    out: Counter = Counter()
    for i, i2 in itertools.combinations(range(n), 2):
        for j in range(n):
            for j2 in range(n):
                if j == j2 or g[i][j] == 0 or g[i2][j2] == 0:
                    continue
                a = [list(r) for r in g]
                a[i][j] -= 1
                a[i2][j2] -= 1
                a[i][j2] += 1
                a[i2][j] += 1
                h = tuple(tuple(r) for r in a)
                if simple and max(max(r) for r in h) > 1:
                    continue
                out[h] += g[i][j] * g[i2][j2]
    return out


def switch_graph_edges(n: int, d: int) -> set[tuple[tuple, tuple]]:
    gs = all_graphs(n, d, 1)
    return {(g, h) for g in gs for h in switch_neighbours(g, True)}


def configuration_measure(n: int, d: int) -> dict[tuple, Fraction]:
    """Law of the multigraph from a uniform matching of left stubs to right stubs.

    Enumerates all ``(nd)!`` bijections; feasible for ``nd ≤ 9`` or so.
    """
    left = [i for i in range(n) for _ in range(d)]
    right = [j for j in range(n) for _ in range(d)]
    counts: Counter = Counter()
    total = 0
    for perm in itertools.permutations(range(n * d)):
        a = [[0] * n for _ in range(n)]
        for s, t in enumerate(perm):
            a[left[s]][right[t]] += 1
        counts[tuple(tuple(r) for r in a)] += 1
        total += 1
    return {g: Fraction(c, total) for g, c in counts.items()}


def sn_single(g: tuple) -> set[tuple]:
    """Simple graphs one switching away from a graph with a single double edge."""
    return set(switch_neighbours(g, simple=True))


def _double_cells(g: tuple) -> list[tuple[int, int]]:
    return [(i, j) for i, r in enumerate(g) for j, v in enumerate(r) if v == 2]


def category(g: tuple, m: int) -> int:
    """Number of double edges when the structure is admissible, else -1."""
    if any(v > 2 for r in g for v in r):
        return -1
    cells = _double_cells(g)
    rows = [i for i, _ in cells]
    cols = [j for _, j in cells]
    if len(set(rows)) < len(rows) or len(set(cols)) < len(cols) or len(cells) > m:
        return -1
    return len(cells)


def perfect_pair_bruteforce(g1: tuple, g2: tuple, m: int) -> bool:
    """Both bullets evaluated on the literal difference of the two matrices."""
    n = len(g1)
    diff = [(i, j) for i in range(n) for j in range(n) if g1[i][j] != g2[i][j]]
    if len(diff) != 4:
        raise ValueError("not adjacent")
    k1, k2 = category(g1, m), category(g2, m)
    if k1 != k2 or k1 < 1:
        return False
    rows = {i for i, _ in diff}
    cols = {j for _, j in diff}
    cells = _double_cells(g1)
    mrows = {i for i, _ in cells}
    mcols = {j for _, j in cells}
    if rows & mrows or cols & mcols:
        return False
    for i in rows:
        for c in mcols:
            if g1[i][c] > 0:
                return False
    for j in cols:
        for r in mrows:
            if g1[r][j] > 0:
                return False
    return True


# ---------------------------------------------------------------------------
# entropy

def entropy_inf_form(chain, f, t_grid=None) -> float:
    """``inf_t E[f log f − f log t − f + t]`` by a grid scan refined with golden section."""
    pi = np.asarray(chain.pi_num, dtype=float) / float(chain.pi_den)
    f = np.asarray(f, dtype=float)
    flogf = float(pi @ (f * np.log(f)))
    ef = float(pi @ f)

    def phi(t: float) -> float:
        return flogf - ef * math.log(t) - ef + t

    if t_grid is None:
        t_grid = np.geomspace(f.min(), f.max(), 257) if f.max() > f.min() else np.array([f[0] * 0.5, f[0], f[0] * 2])
    t_grid = np.asarray(t_grid, dtype=float)
    vals = np.array([phi(t) for t in t_grid])
    k = int(np.argmin(vals))
    lo = t_grid[max(k - 1, 0)]
    hi = t_grid[min(k + 1, len(t_grid) - 1)]
    if hi <= lo:
        return max(vals[k], 0.0)
    res = minimize_scalar(phi, bracket=None, bounds=(lo, hi), method="bounded", options={"xatol": 1e-13})
    return float(max(min(res.fun, vals[k]), 0.0))


# ---------------------------------------------------------------------------
# telescoping

def _telescope_factor(steps: np.ndarray) -> float | None:
    v = np.exp(np.concatenate([[0.0], np.cumsum(steps)]))
    dv = np.diff(v)
    rhs = float((dv * steps).sum())
    if rhs <= 0:
        return None
    lhs = float((v[-1] - v[0]) * math.log(v[-1] / v[0]))
    return lhs / rhs


def _extremal_steps(T: int, lr: float) -> list[np.ndarray]:
    out = [np.full(T, lr)]
    for k in range(1, T):
        for small in (0.0, 1e-3, 1e-2, 0.1, 0.3):
            out.append(np.r_[np.full(k, small * lr), np.full(T - k, lr)])
            out.append(np.r_[np.full(T - k, lr), np.full(k, small * lr)])
    for frac in np.linspace(0.05, 1, 20):
        out.append(np.full(T, frac * lr))
    return out


def telescope_worst_case_search(T: int, r: float, trials: int = 2000, seed: int = 0,
                                restarts: int = 8) -> dict:
    """Largest observed ``lhs/rhs`` over admissible log-step sequences, normalised by ``1+(T−1)² log r``.

    Candidates: random steps, geometric and two-level shapes, then local
    maximisation from the best few starts under the box ``|step| ≤ log r``.
    """
    lr = math.log(r)
    norm = 1 + (T - 1) ** 2 * lr
    rng = np.random.default_rng(seed)
    cands = _extremal_steps(T, lr)
    for _ in range(trials):
        kind = rng.integers(3)
        if kind == 0:
            s = rng.uniform(-lr, lr, T)
        elif kind == 1:
            s = rng.uniform(0, lr, T)
        else:
            s = lr * rng.beta(0.3, 0.3, T)
        cands.append(s)
    scored = []
    for s in cands:
        f = _telescope_factor(s)
        if f is not None:
            scored.append((f, s))
    scored.sort(key=lambda x: -x[0])
    best = scored[0][0] if scored else 1.0
    best_steps = scored[0][1] if scored else np.zeros(T)

    def neg(s):
        f = _telescope_factor(np.clip(s, -lr, lr))
        return 0.0 if f is None else -f

    for _, s0 in scored[:restarts]:
        res = minimize(neg, s0, method="L-BFGS-B", bounds=[(-lr, lr)] * T)
        if -res.fun > best:
            best = -res.fun
            best_steps = np.clip(res.x, -lr, lr)
    return {"T": T, "r": r, "max_factor": best, "normalized": best / norm, "steps": best_steps.tolist(),
            "trials": trials, "seed": seed}


# ---------------------------------------------------------------------------
# mixing

def dense_generator(chain) -> np.ndarray:
    n = len(chain.states)
    Q = np.zeros((n, n))
    rows = np.repeat(np.arange(n), np.diff(np.asarray(chain.indptr)))
    rates = np.asarray(chain.rate_num, dtype=float) / float(chain.rate_den)
    np.add.at(Q, (rows, np.asarray(chain.indices)), rates)
    Q[np.diag_indices(n)] = -Q.sum(axis=1)
    return Q


def dense_tv(chain, t: float) -> float:
    """``max_x ½‖e^{tQ}(x,·) − π‖₁`` from a dense matrix exponential."""
    Q = dense_generator(chain)
    pi = np.asarray(chain.pi_num, dtype=float) / float(chain.pi_den)
    P = expm(t * Q)
    return float(0.5 * np.abs(P - pi[None, :]).sum(axis=1).max())


def dense_mixing_time(chain, epsilon: float, tol: float = 1e-12) -> float:
    """Smallest ``t`` with TV distance at most ``epsilon``, by doubling then bisection."""
    Q = dense_generator(chain)
    pi = np.asarray(chain.pi_num, dtype=float) / float(chain.pi_den)
    w, V = np.linalg.eigh(np.sqrt(pi)[:, None] * Q / np.sqrt(pi)[None, :])
    Dh = np.sqrt(pi)

    def tv(t):
        P = (V * np.exp(w * t)) @ V.T
        P = P / Dh[:, None] * Dh[None, :]
        return 0.5 * np.abs(P - pi[None, :]).sum(axis=1).max()

    if tv(0.0) <= epsilon:
        return 0.0
    hi = 1.0
    while tv(hi) > epsilon:
        hi *= 2
    lo = 0.0
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if tv(mid) > epsilon:
            lo = mid
        else:
            hi = mid
    return hi


def bfs_distances(adj: dict, source) -> dict:
    dist = {source: 0}
    frontier = [source]
    while frontier:
        nxt = []
        for u in frontier:
            for v in adj[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    nxt.append(v)
        frontier = nxt
    return dist
