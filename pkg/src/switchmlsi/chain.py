"""Finite reversible continuous-time Markov chains.

Measures and rates are exact rationals, stored as integer numerator arrays over
a single denominator each.  Entropies, Dirichlet forms and the semigroup are
evaluated in floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph
from scipy.stats import poisson

from . import rational as rq
from .errors import (BadMeasure, DimensionMismatch, GridTooCoarse, NonPositiveFunction,
                     NotIrreducible, NotReversible)

ENSEMBLE_VERSION = "1"
ENTROPY_TOL = 1e-10
POISSON_TAIL = 1e-12
TV_BLOCK_BYTES = 128 * 2**20
WEIGHT_FLOOR = 1e-18
GRID_CHUNK = 8


@dataclass(frozen=True, eq=False)
class FiniteChain:
    """Reversible generator on ``len(states)`` states in compressed-row form.

    ``pi = pi_num / pi_den`` and the off-diagonal rate of the ``k``-th stored
    edge is ``rate_num[k] / rate_den``.  Column indices are sorted within rows.
    """

    states: tuple
    pi_num: np.ndarray
    pi_den: int
    indptr: np.ndarray
    indices: np.ndarray
    rate_num: np.ndarray
    rate_den: int
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    # -- sizes -------------------------------------------------------------
    @property
    def size(self) -> int:
        return len(self.pi_num)

    def __len__(self) -> int:
        return self.size

    @property
    def n_edges(self) -> int:
        return len(self.indices)

    @property
    def rows(self) -> np.ndarray:
        if "rows" not in self._cache:
            self._cache["rows"] = np.repeat(np.arange(self.size), np.diff(self.indptr))
        return self._cache["rows"]

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    # -- float views -------------------------------------------------------
    @property
    def pi(self) -> np.ndarray:
        if "pi" not in self._cache:
            self._cache["pi"] = rq.to_float(self.pi_num, self.pi_den)
        return self._cache["pi"]

    @property
    def rates(self) -> np.ndarray:
        if "rates" not in self._cache:
            self._cache["rates"] = rq.to_float(self.rate_num, self.rate_den)
        return self._cache["rates"]

    @property
    def edge_mass(self) -> np.ndarray:
        """``π(x) Q(x, y)`` per stored edge, as floats."""
        if "mass" not in self._cache:
            self._cache["mass"] = self.pi[self.rows] * self.rates
        return self._cache["mass"]

    def generator(self) -> sparse.csr_matrix:
        """Sparse float generator including the diagonal."""
        n = self.size
        off = sparse.csr_matrix((self.rates, self.indices, self.indptr), shape=(n, n))
        out = sparse.csr_matrix(off - sparse.diags(np.asarray(off.sum(axis=1)).ravel()))
        out.sort_indices()
        return out

    # -- exact accessors ---------------------------------------------------
    def pi_of(self, i: int) -> Fraction:
        return Fraction(int(self.pi_num[i]), self.pi_den)

    def rate(self, i: int, j: int) -> Fraction:
        k = self.edge_index(i, j)
        return Fraction(0) if k < 0 else Fraction(int(self.rate_num[k]), self.rate_den)

    def edge_index(self, i, j):
        """Position of edge ``(i, j)`` in the CSR arrays (``-1`` if absent); vectorised."""
        i = np.asarray(i, dtype=np.int64)
        j = np.asarray(j, dtype=np.int64)
        lo = self.indptr[i]
        hi = self.indptr[i + 1]
        keys = self.rows * np.int64(self.size) + self.indices
        want = i * np.int64(self.size) + j
        pos = np.searchsorted(keys, want)
        pos = np.minimum(pos, max(len(keys) - 1, 0))
        ok = (len(keys) > 0) & (pos >= lo) & (pos < hi)
        ok = ok & (self.indices[pos] == j) if len(keys) else ok
        out = np.where(ok, pos, -1)
        return int(out) if out.ndim == 0 else out

    def reverse_edges(self) -> np.ndarray:
        """For each stored edge ``(i, j)`` the position of ``(j, i)``."""
        if "rev" not in self._cache:
            rev = self.edge_index(self.indices, self.rows)
            if (rev < 0).any():
                raise NotReversible("support is not symmetric")
            self._cache["rev"] = rev
        return self._cache["rev"]

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def adjacency(self) -> sparse.csr_matrix:
        n = self.size
        return sparse.csr_matrix((np.ones(self.n_edges, dtype=np.int8), self.indices, self.indptr),
                                 shape=(n, n))

    def index(self, key) -> int:
        if "index" not in self._cache:
            self._cache["index"] = {k: i for i, k in enumerate(self.states)}
        return self._cache["index"][key]

    def __repr__(self) -> str:
        return f"FiniteChain(states={self.size}, edges={self.n_edges})"


# ---------------------------------------------------------------------------
# construction

def from_arrays(states: Sequence, pi_num, pi_den: int, rows, cols, rate_num, rate_den: int,
                validate: bool = True) -> FiniteChain:
    """Build a chain from COO edge arrays; duplicate edges are summed."""
    pi_num = rq.int_array(pi_num)
    n = len(pi_num)
    if len(states) != n:
        raise DimensionMismatch("states and pi have different lengths")
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    rate_num = rq.int_array(rate_num)
    if not (len(rows) == len(cols) == len(rate_num)):
        raise DimensionMismatch("edge arrays disagree in length")
    if len(rows) and (rows.min() < 0 or cols.min() < 0 or rows.max() >= n or cols.max() >= n):
        raise DimensionMismatch("edge endpoint out of range")
    keep = rows != cols
    keys, nums = rq.group_sum(rows[keep] * np.int64(n) + cols[keep], rate_num[keep])
    pos = rq.int_array(nums) if nums.dtype == object else nums
    if len(pos) and (np.array([int(x) for x in pos]) < 0 if pos.dtype == object else pos < 0).any():
        raise BadMeasure("negative off-diagonal rate")
    nz = np.array([int(x) != 0 for x in pos], dtype=bool) if pos.dtype == object else pos != 0
    keys = keys[nz]
    pos = pos[nz]
    r = keys // n
    c = keys % n
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(r, minlength=n), out=indptr[1:])
    chain = FiniteChain(tuple(states), pi_num, int(pi_den), indptr, c.astype(np.int64), pos, int(rate_den))
    if validate:
        validate_chain(chain)
    return chain


def build_chain(states: Sequence, pi: Sequence, rates: Mapping[tuple[int, int], object] | Iterable,
                validate: bool = True) -> FiniteChain:
    """Build a chain from rational ``pi`` and off-diagonal ``rates``.

    ``rates`` is a mapping ``(i, j) -> rate`` or an iterable of ``(i, j, rate)``.
    Rates may be ints, Fractions or ``"num/den"`` strings.
    """
    pi_num, pi_den = rq.from_fractions(pi)
    items = rates.items() if isinstance(rates, Mapping) else (((a, b), q) for a, b, q in rates)
    rows, cols, vals = [], [], []
    for (a, b), q in items:
        rows.append(a)
        cols.append(b)
        vals.append(Fraction(q))
    num, den = rq.from_fractions(vals)
    return from_arrays(states, pi_num, pi_den, rows, cols, num, den if vals else 1, validate)


def validate_chain(chain: FiniteChain) -> None:
    """Exact check of positivity, normalisation, detailed balance and irreducibility."""
    pn = chain.pi_num
    if chain.pi_den <= 0:
        raise BadMeasure("measure denominator must be positive")
    vals = [int(x) for x in pn] if pn.dtype == object else pn
    if len(pn) == 0 or (np.asarray(vals) <= 0).any():
        raise BadMeasure("measure must be strictly positive")
    if rq.total(pn) != chain.pi_den:
        raise BadMeasure("measure does not sum to 1")
    if chain.rate_den <= 0:
        raise BadMeasure("rate denominator must be positive")
    try:
        rev = chain.reverse_edges()
    except NotReversible:
        raise
    lhs = rq.mul(pn[chain.rows], chain.rate_num)
    rhs = lhs[rev]
    bad = lhs != rhs
    if np.asarray(bad, dtype=bool).any():
        k = int(np.flatnonzero(np.asarray(bad, dtype=bool))[0])
        raise NotReversible(f"detailed balance fails on edge ({chain.rows[k]}, {chain.indices[k]})")
    if chain.size > 1:
        ncomp, _ = csgraph.connected_components(chain.adjacency(), directed=False)
        if ncomp != 1:
            raise NotIrreducible(f"state graph has {ncomp} components")


def detailed_balance_residuals(chain: FiniteChain) -> np.ndarray:
    """Exact numerators of ``π(x)Q(x,y) − π(y)Q(y,x)`` over ``pi_den·rate_den`` per edge."""
    lhs = rq.mul(chain.pi_num[chain.rows], chain.rate_num)
    return lhs - lhs[chain.reverse_edges()]


# ---------------------------------------------------------------------------
# functionals

def _values(chain: FiniteChain, f, positive: bool = False) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != (chain.size,):
        raise DimensionMismatch(f"function has shape {f.shape}, chain has {chain.size} states")
    if not np.isfinite(f).all():
        raise NonPositiveFunction("function has non-finite values")
    if positive and (f <= 0).any():
        raise NonPositiveFunction("function must be strictly positive")
    return f


def expectation(chain: FiniteChain, f) -> float:
    return float(chain.pi @ _values(chain, f))


def entropy(chain: FiniteChain, f, pi: np.ndarray | None = None) -> float:
    """``E[f log f] − E f log E f`` under ``pi`` (default: the chain's measure)."""
    f = _values(chain, f, positive=True)
    p = chain.pi if pi is None else np.asarray(pi, dtype=float)
    mean = float(p @ f)
    # written as Σ π f log(f/mean) for accuracy near constants
    val = float(p @ (f * np.log(f / mean)))
    return max(val, 0.0)


def dirichlet(chain: FiniteChain, f, g) -> float:
    """``½ Σ π(x) Q(x,y) (f(x)−f(y)) (g(x)−g(y))``."""
    f = _values(chain, f)
    g = _values(chain, g)
    r, c = chain.rows, chain.indices
    return 0.5 * float(chain.edge_mass @ ((f[r] - f[c]) * (g[r] - g[c])))


def entropy_production(chain: FiniteChain, f) -> float:
    """``E(f, log f)``."""
    f = _values(chain, f, positive=True)
    return dirichlet(chain, f, np.log(f))


def is_constant(f, tol: float = 1e-12) -> bool:
    f = np.asarray(f, dtype=float)
    return bool(np.ptp(f) <= tol * max(1.0, float(np.abs(f).max())))


def mlsi_ratio(chain: FiniteChain, f) -> float | None:
    """``Ent(f) / E(f, log f)``, or ``None`` for constant ``f``."""
    f = _values(chain, f, positive=True)
    if is_constant(f):
        return None
    return entropy(chain, f) / entropy_production(chain, f)


# ---------------------------------------------------------------------------
# MLSI estimation

@dataclass
class MLSIEstimate:
    value: float
    argmax: np.ndarray
    family: str
    evaluated: int
    version: str = ENSEMBLE_VERSION

    def __float__(self) -> float:
        return self.value


def _ensemble(chain: FiniteChain, seeds: Sequence, rng: np.random.Generator):
    """Candidate functions in a fixed order.

    Families (version 1): caller seeds; indicator perturbations ``1 + s·1_x``;
    exponentials of low generator eigenvectors; random lognormals.  The order is
    deterministic given the generator.
    """
    n = chain.size
    for f in seeds:
        yield "seed", np.asarray(f, dtype=float)
    if n < 2:
        return
    scales = (0.5, 1.0, 4.0, 50.0)
    order = np.argsort(-chain.pi, kind="stable")
    for s in scales:
        for x in order[: min(n, 16)]:
            f = np.ones(n)
            f[x] += s
            yield "indicator", f
    vecs = _low_eigenvectors(chain, k=min(6, n - 1))
    for v in vecs.T:
        v = v / max(np.abs(v).max(), 1e-300)
        for s in (0.5, 2.0, 6.0):
            yield "eigen", np.exp(s * v)
            yield "eigen", np.exp(-s * v)
    while True:
        sigma = float(rng.choice([0.3, 1.0, 3.0]))
        yield "random", np.exp(sigma * rng.standard_normal(n))


def _low_eigenvectors(chain: FiniteChain, k: int) -> np.ndarray:
    """Eigenvectors of the symmetrised generator with the smallest nonzero gaps,
    mapped back to functions (divide by sqrt(π))."""
    n = chain.size
    if k <= 0:
        return np.zeros((n, 0))
    s = np.sqrt(chain.pi)
    q = chain.generator()
    sym = sparse.diags(s) @ q @ sparse.diags(1 / s)
    if n <= 400:
        w, v = np.linalg.eigh(sym.toarray())
        idx = np.argsort(-w)[1:k + 1]
        return v[:, idx] / s[:, None]
    from scipy.sparse.linalg import eigsh
    w, v = eigsh(sym, k=k + 1, sigma=1e-9, which="LM")
    idx = np.argsort(-w)[1:k + 1]
    return v[:, idx] / s[:, None]


def _ascend(chain: FiniteChain, f: np.ndarray, sweeps: int) -> tuple[float, np.ndarray]:
    """Coordinate ascent on log f with multiplicative steps."""
    best = mlsi_ratio(chain, f) or 0.0
    f = f.copy()
    for _ in range(sweeps):
        improved = False
        for x in range(chain.size):
            for step in (2.0, 0.5, 1.25, 0.8):
                g = f.copy()
                g[x] *= step
                r = mlsi_ratio(chain, g)
                if r is not None and r > best:
                    best, f, improved = r, g, True
                    break
        if not improved:
            break
    return best, f


def estimate_mlsi(chain: FiniteChain, budget: int = 200, seed: int = 0, seeds: Sequence = (),
                  refine: int = 3) -> MLSIEstimate:
    """Lower estimate of the MLSI constant: max ratio over the first ``budget`` candidates.

    After the candidate sweep the best ``refine`` candidates (by ratio) get
    coordinate-ascent refinement, but only if they fall within the budget, so
    the result never decreases when ``budget`` grows.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    rng = np.random.default_rng(seed)
    best = MLSIEstimate(0.0, np.ones(chain.size), "none", 0)
    scored = []
    used = 0
    for family, f in _ensemble(chain, seeds, rng):
        if used >= budget:
            break
        used += 1
        r = mlsi_ratio(chain, f)
        if r is None:
            continue
        scored.append((r, used, f))
        if r > best.value:
            best = MLSIEstimate(r, f, family, used)
    # refinement: each refinement costs one unit of budget per sweep
    scored.sort(key=lambda t: (-t[0], t[1]))
    remaining = budget - used
    sweeps = 2
    for r, _, f in scored[:refine]:
        if remaining < sweeps or chain.size > 2000:
            break
        remaining -= sweeps
        rr, ff = _ascend(chain, f, sweeps)
        if rr > best.value:
            best = MLSIEstimate(rr, ff, "ascent", used)
    best.evaluated = used
    return best


# ---------------------------------------------------------------------------
# constants and distances

@dataclass(frozen=True)
class RegularityConstants:
    gamma: Fraction
    upsilon: Fraction
    max_degree: int
    min_rate: Fraction

    def as_dict(self) -> dict:
        return {"gamma": rq.frac_str(self.gamma), "upsilon": rq.frac_str(self.upsilon),
                "max_degree": self.max_degree, "min_rate": rq.frac_str(self.min_rate),
                "gamma_float": float(self.gamma), "upsilon_float": float(self.upsilon)}


def regularity_constants(chain: FiniteChain) -> RegularityConstants:
    pn = chain.pi_num
    hi = max(int(x) for x in pn) if pn.dtype == object else int(pn.max())
    lo = min(int(x) for x in pn) if pn.dtype == object else int(pn.min())
    gamma = Fraction(hi, lo)
    maxdeg = int(chain.degrees.max()) if chain.size else 0
    rn = chain.rate_num
    if chain.n_edges == 0:
        return RegularityConstants(gamma, Fraction(0), 0, Fraction(0))
    min_rate = Fraction(min(int(x) for x in rn) if rn.dtype == object else int(rn.min()), chain.rate_den)
    return RegularityConstants(gamma, 16 * gamma**2 * maxdeg / min_rate, maxdeg, min_rate)


def graph_distances(chain: FiniteChain, limit: int = 20000) -> np.ndarray:
    """All-pairs hop distances on the state graph (dense ``int32``)."""
    if chain.size > limit:
        raise ValueError(f"dense distances for {chain.size} states exceed limit {limit}")
    if "dist" not in chain._cache:
        d = csgraph.shortest_path(chain.adjacency(), method="D", unweighted=True, directed=False)
        if np.isinf(d).any():
            raise NotIrreducible("state graph is disconnected")
        chain._cache["dist"] = d.astype(np.int32)
    return chain._cache["dist"]


# ---------------------------------------------------------------------------
# semigroup and mixing

def uniformization_rate(chain: FiniteChain) -> float:
    out = np.bincount(chain.rows, weights=chain.rates, minlength=chain.size)
    return float(out.max()) if chain.size else 0.0


def tv_curve(chain: FiniteChain, times: Sequence[float], starts: Sequence[int] | None = None) -> np.ndarray:
    """``max_x TV(δ_x e^{tQ}, π)`` for each ``t`` in ``times`` (uniformization)."""
    return tv_by_start(chain, times, starts).max(axis=1)


def tv_by_start(chain: FiniteChain, times: Sequence[float], starts: Sequence[int] | None = None) -> np.ndarray:
    """``TV(δ_x e^{tQ}, π)`` as a ``(len(times), len(starts))`` array."""
    times = np.asarray(times, dtype=float)
    n = chain.size
    starts = np.arange(n) if starts is None else np.asarray(starts)
    lam = uniformization_rate(chain)
    pi = chain.pi
    if n == 1 or lam == 0:
        return np.tile(1 - pi[starts] if n > 1 else np.zeros(len(starts)), (len(times), 1))
    P = (sparse.identity(n, format="csr") + chain.generator() / lam).T.tocsr()
    tmax = float(times.max())
    kmax = int(poisson.isf(POISSON_TAIL, tmax * lam)) + 2 if tmax > 0 else 0
    weights = poisson.pmf(np.arange(kmax + 1)[:, None], times[None, :] * lam)
    weights[:, times == 0] = 0.0
    weights[0, times == 0] = 1.0
    # start states go in blocks so the accumulator stays under TV_BLOCK_BYTES
    block = max(1, TV_BLOCK_BYTES // (8 * n * len(times)))
    out = np.zeros((len(times), len(starts)))
    for b0 in range(0, len(starts), block):
        sb = starts[b0:b0 + block]
        dist = np.zeros((n, len(sb)))
        dist[sb, np.arange(len(sb))] = 1.0
        acc = np.zeros((len(times), n, len(sb)))
        for k in range(kmax + 1):
            w = weights[k]
            live = w > WEIGHT_FLOOR
            if live.any():
                acc[live] += w[live, None, None] * dist[None]
            dist = P @ dist
        # tail mass left out of the truncated sum is below POISSON_TAIL
        out[:, b0:b0 + block] = 0.5 * np.abs(acc - pi[None, :, None]).sum(axis=1)
    return out


@dataclass
class MixingResult:
    epsilon: float
    t_grid: float
    t_refined: float
    tv_at_grid: float
    grid: list
    curve: list
    bound: float | None = None
    alpha: float | None = None

    def as_dict(self) -> dict:
        return {"epsilon": self.epsilon, "t_grid": self.t_grid, "t_refined": self.t_refined,
                "tv_at_grid": self.tv_at_grid, "grid": self.grid, "curve": self.curve,
                "bound": self.bound, "alpha": self.alpha}


def mixing_bound(chain: FiniteChain, alpha: float, epsilon: float) -> float:
    """``α (log log(1/π_min) + log(1/(2ε²)))``."""
    pmin = float(chain.pi.min())
    return alpha * (math.log(math.log(1 / pmin)) + math.log(1 / (2 * epsilon**2)))


def tv_mixing_time(chain: FiniteChain, epsilon: float, time_grid: Sequence[float],
                   alpha: float | None = None, refine_tol: float = 1e-11,
                   starts: Sequence[int] | None = None) -> MixingResult:
    """Smallest grid time with worst-start TV at most ``epsilon``, plus a bisection refinement.

    The grid is evaluated in chunks and stops at the first chunk containing a
    hit, so ``grid``/``curve`` in the result end there.  ``starts`` restricts
    the worst case to the given start states; pass one per symmetry orbit.
    """
    starts = np.arange(chain.size) if starts is None else np.asarray(starts)
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    full = np.sort(np.asarray(time_grid, dtype=float))
    parts = []
    for c0 in range(0, len(full), GRID_CHUNK):
        parts.append(tv_by_start(chain, full[c0:c0 + GRID_CHUNK], starts))
        if (parts[-1].max(axis=1) <= epsilon).any():
            break
    per = np.vstack(parts)
    grid = full[:len(per)]
    curve = per.max(axis=1)
    hit = np.flatnonzero(curve <= epsilon)
    if len(hit) == 0:
        raise GridTooCoarse(f"TV stays above {epsilon} up to t={full[-1]}")
    k = int(hit[0])
    t_hit = float(grid[k])
    if k == 0:
        t_ref = t_hit
    else:
        lo, hi = float(grid[k - 1]), t_hit
        # each start's TV is non-increasing in t, so starts already within
        # epsilon at the lower end can be dropped from the bisection
        active = starts[per[k - 1] > epsilon]
        while hi - lo > refine_tol * max(1.0, hi):
            mid = 0.5 * (lo + hi)
            tv = tv_by_start(chain, [mid], active)[0]
            if tv.max() <= epsilon:
                hi = mid
            else:
                lo = mid
                active = active[tv > epsilon]
        t_ref = hi
    bound = mixing_bound(chain, alpha, epsilon) if alpha is not None else None
    return MixingResult(epsilon, t_hit, t_ref, float(curve[k]), grid.tolist(), curve.tolist(), bound, alpha)


# ---------------------------------------------------------------------------
# serialization

def chain_to_json(chain: FiniteChain) -> dict:
    pi = [f"{Fraction(int(p), chain.pi_den).numerator}/{Fraction(int(p), chain.pi_den).denominator}"
          for p in chain.pi_num]
    rates = [[int(i), int(j), rq.frac_str(Fraction(int(q), chain.rate_den))]
             for i, j, q in zip(chain.rows, chain.indices, chain.rate_num)]
    return {"states": [str(s) for s in chain.states], "pi": pi, "rates": rates}


def chain_from_json(obj: dict, validate: bool = True) -> FiniteChain:
    return build_chain(obj["states"], [rq.parse_frac(p) for p in obj["pi"]],
                       [(int(i), int(j), rq.parse_frac(q)) for i, j, q in obj["rates"]], validate)
