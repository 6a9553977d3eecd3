"""The switch chain on simple bipartite d-regular graphs and the configuration-model chain."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import stats

from .chain import FiniteChain, dirichlet, entropy, from_arrays, tv_mixing_time
from .errors import InvalidStart
from .graphs import (BipMultiGraph, GraphSpace, check_parameters, circulant, count_simple_with_pattern,
                     count_space, enumerate_multi, enumerate_simple, orbit_representatives, pi_bc_denominator,
                     pi_bc_numerators, switch_moves)


def pairs(n: int, d: int) -> int:
    """Number of unordered pairs of edge slots, ``nd(nd−1)/2``."""
    return math.comb(n * d, 2)


def _space_chain(space: GraphSpace, simple_only: bool, pi_num, pi_den: int, multiplicity: bool,
                 validate: bool) -> FiniteChain:
    src, sw, mm, delta = switch_moves(space, simple_only=simple_only)
    dst = space.index_of(space.codes[src] + delta[sw])
    if (dst < 0).any():
        raise AssertionError("a switching left the enumerated space")
    rate = mm if multiplicity else np.ones(len(src), dtype=np.int64)
    return from_arrays(space.keys(), pi_num, pi_den, src, dst, rate, pairs(space.n, space.d), validate)


def build_Qu(n: int, d: int, validate: bool = True) -> FiniteChain:
    """Switch chain on simple graphs: rate ``1/C(nd, 2)`` per valid switching, uniform measure."""
    space = enumerate_simple(n, d)
    pi = np.ones(len(space), dtype=np.int64)
    return _space_chain(space, True, pi, len(space), False, validate)


def build_Qc(n: int, d: int, validate: bool = True) -> FiniteChain:
    """Configuration-model chain: rate ``mult(i,j)·mult(i′,j′)/C(nd, 2)``, measure π_BC."""
    space = enumerate_multi(n, d)
    return _space_chain(space, False, pi_bc_numerators(space.mats, d), pi_bc_denominator(n, d), True, validate)


def exact_mixing_time(n: int, d: int, epsilon: float, time_grid: Sequence[float]):
    """Worst-start TV mixing time of the switch chain, one start per isomorphism orbit.

    The chain commutes with row and column relabelling, so every start in an
    orbit has the same distance to uniform.
    """
    Q = build_Qu(n, d)
    return tv_mixing_time(Q, epsilon, time_grid, starts=orbit_representatives(enumerate_simple(n, d)))


def hold_probability(g: BipMultiGraph) -> Fraction:
    """Probability that one step of the embedded chain leaves ``g`` unchanged."""
    from .graphs import neighbors_switch
    return 1 - Fraction(len(neighbors_switch(g, simple=True)), pairs(g.n, g.d))


# ---------------------------------------------------------------------------
# lower-bound witness: f = 2 on graphs containing the edge (0, 0), 1 elsewhere

@dataclass
class WitnessValues:
    n: int
    d: int
    mode: str
    mean: float
    entropy: float
    dirichlet: float
    ratio: float
    edge_fraction: Fraction | None = None

    @property
    def ratio_per_nd(self) -> float:
        return self.ratio / (self.n * self.d)

    def as_dict(self) -> dict:
        out = {"n": self.n, "d": self.d, "mode": self.mode, "mean": self.mean, "entropy": self.entropy,
               "dirichlet": self.dirichlet, "ratio": self.ratio, "ratio_per_nd": self.ratio_per_nd,
               "dirichlet_bound": 2 * math.log(2) / self.n**2}
        if self.edge_fraction is not None:
            out["edge_fraction"] = f"{self.edge_fraction.numerator}/{self.edge_fraction.denominator}"
        return out


def witness_function(space: GraphSpace) -> np.ndarray:
    return np.where(space.mats[:, 0, 0] > 0, 2.0, 1.0)


def witness_closed_form(n: int, d: int) -> WitnessValues:
    """Formula values; the Dirichlet term uses exact counts of the relevant graph classes."""
    check_parameters(n, d)
    mean = (n + d) / n
    ent = (n - d) / n * math.log(n / (n + d)) + 2 * d / n * math.log(2 * n / (n + d))
    total = count_space(n, d, True)
    pattern = count_simple_with_pattern(n, d, {(0, 0): 1, (1, 1): 1, (0, 1): 0, (1, 0): 0})
    dir_ = math.log(2) * (n - 1) ** 2 * pattern / (total * pairs(n, d))
    return WitnessValues(n, d, "closed-form", mean, ent, dir_, ent / dir_, Fraction(d, n))


def witness_exact(n: int, d: int, chain: FiniteChain | None = None) -> WitnessValues:
    """Direct evaluation on the enumerated chain."""
    space = enumerate_simple(n, d)
    chain = build_Qu(n, d) if chain is None else chain
    f = witness_function(space)
    ent = entropy(chain, f)
    dir_ = dirichlet(chain, f, np.log(f))
    frac = Fraction(int((f == 2).sum()), len(space))
    return WitnessValues(n, d, "exact", float(chain.pi @ f), ent, dir_, ent / dir_, frac)


def mlsi_lower_witness(n: int, d: int, mode: str = "exact") -> WitnessValues:
    if mode == "exact":
        return witness_exact(n, d)
    if mode in ("closed-form", "closed"):
        return witness_closed_form(n, d)
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# simulation

def _streams(seed: int, runs: int) -> list[np.random.Generator]:
    """One counter-based stream per trajectory."""
    children = np.random.SeedSequence(seed).spawn(runs)
    return [np.random.Generator(np.random.Philox(s)) for s in children]


def _slots(mat: np.ndarray) -> np.ndarray:
    rows, cols = np.nonzero(mat)
    return np.stack([rows, cols], axis=1)


def _validate_start(g: BipMultiGraph) -> None:
    if not g.is_simple:
        raise InvalidStart("the start graph must be simple")
    check_parameters(g.n, g.d)


@dataclass
class Trajectories:
    n: int
    d: int
    runs: int
    steps: int
    seed: int
    checkpoints: np.ndarray
    diag: np.ndarray  # (len(checkpoints), runs) values of D_t
    xi: np.ndarray  # (len(checkpoints), n) per-vertex means of ξ_{i,t}
    accepted: np.ndarray  # (runs,) accepted moves
    final: np.ndarray  # (runs, n, n) final graphs
    time_unit: float = 1.0


def simulate_batch(n: int, d: int, runs: int, steps: int, seed: int, checkpoints: Sequence[int] | None = None,
                   start: BipMultiGraph | None = None, block: int = 4096) -> Trajectories:
    """Run ``runs`` independent copies of the embedded switch chain.

    Each step picks an unordered pair of edge slots uniformly among ``nd(nd−1)/2``
    and applies the crossed switching iff the result is simple.  The continuous
    generator attempts pairs at total rate 1, so ``t = steps``.
    """
    start = circulant(n, d) if start is None else start
    _validate_start(start)
    if start.n != n or start.d != d:
        raise InvalidStart("start graph has the wrong size")
    cps = np.arange(steps + 1) if checkpoints is None else np.unique(np.asarray(checkpoints, dtype=np.int64))
    if len(cps) and (cps.min() < 0 or cps.max() > steps):
        raise ValueError("checkpoints must lie in [0, steps]")
    m = n * d
    A = np.repeat(start.array.astype(np.int8)[None], runs, axis=0)
    E = np.repeat(_slots(start.array)[None], runs, axis=0)
    gens = _streams(seed, runs)
    R = np.arange(runs)
    diag = np.zeros((len(cps), runs), dtype=np.int32)
    xi = np.zeros((len(cps), n))
    accepted = np.zeros(runs, dtype=np.int64)
    ci = 0
    diag_idx = np.arange(n)

    def record(t):
        nonlocal ci
        while ci < len(cps) and cps[ci] == t:
            dg = A[:, diag_idx, diag_idx]
            diag[ci] = dg.sum(axis=1)
            xi[ci] = dg.mean(axis=0)
            ci += 1

    record(0)
    t = 0
    while t < steps:
        b = min(block, steps - t)
        draws = np.stack([g.integers(0, [m, m - 1], size=(b, 2)) for g in gens], axis=1)  # (b, runs, 2)
        for s in range(b):
            a = draws[s, :, 0]
            c = draws[s, :, 1]
            c = c + (c >= a)
            i, j = E[R, a, 0], E[R, a, 1]
            i2, j2 = E[R, c, 0], E[R, c, 1]
            ok = (i != i2) & (j != j2) & (A[R, i, j2] == 0) & (A[R, i2, j] == 0)
            r = R[ok]
            i, j, i2, j2, a_, c_ = i[ok], j[ok], i2[ok], j2[ok], a[ok], c[ok]
            A[r, i, j] = 0
            A[r, i2, j2] = 0
            A[r, i, j2] = 1
            A[r, i2, j] = 1
            E[r, a_, 1] = j2
            E[r, c_, 1] = j
            accepted[r] += 1
            t += 1
            record(t)
    return Trajectories(n, d, runs, steps, seed, cps, diag, xi, accepted, A)


def simulate(n: int, d: int, G0: BipMultiGraph | None, steps: int, seed: int,
             checkpoints: Sequence[int] | None = None) -> dict:
    """Single trajectory summary: ``D_t`` at the checkpoints and the final graph."""
    tr = simulate_batch(n, d, 1, steps, seed, checkpoints, G0)
    final = BipMultiGraph.from_array(tr.final[0], d)
    return {"n": n, "d": d, "steps": steps, "seed": seed, "time_unit": tr.time_unit,
            "checkpoints": tr.checkpoints.tolist(), "diagonal": tr.diag[:, 0].tolist(),
            "accepted": int(tr.accepted[0]), "final": final.key}


# ---------------------------------------------------------------------------
# stationary reference

def sample_uniform_simple(n: int, d: int, count: int, seed: int, batch: int = 2048) -> np.ndarray:
    """Uniform simple graphs by configuration-model rejection; returns ``(count, n, n)`` int8."""
    rng = np.random.default_rng(seed)
    m = n * d
    left = np.repeat(np.arange(n), d)
    right = np.repeat(np.arange(n), d)
    out = []
    got = 0
    while got < count:
        perm = rng.permuted(np.tile(right, (batch, 1)), axis=1)
        flat = left[None, :] * n + perm
        mats = np.zeros((batch, n * n), dtype=np.int8)
        np.add.at(mats, (np.repeat(np.arange(batch), m), flat.ravel()), 1)
        simple = (mats <= 1).all(axis=1)
        mats = mats[simple]
        out.append(mats)
        got += len(mats)
    return np.concatenate(out)[:count].reshape(count, n, n)


def stationary_diagonal(n: int, d: int, samples: int, seed: int) -> np.ndarray:
    g = sample_uniform_simple(n, d, samples, seed)
    return np.trace(g, axis1=1, axis2=2).astype(np.int64)


def exact_stationary_diagonal_mean(n: int, d: int) -> Fraction:
    space = enumerate_simple(n, d)
    total = int(np.trace(space.mats, axis1=1, axis2=2).sum())
    return Fraction(total, len(space))


# ---------------------------------------------------------------------------
# reports

def tv_lower_from_moments(mean_a: float, var_a: float, mean_b: float, var_b: float) -> float:
    """``1 − 4/(4 + ρ²)`` with ``ρ = |Δmean| / sqrt((var_a + var_b)/2)``."""
    s2 = 0.5 * (var_a + var_b)
    if s2 <= 0:
        return 1.0 if mean_a != mean_b else 0.0
    rho2 = (mean_a - mean_b) ** 2 / s2
    return 1 - 4 / (4 + rho2)


def empirical_tv(x: np.ndarray, y: np.ndarray) -> float:
    hi = int(max(x.max(), y.max())) + 1
    px = np.bincount(x, minlength=hi) / len(x)
    py = np.bincount(y, minlength=hi) / len(y)
    return 0.5 * float(np.abs(px - py).sum())


def xi_bound_check(tr: Trajectories, level: float = 0.99) -> list[dict]:
    """Per checkpoint: ``E ξ_{i,T} ≥ (1 − 2/nd)^T`` using the upper confidence limit of each vertex mean."""
    z = stats.norm.ppf(0.5 + level / 2)
    nd = tr.n * tr.d
    out = []
    for k, T in enumerate(tr.checkpoints):
        bound = (1 - 2 / nd) ** int(T)
        p = tr.xi[k]
        se = np.sqrt(np.maximum(p * (1 - p), 1e-300) / tr.runs)
        upper = p + z * se
        worst = int(np.argmin(upper - bound))
        out.append({"T": int(T), "bound": bound, "min_mean": float(p.min()), "pooled_mean": float(p.mean()),
                    "worst_vertex": worst, "worst_upper": float(upper[worst]),
                    "ok": bool((upper >= bound).all())})
    return out


def distinguishing_statistic_report(n: int, d: int, T_grid: Sequence[int], runs: int, seed: int,
                                    reference_samples: int = 20000, epsilon: float = 0.25) -> dict:
    """Mean and variance of ``D_T`` against the stationary law, with a TV lower bound per ``T``."""
    T_grid = sorted(int(t) for t in T_grid)
    tr = simulate_batch(n, d, runs, max(T_grid), seed, T_grid)
    ref = stationary_diagonal(n, d, reference_samples, seed + 1)
    rm, rv = float(ref.mean()), float(ref.var(ddof=1))
    rows = []
    for k, T in enumerate(tr.checkpoints):
        x = tr.diag[k].astype(np.int64)
        mean, var = float(x.mean()), float(x.var(ddof=1)) if runs > 1 else 0.0
        lower = tv_lower_from_moments(mean, var, rm, rv)
        rows.append({"T": int(T), "mean": mean, "var": var, "tv_lower": lower,
                     "tv_hist": empirical_tv(x, ref), "separated": bool(lower > epsilon)})
    sep = [r["T"] for r in rows if r["separated"]]
    return {"n": n, "d": d, "runs": runs, "seed": seed, "time_unit": tr.time_unit,
            "reference": {"mean": rm, "var": rv, "samples": reference_samples, "exact_mean": d,
                          "var_bound": n * d},
            "rows": rows, "mixing_lower_bound": max(sep) if sep else None,
            "xi_check": xi_bound_check(tr)}


def empirical_mixing_time(n: int, d: int, runs: int, seed: int, epsilon: float = 0.25,
                          reference_samples: int = 20000, max_steps: int | None = None) -> dict:
    """First step at which the histogram TV of ``D_t`` against the stationary law drops to ``epsilon``."""
    max_steps = max_steps or int(6 * n * d * math.log(n)) + 10
    tr = simulate_batch(n, d, runs, max_steps, seed)
    ref = stationary_diagonal(n, d, reference_samples, seed + 1)
    curve = np.array([empirical_tv(tr.diag[k].astype(np.int64), ref) for k in range(len(tr.checkpoints))])
    hit = np.flatnonzero(curve <= epsilon)
    t = int(tr.checkpoints[hit[0]]) if len(hit) else None
    return {"n": n, "d": d, "runs": runs, "seed": seed, "epsilon": epsilon, "t_mix": t,
            "curve": curve.tolist(), "steps": max_steps}


def fit_nlogn(ns: Sequence[int], ts: Sequence[float]) -> dict:
    """Least-squares ``t ≈ a · n log n`` through the origin with residual diagnostics."""
    x = np.array([k * math.log(k) for k in ns], dtype=float)
    y = np.asarray(ts, dtype=float)
    a = float(x @ y / (x @ x))
    resid = y - a * x
    ss = float(((y - y.mean()) ** 2).sum())
    r2 = 1 - float((resid**2).sum()) / ss if ss > 0 else 1.0
    # compare against a linear-in-n fit for the log factor
    b = float(np.asarray(ns, float) @ y / (np.asarray(ns, float) @ np.asarray(ns, float)))
    resid_lin = y - b * np.asarray(ns, float)
    return {"a": a, "residuals": resid.tolist(), "relative_residuals": (resid / y).tolist(), "r2": r2,
            "linear_coef": b, "linear_rss": float((resid_lin**2).sum()), "nlogn_rss": float((resid**2).sum())}
