"""Flows between two generators on one state space, and congestion functionals.

A flow is a family of weighted paths in the source chain.  Each path is filed
under the target edge joining its two endpoints; conservation asks that the
weights filed under ``(x, y)`` add up to ``π̃(x) Q̃(x, y)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import rational as rq
from .chain import FiniteChain, _values, entropy, entropy_production
from .errors import DimensionMismatch, PathNotInSourceGraph, RatioOutOfRange


@dataclass(frozen=True, eq=False)
class Flow:
    """Concatenated paths: path ``p`` visits ``nodes[ptr[p]:ptr[p+1]]`` with weight ``weight_num[p]/weight_den``."""

    ptr: np.ndarray
    nodes: np.ndarray
    weight_num: np.ndarray
    weight_den: int
    kind: np.ndarray | None = None  # optional integer label per path

    @property
    def n_paths(self) -> int:
        return len(self.ptr) - 1

    @property
    def lengths(self) -> np.ndarray:
        """Number of edges per path."""
        return np.diff(self.ptr) - 1

    @property
    def first(self) -> np.ndarray:
        return self.nodes[self.ptr[:-1]]

    @property
    def last(self) -> np.ndarray:
        return self.nodes[self.ptr[1:] - 1]

    def path(self, p: int) -> list[int]:
        return self.nodes[self.ptr[p]:self.ptr[p + 1]].tolist()

    def weight(self, p: int) -> Fraction:
        return Fraction(int(self.weight_num[p]), self.weight_den)

    def weights_float(self) -> np.ndarray:
        return rq.to_float(self.weight_num, self.weight_den)

    @classmethod
    def from_paths(cls, paths: Sequence[Sequence[int]], weights: Sequence, kind=None) -> "Flow":
        if len(paths) != len(weights):
            raise DimensionMismatch("one weight per path is required")
        num, den = rq.from_fractions(weights) if len(weights) else (np.zeros(0, np.int64), 1)
        lens = [len(p) for p in paths]
        if any(L < 2 for L in lens):
            raise ValueError("every path needs at least one edge")
        ptr = np.zeros(len(paths) + 1, dtype=np.int64)
        np.cumsum(lens, out=ptr[1:])
        nodes = np.fromiter((x for p in paths for x in p), dtype=np.int64, count=int(ptr[-1]))
        return cls(ptr, nodes, num, den, None if kind is None else np.asarray(kind))

    @classmethod
    def identity(cls, chain: FiniteChain) -> "Flow":
        """Each edge carries its own one-step path with weight ``π(x)Q(x,y)``."""
        m = chain.n_edges
        ptr = np.arange(0, 2 * m + 1, 2, dtype=np.int64)
        nodes = np.empty(2 * m, dtype=np.int64)
        nodes[0::2] = chain.rows
        nodes[1::2] = chain.indices
        num = rq.mul(chain.pi_num[chain.rows], chain.rate_num)
        return cls(ptr, nodes, num, chain.pi_den * chain.rate_den)

    def scaled(self, factor) -> "Flow":
        factor = Fraction(factor)
        return Flow(self.ptr, self.nodes, rq.mul(self.weight_num, factor.numerator),
                    self.weight_den * factor.denominator, self.kind)

    def with_weight(self, p: int, w) -> "Flow":
        """Copy with path ``p`` reweighted to ``w``."""
        w = Fraction(w)
        den = rq.lcm_all([self.weight_den, w.denominator])
        num = rq.rescale(self.weight_num, self.weight_den, den).copy()
        num[p] = w.numerator * (den // w.denominator)
        return Flow(self.ptr, self.nodes, num, den, self.kind)

    def edge_occurrences(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(path_id, a, b)`` for every traversed step, repeats included."""
        total = len(self.nodes)
        ends = self.ptr[1:] - 1
        mask = np.ones(total, dtype=bool)
        mask[ends] = False
        k = np.flatnonzero(mask)
        pid = np.repeat(np.arange(self.n_paths), self.lengths)
        return pid, self.nodes[k], self.nodes[k + 1]


# ---------------------------------------------------------------------------
# validation

@dataclass
class FlowResiduals:
    n_target_edges: int
    n_nonzero: int
    max_abs: Fraction
    nonzero: list  # [(x, y, residual Fraction)] truncated to the first few
    den: int

    @property
    def ok(self) -> bool:
        return self.n_nonzero == 0

    def as_dict(self) -> dict:
        return {"target_edges": self.n_target_edges, "nonzero": self.n_nonzero,
                "max_abs": rq.frac_str(self.max_abs),
                "examples": [[x, y, rq.frac_str(r)] for x, y, r in self.nonzero]}


def check_paths(flow: Flow, source: FiniteChain) -> None:
    _, a, b = flow.edge_occurrences()
    if len(a) and (max(a.max(), b.max()) >= source.size):
        raise PathNotInSourceGraph("path visits a state outside the source chain")
    pos = source.edge_index(a, b)
    bad = np.flatnonzero(pos < 0)
    if len(bad):
        k = int(bad[0])
        raise PathNotInSourceGraph(f"step ({a[k]}, {b[k]}) is not an edge of the source chain")


def validate_flow(flow: Flow, source: FiniteChain, target: FiniteChain, keep: int = 10) -> FlowResiduals:
    """Exact conservation residuals ``Σ W(P) − π̃(x)Q̃(x,y)`` per ordered pair."""
    if source.size != target.size:
        raise DimensionMismatch("source and target chains differ in size")
    check_paths(flow, source)
    n = np.int64(target.size)
    tden = target.pi_den * target.rate_den
    den = rq.lcm_all([flow.weight_den, tden])
    fkeys = flow.first * n + flow.last
    fnum = rq.rescale(flow.weight_num, flow.weight_den, den)
    tkeys = target.rows * n + target.indices
    tnum = rq.rescale(rq.mul(target.pi_num[target.rows], target.rate_num), tden, den)
    keys = np.concatenate([fkeys, tkeys])
    if fnum.dtype == object or tnum.dtype == object:
        vals = np.concatenate([rq._obj(fnum), -rq._obj(tnum)])
    else:
        vals = np.concatenate([fnum, -tnum])
    ukeys, sums = rq.group_sum(keys, vals)
    nz = np.flatnonzero(np.array([int(s) != 0 for s in sums], dtype=bool)) if sums.dtype == object \
        else np.flatnonzero(sums != 0)
    max_abs = Fraction(max((abs(int(sums[k])) for k in nz), default=0), den)
    examples = [(int(ukeys[k] // n), int(ukeys[k] % n), Fraction(int(sums[k]), den)) for k in nz[:keep]]
    return FlowResiduals(target.n_edges, len(nz), max_abs, examples, den)


# ---------------------------------------------------------------------------
# congestion

@dataclass
class Congestion:
    value: float
    edge: tuple[int, int] | None
    loads: np.ndarray  # per source edge, already divided by π(x)Q(x,y)

    def as_dict(self) -> dict:
        return {"value": self.value, "edge": list(self.edge) if self.edge else None}


def _congestion(flow: Flow, source: FiniteChain, factor: np.ndarray, select=None) -> Congestion:
    check_paths(flow, source)
    pid, a, b = flow.edge_occurrences()
    w = flow.weights_float() * factor
    if select is not None:
        keep = np.asarray(select)[pid]
        pid, a, b = pid[keep], a[keep], b[keep]
    pos = source.edge_index(a, b)
    load = np.bincount(pos, weights=w[pid], minlength=source.n_edges) / source.edge_mass
    if source.n_edges == 0:
        return Congestion(0.0, None, load)
    k = int(np.argmax(load))
    return Congestion(float(load[k]), (int(source.rows[k]), int(source.indices[k])), load)


def length_factor(lengths: np.ndarray, r: float) -> np.ndarray:
    """``1 + (|P|−1)² log r``."""
    return 1 + (np.asarray(lengths, dtype=float) - 1) ** 2 * math.log(r)


def _unit_congestion_exact(flow: Flow, source: FiniteChain) -> Congestion:
    """Rational congestion of a flow made of one-step paths (the length factor is exactly 1)."""
    check_paths(flow, source)
    pid, a, b = flow.edge_occurrences()
    pos = source.edge_index(a, b)
    tot = [0] * source.n_edges
    for p, e in zip(pid.tolist(), pos.tolist()):
        tot[e] += int(flow.weight_num[p])
    best, arg = Fraction(0), None
    for e in range(source.n_edges):
        mass = Fraction(int(source.pi_num[source.rows[e]]) * int(source.rate_num[e]),
                        source.pi_den * source.rate_den)
        v = Fraction(tot[e], flow.weight_den) / mass
        if arg is None or v > best:
            best, arg = v, e
    loads = np.array([float(Fraction(t, flow.weight_den)) for t in tot]) / source.edge_mass
    edge = (int(source.rows[arg]), int(source.indices[arg])) if arg is not None else None
    return Congestion(float(best), edge, loads)


def congestion_A(flow: Flow, source: FiniteChain, r: float, select=None) -> Congestion:
    """Max over source edges of ``Σ_{P ∋ e} W(P)(1 + (|P|−1)² log r) / (π Q)(e)``.

    Flows of one-step paths are evaluated in exact arithmetic.
    """
    if r < 1:
        raise ValueError("r must be at least 1")
    if select is None and flow.n_paths and (flow.lengths == 1).all():
        return _unit_congestion_exact(flow, source)
    return _congestion(flow, source, length_factor(flow.lengths, r), select)


def classical_congestion(flow: Flow, source: FiniteChain, select=None) -> Congestion:
    """As :func:`congestion_A` with the path-length factor ``|P|``."""
    return _congestion(flow, source, flow.lengths.astype(float), select)


# ---------------------------------------------------------------------------
# telescoping along a path

def telescope_terms(values: Sequence[float], r: float, tol: float = 1e-12):
    """``(lhs, rhs_sum, factor)`` for a positive sequence with consecutive ratios in ``[1/r, r]``."""
    v = np.asarray(values, dtype=float)
    if len(v) < 2:
        raise ValueError("need at least two values (one step)")
    if (v <= 0).any():
        raise RatioOutOfRange("values must be positive")
    lr = np.log(v[1:] / v[:-1])
    if (np.abs(lr) > math.log(r) + tol).any():
        raise RatioOutOfRange(f"a consecutive ratio leaves [1/{r}, {r}]")
    lhs = float((v[-1] - v[0]) * math.log(v[-1] / v[0]))
    rhs = float(((v[1:] - v[:-1]) * lr).sum())
    return lhs, rhs, (lhs / rhs if rhs > 0 else None)


def telescope_check(values: Sequence[float], r: float, C: float | None = None):
    """Telescoping terms plus the admissible bound ``C(1 + (T−1)² log r)``."""
    lhs, rhs, factor = telescope_terms(values, r)
    T = len(values) - 1
    if C is None:
        from .calibration import constant
        C = constant("telescope_C")
    return lhs, rhs, factor, C * (1 + (T - 1) ** 2 * math.log(r))


# ---------------------------------------------------------------------------
# comparison

def comparison_bound(a: float, A: float, alpha_tilde: float, C: float | None = None) -> float:
    """``C · a · A · α̃``."""
    if min(a, A, alpha_tilde) <= 0:
        raise ValueError("a, A and alpha_tilde must be positive")
    if C is None:
        from .calibration import constant
        C = constant("comparison_C")
    return C * a * A * alpha_tilde


def measure_ratio(pi: np.ndarray, pi_tilde: np.ndarray) -> float:
    """Smallest ``a`` with ``π ≤ a π̃`` pointwise."""
    return float(np.max(np.asarray(pi) / np.asarray(pi_tilde)))


def entropy_comparison(chain: FiniteChain, pi_tilde, f) -> tuple[float, float, float]:
    """``(Ent_π f, a · Ent_π̃ f, a)`` with ``a = max π/π̃``."""
    f = _values(chain, f, positive=True)
    pt = np.asarray(pi_tilde, dtype=float)
    a = measure_ratio(chain.pi, pt)
    return entropy(chain, f), a * entropy(chain, f, pi=pt), a


def dirichlet_comparison(flow: Flow, source: FiniteChain, target: FiniteChain, f, r: float,
                         C: float | None = None) -> tuple[float, float]:
    """``(Ẽ(f, log f), 2 C A(W, r) E(f, log f))`` for an r-regular ``f``."""
    if C is None:
        from .calibration import constant
        C = constant("telescope_C")
    A = congestion_A(flow, source, r).value
    return entropy_production(target, f), 2 * C * A * entropy_production(source, f)


# ---------------------------------------------------------------------------
# serialization

def flow_to_json(flow: Flow, states: Sequence | None = None) -> list:
    name = (lambda i: int(i)) if states is None else (lambda i: str(states[i]))
    groups: dict[tuple[int, int], list] = {}
    for p in range(flow.n_paths):
        nodes = flow.path(p)
        groups.setdefault((nodes[0], nodes[-1]), []).append(
            {"states": [name(x) for x in nodes], "weight": rq.frac_str(flow.weight(p))})
    return [{"from": name(x), "to": name(y), "paths": ps} for (x, y), ps in sorted(groups.items())]


def flow_from_json(obj: Iterable[dict], states: Sequence | None = None) -> Flow:
    index = None if states is None else {str(s): i for i, s in enumerate(states)}
    look = (lambda s: int(s)) if index is None else (lambda s: index[str(s)])
    paths, weights = [], []
    for entry in obj:
        for p in entry["paths"]:
            paths.append([look(s) for s in p["states"]])
            weights.append(Fraction(p["weight"]))
    return Flow.from_paths(paths, weights)
