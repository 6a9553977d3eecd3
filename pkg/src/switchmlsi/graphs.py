"""Bipartite d-regular (multi)graph spaces.

A graph on ``[n] ⊔ [n]`` is stored as its ``n × n`` biadjacency matrix of edge
multiplicities.  Spaces are enumerated exhaustively in lexicographic order of
the row-major digits, which is also the order of their integer codes, so
membership tests are a ``searchsorted`` away.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Iterator, NamedTuple, Sequence, TextIO

import numpy as np

from .errors import SpaceTooLarge
from .rational import int_array

DEFAULT_CAP = 10**6
UNSTRUCTURED = -1


class Switching(NamedTuple):
    """``⟨i, i2, j, j2⟩``: destroy ``(i, j)`` and ``(i2, j2)``, create ``(i, j2)`` and ``(i2, j)``."""

    i: int
    i2: int
    j: int
    j2: int

    def reverse(self) -> "Switching":
        return Switching(self.i, self.i2, self.j2, self.j)

    def vertices(self) -> tuple[set[int], set[int]]:
        return {self.i, self.i2}, {self.j, self.j2}


def state_key(digits: Iterable[int]) -> str:
    digits = [int(x) for x in digits]
    if all(0 <= x < 10 for x in digits):
        return "".join(map(str, digits))
    return ",".join(map(str, digits))


@dataclass(frozen=True)
class BipMultiGraph:
    n: int
    d: int
    mult: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.mult) != self.n or any(len(r) != self.n for r in self.mult):
            raise ValueError("multiplicity matrix must be n x n")
        a = self.array
        if (a < 0).any():
            raise ValueError("multiplicities must be nonnegative")
        if (a.sum(axis=1) != self.d).any() or (a.sum(axis=0) != self.d).any():
            raise ValueError("every row and column sum must equal d")

    @classmethod
    def from_array(cls, mat, d: int | None = None) -> "BipMultiGraph":
        mat = np.asarray(mat, dtype=int)
        n = mat.shape[0]
        if d is None:
            d = int(mat[0].sum()) if n else 0
        return cls(n, d, tuple(tuple(int(x) for x in row) for row in mat))

    @classmethod
    def from_key(cls, key: str, n: int, d: int | None = None) -> "BipMultiGraph":
        digits = [int(x) for x in key.split(",")] if "," in key else [int(c) for c in key]
        return cls.from_array(np.reshape(digits, (n, n)), d)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.mult, dtype=np.int64).reshape(self.n, self.n)

    @property
    def key(self) -> str:
        return state_key(x for row in self.mult for x in row)

    @property
    def is_simple(self) -> bool:
        return all(x <= 1 for row in self.mult for x in row)

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.mult[i][j]

    def apply(self, s: Switching) -> "BipMultiGraph":
        if s.i == s.i2 or s.j == s.j2:
            raise ValueError("a switching needs two non-incident edges")
        a = self.array
        if a[s.i, s.j] < 1 or a[s.i2, s.j2] < 1:
            raise ValueError(f"{s} destroys an edge absent from the graph")
        a[s.i, s.j] -= 1
        a[s.i2, s.j2] -= 1
        a[s.i, s.j2] += 1
        a[s.i2, s.j] += 1
        return BipMultiGraph.from_array(a, self.d)

    def __str__(self) -> str:
        return " ".join(str(x) for row in self.mult for x in row)


def circulant(n: int, d: int) -> BipMultiGraph:
    """Simple graph with edges ``(i, i + s mod n)`` for ``s < d`` (diagonal plus shifts)."""
    a = np.zeros((n, n), dtype=int)
    for i in range(n):
        for s in range(d):
            a[i, (i + s) % n] = 1
    return BipMultiGraph.from_array(a, d)


def check_parameters(n: int, d: int) -> None:
    if not (2 <= d and 2 * d <= n):
        raise ValueError(f"need 2 <= d <= n/2, got n={n}, d={d}")


# ---------------------------------------------------------------------------
# counting

@lru_cache(maxsize=None)
def _row_patterns(n_classes: tuple[int, ...], d: int, max_mult: int) -> tuple:
    """Ways to place a row of total ``d`` on columns grouped by remaining demand.

    ``n_classes[k]`` is the number of columns still needing ``k`` units.
    Yields ``(new_classes, multiplicity)`` pairs.
    """
    out: Counter = Counter()
    demands = len(n_classes) - 1

    def rec(k: int, left: int, moved: list[int], ways: int):
        if k == 0:
            if left == 0:
                new = list(n_classes)
                for kk in range(1, demands + 1):
                    new[kk] -= sum(moved[kk])
                    for e, cnt in enumerate(moved[kk]):
                        new[kk - e] += cnt
                out[tuple(new)] += ways
            return
        c = n_classes[k]
        cap = min(k, max_mult)
        # distribute the c columns of demand k among receive amounts 0..cap
        for alloc in _compositions_bounded(c, cap + 1):
            units = sum(e * a for e, a in enumerate(alloc))
            if units > left:
                continue
            moved[k] = alloc
            rec(k - 1, left - units, moved, ways * _multinomial(c, alloc))
        moved[k] = ()

    moved: list = [()] * (demands + 1)
    rec(demands, d, moved, 1)
    return tuple(out.items())


def _compositions_bounded(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions_bounded(total - first, parts - 1):
            yield (first,) + rest


def _multinomial(n: int, parts: Sequence[int]) -> int:
    out = math.factorial(n)
    for p in parts:
        out //= math.factorial(p)
    return out


def count_space(n: int, d: int, simple: bool) -> int:
    """Number of ``n × n`` matrices with line sums ``d`` (entries ≤ 1 when ``simple``).

    Dynamic programme over the histogram of remaining column demands.
    """
    max_mult = 1 if simple else d
    layer: Counter = Counter({tuple([0] * d + [n]): 1})
    for _ in range(n):
        nxt: Counter = Counter()
        for classes, ways in layer.items():
            for new, w in _row_patterns(classes, d, max_mult):
                nxt[new] += ways * w
        layer = nxt
    return layer.get(tuple([n] + [0] * d), 0)


def count_simple_with_pattern(n: int, d: int, fixed: dict[tuple[int, int], int]) -> int:
    """Number of simple graphs in the space whose entries agree with ``fixed``."""
    layer: dict[tuple[int, ...], int] = {tuple([d] * n): 1}
    for r in range(n):
        must = {j for (i, j), v in fixed.items() if i == r and v == 1}
        ban = {j for (i, j), v in fixed.items() if i == r and v == 0}
        nxt: Counter = Counter()
        for dem, ways in layer.items():
            free = [j for j in range(n) if dem[j] > 0 and j not in ban]
            if not must <= set(free):
                continue
            others = [j for j in free if j not in must]
            for extra in combinations(others, d - len(must)):
                new = list(dem)
                for j in must:
                    new[j] -= 1
                for j in extra:
                    new[j] -= 1
                nxt[tuple(new)] += ways
        layer = nxt
    return layer.get(tuple([0] * n), 0)


# ---------------------------------------------------------------------------
# enumeration

def _row_compositions(n: int, d: int, max_mult: int) -> np.ndarray:
    rows = [c for c in _compositions_bounded(d, n) if max(c) <= max_mult]
    rows.sort()
    return np.array(rows, dtype=np.int16).reshape(-1, n)


def code_weights(n: int, base: int) -> np.ndarray:
    if n * n * math.log2(base) >= 63:
        raise SpaceTooLarge(f"codes for n={n} with base {base} exceed 64 bits")
    return (np.int64(base) ** np.arange(n * n - 1, -1, -1, dtype=np.int64)).astype(np.int64)


class GraphSpace(Sequence[BipMultiGraph]):
    """Exhaustively enumerated graph space with sorted integer codes."""

    def __init__(self, n: int, d: int, simple: bool, mats: np.ndarray):
        self.n = n
        self.d = d
        self.simple = simple
        self.base = 2 if simple else d + 1
        self.mats = mats
        self.weights = code_weights(n, self.base)
        self.codes = self.encode(mats)
        if len(self.codes) > 1 and not (np.diff(self.codes) > 0).all():
            raise AssertionError("enumeration is not strictly increasing")

    def __len__(self) -> int:
        return len(self.mats)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[k] for k in range(*i.indices(len(self)))]
        return BipMultiGraph.from_array(self.mats[i], self.d)

    def __repr__(self) -> str:
        kind = "simple" if self.simple else "multi"
        return f"GraphSpace(n={self.n}, d={self.d}, {kind}, size={len(self)})"

    @property
    def flat(self) -> np.ndarray:
        return self.mats.reshape(len(self), -1)

    def encode(self, mats: np.ndarray) -> np.ndarray:
        flat = np.asarray(mats).reshape(-1, self.n * self.n).astype(np.int64)
        return flat @ self.weights

    def index_of(self, codes) -> np.ndarray:
        """Indices of the given codes, ``-1`` where absent."""
        codes = np.asarray(codes, dtype=np.int64)
        pos = np.searchsorted(self.codes, codes)
        pos = np.minimum(pos, len(self.codes) - 1)
        return np.where(self.codes[pos] == codes, pos, -1)

    def index(self, g: BipMultiGraph) -> int:
        i = int(self.index_of(self.encode(g.array))[0])
        if i < 0:
            raise KeyError(g.key)
        return i

    def keys(self) -> list[str]:
        return [state_key(row) for row in self.flat.tolist()]


def enumerate_space(n: int, d: int, simple: bool, cap: int = DEFAULT_CAP) -> GraphSpace:
    check_parameters(n, d)
    size = count_space(n, d, simple)
    if size > cap:
        raise SpaceTooLarge(f"space n={n}, d={d} ({'simple' if simple else 'multi'}) has {size} states > cap {cap}")
    max_mult = 1 if simple else d
    comps = _row_compositions(n, d, max_mult)
    prefix = np.zeros((1, 0), dtype=np.int32)
    colsum = np.zeros((1, n), dtype=np.int16)
    for r in range(n):
        left = (n - r - 1) * max_mult
        new = colsum[:, None, :] + comps[None, :, :]
        ok = ((new <= d) & (d - new <= left)).all(axis=2)
        m_idx, c_idx = np.nonzero(ok)
        prefix = np.concatenate([prefix[m_idx], c_idx[:, None].astype(np.int32)], axis=1)
        colsum = new[m_idx, c_idx]
    mats = comps[prefix].astype(np.int8)
    if len(mats) != size:
        raise AssertionError(f"enumerated {len(mats)} graphs, expected {size}")
    return GraphSpace(n, d, simple, mats)


@lru_cache(maxsize=8)
def enumerate_simple(n: int, d: int, cap: int = DEFAULT_CAP) -> GraphSpace:
    """All simple bipartite d-regular graphs on ``[n] ⊔ [n]`` in lexicographic order."""
    return enumerate_space(n, d, True, cap)


@lru_cache(maxsize=8)
def enumerate_multi(n: int, d: int, cap: int = DEFAULT_CAP) -> GraphSpace:
    """All bipartite d-regular multigraphs on ``[n] ⊔ [n]`` in lexicographic order."""
    return enumerate_space(n, d, False, cap)


def canonical_codes(space: GraphSpace) -> np.ndarray:
    """Invariant of each graph under relabelling rows and columns.

    Minimum over row permutations of the sorted column codes, packed into one
    integer; equal values mean the graphs are isomorphic as labelled-side
    bipartite graphs.
    """
    n, base = space.n, space.base
    w = base ** np.arange(n, dtype=np.int64)
    pack = (base ** n) ** np.arange(n - 1, -1, -1, dtype=np.int64)
    if n * n * math.log2(base) >= 63:
        raise SpaceTooLarge(f"canonical codes for n={n} exceed 64 bits")
    best = np.full(len(space), np.iinfo(np.int64).max, dtype=np.int64)
    mats = space.mats.astype(np.int64)
    for perm in itertools.permutations(range(n)):
        # row k moves to position perm.index(k); permute the weights instead of the rows
        cols = np.tensordot(mats, w[np.argsort(perm)], axes=([1], [0]))
        cols.sort(axis=1)
        np.minimum(best, cols @ pack, out=best)
    return best


def orbit_representatives(space: GraphSpace) -> np.ndarray:
    """Smallest index in each orbit under row and column relabelling."""
    _, first = np.unique(canonical_codes(space), return_index=True)
    return np.sort(first)


# ---------------------------------------------------------------------------
# configuration-model measure

def pi_bc_denominator(n: int, d: int) -> int:
    return math.factorial(n * d)


def pi_bc_numerators(mats: np.ndarray, d: int) -> np.ndarray:
    """Numerators ``(d!)^{2n} / ∏ mult!`` of the configuration-model mass over ``(nd)!``."""
    mats = np.asarray(mats)
    n = mats.shape[-1]
    fact = np.array([math.factorial(k) for k in range(d + 1)], dtype=np.int64)
    prod = fact[mats.astype(np.int64)].reshape(len(mats), -1).prod(axis=1)
    top = math.factorial(d) ** (2 * n)
    if top < 2**62:
        return np.int64(top) // prod
    return int_array([top // int(p) for p in prod])


def pi_bc(g: BipMultiGraph) -> Fraction:
    """Configuration-model probability of ``g``."""
    num = math.factorial(g.d) ** (2 * g.n)
    den = math.factorial(g.n * g.d)
    for row in g.mult:
        for x in row:
            den *= math.factorial(x)
    return Fraction(num, den)


@dataclass(frozen=True)
class SimpleMass:
    n: int
    d: int
    count: int
    mass: Fraction
    target: float
    ratio: float
    method: str


def simple_mass(n: int, d: int, cap: int = DEFAULT_CAP, method: str = "auto") -> SimpleMass:
    """Exact configuration-model mass of the simple graphs and its ratio to ``exp(-(d-1)^2/2)``."""
    check_parameters(n, d)
    if method == "auto":
        method = "enumerate" if count_space(n, d, True) <= cap else "count"
    if method == "enumerate":
        space = enumerate_simple(n, d, cap)
        count = len(space)
        mass = Fraction(int(pi_bc_numerators(space.mats, d).sum(dtype=object)), pi_bc_denominator(n, d))
    elif method == "count":
        count = count_space(n, d, True)
        mass = Fraction(count * math.factorial(d) ** (2 * n), pi_bc_denominator(n, d))
    else:
        raise ValueError(f"unknown method {method!r}")
    target = math.exp(-((d - 1) ** 2) / 2)
    return SimpleMass(n, d, count, mass, target, float(mass) / target, method)


# ---------------------------------------------------------------------------
# categories

def categorize_array(mats: np.ndarray, m: int) -> np.ndarray:
    """Category label per graph: ``k`` in ``[0, m]`` or ``UNSTRUCTURED``."""
    mats = np.asarray(mats)
    twos = mats == 2
    k = twos.sum(axis=(1, 2))
    ok = ~(mats >= 3).any(axis=(1, 2))
    ok &= twos.sum(axis=2).max(axis=1) <= 1
    ok &= twos.sum(axis=1).max(axis=1) <= 1
    ok &= k <= m
    return np.where(ok, k, UNSTRUCTURED)


def categorize(g: BipMultiGraph, m: int):
    """``k`` when ``g`` has exactly ``k ≤ m`` pairwise non-incident double edges and nothing
    heavier, otherwise ``UNSTRUCTURED``."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    return int(categorize_array(g.array[None], m)[0])


def default_m(n: int) -> int:
    """``max(1, ⌊log log n⌋)``; the unclamped value is 0 for every ``n < 16``."""
    raw = math.floor(math.log(math.log(n))) if n >= 3 else 0
    return max(1, raw)


def multiedges(g: BipMultiGraph) -> list[tuple[int, int]]:
    """Double edges of ``g`` sorted by left endpoint."""
    return sorted((i, j) for i in range(g.n) for j in range(g.n) if g[i, j] == 2)


# ---------------------------------------------------------------------------
# switchings

@lru_cache(maxsize=None)
def switch_table(n: int) -> np.ndarray:
    """Every unordered pair of edge slots with distinct rows and columns, as rows ``(i, i2, j, j2)``."""
    rows = [(i, i2, j, j2) for i in range(n) for i2 in range(i + 1, n)
            for j in range(n) for j2 in range(n) if j != j2]
    return np.array(rows, dtype=np.int64).reshape(-1, 4)


def neighbors_switch(g: BipMultiGraph, simple: bool | None = None) -> list[tuple[Switching, BipMultiGraph]]:
    """All switchings of ``g`` with their results.

    With ``simple=True`` only results without multiple edges are kept (the simple
    chain's neighbourhood); by default that mode is used iff ``g`` is simple.
    """
    if simple is None:
        simple = g.is_simple
    a = g.array
    out = []
    for i, i2, j, j2 in switch_table(g.n):
        if a[i, j] < 1 or a[i2, j2] < 1:
            continue
        if simple and (a[i, j2] or a[i2, j]):
            continue
        s = Switching(int(i), int(i2), int(j), int(j2))
        out.append((s, g.apply(s)))
    return out


def connecting_switching(g1: BipMultiGraph, g2: BipMultiGraph) -> Switching | None:
    """The switching taking ``g1`` to ``g2`` if they are adjacent, else ``None``."""
    diff = g2.array - g1.array
    lost = [(i, j) for i, j in zip(*np.nonzero(diff < 0)) for _ in range(-diff[i, j])]
    won = [(i, j) for i, j in zip(*np.nonzero(diff > 0)) for _ in range(diff[i, j])]
    if len(lost) != 2 or len(won) != 2:
        return None
    (i, j), (i2, j2) = lost
    if i == i2 or j == j2:
        return None
    if sorted(won) != sorted([(i, j2), (i2, j)]):
        return None
    return Switching(int(i), int(i2), int(j), int(j2))


def switch_moves(space: GraphSpace, rows: np.ndarray | None = None, simple_only: bool = False,
                 chunk: int = 20000):
    """Vectorised switchings from the states ``rows`` of ``space``.

    Returns ``(src, switch_index, mm, delta)`` where ``mm`` is the product of the
    multiplicities of the destroyed edges and ``delta`` the code increment in
    ``space``'s encoding.
    """
    n = space.n
    tab = switch_table(n)
    i, i2, j, j2 = tab.T
    p1, p2, q1, q2 = i * n + j, i2 * n + j2, i * n + j2, i2 * n + j
    w = space.weights
    delta = -w[p1] - w[p2] + w[q1] + w[q2]
    if rows is None:
        rows = np.arange(len(space))
    flat = space.flat
    srcs, sws, mms = [], [], []
    for start in range(0, len(rows), chunk):
        r = rows[start:start + chunk]
        f = flat[r].astype(np.int16)
        a = f[:, p1]
        b = f[:, p2]
        ok = (a > 0) & (b > 0)
        if simple_only:
            ok &= (f[:, q1] == 0) & (f[:, q2] == 0)
        rr, ss = np.nonzero(ok)
        srcs.append(r[rr])
        sws.append(ss)
        mms.append((a[rr, ss] * b[rr, ss]).astype(np.int64))
    src = np.concatenate(srcs) if srcs else np.zeros(0, np.int64)
    sw = np.concatenate(sws) if sws else np.zeros(0, np.int64)
    mm = np.concatenate(mms) if mms else np.zeros(0, np.int64)
    return src.astype(np.int64), sw.astype(np.int64), mm, delta


# ---------------------------------------------------------------------------
# graph file format: one graph per line, row-major multiplicities

def write_graphs(stream: TextIO, graphs: Iterable[BipMultiGraph] | GraphSpace) -> int:
    count = 0
    if isinstance(graphs, GraphSpace):
        for row in graphs.flat.tolist():
            stream.write(" ".join(map(str, row)) + "\n")
            count += 1
        return count
    for g in graphs:
        stream.write(str(g) + "\n")
        count += 1
    return count


def read_graphs(stream: TextIO) -> list[BipMultiGraph]:
    out = []
    for line in stream:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        vals = [int(x) for x in line.split()]
        n = math.isqrt(len(vals))
        if n * n != len(vals):
            raise ValueError(f"line does not hold a square matrix: {line!r}")
        out.append(BipMultiGraph.from_array(np.reshape(vals, (n, n))))
    return out
