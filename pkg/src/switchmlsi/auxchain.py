"""Simple paths, s-neighbourhoods, matchings between them, and the auxiliary chain.

Everything is built once per ``(n, d, m)`` into an :class:`AuxStructure` whose
arrays are indexed by positions in the enumerated multigraph space ``M`` and
simple space ``S``.  Per-graph helpers (``s_neighborhood``, ``psi``, ...) are
written directly from the definitions and serve as the reference for the bulk
tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Iterator

import numpy as np
from scipy.sparse import csgraph

from . import rational as rq
from .chain import FiniteChain, from_arrays
from .errors import MembershipViolated, NotAdjacent, NotInCategory, SwitchingInvalidOnEndpoint
from .flows import Flow
from .graphs import (UNSTRUCTURED, BipMultiGraph, Switching, categorize, categorize_array, connecting_switching,
                     enumerate_multi, enumerate_simple, multiedges, pi_bc_denominator, pi_bc_numerators,
                     switch_moves, switch_table)
from .switch import build_Qu, pairs

DIRECT, PERFECT, HARD = 0, 1, 2
KIND_NAMES = {DIRECT: "direct", PERFECT: "perfect", HARD: "H"}


# ---------------------------------------------------------------------------
# per-graph reference implementation

@dataclass
class SNeighborhood:
    source: BipMultiGraph
    k: int
    endpoints: list  # BipMultiGraph, in discovery order
    paths: dict  # endpoint key -> list of graphs from source to endpoint
    choices: dict  # endpoint key -> tuple of (i', j') per step

    def __len__(self) -> int:
        return len(self.endpoints)

    def keys(self) -> set:
        return {g.key for g in self.endpoints}


def _choice_lists(g: BipMultiGraph) -> Iterator[tuple]:
    """All admissible step choices ``((i'_1, j'_1), ...)`` for the multiedges of ``g``."""
    me = multiedges(g)
    rows = {i for i, _ in me}
    cols = {j for _, j in me}
    a = g.array

    def rec(s: int, used_i: set, used_j: set, acc: list):
        if s == len(me):
            yield tuple(acc)
            return
        i_s, j_s = me[s]
        for ip in range(g.n):
            if ip in rows or ip in used_i or a[ip, j_s] != 0:
                continue
            for jp in range(g.n):
                if jp in cols or jp in used_j or a[ip, jp] == 0 or a[i_s, jp] != 0:
                    continue
                acc.append((ip, jp))
                yield from rec(s + 1, used_i | {ip}, used_j | {jp}, acc)
                acc.pop()

    yield from rec(0, set(), set(), [])


def simple_paths(g: BipMultiGraph) -> list[tuple[tuple, list]]:
    """Every simple path from ``g`` as ``(choices, [g, ..., endpoint])``."""
    me = multiedges(g)
    out = []
    for ch in _choice_lists(g):
        path = [g]
        cur = g
        for (i_s, j_s), (ip, jp) in zip(me, ch):
            cur = cur.apply(Switching(i_s, ip, j_s, jp))
            path.append(cur)
        out.append((ch, path))
    return out


def s_neighborhood(g: BipMultiGraph, m: int) -> SNeighborhood:
    """Endpoints of the simple paths from ``g`` (``{g}`` for simple ``g``)."""
    k = categorize(g, m)
    if k == UNSTRUCTURED:
        raise NotInCategory(f"graph {g.key} is not in Cat([0, {m}])")
    if k == 0:
        return SNeighborhood(g, 0, [g], {g.key: [g]}, {g.key: ()})
    ends, paths, choices = [], {}, {}
    for ch, path in simple_paths(g):
        e = path[-1]
        if e.key in paths:
            raise AssertionError(f"two simple paths from {g.key} end at {e.key}")
        ends.append(e)
        paths[e.key] = path
        choices[e.key] = ch
    return SNeighborhood(g, k, ends, paths, choices)


def _perfect_bullets(g1: BipMultiGraph, s: Switching) -> bool:
    me = multiedges(g1)
    rows = {i for i, _ in me}
    cols = {j for _, j in me}
    a = g1.array
    if {s.i, s.i2} & rows or {s.j, s.j2} & cols:
        return False
    for i in (s.i, s.i2):
        if any(a[i, c] > 0 for c in cols):
            return False
    for j in (s.j, s.j2):
        if any(a[r, j] > 0 for r in rows):
            return False
    return True


def is_perfect_pair(g1: BipMultiGraph, g2: BipMultiGraph, m: int | None = None) -> bool:
    """Both graphs in the same ``Cat(k)``, ``k ≥ 1``, joined by a switching away from all multiedges."""
    s = connecting_switching(g1, g2)
    if s is None:
        raise NotAdjacent(f"{g1.key} and {g2.key} are not one switching apart")
    m = max(len(multiedges(g1)), len(multiedges(g2)), 1) if m is None else m
    k1, k2 = categorize(g1, m), categorize(g2, m)
    if k1 != k2 or k1 < 1:
        return False
    return _perfect_bullets(g1, s)


def _map_choice(s: Switching, ch: tuple) -> tuple:
    out = []
    for e in ch:
        if e == (s.i, s.j):
            out.append((s.i, s.j2))
        elif e == (s.i2, s.j2):
            out.append((s.i2, s.j))
        else:
            out.append(e)
    return tuple(out)


def _endpoint(g: BipMultiGraph, ch: tuple) -> np.ndarray:
    a = g.array
    for (i_s, j_s), (ip, jp) in zip(multiedges(g), ch):
        a[i_s, j_s] -= 1
        a[ip, jp] -= 1
        a[i_s, jp] += 1
        a[ip, j_s] += 1
    return a


def _adjacent(a: BipMultiGraph, b: BipMultiGraph) -> bool:
    return connecting_switching(a, b) is not None


def kuhn_matching(left: list, right: list, adjacent) -> dict | None:
    """Perfect matching ``left -> right`` by augmenting paths in index order; ``None`` if none exists."""
    match_r: dict = {}

    def try_assign(u, seen):
        for v in range(len(right)):
            if v in seen or not adjacent(left[u], right[v]):
                continue
            seen.add(v)
            if v not in match_r or try_assign(match_r[v], seen):
                match_r[v] = u
                return True
        return False

    for u in range(len(left)):
        if not try_assign(u, set()):
            return None
    return {match_r[v]: v for v in match_r}


@lru_cache(maxsize=4096)
def _pair_matching(k1: str, k2: str, n: int, d: int, m: int) -> dict:
    """Matching ``SN(g1) -> SN(g2)`` for a perfect pair, as endpoint-key dict.

    The mapped-choice rule is used wherever it gives a member of ``SN(g2)``
    adjacent to the source endpoint; the rest is completed by a matching on
    the residual, computed in the orientation with the smaller key first.
    """
    g1 = BipMultiGraph.from_key(k1, n, d)
    g2 = BipMultiGraph.from_key(k2, n, d)
    if k1 > k2:
        back = _pair_matching(k2, k1, n, d, m)
        return {v: u for u, v in back.items()}
    s = connecting_switching(g1, g2)
    sn1 = s_neighborhood(g1, m)
    sn2 = s_neighborhood(g2, m)
    keys2 = sn2.keys()
    out: dict = {}
    taken: set = set()
    for e in sn1.endpoints:
        img = BipMultiGraph.from_array(_endpoint(g2, _map_choice(s, sn1.choices[e.key])), g1.d)
        if img.key in keys2 and img.key not in taken and _adjacent(e, img):
            out[e.key] = img.key
            taken.add(img.key)
    if len(out) < len(sn1):
        left = [e for e in sn1.endpoints if e.key not in out]
        right = [e for e in sn2.endpoints if e.key not in taken]
        if len(left) != len(right):
            raise SwitchingInvalidOnEndpoint(f"s-neighbourhoods of {k1} and {k2} differ in size")
        mt = kuhn_matching(left, right, _adjacent)
        if mt is None:
            raise SwitchingInvalidOnEndpoint(f"no adjacency-preserving matching between {k1} and {k2}")
        for u, v in mt.items():
            out[left[u].key] = right[v].key
    return out


def psi(g1p: BipMultiGraph, g2p: BipMultiGraph, g1: BipMultiGraph, m: int | None = None) -> BipMultiGraph:
    """Image of ``g1 ∈ SN(g1p)`` in ``SN(g2p)`` under the matching of a perfect pair."""
    m = max(len(multiedges(g1p)), 1) if m is None else m
    if not is_perfect_pair(g1p, g2p, m):
        raise MembershipViolated("psi is only defined on perfect pairs")
    mt = _pair_matching(g1p.key, g2p.key, g1p.n, g1p.d, m)
    if g1.key not in mt:
        raise MembershipViolated(f"{g1.key} is not in the s-neighbourhood of {g1p.key}")
    return BipMultiGraph.from_key(mt[g1.key], g1p.n, g1p.d)


def beta(g1p: BipMultiGraph, g2p: BipMultiGraph, g1: BipMultiGraph, g2: BipMultiGraph,
         m: int | None = None) -> Fraction:
    m = max(len(multiedges(g1p)), len(multiedges(g2p)), 1) if m is None else m
    sn1 = s_neighborhood(g1p, m)
    sn2 = s_neighborhood(g2p, m)
    if g1.key not in sn1.keys() or g2.key not in sn2.keys():
        raise MembershipViolated("endpoints must lie in the respective s-neighbourhoods")
    if connecting_switching(g1p, g2p) is None:
        raise NotAdjacent("the multigraphs must be adjacent")
    if categorize(g1p, m) >= 1 and is_perfect_pair(g1p, g2p, m):
        return Fraction(int(psi(g1p, g2p, g1, m).key == g2.key), len(sn1))
    return Fraction(1, len(sn1) * len(sn2))


# ---------------------------------------------------------------------------
# bulk structure

@dataclass
class SNTable:
    src: np.ndarray  # multi index
    end: np.ndarray  # simple index
    ci: np.ndarray  # (L, k) chosen rows, -1 padded
    cj: np.ndarray  # (L, k) chosen columns
    ptr: np.ndarray  # CSR over multi indices
    size: np.ndarray  # per multi index
    duplicates: int  # (source, endpoint) repeats; zero when paths are determined by endpoints


class AuxStructure:
    """All tables needed for the auxiliary chain at ``(n, d, m)``."""

    def __init__(self, n: int, d: int, m: int, chunk: int = 200_000):
        self.n, self.d, self.m = n, d, m
        self.chunk = chunk
        self.S = enumerate_simple(n, d)
        self.M = enumerate_multi(n, d)
        self.cat = categorize_array(self.M.mats, m)
        self.core = (self.cat >= 0)
        self.s2m = self.M.index_of(self.M.encode(self.S.mats))
        self.m2s = np.full(len(self.M), -1, dtype=np.int64)
        self.m2s[self.s2m] = np.arange(len(self.S))
        self.code2 = self.M.mats.reshape(len(self.M), -1).astype(np.int64) @ self.S.weights
        self.K = pi_bc_numerators(self.M.mats, d)
        self.sn = self._build_sn()
        self.L = rq.lcm_all(np.unique(self.sn.size[self.core & (self.sn.size > 0)]).tolist() or [1])
        self.empty_sn = int((self.core & (self.sn.size == 0)).sum())
        self._cache: dict = {}

    def __getattr__(self, name: str):
        # the multigraph edge table is built on first use
        if name.startswith("ce_"):
            self._qc_edges()
            return self.__dict__[name]
        raise AttributeError(name)

    # -- multiedge bookkeeping ------------------------------------------------
    def _multi_cells(self, idx: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
        """Rows and columns of the ``k`` double edges of each graph, sorted by row."""
        mats = self.M.mats[idx]
        g, r, c = np.nonzero(mats == 2)
        # np.nonzero walks row-major, so per graph the cells come sorted by row
        return r.reshape(len(idx), k), c.reshape(len(idx), k)

    def _build_sn(self) -> SNTable:
        n = self.n
        NM = len(self.M)
        w = self.S.weights
        srcs, ends, cis, cjs = [], [], [], []
        km = max(self.m, 0)
        # Cat(0): itself
        s0 = self.s2m
        srcs.append(s0)
        ends.append(np.arange(len(self.S)))
        cis.append(np.full((len(s0), km), -1, dtype=np.int8))
        cjs.append(np.full((len(s0), km), -1, dtype=np.int8))
        for k in range(1, self.m + 1):
            idx = np.flatnonzero(self.cat == k)
            if len(idx) == 0:
                continue
            mr, mc = self._multi_cells(idx, k)
            mats = self.M.mats[idx].astype(np.int8)
            row_multi = np.zeros((len(idx), n), dtype=bool)
            col_multi = np.zeros((len(idx), n), dtype=bool)
            np.put_along_axis(row_multi, mr, True, axis=1)
            np.put_along_axis(col_multi, mc, True, axis=1)
            # partial choices: (row in idx, chosen i', chosen j')
            part = np.arange(len(idx))
            chi = np.zeros((len(idx), 0), dtype=np.int64)
            chj = np.zeros((len(idx), 0), dtype=np.int64)
            for s in range(k):
                A = mats[part]  # (P, n, n)
                i_s = mr[part, s]
                j_s = mc[part, s]
                P = len(part)
                okr = ~row_multi[part]  # (P, n) candidate i'
                okr &= A[np.arange(P), :, j_s] == 0
                okc = ~col_multi[part]
                okc &= A[np.arange(P), i_s, :] == 0
                for t in range(s):
                    okr[np.arange(P), chi[:, t]] = False
                    okc[np.arange(P), chj[:, t]] = False
                ok = okr[:, :, None] & okc[:, None, :] & (A > 0)
                p, ip, jp = np.nonzero(ok)
                part = part[p]
                chi = np.concatenate([chi[p], ip[:, None]], axis=1)
                chj = np.concatenate([chj[p], jp[:, None]], axis=1)
            src = idx[part]
            code = self.code2[src].copy()
            for s in range(k):
                i_s, j_s = mr[part, s], mc[part, s]
                ip, jp = chi[:, s], chj[:, s]
                code += w[i_s * n + jp] + w[ip * n + j_s] - w[i_s * n + j_s] - w[ip * n + jp]
            end = self.S.index_of(code)
            if (end < 0).any():
                raise AssertionError("a simple-path endpoint is not a simple graph")
            pad_i = np.full((len(src), km), -1, dtype=np.int8)
            pad_j = np.full((len(src), km), -1, dtype=np.int8)
            pad_i[:, :k] = chi
            pad_j[:, :k] = chj
            srcs.append(src)
            ends.append(end)
            cis.append(pad_i)
            cjs.append(pad_j)
        src = np.concatenate(srcs)
        end = np.concatenate(ends)
        ci = np.concatenate(cis)
        cj = np.concatenate(cjs)
        key = src * np.int64(len(self.S)) + end
        order = np.argsort(key, kind="stable")
        src, end, ci, cj, key = src[order], end[order], ci[order], cj[order], key[order]
        dup = int((key[1:] == key[:-1]).sum())
        size = np.bincount(src, minlength=NM)
        ptr = np.zeros(NM + 1, dtype=np.int64)
        np.cumsum(size, out=ptr[1:])
        return SNTable(src, end, ci, cj, ptr, size, dup)

    def sn_keys(self) -> np.ndarray:
        if "snkeys" not in self.__dict__:
            self.snkeys = self.sn.src * np.int64(len(self.S)) + self.sn.end
        return self.snkeys

    def sn_member(self, src: np.ndarray, end: np.ndarray) -> np.ndarray:
        keys = self.sn_keys()
        want = src * np.int64(len(self.S)) + end
        pos = np.minimum(np.searchsorted(keys, want), len(keys) - 1)
        return np.where((end >= 0) & (keys[pos] == want), pos, -1)

    # -- adjacency between core multigraphs ----------------------------------
    def _qc_edges(self) -> None:
        rows = np.flatnonzero(self.core)
        src, sw, mm, delta = switch_moves(self.M, rows)
        dst = self.M.index_of(self.M.codes[src] + delta[sw])
        keep = self.core[dst]
        src, sw, mm, dst = src[keep], sw[keep], mm[keep], dst[keep]
        kind = np.full(len(src), HARD, dtype=np.int8)
        kind[(self.cat[src] == 0) & (self.cat[dst] == 0)] = DIRECT
        same = (self.cat[src] == self.cat[dst]) & (self.cat[src] >= 1)
        perf = np.zeros(len(src), dtype=bool)
        if same.any():
            perf[same] = self._perfect_mask(src[same], sw[same])
        kind[perf] = PERFECT
        self.ce_src, self.ce_dst, self.ce_sw, self.ce_mm, self.ce_kind = src, dst, sw, mm, kind

    def _perfect_mask(self, src: np.ndarray, sw: np.ndarray) -> np.ndarray:
        out = np.empty(len(src), dtype=bool)
        tab = switch_table(self.n)
        for s in range(0, len(src), self.chunk):
            g = src[s:s + self.chunk]
            mats = self.M.mats[g]
            two = mats == 2
            rm = two.any(axis=2)  # rows incident to a multiedge
            cm = two.any(axis=1)
            adj = mats > 0
            row_near = (adj & cm[:, None, :]).any(axis=2)  # row adjacent to a multiedge column
            col_near = (adj & rm[:, :, None]).any(axis=1)
            t = tab[sw[s:s + self.chunk]]
            P = np.arange(len(g))
            bad = np.zeros(len(g), dtype=bool)
            for col, rowside in ((0, True), (1, True), (2, False), (3, False)):
                v = t[:, col]
                if rowside:
                    bad |= rm[P, v] | row_near[P, v]
                else:
                    bad |= cm[P, v] | col_near[P, v]
            out[s:s + self.chunk] = ~bad
        return out

    # -- matchings on perfect pairs ------------------------------------------
    def _psi_chunk(self, e: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Mapped-choice images for the perfect core edges ``e``.

        Returns ``(edge, sn_pos, image_simple_index, image_sn_pos)`` with ``-1``
        images where the rule fails.
        """
        n = self.n
        w = self.S.weights
        p1 = self.ce_src[e]
        p2 = self.ce_dst[e]
        cnt = self.sn.size[p1]
        eid = np.repeat(e, cnt)
        start = np.repeat(self.sn.ptr[p1], cnt)
        pos = start + (np.arange(cnt.sum()) - np.repeat(np.cumsum(cnt) - cnt, cnt))
        q1 = np.repeat(p1, cnt)
        q2 = np.repeat(p2, cnt)
        k = self.cat[q1]
        tab = switch_table(n)[self.ce_sw[eid]]
        i, i2, j, j2 = tab.T
        code = self.code2[q2].copy()
        ci = self.sn.ci[pos].astype(np.int64)
        cj = self.sn.cj[pos].astype(np.int64)
        mats = self.M.mats[q2]
        two = mats == 2
        for s in range(self.m):
            live = k > s
            if not live.any():
                continue
            ip, jp = ci[:, s].copy(), cj[:, s].copy()
            a = (ip == i) & (jp == j)
            b = (ip == i2) & (jp == j2)
            jp = np.where(a, j2, np.where(b, j, jp))
            # s-th multiedge of the target (same multiedges as the source)
            cells = np.argsort(~two.reshape(len(q2), -1), axis=1, kind="stable")[:, s]
            i_s, j_s = cells // n, cells % n
            delta = w[i_s * n + jp] + w[ip * n + j_s] - w[i_s * n + j_s] - w[ip * n + jp]
            code = code + np.where(live, delta, 0)
        img = self.S.index_of(code)
        mem = self.sn_member(q2, img)
        img = np.where(mem >= 0, img, -1)
        return eid, pos, img, mem

    def perfect_tuples(self) -> Iterator[tuple[np.ndarray, np.ndarray, np.ndarray]]:
        """Chunks of ``(core_edge, G1, G2 = ψ(G1))`` over all perfect pairs."""
        perf = np.flatnonzero(self.ce_kind == PERFECT)
        step = max(1, self.chunk // max(1, int(self.sn.size.max())))
        Qu = self.Qu
        for s in range(0, len(perf), step):
            e = perf[s:s + step]
            eid, pos, img, mem = self._psi_chunk(e)
            g1 = self.sn.end[pos]
            bad = img < 0
            ok = ~bad
            if ok.any():
                adj = Qu.edge_index(g1[ok], img[ok]) >= 0
                tmp = np.flatnonzero(ok)
                bad[tmp[~adj]] = True
            # injectivity per pair
            key = eid * np.int64(len(self.S)) + np.where(img < 0, 0, img)
            srt = np.sort(key[~bad])
            dupkeys = srt[1:][srt[1:] == srt[:-1]]
            if len(dupkeys):
                bad |= np.isin(key, dupkeys)
            if bad.any():
                img = img.copy()
                for edge in np.unique(eid[bad]):
                    self._fallback_pair(int(edge), eid, pos, img)
                self._cache.setdefault("fallback_pairs", 0)
                self._cache["fallback_pairs"] += len(np.unique(eid[bad]))
            yield eid, g1, img

    def _fallback_pair(self, edge: int, eid, pos, img) -> None:
        p1, p2 = int(self.ce_src[edge]), int(self.ce_dst[edge])
        g1p, g2p = self.M[p1], self.M[p2]
        mt = _pair_matching(g1p.key, g2p.key, self.n, self.d, self.m)
        sel = np.flatnonzero(eid == edge)
        for t in sel:
            k1 = self.S[int(self.sn.end[pos[t]])].key
            img[t] = self.S.index(BipMultiGraph.from_key(mt[k1], self.n, self.d))

    @property
    def Qu(self) -> FiniteChain:
        if "Qu" not in self._cache:
            self._cache["Qu"] = build_Qu(self.n, self.d, validate=False)
        return self._cache["Qu"]

    # -- tuples ----------------------------------------------------------------
    @property
    def weight_den(self) -> int:
        """Common denominator ``(nd)! · C(nd,2) · L²`` of tuple weights ``π_BC Q_c β``."""
        return pi_bc_denominator(self.n, self.d) * pairs(self.n, self.d) * self.L**2

    def _base_num(self, e: np.ndarray) -> np.ndarray:
        return rq.mul(rq.mul(self.K[self.ce_src[e]], self.ce_mm[e]), 1)

    def tuples(self, kind: int) -> Iterator[tuple[np.ndarray, np.ndarray, np.ndarray]]:
        """Chunks ``(G1, G2, numerator)`` of tuple weights over :attr:`weight_den`, ``G1 ≠ G2`` only."""
        L = self.L
        size = self.sn.size
        if kind == DIRECT:
            e = np.flatnonzero(self.ce_kind == DIRECT)
            for s in range(0, len(e), self.chunk):
                ee = e[s:s + self.chunk]
                num = rq.mul(self._base_num(ee), L * L)
                yield self.m2s[self.ce_src[ee]], self.m2s[self.ce_dst[ee]], num
        elif kind == PERFECT:
            for eid, g1, g2 in self.perfect_tuples():
                fac = L // size[self.ce_src[eid]]
                num = rq.mul(rq.mul(self._base_num(eid), fac), L)
                keep = g1 != g2
                yield g1[keep], g2[keep], num[keep]
        else:
            e = np.flatnonzero((self.ce_kind == HARD) & (size[self.ce_src] > 0) & (size[self.ce_dst] > 0))
            per = size[self.ce_src[e]] * size[self.ce_dst[e]]
            bounds = np.searchsorted(np.cumsum(per), np.arange(0, per.sum() + self.chunk, self.chunk), side="right")
            bounds = np.unique(np.r_[0, bounds.clip(0, len(e))])
            for a, b in zip(bounds[:-1], bounds[1:]):
                ee = e[a:b]
                c1 = size[self.ce_src[ee]]
                c2 = size[self.ce_dst[ee]]
                cnt = c1 * c2
                rep = np.repeat(np.arange(len(ee)), cnt)
                local = np.arange(cnt.sum()) - np.repeat(np.cumsum(cnt) - cnt, cnt)
                u = local // np.repeat(c2, cnt)
                v = local % np.repeat(c2, cnt)
                g1 = self.sn.end[self.sn.ptr[self.ce_src[ee]][rep] + u]
                g2 = self.sn.end[self.sn.ptr[self.ce_dst[ee]][rep] + v]
                fac = (L // c1) * (L // c2)
                num = rq.mul(self._base_num(ee), fac)[rep]
                keep = g1 != g2
                yield g1[keep], g2[keep], num[keep]

    def aggregated(self, kind: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(G1, G2, Σ numerators)`` per ordered pair for one tuple kind."""
        ck = ("agg", kind)
        if ck not in self._cache:
            N = np.int64(len(self.S))
            keys, nums = [], []
            for g1, g2, num in self.tuples(kind):
                k, s = rq.group_sum(g1 * N + g2, num)
                keys.append(k)
                nums.append(s)
            if keys:
                allnum = np.concatenate([rq._obj(x) for x in nums]) if any(x.dtype == object for x in nums) \
                    else np.concatenate(nums)
                k, s = rq.group_sum(np.concatenate(keys), allnum)
            else:
                k, s = np.zeros(0, np.int64), np.zeros(0, np.int64)
            self._cache[ck] = (k // N, k % N, s)
        return self._cache[ck]


@lru_cache(maxsize=4)
def aux_structure(n: int, d: int, m: int) -> AuxStructure:
    return AuxStructure(n, d, m)


# ---------------------------------------------------------------------------
# auxiliary generator and flow

def build_aux_chain(n: int, d: int, m: int, validate: bool = True) -> FiniteChain:
    """Auxiliary generator on simple graphs, reversible for the uniform measure."""
    st = aux_structure(n, d, m)
    parts = [st.aggregated(k) for k in (DIRECT, PERFECT, HARD)]
    g1 = np.concatenate([p[0] for p in parts])
    g2 = np.concatenate([p[1] for p in parts])
    nums = [p[2] for p in parts]
    num = np.concatenate([rq._obj(x) for x in nums]) if any(x.dtype == object for x in nums) else np.concatenate(nums)
    N = len(st.S)
    # π_u(G1) Q̃(G1,G2) = Σ num / (4 D)  ⇒  Q̃ = N Σ num / (4 D)
    return from_arrays(st.S.keys(), np.ones(N, dtype=np.int64), N, g1, g2, rq.mul(num, N),
                       4 * st.weight_den, validate)


def hard_paths(st: AuxStructure, g1: np.ndarray, g2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Geodesics ``g1 → g2`` in the simple switch graph, stepping to the smallest-index
    neighbour that is one step closer.  Returns ``(flat_nodes, lengths)``."""
    Qu = st.Qu
    P = len(g1)
    lengths = np.full(P, -1, dtype=np.int64)
    mid = np.full(P, -1, dtype=np.int64)
    adj = Qu.edge_index(g1, g2) >= 0
    lengths[adj] = 1
    rest = np.flatnonzero(~adj)
    n = st.n
    w = st.S.weights
    for s in range(0, len(rest), 200_000):
        r = rest[s:s + 200_000]
        A = st.S.mats[g1[r]].astype(np.int8).reshape(len(r), -1)
        diff = st.S.mats[g2[r]].astype(np.int8).reshape(len(r), -1) - A
        nz = (diff != 0).sum(axis=1)
        cand = np.flatnonzero(nz <= 8)
        best = np.full(len(r), np.iinfo(np.int64).max, dtype=np.int64)
        if len(cand):
            D = diff[cand]
            Ac = A[cand]
            z = 8
            order = np.argsort(D == 0, axis=1, kind="stable")[:, :z]  # nonzero cells first
            valid_cell = np.take_along_axis(D, order, axis=1) != 0
            base = st.S.codes[g1[r][cand]]
            nzc = nz[cand].astype(np.int64)
            for trio in combinations(range(z), 3):
                cells = order[:, list(trio)]
                okc = valid_cell[:, list(trio)].all(axis=1)
                rr, cc = cells // n, cells % n
                r1, r2 = rr.min(axis=1), rr.max(axis=1)
                c1, c2 = cc.min(axis=1), cc.max(axis=1)
                rm = rr.sum(axis=1) - r1 - r2
                cm = cc.sum(axis=1) - c1 - c2
                # exactly two distinct rows and two distinct columns
                ok = okc & (r1 != r2) & ((rm == r1) | (rm == r2)) & (c1 != c2) & ((cm == c1) | (cm == c2))
                if not ok.any():
                    continue
                idx = np.arange(len(cand))
                # rectangle sign pattern: (r1,c1),(r2,c2) share the sign σ, the others −σ
                d11 = D[idx, r1 * n + c1]
                d22 = D[idx, r2 * n + c2]
                d12 = D[idx, r1 * n + c2]
                d21 = D[idx, r2 * n + c1]
                sig = np.where(d11 != 0, d11, np.where(d22 != 0, d22, -np.where(d12 != 0, d12, d21)))
                pat = [(r1 * n + c1, sig), (r2 * n + c2, sig), (r1 * n + c2, -sig), (r2 * n + c1, -sig)]
                # the three chosen cells must carry the rectangle's sign
                for t in range(3):
                    pos = cells[:, t]
                    want = np.where((pos == r1 * n + c1) | (pos == r2 * n + c2), sig, -sig)
                    ok &= D[idx, pos] == want
                delta = np.zeros(len(cand), dtype=np.int64)
                left = nzc.copy()
                for pos, sg in pat:
                    nv = Ac[idx, pos] + sg
                    ok &= (nv == 0) | (nv == 1)
                    delta += sg.astype(np.int64) * w[pos]
                    dv = D[idx, pos]
                    left += (dv != sg).astype(np.int64) - (dv != 0)
                ok &= left == 4
                if not ok.any():
                    continue
                mi = st.S.index_of(base + delta)
                good = ok & (mi >= 0)
                best[cand[good]] = np.minimum(best[cand[good]], mi[good])
        found = best < np.iinfo(np.int64).max
        mid[r[found]] = best[found]
        lengths[r[found]] = 2
    far = np.flatnonzero(lengths < 0)
    far_paths = {}
    if len(far):
        adjm = Qu.adjacency()
        for t in far:
            dist = csgraph.shortest_path(adjm, unweighted=True, indices=int(g2[t]), directed=False)
            cur = int(g1[t])
            path = [cur]
            while cur != g2[t]:
                nb = Qu.neighbors(cur)
                cur = int(nb[dist[nb] == dist[cur] - 1].min())
                path.append(cur)
            far_paths[int(t)] = path
            lengths[t] = len(path) - 1
    return _assemble(g1, g2, mid, lengths, far_paths), lengths


def _assemble(g1, g2, mid, lengths, far_paths) -> np.ndarray:
    """Flat node array for paths of length 1, 2 (via ``mid``) or listed in ``far_paths``."""
    lens = lengths + 1
    ptr = np.zeros(len(g1) + 1, dtype=np.int64)
    np.cumsum(lens, out=ptr[1:])
    flat = np.empty(int(ptr[-1]), dtype=np.int64)
    flat[ptr[:-1]] = g1
    flat[ptr[1:] - 1] = g2
    two = lengths == 2
    flat[ptr[:-1][two] + 1] = mid[two]
    for t, path in far_paths.items():
        flat[ptr[t]:ptr[t + 1]] = path
    return flat


def build_flow(n: int, d: int, m: int) -> Flow:
    """Flow of ``Q_u`` paths realising the auxiliary chain; ``kind`` labels the tuple class."""
    st = aux_structure(n, d, m)
    if "flow" in st._cache:
        return st._cache["flow"]
    ptrs, nodes, nums, kinds = [np.zeros(1, dtype=np.int64)], [], [], []
    offset = 0
    for kind in (DIRECT, PERFECT, HARD):
        g1, g2, num = st.aggregated(kind)
        if len(g1) == 0:
            continue
        if kind == HARD:
            flat, lengths = hard_paths(st, g1, g2)
            lens = lengths + 1
        else:
            lens = np.full(len(g1), 2, dtype=np.int64)
            flat = np.empty(2 * len(g1), dtype=np.int64)
            flat[0::2], flat[1::2] = g1, g2
        ptrs.append(offset + np.cumsum(lens))
        offset += int(lens.sum())
        nodes.append(flat)
        nums.append(num)
        kinds.append(np.full(len(g1), kind, dtype=np.int8))
    num = np.concatenate([rq._obj(x) for x in nums]) if any(x.dtype == object for x in nums) else np.concatenate(nums)
    flow = Flow(np.concatenate(ptrs), np.concatenate(nodes), num, 4 * st.weight_den, np.concatenate(kinds))
    st._cache["flow"] = flow
    return flow


# ---------------------------------------------------------------------------
# checks and reports

def beta_normalization(st: AuxStructure, sample: int | None = None, seed: int = 0) -> dict:
    """Exact ``Σ β = 1`` per core edge, plus the symmetry ``β(G1′,G2′)(G1,G2) = β(G2′,G1′)(G2,G1)``.

    Sums are kept as numerators over ``L²``.  For perfect pairs ψ must be a
    bijection, which the property suite checks; here the indicator sum is
    ``|SN(G1′)|/|SN(G1′)|``.
    """
    L = st.L
    size = st.sn.size
    e = np.arange(len(st.ce_src))
    if sample is not None and sample < len(e):
        e = np.sort(np.random.default_rng(seed).choice(e, sample, replace=False))
    s1, s2 = size[st.ce_src[e]], size[st.ce_dst[e]]
    kind = st.ce_kind[e]
    live = (s1 > 0) & (s2 > 0)
    # numerators over L²: perfect pairs contribute |SN1| terms of L²/|SN1|; others |SN1||SN2| terms
    tot = np.where(kind == PERFECT, s1 * (L // np.maximum(s1, 1)) * L,
                   s1 * s2 * (L // np.maximum(s1, 1)) * (L // np.maximum(s2, 1)))
    bad = int(((tot != L * L) & live).sum())
    # symmetry: the reverse edge has the same kind and the swapped sizes
    rev_key = st.ce_dst[e] * np.int64(len(st.M)) + st.ce_src[e]
    keys = st.ce_src * np.int64(len(st.M)) + st.ce_dst
    order = np.argsort(keys)
    pos = order[np.minimum(np.searchsorted(keys[order], rev_key), len(keys) - 1)]
    sym_bad = int(((keys[pos] != rev_key) | (st.ce_kind[pos] != kind)).sum())
    return {"edges_checked": int(len(e)), "normalization_violations": bad, "symmetry_violations": sym_bad,
            "empty_sn_edges": int((~live).sum()), "L": L}


def psi_property_suite(st: AuxStructure) -> dict:
    """Bijection, involution, adjacency and the at-most-one-partner clause on every perfect pair."""
    N = np.int64(len(st.S))
    recs_e, recs_g1, recs_g2 = [], [], []
    n = st.n
    tab = switch_table(n)
    same_fail = 0
    for eid, g1, g2 in st.perfect_tuples():
        recs_e.append(eid.astype(np.int32))
        recs_g1.append(g1.astype(np.int32))
        recs_g2.append(g2.astype(np.int32))
        # does the identical switching apply to the endpoint itself?
        i, i2, j, j2 = tab[st.ce_sw[eid]].T
        a = st.S.mats[g1].reshape(len(g1), -1)
        r = np.arange(len(g1))
        ok = (a[r, i * n + j] == 1) & (a[r, i2 * n + j2] == 1) & (a[r, i * n + j2] == 0) & (a[r, i2 * n + j] == 0)
        same_fail += int((~ok).sum())
    if not recs_e:
        return {"perfect_pairs": 0, "tuples": 0, "invalid": 0, "not_injective": 0, "not_adjacent": 0,
                "size_mismatch": 0, "identical_switching_inapplicable": 0,
                "involution_failures": 0, "uniqueness_failures": 0,
                "fallback_pairs": st._cache.get("fallback_pairs", 0)}
    # int32 storage and early frees keep the n=6 suite within a few GB
    eid = np.concatenate(recs_e).astype(np.int64)
    g1 = np.concatenate(recs_g1)
    g2 = np.concatenate(recs_g2)
    del recs_e, recs_g1, recs_g2
    invalid = int((g2 < 0).sum())
    # injectivity within each pair (with |SN1| = |SN2| this is bijectivity)
    k = eid * N + g2
    k.sort()
    not_inj = int((k[1:] == k[:-1]).sum())
    del k
    size_mismatch = int((st.sn.size[st.ce_src[eid]] != st.sn.size[st.ce_dst[eid]]).sum())
    adj = st.Qu.edge_index(g1, np.maximum(g2, 0)) >= 0
    not_adj = int((~adj & (g2 >= 0)).sum())
    del adj
    # involution: the reverse pair maps g2 back to g1
    keys_e = st.ce_src * np.int64(len(st.M)) + st.ce_dst
    eorder = np.argsort(keys_e)
    rk = st.ce_dst[eid] * np.int64(len(st.M)) + st.ce_src[eid]
    rev = eorder[np.minimum(np.searchsorted(keys_e[eorder], rk), len(keys_e) - 1)]
    fwd_key = eid * N + g1
    fo = np.argsort(fwd_key)
    lookup = rev * N + g2
    pos = fo[np.minimum(np.searchsorted(fwd_key[fo], lookup), len(fwd_key) - 1)]
    inv_fail = int(((fwd_key[pos] != lookup) | (g2[pos] != g1)).sum())
    del rev, fwd_key, fo, lookup, pos
    # uniqueness: for fixed (G1', G1, G2) at most one G2'
    trip_key = (st.ce_src[eid] * N + g1) * N + g2
    trip_key.sort()
    uniq_fail = int(np.count_nonzero(trip_key[1:] == trip_key[:-1]))
    return {"perfect_pairs": int((st.ce_kind == PERFECT).sum()), "tuples": int(len(eid)), "invalid": invalid,
            "not_injective": not_inj, "size_mismatch": size_mismatch, "not_adjacent": not_adj,
            "involution_failures": inv_fail, "uniqueness_failures": uniq_fail,
            "identical_switching_inapplicable": same_fail,
            "fallback_pairs": st._cache.get("fallback_pairs", 0)}


def perfect_census(st: AuxStructure, m: int | None = None) -> dict:
    """Counts of perfect and non-perfect adjacent same-category pairs."""
    same = (st.cat[st.ce_src] == st.cat[st.ce_dst]) & (st.cat[st.ce_src] >= 1)
    out = {}
    for k in range(1, st.m + 1):
        sel = same & (st.cat[st.ce_src] == k)
        out[str(k)] = {"adjacent_pairs": int(sel.sum()),
                       "perfect": int((sel & (st.ce_kind == PERFECT)).sum())}
    return out


def sn_counting(st: AuxStructure) -> dict:
    """Sizes of s-neighbourhoods against ``[(nd)^k/2, (nd)^k]`` and the reverse count bound."""
    nd = st.n * st.d
    out = {}
    for k in range(1, st.m + 1):
        idx = np.flatnonzero(st.cat == k)
        if len(idx) == 0:
            out[str(k)] = {"states": 0}
            continue
        sz = st.sn.size[idx]
        sel = st.cat[st.sn.src] == k
        rev = np.bincount(st.sn.end[sel], minlength=len(st.S))
        bound = nd**k / math.factorial(k) * (st.d - 1) ** (2 * k)
        lo, hi = nd**k / 2, nd**k
        out[str(k)] = {"states": int(len(idx)), "sn_min": int(sz.min()), "sn_max": int(sz.max()),
                       "bracket": [lo, hi], "within_bracket": bool(sz.min() >= lo and sz.max() <= hi),
                       "sn_min_over_ndk": float(sz.min() / nd**k), "sn_max_over_ndk": float(sz.max() / nd**k),
                       "reverse_max": int(rev.max()), "reverse_bound": bound,
                       "reverse_ok": bool(rev.max() <= bound + 1e-9),
                       "duplicates": st.sn.duplicates}
    return out


def congestion_lemma_check(n: int, d: int, m: int, t: float) -> dict:
    """Per-edge loads ``Σ W(P)(1 + (|P|−1)² t) / (π_u Q_u)`` split by tuple class."""
    st = aux_structure(n, d, m)
    flow = build_flow(n, d, m)
    Qu = st.Qu
    pid, a, b = flow.edge_occurrences()
    pos = Qu.edge_index(a, b)
    if (pos < 0).any():
        raise AssertionError("flow path leaves the switch graph")
    w = flow.weights_float() * (1 + (flow.lengths.astype(float) - 1) ** 2 * t)
    mass = Qu.edge_mass
    out = {"n": n, "d": d, "m": m, "t": t, "surrogate": "shortest paths with smallest-index steps"}
    total = np.zeros(Qu.n_edges)
    for kind, name in KIND_NAMES.items():
        sel = flow.kind[pid] == kind
        load = np.bincount(pos[sel], weights=w[pid[sel]], minlength=Qu.n_edges) / mass
        total += load
        out[name] = float(load.max()) if len(load) else 0.0
    out["total"] = float(total.max())
    # the unquartered tuple sum over perfect tuples through each edge
    out["perfect_tuple_ratio"] = 4 * out["perfect"]
    lengths = flow.lengths[flow.kind == HARD]
    out["hard_length_max"] = int(lengths.max()) if len(lengths) else 0
    out["hard_length_hist"] = {str(int(k)): int(v) for k, v in zip(*np.unique(lengths, return_counts=True))}
    return out


def row_mass(chain: FiniteChain) -> np.ndarray:
    return np.bincount(chain.rows, weights=chain.rates, minlength=chain.size)


def row_mass_exact_max(chain: FiniteChain) -> Fraction:
    keys, sums = rq.group_sum(chain.rows, chain.rate_num)
    best = max(int(s) for s in sums) if len(sums) else 0
    return Fraction(best, chain.rate_den)
