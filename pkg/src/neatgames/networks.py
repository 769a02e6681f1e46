"""Atomic networks: validity, completion, node maps, coloured-graph presentation."""
from __future__ import annotations

import itertools
from array import array
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Mapping

from ._kernels import Completer, iter_bits, popcount
from .algebra import CaAtomStructure, StructureError
from .rainbow import ColouredGraph, RainbowStructure, graph_of_key, key_of

NodeMap = Mapping[int, int]


class Network:
    """A total labelling of ``n``-tuples over a finite node set.

    Labels are atom ids for explicit frames and atom keys for rainbow frames.
    """

    __slots__ = ("structure", "nodes", "table", "_pos")

    def __init__(self, structure: CaAtomStructure, nodes, labels):
        self.structure = structure
        self.nodes = tuple(sorted(nodes))
        self._pos = {v: p for p, v in enumerate(self.nodes)}
        n, k = structure.dim, len(self.nodes)
        if isinstance(labels, Mapping):
            table = [None] * (k ** n)
            for x, a in labels.items():
                table[self.rank(x)] = a
            if any(a is None for a in table):
                raise StructureError("network labelling is not total")
            self.table = tuple(table)
        else:
            self.table = tuple(labels)
            if len(self.table) != k ** n:
                raise StructureError("label table has the wrong length")

    def rank(self, x) -> int:
        k = len(self.nodes)
        r = 0
        for v in x:
            r = r * k + self._pos[v]
        return r

    def label(self, x):
        return self.table[self.rank(x)]

    def tuples(self):
        return itertools.product(self.nodes, repeat=self.structure.dim)

    def labels(self) -> dict:
        return {x: self.table[r] for r, x in enumerate(self.tuples())}

    def __eq__(self, other):
        return (isinstance(other, Network) and self.structure is other.structure
                and self.nodes == other.nodes and self.table == other.table)

    def __hash__(self):
        return hash((self.nodes, self.table))

    def __repr__(self):
        return f"<Network nodes={list(self.nodes)}>"


# ---------------------------------------------------------------- frame access
#
# Explicit frames label by atom id, rainbow frames by atom key.  These three
# helpers hide the difference.


def _in_diag(s, a, i: int, j: int) -> bool:
    if isinstance(s, RainbowStructure):
        return s.in_diag_key(a, i, j)
    return bool(s.diag_mask(i, j) >> a & 1)


def _related(s, i: int, a, b) -> bool:
    if isinstance(s, RainbowStructure):
        return s.related_key(i, a, b)
    return bool(s.cyl[i][a] >> b & 1)


def _transp(s, i: int, j: int, a):
    if isinstance(s, RainbowStructure):
        return s.transp_key(i, j, a)
    return s.transp_perm(i, j)[a]


def _has_transp(s) -> bool:
    return isinstance(s, RainbowStructure) or s.transp is not None


def is_valid_network(N: Network, structure=None) -> bool:
    s = N.structure
    if structure is not None and structure is not s:
        raise StructureError("network belongs to a different structure")
    n = s.dim
    if isinstance(s, RainbowStructure):
        if any(not s.is_atom_key(a) for a in set(N.table)):
            return False
    else:
        if any(not isinstance(a, int) or not 0 <= a < s.count for a in N.table):
            return False
    for x in N.tuples():
        a = N.label(x)
        for i, j in itertools.combinations(range(n), 2):
            if _in_diag(s, a, i, j) != (x[i] == x[j]):
                return False
        for i in range(n):
            for v in N.nodes:
                if v == x[i]:
                    continue
                y = x[:i] + (v,) + x[i + 1:]
                if not _related(s, i, a, N.label(y)):
                    return False
        if _has_transp(s):
            for i, j in itertools.combinations(range(n), 2):
                y = list(x)
                y[i], y[j] = y[j], y[i]
                if N.label(tuple(y)) != _transp(s, i, j, a):
                    return False
    return True


def apply_node_map(N: Network, theta: NodeMap) -> Network:
    """``(N theta)(x) = N(theta(x_0), ..., theta(x_{n-1}))`` on ``dom(theta)``."""
    for u, v in theta.items():
        if v not in N._pos:
            raise StructureError(f"node map sends {u} outside the network")
    dom = sorted(theta)
    n = N.structure.dim
    labels = {x: N.label(tuple(theta[u] for u in x)) for x in itertools.product(dom, repeat=n)}
    return Network(N.structure, dom, labels)


# ---------------------------------------------------------------- explicit completion


@lru_cache(maxsize=None)
def tuple_geometry(k: int, n: int):
    """Rank-level adjacency for ``k`` nodes: tuples, equality patterns, neighbours."""
    tuples = list(itertools.product(range(k), repeat=n))
    weights = [k ** (n - 1 - j) for j in range(n)]
    pairs = list(itertools.combinations(range(n), 2))
    pattern = []
    nbrs = []
    swaps = []
    for x in tuples:
        pattern.append(tuple(x[i] == x[j] for i, j in pairs))
        row = []
        for i in range(n):
            base = sum(x[j] * weights[j] for j in range(n) if j != i)
            row.append(tuple(base + v * weights[i] for v in range(k) if v != x[i]))
        nbrs.append(tuple(row))
        sw = []
        for i, j in pairs:
            y = list(x)
            y[i], y[j] = y[j], y[i]
            sw.append(sum(y[c] * weights[c] for c in range(n)))
        swaps.append(tuple(sw))
    return tuples, pattern, nbrs, swaps, pairs


class FrameTables:
    """Per-frame masks used by the completion search."""

    def __init__(self, s: CaAtomStructure):
        self.s = s
        n = s.dim
        self.full = (1 << s.count) - 1
        self.pairs = list(itertools.combinations(range(n), 2))
        self._pat: dict[tuple, int] = {}
        self._layout: dict[int, tuple] = {}
        self.cyl = s.cyl
        if s.transp is not None:
            self.perm = [s.transp_perm(i, j) for i, j in self.pairs]
            self.fixed = [sum(1 << a for a in range(s.count) if p[a] == a) for p in self.perm]
        else:
            self.perm = None

    def pattern_mask(self, pat: tuple) -> int:
        m = self._pat.get(pat)
        if m is None:
            m = self.full
            for (i, j), eq in zip(self.pairs, pat):
                d = self.s.diag_mask(i, j)
                m &= d if eq else ~d
            m &= self.full
            self._pat[pat] = m
        return m


    def layout(self, k: int):
        """Flat arrays for the compiled completion kernel on ``k`` nodes."""
        got = self._layout.get(k)
        if got is None:
            _, pattern, nbrs, swaps, pairs = tuple_geometry(k, self.s.dim)
            count = self.s.count
            starts, axes, ranks = [0], [], []
            for row in nbrs:
                for i, ys in enumerate(row):
                    axes += [i] * len(ys)
                    ranks += ys
                starts.append(len(ranks))
            cyl = [m for row in self.cyl for m in row]
            if self.perm is None:
                npairs, sw, fixed, perm = 0, [0], [0], [0]
            else:
                npairs = len(pairs)
                sw = [y for row in swaps for y in row]
                fixed, perm = self.fixed, [b for p in self.perm for b in p]
            got = (count, array("Q", [self.pattern_mask(p) for p in pattern]),
                   array("i", starts), array("i", axes), array("i", ranks), array("Q", cyl),
                   npairs, array("i", sw), array("Q", fixed), array("i", perm))
            self._layout[k] = got
        return got


_TABLES: dict[int, FrameTables] = {}


def frame_tables(s: CaAtomStructure) -> FrameTables:
    t = _TABLES.get(id(s))
    if t is None or t.s is not s:
        t = FrameTables(s)
        _TABLES[id(s)] = t
    return t


def candidates(ft: FrameTables, geo, table, r: int) -> int:
    _, pattern, nbrs, swaps, _ = geo
    m = ft.pattern_mask(pattern[r])
    cyl = ft.cyl
    for i, row in enumerate(nbrs[r]):
        ci = cyl[i]
        for y in row:
            b = table[y]
            if b is not None:
                m &= ci[b]
                if not m:
                    return 0
    if ft.perm is not None:
        for q, y in enumerate(swaps[r]):
            if y == r:
                m &= ft.fixed[q]
            else:
                b = table[y]
                if b is not None:
                    m &= 1 << ft.perm[q][b]
    return m


def extend_tables(s: CaAtomStructure, k: int, table: list) -> Iterator[tuple]:
    """All valid completions of a partial rank-ordered table on ``k`` nodes.

    Pre-filled entries are assumed mutually consistent only as far as the
    final check goes: every completion yielded is verified entry by entry.
    """
    ft = frame_tables(s)
    if Completer is not None and s.count <= 64:
        run = Completer(ft.layout(k), table)
        if run.consistent():
            while (t := run.next()) is not None:
                yield t
        return
    geo = tuple_geometry(k, s.dim)
    table = list(table)
    for r, a in enumerate(table):
        if a is not None and not candidates(ft, geo, table, r) >> a & 1:
            return
    free = [r for r, a in enumerate(table) if a is None]
    yield from _search(ft, geo, table, free)


def _search(ft, geo, table, free):
    if not free:
        yield tuple(table)
        return
    best, best_mask, best_count = None, 0, 1 << 30
    for r in free:
        m = candidates(ft, geo, table, r)
        c = popcount(m)
        if c < best_count:
            best, best_mask, best_count = r, m, c
            if c <= 1:
                break
    if best_count == 0:
        return
    rest = [r for r in free if r != best]
    for a in iter_bits(best_mask):
        table[best] = a
        yield from _search(ft, geo, table, rest)
    table[best] = None


def complete_network(s: CaAtomStructure, nodes, constraints: Mapping[tuple, object] | None = None
                     ) -> Iterator[Network]:
    """Lazily enumerate valid networks on ``nodes`` extending ``constraints``."""
    nodes = tuple(sorted(nodes))
    constraints = dict(constraints or {})
    if isinstance(s, RainbowStructure):
        yield from _complete_rainbow(s, nodes, constraints)
        return
    k, n = len(nodes), s.dim
    pos = {v: p for p, v in enumerate(nodes)}
    table = [None] * (k ** n)
    for x, a in constraints.items():
        r = 0
        for v in x:
            if v not in pos:
                raise StructureError(f"constraint names unknown node {v}")
            r = r * k + pos[v]
        if table[r] is not None and table[r] != a:
            return
        table[r] = s.atom(a) if isinstance(a, str) else a
    for t in extend_tables(s, k, table):
        yield Network(s, nodes, t)


# ---------------------------------------------------------------- rainbow presentation


def graph_to_network(g: ColouredGraph, s: RainbowStructure) -> Network:
    if g.palette.sig != s.sig:
        raise StructureError("graph colours are not drawn from this signature")
    bad = g.violations()
    if bad:
        raise StructureError("invalid coloured graph: " + "; ".join(bad))
    nodes = range(g.size)
    labels = {x: key_of(g, x) for x in itertools.product(nodes, repeat=s.dim)}
    return Network(s, nodes, labels)


def network_to_graph(N: Network) -> ColouredGraph:
    s = N.structure
    if not isinstance(s, RainbowStructure):
        raise StructureError("only rainbow networks have a coloured-graph presentation")
    pal, n = s.palette, s.dim
    pos = {v: p for p, v in enumerate(N.nodes)}
    g = ColouredGraph(pal, len(N.nodes))
    for x in N.tuples():
        sub, point = graph_of_key(pal, N.label(x))
        for a, b in itertools.combinations(range(n), 2):
            u, v = pos[x[a]], pos[x[b]]
            if u != v:
                g.set_colour(u, v, sub.colour(point[a], point[b]))
        for pts, y in sub.yellows.items():
            back = {point[i]: pos[x[i]] for i in range(n)}
            g.yellows[frozenset(back[p] for p in pts)] = y
    return g


def _complete_rainbow(s: RainbowStructure, nodes, constraints):
    pal, n = s.palette, s.dim
    k = len(nodes)
    pos = {v: p for p, v in enumerate(nodes)}
    g = ColouredGraph(pal, k)
    for x, key in constraints.items():
        sub, point = graph_of_key(pal, key)
        px = [pos[v] for v in x]
        for a, b in itertools.combinations(range(n), 2):
            if (px[a] == px[b]) != (point[a] == point[b]):
                return
            if px[a] != px[b]:
                c = sub.colour(point[a], point[b])
                u, v = px[a], px[b]
                want = c if u < v else pal.conv[c]
                if g.edges.setdefault((min(u, v), max(u, v)), want) != want:
                    return
        back = {}
        for i in range(n):
            back[point[i]] = px[i]
        for pts, y in sub.yellows.items():
            if g.yellows.setdefault(frozenset(back[p] for p in pts), y) != y:
                return
    open_edges = [e for e in itertools.combinations(range(k), 2) if e not in g.edges]
    for cols in itertools.product(range(pal.size), repeat=len(open_edges)):
        h = ColouredGraph(pal, k, dict(g.edges), dict(g.yellows))
        h.edges.update(zip(open_edges, cols))
        faces = [frozenset(f) for f in itertools.combinations(range(k), n - 1)
                 if frozenset(f) not in h.yellows
                 and not any(pal.green[h.colour(a, b)] for a, b in itertools.combinations(f, 2))]
        for ys in itertools.product(range(pal.shades), repeat=len(faces)):
            h2 = ColouredGraph(pal, k, h.edges, dict(h.yellows))
            h2.yellows.update(zip(faces, ys))
            if h2.is_valid():
                net = graph_to_network(h2, s)
                yield Network(s, nodes, net.table)
