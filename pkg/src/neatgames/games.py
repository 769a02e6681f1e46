"""Atomic network games, their certificates, and the graph pebble game.

Positions are networks up to node renaming.  A demand is ``(x, i, a, k)``:
the tuple ``x``, the axis ``i``, the wanted atom ``a`` and, in the ``F``
variant, the node ``k`` where the witness must go (``None`` in ``G``).

Responses available to the existential player:

* an existing witness, which leaves the position unchanged;
* a fresh node, while fewer than ``m`` nodes are in play;
* in ``G``, once all ``m`` nodes are used, rewriting some node outside the
  other coordinates of ``x`` (``overwrite="when-full"``, the default).
  ``"never"`` and ``"always"`` give the stricter and looser readings.
"""
from __future__ import annotations

import dataclasses
import itertools
import os
import time
from dataclasses import dataclass, field
from functools import lru_cache

from ._kernels import canon_table, iter_bits, table_from_shell
from .algebra import CaAtomStructure, StructureError
from .constructions import Inconclusive, SimpleGraph
from .networks import Network, extend_tables, tuple_geometry
from .rainbow import (EQ, NOSHADE, ColouredGraph, RainbowStructure, coord_faces, coord_pairs,
                      graph_of_key)

EXISTS, FORALL = "Exists", "Forall"
OMEGA = None


class OutOfBudget(Exception):
    pass


class Budget:
    """Wall-clock cap; ``ms=None`` reads ``NEATGAMES_BUDGET_MS`` (unset: no cap)."""

    def __init__(self, ms: int | None = None):
        if ms is None and os.environ.get("NEATGAMES_BUDGET_MS"):
            ms = int(os.environ["NEATGAMES_BUDGET_MS"])
        self.deadline = None if ms is None else time.monotonic() + ms / 1000
        self._tick = 0

    def check(self):
        self._tick += 1
        if self.deadline is not None and self._tick & 255 == 0 and time.monotonic() > self.deadline:
            raise OutOfBudget("time budget exhausted")


@dataclass(frozen=True)
class GameSpec:
    variant: str
    m: int
    rounds: int | None
    structure: CaAtomStructure
    overwrite: str = "when-full"
    yellows: str = "exact"

    def __post_init__(self):
        if self.variant not in ("G", "F"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.m < self.structure.dim:
            raise ValueError("need at least as many nodes as the dimension")
        if self.rounds is not None and self.rounds < 0:
            raise ValueError("rounds must be a natural number or omega")
        if self.overwrite not in ("when-full", "never", "always"):
            raise ValueError(f"unknown overwrite reading {self.overwrite!r}")
        if self.yellows not in ("exact", "dominant"):
            raise ValueError(f"unknown yellow mode {self.yellows!r}")

    def describe(self) -> dict:
        return {"variant": self.variant, "m": self.m,
                "rounds": "omega" if self.rounds is None else self.rounds,
                "overwrite": self.overwrite, "yellows": self.yellows}


@dataclass(frozen=True)
class Position:
    """A network on nodes ``0..k-1`` in canonical shell-order form."""

    k: int
    key: tuple


@dataclass(frozen=True)
class Demand:
    x: tuple
    i: int
    atom: object
    target: int | None = None


@dataclass
class StrategyCert:
    """Checkable witness for the winner.

    ``Exists``: ``initial`` picks a response to every initial atom; ``safe``
    lists ``(position, rounds left)`` pairs closed under demands.
    ``Forall``: ``atom`` is the opening move and ``forcing`` maps positions
    to ``(demand, rank)``; every response to the demand has smaller rank.
    """

    winner: str
    spec: dict
    positions: list[Position] = field(default_factory=list)
    initial: dict = field(default_factory=dict)
    safe: set = field(default_factory=set)
    atom: object = None
    forcing: dict = field(default_factory=dict)
    moves: dict = field(default_factory=dict)

    def pid(self, p: Position) -> int | None:
        if not hasattr(self, "_index") or len(self._index) != len(self.positions):
            self._index = {q: n for n, q in enumerate(self.positions)}
        return self._index.get(p)


@dataclass
class Outcome:
    winner: str
    certificate: StrategyCert
    stats: dict = field(default_factory=dict)

    def __bool__(self):
        return True


# ---------------------------------------------------------------- explicit frames


@lru_cache(maxsize=None)
def _embed(k_old: int, keep: tuple, n: int):
    """Rank pairs ``(new, old)`` copying tuples over ``keep`` into ``len(keep) + 1`` nodes."""
    k_new = len(keep) + 1
    out = []
    for t in itertools.product(range(len(keep)), repeat=n):
        new = old = 0
        for q in t:
            new = new * k_new + q
            old = old * k_old + keep[q]
        out.append((new, old))
    return tuple(out)


def _g_targets(spec: GameSpec, k: int, others) -> list:
    """Where the existential player may put a witness in ``G``; ``None`` is a fresh node."""
    out = [None] if k < spec.m else []
    if spec.overwrite == "always" or (spec.overwrite == "when-full" and k == spec.m):
        out += [z for z in range(k) if z not in others]
    return out


def _rank(x, k: int) -> int:
    r = 0
    for v in x:
        r = r * k + v
    return r


class ExplicitModel:
    """Move generator for frames given by explicit relation tables."""

    def __init__(self, spec: GameSpec):
        self.spec = spec
        self.s = spec.structure
        self.n = self.s.dim
        self._tables: dict[Position, tuple] = {}

    def canonical(self, k: int, table) -> Position:
        key, _ = canon_table(table, k, self.n)
        return Position(k, key)

    def table(self, p: Position) -> tuple:
        t = self._tables.get(p)
        if t is None:
            t = self._tables[p] = tuple(table_from_shell(p.key, p.k, self.n))
        return t

    def network(self, p: Position) -> Network:
        return Network(self.s, range(p.k), self.table(p))

    def atoms(self):
        return range(self.s.count)

    def initial(self, a) -> set[Position]:
        n, s = self.n, self.s
        blocks: list[int] = []
        for i in range(n):
            for j in range(i):
                if s.diag_mask(j, i) >> a & 1:
                    blocks.append(blocks[j])
                    break
            else:
                blocks.append(max(blocks, default=-1) + 1)
        q = max(blocks) + 1
        table = [None] * q ** n
        table[_rank(blocks, q)] = a
        return {self.canonical(q, t) for t in extend_tables(s, q, table)}

    def demands(self, p: Position, table=None):
        """Demands without an existing witness (those never help the universal player)."""
        n, k, s = self.n, p.k, self.s
        table = table or self.table(p)
        _, _, nbrs, _, _ = tuple_geometry(k, n)
        tuples = tuple_geometry(k, n)[0]
        seen = set()
        for r, x in enumerate(tuples):
            b = table[r]
            for i in range(n):
                stem = x[:i] + (0,) + x[i + 1:]
                if self.spec.variant == "G":
                    have = {b} | {table[y] for y in nbrs[r][i]}
                    for a in iter_bits(s.cyl[i][b]):
                        if a not in have and (stem, i, a) not in seen:
                            seen.add((stem, i, a))
                            yield Demand(stem, i, a)
                    continue
                others = {x[j] for j in range(n) if j != i}
                have = {b} | {table[y] for y in nbrs[r][i]}
                pinned = self._pinned(i)
                for z in range(min(k + 1, self.spec.m)):
                    if z in others:
                        continue
                    there = None
                    if z < k:
                        there = table[_rank(x[:i] + (z,) + x[i + 1:], k)]
                    for a in iter_bits(s.cyl[i][b]):
                        if pinned >> a & 1:
                            # the witness is forced onto another coordinate
                            if a not in have and (stem, i, a) not in seen:
                                seen.add((stem, i, a))
                                yield Demand(stem, i, a)
                        elif a != there and (stem, i, a, z) not in seen:
                            seen.add((stem, i, a, z))
                            yield Demand(stem, i, a, z)

    def _g_targets(self, k: int, others) -> list:
        return _g_targets(self.spec, k, others)

    def _pinned(self, i: int) -> int:
        """Atoms lying in some ``E_ij`` with ``j != i``."""
        out = 0
        for j in range(self.n):
            if j != i:
                out |= self.s.diag_mask(i, j)
        return out

    def is_legal(self, p: Position, d: Demand) -> bool:
        n, k = self.n, p.k
        if len(d.x) != n or not 0 <= d.i < n or any(not 0 <= v < k for v in d.x):
            return False
        if not 0 <= d.atom < self.s.count:
            return False
        b = self.table(p)[_rank(d.x, k)]
        if not self.s.cyl[d.i][b] >> d.atom & 1:
            return False
        if self.spec.variant == "F" and not self._pinned(d.i) >> d.atom & 1:
            return (d.target is not None and 0 <= d.target <= min(k, self.spec.m - 1)
                    and d.target not in {d.x[j] for j in range(n) if j != d.i})
        return d.target is None

    def witnessed(self, p: Position, d: Demand, table=None) -> bool:
        """Whether the demand is already met where it may be met."""
        table = table or self.table(p)
        spots = range(p.k) if d.target is None else [d.target] if d.target < p.k else []
        return any(table[_rank(d.x[:d.i] + (z,) + d.x[d.i + 1:], p.k)] == d.atom for z in spots)

    def _seed(self, p: Position, d: Demand, table, z):
        """Partial table for a witness placed at ``z`` (``None``: a fresh node)."""
        n, k = self.n, p.k
        keep = tuple(v for v in range(k) if v != z)
        k_new = len(keep) + 1
        new_table = [None] * k_new ** n
        for rn, ro in _embed(k, keep, n):
            new_table[rn] = table[ro]
        pos = {v: q for q, v in enumerate(keep)}
        y = [k_new - 1 if j == d.i else pos[v] for j, v in enumerate(d.x)]
        r = _rank(y, k_new)
        if new_table[r] is not None:
            return None
        new_table[r] = d.atom
        return k_new, new_table

    def _targets(self, p: Position, d: Demand) -> list:
        if d.target is not None:
            return [d.target if d.target < p.k else None]
        if self.spec.variant == "G":
            return self._g_targets(p.k, {d.x[j] for j in range(self.n) if j != d.i})
        return []

    def iter_responses(self, p: Position, d: Demand, table=None, budget=None):
        """Lazily yield ``(position, target, order)`` for each new network answering ``d``.

        ``order[q]`` is the node of the completed table placed at ``q`` in
        the canonical form.
        """
        table = table or self.table(p)
        seen = set()
        for z in self._targets(p, d):
            seed = self._seed(p, d, table, z)
            if seed is None:
                continue
            k_new, seed = seed
            for t in extend_tables(self.s, k_new, seed):
                if budget is not None:
                    budget.check()
                key, order = canon_table(t, k_new, self.n)
                q = Position(k_new, key)
                if q not in seen:
                    seen.add(q)
                    yield q, z, order

    def responses(self, p: Position, d: Demand, table=None) -> set[Position]:
        table = table or self.table(p)
        if self.witnessed(p, d, table):
            if d.target is None:
                return {p}
            out = {p}
        else:
            out = set()
        out.update(q for q, _, _ in self.iter_responses(p, d, table))
        return out

    def check_response(self, p: Position, d: Demand, z, order, q: Position, table=None) -> bool:
        """Whether ``q``, read through ``order``, extends ``p`` by a witness at ``z``."""
        n = self.n
        if z not in self._targets(p, d) or sorted(order) != list(range(q.k)):
            return False
        seed = self._seed(p, d, table or self.table(p), z)
        if seed is None or seed[0] != q.k:
            return False
        seed = seed[1]
        tq = self.table(q)
        ranks = [0]
        for _ in range(n):
            ranks = [r * q.k + v for r in ranks for v in order]
        return all(seed[r] is None or seed[r] == b for r, b in zip(ranks, tq))


# ---------------------------------------------------------------- rainbow frames (n = 3)


class RainbowModel:
    """Move generator on coloured graphs for three-dimensional rainbow frames.

    A position is the canonical ``k x k`` table of edge codes
    ``colour * (shades + 1) + shade + 1`` (``-1`` on the diagonal).  The
    universal player's demands are restricted to cone demands; that makes
    the solver one-sided (it can prove a universal win or give up).
    """

    def __init__(self, spec: GameSpec):
        s = spec.structure
        if not isinstance(s, RainbowStructure):
            raise StructureError("rainbow model needs a rainbow structure")
        if s.dim != 3:
            raise StructureError("the coloured-graph game engine handles n = 3")
        self.spec, self.s, self.n = spec, s, 3
        self.pal = s.palette
        self.S1 = self.pal.shades + 1
        self.g1 = self.pal.g[1]
        self.g0_tint = {c: t for t, c in self.pal.g0.items()}
        self._pairs = {pq: e for e, pq in enumerate(coord_pairs(3))}
        self._faces = {f: e for e, f in enumerate(coord_faces(3))}

    # -- encoding
    def encode(self, g) -> tuple:
        k = g.size
        t = [-1] * (k * k)
        for u in range(k):
            for v in range(k):
                if u != v:
                    t[u * k + v] = g.colour(u, v) * self.S1 + g.yellows.get(frozenset((u, v)), NOSHADE) + 1
        return tuple(t)

    def canonical(self, k: int, table) -> Position:
        key, _ = canon_table(table, k, 2)
        return Position(k, key)

    def canonical_with_order(self, k: int, table):
        key, order = canon_table(table, k, 2)
        return Position(k, key), order

    def table(self, p: Position) -> tuple:
        return tuple(table_from_shell(p.key, p.k, 2))

    def graph(self, p: Position):
        t, k = self.table(p), p.k
        g = ColouredGraph(self.pal, k)
        for u, v in itertools.combinations(range(k), 2):
            c = t[u * k + v]
            g.edges[(u, v)] = c // self.S1
            if c % self.S1:
                g.yellows[frozenset((u, v))] = c % self.S1 - 1
        return g

    def network(self, p: Position) -> Network:
        from .networks import graph_to_network
        return graph_to_network(self.graph(p), self.s)

    def key_at(self, t, k, x) -> tuple:
        out = []
        for i, j in coord_pairs(3):
            out.append(EQ if x[i] == x[j] else t[x[i] * k + x[j]] // self.S1)
        for f in coord_faces(3):
            u, v = x[f[0]], x[f[1]]
            out.append(NOSHADE if u == v else t[u * k + v] % self.S1 - 1)
        return tuple(out)

    def initial(self, a) -> set[Position]:
        g, _ = graph_of_key(self.pal, tuple(a))
        if not g.is_valid():
            return set()
        return {self.canonical(g.size, self.encode(g))}

    def is_legal(self, p: Position, d: Demand) -> bool:
        k = p.k
        if len(d.x) != 3 or not 0 <= d.i < 3 or any(not 0 <= v < k for v in d.x):
            return False
        a = tuple(d.atom)
        if not self.s.is_atom_key(a):
            return False
        if not self.s.related_key(d.i, self.key_at(self.table(p), k, d.x), a):
            return False
        pinned = any(a[self._pairs[tuple(sorted((d.i, j)))]] == EQ for j in range(3) if j != d.i)
        if self.spec.variant == "F" and not pinned:
            return (d.target is not None and 0 <= d.target <= min(k, self.spec.m - 1)
                    and d.target not in {d.x[j] for j in range(3) if j != d.i})
        return d.target is None

    def responses(self, p: Position, d: Demand, table=None) -> set[Position]:
        k = p.k
        t = table or self.table(p)
        a = tuple(d.atom)
        i = d.i
        others = [j for j in range(3) if j != i]
        out = set()

        def witness_at(z):
            y = d.x[:i] + (z,) + d.x[i + 1:]
            return self.key_at(t, k, y) == a

        if d.target is None:
            if any(witness_at(z) for z in range(k)):
                return {p}
            targets = []
            if self.spec.variant == "G":
                targets = _g_targets(self.spec, k, {d.x[j] for j in others})
        elif d.target < k:
            if witness_at(d.target):
                out.add(p)
            targets = [d.target]
        else:
            targets = [None]
        # the witness must be a new point unless the atom identifies it with x_j
        if any(a[self._pairs[tuple(sorted((i, j)))]] == EQ for j in others):
            return out
        for z in targets:
            for kk, table in self._extend(t, k, z, d.x, i, a):
                out.add(self.canonical(kk, table))
        return out

    def _colour_from(self, a, j, i):
        """Colour of ``a`` from coordinate ``j`` to coordinate ``i``."""
        if j < i:
            return a[self._pairs[(j, i)]]
        return self.pal.conv[a[self._pairs[(i, j)]]]

    def _extend(self, t, k, drop, x, i, a):
        """Tables with a new point ``w`` such that ``x[i/w]`` has key ``a``."""
        pal, S1 = self.pal, self.S1
        keep = [v for v in range(k) if v != drop]
        pos = {v: q for q, v in enumerate(keep)}
        kk = len(keep) + 1
        w = kk - 1
        col = [[-1] * kk for _ in range(kk)]
        yel = [[NOSHADE] * kk for _ in range(kk)]
        for u in keep:
            for v in keep:
                if u != v:
                    c = t[u * k + v]
                    col[pos[u]][pos[v]] = c // S1
                    yel[pos[u]][pos[v]] = c % S1 - 1
        fixed = {}
        for j in range(3):
            if j == i:
                continue
            u = pos[x[j]]
            c = self._colour_from(a, j, i)
            if fixed.setdefault(u, c) != c:
                return
        fixed_yel = {}
        for f, e in self._faces.items():
            if i in f:
                j = f[0] if f[1] == i else f[1]
                fixed_yel[pos[x[j]]] = a[3 + e]
        free = [u for u in range(w) if u not in fixed]
        order = sorted(fixed) + free
        tri = pal.tri

        def assign(idx):
            if idx == len(order):
                yield True
                return
            u = order[idx]
            options = [fixed[u]] if u in fixed else range(pal.size)
            for c in options:
                ok = True
                for v in order[:idx]:
                    # triangle u, v, w: u->v, v->w, u->w
                    if not tri[col[u][v]][col[v][w]][c]:
                        ok = False
                        break
                if not ok:
                    continue
                col[u][w], col[w][u] = c, pal.conv[c]
                yield from assign(idx + 1)
            col[u][w] = col[w][u] = -1

        g1, g0t = self.g1, self.g0_tint
        tint_pos = pal.tint_pos
        green = pal.green
        full = pal.full_shade
        for _ in assign(0):
            # cones with apex w need yellows already present on their bases
            bad = False
            for u in range(w):
                tu = g0t.get(col[u][w])
                if tu is None:
                    continue
                for v in range(w):
                    if v != u and col[v][w] == g1 and not green[col[u][v]]:
                        if not yel[u][v] >> tint_pos[tu] & 1:
                            bad = True
                            break
                if bad:
                    break
            if bad:
                continue
            faces, choices = [], []
            for u in range(w):
                if green[col[u][w]]:
                    if u in fixed_yel and fixed_yel[u] != NOSHADE:
                        bad = True
                    continue
                need = 0
                for v in range(w):
                    if v == u:
                        continue
                    tv = g0t.get(col[u][v])
                    if tv is not None and col[w][v] == g1:
                        need |= 1 << tint_pos[tv]
                    tv = g0t.get(col[w][v])
                    if tv is not None and col[u][v] == g1:
                        need |= 1 << tint_pos[tv]
                if u in fixed_yel:
                    y = fixed_yel[u]
                    if y == NOSHADE or y & need != need:
                        bad = True
                        break
                    opts = [y]
                elif self.spec.yellows == "dominant":
                    opts = [full]
                else:
                    opts = [y for y in range(pal.shades) if y & need == need]
                faces.append(u)
                choices.append(opts)
            if bad:
                continue
            for ys in itertools.product(*choices):
                for u, y in zip(faces, ys):
                    yel[u][w] = yel[w][u] = y
                table = [-1] * (kk * kk)
                for u in range(kk):
                    for v in range(kk):
                        if u != v:
                            table[u * kk + v] = col[u][v] * S1 + yel[u][v] + 1
                yield kk, table
            for u in faces:
                yel[u][w] = yel[w][u] = NOSHADE

    # -- the universal player's candidate moves
    def cone_atom(self, base_colour: int, shade: int, tint: int) -> tuple:
        """Key of the cone atom on ``(d0, d1, apex)``."""
        return (base_colour, self.pal.g0[tint], self.g1, shade, NOSHADE, NOSHADE)

    def candidate_atoms(self):
        pal = self.pal
        tints = sorted(pal.sig.tints, reverse=pal.sig.order_rule)
        return [self.cone_atom(pal.w[0], pal.full_shade, t) for t in tints]

    def candidate_demands(self, p: Position, table=None):
        """Cone demands on faces that already carry cones, new tints first."""
        t = table or self.table(p)
        k, S1 = p.k, self.S1
        col = lambda u, v: t[u * k + v] // S1
        yel = lambda u, v: t[u * k + v] % S1 - 1
        pal = self.pal
        bases = []
        for d0, d1 in itertools.permutations(range(k), 2):
            if pal.green[col(d0, d1)]:
                continue
            tints = {self.g0_tint[col(d0, z)] for z in range(k)
                     if z not in (d0, d1) and col(d0, z) in self.g0_tint and col(d1, z) == self.g1}
            bases.append((len(tints), d0, d1, tints))
        if not bases:
            return
        best = max(b[0] for b in bases)
        out = []
        for count, d0, d1, tints in bases:
            if count != best:
                continue
            shade = yel(d0, d1)
            avail = [u for u in pal.sig.tints if shade >> pal.tint_pos[u] & 1 and u not in tints]
            if pal.sig.order_rule and tints:
                low = min(tints)
                avail.sort(key=lambda u: (u > low, -u))
            for u in avail:
                x = (d0, d1, d0)
                atom = self.cone_atom(col(d0, d1), shade, u)
                target = None if self.spec.variant == "G" else min(k, self.spec.m - 1)
                if target is not None and target in (d0, d1):
                    continue
                out.append(Demand(x, 2, atom, target))
        yield from out


def make_model(spec: GameSpec):
    if isinstance(spec.structure, RainbowStructure):
        return RainbowModel(spec)
    return ExplicitModel(spec)


# ---------------------------------------------------------------- solving


def solve_game(spec: GameSpec, budget_ms: int | None = None):
    """Winner of ``spec`` with a certificate, or :class:`Inconclusive`."""
    budget = Budget(budget_ms)
    try:
        if isinstance(spec.structure, RainbowStructure):
            return _solve_rainbow(spec, budget)
        if spec.rounds is None:
            return _solve_omega(spec, budget)
        return _solve_rounds(spec, budget)
    except OutOfBudget as e:
        return Inconclusive(str(e))


def _solve_omega(spec: GameSpec, budget: Budget) -> Outcome:
    """Greatest fixed point of the existential player's safe set, explored on demand.

    Each expanded position keeps one current answer per open demand.  When
    an answer turns out losing the next one is drawn from a lazy stream of
    responses, so the full response set is only materialised for positions
    the universal player actually wins.
    """
    model = ExplicitModel(spec)
    ids: dict[Position, int] = {}
    positions: list[Position] = []

    def pid(p):
        q = ids.get(p)
        if q is None:
            q = ids[p] = len(positions)
            positions.append(p)
        return q

    bad: dict[int, tuple[Demand, int]] = {}
    slots: dict[int, list[_Slot]] = {}
    users: dict[int, list[tuple[int, _Slot]]] = {}
    queued: set[int] = set()
    queue: list[int] = []

    def advance(q, slot) -> bool:
        for x, z, order in slot.gen:
            r = pid(x)
            if r not in bad:
                slot.choice = (r, z, order)
                users.setdefault(r, []).append((q, slot))
                if r not in queued:
                    queued.add(r)
                    queue.append(r)
                return True
        return False

    def fail(q, d):
        stack = [(q, d)]
        while stack:
            q, d = stack.pop()
            if q in bad:
                continue
            bad[q] = (d, len(bad))
            for u, slot in users.pop(q, ()):
                if u not in bad and slot.choice[0] == q and not advance(u, slot):
                    stack.append((u, slot.demand))

    def expand(q):
        p = positions[q]
        t = model.table(p)
        slots[q] = []
        for d in model.demands(p, t):
            budget.check()
            if q in bad:
                return
            slot = _Slot(d, model.iter_responses(p, d, t, budget))
            if not advance(q, slot):
                fail(q, d)
                return
            slots[q].append(slot)

    inits = {a: [pid(p) for p in sorted(model.initial(a), key=lambda p: p.key)]
             for a in model.atoms()}
    chosen: dict = {}
    lost = None
    while lost is None:
        for a, qs in inits.items():
            q = next((q for q in qs if q not in bad), None)
            if q is None:
                lost = a
                break
            chosen[a] = q
            if q not in queued:
                queued.add(q)
                queue.append(q)
        else:
            if not queue:
                break
            q = queue.pop()
            if q not in bad and q not in slots:
                expand(q)
    stats = {"positions": len(positions), "expanded": len(slots), "losing": len(bad)}
    if lost is None:
        cert = StrategyCert(EXISTS, spec.describe(), positions, initial=dict(chosen))
        todo = list(chosen.values())
        while todo:
            q = todo.pop()
            if (q, None) in cert.safe:
                continue
            cert.safe.add((q, None))
            cert.moves[(q, None)] = [(s.demand,) + s.choice for s in slots[q]]
            todo.extend(s.choice[0] for s in slots[q])
        return Outcome(EXISTS, _compact(cert), stats)
    cert = StrategyCert(FORALL, spec.describe(), positions, atom=lost)
    todo = list(inits[lost])
    while todo:
        q = todo.pop()
        if q in cert.forcing:
            continue
        d, order = bad[q]
        cert.forcing[q] = (d, order)
        todo.extend(pid(r) for r in model.responses(positions[q], d))
    return Outcome(FORALL, _compact(cert), stats)


class _Slot:
    """An open demand at an expanded position and the current answer to it."""

    __slots__ = ("demand", "gen", "choice")

    def __init__(self, demand, gen):
        self.demand = demand
        self.gen = gen
        self.choice = None


def _compact(cert: StrategyCert) -> StrategyCert:
    used = {q for q, _ in cert.safe} | set(cert.forcing) | set(cert.initial.values())
    for moves in cert.moves.values():
        used.update(m[1] for m in moves)
    used = sorted(used)
    new = {q: e for e, q in enumerate(used)}
    out = StrategyCert(cert.winner, cert.spec, [cert.positions[q] for q in used],
                       atom=cert.atom)
    out.initial = {a: new[q] for a, q in cert.initial.items()}
    out.safe = {(new[q], r) for q, r in cert.safe}
    out.forcing = {new[q]: v for q, v in cert.forcing.items()}
    out.moves = {(new[q], r): [(d, new[x], z, order) for d, x, z, order in ms]
                 for (q, r), ms in cert.moves.items()}
    return out


def _solve_rounds(spec: GameSpec, budget: Budget) -> Outcome:
    # a safe set for the unbounded game serves every finite horizon
    omega = _solve_omega(dataclasses.replace(spec, rounds=None), budget)
    if omega.winner == EXISTS:
        c = omega.certificate
        cert = StrategyCert(EXISTS, spec.describe(), c.positions, initial=c.initial)
        for q, _ in c.safe:
            for r in range(spec.rounds + 1):
                cert.safe.add((q, r))
                if r:
                    cert.moves[(q, r)] = c.moves[(q, None)]
        return Outcome(EXISTS, cert, dict(omega.stats, via="omega"))
    model = ExplicitModel(spec)
    ids: dict[Position, int] = {}
    positions: list[Position] = []

    def pid(p):
        q = ids.get(p)
        if q is None:
            q = ids[p] = len(positions)
            positions.append(p)
        return q

    survives: dict[int, tuple[int, list]] = {}  # most rounds survived, with the answers
    loses: dict[int, tuple[int, Demand]] = {}  # fewest rounds lost, with the demand

    def forall_wins(q, r) -> bool:
        if r == 0 or survives.get(q, (-1,))[0] >= r:
            return False
        if loses.get(q, (r + 1,))[0] <= r:
            return True
        p = positions[q]
        t = model.table(p)
        answers = []
        for d in model.demands(p, t):
            budget.check()
            if model.witnessed(p, d, t):
                continue
            got = None
            for x, z, order in model.iter_responses(p, d, t, budget):
                if not forall_wins(pid(x), r - 1):
                    got = (d, ids[x], z, order)
                    break
            if got is None:
                loses[q] = (r, d)
                return True
            answers.append(got)
        survives[q] = (r, answers)
        return False

    k = spec.rounds
    inits = {a: [pid(p) for p in sorted(model.initial(a), key=lambda p: p.key)]
             for a in model.atoms()}
    lost = next((a for a, qs in inits.items() if all(forall_wins(q, k) for q in qs)), None)
    stats = {"positions": len(positions), "surviving": len(survives), "losing": len(loses)}
    if lost is None:
        cert = StrategyCert(EXISTS, spec.describe(), positions)
        todo = []
        for a, qs in inits.items():
            q = next(q for q in qs if not forall_wins(q, k))
            cert.initial[a] = q
            todo.append((q, k))
        while todo:
            q, r = todo.pop()
            if (q, r) in cert.safe:
                continue
            cert.safe.add((q, r))
            if r == 0:
                continue
            answers = survives[q][1]
            cert.moves[(q, r)] = answers
            todo.extend((x, r - 1) for _, x, _, _ in answers)
        return Outcome(EXISTS, _compact(cert), stats)
    cert = StrategyCert(FORALL, spec.describe(), positions, atom=lost)
    todo = list(inits[lost])
    while todo:
        q = todo.pop()
        if q in cert.forcing:
            continue
        r, d = loses[q]
        cert.forcing[q] = (d, r)
        for x in model.responses(positions[q], d):
            forall_wins(pid(x), r - 1)
            todo.append(ids[x])
    return Outcome(FORALL, _compact(cert), stats)


def _solve_rainbow(spec: GameSpec, budget: Budget):
    model = RainbowModel(spec)
    memo: dict[Position, int] = {}  # position -> least depth proven winning
    fail: dict[Position, int] = {}  # position -> greatest depth proven not winning here
    chosen: dict[Position, tuple[Demand, list[Position]]] = {}
    max_depth = spec.rounds if spec.rounds is not None else 2 * spec.m

    def wins(p, depth):
        if depth == 0:
            return False
        if memo.get(p, depth + 1) <= depth:
            return True
        if fail.get(p, -1) >= depth:
            return False
        t = model.table(p)
        for d in model.candidate_demands(p, t):
            budget.check()
            rs = model.responses(p, d, t)
            if p in rs:
                continue
            rs = sorted(rs, key=lambda r: r.key)
            if all(wins(q, depth - 1) for q in rs):
                memo[p] = depth
                chosen[p] = (d, rs)
                return True
        fail[p] = depth
        return False

    for depth in range(1, max_depth + 1):
        for a in model.candidate_atoms():
            inits = sorted(model.initial(a), key=lambda p: p.key)
            if inits and all(wins(p, depth) for p in inits):
                return Outcome(FORALL, _rainbow_cert(spec, a, inits, chosen, memo),
                               {"depth": depth, "proved": len(memo)})
    return Inconclusive(f"no universal win found with cone demands up to depth {max_depth}")


def _rainbow_cert(spec, atom, inits, chosen, memo) -> StrategyCert:
    cert = StrategyCert(FORALL, spec.describe(), [], atom=list(atom))
    ids = {}
    todo = list(inits)
    while todo:
        p = todo.pop()
        if p in ids:
            continue
        ids[p] = len(cert.positions)
        cert.positions.append(p)
        d, rs = chosen[p]
        cert.forcing[ids[p]] = (d, memo[p])
        todo.extend(rs)
    return cert


# ---------------------------------------------------------------- verification


def verify_strategy(spec: GameSpec, cert: StrategyCert) -> bool:
    """Replay the certificate against the move generator."""
    model = make_model(spec)
    if cert.spec.get("variant") != spec.variant or cert.spec.get("m") != spec.m:
        return False
    rounds = spec.rounds
    index = {p: q for q, p in enumerate(cert.positions)}
    if cert.winner == EXISTS:
        if isinstance(model, RainbowModel):
            return False
        safe = cert.safe
        by_pos: dict[int, set] = {}
        for q, r in safe:
            by_pos.setdefault(q, set()).add(r)
        for q in by_pos:
            if not 0 <= q < len(cert.positions):
                return False
        for a in model.atoms():
            q = cert.initial.get(a)
            if q is None or (q, rounds) not in safe:
                return False
            if cert.positions[q] not in model.initial(a):
                return False
        valid = {q: _valid_position(model, cert.positions[q]) for q in by_pos}
        if not all(valid.values()):
            return False
        checked = set()
        for q, r in safe:
            if r == 0:
                continue
            p = cert.positions[q]
            t = model.table(p)
            nxt = None if r is None else r - 1
            answers = {m[0]: tuple(m[1:]) for m in cert.moves.get((q, r), ())}
            for d in model.demands(p, t):
                if d in answers:
                    x, z, order = answers[d]
                    if (x, nxt) not in safe or not 0 <= x < len(cert.positions):
                        return False
                    if (q, d, x, z, tuple(order)) in checked:
                        continue
                    if not model.check_response(p, d, z, tuple(order), cert.positions[x], t):
                        return False
                    checked.add((q, d, x, z, tuple(order)))
                elif not model.witnessed(p, d, t):
                    return False
        return True
    if cert.winner != FORALL or cert.atom is None:
        return False
    atom = tuple(cert.atom) if isinstance(cert.atom, list) else cert.atom
    inits = model.initial(atom)
    ranks = {q: rank for q, (_, rank) in cert.forcing.items()}
    for p in inits:
        q = index.get(p)
        if q is None or q not in ranks:
            return False
        if rounds is not None and ranks[q] > rounds:
            return False
    for q, (d, rank) in cert.forcing.items():
        p = cert.positions[q]
        if rounds is not None and rank < 1:
            return False
        if not model.is_legal(p, d):
            return False
        for x in model.responses(p, d):
            r = index.get(x)
            if r is None or r not in ranks or ranks[r] >= rank:
                return False
    return True


def _valid_position(model, p: Position) -> bool:
    from .networks import is_valid_network
    try:
        return is_valid_network(model.network(p))
    except StructureError:
        return False


# ---------------------------------------------------------------- helpers


def canonicalize_position(net: Network) -> tuple[Position, dict]:
    """Canonical form of a network and the node relabelling ``old -> new``."""
    s, k = net.structure, len(net.nodes)
    if isinstance(s, RainbowStructure):
        from .networks import network_to_graph
        model = RainbowModel(GameSpec("G", max(k, 3), None, s))
        p, order = model.canonical_with_order(k, model.encode(network_to_graph(net)))
    else:
        key, order = canon_table(net.table, k, s.dim)
        p = Position(k, key)
    return p, {net.nodes[old]: new for new, old in enumerate(order)}


def forall_strategy_cert(spec: GameSpec, atom, strategy, max_positions: int = 10 ** 6) -> StrategyCert:
    """Certificate for a hand-written universal strategy.

    ``strategy(model, position, table)`` returns a :class:`Demand` on the
    canonical labelling of ``position``; the builder replays it against
    every existential response and ranks positions by height.
    """
    model = make_model(spec)
    cert = StrategyCert(FORALL, spec.describe(), [],
                        atom=list(atom) if isinstance(atom, tuple) else atom)
    ids: dict[Position, int] = {}
    height: dict[int, int] = {}
    children: dict[int, list[int]] = {}
    moves: dict[int, Demand] = {}

    def visit(p: Position) -> int:
        if p in ids:
            return ids[p]
        if len(ids) >= max_positions:
            raise OutOfBudget("strategy tree too large")
        q = ids[p] = len(cert.positions)
        cert.positions.append(p)
        t = model.table(p)
        d = strategy(model, p, t)
        moves[q] = d
        kids = [visit(x) for x in sorted(model.responses(p, d, t), key=lambda r: r.key)]
        children[q] = kids
        height[q] = 1 + max((height.get(c, 10 ** 9) for c in kids), default=0)
        return q

    for p in sorted(model.initial(atom), key=lambda r: r.key):
        visit(p)
    cert.forcing = {q: (moves[q], height[q]) for q in moves}
    return cert


def cone_face_strategy(model: RainbowModel, p: Position, t) -> Demand:
    """Demand a cone of the least unused tint on the opening cone's base.

    The base is the ordered pair of points carrying the most cones (ties
    break by point order), so it stays fixed as apexes are added.
    """
    k, S1, pal = p.k, model.S1, model.pal
    best = None
    for d0, d1 in itertools.permutations(range(k), 2):
        tints = set()
        for z in range(k):
            if z in (d0, d1):
                continue
            c0, c1 = t[d0 * k + z] // S1, t[d1 * k + z] // S1
            if c1 == model.g1 and c0 in model.g0_tint:
                tints.add(model.g0_tint[c0])
        if best is None or len(tints) > len(best[2]):
            best = (d0, d1, tints)
    d0, d1, used = best
    shade = t[d0 * k + d1] % S1 - 1
    tint = min(u for u in pal.sig.tints if u not in used)
    atom = model.cone_atom(t[d0 * k + d1] // S1, shade, tint)
    target = None if model.spec.variant == "G" else k
    return Demand((d0, d1, d0), 2, atom, target)


def forced_red_indices(spec: GameSpec, cert: StrategyCert) -> list[int]:
    """Red indices of the successive new points along one forcing path.

    Follows the universal certificate from the opening position, always
    taking the response that stays in play longest.  A new point's index
    is the first subscript of the reds leaving it; the first red met also
    contributes the index of the older point at its other end.
    """
    model = RainbowModel(spec)
    index = {p: q for q, p in enumerate(cert.positions)}
    atom = tuple(cert.atom)
    p = max(model.initial(atom), key=lambda x: cert.forcing[index[x]][1])
    out = []
    while index.get(p) in cert.forcing:
        d, _ = cert.forcing[index[p]]
        t = model.table(p)
        best = None
        targets = [None] if d.target is None or d.target >= p.k else [d.target]
        for z in targets:
            for kk, table in model._extend(t, p.k, z, d.x, d.i, tuple(d.atom)):
                q = model.canonical(kk, table)
                rank = cert.forcing.get(index.get(q), (None, -1))[1]
                if best is None or rank > best[0]:
                    best = (rank, kk, table, q)
        if best is None:
            break
        _, kk, table, p = best
        w = kk - 1
        codes = [model.pal.codes[table[w * kk + u] // model.S1] for u in range(w)]
        codes = [c for c in codes if c[0] == "r"]
        if not codes:
            continue
        if not out:
            # the first red also fixes the index of the point it reaches
            out.append(max(c[2] for c in codes))
        out.append(codes[0][1])
    return out


# ---------------------------------------------------------------- graph pebble game


def ef_pebble_game(g1: SimpleGraph, g2: SimpleGraph, pebbles: int, rounds: int) -> str:
    """Winner of the forth-only pebble game: universal plays in ``g1``."""
    v1, v2 = list(g1.vertices), list(g2.vertices)

    @lru_cache(maxsize=None)
    def exists_survives(pairs: frozenset, r: int) -> bool:
        if r == 0:
            return True
        dropping = [None] if len(pairs) < pebbles else []
        dropping += sorted(pairs)
        for drop in dropping:
            rest = pairs - {drop} if drop is not None else pairs
            for v in v1:
                if not any(_extends(g1, g2, rest, v, w) and exists_survives(rest | {(v, w)}, r - 1)
                           for w in v2):
                    return False
        return True

    return EXISTS if exists_survives(frozenset(), rounds) else FORALL


def _extends(g1, g2, pairs, v, w) -> bool:
    for a, b in pairs:
        if (a == v) != (b == w):
            return False
        if a != v and g1.adjacent(a, v) != g2.adjacent(b, w):
            return False
    return True
