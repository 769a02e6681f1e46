"""Bases and bounded hyperbases as greatest fixed points over canonical networks.

A candidate set is grown forward from the networks that realise each atom,
answering every cylindrifier demand, and is then shrunk by elimination: a
network goes once some demand has no surviving answer.  Answers may be
truncated to the first ``width`` completions; a positive result on a
truncated arena is still a basis, a negative one is only final when
nothing was cut.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from ._kernels import canon_table, iter_bits, table_from_shell
from .algebra import CaAtomStructure, StructureError
from .constructions import Inconclusive
from .networks import Network, extend_tables, is_valid_network
from .rainbow import RainbowStructure

WIDTHS = (1, 4, 16, None)


@dataclass
class Basis:
    """Canonical networks (``(k, key)`` pairs) closed under cylindrifier demands."""

    m: int
    structure: CaAtomStructure
    keys: frozenset

    @property
    def networks(self) -> list[Network]:
        n = self.structure.dim
        return [Network(self.structure, range(k), table_from_shell(key, k, n))
                for k, key in sorted(self.keys)]

    def __len__(self):
        return len(self.keys)


@dataclass(frozen=True)
class Hypernetwork:
    """A network with a non-atomic label on every nonempty node set.

    Hyperedges of length other than ``n`` take the label of their node set.
    """

    network: Network
    labels: tuple  # labels[mask] for node-set bitmask ``mask`` (index 0 unused)

    def label(self, xs) -> int:
        mask = 0
        for v in xs:
            mask |= 1 << self.network.nodes.index(v)
        return self.labels[mask]


@dataclass
class Hyperbasis:
    m: int
    alphabet: int
    members: list[Hypernetwork] = field(default_factory=list)


@dataclass
class NoneAtBound:
    """No hyperbasis exists with at most ``lambda_max`` labels."""

    lambda_max: int
    reason: str

    def __bool__(self):
        return False


# ---------------------------------------------------------------- move generation


class _Moves:
    """Cylindrifier demands and their answers on canonical explicit networks."""

    def __init__(self, s: CaAtomStructure, m: int, overwrite: str):
        if overwrite not in ("when-full", "never", "always"):
            raise ValueError(f"unknown overwrite rule {overwrite!r}")
        self.s, self.m, self.n, self.overwrite = s, m, s.dim, overwrite
        self.pinned = [0] * self.n
        for i in range(self.n):
            for j in range(self.n):
                if j != i:
                    self.pinned[i] |= s.diag_mask(i, j)

    def canon(self, k, table):
        return k, canon_table(table, k, self.n)[0]

    def table(self, node):
        k, key = node
        return table_from_shell(key, k, self.n)

    def seeds(self, a) -> list:
        n = self.n
        blocks = []
        for i in range(n):
            same = [blocks[j] for j in range(i) if self.s.diag_mask(j, i) >> a & 1]
            blocks.append(same[0] if same else max(blocks, default=-1) + 1)
        k = max(blocks) + 1
        table = [None] * k ** n
        table[_rank(blocks, k)] = a
        return sorted({self.canon(k, t) for t in extend_tables(self.s, k, table)})

    def demands(self, node):
        return self.demands_on(node[0], self.table(node))

    def demands_on(self, k, t):
        """``(x, i, a)`` with ``N(x) <= c_i a`` and no witness in the table already."""
        n = self.n
        seen = set()
        for x in itertools.product(range(k), repeat=n):
            b = t[_rank(x, k)]
            for i in range(n):
                have = {t[_rank(x[:i] + (z,) + x[i + 1:], k)] for z in range(k)}
                stem = x[:i] + (-1,) + x[i + 1:]
                for a in iter_bits(self.s.cyl[i][b]):
                    if a not in have and (stem, i, a) not in seen:
                        seen.add((stem, i, a))
                        yield x, i, a

    def seeds_on(self, k, t, x, i, a):
        """Partial tables ``(kk, seed, keep)`` putting the witness on a new or rewritten node."""
        if self.pinned[i] >> a & 1:
            return
        n = self.n
        others = {x[j] for j in range(n) if j != i}
        spots = [None] if k < self.m else []
        if self.overwrite == "always" or (self.overwrite == "when-full" and k == self.m):
            spots += [z for z in range(k) if z not in others]
        for z in spots:
            keep = [v for v in range(k) if v != z]
            kk = len(keep) + 1
            pos = {v: q for q, v in enumerate(keep)}
            seed = [None] * kk ** n
            for y in itertools.product(range(len(keep)), repeat=n):
                seed[_rank(y, kk)] = t[_rank([keep[q] for q in y], k)]
            y = [kk - 1 if j == i else pos[v] for j, v in enumerate(x)]
            seed[_rank(y, kk)] = a
            yield kk, seed, keep

    def answers(self, node, x, i, a):
        """Canonical networks meeting the demand with a new or rewritten witness."""
        seen = set()
        for kk, seed, _ in self.seeds_on(node[0], self.table(node), x, i, a):
            for done in extend_tables(self.s, kk, seed):
                c = self.canon(kk, done)
                if c not in seen:
                    seen.add(c)
                    yield c


def _rank(x, k):
    r = 0
    for v in x:
        r = r * k + v
    return r


# ---------------------------------------------------------------- bases


def find_basis(s: CaAtomStructure, m: int, overwrite: str = "when-full",
               budget_ms: int | None = None, schedule: int | None = None):
    """An ``m``-dimensional basis, ``None`` if there is none, or :class:`Inconclusive`.

    ``schedule`` seeds a random elimination order; the fixed point does not
    depend on it.
    """
    if m < s.dim:
        raise StructureError("need m >= dim")
    if isinstance(s, RainbowStructure):
        return _rainbow_basis(s, m, overwrite, budget_ms)
    moves = _Moves(s, m, overwrite)
    for width in WIDTHS:
        arena, seeds, cut = _explore(moves, s, width)
        alive = greatest_fixpoint(arena, schedule)
        if all(any(q in alive for q in qs) for qs in seeds.values()):
            return Basis(m, s, frozenset(alive))
        if not cut:
            return None
    raise AssertionError("the last width is unbounded")


def _explore(moves: _Moves, s, width):
    cut = False
    seeds = {}
    for a in range(s.count):
        qs = moves.seeds(a)
        if width is not None and len(qs) > width:
            qs, cut = qs[:width], True
        seeds[a] = qs
    arena: dict = {}
    todo = [q for qs in seeds.values() for q in qs]
    while todo:
        node = todo.pop()
        if node in arena:
            continue
        rows = []
        for x, i, a in moves.demands(node):
            got = list(itertools.islice(moves.answers(node, x, i, a),
                                        None if width is None else width + 1))
            if width is not None and len(got) > width:
                got, cut = got[:width], True
            rows.append(got)
            todo.extend(got)
        arena[node] = rows
    return arena, seeds, cut


def greatest_fixpoint(arena: dict, schedule: int | None = None) -> set:
    """Largest subset in which every demand keeps an answer.

    With ``schedule`` set, candidates are examined in a shuffled order
    one at a time; otherwise whole rounds are swept.
    """
    alive = set(arena)
    if schedule is None:
        changed = True
        while changed:
            dead = {q for q in alive if any(not any(r in alive for r in row) for row in arena[q])}
            alive -= dead
            changed = bool(dead)
        return alive
    rng = random.Random(schedule)
    changed = True
    while changed:
        changed = False
        order = sorted(alive)
        rng.shuffle(order)
        for q in order:
            if any(not any(r in alive for r in row) for row in arena[q]):
                alive.discard(q)
                changed = True
    return alive


def _rainbow_basis(s, m, overwrite, budget_ms):
    # too many networks to enumerate; a universal win rules a basis out
    from .games import FORALL, GameSpec, solve_game, verify_strategy
    spec = GameSpec("G", m, None, s, overwrite=overwrite, yellows="exact")
    out = solve_game(spec, budget_ms=budget_ms)
    if getattr(out, "winner", None) == FORALL and verify_strategy(spec, out.certificate):
        return None
    return Inconclusive("rainbow frames are only searched for a universal win")


def is_basis(s: CaAtomStructure, basis: Basis, overwrite: str = "when-full") -> bool:
    """Check coverage, validity and the cylindrifier property directly."""
    moves = _Moves(s, basis.m, overwrite)
    keys = set(basis.keys)
    for k, key in keys:
        if k > basis.m or not is_valid_network(Network(s, range(k), moves.table((k, key)))):
            return False
    for a in range(s.count):
        if not any(q in keys for q in moves.seeds(a)):
            return False
    for node in keys:
        for x, i, a in moves.demands(node):
            if not any(q in keys for q in moves.answers(node, x, i, a)):
                return False
    return True


def decide_m_square(s: CaAtomStructure, m: int, overwrite: str = "when-full") -> bool:
    """Whether the complex algebra of a finite frame has a complete ``m``-square representation."""
    out = find_basis(s, m, overwrite)
    if isinstance(out, Inconclusive):
        raise RuntimeError(out.reason)
    return out is not None


def seeds_valid(s: CaAtomStructure) -> bool:
    """Brute force for ``m = n``: every atom starts some valid ``n``-node network."""
    n = s.dim
    for a in range(s.count):
        ok = False
        for k in range(1, n + 1):
            for x in itertools.product(range(k), repeat=n):
                if set(x) != set(range(k)):
                    continue
                for net in _networks_with(s, k, x, a):
                    ok = True
                    break
                if ok:
                    break
            if ok:
                break
        if not ok:
            return False
    return True


def _networks_with(s, k, x, a):
    n = s.dim
    table = [None] * k ** n
    table[_rank(x, k)] = a
    for t in extend_tables(s, k, table):
        yield Network(s, range(k), t)


# ---------------------------------------------------------------- hyperbases


def find_hyperbasis(s: CaAtomStructure, m: int, lambda_max: int,
                    overwrite: str = "when-full", max_nodes_fill: int = 4096):
    """Search hyperbases whose hyperedge labels depend on node sets only.

    Returns a verified :class:`Hyperbasis`, :class:`NoneAtBound` when the
    negative answer is certain (no basis at all, or one label, where the
    restriction is no loss), and :class:`Inconclusive` otherwise.
    """
    basis = find_basis(s, m, overwrite)
    if isinstance(basis, Inconclusive):
        return basis
    if basis is None:
        return NoneAtBound(lambda_max, f"no {m}-dimensional basis, so no hyperbasis")
    for lam in range(1, lambda_max + 1):
        found = _hyper_search(s, m, lam, overwrite, max_nodes_fill)
        if isinstance(found, Inconclusive):
            return found
        if found is not None:
            if not is_hyperbasis(s, found, overwrite):
                raise AssertionError("hyperbasis search produced an unclosed set")
            return found
        if lam == 1 and lambda_max == 1:
            return NoneAtBound(1, "no hyperbasis with a single label")
    return Inconclusive(f"none found with set-determined labels and at most {lambda_max} labels")


class _Hyper:
    """Canonical hypernetworks: brute-force minimum over node orders and label renamings."""

    def __init__(self, s, m, lam, overwrite):
        self.s, self.m, self.lam, self.n = s, m, lam, s.dim
        self.moves = _Moves(s, m, overwrite)

    def canon(self, k, table, labels):
        n = self.n
        best = None
        for order in itertools.permutations(range(k)):
            t = tuple(table[_rank([order[v] for v in y], k)]
                      for y in itertools.product(range(k), repeat=n))
            ls = []
            rename = {}
            for mask in range(1, 1 << k):
                old = 0
                for q in range(k):
                    if mask >> q & 1:
                        old |= 1 << order[q]
                ls.append(rename.setdefault(labels[old], len(rename)))
            cand = (t, tuple(ls))
            if best is None or cand < best:
                best = cand
        return k, best[0], (0,) + best[1]

    def fillings(self, k, fixed: dict):
        """Label tuples over all masks of ``k`` nodes extending ``fixed``."""
        free = [mask for mask in range(1, 1 << k) if mask not in fixed]
        for vals in itertools.product(range(self.lam), repeat=len(free)):
            labels = [0] * (1 << k)
            for mask, v in fixed.items():
                labels[mask] = v
            for mask, v in zip(free, vals):
                labels[mask] = v
            yield labels

    def seeds(self, a):
        out = set()
        for k, key in self.moves.seeds(a):
            t = table_from_shell(key, k, self.n)
            for labels in self.fillings(k, {}):
                out.add(self.canon(k, t, labels))
        return sorted(out)

    def demands(self, h):
        return self.moves.demands_on(h[0], h[1])

    def answers(self, h, x, i, a, cap):
        k, t, labels = h
        seen = set()
        for kk, seed, keep in self.moves.seeds_on(k, t, x, i, a):
            fixed = {}
            for mask in range(1, 1 << (kk - 1)):
                old = 0
                for q in range(kk - 1):
                    if mask >> q & 1:
                        old |= 1 << keep[q]
                fixed[mask] = labels[old]
            for done in extend_tables(self.s, kk, seed):
                for ls in self.fillings(kk, fixed):
                    c = self.canon(kk, done, ls)
                    if c not in seen:
                        seen.add(c)
                        if len(seen) > cap:
                            raise _TooMany
                        yield c

    def amalgams(self, m_h, n_h, x, y):
        """Completions ``L`` with ``L = M`` off ``x`` and ``L = N`` off ``y`` (same node set)."""
        k, tm, lm = m_h
        _, tn, ln = n_h
        n = self.n
        seed = [None] * k ** n
        for r, u in enumerate(itertools.product(range(k), repeat=n)):
            if x not in u:
                seed[r] = tm[r]
            elif y not in u:
                seed[r] = tn[r]
        fixed = {}
        for mask in range(1, 1 << k):
            if not mask >> x & 1:
                fixed[mask] = lm[mask]
            elif not mask >> y & 1:
                fixed[mask] = ln[mask]
        for done in extend_tables(self.s, k, seed):
            for ls in self.fillings(k, fixed):
                yield self.canon(k, done, ls)


class _TooMany(Exception):
    pass


def _hyper_search(s, m, lam, overwrite, cap):
    hy = _Hyper(s, m, lam, overwrite)
    try:
        seeds = {a: hy.seeds(a) for a in range(s.count)}
        arena: dict = {}
        todo = [h for hs in seeds.values() for h in hs]
        while todo:
            h = todo.pop()
            if h in arena:
                continue
            rows = []
            for x, i, a in hy.demands(h):
                got = list(hy.answers(h, x, i, a, cap))
                rows.append(got)
                todo.extend(got)
            arena[h] = rows
    except _TooMany:
        return Inconclusive(f"more than {cap} answers to one demand")
    alive = set(arena)
    while True:
        alive = greatest_fixpoint({h: [[r for r in row] for row in arena[h]] for h in alive})
        dead = {h for h in alive if not _amalgamable(hy, h, alive)}
        if not dead:
            break
        alive -= dead
        arena = {h: arena[h] for h in alive}
    if not all(any(h in alive for h in hs) for hs in seeds.values()):
        return None
    members = [Hypernetwork(Network(s, range(k), t), ls) for k, t, ls in sorted(alive)]
    return Hyperbasis(m, lam, members)


def _amalgamable(hy: _Hyper, h, alive) -> bool:
    """Every partner agreeing with ``h`` off two nodes has an amalgam in ``alive``.

    Only full hypernetworks (``m`` nodes) are constrained; a smaller one can
    still take a fresh node, so its two replacements never compete.
    """
    k = h[0]
    if k < hy.m:
        return True
    for x, y in itertools.permutations(range(k), 2):
        for other in alive:
            if other[0] != k:
                continue
            for order in itertools.permutations(range(k)):
                partner = _relabel(hy, other, order)
                if not _agree_off(hy, h, partner, x, y):
                    continue
                if not any(c in alive for c in hy.amalgams(h, partner, x, y)):
                    return False
    return True


def _relabel(hy, h, order):
    k, t, ls = h
    n = hy.n
    t2 = tuple(t[_rank([order[v] for v in u], k)] for u in itertools.product(range(k), repeat=n))
    ls2 = [0] * (1 << k)
    for mask in range(1, 1 << k):
        old = 0
        for q in range(k):
            if mask >> q & 1:
                old |= 1 << order[q]
        ls2[mask] = ls[old]
    return k, t2, tuple(ls2)


def _agree_off(hy, a, b, x, y) -> bool:
    k = a[0]
    for r, u in enumerate(itertools.product(range(k), repeat=hy.n)):
        if x not in u and y not in u and a[1][r] != b[1][r]:
            return False
    return all(a[2][mask] == b[2][mask] for mask in range(1, 1 << k)
               if not mask >> x & 1 and not mask >> y & 1)


def is_hyperbasis(s: CaAtomStructure, hb: Hyperbasis, overwrite: str = "when-full") -> bool:
    """Coverage, cylindrifier and amalgamation checked against the member list."""
    hy = _Hyper(s, hb.m, hb.alphabet, overwrite)
    members = set()
    for h in hb.members:
        net = h.network
        if len(net.nodes) > hb.m or not is_valid_network(net):
            return False
        members.add(hy.canon(len(net.nodes), net.table, h.labels))
    for a in range(s.count):
        if not any(h in members for h in hy.seeds(a)):
            return False
    for h in members:
        for x, i, a in hy.demands(h):
            if not any(c in members for c in hy.answers(h, x, i, a, 1 << 30)):
                return False
        if not _amalgamable(hy, h, members):
            return False
    return True


def strip_labels(hb: Hyperbasis, s: CaAtomStructure) -> Basis:
    """The networks under a hyperbasis, in canonical form."""
    keys = set()
    for h in hb.members:
        k = len(h.network.nodes)
        keys.add((k, canon_table(h.network.table, k, s.dim)[0]))
    return Basis(hb.m, s, frozenset(keys))
