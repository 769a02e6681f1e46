"""Generators for the finite structures: full set frames, rainbows, Monk and blur algebras."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from . import _kernels
from ._kernels import iter_bits
from .algebra import (CaAtomStructure, RaAtomStructure, SetOfAtoms, StructureError,
                      validate_ca_frame)
from .rainbow import (EQ, NOSHADE, ColouredGraph, Palette, RainbowSignature, RainbowStructure,
                      coord_pairs, graph_of_key, key_of,
                      count_atoms, enumerate_atom_keys)


class Inconclusive:
    """A budget ran out before an exact answer was found."""

    def __init__(self, reason: str):
        self.reason = reason

    def __bool__(self):
        return False

    def __repr__(self):
        return f"Inconclusive({self.reason!r})"


# ---------------------------------------------------------------- graphs


@dataclass(frozen=True)
class SimpleGraph:
    vertices: tuple
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        vs = set(self.vertices)
        es = frozenset(frozenset(e) for e in self.edges)
        for e in es:
            if len(e) != 2:
                raise StructureError("graphs have no self-loops")
            if not e <= vs:
                raise StructureError(f"edge {sorted(e)} leaves the vertex set")
        object.__setattr__(self, "edges", es)

    def adjacent(self, u, v) -> bool:
        return frozenset((u, v)) in self.edges

    def neighbours(self, u) -> set:
        return {v for e in self.edges if u in e for v in e if v != u}

    @classmethod
    def complete(cls, k: int) -> SimpleGraph:
        return cls(tuple(range(k)), frozenset(frozenset(e) for e in itertools.combinations(range(k), 2)))

    @classmethod
    def cycle(cls, k: int) -> SimpleGraph:
        return cls(tuple(range(k)), frozenset(frozenset((i, (i + 1) % k)) for i in range(k)))

    @classmethod
    def single_edge(cls) -> SimpleGraph:
        return cls(("u", "v"), frozenset({frozenset(("u", "v"))}))

    def disjoint_union(self, other: SimpleGraph) -> SimpleGraph:
        left = {v: (0, v) for v in self.vertices}
        right = {v: (1, v) for v in other.vertices}
        es = {frozenset(left[v] for v in e) for e in self.edges}
        es |= {frozenset(right[v] for v in e) for e in other.edges}
        return SimpleGraph(tuple(left.values()) + tuple(right.values()), frozenset(es))

    def relabelled(self) -> SimpleGraph:
        idx = {v: i for i, v in enumerate(self.vertices)}
        return SimpleGraph(tuple(range(len(idx))), frozenset(frozenset(idx[v] for v in e) for e in self.edges))


def chromatic_number(g: SimpleGraph, budget: int = 2_000_000):
    """Exact chromatic number by DSATUR branch and bound with a clique bound."""
    vs = list(g.vertices)
    if not vs:
        return 0
    idx = {v: i for i, v in enumerate(vs)}
    adj = [0] * len(vs)
    for e in g.edges:
        a, b = (idx[v] for v in e)
        adj[a] |= 1 << b
        adj[b] |= 1 << a
    lower = _greedy_clique(adj)
    best = _dsatur_greedy(adj)
    nodes = 0

    def colourable(k: int) -> bool | None:
        nonlocal nodes
        colour = [-1] * len(vs)

        def rec(done: int) -> bool | None:
            nonlocal nodes
            nodes += 1
            if nodes > budget:
                return None
            if done == len(vs):
                return True
            # most saturated uncoloured vertex
            pick, sat_best = -1, -1
            for v in range(len(vs)):
                if colour[v] < 0:
                    sat = len({colour[u] for u in iter_bits(adj[v]) if colour[u] >= 0})
                    if sat > sat_best:
                        pick, sat_best = v, sat
            used = {colour[u] for u in iter_bits(adj[pick])}
            top = max(colour) + 1
            for c in range(min(k, top + 1)):
                if c not in used:
                    colour[pick] = c
                    r = rec(done + 1)
                    if r is not False:
                        return r
            colour[pick] = -1
            return False

        return rec(0)

    for k in range(lower, best):
        r = colourable(k)
        if r is None:
            return Inconclusive(f"search exceeded {budget} nodes")
        if r:
            return k
    return best


def _greedy_clique(adj: list[int]) -> int:
    best = 1 if adj else 0
    for start in range(len(adj)):
        cand, size = adj[start], 1
        while cand:
            v = max(iter_bits(cand), key=lambda u: bin(adj[u] & cand).count("1"))
            size += 1
            cand &= adj[v]
        best = max(best, size)
    return best


def _dsatur_greedy(adj: list[int]) -> int:
    colour = [-1] * len(adj)
    for _ in range(len(adj)):
        pick = max((v for v in range(len(adj)) if colour[v] < 0),
                   key=lambda v: (len({colour[u] for u in iter_bits(adj[v]) if colour[u] >= 0}),
                                  bin(adj[v]).count("1")))
        used = {colour[u] for u in iter_bits(adj[pick])}
        colour[pick] = next(c for c in range(len(adj)) if c not in used)
    return max(colour) + 1


# ---------------------------------------------------------------- full set frames


def build_full_set_structure(n: int, b: int) -> CaAtomStructure:
    """The frame of ``n``-tuples over ``b`` with agreement, equality and swaps."""
    if b < 1:
        raise StructureError("base size must be at least 1")
    atoms = list(itertools.product(range(b), repeat=n))
    index = {u: a for a, u in enumerate(atoms)}
    cyl = []
    for i in range(n):
        rows = []
        for u in atoms:
            rows.append(sum(1 << index[u[:i] + (v,) + u[i + 1:]] for v in range(b)))
        cyl.append(rows)
    diag = {(i, j): sum(1 << a for a, u in enumerate(atoms) if u[i] == u[j])
            for i, j in itertools.combinations(range(n), 2)}
    transp = {}
    for i, j in itertools.combinations(range(n), 2):
        perm = []
        for u in atoms:
            v = list(u)
            v[i], v[j] = v[j], v[i]
            perm.append(index[tuple(v)])
        transp[(i, j)] = perm
    # s_i^j {u} = {v : v with v_i written at j equals u}
    repl = {}
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            rows = [0] * len(atoms)
            for v in atoms:
                w = v[:j] + (v[i],) + v[j + 1:]
                rows[index[w]] |= 1 << index[v]
            repl[(i, j)] = rows
    names = ["(" + ",".join(map(str, u)) + ")" for u in atoms]
    return CaAtomStructure(n, names, cyl, diag, transp, repl)


def one_atom_structure(n: int = 3) -> CaAtomStructure:
    return build_full_set_structure(n, 1)


# ---------------------------------------------------------------- small three-dimensional frames

_PATTERNS = ((0, 0, 0), (0, 0, 1), (0, 1, 0), (0, 1, 1), (0, 1, 2))


def ca3_frames(max_atoms: int = 6) -> list[CaAtomStructure]:
    """Every valid three-dimensional frame with at most ``max_atoms`` atoms, up to atom order.

    Atoms carry one of the five equality patterns of a triple.  Each ``T_k``
    class sits inside the atoms agreeing on whether the two coordinates
    other than ``k`` coincide, and meets each ``E_ik`` exactly once.
    """
    out = []
    for k in range(1, max_atoms + 1):
        for pats in itertools.combinations_with_replacement(_PATTERNS, k):
            axes = [list(_axis_partitions(pats, i)) for i in range(3)]
            diag = {(i, j): sum(1 << a for a, p in enumerate(pats) if p[i] == p[j])
                    for i, j in itertools.combinations(range(3), 2)}
            names = [f"a{q}" for q in range(k)]
            for cyl in itertools.product(*axes):
                s = CaAtomStructure(3, names, cyl, diag)
                if validate_ca_frame(s).ok:
                    out.append(s)
    return out


def _set_partitions(items: list):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for p in _set_partitions(rest):
        yield [[first]] + p
        for q in range(len(p)):
            yield p[:q] + [[first] + p[q]] + p[q + 1:]


def _axis_partitions(pats, k: int):
    others = [j for j in range(3) if j != k]
    groups: dict[bool, list[int]] = {}
    for a, p in enumerate(pats):
        groups.setdefault(p[others[0]] == p[others[1]], []).append(a)
    per = []
    for g in groups.values():
        per.append([part for part in _set_partitions(g)
                    if all(sum(1 for a in b if pats[a][i] == pats[a][k]) == 1
                           for b in part for i in others)])
    for combo in itertools.product(*per):
        rows = [0] * len(pats)
        for part in combo:
            for b in part:
                m = sum(1 << a for a in b)
                for a in b:
                    rows[a] = m
        yield rows


def relabel_atoms(s: CaAtomStructure, perm) -> CaAtomStructure:
    """Copy of ``s`` with atom ``a`` renamed to ``perm[a]``."""
    k = s.count

    def move(mask):
        return sum(1 << perm[a] for a in range(k) if mask >> a & 1)

    cyl = []
    for rows in s.cyl:
        new = [0] * k
        for a in range(k):
            new[perm[a]] = move(rows[a])
        cyl.append(new)
    names = [None] * k
    for a in range(k):
        names[perm[a]] = s.names[a]
    diag = {ij: move(m) for ij, m in s.diag.items()}
    transp = None
    if s.transp is not None:
        transp = {}
        for ij, p in s.transp.items():
            new = [0] * k
            for a in range(k):
                new[perm[a]] = perm[p[a]]
            transp[ij] = new
    return CaAtomStructure(s.dim, names, cyl, diag, transp)


def random_ca3_frames(count: int, seed: int, max_atoms: int = 6) -> list[CaAtomStructure]:
    """``count`` catalogue frames drawn with replacement, atoms shuffled, all from ``seed``."""
    rng = random.Random(seed)
    pool = ca3_frames(max_atoms)
    out = []
    for _ in range(count):
        s = rng.choice(pool)
        perm = list(range(s.count))
        rng.shuffle(perm)
        out.append(relabel_atoms(s, perm))
    return out


# ---------------------------------------------------------------- Monk algebras


def build_monk_ra(g: SimpleGraph, colours: int) -> RaAtomStructure:
    vs = list(g.vertices)
    names = ["Id"] + [f"({v},{c})" for v in vs for c in range(colours)]
    vert = [None] + [v for v in vs for _ in range(colours)]
    col = [None] + [c for _ in vs for c in range(colours)]

    def rule(a: int, b: int, c: int) -> bool:
        if 0 in (a, b, c):
            if a == 0:
                return b == c
            if b == 0:
                return a == c
            return a == b
        if not col[a] == col[b] == col[c]:
            return True
        return any(g.adjacent(x, y) for x, y in itertools.combinations((vert[a], vert[b], vert[c]), 2))

    k = len(names)
    return RaAtomStructure(names, [0], list(range(k)), rule=rule, rule_name="monk",
                           rule_params={"graph": graph_to_dict(g), "colours": colours})


def graph_to_dict(g: SimpleGraph) -> dict:
    vs = list(g.vertices)
    idx = {v: i for i, v in enumerate(vs)}
    return {"vertices": [str(v) for v in vs],
            "edges": sorted(sorted(idx[v] for v in e) for e in g.edges)}


def graph_from_dict(d: dict) -> SimpleGraph:
    vs = tuple(d["vertices"])
    return SimpleGraph(vs, frozenset(frozenset(vs[i] for i in e) for e in d["edges"]))


# ---------------------------------------------------------------- blur


def index_blur(i: int, j: int, k: int) -> bool:
    """Some arrangement ``p, q, r`` of ``i, j, k`` has ``r - q == q - p``."""
    return 2 * i == j + k or 2 * j == i + k or 2 * k == i + j


@dataclass(frozen=True)
class BlurParams:
    l: int
    i_size: int
    rows: int
    all_p: bool = False  # also admit atoms a_i^{P,W} with P outside W

    def __post_init__(self):
        if self.l < 1 or self.i_size < 3 * self.l:
            raise StructureError("need |I| >= 3l with l >= 1")
        if self.rows < 1:
            raise StructureError("need at least one row")


def build_blur_structure(p: BlurParams) -> RaAtomStructure:
    blurs = list(itertools.combinations(range(p.i_size), p.l))
    atoms = [(i, P, W) for i in range(p.rows) for W in blurs
             for P in (range(p.i_size) if p.all_p else W)]
    names = ["Id"] + [f"a{i}^{P},{{{','.join(map(str, W))}}}" for i, P, W in atoms]
    sets = [None] + [frozenset(W) for _, _, W in atoms]
    info = [None] + atoms

    def rule(a: int, b: int, c: int) -> bool:
        if 0 in (a, b, c):
            if a == 0:
                return b == c
            if b == 0:
                return a == c
            return a == b
        if not sets[a] & sets[b] & sets[c]:
            return True
        (i, P, _), (j, Q, _), (k, R, _) = info[a], info[b], info[c]
        return index_blur(i, j, k) and len({P, Q, R}) != 1

    return RaAtomStructure(names, [0], list(range(len(names))), rule=rule, rule_name="blur",
                           rule_params={"l": p.l, "i_size": p.i_size, "rows": p.rows,
                                        "all_p": p.all_p})


# ---------------------------------------------------------------- basic matrices


def basic_matrices(ra: RaAtomStructure, m: int) -> CaAtomStructure:
    """``m``-dimensional basic matrices of ``ra`` as a cylindric frame.

    The result carries ``cylindric_basis`` (frame validates) and, when it
    does not, the violated correspondents in ``basis_report``.
    """
    if m < 2:
        raise StructureError("matrix dimension must be at least 2")
    k = ra.count
    comp = ra.composition()
    cv = ra.converse
    ident = sorted(ra.identity)
    cells = [(i, j) for i in range(m) for j in range(i, m)]
    mats: list[tuple[int, ...]] = []
    cur = [[None] * m for _ in range(m)]

    def ok_upto(i, j) -> bool:
        # every triangle whose entries are all assigned
        for a in range(m):
            for b in range(m):
                for c in range(m):
                    x, y, z = cur[a][b], cur[b][c], cur[a][c]
                    if x is None or y is None or z is None:
                        continue
                    if (i, j) not in ((min(a, b), max(a, b)), (min(b, c), max(b, c)),
                                      (min(a, c), max(a, c))):
                        continue
                    if not comp[x][y] >> z & 1:
                        return False
        return True

    def rec(p: int):
        if p == len(cells):
            mats.append(tuple(cur[i][j] for i in range(m) for j in range(m)))
            return
        i, j = cells[p]
        for a in (ident if i == j else range(k)):
            cur[i][j], cur[j][i] = a, cv[a]
            if ok_upto(i, j):
                rec(p + 1)
        cur[i][j] = cur[j][i] = None

    rec(0)
    index = {b: x for x, b in enumerate(mats)}
    cyl = []
    for i in range(m):
        groups: dict = {}
        keys = []
        for x, b in enumerate(mats):
            key = tuple(b[r * m + c] for r in range(m) for c in range(m) if r != i and c != i)
            keys.append(key)
            groups[key] = groups.get(key, 0) | 1 << x
        cyl.append([groups[key] for key in keys])
    idset = ra.identity
    diag = {(i, j): sum(1 << x for x, b in enumerate(mats) if b[i * m + j] in idset)
            for i, j in itertools.combinations(range(m), 2)}
    transp = {}
    for i, j in itertools.combinations(range(m), 2):
        sig = list(range(m))
        sig[i], sig[j] = j, i
        transp[(i, j)] = [index[tuple(b[sig[r] * m + sig[c]] for r in range(m) for c in range(m))]
                          for b in mats]
    names = ["[" + ";".join(",".join(ra.names[b[r * m + c]] for c in range(m)) for r in range(m)) + "]"
             for b in mats]
    if not mats:
        raise StructureError("no basic matrices")
    s = CaAtomStructure(m, names, cyl, diag, transp)
    rep = validate_ca_frame(s)
    s.cylindric_basis = rep.ok
    s.basis_report = rep
    s.matrices = mats
    return s


# ---------------------------------------------------------------- rainbows


def build_rainbow(sig: RainbowSignature, max_atoms: int = 20000) -> RainbowStructure:
    s = RainbowStructure(sig, max_atoms=max_atoms)
    if s.atom_count == 0:
        raise StructureError("signature admits no atoms")
    return s


def materialize(s: RainbowStructure) -> CaAtomStructure:
    """Plain explicit copy of a (small) rainbow frame; atom ``a`` is ``s.key(a)``."""
    return CaAtomStructure(s.dim, s.names, s.cyl, s.diag, s.transp)


def split_reds(s: RainbowStructure, copies: int) -> RainbowStructure:
    if s.sig.copies != 1:
        raise StructureError("split_reds expects an unsplit rainbow")
    return RainbowStructure(s.sig.with_copies(copies), max_atoms=s.max_atoms)


def strip_colour(pal_b: Palette, pal_f: Palette, c: int) -> int:
    code = pal_b.codes[c]
    if code[0] == "r":
        return pal_f.index[("r", code[1], code[2], 0)]
    return pal_f.index[code]


def strip_key(pal_b: Palette, pal_f: Palette, key: tuple) -> tuple:
    m = len(coord_pairs(pal_b.sig.n))
    return tuple(EQ if c == EQ else strip_colour(pal_b, pal_f, c) for c in key[:m]) + key[m:]


def copies_of_key(pal_f: Palette, pal_b: Palette, key: tuple):
    """All copies of a base atom key: each red edge takes any superscript.

    Copies are chosen per edge of the underlying graph, so coordinate pairs
    that name the same edge always agree.
    """
    g, point = graph_of_key(pal_f, key)
    edges = sorted(g.edges)
    choices = []
    for e in edges:
        code = pal_f.codes[g.edges[e]]
        if code[0] == "r":
            choices.append([pal_b.index[("r", code[1], code[2], t)] for t in range(pal_b.sig.copies)])
        else:
            choices.append([pal_b.index[code]])
    for combo in itertools.product(*choices):
        h = ColouredGraph(pal_b, g.size, dict(zip(edges, combo)), dict(g.yellows))
        yield key_of(h, point)


@dataclass
class ThetaReport:
    base_atoms: int
    split_atoms: int
    image_total: int
    injective: bool
    partition: bool
    lifting: bool
    operators: bool
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations


class ThetaMap:
    """``a -> {copies of a}``; images are generated on demand."""

    def __init__(self, s_f: RainbowStructure, s_b: RainbowStructure):
        self.s_f, self.s_b = s_f, s_b

    def __call__(self, key) -> list:
        return list(copies_of_key(self.s_f.palette, self.s_b.palette, key))

    def image_set(self, key) -> SetOfAtoms:
        """Image as an atom set of a materialized split frame."""
        return self.s_b.set_of(self.s_b.atom_of_key(k) for k in self(key))


def theta_embedding(s_f: RainbowStructure, s_b: RainbowStructure, drop=None):
    """Check that copy-taking induces an embedding of the finite frame into the split one.

    Every atom and every copy is visited.  ``drop`` lists split atom keys to
    delete from ``s_b`` before checking (used to tamper).  Returns
    ``(ThetaMap, ThetaReport)``.
    """
    sf, sb = s_f.sig, s_b.sig
    if sf.copies != 1 or sb != sf.with_copies(sb.copies):
        raise StructureError("second structure is not a red splitting of the first")
    if sf.n != 3:
        raise StructureError("the exhaustive embedding check is implemented for n = 3")
    pal_f, pal_b = s_f.palette, s_b.palette
    strip = [strip_colour(pal_b, pal_f, c) for c in range(pal_b.size)]
    res = _kernels.theta_scan(_scan_tables(pal_f), _scan_tables(pal_b), strip, sb.copies)
    # atoms on one or two points
    for key in enumerate_atom_keys(pal_f, max_blocks=2):
        res["base"] += 1
        g, _ = graph_of_key(pal_f, key)
        reds = sum(1 for c in g.edges.values() if pal_f.red[c])
        realized = set()
        for k2 in copies_of_key(pal_f, pal_b, key):
            if s_b.is_atom_key(k2):
                res["image_total"] += 1
                realized.add(k2)
            else:
                res["bad_copy"] += 1
        if len(realized) != sb.copies ** reds:
            res["face_gaps"] += 1
    for key in enumerate_atom_keys(pal_b, max_blocks=2):
        if not s_f.is_atom_key(strip_key(pal_b, pal_f, key)):
            res["bad_strip"] += 1
    split_count = count_atoms(pal_b)
    missing = 0
    for key in drop or ():
        if s_b.is_atom_key(key):
            missing += 1
            split_count -= 1
    bad_transp = _transpositions_commute(s_f, s_b)
    viol = []
    if res["bad_copy"]:
        viol.append(f"lifting: {res['bad_copy']} copies of atoms are not split atoms")
    if res["bad_strip"]:
        viol.append(f"lifting: {res['bad_strip']} split atoms strip to non-atoms")
    if missing:
        viol.append(f"non-partition: {missing} copies missing from the split frame")
    if res["image_total"] - missing != split_count:
        viol.append(f"non-partition: images cover {res['image_total'] - missing} "
                    f"of {split_count} split atoms")
    if res["face_gaps"]:
        viol.append(f"cylindrifier: {res['face_gaps']} atoms whose copies miss a face copy")
    if bad_transp:
        viol.append(f"substitution: {bad_transp} atoms where transposing and copying disagree")
    report = ThetaReport(
        base_atoms=res["base"], split_atoms=split_count, image_total=res["image_total"] - missing,
        injective=res["bad_strip"] == 0,
        partition=missing == 0 and res["image_total"] == split_count,
        lifting=res["bad_copy"] == 0 and res["bad_strip"] == 0,
        operators=res["face_gaps"] == 0 and bad_transp == 0,
        violations=viol)
    return ThetaMap(s_f, s_b), report


def _transpositions_commute(s_f: RainbowStructure, s_b: RainbowStructure) -> int:
    """Count 3-point colourings where ``strip . S_ij != S_ij . strip`` on some copy."""
    pal_f, pal_b = s_f.palette, s_b.palette
    bad = 0
    for c01, c02, c12 in itertools.product(range(pal_f.size), repeat=3):
        if not pal_f.triangle_ok(c01, c12, c02):
            continue
        ys = tuple(NOSHADE if pal_f.green[c] else pal_f.full_shade for c in (c01, c02, c12))
        key = (c01, c02, c12) + ys
        for i, j in itertools.combinations(range(3), 2):
            want = s_f.transp_key(i, j, key)
            if any(strip_key(pal_b, pal_f, s_b.transp_key(i, j, k2)) != want
                   for k2 in copies_of_key(pal_f, pal_b, key)):
                bad += 1
                break
    return bad


def _scan_tables(pal: Palette) -> dict:
    """Flat tables describing 3-point atoms of an ``n = 3`` palette."""
    size = pal.size
    tri = bytearray(size ** 3)
    need = [0] * (size ** 3 * 3)
    g1 = pal.g[1]
    for a in range(size):
        for b in range(size):
            for c in range(size):
                x = (a * size + b) * size + c
                tri[x] = pal.tri[a][b][c]
                # edges 01 = a, 12 = b, 02 = c (oriented low to high)
                # a cone needs g0 from its first base point and g1 from the other
                col = {(0, 1): a, (1, 2): b, (0, 2): c}

                def colour(u, v):
                    return col[(u, v)] if u < v else pal.conv[col[(v, u)]]

                for apex in range(3):
                    d = [p for p in range(3) if p != apex]
                    for d0, d1 in (d, d[::-1]):
                        code = pal.codes[colour(d0, apex)]
                        if code[0] == "g0" and colour(d1, apex) == g1 \
                                and not pal.green[colour(d0, d1)]:
                            e = {(0, 1): 0, (1, 2): 1, (0, 2): 2}[tuple(sorted((d0, d1)))]
                            need[x * 3 + e] |= 1 << pal.tint_pos[code[1]]
    return {"size": size, "tri": bytes(tri), "need": need, "green": [int(g) for g in pal.green],
            "red": [int(r) for r in pal.red], "conv": list(pal.conv), "shades": pal.shades,
            "copy_of": [pal.codes[c][3] if pal.red[c] else 0 for c in range(size)],
            "names": [pal.name(c) for c in range(size)]}
