"""Rainbow colours, coloured graphs and the lazily materialized rainbow frame.

Edge colours are small integers.  Reds carry an orientation: if the edge
``(x, y)`` has colour ``r_kl`` then ``(y, x)`` has ``r_lk``; greens and whites
are their own converse.  Yellow shades ``y_S`` are bitmasks over the
positions of the tint set ``A`` and sit on ``(n-1)``-sets of points.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

from .algebra import CaAtomStructure, StructureError

EQ = -1  # two coordinates sent to the same point
NOSHADE = -1  # green inside the set: no yellow


@dataclass(frozen=True)
class RainbowSignature:
    """``n``; tint set ``A``; red index set ``B``; red copies ``T``; order rule flag."""

    n: int = 3
    tints: tuple[int, ...] = (1, 2, 3, 4)
    reds: tuple[int, ...] = (0, 1, 2)
    copies: int = 1
    order_rule: bool = False

    def __post_init__(self):
        if self.n < 3:
            raise StructureError("rainbow constructions need n >= 3")
        if not self.tints or list(self.tints) != sorted(set(self.tints)):
            raise StructureError("tints must be a nonempty increasing sequence")
        if list(self.reds) != sorted(set(self.reds)):
            raise StructureError("red indices must be increasing and distinct")
        if self.copies < 1:
            raise StructureError("need at least one copy of each red")

    @classmethod
    def pea(cls, n: int = 3) -> RainbowSignature:
        """Greens ``g_0^1..g_0^{n+1}``, reds on the complete irreflexive graph ``n``."""
        return cls(n=n, tints=tuple(range(1, n + 2)), reds=tuple(range(n)))

    @classmethod
    def ordered(cls, a_lo: int, a_hi: int, b_lo: int, b_hi: int, n: int = 3) -> RainbowSignature:
        return cls(n=n, tints=tuple(range(a_lo, a_hi + 1)), reds=tuple(range(b_lo, b_hi + 1)),
                   order_rule=True)

    def with_copies(self, copies: int) -> RainbowSignature:
        return RainbowSignature(self.n, self.tints, self.reds, copies, self.order_rule)

    def to_dict(self) -> dict:
        return {"n": self.n, "tints": list(self.tints), "reds": list(self.reds),
                "copies": self.copies, "order_rule": self.order_rule}

    @classmethod
    def from_dict(cls, d: dict) -> RainbowSignature:
        return cls(int(d["n"]), tuple(d["tints"]), tuple(d["reds"]), int(d.get("copies", 1)),
                   bool(d.get("order_rule", False)))


class Palette:
    """Colour codes and the forbidden-triangle table of one signature."""

    def __init__(self, sig: RainbowSignature):
        self.sig = sig
        n = sig.n
        codes: list[tuple] = [("g", i) for i in range(1, n - 1)]
        codes += [("g0", t) for t in sig.tints]
        codes += [("w", i) for i in range(n - 1)]
        codes += [("r", k, l, s) for k in sig.reds for l in sig.reds if k != l
                  for s in range(sig.copies)]
        self.codes = codes
        self.index = {c: x for x, c in enumerate(codes)}
        self.size = len(codes)
        self.green = [c[0] in ("g", "g0") for c in codes]
        self.red = [c[0] == "r" for c in codes]
        self.conv = [self.index[("r", c[2], c[1], c[3])] if c[0] == "r" else x
                     for x, c in enumerate(codes)]
        self.tint_pos = {t: p for p, t in enumerate(sig.tints)}
        self.g0 = {t: self.index[("g0", t)] for t in sig.tints}
        self.g = {i: self.index[("g", i)] for i in range(1, n - 1)}
        self.w = {i: self.index[("w", i)] for i in range(n - 1)}
        self.shades = 1 << len(sig.tints)
        self.full_shade = self.shades - 1
        self.tri = self._triangle_table()

    # -- names
    def name(self, c: int) -> str:
        code = self.codes[c]
        if code[0] == "g":
            return f"g{code[1]}"
        if code[0] == "g0":
            return f"g0^{code[1]}"
        if code[0] == "w":
            return f"w{code[1]}"
        _, k, l, s = code
        return f"r{k}{l}" + (f"^{s}" if self.sig.copies > 1 else "")

    def shade_name(self, y: int) -> str:
        return "y{" + ",".join(str(t) for p, t in enumerate(self.sig.tints) if y >> p & 1) + "}"

    def parse_colour(self, name: str) -> int:
        for c in range(self.size):
            if self.name(c) == name:
                return c
        raise StructureError(f"colour {name!r} not in signature")

    def parse_shade(self, name: str) -> int:
        if not (name.startswith("y{") and name.endswith("}")):
            raise StructureError(f"bad yellow {name!r}")
        body = name[2:-1]
        y = 0
        for part in filter(None, body.split(",")):
            t = int(part)
            if t not in self.tint_pos:
                raise StructureError(f"yellow {name!r} names tint {t} outside A")
            y |= 1 << self.tint_pos[t]
        return y

    def red_parts(self, c: int) -> tuple[int, int, int]:
        _, k, l, s = self.codes[c]
        return k, l, s

    # -- triangles
    def _forbidden(self, cxy: int, cyz: int, cxz: int) -> bool:
        cs = (cxy, cyz, cxz)
        kinds = [self.codes[c] for c in cs]
        if all(self.green[c] for c in cs):
            return True
        for i in range(1, self.sig.n - 1):
            if sorted(cs) == sorted((self.g[i], self.g[i], self.w[i])):
                return True
        g0s = [k for k in kinds if k[0] == "g0"]
        if len(g0s) == 2 and kinds.count(("w", 0)) == 1:
            return True
        if all(self.red[c] for c in cs):
            i, j, _ = self.red_parts(cxy)
            j2, k2, _ = self.red_parts(cyz)
            i3, k3, _ = self.red_parts(cxz)
            return not (i == i3 and j == j2 and k2 == k3)
        if self.sig.order_rule and len(g0s) == 2 and sum(self.red[c] for c in cs) == 1:
            # rotate so the red is on (u, v) and the shared node carries both greens
            if self.red[cyz]:
                ti, tj, (k, l, _) = kinds[0][1], kinds[2][1], self.red_parts(cyz)
            elif self.red[cxz]:
                # x-z red; y is the green hub: M(y,x), M(y,z)
                ti, tj, (k, l, _) = kinds[0][1], kinds[1][1], self.red_parts(cxz)
            else:
                # x-y red; z is the hub: M(z,x), M(z,y)
                ti, tj, (k, l, _) = kinds[2][1], kinds[1][1], self.red_parts(cxy)
            return not _order_preserving((ti, k), (tj, l))
        return False

    def _triangle_table(self) -> list[list[list[bool]]]:
        r = range(self.size)
        return [[[not self._forbidden(a, b, c) for c in r] for b in r] for a in r]

    def triangle_ok(self, cxy: int, cyz: int, cxz: int) -> bool:
        return self.tri[cxy][cyz][cxz]


def _order_preserving(p: tuple[int, int], q: tuple[int, int]) -> bool:
    (i, k), (j, l) = p, q
    if i == j:
        return k == l
    return (i < j) == (k < l) and k != l


# ---------------------------------------------------------------- coloured graphs


@dataclass
class ColouredGraph:
    """Points ``0..size-1``; oriented edge colours; yellows on ``(n-1)``-sets.

    ``edges[(u, v)]`` for ``u < v`` is the colour oriented from ``u`` to ``v``.
    ``yellows[frozenset]`` is a shade bitmask.
    """

    palette: Palette
    size: int
    edges: dict[tuple[int, int], int] = field(default_factory=dict)
    yellows: dict[frozenset, int] = field(default_factory=dict)

    def colour(self, u: int, v: int) -> int:
        if u < v:
            return self.edges[(u, v)]
        return self.palette.conv[self.edges[(v, u)]]

    def set_colour(self, u: int, v: int, c: int):
        if u < v:
            self.edges[(u, v)] = c
        else:
            self.edges[(v, u)] = self.palette.conv[c]

    def violations(self) -> list[str]:
        pal, n = self.palette, self.palette.sig.n
        out = []
        for u, v in itertools.combinations(range(self.size), 2):
            if (u, v) not in self.edges:
                out.append(f"edge ({u},{v}) uncoloured")
        if out:
            return out
        for x, y, z in itertools.combinations(range(self.size), 3):
            if not pal.triangle_ok(self.colour(x, y), self.colour(y, z), self.colour(x, z)):
                names = [pal.name(self.colour(a, b)) for a, b in ((x, y), (y, z), (x, z))]
                out.append(f"forbidden triple ({', '.join(names)}) on {x},{y},{z}")
        for s in itertools.combinations(range(self.size), n - 1):
            green = any(pal.green[self.colour(a, b)] for a, b in itertools.combinations(s, 2))
            key = frozenset(s)
            if green and key in self.yellows:
                out.append(f"yellow on green set {sorted(s)}")
            if not green and key not in self.yellows:
                out.append(f"missing yellow on {sorted(s)}")
        for key in self.yellows:
            if len(key) != n - 1 or any(not 0 <= p < self.size for p in key):
                out.append(f"yellow on non-face {sorted(key)}")
        for d in itertools.combinations(range(self.size), n):
            for apex, base, tint in cones_in(self, d):
                y = self.yellows.get(frozenset(base))
                if y is not None and not y >> pal.tint_pos[tint] & 1:
                    out.append(f"cone of tint {tint} on base {list(base)} outside "
                               f"{pal.shade_name(y)}")
        return out

    def is_valid(self) -> bool:
        return not self.violations()


def cones_in(g: ColouredGraph, pts) -> list[tuple[int, tuple[int, ...], int]]:
    """All ``(apex, ordered base, tint)`` with the ``n`` points forming a cone."""
    pal, n = g.palette, g.palette.sig.n
    out = []
    for apex in pts:
        rest = [p for p in pts if p != apex]
        base = [None] * (n - 1)
        tint = None
        ok = True
        for p in rest:
            code = pal.codes[g.colour(p, apex)]
            if code[0] == "g0":
                if base[0] is not None:
                    ok = False
                    break
                base[0], tint = p, code[1]
            elif code[0] == "g":
                if base[code[1]] is not None:
                    ok = False
                    break
                base[code[1]] = p
            else:
                ok = False
                break
        if not ok or any(b is None for b in base):
            continue
        if any(pal.green[g.colour(a, b)] for a, b in itertools.combinations(base, 2)):
            continue
        out.append((apex, tuple(base), tint))
    return out


# ---------------------------------------------------------------- atom keys
#
# An atom is a class of surjections a: n -> points.  Its key lists, for each
# coordinate pair i < j in lexicographic order, EQ or the colour oriented
# from a(i) to a(j); then, for each (n-1)-subset of coordinates in
# lexicographic order, the shade on its image when the image has n-1
# distinct green-free points, else NOSHADE.


def coord_pairs(n: int) -> list[tuple[int, int]]:
    return list(itertools.combinations(range(n), 2))


def coord_faces(n: int) -> list[tuple[int, ...]]:
    return list(itertools.combinations(range(n), n - 1))


def key_of(g: ColouredGraph, xs) -> tuple:
    """Atom key of the tuple ``xs`` of points of ``g``."""
    n = len(xs)
    out = []
    for i, j in itertools.combinations(range(n), 2):
        out.append(EQ if xs[i] == xs[j] else g.colour(xs[i], xs[j]))
    for face in itertools.combinations(range(n), n - 1):
        pts = frozenset(xs[i] for i in face)
        out.append(g.yellows.get(pts, NOSHADE) if len(pts) == n - 1 else NOSHADE)
    return tuple(out)


def graph_of_key(pal: Palette, key: tuple) -> tuple[ColouredGraph, tuple[int, ...]]:
    """Rebuild the coloured graph and the surjection of an atom key."""
    n = pal.sig.n
    pairs = coord_pairs(n)
    rel = dict(zip(pairs, key[:len(pairs)]))
    point: list[int] = []
    reps: list[int] = []
    for i in range(n):
        for q, r in enumerate(reps):
            if rel[(r, i)] == EQ:
                point.append(q)
                break
        else:
            point.append(len(reps))
            reps.append(i)
    g = ColouredGraph(pal, len(reps))
    for u, v in itertools.combinations(range(len(reps)), 2):
        g.edges[(u, v)] = rel[(reps[u], reps[v])]
    for face, y in zip(coord_faces(n), key[len(pairs):]):
        pts = frozenset(point[i] for i in face)
        if y != NOSHADE and len(pts) == n - 1:
            g.yellows[pts] = y
    return g, tuple(point)


def face_key(key: tuple, n: int, i: int) -> tuple:
    """The part of an atom key visible off coordinate ``i``."""
    pairs = coord_pairs(n)
    m = len(pairs)
    rel = tuple(key[x] for x, (a, b) in enumerate(pairs) if i not in (a, b))
    face = tuple(c for c in range(n) if c != i)
    y = key[m + coord_faces(n).index(face)]
    return rel, y


def transpose_key(pal: Palette, key: tuple, i: int, j: int) -> tuple:
    g, point = graph_of_key(pal, key)
    xs = list(point)
    xs[i], xs[j] = xs[j], xs[i]
    return key_of(g, xs)


def key_name(pal: Palette, key: tuple) -> str:
    n = pal.sig.n
    pairs = coord_pairs(n)
    parts = []
    for (i, j), c in zip(pairs, key):
        parts.append(f"{i}{j}:" + ("=" if c == EQ else pal.name(c)))
    for face, y in zip(coord_faces(n), key[len(pairs):]):
        if y != NOSHADE:
            parts.append("".join(map(str, face)) + ":" + pal.shade_name(y))
    return "[" + " ".join(parts) + "]"


def enumerate_atom_keys(pal: Palette, limit: int | None = None, max_blocks: int | None = None):
    """All atom keys in canonical order: partitions, then colourings, then yellows."""
    n = pal.sig.n
    count = 0
    for part in _rgs(n):
        q = max(part) + 1
        if max_blocks is not None and q > max_blocks:
            continue
        reps = [part.index(b) for b in range(q)]
        bpairs = list(itertools.combinations(range(q), 2))
        for cols in itertools.product(range(pal.size), repeat=len(bpairs)):
            g = ColouredGraph(pal, q, dict(zip(bpairs, cols)))
            if any(not pal.triangle_ok(g.colour(x, y), g.colour(y, z), g.colour(x, z))
                   for x, y, z in itertools.combinations(range(q), 3)):
                continue
            faces = [s for s in itertools.combinations(range(q), n - 1)
                     if not any(pal.green[g.colour(a, b)] for a, b in itertools.combinations(s, 2))]
            allowed = []
            for s in faces:
                need = 0
                for d in itertools.combinations(range(q), n):
                    for apex, base, tint in cones_in(g, d):
                        if frozenset(base) == frozenset(s):
                            need |= 1 << pal.tint_pos[tint]
                allowed.append([y for y in range(pal.shades) if y & need == need])
            for ys in itertools.product(*allowed):
                g.yellows = {frozenset(s): y for s, y in zip(faces, ys)}
                yield key_of(g, part)
                count += 1
                if limit is not None and count >= limit:
                    return


def count_atoms(pal: Palette) -> int:
    """Atom count without materializing yellows."""
    n = pal.sig.n
    total = 0
    for part in _rgs(n):
        q = max(part) + 1
        bpairs = list(itertools.combinations(range(q), 2))
        for cols in itertools.product(range(pal.size), repeat=len(bpairs)):
            g = ColouredGraph(pal, q, dict(zip(bpairs, cols)))
            if any(not pal.triangle_ok(g.colour(x, y), g.colour(y, z), g.colour(x, z))
                   for x, y, z in itertools.combinations(range(q), 3)):
                continue
            ways = 1
            for s in itertools.combinations(range(q), n - 1):
                if any(pal.green[g.colour(a, b)] for a, b in itertools.combinations(s, 2)):
                    continue
                need = 0
                for d in itertools.combinations(range(q), n):
                    for apex, base, tint in cones_in(g, d):
                        if frozenset(base) == frozenset(s):
                            need |= 1 << pal.tint_pos[tint]
                ways *= pal.shades >> bin(need).count("1")
            total += ways
    return total


def _rgs(n: int):
    """Restricted growth strings of length ``n`` (set partitions), in lex order."""
    def rec(prefix, top):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for b in range(top + 2):
            yield from rec(prefix + [b], max(top, b))
    yield from rec([0], 0)


# ---------------------------------------------------------------- the frame


class RainbowStructure(CaAtomStructure):
    """A rainbow frame whose explicit tables are built only on demand.

    Key-level relations (``E_ij``, ``T_i``, ``S_ij``) work without
    materializing anything; the bit-row tables inherited from
    :class:`CaAtomStructure` are built on first access if the atom count is
    at most ``max_atoms``.
    """

    def __init__(self, sig: RainbowSignature, max_atoms: int = 20000):
        self.sig = sig
        self.palette = Palette(sig)
        self.dim = sig.n
        self.max_atoms = max_atoms
        self.repl = None
        self._classes = {}
        self._built = False

    # -- key level
    def in_diag_key(self, key, i: int, j: int) -> bool:
        if i == j:
            return True
        i, j = min(i, j), max(i, j)
        return key[coord_pairs(self.dim).index((i, j))] == EQ

    def related_key(self, i: int, a, b) -> bool:
        return face_key(a, self.dim, i) == face_key(b, self.dim, i)

    def transp_key(self, i: int, j: int, key):
        return transpose_key(self.palette, key, i, j)

    def atom_name(self, key) -> str:
        return key_name(self.palette, key)

    def is_atom_key(self, key) -> bool:
        try:
            g, point = graph_of_key(self.palette, key)
        except (KeyError, IndexError, ValueError):
            return False
        return g.is_valid() and key_of(g, point) == key

    @cached_property
    def atom_count(self) -> int:
        return count_atoms(self.palette)

    # -- explicit tables
    def _build(self):
        if self._built:
            return
        if self.atom_count > self.max_atoms:
            raise StructureError(
                f"rainbow frame has {self.atom_count} atoms, above max_atoms={self.max_atoms}; "
                "use the key-level interface")
        keys = list(enumerate_atom_keys(self.palette))
        self._keys = keys
        index = {k: a for a, k in enumerate(keys)}
        self._key_index = index
        n = self.dim
        cyl = []
        for i in range(n):
            groups: dict = {}
            for a, k in enumerate(keys):
                groups.setdefault(face_key(k, n, i), 0)
                groups[face_key(k, n, i)] |= 1 << a
            cyl.append(tuple(groups[face_key(k, n, i)] for k in keys))
        diag = {}
        for i, j in itertools.combinations(range(n), 2):
            diag[(i, j)] = sum(1 << a for a, k in enumerate(keys) if self.in_diag_key(k, i, j))
        transp = {(i, j): tuple(index[self.transp_key(i, j, k)] for k in keys)
                  for i, j in itertools.combinations(range(n), 2)}
        self.names = tuple(self.atom_name(k) for k in keys)
        self.cyl = tuple(cyl)
        self.diag = diag
        self.transp = transp
        self._index = {nm: a for a, nm in enumerate(self.names)}
        self._built = True

    def __getattr__(self, item):
        # explicit tables appear on first use
        if item in ("names", "cyl", "diag", "transp", "_index", "_keys", "_key_index"):
            self._build()
            return self.__dict__[item]
        raise AttributeError(item)

    @property
    def count(self) -> int:
        return self.atom_count

    def __len__(self):
        return self.atom_count

    def key(self, a: int):
        return self._keys[a]

    def atom_of_key(self, key) -> int:
        return self._key_index[key]

    def __repr__(self):
        return f"<RainbowStructure n={self.sig.n} |A|={len(self.sig.tints)} " \
               f"|B|={len(self.sig.reds)} T={self.sig.copies}>"
