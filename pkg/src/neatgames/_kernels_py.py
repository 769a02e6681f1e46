"""Pure-Python versions of the hot kernels.

Canonical tables use *shell order*: entries over node positions ``{0..p}``
that mention ``p`` come before any entry mentioning ``p + 1``.  Because a
shell depends only on the first ``p + 1`` chosen nodes, the minimal
relabelling can be built greedily, keeping every tied partial order.
"""
from __future__ import annotations

import itertools
from functools import lru_cache


def popcount(x: int) -> int:
    return x.bit_count()


def iter_bits(x: int):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


@lru_cache(maxsize=None)
def shell_tuples(p: int, arity: int) -> tuple[tuple[int, ...], ...]:
    """Position tuples over ``{0..p}`` that contain ``p``, in lexicographic order."""
    return tuple(t for t in itertools.product(range(p + 1), repeat=arity) if p in t)


def canon_table(table, k: int, arity: int):
    """Minimal shell-order relabelling of a ``k``-node ``arity``-ary table.

    ``table[r]`` is the label of the tuple whose base-``k`` rank is ``r``.
    Returns ``(key, order)`` where ``order[q]`` is the old node placed at
    position ``q`` and ``key`` lists the relabelled entries in shell order.
    """
    if k == 0:
        return (), ()
    weights = [k ** (arity - 1 - j) for j in range(arity)]
    frontier = [((), ())]
    for p in range(k):
        shell = shell_tuples(p, arity)
        best_key = None
        nxt = []
        for key, order in frontier:
            used = set(order)
            for v in range(k):
                if v in used:
                    continue
                o = order + (v,)
                block = tuple(table[sum(o[t[j]] * weights[j] for j in range(arity))] for t in shell)
                if best_key is None or block < best_key:
                    best_key = block
                    nxt = [(key + block, o)]
                elif block == best_key:
                    nxt.append((key + block, o))
        frontier = nxt
    return frontier[0]


def table_from_shell(key, k: int, arity: int) -> list:
    """Inverse of the shell layout: rank-ordered table from a shell key."""
    out = [None] * (k ** arity)
    for r, a in zip(_shell_ranks(k, arity), key):
        out[r] = a
    return out


@lru_cache(maxsize=None)
def _shell_ranks(k: int, arity: int) -> tuple:
    weights = [k ** (arity - 1 - j) for j in range(arity)]
    return tuple(sum(t[j] * weights[j] for j in range(arity))
                 for p in range(k) for t in shell_tuples(p, arity))


def theta_scan(F: dict, B: dict, strip, copies: int) -> dict:
    """Visit every 3-point atom of the base frame and every copy of it.

    ``F`` and ``B`` are flat palette tables (base and split).  Edges are
    indexed 0 = (0,1), 1 = (1,2), 2 = (0,2); ``need[3x + e]`` is the tint
    mask a yellow on edge ``e`` must contain for skeleton ``x``.
    """
    sf, sb = F["size"], B["size"]
    res = {"base": 0, "image_total": 0, "bad_copy": 0, "bad_strip": 0, "face_gaps": 0}
    by_base = [[] for _ in range(sf)]
    for c in range(sb):
        by_base[strip[c]].append(c)
    full = (1 << copies) - 1
    ftri, fneed, fgreen, fred = F["tri"], F["need"], F["green"], F["red"]
    btri, bneed, bcopy = B["tri"], B["need"], B["copy_of"]
    shades = F["shades"]
    allowed = [[y for y in range(shades) if y & m == m] for m in range(shades)]
    for a in range(sf):
        for b in range(sf):
            for c in range(sf):
                x = (a * sf + b) * sf + c
                if not ftri[x]:
                    continue
                cols = (a, b, c)
                ys = [[-1] if fgreen[cols[e]] else allowed[fneed[3 * x + e]] for e in range(3)]
                reds = [e for e in range(3) if fred[cols[e]]]
                for y0 in ys[0]:
                    for y1 in ys[1]:
                        for y2 in ys[2]:
                            res["base"] += 1
                            yy = (y0, y1, y2)
                            seen = [0, 0, 0]
                            for a2 in by_base[a]:
                                for b2 in by_base[b]:
                                    for c2 in by_base[c]:
                                        x2 = (a2 * sb + b2) * sb + c2
                                        ok = btri[x2]
                                        if ok:
                                            for e in range(3):
                                                m = bneed[3 * x2 + e]
                                                if yy[e] >= 0 and yy[e] & m != m:
                                                    ok = 0
                                        if ok:
                                            res["image_total"] += 1
                                            cs = (a2, b2, c2)
                                            for e in reds:
                                                seen[e] |= 1 << bcopy[cs[e]]
                                        else:
                                            res["bad_copy"] += 1
                            if any(seen[e] != full for e in reds):
                                res["face_gaps"] += 1
    for a2 in range(sb):
        for b2 in range(sb):
            for c2 in range(sb):
                x2 = (a2 * sb + b2) * sb + c2
                if not btri[x2]:
                    continue
                cols = (a2, b2, c2)
                ys = [[-1] if B["green"][cols[e]] else allowed[bneed[3 * x2 + e]] for e in range(3)]
                x = (strip[a2] * sf + strip[b2]) * sf + strip[c2]
                for y0 in ys[0]:
                    for y1 in ys[1]:
                        for y2 in ys[2]:
                            ok = ftri[x]
                            if ok:
                                for e, y in enumerate((y0, y1, y2)):
                                    m = fneed[3 * x + e]
                                    if y >= 0 and y & m != m:
                                        ok = 0
                            if not ok:
                                res["bad_strip"] += 1
    return res
