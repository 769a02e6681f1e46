# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the canonical-table, completion and theta-scan kernels."""
from libc.stdlib cimport malloc, free
from libc.string cimport memcpy
from libc.stdint cimport uint64_t

from ._kernels_py import shell_tuples


def canon_table(table, int k, int arity):
    """Same contract as the Python kernel; labels are ranked to ints first."""
    if k == 0:
        return (), ()
    uniq = sorted(set(table))
    rank = {a: i for i, a in enumerate(uniq)}
    cdef Py_ssize_t size = len(table)
    cdef int *tab = <int *> malloc(size * sizeof(int))
    cdef int *w = <int *> malloc(arity * sizeof(int))
    cdef Py_ssize_t i
    for i in range(size):
        tab[i] = rank[table[i]]
    cdef int j, p, v, q, f, nf, nn, cmp, r, L, t
    for j in range(arity):
        w[j] = k ** (arity - 1 - j)
    # frontier of partial orders, each stored in a row of length k
    cdef int cap = 1
    for j in range(2, k + 1):
        cap *= j
    cdef int *front = <int *> malloc(cap * k * sizeof(int))
    cdef int *nxt = <int *> malloc(cap * k * sizeof(int))
    cdef int *best = <int *> malloc(size * sizeof(int))
    cdef int *block = <int *> malloc(size * sizeof(int))
    cdef int *shell = <int *> malloc(size * arity * sizeof(int))
    cdef int *used = <int *> malloc(k * sizeof(int))
    cdef int *tmp
    cdef bint have
    nf = 1
    try:
        for p in range(k):
            sh = shell_tuples(p, arity)
            L = len(sh)
            for q in range(L):
                for j in range(arity):
                    shell[q * arity + j] = sh[q][j]
            nn = 0
            have = False
            for f in range(nf):
                for v in range(k):
                    used[v] = 0
                for q in range(p):
                    used[front[f * k + q]] = 1
                for v in range(k):
                    if used[v]:
                        continue
                    front[f * k + p] = v
                    for q in range(L):
                        r = 0
                        for j in range(arity):
                            r += front[f * k + shell[q * arity + j]] * w[j]
                        block[q] = tab[r]
                    if not have:
                        cmp = -1
                    else:
                        cmp = 0
                        for q in range(L):
                            if block[q] != best[q]:
                                cmp = -1 if block[q] < best[q] else 1
                                break
                    if cmp < 0:
                        have = True
                        memcpy(best, block, L * sizeof(int))
                        nn = 0
                    if cmp <= 0:
                        memcpy(&nxt[nn * k], &front[f * k], (p + 1) * sizeof(int))
                        nn += 1
            tmp = front
            front = nxt
            nxt = tmp
            nf = nn
        order = tuple(front[q] for q in range(k))
        key = []
        for p in range(k):
            for tt in shell_tuples(p, arity):
                r = 0
                for j in range(arity):
                    r += order[tt[j]] * w[j]
                key.append(table[r])
        return tuple(key), order
    finally:
        free(tab); free(w); free(front); free(nxt); free(best); free(block)
        free(shell); free(used)


def theta_scan(F, B, strip, int copies):
    """Same contract as the Python kernel."""
    cdef int sf = F["size"], sb = B["size"], shades = F["shades"]
    cdef const unsigned char[:] ftri = bytes(F["tri"])
    cdef const unsigned char[:] btri = bytes(B["tri"])
    cdef int[:] fneed = _ints(F["need"])
    cdef int[:] bneed = _ints(B["need"])
    cdef int[:] fgreen = _ints(F["green"])
    cdef int[:] bgreen = _ints(B["green"])
    cdef int[:] fred = _ints(F["red"])
    cdef int[:] bcopy = _ints(B["copy_of"])
    cdef int[:] st = _ints(strip)
    cdef int[:] start = _ints([0] * (sf + 1))
    cdef int[:] members = _ints(sorted(range(sb), key=lambda c: strip[c]))
    cdef int c
    for c in range(sb):
        start[st[c] + 1] += 1
    for c in range(sf):
        start[c + 1] += start[c]
    cdef long long base = 0, image = 0, bad_copy = 0, bad_strip = 0, gaps = 0
    cdef int a, b, a2, b2, c2, ia, ib, ic, e, x, x2, m, full = (1 << copies) - 1
    cdef int y[3]
    cdef int lo[3]
    cdef int hi[3]
    cdef int col[3]
    cdef int col2[3]
    cdef int seen[3]
    cdef bint ok, gap
    for a in range(sf):
        for b in range(sf):
            for c in range(sf):
                x = (a * sf + b) * sf + c
                if not ftri[x]:
                    continue
                col[0] = a; col[1] = b; col[2] = c
                for e in range(3):
                    if fgreen[col[e]]:
                        lo[e] = -1; hi[e] = -1
                    else:
                        lo[e] = 0; hi[e] = shades - 1
                y[0] = lo[0]
                while y[0] <= hi[0]:
                    if y[0] >= 0 and (y[0] & fneed[3 * x]) != fneed[3 * x]:
                        y[0] += 1
                        continue
                    y[1] = lo[1]
                    while y[1] <= hi[1]:
                        if y[1] >= 0 and (y[1] & fneed[3 * x + 1]) != fneed[3 * x + 1]:
                            y[1] += 1
                            continue
                        y[2] = lo[2]
                        while y[2] <= hi[2]:
                            if y[2] >= 0 and (y[2] & fneed[3 * x + 2]) != fneed[3 * x + 2]:
                                y[2] += 1
                                continue
                            base += 1
                            seen[0] = 0; seen[1] = 0; seen[2] = 0
                            for ia in range(start[a], start[a + 1]):
                                col2[0] = members[ia]
                                for ib in range(start[b], start[b + 1]):
                                    col2[1] = members[ib]
                                    for ic in range(start[c], start[c + 1]):
                                        col2[2] = members[ic]
                                        x2 = (col2[0] * sb + col2[1]) * sb + col2[2]
                                        ok = btri[x2]
                                        if ok:
                                            for e in range(3):
                                                m = bneed[3 * x2 + e]
                                                if y[e] >= 0 and (y[e] & m) != m:
                                                    ok = False
                                        if ok:
                                            image += 1
                                            for e in range(3):
                                                if fred[col[e]]:
                                                    seen[e] |= 1 << bcopy[col2[e]]
                                        else:
                                            bad_copy += 1
                            gap = False
                            for e in range(3):
                                if fred[col[e]] and seen[e] != full:
                                    gap = True
                            if gap:
                                gaps += 1
                            y[2] += 1
                        y[1] += 1
                    y[0] += 1
    for a2 in range(sb):
        for b2 in range(sb):
            for c2 in range(sb):
                x2 = (a2 * sb + b2) * sb + c2
                if not btri[x2]:
                    continue
                col2[0] = a2; col2[1] = b2; col2[2] = c2
                x = (st[a2] * sf + st[b2]) * sf + st[c2]
                for e in range(3):
                    if bgreen[col2[e]]:
                        lo[e] = -1; hi[e] = -1
                    else:
                        lo[e] = 0; hi[e] = shades - 1
                y[0] = lo[0]
                while y[0] <= hi[0]:
                    y[1] = lo[1]
                    while y[1] <= hi[1]:
                        y[2] = lo[2]
                        while y[2] <= hi[2]:
                            ok = True
                            for e in range(3):
                                m = bneed[3 * x2 + e]
                                if y[e] >= 0 and (y[e] & m) != m:
                                    ok = False
                            if ok:
                                ok = ftri[x]
                                if ok:
                                    for e in range(3):
                                        m = fneed[3 * x + e]
                                        if y[e] >= 0 and (y[e] & m) != m:
                                            ok = False
                                if not ok:
                                    bad_strip += 1
                            y[2] += 1
                        y[1] += 1
                    y[0] += 1
    return {"base": base, "image_total": image, "bad_copy": bad_copy,
            "bad_strip": bad_strip, "face_gaps": gaps}


cdef int[:] _ints(seq):
    import array
    return array.array("i", [int(v) for v in seq])


cdef class Completer:
    """Iterative backtracking over the free entries of a partial table.

    ``layout`` is the flattened per-``k`` geometry built by the network
    module; entries of ``table`` are atom indices or ``-1``.  Each call to
    :meth:`next` returns the next completion as a tuple, or ``None``.
    """

    cdef int size, count, npairs, has_perm, depth, started, nfree
    cdef uint64_t[:] pat, cyl, fixed
    cdef int[:] nb_start, nb_axis, nb_rank, sw, perm
    cdef int[:] table, srank
    cdef uint64_t[:] smask

    def __init__(self, layout, table):
        import array
        (self.count, self.pat, self.nb_start, self.nb_axis, self.nb_rank, self.cyl,
         self.npairs, self.sw, self.fixed, self.perm) = layout
        self.has_perm = self.npairs > 0
        self.size = len(table)
        self.table = array.array("i", [-1 if a is None else a for a in table])
        self.srank = array.array("i", [0] * (self.size + 1))
        self.smask = array.array("Q", [0] * (self.size + 1))
        self.nfree = sum(1 for a in table if a is None)
        self.depth = -1
        self.started = 0

    cdef uint64_t _cands(self, int r):
        cdef uint64_t m = self.pat[r]
        cdef int e, b, q, y
        for e in range(self.nb_start[r], self.nb_start[r + 1]):
            b = self.table[self.nb_rank[e]]
            if b >= 0:
                m &= self.cyl[self.nb_axis[e] * self.count + b]
                if m == 0:
                    return 0
        if self.has_perm:
            for q in range(self.npairs):
                y = self.sw[r * self.npairs + q]
                if y == r:
                    m &= self.fixed[q]
                else:
                    b = self.table[y]
                    if b >= 0:
                        m &= (<uint64_t> 1) << self.perm[q * self.count + b]
        return m

    cdef int _choose(self):
        """Push the most constrained free entry; 0 when some entry has no candidate."""
        cdef int r, best = -1, c, best_c = 65
        cdef uint64_t m, best_m = 0
        for r in range(self.size):
            if self.table[r] >= 0:
                continue
            m = self._cands(r)
            c = _popcount(m)
            if c < best_c:
                best, best_c, best_m = r, c, m
                if c <= 1:
                    break
        self.depth += 1
        self.srank[self.depth] = best
        self.smask[self.depth] = best_m
        return best_c > 0

    def consistent(self):
        """Whether every pre-filled entry is allowed by the others."""
        cdef int r, a
        for r in range(self.size):
            a = self.table[r]
            if a >= 0 and not (self._cands(r) >> a) & 1:
                return False
        return True

    cdef tuple _snapshot(self):
        return tuple([self.table[r] for r in range(self.size)])

    def next(self):
        cdef int r, a
        cdef uint64_t m
        if not self.started:
            self.started = 1
            if self.nfree == 0:
                return self._snapshot()
            self._choose()
        while self.depth >= 0:
            r = self.srank[self.depth]
            m = self.smask[self.depth]
            if m == 0:
                self.table[r] = -1
                self.depth -= 1
                continue
            a = _lowbit(m)
            self.smask[self.depth] = m & (m - 1)
            self.table[r] = a
            if self.depth + 1 == self.nfree:
                return self._snapshot()
            self._choose()
        return None


cdef inline int _popcount(uint64_t m):
    cdef int c = 0
    while m:
        m &= m - 1
        c += 1
    return c


cdef inline int _lowbit(uint64_t m):
    cdef int a = 0
    while not (m >> a) & 1:
        a += 1
    return a
