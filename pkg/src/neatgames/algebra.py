"""Finite atom structures, their complex algebras, and a small term language.

A cylindric-type frame is stored as bit-rows: for every axis ``i`` and atom
``a`` the integer ``cyl[i][a]`` has bit ``b`` set iff ``a T_i b``.  Sets of
atoms are plain Python integers wrapped in :class:`SetOfAtoms`.
"""
from __future__ import annotations

import dataclasses
import itertools
import random
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from ._kernels import iter_bits, popcount


class StructureError(ValueError):
    """Malformed structure (bad index, width or table shape)."""


class ModeError(ValueError):
    """Requested inequality mode is unsound for the given terms."""


class TermSyntaxError(ValueError):
    def __init__(self, msg: str, offset: int):
        super().__init__(f"{msg} at offset {offset}")
        self.offset = offset


class EvalError(ValueError):
    pass


# ---------------------------------------------------------------- atom sets


@dataclass(frozen=True)
class SetOfAtoms:
    bits: int
    width: int

    def __post_init__(self):
        if self.bits < 0 or self.bits >> self.width:
            raise StructureError("set exceeds structure width")

    @classmethod
    def of(cls, ids: Iterable[int], width: int) -> SetOfAtoms:
        bits = 0
        for a in ids:
            if not 0 <= a < width:
                raise StructureError(f"atom id {a} out of range")
            bits |= 1 << a
        return cls(bits, width)

    @classmethod
    def empty(cls, width: int) -> SetOfAtoms:
        return cls(0, width)

    @classmethod
    def full(cls, width: int) -> SetOfAtoms:
        return cls((1 << width) - 1, width)

    def _same(self, other: SetOfAtoms):
        if self.width != other.width:
            raise StructureError("sets from structures of different width")

    def __or__(self, other):
        self._same(other)
        return SetOfAtoms(self.bits | other.bits, self.width)

    def __and__(self, other):
        self._same(other)
        return SetOfAtoms(self.bits & other.bits, self.width)

    def __sub__(self, other):
        self._same(other)
        return SetOfAtoms(self.bits & ~other.bits, self.width)

    def __invert__(self):
        return SetOfAtoms(((1 << self.width) - 1) & ~self.bits, self.width)

    def __le__(self, other):
        self._same(other)
        return self.bits & ~other.bits == 0

    def __iter__(self) -> Iterator[int]:
        return iter_bits(self.bits)

    def __len__(self):
        return popcount(self.bits)

    def __contains__(self, a: int):
        return bool(self.bits >> a & 1)

    def __bool__(self):
        return self.bits != 0

    def ids(self) -> list[int]:
        return list(iter_bits(self.bits))


# ---------------------------------------------------------------- reports


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    def add(self, msg: str):
        if msg not in self.violations:
            self.violations.append(msg)

    def __bool__(self):
        # truthy when something is wrong, like a non-empty list
        return bool(self.violations)

    def __iter__(self):
        return iter(self.violations)

    def __len__(self):
        return len(self.violations)

    def __contains__(self, text: str):
        return any(text in v for v in self.violations)

    @property
    def ok(self) -> bool:
        return not self.violations


def _pair(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


# ---------------------------------------------------------------- CA frames


class CaAtomStructure:
    """Atoms with relations ``T_i``, sets ``E_ij`` and optional involutions ``S_ij``.

    ``cyl[i][a]`` is the bit-row of atoms ``T_i``-related to ``a``.
    ``diag`` maps ``(i, j)`` with ``i < j`` to a bitmask; ``E_ii`` is implicit.
    ``transp`` maps ``(i, j)`` with ``i < j`` to a permutation tuple.
    ``repl`` optionally makes ``s_i^j`` primitive: ``repl[(i, j)][a]`` is the
    bit-row image of the singleton ``{a}``.
    """

    def __init__(self, dim: int, names: Sequence[str], cyl: Sequence[Sequence[int]],
                 diag: Mapping[tuple[int, int], int],
                 transp: Mapping[tuple[int, int], Sequence[int]] | None = None,
                 repl: Mapping[tuple[int, int], Sequence[int]] | None = None):
        self.dim = dim
        self.names = tuple(names)
        self.cyl = tuple(tuple(r) for r in cyl)
        self.diag = {_pair(*k): v for k, v in diag.items()}
        self.transp = None if transp is None else {_pair(*k): tuple(v) for k, v in transp.items()}
        self.repl = None if repl is None else {k: tuple(v) for k, v in repl.items()}
        self._check_shape()
        self._index = {nm: a for a, nm in enumerate(self.names)}
        self._classes: dict[int, tuple[int, ...]] = {}

    # -- structural checks (distinct from axiom checks)
    def _check_shape(self):
        n, k = self.dim, len(self.names)
        if n < 2:
            raise StructureError("dimension must be at least 2")
        if len(set(self.names)) != k:
            raise StructureError("atom display names must be unique")
        if len(self.cyl) != n:
            raise StructureError(f"expected {n} cylindrifier relations, got {len(self.cyl)}")
        for i, rows in enumerate(self.cyl):
            if len(rows) != k:
                raise StructureError(f"T_{i} has {len(rows)} rows for {k} atoms")
            for a, r in enumerate(rows):
                if r < 0 or r >> k:
                    raise StructureError(f"T_{i} row of atom {a} names an atom id >= {k}")
        for (i, j), m in self.diag.items():
            if not (0 <= i < j < n):
                raise StructureError(f"diagonal index ({i},{j}) out of range")
            if m < 0 or m >> k:
                raise StructureError(f"E_{i}{j} names an atom id >= {k}")
        for i, j in itertools.combinations(range(n), 2):
            if (i, j) not in self.diag:
                raise StructureError(f"missing diagonal E_{i}{j}")
        if self.transp is not None:
            for (i, j), p in self.transp.items():
                if not (0 <= i < j < n):
                    raise StructureError(f"transposition index ({i},{j}) out of range")
                if len(p) != k or any(not 0 <= b < k for b in p):
                    raise StructureError(f"S_{i}{j} is not a total map on atoms")
        if self.repl is not None:
            for (i, j), rows in self.repl.items():
                if not (0 <= i < n and 0 <= j < n and i != j) or len(rows) != k:
                    raise StructureError(f"replacement s_{i}^{j} malformed")

    def __len__(self):
        return len(self.names)

    @property
    def count(self) -> int:
        return len(self.names)

    def atom(self, name: str) -> int:
        return self._index[name]

    def full(self) -> SetOfAtoms:
        return SetOfAtoms.full(self.count)

    def set_of(self, ids: Iterable[int]) -> SetOfAtoms:
        return SetOfAtoms.of(ids, self.count)

    def diag_mask(self, i: int, j: int) -> int:
        if i == j:
            return (1 << self.count) - 1
        return self.diag[_pair(i, j)]

    def transp_perm(self, i: int, j: int) -> tuple[int, ...]:
        if i == j:
            return tuple(range(self.count))
        return self.transp[_pair(i, j)]

    def classes(self, i: int) -> tuple[int, ...]:
        """Distinct rows of ``T_i`` (the partition when ``T_i`` is an equivalence)."""
        if i not in self._classes:
            self._classes[i] = tuple(sorted(set(self.cyl[i])))
        return self._classes[i]

    # -- complex operations on raw masks
    def c(self, i: int, x: int) -> int:
        rows = self.cyl[i]
        out = 0
        rest = x
        while rest:
            low = rest & -rest
            a = low.bit_length() - 1
            out |= rows[a]
            rest ^= low
        return out

    def s_transp(self, i: int, j: int, x: int) -> int:
        if self.transp is None:
            raise EvalError("structure has no transpositions")
        p = self.transp_perm(i, j)
        out = 0
        for a in iter_bits(x):
            out |= 1 << p[a]
        return out

    def s_repl(self, i: int, j: int, x: int) -> int:
        """``s_i^j x = c_j(d_ij . x)`` unless declared primitive."""
        if i == j:
            return x
        if self.repl is not None and (i, j) in self.repl:
            rows = self.repl[(i, j)]
            out = 0
            for a in iter_bits(x):
                out |= rows[a]
            return out
        return self.c(j, self.diag_mask(i, j) & x)

    def __repr__(self):
        return f"<{type(self).__name__} dim={self.dim} atoms={self.count}>"


def validate_ca_frame(s: CaAtomStructure) -> ValidationReport:
    """Check the frame correspondents of the CA_n (and PEA_n) axioms on atoms.

    Correspondents checked, with the axiom each mirrors:
      x <= c_i x                       T_i reflexive
      c_i(x . c_i y) = c_i x . c_i y   T_i symmetric and transitive
      c_i c_j x = c_j c_i x            T_i;T_j = T_j;T_i
      d_ij = c_k(d_ik . d_kj)          k not in {i, j}; for i = j this reads c_k d_ik = 1
      d_ij . c_i(d_ij . x) <= x        each T_i class meets E_ij at most once
    With transpositions:
      s_[i,j] is a Boolean automorphism of order two
      s_[i,j] d_ij = d_ij pointwise, s_[i,j] d_kl = d_[i,j](k)[i,j](l)
      s_[i,j] c_k x = c_[i,j](k) s_[i,j] x
      s_[i,j] s_[j,k] s_[i,j] = s_[i,k] and disjoint transpositions commute
    """
    rep = ValidationReport()
    n, k = s.dim, s.count
    full = (1 << k) - 1
    rows = s.cyl
    equiv = []
    for i in range(n):
        ok = True
        for a in range(k):
            if not rows[i][a] >> a & 1:
                rep.add(f"c{i} extensivity/reflexivity: atom {s.names[a]}")
                ok = False
                break
        for a in range(k):
            for b in iter_bits(rows[i][a]):
                if not rows[i][b] >> a & 1:
                    rep.add(f"c{i} symmetry: {s.names[a]} -> {s.names[b]}")
                    ok = False
                    break
        for a in range(k):
            if _c_rows(rows[i], rows[i][a]) & ~rows[i][a]:
                rep.add(f"c{i} idempotence/transitivity: atom {s.names[a]}")
                ok = False
                break
        equiv.append(ok)
    fast = all(equiv)
    for i, j in itertools.combinations(range(n), 2):
        if fast:
            # T_i;T_j = T_j;T_i, one class image at a time
            ij = _class_images(rows[i], rows[j])
            ji = _class_images(rows[j], rows[i])
            bad = next((a for a in range(k) if ij[rows[i][a]] != ji[rows[j][a]]), None)
        else:
            bad = next((a for a in range(k)
                        if s.c(i, s.c(j, 1 << a)) != s.c(j, s.c(i, 1 << a))), None)
        if bad is not None:
            rep.add(f"c{i}c{j} commutativity: atom {s.names[bad]}")
    for i in range(n):
        for j in range(i, n):
            for m in range(n):
                if m in (i, j):
                    continue
                lhs = s.diag_mask(i, j)
                rhs = s.c(m, s.diag_mask(i, m) & s.diag_mask(m, j))
                if lhs != rhs:
                    rep.add(f"d{i}{j} = c{m}(d{i}{m}.d{m}{j})")
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            d = s.diag_mask(i, j)
            for a in iter_bits(d):
                if popcount(rows[i][a] & d) > 1:
                    rep.add(f"d{i}{j} uniqueness along c{i}: atom {s.names[a]}")
                    break
    if s.transp is not None:
        _validate_transp(s, rep, full, fast)
    if s.repl is not None:
        # primitive replacements must agree with their definition on atoms
        for i, j in s.repl:
            for a in range(k):
                if s.s_repl(i, j, 1 << a) != _defined_repl(s, i, j, 1 << a):
                    rep.add(f"s{i}^{j} disagrees with c{j}(d{i}{j}.x)")
                    break
    return rep


def _c_rows(rows, x: int) -> int:
    out = 0
    while x:
        low = x & -x
        out |= rows[low.bit_length() - 1]
        x ^= low
    return out


def _class_images(inner, outer) -> dict:
    """``class -> c_outer(class)`` for each distinct row of an equivalence."""
    return {row: _c_rows(outer, row) for row in set(inner)}


def _defined_repl(s: CaAtomStructure, i: int, j: int, x: int) -> int:
    return s.c(j, s.diag_mask(i, j) & x)


def _transp_index(i: int, j: int, k: int) -> int:
    return j if k == i else i if k == j else k


def _validate_transp(s: CaAtomStructure, rep: ValidationReport, full: int, fast: bool):
    n, k = s.dim, s.count
    for (i, j), p in s.transp.items():
        if sorted(p) != list(range(k)):
            rep.add(f"s[{i},{j}] not a bijection")
            continue
        if any(p[p[a]] != a for a in range(k)):
            rep.add(f"s[{i},{j}] not an involution")
        for a in iter_bits(s.diag_mask(i, j)):
            if p[a] != a:
                rep.add(f"s[{i},{j}] moves an atom of d{i}{j}")
                break
        for a, b in itertools.combinations(range(n), 2):
            img = 0
            for x in iter_bits(s.diag_mask(a, b)):
                img |= 1 << p[x]
            ta, tb = _transp_index(i, j, a), _transp_index(i, j, b)
            if img != s.diag_mask(ta, tb):
                rep.add(f"s[{i},{j}] d{a}{b} = d{ta}{tb}")
        for m in range(n):
            tm = _transp_index(i, j, m)
            image = {}
            for a in range(k):
                row = s.cyl[m][a]
                if fast:
                    lhs = image.get(row)
                    if lhs is None:
                        lhs = image[row] = s.s_transp(i, j, row)
                else:
                    lhs = s.s_transp(i, j, s.c(m, 1 << a))
                if lhs != s.cyl[tm][p[a]]:
                    rep.add(f"s[{i},{j}] c{m} = c{tm} s[{i},{j}]")
                    break
    if n >= 3:
        for i, j, m in itertools.permutations(range(n), 3):
            pij, pjm, pim = s.transp_perm(i, j), s.transp_perm(j, m), s.transp_perm(i, m)
            if any(pij[pjm[pij[a]]] != pim[a] for a in range(k)):
                rep.add(f"braid s[{i},{j}]s[{j},{m}]s[{i},{j}] = s[{i},{m}]")
    if n >= 4:
        for (i, j), (a, b) in itertools.combinations(itertools.combinations(range(n), 2), 2):
            if {i, j} & {a, b}:
                continue
            p, q = s.transp_perm(i, j), s.transp_perm(a, b)
            if any(p[q[x]] != q[p[x]] for x in range(k)):
                rep.add(f"s[{i},{j}] and s[{a},{b}] do not commute")


# ---------------------------------------------------------------- RA frames


class RaAtomStructure:
    """Relation-algebra atom structure.

    ``consistent(a, b, c)`` means ``c <= a ; b``.  Triples are either an
    explicit set or a named rule (a callable plus its parameters), so that
    large rule-generated structures serialize compactly.
    """

    def __init__(self, names: Sequence[str], identity: Iterable[int], converse: Sequence[int],
                 triples: Iterable[tuple[int, int, int]] | None = None,
                 rule: Callable[[int, int, int], bool] | None = None,
                 rule_name: str | None = None, rule_params: dict | None = None):
        self.names = tuple(names)
        k = len(self.names)
        if len(set(self.names)) != k:
            raise StructureError("atom display names must be unique")
        self.identity = frozenset(identity)
        self.converse = tuple(converse)
        if any(not 0 <= a < k for a in self.identity):
            raise StructureError("identity atom id out of range")
        if len(self.converse) != k or any(not 0 <= b < k for b in self.converse):
            raise StructureError("converse is not a total map on atoms")
        if (triples is None) == (rule is None):
            raise StructureError("give exactly one of triples or rule")
        if triples is not None:
            ts = frozenset(tuple(t) for t in triples)
            for t in ts:
                if len(t) != 3 or any(not 0 <= a < k for a in t):
                    raise StructureError(f"triple {t} names an atom id out of range")
            self.triples = ts
            self._rule = lambda a, b, c: (a, b, c) in ts
        else:
            self.triples = None
            self._rule = lambda a, b, c: rule(a, b, c)
        self.rule_name = rule_name
        self.rule_params = rule_params or {}
        self._index = {nm: a for a, nm in enumerate(self.names)}
        self._comp: list[list[int]] | None = None

    @property
    def count(self) -> int:
        return len(self.names)

    def atom(self, name: str) -> int:
        return self._index[name]

    def consistent(self, a: int, b: int, c: int) -> bool:
        return self._rule(a, b, c)

    def composition(self) -> list[list[int]]:
        """``comp[a][b]`` is the bitmask of ``a ; b``."""
        if self._comp is None:
            k = self.count
            self._comp = [[sum(1 << c for c in range(k) if self._rule(a, b, c))
                           for b in range(k)] for a in range(k)]
        return self._comp

    def explicit_triples(self) -> list[tuple[int, int, int]]:
        comp = self.composition()
        return [(a, b, c) for a in range(self.count) for b in range(self.count)
                for c in iter_bits(comp[a][b])]

    def with_triples(self, triples: Iterable[tuple[int, int, int]]) -> RaAtomStructure:
        return RaAtomStructure(self.names, self.identity, self.converse, triples=triples)

    def __repr__(self):
        return f"<RaAtomStructure atoms={self.count}>"


def validate_ra_frame(s: RaAtomStructure, associativity: bool = True) -> ValidationReport:
    rep = ValidationReport()
    k, cv = s.count, s.converse
    if any(cv[cv[a]] != a for a in range(k)):
        rep.add("converse is not an involution")
    for e in s.identity:
        if cv[e] != e:
            rep.add(f"identity atom {s.names[e]} is not self-converse")
    comp = s.composition()
    for a in range(k):
        for b in range(k):
            for c in iter_bits(comp[a][b]):
                if not comp[cv[a]][c] >> b & 1:
                    rep.add(f"cycle law: ({s.names[a]},{s.names[b]},{s.names[c]}) but not (a^,c,b)")
                if not comp[b][cv[c]] >> cv[a] & 1:
                    rep.add(f"cycle law: ({s.names[a]},{s.names[b]},{s.names[c]}) but not (b,c^,a^)")
    for e in s.identity:
        for b in range(k):
            if comp[e][b] & ~(1 << b):
                rep.add(f"identity law: ({s.names[e]},{s.names[b]},c) with c != b")
    for b in range(k):
        if not any(comp[e][b] >> b & 1 for e in s.identity):
            rep.add(f"identity law: no identity atom fixes {s.names[b]}")
    if associativity and not rep.violations:
        bad = _associativity_failure(s)
        if bad is not None:
            a, b, c = (s.names[x] for x in bad)
            rep.add(f"associativity: ({a};{b});{c} != {a};({b};{c})")
    return rep


def _associativity_failure(s: RaAtomStructure):
    import numpy as np

    k = s.count
    comp = s.composition()
    r = np.zeros((k, k, k), dtype=np.float32)
    for a in range(k):
        for b in range(k):
            for c in iter_bits(comp[a][b]):
                r[a, b, c] = 1.0
    flat = r.reshape(k, k * k)  # flat[x, (c, d)] = x;c >= d
    for a in range(k):
        left = (r[a] @ flat).reshape(k, k, k) > 0  # [b, c, d]: (a;b);c >= d
        bc = r.reshape(k * k, k)  # bc[(b, c), y] = b;c >= y
        right = (bc @ r[a]).reshape(k, k, k) > 0  # sum_y (b;c >= y)(a;y >= d)
        diff = np.argwhere(left != right)
        if len(diff):
            b, c, _ = diff[0]
            return a, int(b), int(c)
    return None


# ---------------------------------------------------------------- terms


@dataclass(frozen=True)
class Term:
    pass


@dataclass(frozen=True)
class Const(Term):
    value: int


@dataclass(frozen=True)
class Diag(Term):
    i: int
    j: int


@dataclass(frozen=True)
class Var(Term):
    name: str


@dataclass(frozen=True)
class Neg(Term):
    arg: Term


@dataclass(frozen=True)
class Cyl(Term):
    i: int
    arg: Term


@dataclass(frozen=True)
class Subst(Term):
    """``s_i^j x = c_j(d_ij . x)``: coordinate ``j`` takes the value of ``i``."""
    i: int
    j: int
    arg: Term


@dataclass(frozen=True)
class Transp(Term):
    i: int
    j: int
    arg: Term


@dataclass(frozen=True)
class Meet(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Join(Term):
    left: Term
    right: Term


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_']*)|(?P<op>[()·*.,+\-−&|]))")


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    out, pos = [], 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if not m or m.end() == pos:
            if src[pos:].strip() == "":
                break
            raise TermSyntaxError(f"unexpected character {src[pos]!r}", pos)
        kind = m.lastgroup
        start = m.start(kind)
        out.append((kind, m.group(kind), start))
        pos = m.end()
    out.append(("end", "", len(src)))
    return out


class _Parser:
    def __init__(self, src: str):
        self.toks = _tokenize(src)
        self.k = 0

    def peek(self):
        return self.toks[self.k]

    def take(self):
        t = self.toks[self.k]
        self.k += 1
        return t

    def expect(self, text: str):
        kind, val, pos = self.take()
        if val != text:
            raise TermSyntaxError(f"expected {text!r}, found {val or 'end of input'!r}", pos)

    def number(self) -> int:
        kind, val, pos = self.take()
        if kind != "num":
            raise TermSyntaxError(f"expected index, found {val or 'end of input'!r}", pos)
        return int(val)

    def parse(self) -> Term:
        t = self.join()
        kind, val, pos = self.peek()
        if kind != "end":
            raise TermSyntaxError(f"unexpected {val!r}", pos)
        return t

    def join(self) -> Term:
        t = self.meet()
        while self.peek()[1] in ("+", "|"):
            self.take()
            t = Join(t, self.meet())
        return t

    def meet(self) -> Term:
        t = self.unary()
        while self.peek()[1] in ("·", "*", ".", "&"):
            self.take()
            t = Meet(t, self.unary())
        return t

    def unary(self) -> Term:
        kind, val, pos = self.peek()
        if val in ("-", "−"):
            self.take()
            return Neg(self.unary())
        return self.atom()

    def atom(self) -> Term:
        kind, val, pos = self.take()
        if kind == "num":
            if val in ("0", "1"):
                return Const(int(val))
            raise TermSyntaxError(f"bad constant {val!r}", pos)
        if val == "(":
            t = self.join()
            self.expect(")")
            return t
        if kind == "name":
            if val in ("c", "s", "sT", "d") and self.peek()[1] == "(":
                self.take()
                if val == "d":
                    i = self.number(); self.expect(","); j = self.number(); self.expect(")")
                    return Diag(i, j)
                if val == "c":
                    i = self.number(); self.expect(",")
                    t = self.join(); self.expect(")")
                    return Cyl(i, t)
                i = self.number(); self.expect(","); j = self.number(); self.expect(",")
                t = self.join(); self.expect(")")
                return Subst(i, j, t) if val == "s" else Transp(i, j, t)
            return Var(val)
        raise TermSyntaxError(f"unexpected {val or 'end of input'!r}", pos)


def parse_term(src: str) -> Term:
    return _Parser(src).parse()


def print_term(t: Term) -> str:
    """Canonical text; ``parse_term(print_term(t)) == t``."""
    if isinstance(t, Const):
        return str(t.value)
    if isinstance(t, Diag):
        return f"d({t.i},{t.j})"
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Neg):
        inner = print_term(t.arg)
        if isinstance(t.arg, (Meet, Join)):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(t, Cyl):
        return f"c({t.i}, {print_term(t.arg)})"
    if isinstance(t, Subst):
        return f"s({t.i},{t.j}, {print_term(t.arg)})"
    if isinstance(t, Transp):
        return f"sT({t.i},{t.j}, {print_term(t.arg)})"
    if isinstance(t, Meet):
        left = print_term(t.left)
        right = print_term(t.right)
        if isinstance(t.left, Join):
            left = f"({left})"
        if isinstance(t.right, (Meet, Join)):
            right = f"({right})"
        return f"{left} · {right}"
    if isinstance(t, Join):
        right = print_term(t.right)
        if isinstance(t.right, Join):
            right = f"({right})"
        return f"{print_term(t.left)} + {right}"
    raise TypeError(t)


def free_vars(t: Term) -> list[str]:
    seen: dict[str, None] = {}

    def walk(u):
        if isinstance(u, Var):
            seen.setdefault(u.name)
        for ch in _children(u):
            walk(ch)

    walk(t)
    return list(seen)


def _children(t: Term) -> tuple[Term, ...]:
    if isinstance(t, (Neg, Cyl, Subst, Transp)):
        return (t.arg,)
    if isinstance(t, (Meet, Join)):
        return (t.left, t.right)
    return ()


def is_monotone(t: Term) -> bool:
    if isinstance(t, Neg):
        return False
    return all(is_monotone(c) for c in _children(t))


def max_index(t: Term) -> int:
    here = {Diag: lambda u: max(u.i, u.j), Cyl: lambda u: u.i,
            Subst: lambda u: max(u.i, u.j), Transp: lambda u: max(u.i, u.j)}
    m = here[type(t)](t) if type(t) in here else -1
    return max([m] + [max_index(c) for c in _children(t)])


def _as_mask(v, s: CaAtomStructure) -> int:
    if isinstance(v, SetOfAtoms):
        if v.width != s.count:
            raise EvalError("environment set has the wrong width")
        return v.bits
    if isinstance(v, int):
        return v
    mask = 0
    for a in v:
        mask |= 1 << (s.atom(a) if isinstance(a, str) else a)
    return mask


def _eval(t: Term, env: Mapping[str, int], s: CaAtomStructure) -> int:
    full = (1 << s.count) - 1
    if isinstance(t, Const):
        return full if t.value else 0
    if isinstance(t, Diag):
        return s.diag_mask(t.i, t.j)
    if isinstance(t, Var):
        if t.name not in env:
            raise EvalError(f"unbound variable {t.name!r}")
        return env[t.name]
    if isinstance(t, Neg):
        return full & ~_eval(t.arg, env, s)
    if isinstance(t, Cyl):
        return s.c(t.i, _eval(t.arg, env, s))
    if isinstance(t, Subst):
        return s.s_repl(t.i, t.j, _eval(t.arg, env, s))
    if isinstance(t, Transp):
        return s.s_transp(t.i, t.j, _eval(t.arg, env, s))
    if isinstance(t, Meet):
        left = _eval(t.left, env, s)
        return left & _eval(t.right, env, s) if left else 0
    if isinstance(t, Join):
        return _eval(t.left, env, s) | _eval(t.right, env, s)
    raise TypeError(t)


def eval_term(t: Term | str, env: Mapping[str, object], s: CaAtomStructure) -> SetOfAtoms:
    if isinstance(t, str):
        t = parse_term(t)
    if max_index(t) >= s.dim:
        raise EvalError(f"index {max_index(t)} out of range for dimension {s.dim}")
    if isinstance(t, Transp) or _uses(t, Transp):
        if s.transp is None:
            raise EvalError("structure has no transpositions")
    masks = {k: _as_mask(v, s) for k, v in env.items()}
    return SetOfAtoms(_eval(t, masks, s), s.count)


def _uses(t: Term, kind) -> bool:
    return isinstance(t, kind) or any(_uses(c, kind) for c in _children(t))


@dataclass
class Verdict:
    holds: bool
    counterexample: dict[str, SetOfAtoms] | None = None
    checked: int = 0

    def __bool__(self):
        return self.holds


def check_inequality(s: CaAtomStructure, lhs: Term | str, rhs: Term | str,
                     mode: str | tuple = "atoms-only", budget: int = 1 << 22,
                     neat: int | None = None) -> Verdict:
    """Decide ``lhs <= rhs`` in the complex algebra over ``s``.

    ``mode`` is ``"atoms-only"``, ``"exhaustive"`` or ``("sampled", seed, count)``.
    With ``neat=r`` the variables range over the neat reduct to dimension
    ``r``: every variable is read as ``c_r ... c_{dim-1} x``.
    """
    lhs = parse_term(lhs) if isinstance(lhs, str) else lhs
    rhs = parse_term(rhs) if isinstance(rhs, str) else rhs
    if neat is not None:
        lhs, rhs = _neat_vars(lhs, neat, s.dim), _neat_vars(rhs, neat, s.dim)
    for t in (lhs, rhs):
        if max_index(t) >= s.dim:
            raise EvalError(f"index {max_index(t)} out of range for dimension {s.dim}")
    names = free_vars(Meet(lhs, rhs))
    k = s.count
    if isinstance(mode, tuple):
        kind, seed, count = mode
        if kind != "sampled":
            raise ModeError(f"unknown mode {mode!r}")
        rng = random.Random(seed)
        envs = ({v: rng.getrandbits(k) for v in names} for _ in range(count))
    elif mode == "atoms-only":
        if not (is_monotone(lhs) and is_monotone(rhs)):
            raise ModeError("atoms-only mode needs complement-free terms")
        envs = ({v: 1 << a for v, a in zip(names, combo)}
                for combo in itertools.product(range(k), repeat=len(names)))
    elif mode == "exhaustive":
        if (1 << k) ** len(names) > budget:
            raise ModeError("structure too large for exhaustive mode")
        envs = ({v: m for v, m in zip(names, combo)}
                for combo in itertools.product(range(1 << k), repeat=len(names)))
    else:
        raise ModeError(f"unknown mode {mode!r}")
    checked = 0
    for env in envs:
        checked += 1
        left = _eval(lhs, env, s)
        if left and left & ~_eval(rhs, env, s):
            return Verdict(False, {v: SetOfAtoms(m, k) for v, m in env.items()}, checked)
    return Verdict(True, None, checked)


def _neat_vars(t: Term, r: int, dim: int) -> Term:
    if isinstance(t, Var):
        for i in range(r, dim):
            t = Cyl(i, t)
        return t
    if isinstance(t, (Neg, Cyl, Subst, Transp)):
        return dataclasses.replace(t, arg=_neat_vars(t.arg, r, dim))
    if isinstance(t, (Meet, Join)):
        return type(t)(_neat_vars(t.left, r, dim), _neat_vars(t.right, r, dim))
    return t
