"""JSON documents for structures, networks, strategies and reports.

Every document carries ``kind`` and ``version``.  Output is deterministic
(sorted keys, atoms in id order) so fixtures diff cleanly.  Rule-generated
structures (rainbow, Monk, blur) are stored by rule name and parameters.
"""

from __future__ import annotations

import hashlib
import json

from .algebra import CaAtomStructure, RaAtomStructure, StructureError, iter_bits
from .constructions import (BlurParams, build_blur_structure, build_monk_ra, build_rainbow,
                            graph_from_dict)
from .games import Demand, Position, StrategyCert
from .networks import Network
from .rainbow import RainbowSignature, RainbowStructure

VERSION = 1
KINDS = ("ca-structure", "ra-structure", "network", "strategy", "report")


class DocumentError(ValueError):
    """A document is malformed; the message names the offending location."""


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def loads(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentError(f"not JSON: line {e.lineno} column {e.colno}: {e.msg}") from None
    if not isinstance(doc, dict):
        raise DocumentError("top level must be an object")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise DocumentError(f"kind: unknown document kind {kind!r}")
    if doc.get("version") != VERSION:
        raise DocumentError(f"version: expected {VERSION}, got {doc.get('version')!r}")
    return doc


def _pair_key(i: int, j: int) -> str:
    return f"{i},{j}"


def _parse_pair(text: str, where: str) -> tuple[int, int]:
    try:
        i, j = (int(v) for v in text.split(","))
    except ValueError:
        raise DocumentError(f"{where}: bad index pair {text!r}") from None
    return i, j


def _freeze(v):
    if isinstance(v, list):
        return tuple(_freeze(x) for x in v)
    return v


def _thaw(v):
    if isinstance(v, tuple):
        return [_thaw(x) for x in v]
    return v


# ---------------------------------------------------------------- structures


def structure_to_doc(s) -> dict:
    if isinstance(s, RainbowStructure):
        return {"kind": "ca-structure", "version": VERSION, "dim": s.dim,
                "rule": "rainbow", "params": s.sig.to_dict()}
    if isinstance(s, CaAtomStructure):
        k = s.count
        doc = {"kind": "ca-structure", "version": VERSION, "dim": s.dim, "atoms": list(s.names),
               "cyl": [[[a, b] for a in range(k) for b in iter_bits(rows[a])] for rows in s.cyl],
               "diag": {_pair_key(*ij): list(iter_bits(m)) for ij, m in s.diag.items()}}
        if s.transp is not None:
            doc["transp"] = {_pair_key(*ij): list(p) for ij, p in s.transp.items()}
        if s.repl is not None:
            doc["repl"] = {_pair_key(*ij): [list(iter_bits(r)) for r in rows]
                           for ij, rows in s.repl.items()}
        return doc
    if isinstance(s, RaAtomStructure):
        doc = {"kind": "ra-structure", "version": VERSION, "atoms": list(s.names),
               "identity": sorted(s.identity), "converse": list(s.converse)}
        if s.triples is not None:
            doc["triples"] = sorted(list(t) for t in s.triples)
        elif s.rule_name in _RA_RULES:
            doc["triples"] = {"rule": s.rule_name, "params": s.rule_params}
        else:
            doc["triples"] = [list(t) for t in s.explicit_triples()]
        return doc
    raise TypeError(f"cannot export {type(s).__name__}")


def structure_from_doc(doc: dict):
    if doc.get("kind") == "ca-structure":
        if "rule" in doc:
            if doc["rule"] != "rainbow":
                raise DocumentError(f"rule: unknown cylindric rule {doc['rule']!r}")
            try:
                return build_rainbow(RainbowSignature.from_dict(doc["params"]))
            except (KeyError, TypeError, StructureError) as e:
                raise DocumentError(f"params: {e}") from None
        return _ca_from_doc(doc)
    if doc.get("kind") == "ra-structure":
        return _ra_from_doc(doc)
    raise DocumentError(f"kind: expected a structure, got {doc.get('kind')!r}")


def _ids(xs, k: int, where: str) -> list[int]:
    if not isinstance(xs, list):
        raise DocumentError(f"{where}: expected a list of atom ids")
    for a in xs:
        if not isinstance(a, int) or not 0 <= a < k:
            raise DocumentError(f"{where}: dangling atom id {a!r} ({k} atoms)")
    return xs


def _ca_from_doc(doc: dict) -> CaAtomStructure:
    try:
        n, names = doc["dim"], doc["atoms"]
        k = len(names)
        cyl = []
        for i, pairs in enumerate(doc["cyl"]):
            rows = [0] * k
            for a, b in pairs:
                _ids([a, b], k, f"cyl[{i}]")
                rows[a] |= 1 << b
            cyl.append(rows)
        diag = {}
        for key, ids in doc["diag"].items():
            diag[_parse_pair(key, "diag")] = sum(1 << a for a in _ids(ids, k, f"diag[{key}]"))
        transp = None
        if "transp" in doc:
            transp = {_parse_pair(key, "transp"): _ids(p, k, f"transp[{key}]")
                      for key, p in doc["transp"].items()}
        repl = None
        if "repl" in doc:
            repl = {_parse_pair(key, "repl"): [sum(1 << b for b in _ids(r, k, f"repl[{key}]"))
                                               for r in rows]
                    for key, rows in doc["repl"].items()}
        return CaAtomStructure(n, names, cyl, diag, transp, repl)
    except KeyError as e:
        raise DocumentError(f"missing field {e.args[0]!r}") from None
    except (TypeError, ValueError) as e:
        if isinstance(e, DocumentError):
            raise
        raise DocumentError(str(e)) from None


def _monk(params):
    return build_monk_ra(graph_from_dict(params["graph"]), int(params["colours"]))


def _blur(params):
    return build_blur_structure(BlurParams(int(params["l"]), int(params["i_size"]),
                                           int(params["rows"]), bool(params.get("all_p", False))))


_RA_RULES = {"monk": _monk, "blur": _blur}


def _ra_from_doc(doc: dict) -> RaAtomStructure:
    try:
        names = doc["atoms"]
        k = len(names)
        identity = _ids(doc["identity"], k, "identity")
        converse = _ids(doc["converse"], k, "converse")
        triples = doc["triples"]
        if isinstance(triples, dict):
            rule = _RA_RULES.get(triples.get("rule"))
            if rule is None:
                raise DocumentError(f"triples.rule: unknown rule {triples.get('rule')!r}")
            s = rule(triples["params"])
            if list(s.names) != list(names) or sorted(s.identity) != sorted(identity) \
                    or list(s.converse) != list(converse):
                raise DocumentError("triples.rule: rule output disagrees with the listed atoms")
            return s
        for n, t in enumerate(triples):
            _ids(t, k, f"triples[{n}]")
        return RaAtomStructure(names, identity, converse, triples=[tuple(t) for t in triples])
    except KeyError as e:
        raise DocumentError(f"missing field {e.args[0]!r}") from None
    except (TypeError, StructureError) as e:
        raise DocumentError(str(e)) from None


def structure_hash(s) -> str:
    body = structure_to_doc(s)
    return hashlib.sha256(dumps(body).encode()).hexdigest()


# ---------------------------------------------------------------- networks


def network_to_doc(net: Network) -> dict:
    labels = {",".join(map(str, x)): _thaw(net.table[r]) for r, x in enumerate(net.tuples())}
    return {"kind": "network", "version": VERSION, "structure-hash": structure_hash(net.structure),
            "nodes": list(net.nodes), "labels": labels}


def network_from_doc(doc: dict, s) -> Network:
    if doc.get("structure-hash") != structure_hash(s):
        raise DocumentError("structure-hash: network belongs to a different structure")
    try:
        labels = {tuple(int(v) for v in key.split(",")): _freeze(a)
                  for key, a in doc["labels"].items()}
        return Network(s, doc["nodes"], labels)
    except KeyError as e:
        raise DocumentError(f"missing field {e.args[0]!r}") from None
    except (ValueError, StructureError) as e:
        raise DocumentError(f"labels: {e}") from None


# ---------------------------------------------------------------- strategies


def _demand_out(d: Demand) -> list:
    return [_thaw(d.x), d.i, _thaw(d.atom), d.target]


def _demand_in(v) -> Demand:
    x, i, atom, target = v
    return Demand(tuple(x), i, _freeze(atom), target)


def strategy_to_doc(cert: StrategyCert, s) -> dict:
    return {
        "kind": "strategy", "version": VERSION, "structure-hash": structure_hash(s),
        "winner": cert.winner, "spec": cert.spec,
        "positions": [[p.k, _thaw(p.key)] for p in cert.positions],
        "initial": sorted([_thaw(a), q] for a, q in cert.initial.items()),
        "safe": sorted(([q, r] for q, r in cert.safe), key=lambda e: (e[0], -1 if e[1] is None else e[1])),
        "moves": sorted(([q, r, [[_demand_out(d), x, z, list(order)] for d, x, z, order in ms]]
                         for (q, r), ms in cert.moves.items()),
                        key=lambda e: (e[0], -1 if e[1] is None else e[1])),
        "atom": _thaw(cert.atom),
        "forcing": sorted([q, _demand_out(d), rank] for q, (d, rank) in cert.forcing.items()),
    }


def strategy_from_doc(doc: dict, s) -> StrategyCert:
    if doc.get("kind") != "strategy":
        raise DocumentError(f"kind: expected strategy, got {doc.get('kind')!r}")
    if doc.get("structure-hash") != structure_hash(s):
        raise DocumentError("structure-hash: certificate belongs to a different structure")
    try:
        cert = StrategyCert(doc["winner"], doc["spec"],
                            [Position(k, _freeze(key)) for k, key in doc["positions"]])
        cert.initial = {_freeze(a): q for a, q in doc["initial"]}
        cert.safe = {(q, r) for q, r in doc["safe"]}
        cert.moves = {(q, r): [(_demand_in(d), x, z, tuple(order)) for d, x, z, order in ms]
                      for q, r, ms in doc["moves"]}
        cert.atom = _freeze(doc["atom"])
        cert.forcing = {q: (_demand_in(d), rank) for q, d, rank in doc["forcing"]}
        return cert
    except KeyError as e:
        raise DocumentError(f"missing field {e.args[0]!r}") from None
    except (TypeError, ValueError) as e:
        raise DocumentError(f"malformed strategy: {e}") from None


# ---------------------------------------------------------------- reports


def report_doc(command: str, verdict: str, text: list[str], details: dict | None = None) -> dict:
    return {"kind": "report", "version": VERSION, "command": command, "verdict": verdict,
            "text": list(text), "details": details or {}}

