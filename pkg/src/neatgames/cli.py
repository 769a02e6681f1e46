"""``neatgames`` command line.

Exit codes: 0 success, 1 an ``--expect`` verdict was not met, 2 usage or
input error, 3 inconclusive (budget or search bound reached).
"""

from __future__ import annotations

import functools
import json
import os
import re
import sys
import time

import click

from . import algebra, bases, constructions, games, interchange
from .constructions import Inconclusive, SimpleGraph
from .networks import is_valid_network
from .rainbow import RainbowSignature

EXIT_UNMET, EXIT_USAGE, EXIT_INCONCLUSIVE = 1, 2, 3


def _budget_ms() -> int | None:
    v = os.environ.get("NEATGAMES_BUDGET_MS")
    if not v:
        return None
    try:
        return int(v)
    except ValueError:
        raise click.UsageError(f"NEATGAMES_BUDGET_MS must be an integer, got {v!r}") from None


_DEFAULTS = {"out": None, "expect": None, "seed": 0, "jobs": 1}


def _global_options(f):
    f = click.option("--out", type=click.Path(dir_okay=False), help="Write the document here.")(f)
    f = click.option("--expect", help="Expected verdict; exit 1 if it is not met.")(f)
    f = click.option("--seed", type=int, default=None, help="Seed for randomized steps (default 0).")(f)
    return click.option("--jobs", type=int, default=None,
                        help="Worker budget (default 1; the solvers run on one thread).")(f)


def common(f):
    """Accept the global flags after the subcommand too; those win over the group's."""

    @_global_options
    @functools.wraps(f)
    def wrapper(*args, out, expect, seed, jobs, **kw):
        ctx = click.get_current_context()
        base = dict(ctx.find_root().obj or _DEFAULTS)
        for k, v in {"out": out, "expect": expect, "seed": seed, "jobs": jobs}.items():
            if v is not None:
                base[k] = v
        ctx.obj = base
        return f(*args, **kw)

    return wrapper


def _opts() -> dict:
    return click.get_current_context().obj


def _emit_doc(doc: dict, summary: str):
    """Structure-like output: to ``--out`` with a summary, else the document on stdout."""
    out = _opts()["out"]
    text = interchange.dumps(doc)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
        click.echo(summary)
    else:
        click.echo(text, nl=False)


def _report(command: str, verdict: str, lines: list[str], details: dict | None = None,
            doc: dict | None = None):
    """Plain text, then the machine block; ends the command with its exit code."""
    rep = interchange.report_doc(command, verdict, lines, details)
    out = _opts()["out"]
    if out:
        # before printing, so a closed pipe cannot lose the file
        with open(out, "w") as fh:
            fh.write(interchange.dumps(doc if doc is not None else rep))
    for line in lines:
        click.echo(line)
    click.echo(f"verdict: {verdict}")
    click.echo(json.dumps(rep, sort_keys=True))
    expect = _opts()["expect"]
    if verdict == "inconclusive":
        sys.exit(EXIT_INCONCLUSIVE)
    if expect is not None and expect.lower() not in _aliases(verdict, details or {}):
        click.echo(f"expected {expect}, got {verdict}", err=True)
        sys.exit(EXIT_UNMET)
    sys.exit(0)


def _aliases(verdict: str, details: dict) -> set[str]:
    out = {verdict}
    if "winner" in details:
        out.add(details["winner"].lower())
    return out


def _load(path: str) -> dict:
    try:
        with open(path) as fh:
            return interchange.loads(fh.read())
    except OSError as e:
        raise click.BadParameter(f"cannot read {path}: {e.strerror}") from None
    except interchange.DocumentError as e:
        raise click.BadParameter(f"{path}: {e}") from None


def _structure(path: str):
    doc = _load(path)
    try:
        return interchange.structure_from_doc(doc)
    except interchange.DocumentError as e:
        raise click.BadParameter(f"{path}: {e}") from None


def _ca(path: str):
    s = _structure(path)
    if not isinstance(s, algebra.CaAtomStructure):
        raise click.BadParameter(f"{path}: expected a ca-structure document")
    return s


def _ra(path: str):
    s = _structure(path)
    if not isinstance(s, algebra.RaAtomStructure):
        raise click.BadParameter(f"{path}: expected an ra-structure document")
    return s


_BUILTIN_GRAPHS = {
    "edge": SimpleGraph.single_edge,
    "two-triangles": lambda: SimpleGraph.complete(3).disjoint_union(SimpleGraph.complete(3)).relabelled(),
}


def _graph(spec: str) -> SimpleGraph:
    """A builtin name (``edge``, ``two-triangles``, ``K<n>``, ``C<n>``) or a JSON file."""
    if spec in _BUILTIN_GRAPHS:
        return _BUILTIN_GRAPHS[spec]()
    if spec[:1] in "KC" and spec[1:].isdigit():
        k = int(spec[1:])
        return SimpleGraph.complete(k) if spec[0] == "K" else SimpleGraph.cycle(k)
    try:
        with open(spec) as fh:
            return constructions.graph_from_dict(json.load(fh))
    except OSError:
        raise click.BadParameter(f"{spec} is neither a builtin graph nor a readable file") from None
    except (ValueError, KeyError, TypeError, algebra.StructureError) as e:
        raise click.BadParameter(f"{spec}: malformed graph: {e}") from None


# ---------------------------------------------------------------- group


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@_global_options
@click.pass_context
def main(ctx, out, expect, seed, jobs):
    """Finite algebraic structures and the games that decide their representability."""
    given = {"out": out, "expect": expect, "seed": seed, "jobs": jobs}
    ctx.obj = {k: _DEFAULTS[k] if v is None else v for k, v in given.items()}


# ---------------------------------------------------------------- builders


@main.command()
@click.option("--n", type=int, default=3, show_default=True)
@click.option("--greens", type=int, default=None, help="Number of green tints (default n+1).")
@click.option("--reds", type=int, default=None, help="Number of red indices (default n).")
@click.option("--copies", type=int, default=1, show_default=True)
@common
def rainbow(n, greens, reds, copies):
    """Finite rainbow frame with tints 1..greens and reds 0..reds-1."""
    greens = n + 1 if greens is None else greens
    reds = n if reds is None else reds
    try:
        sig = RainbowSignature(n=n, tints=tuple(range(1, greens + 1)), reds=tuple(range(reds)),
                               copies=copies)
        s = constructions.build_rainbow(sig)
    except algebra.StructureError as e:
        raise click.BadParameter(str(e)) from None
    _emit_doc(interchange.structure_to_doc(s), f"rainbow frame with {s.atom_count} atoms")


@main.command("rainbow-znn")
@click.option("--a-range", nargs=2, type=int, default=(-4, 4), show_default=True)
@click.option("--b-range", nargs=2, type=int, default=(0, 2), show_default=True)
@click.option("--n", type=int, default=3, show_default=True)
@common
def rainbow_znn(a_range, b_range, n):
    """Finite truncation of the order-restricted rainbow frame."""
    try:
        s = constructions.build_rainbow(RainbowSignature.ordered(*a_range, *b_range, n=n))
    except algebra.StructureError as e:
        raise click.BadParameter(str(e)) from None
    _emit_doc(interchange.structure_to_doc(s), f"order-restricted rainbow frame with {s.atom_count} atoms")


@main.command()
@click.option("--in", "src", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--copies", type=int, required=True)
@common
def split(src, copies):
    """Split every red of a rainbow frame into COPIES copies."""
    s = _ca(src)
    if not isinstance(s, constructions.RainbowStructure):
        raise click.BadParameter(f"{src}: not a rainbow frame")
    try:
        b = constructions.split_reds(s, copies)
    except algebra.StructureError as e:
        raise click.BadParameter(str(e)) from None
    _emit_doc(interchange.structure_to_doc(b), f"split frame with {b.atom_count} atoms")


@main.command("theta-check")
@click.option("--in", "src", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--copies", type=int, default=2, show_default=True)
@common
def theta_check(src, copies):
    """Check that taking copies embeds the frame into its red splitting."""
    s = _ca(src)
    if not isinstance(s, constructions.RainbowStructure):
        raise click.BadParameter(f"{src}: not a rainbow frame")
    try:
        _, rep = constructions.theta_embedding(s, constructions.split_reds(s, copies))
    except algebra.StructureError as e:
        raise click.BadParameter(str(e)) from None
    lines = [f"base atoms {rep.base_atoms}, split atoms {rep.split_atoms}, image total {rep.image_total}",
             f"injective {rep.injective}, partition {rep.partition}, lifting {rep.lifting}"]
    lines += rep.violations[:10]
    _report("theta-check", "yes" if rep.ok else "no", lines,
            {"injective": rep.injective, "partition": rep.partition, "lifting": rep.lifting,
             "violations": rep.violations})


@main.command()
@click.option("--graph", "graph", required=True, help="edge, two-triangles, K<n>, C<n> or a JSON file.")
@click.option("--colours", type=int, default=1, show_default=True)
@common
def monk(graph, colours):
    """Monk relation-algebra frame of a graph."""
    s = constructions.build_monk_ra(_graph(graph), colours)
    _emit_doc(interchange.structure_to_doc(s), f"Monk frame with {s.count} atoms")


@main.command()
@click.option("--in", "src", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--m", type=int, default=3, show_default=True)
@common
def matrices(src, m):
    """Basic matrices of a relation-algebra frame as an m-dimensional cylindric frame."""
    ra = _ra(src)
    try:
        s = constructions.basic_matrices(ra, m)
    except algebra.StructureError as e:
        raise click.BadParameter(str(e)) from None
    if not s.cylindric_basis:
        for v in s.basis_report.violations[:10]:
            click.echo(v, err=True)
    _emit_doc(interchange.structure_to_doc(s),
              f"{s.count} basic matrices, cylindric basis {s.cylindric_basis}")


@main.command()
@click.option("--l", "l_", type=int, default=2, show_default=True)
@click.option("--i-size", type=int, default=6, show_default=True)
@click.option("--copies", type=int, default=3, show_default=True, help="Number of rows of atoms.")
@click.option("--all-p", is_flag=True, help="Also admit atoms whose P lies outside W.")
@common
def blur(l_, i_size, copies, all_p):
    """Blur relation-algebra frame."""
    try:
        s = constructions.build_blur_structure(constructions.BlurParams(l_, i_size, copies, all_p))
    except algebra.StructureError as e:
        raise click.BadParameter(str(e)) from None
    _emit_doc(interchange.structure_to_doc(s), f"blur frame with {s.count} atoms")


@main.command()
@click.option("--n", type=int, default=3, show_default=True)
@click.option("--base", type=int, default=3, show_default=True)
@common
def fullset(n, base):
    """Frame of n-tuples over a base of the given size."""
    try:
        s = constructions.build_full_set_structure(n, base)
    except algebra.StructureError as e:
        raise click.BadParameter(str(e)) from None
    _emit_doc(interchange.structure_to_doc(s), f"full set frame with {s.count} atoms")


@main.command()
@click.option("--graph", "graph", required=True)
@common
def chromatic(graph):
    """Exact chromatic number."""
    g = _graph(graph)
    r = constructions.chromatic_number(g)
    if isinstance(r, Inconclusive):
        _report("chromatic", "inconclusive", [r.reason])
    _report("chromatic", "yes", [f"chromatic number {r}"], {"chromatic_number": r})


# ---------------------------------------------------------------- games and bases


def _rounds(value: str) -> int | None:
    if value == "omega":
        return None
    try:
        r = int(value)
    except ValueError:
        raise click.BadParameter("rounds must be a natural number or 'omega'") from None
    if r < 0:
        raise click.BadParameter("rounds must be non-negative")
    return r


@main.command()
@click.option("--in", "src", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--variant", type=click.Choice(["G", "F"]), default="G", show_default=True)
@click.option("--m", type=int, required=True)
@click.option("--rounds", default="omega", show_default=True)
@click.option("--overwrite", type=click.Choice(["when-full", "never", "always"]), default="when-full",
              show_default=True)
@click.option("--yellows", type=click.Choice(["exact", "dominant"]), default="exact", show_default=True)
@click.option("--no-verify", is_flag=True, help="Skip replaying the certificate.")
@common
def solve(src, variant, m, rounds, overwrite, yellows, no_verify):
    """Solve an atomic game; --out receives the strategy certificate."""
    s = _ca(src)
    try:
        spec = games.GameSpec(variant, m, _rounds(rounds), s, overwrite, yellows)
    except ValueError as e:
        raise click.BadParameter(str(e)) from None
    t = time.monotonic()
    o = games.solve_game(spec, _budget_ms())
    if isinstance(o, Inconclusive):
        _report("solve", "inconclusive", [o.reason], {"spec": spec.describe()})
    lines = [f"{o.winner} wins {variant} with {m} nodes, rounds {rounds}"]
    details = {"winner": o.winner, "spec": spec.describe(), "stats": o.stats,
               "seconds": round(time.monotonic() - t, 3)}
    if not no_verify:
        ok = games.verify_strategy(spec, o.certificate)
        lines.append(f"certificate verified: {ok}")
        details["verified"] = ok
    if o.winner == games.FORALL and isinstance(s, constructions.RainbowStructure) and s.sig.order_rule:
        reds = games.forced_red_indices(spec, o.certificate)
        lines.append(f"forced red indices along a forcing path: {reds}")
        details["forced_reds"] = reds
    verdict = "yes" if o.winner == games.EXISTS else "no"
    _report("solve", verdict, lines, details, interchange.strategy_to_doc(o.certificate, s))


@main.command()
@click.argument("strategy", type=click.Path(exists=True, dir_okay=False))
@click.option("--in", "src", required=True, type=click.Path(exists=True, dir_okay=False))
@common
def verify(strategy, src):
    """Replay a strategy certificate against its structure."""
    s = _ca(src)
    doc = _load(strategy)
    try:
        cert = interchange.strategy_from_doc(doc, s)
        d = cert.spec
        rounds = None if d["rounds"] == "omega" else int(d["rounds"])
        spec = games.GameSpec(d["variant"], d["m"], rounds, s, d.get("overwrite", "when-full"),
                              d.get("yellows", "exact"))
    except interchange.DocumentError as e:
        raise click.BadParameter(f"{strategy}: {e}") from None
    except (KeyError, ValueError) as e:
        raise click.BadParameter(f"{strategy}: bad game description: {e}") from None
    ok = games.verify_strategy(spec, cert)
    _report("verify", "yes" if ok else "no", [f"{cert.winner} certificate valid: {ok}"],
            {"winner": cert.winner, "valid": ok})


@main.command()
@click.option("--in", "src", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--m", type=int, required=True)
@click.option("--overwrite", type=click.Choice(["when-full", "never", "always"]), default="when-full",
              show_default=True)
@common
def basis(src, m, overwrite):
    """Search for an m-dimensional basis."""
    s = _ca(src)
    schedule = _opts()["seed"] or None
    b = bases.find_basis(s, m, overwrite, budget_ms=_budget_ms(), schedule=schedule)
    if isinstance(b, Inconclusive):
        _report("basis", "inconclusive", [b.reason])
    if b is None:
        _report("basis", "no", [f"no {m}-dimensional basis"])
    _report("basis", "yes", [f"{m}-dimensional basis with {len(b)} networks"], {"size": len(b)})


@main.command()
@click.option("--in", "src", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--m", type=int, required=True)
@click.option("--lambda-max", type=int, default=2, show_default=True)
@common
def hyperbasis(src, m, lambda_max):
    """Search for an m-dimensional hyperbasis with at most LAMBDA_MAX labels."""
    s = _ca(src)
    h = bases.find_hyperbasis(s, m, lambda_max)
    if isinstance(h, Inconclusive):
        _report("hyperbasis", "inconclusive", [h.reason])
    if isinstance(h, bases.NoneAtBound):
        _report("hyperbasis", "no-at-bound", [f"none with at most {h.lambda_max} labels: {h.reason}"])
    _report("hyperbasis", "yes",
            [f"{m}-dimensional hyperbasis with {len(h.members)} hypernetworks over {h.alphabet} labels"],
            {"size": len(h.members), "labels": h.alphabet})


@main.command()
@click.option("--in", "src", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--m", type=int, required=True)
@common
def square(src, m):
    """Decide m-square representability of the complex algebra."""
    s = _ca(src)
    try:
        ok = bases.decide_m_square(s, m)
    except RuntimeError as e:
        _report("square", "inconclusive", [str(e)])
    _report("square", "yes" if ok else "no",
            [f"{'' if ok else 'not '}{m}-square representable"])


# ---------------------------------------------------------------- terms


def _env(pairs, s) -> dict:
    env = {}
    for item in pairs:
        name, _, atoms = item.partition("=")
        if not name or not _:
            raise click.BadParameter(f"--var expects NAME=atom,atom,..., got {item!r}")
        ids = []
        for a in filter(None, re.split(r",(?![^()]*\))", atoms)):
            if a.isdigit():
                ids.append(int(a))
            else:
                try:
                    ids.append(s.atom(a))
                except KeyError:
                    raise click.BadParameter(f"unknown atom {a!r}") from None
        env[name] = ids
    return env


@main.command("eval")
@click.option("--in", "src", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--term", required=True)
@click.option("--var", "vars_", multiple=True, help="NAME=atom,atom,... (ids or names).")
@common
def eval_cmd(src, term, vars_):
    """Evaluate a term in the complex algebra."""
    s = _ca(src)
    try:
        v = algebra.eval_term(term, _env(vars_, s), s)
    except (algebra.TermSyntaxError, algebra.EvalError) as e:
        raise click.BadParameter(str(e)) from None
    names = [s.names[a] for a in v.ids()]
    _report("eval", "yes", [f"{len(names)} atoms"] + names, {"atoms": v.ids()})


@main.command("check-leq")
@click.option("--in", "src", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--lhs", required=True)
@click.option("--rhs", required=True)
@click.option("--mode", type=click.Choice(["atoms-only", "exhaustive", "sampled"]), default="atoms-only",
              show_default=True)
@click.option("--samples", type=int, default=1000, show_default=True)
@click.option("--neat", type=int, default=None, help="Read variables in the neat reduct to this dimension.")
@common
def check_leq(src, lhs, rhs, mode, samples, neat):
    """Decide LHS <= RHS over the complex algebra."""
    s = _ca(src)
    m = ("sampled", _opts()["seed"], samples) if mode == "sampled" else mode
    try:
        v = algebra.check_inequality(s, lhs, rhs, m, neat=neat)
    except (algebra.TermSyntaxError, algebra.EvalError, algebra.ModeError) as e:
        raise click.BadParameter(str(e)) from None
    lines = [f"checked {v.checked} assignments"]
    details = {"checked": v.checked}
    if not v.holds:
        cex = {k: [s.names[a] for a in x.ids()] for k, x in v.counterexample.items()}
        lines.append(f"counterexample {cex}")
        details["counterexample"] = cex
    _report("check-leq", "yes" if v.holds else "no", lines, details)


@main.command()
@click.option("--g1", required=True)
@click.option("--g2", required=True)
@click.option("--pebbles", type=int, required=True)
@click.option("--rounds", type=int, required=True)
@common
def ef(g1, g2, pebbles, rounds):
    """Pebble game between two graphs; the universal player moves in G1."""
    w = games.ef_pebble_game(_graph(g1), _graph(g2), pebbles, rounds)
    _report("ef", "yes" if w == games.EXISTS else "no", [f"{w} wins"], {"winner": w})


# ---------------------------------------------------------------- interchange


@main.command()
@click.option("--in", "src", required=True, type=click.Path(exists=True, dir_okay=False))
@common
def export(src):
    """Re-emit a structure document in canonical form."""
    s = _structure(src)
    _emit_doc(interchange.structure_to_doc(s), f"hash {interchange.structure_hash(s)}")


@main.command("import")
@click.argument("src", type=click.Path(exists=True, dir_okay=False))
@click.option("--structure", type=click.Path(exists=True, dir_okay=False),
              help="Structure a network or strategy document refers to.")
@common
def import_cmd(src, structure):
    """Read a document, validate it and summarize."""
    doc = _load(src)
    kind = doc["kind"]
    if kind in ("ca-structure", "ra-structure"):
        s = _structure(src)
        if isinstance(s, constructions.RainbowStructure):
            rep, count = algebra.ValidationReport(), s.atom_count
        elif isinstance(s, algebra.CaAtomStructure):
            rep, count = algebra.validate_ca_frame(s), s.count
        else:
            rep, count = algebra.validate_ra_frame(s), s.count
        lines = [f"{kind} with {count} atoms, hash {interchange.structure_hash(s)}"] + rep.violations[:10]
        _report("import", "yes" if rep.ok else "no", lines, {"atoms": count, "violations": rep.violations})
    if kind == "report":
        click.echo(interchange.dumps(doc), nl=False)
        return
    if structure is None:
        raise click.UsageError(f"a {kind} document needs --structure")
    s = _structure(structure)
    try:
        if kind == "network":
            net = interchange.network_from_doc(doc, s)
            ok = is_valid_network(net)
            _report("import", "yes" if ok else "no", [f"network on {len(net.nodes)} nodes, valid {ok}"])
        else:
            cert = interchange.strategy_from_doc(doc, s)
            _report("import", "yes", [f"{cert.winner} certificate with {len(cert.positions)} positions"])
    except interchange.DocumentError as e:
        raise click.BadParameter(f"{src}: {e}") from None


if __name__ == "__main__":
    main()
