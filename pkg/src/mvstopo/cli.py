"""``mvstopo`` command line.

Every subcommand builds a :class:`~mvstopo.report.Report` and optionally a
result document.  Exit status: 0 when every clause passed, 1 when a clause
failed, 2 for unreadable input, schema errors, inputs outside a
construction's hypotheses, and usage errors.

Output: ``--format text`` (default) prints the report and then the result
document; ``--format json`` prints ``{"report": ..., "result": ...}``;
``--format dot`` prints a graph and sends the report to stderr.  With
``--out`` the result (or graph) goes to that file and only the report is
printed.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

from . import character, corpus, documents as docs, dot, mvs, qmetric, quniform, topology
from .errors import ClauseFailure, InputError
from .report import Report

__all__ = ["main", "build_parser", "run"]


@dataclass
class Outcome:
    report: Report
    result: Any = None
    graph: str | None = None


class UsageError(InputError):
    pass


def _path(p: str) -> Path:
    return Path(p)


def _load(p: str):
    return docs.load_json(p), _path(p).parent


def _space(p: str):
    doc, base = _load(p)
    return docs.space_from_doc(doc, base)


def _topology_graph(T: topology.FiniteTopology, kind: str) -> str:
    return dot.preorder_dot(T) if kind == "preorder" else dot.open_lattice_dot(T)


def _topology_facts(rep: Report, T: topology.FiniteTopology) -> None:
    rep.facts["points"] = T.n
    rep.facts["open_sets"] = len(T.opens)
    rep.facts["opens"] = [[T.labels[p] for p in topology.bits(v)] for v in T.opens]


def _classification(M: mvs.MvsTable) -> str:
    c = mvs.classify(M)
    words = [("commutative", c["commutative"]), ("atom-free", c["atom_free"]),
             ("strictly atom-free", c["strictly_atom_free"])]
    return ", ".join(w if ok else f"not {w}" for w, ok in words)


# -- algebra -----------------------------------------------------------------------

def cmd_check_mvs(a) -> Outcome:
    doc, _ = _load(a.file)
    labels, e, table = docs.mvs_raw(doc)
    rep = Report(f"check-mvs {a.file}")
    rep.facts["order"] = len(labels)
    if len(labels) < 2:
        rep.check("an MVS has at least two elements", False, len(labels))
        return Outcome(rep)
    wit = mvs.axiom_witnesses(table, e)
    text = {"M1": "M1: + is associative", "M2": "M2: the neutral element is an identity",
            "M3": "M3: a+b = e only for a = b = e", "M4": "M4: non-neutral pairs have a common non-neutral left part"}
    for tag, w in wit.items():
        rep.check(text[tag], w is None, None if w is None else [labels[i] for i in w])
    if not rep.ok:
        return Outcome(rep)
    M = mvs.MvsTable(labels, e, table)
    rep.facts.update(mvs.classify(M))
    rep.facts["summary"] = _classification(M)
    return Outcome(rep, docs.mvs_to_doc(M))


def cmd_enumerate_mvs(a) -> Outcome:
    k = a.order
    if not 2 <= k <= mvs.MAX_ENUM_ORDER:
        raise UsageError(f"--order must be in 2..{mvs.MAX_ENUM_ORDER}")
    rep = Report(f"enumerate-mvs order {k}")
    found = list(mvs.enumerate_mvs(k, a.up_to_iso))
    rep.facts["count"] = len(found)
    rep.facts["up_to_iso"] = a.up_to_iso
    rep.facts["atom_free"] = sum(mvs.is_atom_free(M) for M in found)
    rep.facts["strictly_atom_free"] = sum(mvs.is_strictly_atom_free(M) for M in found)
    for M in found:
        rep.check("enumerated table re-validates", mvs.mvs_violation(M.table, M.neutral) is None)
    if k <= 4:
        brute = list(mvs.enumerate_mvs_bruteforce(k, a.up_to_iso))
        rep.facts["count_bruteforce"] = len(brute)
        rep.check("backtracking and brute-force enumerations agree",
                  set(M.table for M in found) == set(M.table for M in brute),
                  [len(found), len(brute)])
    else:
        rep.note("brute-force cross-check skipped above order 4")
    return Outcome(rep, [docs.mvs_to_doc(M) for M in found])


# -- topology ------------------------------------------------------------------------

def cmd_topology(a) -> Outcome:
    doc, _ = _load(a.file)
    T = docs.topology_from_doc(doc)
    rep = Report(f"topology {a.file}")
    _topology_facts(rep, T)
    closure = topology.generate_topology_closure(T.n, T.opens)
    rep.check("minimal-neighbourhood form and closure fixpoint give the same open sets",
              closure == frozenset(T.opens))
    return Outcome(rep, docs.topology_to_doc(T), _topology_graph(T, a.dot_kind))


def cmd_nbhd_check(a) -> Outcome:
    doc, _ = _load(a.file)
    points, B = docs.nbhd_from_doc(doc)
    rep = Report(f"nbhd-check {a.file}")
    f = topology.validate_nbhd_system(B)
    rep.check("B1: every member contains its point", f.b1, f.witnesses.get("B1"))
    rep.check("B2: two members at x contain a third", f.b2, f.witnesses.get("B2"))
    rep.check("B3: every member contains one that is a neighbourhood of each of its points",
              f.b3, f.witnesses.get("B3"))
    rep.facts["open_system"] = f.b3_open
    if not rep.ok:
        return Outcome(rep)
    T = topology.topology_of(B, points)
    _topology_facts(rep, T)
    return Outcome(rep, docs.topology_to_doc(T), _topology_graph(T, a.dot_kind))


def cmd_enumerate_topologies(a) -> Outcome:
    top = a.order
    if not 1 <= top <= 4:
        raise UsageError("--order must be in 1..4")
    rep = Report(f"enumerate-topologies up to {top} points")
    counts = {}
    for n in range(1, top + 1):
        by_sub = topology.enumerate_topologies_by_subbase(n)
        by_clo = topology.enumerate_topologies_by_closure(n)
        counts[n] = len(by_sub)
        rep.check("subbase and closure enumerations agree",
                  {frozenset(T.opens) for T in by_sub} == by_clo, n)
        for T in by_sub:
            rep.check("enumerated topology re-validates",
                      topology.topology_from_opens(n, T.opens) == T)
    rep.facts["counts"] = counts
    return Outcome(rep, {str(n): c for n, c in counts.items()})


# -- quasimetric spaces ------------------------------------------------------------------

def cmd_check_qmf(a) -> Outcome:
    doc, base = _load(a.file)
    points, M, d = docs.space_raw(doc, base)
    rep = Report(f"check-qmf {a.file}")
    n = len(points)
    diag = [points[x] for x in range(n) if d[x][x] != M.neutral]
    rep.check("f2: f(x,x) = e", not diag, diag)
    if diag:
        return Outcome(rep)
    bad = qmetric.qm_violation(M, d)
    rep.check("f1: f(x,z) ⊴ f(x,y) + f(y,z)", bad is None,
              None if bad is None else [points[i] for i in bad.witness])
    if bad is not None:
        return Outcome(rep)
    Q = qmetric.QmSpace(points, M, d)
    rep.facts["mvs"] = _classification(M)
    rep.facts["symmetric"] = Q.symmetric
    rep.facts["strict"] = Q.strict
    T = qmetric.induced_topology(Q, rep)
    _topology_facts(rep, T)
    return Outcome(rep, docs.space_to_doc(Q), _topology_graph(T, a.dot_kind))


def cmd_alexandrov(a) -> Outcome:
    doc, _ = _load(a.file)
    T = docs.topology_from_doc(doc)
    rep = Report(f"alexandrov {a.file}")
    Q = qmetric.alexandrov_metrize(T, rep)
    return Outcome(rep, docs.space_to_doc(Q), _topology_graph(T, a.dot_kind))


def cmd_pullback(a) -> Outcome:
    Q1 = _space(a.space)
    mdoc, _ = _load(a.map)
    points, g = docs.map_from_doc(mdoc, Q1.points)
    rep = Report(f"pullback {a.space} along {a.map}")
    Q2 = qmetric.pullback(Q1, g, points, rep)
    return Outcome(rep, docs.space_to_doc(Q2), _topology_graph(qmetric.induced_topology(Q2), a.dot_kind))


def cmd_restrict(a) -> Outcome:
    Q = _space(a.space)
    labels = [s for s in a.subset.split(",") if s]
    A = topology.mask(Q.index(p) for p in labels)
    rep = Report(f"restrict {a.space} to {{{','.join(labels)}}}")
    sub = qmetric.restrict(Q, A, rep)
    return Outcome(rep, docs.space_to_doc(sub), _topology_graph(qmetric.induced_topology(sub), a.dot_kind))


def cmd_product(a) -> Outcome:
    if a.spaces:
        Qs = [_space(p) for p in a.spaces]
        rep = Report("product " + " ".join(a.spaces))
        P = qmetric.product(Qs, rep)
        return Outcome(rep, docs.space_to_doc(P), _topology_graph(qmetric.induced_topology(P), a.dot_kind))
    rep = Report(f"product corpus seed={a.seed} count={a.count}")
    for Q1, Q2 in corpus.random_pairs(a.seed, a.count):
        qmetric.product([Q1, Q2], rep)
    rep.facts["pairs"] = a.count
    return Outcome(rep)


def cmd_glue(a) -> Outcome:
    doc, base = _load(a.file)
    T, pieces = docs.glue_from_doc(doc, base)
    rep = Report(f"glue {a.file}")
    g = qmetric.glue(T, pieces, rep)
    return Outcome(rep, docs.space_to_doc(g.space), _topology_graph(T, a.dot_kind))


def cmd_closed_balls(a) -> Outcome:
    if a.file:
        Q = _space(a.file)
        rep = Report(f"closed-balls {a.file}")
        qmetric.closed_ball_equivalence(Q, rep)
        return Outcome(rep)
    rep = Report(f"closed-balls corpus seed={a.seed} count={a.count}")
    for Q in corpus.random_spaces(a.seed, a.count):
        qmetric.closed_ball_equivalence(Q, rep)
    rep.facts["spaces"] = a.count
    return Outcome(rep)


# -- quasiuniformities --------------------------------------------------------------------

def _base_flags(rep: Report, names, members) -> dict:
    f = quniform.check_base(members)
    uniq = list(dict.fromkeys(members))
    pick = {m: names[members.index(m)] for m in uniq}

    def named(w):
        return None if w is None else [pick[uniq[i]] for i in w]

    rep.check("UB1: every member contains the diagonal", f["UB1"], named(f["witnesses"].get("UB1")))
    rep.check("UB2: the meet of two members contains a member", f["UB2"], named(f["witnesses"].get("UB2")))
    rep.check("UB3: every member contains some V∘V", f["UB3"], named(f["witnesses"].get("UB3")))
    return f


def cmd_qu_base(a) -> Outcome:
    doc, _ = _load(a.file)
    points, names, members, u0 = docs.base_from_doc(doc)
    rep = Report(f"qu-base {a.file}")
    f = _base_flags(rep, names, members)
    rep.facts["members"] = len(set(members))
    if rep.ok:
        base = quniform.validate_base(members)
        rep.facts["uniformity"] = quniform.check_uniformity(base)
    else:
        rep.facts["symmetric"] = f["symmetric"]
    return Outcome(rep, docs.base_to_doc(points, members, names, u0))


def cmd_base_topology(a) -> Outcome:
    doc, _ = _load(a.file)
    points, names, members, _ = docs.base_from_doc(doc)
    rep = Report(f"base-topology {a.file}")
    _base_flags(rep, names, members)
    if not rep.ok:
        return Outcome(rep)
    T = quniform.base_topology(quniform.validate_base(members), points, rep)
    _topology_facts(rep, T)
    return Outcome(rep, docs.topology_to_doc(T), _topology_graph(T, a.dot_kind))


def cmd_base_from_qmf(a) -> Outcome:
    Q = _space(a.file)
    rep = Report(f"base-from-qmf {a.file}")
    qb = quniform.base_from_qm(Q, rep)
    members = [qb.by_value[m] for m in Q.mvs.star]
    names = [f"U_{Q.mvs.labels[m]}" for m in Q.mvs.star]
    return Outcome(rep, docs.base_to_doc(Q.points, members, names))


# -- characterization -------------------------------------------------------------------

def cmd_full_convex(a) -> Outcome:
    Q = _space(a.file)
    rep = Report(f"full-convex {a.file}")
    fc = character.full_convex_report(Q)
    L, P = Q.mvs.labels, Q.points
    rep.facts["full"] = fc.full
    rep.facts["missing_values"] = [L[m] for m in fc.missing]
    rep.facts["convex"] = fc.convex
    rep.facts["unrealized_decompositions"] = fc.unrealized_count
    rep.facts["unrealized_examples"] = [
        {"x": P[x], "y": P[y], "split": [L[m1], L[m2]]} for x, y, m1, m2 in fc.unrealized[:20]]
    return Outcome(rep)


def cmd_embed_full(a) -> Outcome:
    Q = _space(a.file)
    rep = Report(f"embed-full {a.file}")
    inc = character.embed_full(Q, rep)
    return Outcome(rep, docs.space_to_doc(inc.space))


def cmd_convexify(a) -> Outcome:
    Q = _space(a.file)
    rep = Report(f"convexify {a.file}")
    res = character.convexify_until(Q, a.max_stages, a.max_points, rep)
    rep.facts["stages"] = res.stages
    rep.facts["points"] = res.space.n
    rep.facts["converged"] = res.converged
    if res.partial:
        rep.facts["partial"] = True
        rep.note(f"partial result: {res.reason}")
    return Outcome(rep, docs.space_to_doc(res.space))


def cmd_entourage_mvs(a) -> Outcome:
    Q = _space(a.file)
    rep = Report(f"entourage-mvs {a.file}")
    em = character.entourage_mvs(Q, rep)
    names = [f"U{i}" for i in range(len(em.members))]
    rep.facts["h"] = {Q.mvs.labels[m]: names[em.hom(m)] for m in range(Q.mvs.k)}
    rep.facts["isomorphic_to_input_mvs"] = mvs.are_isomorphic(em.mvs, Q.mvs)
    V = mvs.MvsTable(tuple(names), em.mvs.neutral, em.mvs.table)
    result = {"mvs": docs.mvs_to_doc(V),
              "base": docs.base_to_doc(Q.points, em.members[1:], names[1:], em.u0)}
    return Outcome(rep, result, dot.inclusion_dot(em.members, names))


def cmd_metrize_from_base(a) -> Outcome:
    doc, _ = _load(a.file)
    points, names, members, u0 = docs.base_from_doc(doc)
    if u0 is None:
        u0 = quniform.Entourage.diagonal(len(points))
    rep = Report(f"metrize-from-base {a.file}")
    _base_flags(rep, names, members)
    if not rep.ok:
        return Outcome(rep)
    mt = character.metrize_from_base(points, u0, members, rep)
    _topology_facts(rep, mt.topology)
    return Outcome(rep, docs.space_to_doc(mt.space), _topology_graph(mt.topology, a.dot_kind))


def cmd_roundtrip(a) -> Outcome:
    Q = _space(a.file)
    rep = Report(f"roundtrip {a.file}")
    res = character.roundtrip(Q, a.max_stages, a.max_points, rep)
    rep.facts["complete"] = res.complete
    return Outcome(rep, docs.space_to_doc(res.final) if res.complete else None)


# -- parser and driver --------------------------------------------------------------------

def _positive(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--format", choices=("text", "json", "dot"), default="text")
    p.add_argument("--out", help="write the result document (or graph) here")
    p.add_argument("--max-stages", type=_positive, default=character.DEFAULT_MAX_STAGES)
    p.add_argument("--max-points", type=_positive, default=character.DEFAULT_MAX_POINTS)
    p.add_argument("--seed", type=int, default=0, help="seed for the random corpus")
    p.add_argument("--count", type=_positive, default=200, help="corpus size")
    p.add_argument("--up-to-iso", action="store_true")
    p.add_argument("--dot-kind", choices=("lattice", "preorder"), default="lattice",
                   help="graph drawn for topologies")
    return p


COMMANDS: dict[str, tuple[Callable, str, list]] = {
    "check-mvs": (cmd_check_mvs, "check the MVS axioms and classify", [("file",)]),
    "check-qmf": (cmd_check_qmf, "check a quasimetric and its induced topology", [("file",)]),
    "topology": (cmd_topology, "read a topology (opens or subbase)", [("file",)]),
    "nbhd-check": (cmd_nbhd_check, "check a neighbourhood system", [("file",)]),
    "alexandrov": (cmd_alexandrov, "metrize a finite topology", [("file",)]),
    "pullback": (cmd_pullback, "pull a space back along a map", [("space",), ("map",)]),
    "restrict": (cmd_restrict, "restrict a space to a subset", [("space",), ("--subset", {"required": True})]),
    "product": (cmd_product, "product of spaces, or a seeded corpus when no files are given",
                [("spaces", {"nargs": "*"})]),
    "glue": (cmd_glue, "glue local quasimetrics of an open cover", [("file",)]),
    "closed-balls": (cmd_closed_balls, "closed-ball system check (file or seeded corpus)",
                     [("file", {"nargs": "?"})]),
    "qu-base": (cmd_qu_base, "check a quasiuniform base", [("file",)]),
    "base-topology": (cmd_base_topology, "topology of a quasiuniform base", [("file",)]),
    "base-from-qmf": (cmd_base_from_qmf, "sublevel base of a quasimetric", [("file",)]),
    "full-convex": (cmd_full_convex, "fullness and convexity of a space", [("file",)]),
    "embed-full": (cmd_embed_full, "embed into a full space", [("file",)]),
    "convexify": (cmd_convexify, "bounded convexification", [("file",)]),
    "entourage-mvs": (cmd_entourage_mvs, "MVS of sublevel entourages", [("file",)]),
    "metrize-from-base": (cmd_metrize_from_base, "quasimetric from an entourage base", [("file",)]),
    "roundtrip": (cmd_roundtrip, "embed, convexify, build the entourage MVS, metrize back", [("file",)]),
    "enumerate-mvs": (cmd_enumerate_mvs, "enumerate MVS tables of one order",
                      [("--order", {"type": int, "required": True})]),
    "enumerate-topologies": (cmd_enumerate_topologies, "count topologies on up to n points",
                             [("--order", {"type": int, "default": 4})]),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mvstopo", description="Finite metric value sets, quasimetrics and their topologies.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _common()
    for name, (fn, help_text, args) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_text, parents=[common])
        for arg in args:
            sp.add_argument(arg[0], **(arg[1] if len(arg) > 1 else {}))
        sp.set_defaults(func=fn)
    return parser


def run(argv: list[str] | None = None) -> tuple[int, Outcome | None]:
    try:
        args = build_parser().parse_args(argv)
        return _execute(args)
    except UsageError as exc:
        print(f"mvstopo: usage error: {exc}", file=sys.stderr)
        return 2, None


def _execute(args) -> tuple[int, Outcome | None]:
    try:
        outcome = args.func(args)
    except ClauseFailure as exc:
        outcome = Outcome(exc.report if exc.report is not None else Report(args.command))
        if exc.report is None:
            outcome.report.clauses.append(exc.clause)
    except InputError as exc:
        print(f"mvstopo: error: {exc}", file=sys.stderr)
        return 2, None
    if args.format == "dot" and outcome.graph is None:
        print(f"mvstopo: usage error: {args.command} has no graph output", file=sys.stderr)
        return 2, None
    _emit(args, outcome)
    return (0 if outcome.report.ok else 1), outcome


def _emit(args, outcome: Outcome) -> None:
    rep = outcome.report
    if args.format == "dot":
        print(rep.to_text(), end="", file=sys.stderr)
        if args.out:
            Path(args.out).write_text(outcome.graph, encoding="utf-8")
        else:
            sys.stdout.write(outcome.graph)
        return
    if args.out and outcome.result is not None:
        Path(args.out).write_text(docs.dumps(outcome.result), encoding="utf-8")
    if args.format == "json":
        body = {"report": rep.to_dict()}
        if not args.out:
            body["result"] = outcome.result
        sys.stdout.write(json.dumps(body, indent=2, ensure_ascii=False) + "\n")
        return
    sys.stdout.write(rep.to_text())
    if outcome.result is not None and not args.out:
        sys.stdout.write("result:\n" + docs.dumps(outcome.result))


def main(argv: list[str] | None = None) -> int:
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
