"""Full and convex spaces, and the entourage MVS built from them.

Pipeline, for a quasimetric space over an atom-free commutative ``M``:

1. :func:`embed_full` puts ``X`` inside ``X × M`` where every value of ``M``
   is attained.
2. :func:`convexify_until` adds midpoints ``(x, m2, m3, y)`` stage by stage
   until every decomposition ``m2 + m3 = d(x, y)`` is realized.  The limit
   construction is infinite, so only a bounded number of stages is tried.
3. :func:`entourage_mvs` turns the sublevel base ``{U_m}`` of a full convex
   space into an MVS of relations, ``U + V = ⋂{W : V∘U ⊆ W}``.
4. :func:`metrize_from_base` goes back: ``f(x, y) = U_{x,y}`` is a
   quasimetric into that MVS inducing the same topology.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import mvs as _mvs
from .errors import AxiomViolation, ClauseFailure, HypothesisError, InputError
from .mvs import MvsHom, MvsTable
from .qmetric import CLOSED, QmSpace, _ball_masks, canonical_metric_function, induced_topology
from .quniform import (
    Entourage,
    EntourageBase,
    base_from_qm,
    base_topology,
    compose,
    validate_base,
)
from .report import Report
from .topology import FiniteTopology, bits, mask

__all__ = [
    "FullConvexReport",
    "full_convex_report",
    "is_convex",
    "Inclusion",
    "embed_full",
    "convexify_stage",
    "ConvexifyResult",
    "convexify_until",
    "QStructure",
    "q_structure",
    "EntourageMvs",
    "entourage_mvs",
    "MetrizeResult",
    "metrize_from_base",
    "RoundtripResult",
    "roundtrip",
    "DEFAULT_MAX_STAGES",
    "DEFAULT_MAX_POINTS",
]

DEFAULT_MAX_STAGES = 3
DEFAULT_MAX_POINTS = 5000


@dataclass(frozen=True)
class FullConvexReport:
    full: bool
    missing: tuple[int, ...]
    convex: bool
    unrealized: tuple[tuple[int, int, int, int], ...]  # (x, y, m2, m3), possibly truncated
    unrealized_count: int


def _decompositions(M: MvsTable) -> dict[int, list[tuple[int, int]]]:
    out: dict[int, list[tuple[int, int]]] = {m: [] for m in range(M.k)}
    for a in range(M.k):
        for b in range(M.k):
            out[M.add(a, b)].append((a, b))
    return out


def _unrealized(M: MvsTable, D: np.ndarray, levels, first_only: bool):
    """Yield ``(a, b, pairs)`` where ``pairs`` have ``f(x,y) = a+b`` but no midpoint.

    Splits with a neutral part are skipped: ``z = x`` or ``z = y`` realizes them.
    """
    present = [bool(lv.any()) for lv in levels]
    for a in M.star:
        for b in M.star:
            target = D == M.add(a, b)
            if not target.any():
                continue
            if present[a] and present[b]:
                target &= ~((levels[a] @ levels[b]) > 0)
            bad = np.argwhere(target)
            if len(bad):
                yield a, b, bad
                if first_only:
                    return


def is_convex(Q: QmSpace) -> bool:
    """Convexity only; stops at the first unrealized split."""
    D = Q.array
    levels = [(D == a).astype(np.float32) for a in range(Q.mvs.k)]
    return next(_unrealized(Q.mvs, D, levels, first_only=True), None) is None


def full_convex_report(Q: QmSpace, limit: int | None = 1000) -> FullConvexReport:
    """Exhaustive surjectivity and midpoint scan.

    ``unrealized`` lists at most ``limit`` failing ``(x, y, m2, m3)``
    quadruples in ascending order; ``unrealized_count`` is exact.
    """
    M = Q.mvs
    D = Q.array
    attained = set(np.unique(D).tolist()) if Q.n else set()
    missing = tuple(m for m in range(M.k) if m not in attained)
    levels = [(D == a).astype(np.float32) for a in range(M.k)]
    found = []
    count = 0
    for a, b, bad in _unrealized(M, D, levels, first_only=False):
        count += len(bad)
        found.extend((int(x), int(y), a, b) for x, y in bad)
    found.sort()
    if limit is not None:
        found = found[:limit]
    return FullConvexReport(not missing, missing, count == 0, tuple(found), count)


@dataclass(frozen=True)
class Inclusion:
    """Result space plus the index of each original point inside it."""

    space: QmSpace
    image: tuple[int, ...]


def _require_commutative(M: MvsTable, what: str) -> None:
    if not _mvs.is_commutative(M):
        raise HypothesisError(f"{what} requires a commutative MVS")


def embed_full(Q: QmSpace, report: Report | None = None) -> Inclusion:
    """Embed into ``X × M`` with ``f*((x1,m1),(x2,m2)) = m1 + f(x1,x2) + m2`` off the diagonal."""
    M = Q.mvs
    _require_commutative(M, "the full embedding")
    rep = report if report is not None else Report("embed full")
    if Q.n == 0:
        rep.note("convention: f_M(m,n) = m+n off the diagonal, e on it")
        return Inclusion(canonical_metric_function(M), ())
    k, e = M.k, M.neutral
    pts = [(x, m) for x in range(Q.n) for m in range(k)]
    d = tuple(tuple(e if p == q else M.add(M.add(p[1], Q.d[p[0]][q[0]]), q[1]) for q in pts)
              for p in pts)
    labels = tuple(f"({Q.points[x]},{M.labels[m]})" for x, m in pts)
    big = QmSpace(labels, M, d)
    image = tuple(x * k + e for x in range(Q.n))
    rep.require("full embedding: restriction to X × {e} equals f",
                all(big.d[image[x]][image[y]] == Q.d[x][y] for x in range(Q.n) for y in range(Q.n)))
    rep.require("full embedding: f*((x,m),(x,e)) = m for every m",
                all(big.d[x * k + m][x * k + e] == m for x in range(Q.n) for m in range(k)))
    rep.require("full embedding: f* is surjective", _is_full(big))
    return Inclusion(big, image)


def _is_full(Q: QmSpace) -> bool:
    return Q.n > 0 and len(np.unique(Q.array)) == Q.mvs.k


def _stage_size(Q: QmSpace) -> int:
    counts = np.array([len(v) for _, v in sorted(_decompositions(Q.mvs).items())], dtype=np.int64)
    D = Q.array
    return int(Q.n + counts[D].sum() - counts[np.diag(D)].sum())


def convexify_stage(Q: QmSpace, report: Report | None = None) -> Inclusion:
    """One midpoint stage: carrier ``{(x1,m1,m2,x2) : m1+m2 = f(x1,x2)}``, ``(x,e,e,x)`` identified with ``x``.

    The new distance is ``m2 + f(x2, x3) + m3`` between ``(x1,m1,m2,x2)`` and
    ``(x3,m3,m4,x4)``, and ``e`` from a point to itself.  Old points keep
    their indices ``0..n-1``; new points follow in lexicographic order.
    """
    M = Q.mvs
    _require_commutative(M, "convexification")
    rep = report if report is not None else Report("convexify stage")
    e = M.neutral
    dec = _decompositions(M)
    quads = [(x, e, e, x) for x in range(Q.n)]
    for x in range(Q.n):
        for y in range(Q.n):
            if x == y:
                continue
            for a, b in sorted(dec[Q.d[x][y]]):
                quads.append((x, a, b, y))
    index = {q: i for i, q in enumerate(quads)}
    Q4 = np.array(quads, dtype=np.int64).reshape(len(quads), 4)
    table = np.array(M.table, dtype=np.int64)
    D = Q.array
    mid = D[Q4[:, 3][:, None], Q4[:, 0][None, :]]
    F = table[table[Q4[:, 2][:, None], mid], Q4[:, 1][None, :]]
    np.fill_diagonal(F, e)
    labels = list(Q.points)
    taken = set(labels)
    for x1, a, b, x2 in quads[Q.n:]:
        # a later stage can re-create the name of an earlier midpoint; prime it
        name = f"({Q.points[x1]},{M.labels[a]},{M.labels[b]},{Q.points[x2]})"
        while name in taken:
            name += "'"
        taken.add(name)
        labels.append(name)
    new = QmSpace(tuple(labels), M, tuple(map(tuple, F.tolist())))
    n = Q.n
    rep.require("convexify stage: distances between old points are unchanged",
                bool((F[:n, :n] == D).all()))
    missing = []
    for x in range(n):
        for y in range(n):
            for a, b in dec[Q.d[x][y]]:
                q = index.get((x, a, b, y), x if x == y else None)
                if q is None or F[x, q] != a or F[q, y] != b:
                    missing.append((x, y, a, b))
    rep.require("convexify stage: each decomposition of an old distance has a midpoint",
                not missing, missing[:20])
    return Inclusion(new, tuple(range(n)))


@dataclass(frozen=True)
class ConvexifyResult:
    space: QmSpace
    image: tuple[int, ...]
    stages: int
    converged: bool
    reason: str = ""

    @property
    def partial(self) -> bool:
        return not self.converged


def convexify_until(Q: QmSpace, max_stages: int = DEFAULT_MAX_STAGES,
                    max_points: int = DEFAULT_MAX_POINTS,
                    report: Report | None = None) -> ConvexifyResult:
    """Repeat :func:`convexify_stage` until convex; partial result when a budget is hit."""
    if max_stages < 0 or max_points < 1:
        raise InputError("budgets must be positive")
    _require_commutative(Q.mvs, "convexification")
    rep = report if report is not None else Report("convexify")
    current = Q
    was_full = _is_full(Q)
    for stage in range(max_stages + 1):
        if was_full:
            rep.require("convexify: a superset of a full space stays full", _is_full(current))
        if is_convex(current):
            return ConvexifyResult(current, tuple(range(Q.n)), stage, True)
        if stage == max_stages:
            return ConvexifyResult(current, tuple(range(Q.n)), stage, False,
                                   f"stage budget {max_stages} exhausted")
        size = _stage_size(current)
        if size > max_points:
            return ConvexifyResult(current, tuple(range(Q.n)), stage, False,
                                   f"next stage would have {size} points (ceiling {max_points})")
        current = convexify_stage(current, rep).space
    raise AssertionError("unreachable")


# -- entourage MVS ---------------------------------------------------------------

@dataclass
class QStructure:
    """Outcome of building ``(V, +)`` from ``U0`` and a base ``V*``."""

    u0: Entourage
    members: list[Entourage]            # index 0 is U0
    pair_class: dict                    # (x, y) -> index of U_{x,y} in members
    table: list[list[int]] | None       # sum table over member indices, when closed
    mvs: MvsTable | None
    failures: dict = field(default_factory=dict)


def _sum(members: list[Entourage], i: int, j: int):
    """Index of ``members[i] + members[j]``; ``(None, reason)`` when undefined."""
    comp = compose(members[j], members[i])  # V∘U with U = members[i], V = members[j]
    over = [W for W in members if comp.issubset(W)]
    if not over:
        return None, "no member contains V∘U"
    meet = over[0]
    for W in over[1:]:
        meet = meet & W
    if meet not in members:
        return None, "intersection is not a member"
    return members.index(meet), ""


def q_structure(u0: Entourage, vstar: Sequence[Entourage]) -> QStructure:
    """Evaluate the structural conditions on ``(U0, V*)``.

    Failure keys: ``strict`` (U0 ⊊ U), ``cover`` (⋃V* = X×X), ``Q1``,
    ``Q2`` (sum defined, closed, and an MVS), ``Q3`` (⊴ agrees with ⊆).
    """
    n = u0.n
    vstar = list(dict.fromkeys(vstar))
    fails: dict = {}
    bad = [i for i, U in enumerate(vstar) if not (u0.issubset(U) and U != u0)]
    if bad:
        fails["strict"] = bad
    union = Entourage(n, (0,) * n)
    for U in vstar:
        union = union | U
    if union != Entourage.full(n):
        fails["cover"] = sorted(set(Entourage.full(n).pairs()) - set(union.pairs()))[:10]
    members = [u0] + [U for U in vstar if U != u0]
    pair_class = {}
    for x in range(n):
        for y in range(n):
            if (x, y) in u0:
                pair_class[(x, y)] = 0
                continue
            meet = Entourage.full(n)
            for U in vstar:
                if (x, y) in U:
                    meet = meet & U
            if meet not in members:
                fails.setdefault("Q1", []).append((x, y))
                members.append(meet)
            pair_class[(x, y)] = members.index(meet)
    realized = {pair_class[p] for p in pair_class if p not in u0}
    if realized != set(range(1, len(members))) and "Q1" not in fails:
        fails["Q1"] = sorted(set(range(1, len(members))) - realized)
    table = None
    M = None
    if "Q1" not in fails:
        table = [[0] * len(members) for _ in members]
        for i in range(len(members)):
            for j in range(len(members)):
                s, why = _sum(members, i, j)
                if s is None:
                    fails.setdefault("Q2", ((i, j), why))
                    table = None
                    break
                table[i][j] = s
            if table is None:
                break
    if table is not None:
        labels = ["U0"] + [f"V{i}" for i in range(1, len(members))]
        try:
            M = MvsTable(tuple(labels), 0, tuple(map(tuple, table)))
        except (AxiomViolation, InputError) as exc:
            fails["Q2"] = str(exc)
        else:
            bad3 = [(i, j) for i in range(M.k) for j in range(M.k)
                    if M.leq(i, j) != members[i].issubset(members[j])]
            if bad3:
                fails["Q3"] = bad3[:10]
    return QStructure(u0, members, pair_class, table, M, fails)


@dataclass(frozen=True)
class EntourageMvs:
    members: tuple[Entourage, ...]   # index 0 is U0
    mvs: MvsTable
    hom: MvsHom                      # m -> index of U_m
    base: EntourageBase              # V*

    @property
    def u0(self) -> Entourage:
        return self.members[0]


def entourage_mvs(Q: QmSpace, report: Report | None = None) -> EntourageMvs:
    """The MVS of sublevel relations of a full, convex space over an atom-free MVS."""
    M = Q.mvs
    if not _mvs.is_atom_free(M):
        raise HypothesisError("the entourage MVS needs an atom-free MVS")
    fc = full_convex_report(Q, limit=5)
    if not fc.full:
        raise HypothesisError(f"space is not full; missing values {fc.missing}")
    if not fc.convex:
        raise HypothesisError(f"space is not convex; e.g. {fc.unrealized}")
    rep = report if report is not None else Report("entourage MVS")
    e = M.neutral
    qb = base_from_qm(Q, rep)
    u0 = Entourage(Q.n, tuple(mask(y for y in range(Q.n) if Q.d[x][y] == e) for x in range(Q.n)))
    vstar = list(qb.base.members)
    st = q_structure(u0, vstar)
    rep.require("entourage MVS: U0 is a proper subset of every member of V*",
                "strict" not in st.failures, st.failures.get("strict"))
    rep.require("entourage MVS: V* covers X×X", "cover" not in st.failures, st.failures.get("cover"))
    rep.require("entourage MVS: U_{x,y} = U_f(x,y) whenever f(x,y) != e",
                all(st.members[st.pair_class[(x, y)]] == qb.by_value[Q.d[x][y]]
                    for x in range(Q.n) for y in range(Q.n) if Q.d[x][y] != e))
    rep.require("entourage MVS (Q1): V* = {U_{x,y} : (x,y) not in U0}",
                "Q1" not in st.failures, st.failures.get("Q1"))
    rep.require("entourage MVS (Q2): V is closed under + and (V,+) is an MVS with neutral U0",
                "Q2" not in st.failures and st.mvs is not None, st.failures.get("Q2"))
    V = st.mvs
    h = [0] * M.k
    for m in M.star:
        h[m] = st.members.index(qb.by_value[m])
    bad = [(m, n) for m in range(M.k) for n in range(M.k) if V.add(h[m], h[n]) != h[M.add(m, n)]]
    rep.require("entourage MVS: U_m + U_m' = U_(m+m')", not bad, bad[:10])
    rep.require("entourage MVS (Q3): U ⊴ V exactly when U ⊆ V", "Q3" not in st.failures,
                st.failures.get("Q3"))
    rep.require("entourage MVS (Q4): (V,+) is atom-free", _mvs.is_atom_free(V))
    sub = [(m, n) for m in range(M.k) for n in range(M.k)
           if st.members[h[m]].issubset(st.members[h[n]]) != M.leq(m, n)]
    rep.require("entourage MVS: U_m ⊆ U_m' exactly when m ⊴ m'", not sub, sub[:10])
    hom = _mvs.validate_hom(h, M, V)
    rep.require("entourage MVS: m ↦ U_m is a surjective homomorphism", hom.is_surjective)
    if _mvs.is_strictly_atom_free(M):
        rep.require("entourage MVS: strictly atom-free M gives strictly atom-free (V,+)",
                    _mvs.is_strictly_atom_free(V))
    rep.facts["entourage_mvs_order"] = V.k
    return EntourageMvs(tuple(st.members), V, hom, EntourageBase(tuple(st.members[1:])))


@dataclass(frozen=True)
class MetrizeResult:
    space: QmSpace
    members: tuple[Entourage, ...]
    topology: FiniteTopology
    same_topology: bool


def metrize_from_base(points: Sequence[str] | None, u0: Entourage, base,
                      report: Report | None = None) -> MetrizeResult:
    """Quasimetric ``f(x,y) = U_{x,y}`` into ``(V,+)`` from a base satisfying (Q1)-(Q3).

    Hypothesis failures raise :class:`AxiomViolation` tagged with the
    condition; the conclusions (triangle inequality, equal topologies) are
    report clauses.
    """
    if not isinstance(base, EntourageBase):
        base = validate_base(list(base))
    n = u0.n
    if base.n != n:
        raise InputError("U0 and the base live on different carriers")
    if not u0.contains_diagonal():
        raise AxiomViolation("U0", None, "U0 must contain the diagonal")
    st = q_structure(u0, base.members)
    for key in ("strict", "cover", "Q1", "Q2", "Q3"):
        if key in st.failures:
            raise AxiomViolation(key, st.failures[key])
    rep = report if report is not None else Report("metrize from base")
    V = st.mvs
    d = tuple(tuple(st.pair_class[(x, y)] for y in range(n)) for x in range(n))
    try:
        f = QmSpace(tuple(points) if points is not None else None, V, d)
    except AxiomViolation as exc:
        rep.require("metrize from base: f(x,y) = U_{x,y} is a quasimetric", False, exc.witness)
        raise
    rep.check("metrize from base: f(x,y) = U_{x,y} is a quasimetric", True)
    closed = _ball_masks(f, CLOSED)
    bad = [(x, i) for i in range(1, V.k) for x in range(n) if st.members[i].image(x) != closed[x][i]]
    rep.require("metrize from base: U[x] equals the closed ball of radius U at x", not bad, bad[:10])
    T_u = base_topology(base, f.points, rep)
    T_f = induced_topology(f, rep)
    rep.require("metrize from base: T_f equals the topology of the quasiuniformity", T_f == T_u)
    return MetrizeResult(f, tuple(st.members), T_f, T_f == T_u)


# -- full roundtrip ----------------------------------------------------------------

@dataclass(frozen=True)
class RoundtripResult:
    report: Report
    complete: bool
    final: QmSpace | None = None
    image: tuple[int, ...] = ()


def _pulled_topology(T: FiniteTopology, image: Sequence[int], labels) -> FiniteTopology:
    """Relative topology of ``T`` on ``image``, indexed like the original points."""
    pos = {p: i for i, p in enumerate(image)}
    minimal = tuple(mask(pos[q] for q in bits(T.minimal[p]) if q in pos) for p in image)
    return FiniteTopology(len(image), minimal, labels)


def roundtrip(Q: QmSpace, max_stages: int = DEFAULT_MAX_STAGES, max_points: int = DEFAULT_MAX_POINTS,
              report: Report | None = None) -> RoundtripResult:
    """Embed into a full convex space, build ``(V,+)``, metrize back, compare topologies.

    Stages that are already satisfied (input full, or convex) are skipped
    with identity inclusions.
    """
    M = Q.mvs
    if not _mvs.is_atom_free(M):
        raise HypothesisError("the roundtrip needs an atom-free MVS")
    if Q.n == 0:
        raise InputError("the roundtrip needs a non-empty space")
    rep = report if report is not None else Report("roundtrip")
    T0 = induced_topology(Q, rep)
    if _is_full(Q):
        rep.note("input already full; embedding step is the identity")
        space, image = Q, tuple(range(Q.n))
    else:
        inc = embed_full(Q, rep)
        space, image = inc.space, inc.image
    cv = convexify_until(space, max_stages, max_points, rep)
    rep.facts["convexify_stages"] = cv.stages
    rep.facts["final_points"] = cv.space.n
    if not cv.converged:
        rep.note(f"partial: {cv.reason}")
        rep.check("roundtrip: convex space reached within budget", False, cv.reason)
        return RoundtripResult(rep, False, cv.space, image)
    image = tuple(cv.image[i] for i in image)
    rep.require("roundtrip: embedded copy keeps the original distances",
                all(cv.space.d[image[x]][image[y]] == Q.d[x][y] for x in range(Q.n) for y in range(Q.n)))
    em = entourage_mvs(cv.space, rep)
    mt = metrize_from_base(cv.space.points, em.u0, em.base, rep)
    back = _pulled_topology(mt.topology, image, Q.points)
    rep.require("roundtrip: original topology is the relative topology of its image", back == T0)
    return RoundtripResult(rep, True, mt.space, image)
