"""Quasimetric functions on finite carriers and the constructions built on them.

A :class:`QmSpace` is a value matrix ``d`` into an :class:`~mvstopo.mvs.MvsTable`
satisfying ``d[x][x] = e`` (f2) and ``d[x][z] ⊴ d[x][y] + d[y][z]`` (f1).
Open balls use ``◁``, closed balls use ``⊴``.

Every construction here re-derives the topological conclusion it promises
and records it on a :class:`~mvstopo.report.Report`; a mismatch raises
:class:`~mvstopo.errors.ClauseFailure`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from . import mvs as _mvs
from .errors import AxiomViolation, HypothesisError, InputError
from .mvs import MvsTable
from .report import Report
from .topology import (
    CoverData,
    FiniteTopology,
    NbhdSystem,
    bits,
    induced_by_maps,
    mask,
    point_finite_refinement,
    product_topology,
    relative_topology,
    systems_equivalent,
    topology_of,
    validate_nbhd_system,
)

__all__ = [
    "QmSpace",
    "qm_violation",
    "validate_qm",
    "canonical_metric_function",
    "ball",
    "ball_system",
    "induced_topology",
    "closed_ball_equivalence",
    "pullback",
    "restrict",
    "GlueResult",
    "glue",
    "product",
    "box_system",
    "alexandrov_metrize",
    "ALEXANDROV_MVS",
]

OPEN, CLOSED = "open", "closed"


def qm_violation(M: MvsTable, d) -> AxiomViolation | None:
    """First failure of (f2) or (f1) with a witness, or None."""
    D = np.asarray(d, dtype=np.int64).reshape(len(d), len(d)) if len(d) else np.zeros((0, 0), np.int64)
    n = D.shape[0]
    if n == 0:
        return None
    diag = np.flatnonzero(np.diag(D) != M.neutral)
    if diag.size:
        x = int(diag[0])
        return AxiomViolation("f2", (x,), "d(x,x) != e")
    leq = np.array(M.leq_matrix, dtype=bool)
    table = np.array(M.table, dtype=np.int64)
    masks = [(D == a).astype(np.float32) for a in range(M.k)]
    present = [bool(m.any()) for m in masks]
    for a in range(M.k):
        if not present[a]:
            continue
        for b in range(M.k):
            if not present[b]:
                continue
            via = (masks[a] @ masks[b]) > 0
            bad = via & ~leq[D, table[a, b]]
            if bad.any():
                x, z = (int(v) for v in np.argwhere(bad)[0])
                y = int(np.flatnonzero((D[x] == a) & (D[:, z] == b))[0])
                return AxiomViolation("f1", (x, y, z), "d(x,z) is not ⊴ d(x,y)+d(y,z)")
    return None


@dataclass(frozen=True)
class QmSpace:
    """Finite quasimetric space; validated on construction."""

    points: tuple[str, ...] = field(compare=False)
    mvs: MvsTable
    d: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        d = self.d
        if not (isinstance(d, tuple) and all(isinstance(r, tuple) for r in d)):
            d = tuple(tuple(int(v) for v in row) for row in d)
        n = len(d)
        points = tuple(str(p) for p in self.points) if self.points is not None else tuple(str(i) for i in range(n))
        if len(points) != n or any(len(row) != n for row in d):
            raise InputError("distance matrix must be square and match the point list")
        if len(set(points)) != n:
            raise InputError("point labels must be distinct")
        if n:
            arr = np.asarray(d)
            if arr.dtype.kind not in "iu":
                raise InputError("distance values must be integer indices")
            if arr.min() < 0 or arr.max() >= self.mvs.k:
                raise InputError("distance value is not an element of the MVS")
        bad = qm_violation(self.mvs, d)
        if bad is not None:
            raise bad
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "points", points)

    @property
    def n(self) -> int:
        return len(self.d)

    @property
    def symmetric(self) -> bool:
        return all(self.d[x][y] == self.d[y][x] for x in range(self.n) for y in range(x))

    @property
    def strict(self) -> bool:
        e = self.mvs.neutral
        return all(self.d[x][y] != e for x in range(self.n) for y in range(self.n) if x != y)

    @cached_property
    def array(self) -> np.ndarray:
        return np.array(self.d, dtype=np.int64).reshape(self.n, self.n)

    def index(self, label: str) -> int:
        try:
            return self.points.index(label)
        except ValueError:
            raise InputError(f"unknown point {label!r}") from None


def validate_qm(points: Sequence[str] | None, M: MvsTable, d) -> QmSpace:
    return QmSpace(None if points is None else tuple(points), M, tuple(tuple(r) for r in d))


def canonical_metric_function(M: MvsTable) -> QmSpace:
    """``f_M`` on the carrier of a commutative ``M``: ``e`` on the diagonal, ``m + n`` elsewhere."""
    if not _mvs.is_commutative(M):
        raise HypothesisError("the canonical metric function needs a commutative MVS")
    d = [[M.neutral if a == b else M.add(a, b) for b in range(M.k)] for a in range(M.k)]
    return QmSpace(M.labels, M, tuple(map(tuple, d)))


# -- balls and induced topology --------------------------------------------------

def _relation(Q: QmSpace, kind: str) -> np.ndarray:
    if kind == OPEN:
        return np.array(Q.mvs.lt_matrix, dtype=bool)
    if kind == CLOSED:
        return np.array(Q.mvs.leq_matrix, dtype=bool)
    raise InputError(f"ball kind must be 'open' or 'closed', got {kind!r}")


def _row_mask(row: np.ndarray) -> int:
    return mask(int(i) for i in np.flatnonzero(row))


def ball(Q: QmSpace, x: int, m: int, kind: str = OPEN) -> int:
    rel = _relation(Q, kind)
    return _row_mask(rel[Q.array[x], m])


def _ball_masks(Q: QmSpace, kind: str) -> list[dict[int, int]]:
    rel = _relation(Q, kind)
    out = []
    for x in range(Q.n):
        hit = rel[Q.array[x]]  # n × k
        out.append({m: _row_mask(hit[:, m]) for m in Q.mvs.star})
    return out


def ball_system(Q: QmSpace, kind: str = OPEN) -> NbhdSystem:
    """``x ↦ {B(x, m) : m ∈ M*}`` for open (◁) or closed (⊴) balls."""
    per_point = _ball_masks(Q, kind)
    return NbhdSystem(Q.n, tuple(tuple(b.values()) for b in per_point))


def induced_topology(Q: QmSpace, report: Report | None = None) -> FiniteTopology:
    B = ball_system(Q, OPEN)
    flags = validate_nbhd_system(B)
    rep = report if report is not None else Report("induced topology")
    rep.require("open balls form an open neighbourhood system (B1,B2,B3')",
                flags.is_open_system, flags.witnesses)
    return topology_of(B, Q.points)


def _require_atom_free(M: MvsTable, what: str) -> None:
    if not _mvs.is_atom_free(M):
        raise HypothesisError(f"{what} requires an atom-free MVS")


def closed_ball_equivalence(Q: QmSpace, report: Report | None = None) -> bool:
    """Closed balls form a neighbourhood system equivalent to the open-ball system.

    Refuses MVSs that are not atom-free.
    """
    _require_atom_free(Q.mvs, "closed-ball equivalence")
    rep = report if report is not None else Report("closed balls")
    M = Q.mvs
    missing = [m for m in M.star if _mvs.find_subdivision(M, m, 2) is None]
    rep.require("closed balls: some m' with m'+m' ⊴ m exists for each m in M*", not missing, missing)
    opened, closed = ball_system(Q, OPEN), ball_system(Q, CLOSED)
    flags = validate_nbhd_system(closed)
    rep.require("closed balls: B1", flags.b1, flags.witnesses.get("B1"))
    rep.require("closed balls: B2", flags.b2, flags.witnesses.get("B2"))
    rep.require("closed balls: B3", flags.b3, flags.witnesses.get("B3"))
    same = systems_equivalent(opened, closed)
    rep.require("closed balls: equivalent to the open-ball system", same)
    rep.require("closed balls: same topology as open balls",
                topology_of(closed) == topology_of(opened))
    return same


# -- constructions -------------------------------------------------------------

def pullback(Q1: QmSpace, g: Sequence[int], points: Sequence[str] | None = None,
             report: Report | None = None) -> QmSpace:
    """``d2(x, x') = d1(g(x), g(x'))``; its topology is the one induced by ``g``."""
    g = [int(v) for v in g]
    if any(not 0 <= v < Q1.n for v in g):
        raise InputError("g must map into the points of the target space")
    d = tuple(tuple(Q1.d[gx][gy] for gy in g) for gx in g)
    Q2 = QmSpace(tuple(points) if points is not None else None, Q1.mvs, d)
    rep = report if report is not None else Report("pullback")
    T1 = induced_topology(Q1, rep)
    rep.require("pullback: T_f2 equals the topology induced by g",
                induced_topology(Q2, rep) == induced_by_maps(len(g), [(T1, g)]))
    return Q2


def restrict(Q: QmSpace, A, report: Report | None = None) -> QmSpace:
    """Restriction to a subset; its topology is the relative topology."""
    a = int(A) if isinstance(A, int) else mask(A)
    pts = list(bits(a))
    if not pts:
        raise InputError("cannot restrict to the empty set")
    if a >> Q.n:
        raise InputError("subset outside the carrier")
    sub = QmSpace(tuple(Q.points[p] for p in pts), Q.mvs,
                  tuple(tuple(Q.d[p][q] for q in pts) for p in pts))
    rep = report if report is not None else Report("restrict")
    rep.require("restriction: T_(f|A) equals the relative topology on A",
                induced_topology(sub, rep) == relative_topology(induced_topology(Q, rep), a))
    return sub


@dataclass(frozen=True)
class GlueResult:
    space: QmSpace
    cover: CoverData
    w: tuple[int, ...]  # W_x masks
    pieces_used: tuple[int, ...]  # refinement member -> index of the piece restricted onto it


def glue(T: FiniteTopology, pieces: Sequence[tuple[int, QmSpace]],
         report: Report | None = None) -> GlueResult:
    """Glue local quasimetrics of an open cover into one quasimetric over ``M∞``.

    ``pieces`` lists ``(subset mask, QmSpace on that subset in ascending point
    order)``.  All pieces share one atom-free MVS ``M``.  With ``W_x`` the
    intersection of the refinement members containing ``x``, the result is
    ``∞`` for ``y ∉ W_x`` and the sum of the local distances otherwise.
    """
    if not pieces:
        raise InputError("glue needs at least one piece")
    M = pieces[0][1].mvs
    if any(Q.mvs != M for _, Q in pieces):
        raise InputError("all pieces must use the same MVS")
    _require_atom_free(M, "gluing")
    rep = report if report is not None else Report("glue")
    subsets = [int(s) for s, _ in pieces]
    for s, Q in pieces:
        if bin(s).count("1") != Q.n:
            raise InputError("piece space size does not match its subset")
        if not T.is_open(s):
            raise InputError(f"piece subset {sorted(bits(s))} is not open")
        if induced_topology(Q) != relative_topology(T, s):
            raise InputError(f"piece on {sorted(bits(s))} does not induce the relative topology")
    cover = point_finite_refinement(T, subsets)
    Minf = _mvs.adjoin_infinity(M)
    inf = M.k
    refinement = cover.refinement
    local = []
    for j, v in enumerate(refinement):
        src_mask, src = pieces[cover.assignment[j]]
        pos = {p: i for i, p in enumerate(bits(src_mask))}
        local.append(restrict(src, mask(pos[p] for p in bits(v)), rep))
    local_pos = [{p: i for i, p in enumerate(bits(v))} for v in refinement]
    J = [[j for j, v in enumerate(refinement) if (v >> x) & 1] for x in range(T.n)]
    W = []
    for x in range(T.n):
        w = T.full
        for j in J[x]:
            w &= refinement[j]
        W.append(w)
    d = [[0] * T.n for _ in range(T.n)]
    for x in range(T.n):
        for y in range(T.n):
            if not (W[x] >> y) & 1:
                d[x][y] = inf
                continue
            total = M.neutral
            for j in J[x]:  # ascending j; commutativity makes the order irrelevant
                p = local_pos[j]
                total = M.add(total, local[j].d[p[x]][p[y]])
            d[x][y] = total
    space = QmSpace(T.labels, Minf, tuple(map(tuple, d)))
    missing = [(x, m) for x in range(T.n) for m in M.star
               if _mvs.find_subdivision(M, m, len(J[x])) is None]
    rep.require("gluing: some m' in M* with |J_x|·m' ⊴ m exists", not missing, missing)
    rep.require("gluing: f(x,y) is finite exactly on W_x",
                all(((W[x] >> y) & 1) == (d[x][y] != inf) for x in range(T.n) for y in range(T.n)))
    rep.require("gluing: T_f = T", induced_topology(space, rep) == T)
    if all(Q.strict for _, Q in pieces):
        rep.require("gluing: strict pieces give a strict f", space.strict)
    rep.note("convention: M∞ is M with an absorbing element ∞ adjoined")
    rep.facts["refinement"] = [sorted(T.labels[p] for p in bits(v)) for v in refinement]
    rep.facts["refinement_witness"] = list(cover.assignment)
    return GlueResult(space, cover, tuple(W), cover.assignment)


def _product_coords(Qs):
    return list(itertools.product(*(range(Q.n) for Q in Qs)))


def box_system(Qs: Sequence[QmSpace]) -> NbhdSystem:
    """Products of open balls ``∏ B_fi(x_i, m_i)`` over all radius tuples."""
    coords = _product_coords(Qs)
    index = {c: i for i, c in enumerate(coords)}
    balls = [_ball_masks(Q, OPEN) for Q in Qs]
    star = Qs[0].mvs.star
    at = []
    for c in coords:
        fam = set()
        for radii in itertools.product(star, repeat=len(Qs)):
            parts = [list(bits(balls[i][c[i]][radii[i]])) for i in range(len(Qs))]
            fam.add(mask(index[b] for b in itertools.product(*parts)))
        at.append(tuple(fam))
    return NbhdSystem(len(coords), tuple(at))


def product(Qs: Sequence[QmSpace], report: Report | None = None) -> QmSpace:
    """Sum quasimetric ``f(x,y) = Σ f_i(x_i, y_i)`` on the product carrier."""
    Qs = list(Qs)
    if not Qs:
        raise InputError("product of zero factors is not defined")
    M = Qs[0].mvs
    if any(Q.mvs != M for Q in Qs):
        raise InputError("all factors must use the same MVS")
    _require_atom_free(M, "product metrization")
    rep = report if report is not None else Report("product")
    coords = _product_coords(Qs)
    d = tuple(tuple(M.total(Q.d[a][b] for Q, a, b in zip(Qs, x, y)) for y in coords) for x in coords)
    labels = ["(" + ",".join(Q.points[i] for Q, i in zip(Qs, c)) + ")" for c in coords]
    P = QmSpace(tuple(labels), M, d)
    r = len(Qs)
    rep.require("product: each factor distance ⊴ the sum distance",
                all(M.leq(Q.d[x[i]][y[i]], P.d[a][b])
                    for a, x in enumerate(coords) for b, y in enumerate(coords)
                    for i, Q in enumerate(Qs)))
    missing = [m for m in M.star if _mvs.find_subdivision(M, m, r) is None]
    rep.require("product: some m' in M* with n·m' ⊴ m exists", not missing, missing)
    for ms in itertools.product(M.star, repeat=r):
        _mvs.common_lower_bound(M, ms)
    rep.require("product: box system and ball system are equivalent",
                systems_equivalent(box_system(Qs), ball_system(P, OPEN)))
    rep.require("product: T_f equals the product topology",
                induced_topology(P, rep) == product_topology([induced_topology(Q) for Q in Qs]))
    return P


ALEXANDROV_MVS = _mvs.max_mvs(3)


def alexandrov_metrize(T: FiniteTopology, report: Report | None = None) -> QmSpace:
    """Strict quasimetric into ``({0,1,2}, max)`` inducing ``T``.

    ``f(x,y)`` is 0 on the diagonal, 1 when ``y`` is in the smallest
    neighbourhood of ``x``, 2 otherwise.
    """
    U = T.minimal
    d = tuple(tuple(0 if x == y else 1 if (U[x] >> y) & 1 else 2 for y in range(T.n))
              for x in range(T.n))
    Q = QmSpace(T.labels, ALEXANDROV_MVS, d)
    rep = report if report is not None else Report("alexandrov")
    rep.require("alexandrov: f is strict", Q.strict)
    bad = [x for x in range(T.n) if ball(Q, x, 1) != U[x]]
    rep.require("alexandrov: U(x) = B_f(x,1) for every x", not bad, bad)
    rep.require("alexandrov: T_f = T", induced_topology(Q, rep) == T)
    return Q
