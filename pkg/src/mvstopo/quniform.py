"""Entourages, quasiuniform bases and their topologies.

Relations on ``0..n-1`` are stored as row bitmasks: ``rows[x]`` is the set
``U[x] = {y : (x, y) ∈ U}``.

Composition follows the convention ``(x, z) ∈ A∘B`` iff some ``y`` has
``(x, y) ∈ B`` and ``(y, z) ∈ A``: the right operand acts first.  Many
relation libraries use the opposite order.

Quasiuniformities are only ever represented by a base; membership in the
generated family is the up-closure test :func:`in_quasiuniformity`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import mvs as _mvs
from .errors import AxiomViolation, HypothesisError, InputError
from .qmetric import CLOSED, QmSpace, _ball_masks, induced_topology
from .report import Report
from .topology import FiniteTopology, NbhdSystem, bits, mask, topology_of, validate_nbhd_system

__all__ = [
    "Entourage",
    "compose",
    "EntourageBase",
    "check_base",
    "validate_base",
    "in_quasiuniformity",
    "base_nbhd_system",
    "base_topology",
    "mutually_cofinal",
    "bases_same_topology",
    "QmBase",
    "base_from_qm",
    "check_uniformity",
]


@dataclass(frozen=True, order=True)
class Entourage:
    n: int
    rows: tuple[int, ...]

    def __post_init__(self):
        rows = tuple(int(r) for r in self.rows)
        if len(rows) != self.n:
            raise InputError("one row per point is required")
        full = (1 << self.n) - 1
        if any(r & ~full for r in rows):
            raise InputError("relation leaves the carrier")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[tuple[int, int]]) -> "Entourage":
        rows = [0] * n
        for x, y in pairs:
            if not (0 <= x < n and 0 <= y < n):
                raise InputError(f"pair {(x, y)} outside the carrier")
            rows[x] |= 1 << y
        return cls(n, tuple(rows))

    @classmethod
    def diagonal(cls, n: int) -> "Entourage":
        return cls(n, tuple(1 << x for x in range(n)))

    @classmethod
    def full(cls, n: int) -> "Entourage":
        return cls(n, ((1 << n) - 1,) * n)

    def pairs(self) -> list[tuple[int, int]]:
        return [(x, y) for x in range(self.n) for y in bits(self.rows[x])]

    def __contains__(self, pair) -> bool:
        x, y = pair
        return bool((self.rows[x] >> y) & 1)

    def __len__(self) -> int:
        return sum(bin(r).count("1") for r in self.rows)

    def issubset(self, other: "Entourage") -> bool:
        return all(a & ~b == 0 for a, b in zip(self.rows, other.rows))

    def __and__(self, other: "Entourage") -> "Entourage":
        return Entourage(self.n, tuple(a & b for a, b in zip(self.rows, other.rows)))

    def __or__(self, other: "Entourage") -> "Entourage":
        return Entourage(self.n, tuple(a | b for a, b in zip(self.rows, other.rows)))

    def inverse(self) -> "Entourage":
        return Entourage.from_pairs(self.n, ((y, x) for x, y in self.pairs()))

    def image(self, x: int) -> int:
        """``U[x]`` as a bitmask."""
        return self.rows[x]

    def contains_diagonal(self) -> bool:
        return all((r >> x) & 1 for x, r in enumerate(self.rows))


def compose(A: Entourage, B: Entourage) -> Entourage:
    """``A∘B``: first ``B``, then ``A``."""
    if A.n != B.n:
        raise InputError("entourages on different carriers")
    rows = []
    for x in range(A.n):
        r = 0
        for y in bits(B.rows[x]):
            r |= A.rows[y]
        rows.append(r)
    return Entourage(A.n, tuple(rows))


@dataclass(frozen=True)
class EntourageBase:
    """A validated base (UB1-UB3) of a quasiuniformity; members deduplicated in first-seen order."""

    members: tuple[Entourage, ...]
    symmetric: bool = field(default=False, compare=False)

    @property
    def n(self) -> int:
        return self.members[0].n


def check_base(members: Sequence[Entourage]) -> dict:
    """Flags for UB1, UB2, UB3 plus a witness per failure (indices into ``members``)."""
    ms = list(dict.fromkeys(members))
    if not ms:
        raise InputError("a base must be non-empty")
    n = ms[0].n
    if any(U.n != n for U in ms):
        raise InputError("entourages on different carriers")
    wit = {}
    bad = next((i for i, U in enumerate(ms) if not U.contains_diagonal()), None)
    if bad is not None:
        wit["UB1"] = (bad,)
    for i, U in enumerate(ms):
        for j in range(i + 1, len(ms)):
            meet = U & ms[j]
            if not any(W.issubset(meet) for W in ms):
                wit.setdefault("UB2", (i, j))
    for i, U in enumerate(ms):
        if not any(compose(V, V).issubset(U) for V in ms):
            wit.setdefault("UB3", (i,))
            break
    flags = {ax: ax not in wit for ax in ("UB1", "UB2", "UB3")}
    flags["symmetric"] = all(any(W.issubset(U.inverse()) for W in ms) for U in ms)
    flags["witnesses"] = wit
    return flags


def validate_base(members: Sequence[Entourage]) -> EntourageBase:
    ms = tuple(dict.fromkeys(members))
    flags = check_base(ms)
    for ax in ("UB1", "UB2", "UB3"):
        if not flags[ax]:
            raise AxiomViolation(ax, flags["witnesses"][ax])
    return EntourageBase(ms, flags["symmetric"])


def in_quasiuniformity(base: EntourageBase, U: Entourage) -> bool:
    return any(B.issubset(U) for B in base.members)


def base_nbhd_system(base: EntourageBase) -> NbhdSystem:
    """``x ↦ {U[x] : U ∈ base}``."""
    return NbhdSystem(base.n, tuple(tuple(U.image(x) for U in base.members) for x in range(base.n)))


def base_topology(base: EntourageBase, labels=None, report: Report | None = None) -> FiniteTopology:
    B = base_nbhd_system(base)
    flags = validate_nbhd_system(B)
    rep = report if report is not None else Report("base topology")
    rep.require("base sections U[x] form a neighbourhood system (B1,B2,B3)",
                flags.is_system, flags.witnesses)
    return topology_of(B, labels)


def mutually_cofinal(b1: EntourageBase, b2: EntourageBase) -> bool:
    """True when both bases generate the same quasiuniformity."""
    return (all(in_quasiuniformity(b1, U) for U in b2.members)
            and all(in_quasiuniformity(b2, U) for U in b1.members))


def bases_same_topology(b1: EntourageBase, b2: EntourageBase, report: Report | None = None) -> bool:
    """Two bases of one quasiuniformity induce the same topology."""
    if b1.n != b2.n:
        raise InputError("bases on different carriers")
    if not mutually_cofinal(b1, b2):
        raise InputError("the bases do not generate the same quasiuniformity")
    rep = report if report is not None else Report("bases")
    same = base_topology(b1, report=rep) == base_topology(b2, report=rep)
    rep.require("bases of one quasiuniformity induce one topology", same)
    return same


def check_uniformity(base: EntourageBase) -> bool:
    """Whether the generated quasiuniformity is closed under inversion."""
    return all(in_quasiuniformity(base, U.inverse()) for U in base.members)


@dataclass(frozen=True)
class QmBase:
    base: EntourageBase
    by_value: dict  # m -> Entourage U_m for every m in M*


def _sublevel(Q: QmSpace, m: int) -> Entourage:
    leq = Q.mvs.leq_matrix
    return Entourage(Q.n, tuple(mask(y for y in range(Q.n) if leq[Q.d[x][y]][m]) for x in range(Q.n)))


def base_from_qm(Q: QmSpace, report: Report | None = None) -> QmBase:
    """Base ``{U_m : m ∈ M*}`` with ``U_m = {(x,y) : f(x,y) ⊴ m}``."""
    M = Q.mvs
    if not _mvs.is_atom_free(M):
        raise HypothesisError("the sublevel base needs an atom-free MVS")
    rep = report if report is not None else Report("base from quasimetric")
    by_value = {m: _sublevel(Q, m) for m in M.star}
    base = validate_base(list(by_value.values()))
    rep.check("sublevel base: UB1-UB3 hold", True)
    for m1 in M.star:
        for m2 in M.star:
            c = _mvs.common_lower_bound(M, [m1, m2])
            rep.require("sublevel base: U_c ⊆ U_m1 ∩ U_m2 for a common lower bound c",
                        by_value[c].issubset(by_value[m1] & by_value[m2]), (m1, m2, c))
    for m in M.star:
        half = _mvs.find_subdivision(M, m, 2)
        rep.require("sublevel base: U_h∘U_h ⊆ U_m when h+h ⊴ m",
                    half is not None and compose(by_value[half], by_value[half]).issubset(by_value[m]),
                    (m, half))
    closed = _ball_masks(Q, CLOSED)
    rep.require("sublevel base: U_m[x] equals the closed ball of radius m at x",
                all(by_value[m].image(x) == closed[x][m] for x in range(Q.n) for m in M.star))
    rep.require("sublevel base: induced topology equals T_f",
                base_topology(base, Q.points, rep) == induced_topology(Q, rep))
    if Q.symmetric:
        rep.require("sublevel base: symmetric f gives U_m = U_m^-1",
                    all(U == U.inverse() for U in base.members))
        rep.require("sublevel base: symmetric f gives a uniformity base", check_uniformity(base))
    return QmBase(base, by_value)
