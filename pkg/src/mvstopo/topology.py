"""Exact topologies on finite carriers.

Points are ``0..n-1`` and subsets are int bitmasks.  A finite topology is
Alexandrov, so it is stored canonically by its minimal open neighbourhoods
``U(x)``; the full family of open sets is materialized on demand.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence, Union

from .errors import InputError

__all__ = [
    "bits",
    "mask",
    "FiniteTopology",
    "topology_from_opens",
    "generate_topology",
    "generate_topology_closure",
    "subbase_reduction_equivalent",
    "NbhdSystem",
    "NbhdFlags",
    "validate_nbhd_system",
    "topology_of",
    "systems_equivalent",
    "induced_by_maps",
    "relative_topology",
    "product_topology",
    "min_neighbourhoods",
    "is_open_via_cover",
    "CoverData",
    "point_finite_refinement",
    "specialization_pairs",
    "discrete",
    "indiscrete",
    "enumerate_topologies_by_subbase",
    "enumerate_topologies_by_closure",
]


def bits(m: int) -> Iterator[int]:
    """Indices of the set bits of ``m``, ascending."""
    i = 0
    while m:
        if m & 1:
            yield i
        m >>= 1
        i += 1


def mask(points: Iterable[int]) -> int:
    out = 0
    for p in points:
        out |= 1 << p
    return out


def _full(n: int) -> int:
    return (1 << n) - 1


def _labels(labels, n):
    if labels is None:
        return tuple(str(i) for i in range(n))
    labels = tuple(str(x) for x in labels)
    if len(labels) != n:
        raise InputError(f"{len(labels)} labels for {n} points")
    return labels


@dataclass(frozen=True)
class FiniteTopology:
    """A topology on ``n`` points given by minimal neighbourhoods.

    ``minimal[x]`` is the smallest open set containing ``x``.  Validity:
    ``x in U(x)`` and ``y in U(x)`` implies ``U(y) ⊆ U(x)``.
    """

    n: int
    minimal: tuple[int, ...]
    labels: tuple[str, ...] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "minimal", tuple(int(u) for u in self.minimal))
        object.__setattr__(self, "labels", _labels(self.labels, self.n))
        if len(self.minimal) != self.n:
            raise InputError("one minimal neighbourhood per point is required")
        full = _full(self.n)
        for x, u in enumerate(self.minimal):
            if u & ~full or not (u >> x) & 1:
                raise InputError(f"U({x}) must contain {x} and lie inside the carrier")
            for y in bits(u):
                if self.minimal[y] & ~u:
                    raise InputError(f"U({y}) is not inside U({x}) although {y} is in U({x})")

    @property
    def full(self) -> int:
        return _full(self.n)

    def is_open(self, v: int) -> bool:
        return all(self.minimal[x] & ~v == 0 for x in bits(v))

    @cached_property
    def opens(self) -> tuple[int, ...]:
        """All open sets, ascending by bitmask value."""
        acc = {0}
        for u in set(self.minimal):
            acc |= {s | u for s in acc}
        return tuple(sorted(acc))

    def interior(self, v: int) -> int:
        return mask(x for x in bits(v) if self.minimal[x] & ~v == 0)

    def relabel(self, labels) -> "FiniteTopology":
        return FiniteTopology(self.n, self.minimal, labels)


def discrete(n: int) -> FiniteTopology:
    return FiniteTopology(n, tuple(1 << x for x in range(n)))


def indiscrete(n: int) -> FiniteTopology:
    return FiniteTopology(n, (_full(n),) * n)


def topology_from_opens(n: int, opens: Iterable[int], labels=None) -> FiniteTopology:
    """Validate a literal family of open sets and convert it."""
    family = set(int(v) for v in opens)
    full = _full(n)
    if any(v & ~full for v in family):
        raise InputError("open set outside the carrier")
    if 0 not in family or full not in family:
        raise InputError("a topology must contain the empty set and the carrier")
    members = sorted(family)
    for a, b in itertools.combinations(members, 2):
        if a & b not in family:
            raise InputError(f"not closed under intersection: {a:#b} & {b:#b}")
        if a | b not in family:
            raise InputError(f"not closed under union: {a:#b} | {b:#b}")
    minimal = []
    for x in range(n):
        u = full
        for v in members:
            if (v >> x) & 1:
                u &= v
        minimal.append(u)
    return FiniteTopology(n, tuple(minimal), labels)


def generate_topology(n: int, subbase: Iterable[int], labels=None) -> FiniteTopology:
    """Coarsest topology containing every member of ``subbase``."""
    full = _full(n)
    subbase = [int(s) & full for s in subbase]
    minimal = []
    for x in range(n):
        u = full
        for s in subbase:
            if (s >> x) & 1:
                u &= s
        minimal.append(u)
    return FiniteTopology(n, tuple(minimal), labels)


def generate_topology_closure(n: int, subbase: Iterable[int]) -> frozenset[int]:
    """Open sets generated by ``subbase`` via a worklist closure.

    Independent of :func:`generate_topology`: close ``{∅, X} ∪ subbase`` under
    pairwise intersection, then under pairwise union, and repeat until
    nothing changes.  Exponential; meant for small carriers and tests.
    """
    full = _full(n)
    family = {0, full} | {int(s) & full for s in subbase}
    while True:
        before = len(family)
        for op in (lambda a, b: a & b, lambda a, b: a | b):
            work = list(family)
            while work:
                a = work.pop()
                for b in list(family):
                    c = op(a, b)
                    if c not in family:
                        family.add(c)
                        work.append(c)
        if len(family) == before:
            return frozenset(family)


def subbase_reduction_equivalent(n: int, U: Sequence[int], V: Sequence[int]) -> bool:
    """Generate from ``U`` and from its sub-family ``V`` and compare.

    Requires ``V ⊆ U`` and every member of ``U`` to be a union of members of ``V``.
    """
    U, V = [int(u) for u in U], [int(v) for v in V]
    if not set(V) <= set(U):
        raise InputError("V must be a sub-family of U")
    for u in U:
        cover = 0
        for v in V:
            if v & ~u == 0:
                cover |= v
        if cover != u:
            raise InputError(f"{u:#b} is not a union of members of V")
    return generate_topology(n, U) == generate_topology(n, V)


# -- neighbourhood systems ---------------------------------------------------

@dataclass(frozen=True)
class NbhdSystem:
    """For each point ``x`` a non-empty family ``at[x]`` of subsets."""

    n: int
    at: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        at = tuple(tuple(sorted(set(int(v) for v in fam))) for fam in self.at)
        if len(at) != self.n:
            raise InputError("one family per point is required")
        full = _full(self.n)
        for x, fam in enumerate(at):
            if not fam:
                raise InputError(f"B({x}) is empty")
            if any(v & ~full for v in fam):
                raise InputError(f"B({x}) has a member outside the carrier")
        object.__setattr__(self, "at", at)


@dataclass
class NbhdFlags:
    b1: bool
    b2: bool
    b3: bool
    b3_open: bool
    witnesses: dict = field(default_factory=dict)

    @property
    def is_system(self) -> bool:
        return self.b1 and self.b2 and self.b3

    @property
    def is_open_system(self) -> bool:
        return self.b1 and self.b2 and self.b3_open


def validate_nbhd_system(B: NbhdSystem) -> NbhdFlags:
    """Evaluate B1, B2, B3 and the open variant B3' with a witness for each failure."""
    at = B.at
    wit = {}

    def first(gen):
        return next(gen, None)

    w = first((x, u) for x in range(B.n) for u in at[x] if not (u >> x) & 1)
    if w:
        wit["B1"] = w
    w = first((x, u, v) for x in range(B.n) for u, v in itertools.combinations(at[x], 2)
              if not any(c & ~(u & v) == 0 for c in at[x]))
    if w:
        wit["B2"] = w

    def inside(y, u):
        return any(c & ~u == 0 for c in at[y])

    w = first((x, u) for x in range(B.n) for u in at[x]
              if not any(all(inside(y, u) for y in bits(v)) for v in at[x]))
    if w:
        wit["B3"] = w
    w = first((x, u, y) for x in range(B.n) for u in at[x] for y in bits(u) if not inside(y, u))
    if w:
        wit["B3'"] = w
    return NbhdFlags("B1" not in wit, "B2" not in wit, "B3" not in wit, "B3'" not in wit, wit)


def topology_of(B: NbhdSystem, labels=None) -> FiniteTopology:
    """The topology ``{V : every x in V has some member of B(x) inside V}``."""
    flags = validate_nbhd_system(B)
    if not flags.is_system:
        raise InputError(f"not a neighbourhood system: {flags.witnesses}")
    smallest = []
    for fam in B.at:
        u = _full(B.n)
        for v in fam:
            u &= v
        smallest.append(u)
    # close each smallest member under y -> smallest[y]; identity when B3 holds
    minimal = []
    for x in range(B.n):
        u = smallest[x]
        while True:
            grown = u
            for y in bits(u):
                grown |= smallest[y]
            if grown == u:
                break
            u = grown
        minimal.append(u)
    return FiniteTopology(B.n, tuple(minimal), labels)


def _refines(B1: NbhdSystem, B2: NbhdSystem) -> bool:
    """Every member of B1(x) contains some member of B2(x)."""
    return all(any(c & ~u == 0 for c in B2.at[x]) for x in range(B1.n) for u in B1.at[x])


def systems_equivalent(B1: NbhdSystem, B2: NbhdSystem) -> bool:
    if B1.n != B2.n:
        raise InputError("systems live on different carriers")
    return _refines(B1, B2) and _refines(B2, B1)


# -- derived topologies --------------------------------------------------------

def _preimage(fmap: Sequence[int], s: int) -> int:
    return mask(x for x, y in enumerate(fmap) if (s >> y) & 1)


Target = Union[FiniteTopology, NbhdSystem]


def induced_by_maps(n: int, targets: Sequence[tuple[Target, Sequence[int]]], labels=None) -> FiniteTopology:
    """Coarsest topology on ``n`` points making every map continuous.

    Targets given as neighbourhood systems use the preimages of their members
    as subbase; the result is checked against the subbase of preimages of all
    open sets of ``topology_of(target)``.
    """
    full_sub, nbhd_sub = [], []
    any_nbhd = False
    for target, fmap in targets:
        fmap = [int(v) for v in fmap]
        if len(fmap) != n or any(not 0 <= v < target.n for v in fmap):
            raise InputError("map must be total into its target carrier")
        if isinstance(target, NbhdSystem):
            any_nbhd = True
            nbhd_sub.extend(_preimage(fmap, v) for fam in target.at for v in fam)
            full_sub.extend(_preimage(fmap, v) for v in topology_of(target).opens)
        else:
            pre = [_preimage(fmap, v) for v in target.opens]
            full_sub.extend(pre)
            nbhd_sub.extend(pre)
    result = generate_topology(n, full_sub, labels)
    if any_nbhd and generate_topology(n, nbhd_sub) != result:
        raise AssertionError("neighbourhood-system subbase generated a different topology")
    return result


def _as_mask(A) -> int:
    return int(A) if isinstance(A, int) else mask(A)


def relative_topology(T: FiniteTopology, A) -> FiniteTopology:
    """Trace of ``T`` on ``A``, re-indexed onto ``0..|A|-1`` in ascending order."""
    a = _as_mask(A)
    pts = list(bits(a))
    if a & ~T.full:
        raise InputError("subset outside the carrier")
    pos = {p: i for i, p in enumerate(pts)}
    minimal = tuple(mask(pos[y] for y in bits(T.minimal[p] & a)) for p in pts)
    return FiniteTopology(len(pts), minimal, [T.labels[p] for p in pts])


def product_topology(*Ts: FiniteTopology) -> FiniteTopology:
    """Product topology; point ``(x_1..x_r)`` has index in mixed radix, first factor most significant."""
    if len(Ts) == 1 and isinstance(Ts[0], (list, tuple)):
        Ts = tuple(Ts[0])
    if not Ts:
        raise InputError("product of zero factors")
    sizes = [T.n for T in Ts]
    coords = list(itertools.product(*(range(s) for s in sizes)))
    index = {c: i for i, c in enumerate(coords)}
    minimal = []
    for c in coords:
        boxes = itertools.product(*(list(bits(T.minimal[ci])) for T, ci in zip(Ts, c)))
        minimal.append(mask(index[b] for b in boxes))
    labels = ["(" + ",".join(T.labels[ci] for T, ci in zip(Ts, c)) + ")" for c in coords]
    return FiniteTopology(len(coords), tuple(minimal), labels)


def min_neighbourhoods(T: FiniteTopology) -> tuple[int, ...]:
    """``U(x)``: intersection of all open sets containing ``x``."""
    out = []
    for x in range(T.n):
        u = T.full
        for v in T.opens:
            if (v >> x) & 1:
                u &= v
        if not T.is_open(u):
            raise AssertionError(f"smallest neighbourhood of {x} is not open")
        out.append(u)
    return tuple(out)


def is_open_via_cover(T: FiniteTopology, cover: Sequence[int], V: int) -> bool:
    """Openness of ``V`` decided piecewise through the relative topologies of an open cover.

    ``V`` is open iff for every ``x in V`` and every cover member ``C ∋ x``
    some relatively open subset of ``C`` contains ``x`` and lies inside ``V``.
    """
    cover = [int(c) for c in cover]
    if any(not T.is_open(c) for c in cover):
        raise InputError("cover member is not open")
    union = 0
    for c in cover:
        union |= c
    if union != T.full:
        raise InputError("family does not cover the carrier")
    verdict = True
    for x in bits(V):
        for c in cover:
            if not (c >> x) & 1:
                continue
            rel = relative_topology(T, c)
            pos = {p: i for i, p in enumerate(bits(c))}
            v_rel = mask(pos[p] for p in bits(V & c))
            # smallest relative open set containing x is the witness candidate
            if rel.minimal[pos[x]] & ~v_rel:
                verdict = False
    if verdict != T.is_open(V):
        raise AssertionError("cover criterion disagrees with direct openness")
    return verdict


@dataclass(frozen=True)
class CoverData:
    cover: tuple[int, ...]
    refinement: tuple[int, ...]
    assignment: tuple[int, ...]  # refinement[j] ⊆ cover[assignment[j]]

    def point_order(self, x: int) -> int:
        return sum(1 for v in self.refinement if (v >> x) & 1)


def point_finite_refinement(T: FiniteTopology, cover: Sequence[int]) -> CoverData:
    """Open point-finite refinement of an open cover.

    On a finite carrier the cover itself qualifies; duplicates are dropped and
    redundant members removed greedily in (size, bitmask) order.
    """
    cover = tuple(int(c) for c in cover)
    if not cover:
        raise InputError("empty cover")
    if any(not T.is_open(c) for c in cover):
        raise InputError("cover member is not open")
    kept = list(dict.fromkeys(cover))
    union = 0
    for c in kept:
        union |= c
    if union != T.full:
        raise InputError("family does not cover the carrier")
    for c in sorted(kept, key=lambda s: (bin(s).count("1"), s)):
        rest = [d for d in kept if d != c]
        u = 0
        for d in rest:
            u |= d
        if rest and u == T.full:
            kept = rest
    assignment = tuple(cover.index(c) for c in kept)
    data = CoverData(cover, tuple(kept), assignment)
    for j, v in enumerate(data.refinement):
        assert v & ~cover[assignment[j]] == 0
    assert all(data.point_order(x) >= 1 for x in range(T.n))
    return data


def specialization_pairs(T: FiniteTopology) -> list[tuple[int, int]]:
    """Pairs ``(x, y)``, ``x != y``, such that every open set containing ``x`` contains ``y``."""
    return [(x, y) for x in range(T.n) for y in bits(T.minimal[x]) if y != x]


# -- exhaustive enumeration ----------------------------------------------------

def enumerate_topologies_by_subbase(n: int) -> set[FiniteTopology]:
    """Distinct topologies obtained by generating from every family of proper non-empty subsets."""
    proper = list(range(1, _full(n)))
    out = set()
    for choice in range(1 << len(proper)):
        sub = [proper[i] for i in bits(choice)]
        out.add(generate_topology(n, sub))
    return out


def enumerate_topologies_by_closure(n: int) -> set[frozenset[int]]:
    """Every family of subsets containing ∅ and X and closed under ∪ and ∩."""
    full = _full(n)
    proper = list(range(1, full))
    out = set()
    for choice in range(1 << len(proper)):
        fam = [0, full] + [proper[i] for i in bits(choice)]
        fs = set(fam)
        if all((a & b) in fs and (a | b) in fs for a, b in itertools.combinations(fam, 2)):
            out.add(frozenset(fs))
    return out
