"""Finite metric value sets (MVS).

An MVS is stored as a Cayley table over dense indices ``0..k-1``.  The
table is checked for the four defining axioms when the value is built, so
every :class:`MvsTable` in circulation is a genuine MVS:

* M1  ``+`` is associative;
* M2  ``neutral`` is a two-sided identity;
* M3  ``a + b == e`` only when ``a == b == e``;
* M4  any two non-neutral elements have a common non-neutral left part,
  i.e. some ``c != e`` with ``c ⊴ a`` and ``c ⊴ b``.

``a ⊴ b`` holds when ``a + c == b`` for some ``c``; ``a ◁ b`` when such a
``c`` exists with ``c != e``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .errors import AxiomViolation, InputError

__all__ = [
    "MvsTable",
    "MvsHom",
    "mvs_violation",
    "axiom_witnesses",
    "validate_mvs",
    "leq",
    "lt",
    "is_commutative",
    "is_atom_free",
    "is_strictly_atom_free",
    "classify",
    "validate_hom",
    "adjoin_infinity",
    "n_times",
    "find_subdivision",
    "common_lower_bound",
    "max_mvs",
    "collapse_mvs",
    "canonical_form",
    "are_isomorphic",
    "enumerate_mvs",
    "enumerate_mvs_bruteforce",
    "MAX_ENUM_ORDER",
]

MAX_ENUM_ORDER = 5


def _m1(table, neutral):
    k = len(table)
    for a in range(k):
        row_a = table[a]
        for b in range(k):
            ab = row_a[b]
            row_b = table[b]
            for c in range(k):
                if table[ab][c] != row_a[row_b[c]]:
                    return (a, b, c)
    return None


def _m2(table, neutral):
    return next(((a,) for a in range(len(table))
                 if table[neutral][a] != a or table[a][neutral] != a), None)


def _m3(table, neutral):
    k = len(table)
    return next(((a, b) for a in range(k) for b in range(k)
                 if table[a][b] == neutral and (a != neutral or b != neutral)), None)


def _m4(table, neutral):
    below = _left_parts(table)
    k = len(table)
    star = [a for a in range(k) if a != neutral]
    for a in star:
        for b in star:
            if not any(c != neutral and c in below[a] and c in below[b] for c in range(k)):
                return (a, b)
    return None


AXIOMS = {
    "M1": (_m1, "(a+b)+c != a+(b+c)"),
    "M2": (_m2, "declared neutral element is not an identity"),
    "M3": (_m3, "a+b = e with a non-neutral summand"),
    "M4": (_m4, "no common non-neutral left part"),
}


def axiom_witnesses(table: Sequence[Sequence[int]], neutral: int) -> dict[str, tuple | None]:
    """Each axiom checked independently: tag -> witness, or None when it holds."""
    return {tag: check(table, neutral) for tag, (check, _) in AXIOMS.items()}


def mvs_violation(table: Sequence[Sequence[int]], neutral: int) -> AxiomViolation | None:
    """Return the first failed axiom (checked in order M1..M4), or None."""
    for tag, (check, text) in AXIOMS.items():
        w = check(table, neutral)
        if w is not None:
            return AxiomViolation(tag, w, text)
    return None


def _left_parts(table) -> list[set[int]]:
    """``below[b]`` is the set of ``a`` with ``a ⊴ b``."""
    below: list[set[int]] = [set() for _ in table]
    for a, row in enumerate(table):
        for ab in row:
            below[ab].add(a)
    return below


@dataclass(frozen=True)
class MvsTable:
    """A validated finite MVS.

    ``table[i][j]`` is the index of ``i + j``.  Labels are presentation only;
    two tables are equal when neutral and table agree.
    """

    labels: tuple[str, ...] = field(compare=False)
    neutral: int
    table: tuple[tuple[int, ...], ...]
    leq_matrix: tuple[tuple[bool, ...], ...] = field(init=False, repr=False, compare=False)
    lt_matrix: tuple[tuple[bool, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        table = tuple(tuple(int(v) for v in row) for row in self.table)
        k = len(table)
        if k < 2:
            raise InputError(f"an MVS needs at least two elements, got {k}")
        if len(labels) != k:
            raise InputError(f"{len(labels)} labels for a {k}x{k} table")
        if len(set(labels)) != k:
            raise InputError("MVS labels must be distinct")
        if any(len(row) != k for row in table):
            raise InputError("table is not square")
        if any(v < 0 or v >= k for row in table for v in row):
            raise InputError("table entry out of range")
        if not 0 <= self.neutral < k:
            raise InputError(f"neutral index {self.neutral} out of range")
        bad = mvs_violation(table, self.neutral)
        if bad is not None:
            raise bad
        e = self.neutral
        leq_m = [[False] * k for _ in range(k)]
        lt_m = [[False] * k for _ in range(k)]
        for a in range(k):
            for c in range(k):
                b = table[a][c]
                leq_m[a][b] = True
                if c != e:
                    lt_m[a][b] = True
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "leq_matrix", tuple(map(tuple, leq_m)))
        object.__setattr__(self, "lt_matrix", tuple(map(tuple, lt_m)))

    @property
    def k(self) -> int:
        return len(self.table)

    @property
    def star(self) -> tuple[int, ...]:
        """Indices of the non-neutral elements, ascending."""
        return tuple(i for i in range(self.k) if i != self.neutral)

    def add(self, a: int, b: int) -> int:
        return self.table[a][b]

    def total(self, values) -> int:
        """Left-to-right sum of ``values``; the empty sum is the neutral element."""
        acc = self.neutral
        for v in values:
            acc = self.table[acc][v]
        return acc

    def leq(self, a: int, b: int) -> bool:
        return self.leq_matrix[a][b]

    def lt(self, a: int, b: int) -> bool:
        return self.lt_matrix[a][b]

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InputError(f"unknown MVS element {label!r}") from None

    def __str__(self) -> str:
        return f"MVS[{', '.join(self.labels)}; e={self.labels[self.neutral]}]"


def validate_mvs(labels: Sequence[str], neutral: int, table: Sequence[Sequence[int]]) -> MvsTable:
    """Build an :class:`MvsTable`, raising :class:`AxiomViolation` on the first failed axiom."""
    return MvsTable(tuple(labels), neutral, tuple(tuple(r) for r in table))


def leq(M: MvsTable, a: int, b: int) -> bool:
    return M.leq(a, b)


def lt(M: MvsTable, a: int, b: int) -> bool:
    return M.lt(a, b)


def is_commutative(M: MvsTable) -> bool:
    t = M.table
    return all(t[a][b] == t[b][a] for a in range(M.k) for b in range(a))


def is_atom_free(M: MvsTable) -> bool:
    if not is_commutative(M):
        return False
    return all(any(M.lt(n, m) for n in M.star) for m in M.star)


def is_strictly_atom_free(M: MvsTable) -> bool:
    if not is_commutative(M):
        return False
    return all(any(M.lt(n, m) and not M.lt(m, n) for n in M.star) for m in M.star)


def classify(M: MvsTable) -> dict[str, bool]:
    return {
        "commutative": is_commutative(M),
        "atom_free": is_atom_free(M),
        "strictly_atom_free": is_strictly_atom_free(M),
    }


@dataclass(frozen=True)
class MvsHom:
    source: MvsTable
    target: MvsTable
    map: tuple[int, ...]

    def __call__(self, i: int) -> int:
        return self.map[i]

    @property
    def is_surjective(self) -> bool:
        return set(self.map) == set(range(self.target.k))


def validate_hom(h: Sequence[int], M1: MvsTable, M2: MvsTable) -> MvsHom:
    """Check H1 (only e maps to e) and H2 (additivity)."""
    h = tuple(int(v) for v in h)
    if len(h) != M1.k or any(not 0 <= v < M2.k for v in h):
        raise InputError("homomorphism must be a total map into the target carrier")
    for i in range(M1.k):
        if (h[i] == M2.neutral) != (i == M1.neutral):
            raise AxiomViolation("H1", (i,), "h(m) = e exactly when m = e fails")
    for i in range(M1.k):
        for j in range(M1.k):
            if h[M1.add(i, j)] != M2.add(h[i], h[j]):
                raise AxiomViolation("H2", (i, j), "h(m+n) != h(m)+h(n)")
    return MvsHom(M1, M2, h)


def adjoin_infinity(M: MvsTable, label: str = "∞") -> MvsTable:
    """Append an absorbing element (index ``M.k``) to ``M``."""
    while label in M.labels:
        label += "'"
    k = M.k
    inf = k
    rows = [list(row) + [inf] for row in M.table]
    rows.append([inf] * (k + 1))
    return MvsTable(M.labels + (label,), M.neutral, tuple(map(tuple, rows)))


def n_times(M: MvsTable, m: int, n: int) -> int:
    """``m + m + ... + m`` with ``n`` summands."""
    if n < 1:
        raise InputError("n must be a positive integer")
    acc = m
    for _ in range(n - 1):
        acc = M.add(acc, m)
    return acc


def find_subdivision(M: MvsTable, m: int, n: int) -> int | None:
    """Smallest ``m'`` in M* with ``n·m' ⊴ m``, or None when there is none."""
    for c in M.star:
        if M.leq(n_times(M, c, n), m):
            return c
    return None


def common_lower_bound(M: MvsTable, ms: Sequence[int]) -> int:
    """Smallest ``c`` in M* with ``c ⊴ m`` for every ``m`` in ``ms``."""
    ms = list(ms)
    if not ms:
        raise InputError("common_lower_bound needs at least one element")
    if any(m == M.neutral for m in ms):
        raise InputError("common_lower_bound takes non-neutral elements only")
    for c in M.star:
        if all(M.leq(c, m) for m in ms):
            return c
    raise AxiomViolation("M4", tuple(ms), "no common non-neutral lower bound")


def max_mvs(k: int = 3) -> MvsTable:
    """``({0..k-1}, max)``; atom-free for every k >= 2."""
    return MvsTable(tuple(str(i) for i in range(k)), 0,
                    tuple(tuple(max(a, b) for b in range(k)) for a in range(k)))


def collapse_mvs() -> MvsTable:
    """``{0,1,2}`` with ``x + y = 2`` whenever both are non-zero."""
    t = tuple(tuple(a if b == 0 else b if a == 0 else 2 for b in range(3)) for a in range(3))
    return MvsTable(("0", "1", "2"), 0, t)


# -- isomorphism and enumeration ------------------------------------------------

def _normalized(M: MvsTable) -> tuple[tuple[int, ...], ...]:
    """The table re-indexed so the neutral element sits at index 0."""
    order = [M.neutral] + list(M.star)
    pos = {old: new for new, old in enumerate(order)}
    return tuple(tuple(pos[M.table[a][b]] for b in order) for a in order)


def canonical_form(M: MvsTable) -> tuple[tuple[int, ...], ...]:
    """Lexicographically least table over all neutral-fixing relabelings."""
    t = _normalized(M)
    k = len(t)
    best = None
    for perm in itertools.permutations(range(1, k)):
        sigma = (0,) + perm
        new = [[0] * k for _ in range(k)]
        for a in range(k):
            for b in range(k):
                new[sigma[a]][sigma[b]] = sigma[t[a][b]]
        cand = tuple(map(tuple, new))
        if best is None or cand < best:
            best = cand
    return best


def are_isomorphic(M1: MvsTable, M2: MvsTable) -> bool:
    return M1.k == M2.k and canonical_form(M1) == canonical_form(M2)


def _check_order(k: int, hi: int) -> None:
    if not 2 <= k <= hi:
        raise InputError(f"enumeration supports orders 2..{hi}, got {k}")


def _from_rows(rows) -> MvsTable:
    return MvsTable(tuple(str(i) for i in range(len(rows))), 0, tuple(map(tuple, rows)))


def _semigroups(s: int) -> Iterator[list[list[int]]]:
    """All associative tables on ``1..s`` (values in ``1..s``), by backtracking."""
    cells = [(a, b) for a in range(1, s + 1) for b in range(1, s + 1)]
    t = [[0] * (s + 1) for _ in range(s + 1)]  # 0 marks "unset" inside this search

    def consistent(a: int, b: int) -> bool:
        # every triple touching the freshly assigned cell with all lookups known
        elems = range(1, s + 1)
        for x in elems:
            for y in elems:
                xy = t[x][y]
                if not xy:
                    continue
                for z in elems:
                    yz = t[y][z]
                    if not yz:
                        continue
                    lhs, rhs = t[xy][z], t[x][yz]
                    if lhs and rhs and lhs != rhs:
                        return False
        return True

    def rec(i: int):
        if i == len(cells):
            yield [row[:] for row in t]
            return
        a, b = cells[i]
        for v in range(1, s + 1):
            t[a][b] = v
            if consistent(a, b):
                yield from rec(i + 1)
        t[a][b] = 0

    yield from rec(0)


def enumerate_mvs(k: int, up_to_iso: bool = False) -> Iterator[MvsTable]:
    """Every MVS of order ``k`` with neutral element at index 0.

    By M3 the non-neutral elements form a subsemigroup, so the search runs
    over associative tables on ``1..k-1`` and keeps those passing M4.  With
    ``up_to_iso`` only the first table of each isomorphism class is yielded.
    """
    _check_order(k, MAX_ENUM_ORDER)
    seen = set()
    for sg in _semigroups(k - 1):
        rows = [[b for b in range(k)]] + [[a] + sg[a][1:] for a in range(1, k)]
        if mvs_violation(rows, 0) is not None:
            continue
        M = _from_rows(rows)
        if up_to_iso:
            key = canonical_form(M)
            if key in seen:
                continue
            seen.add(key)
        yield M


def enumerate_mvs_bruteforce(k: int, up_to_iso: bool = False) -> Iterator[MvsTable]:
    """Independent enumeration: every table with identity row/column at 0, filtered by the axioms.

    Exponential in ``(k-1)**2``; limited to ``k <= 4``.
    """
    _check_order(k, 4)
    inner = (k - 1) ** 2
    seen = set()
    for values in itertools.product(range(k), repeat=inner):
        rows = [list(range(k))]
        for a in range(1, k):
            base = (a - 1) * (k - 1)
            rows.append([a] + list(values[base:base + k - 1]))
        if mvs_violation(rows, 0) is not None:
            continue
        M = _from_rows(rows)
        if up_to_iso:
            key = canonical_form(M)
            if key in seen:
                continue
            seen.add(key)
        yield M
