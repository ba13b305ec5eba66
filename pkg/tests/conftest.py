"""Shared fixtures and brute-force oracles.

The oracles work on plain Python sets and never call the library's own
bitmask machinery, so agreement with them is a genuine cross-check.
"""

import itertools
import random
from pathlib import Path

import pytest
from hypothesis import settings

from mvstopo import corpus
from mvstopo.mvs import max_mvs, collapse_mvs
from mvstopo.qmetric import QmSpace
from mvstopo.topology import FiniteTopology

# Wall-clock deadlines make exact enumeration tests flaky on loaded machines.
settings.register_profile("exact", deadline=None)
settings.load_profile("exact")

MODELS = Path(__file__).resolve().parent.parent / "models"


# -- oracles -----------------------------------------------------------------

def oracle_leq(M, a, b):
    return any(M.table[a][c] == b for c in range(M.k))


def oracle_lt(M, a, b):
    return any(M.table[a][c] == b for c in range(M.k) if c != M.neutral)


def oracle_is_qm(M, d):
    n = len(d)
    if any(d[x][x] != M.neutral for x in range(n)):
        return False
    return all(oracle_leq(M, d[x][z], M.table[d[x][y]][d[y][z]])
               for x in range(n) for y in range(n) for z in range(n))


def oracle_ball(Q, x, m, closed=False):
    rel = oracle_leq if closed else oracle_lt
    return frozenset(y for y in range(Q.n) if rel(Q.mvs, Q.d[x][y], m))


def oracle_opens(Q):
    """All subsets V with: every x in V has an open ball inside V."""
    out = set()
    for r in range(Q.n + 1):
        for V in itertools.combinations(range(Q.n), r):
            V = frozenset(V)
            if all(any(oracle_ball(Q, x, m) <= V for m in Q.mvs.star) for x in V):
                out.add(V)
    return out


def opens_as_sets(T):
    return {frozenset(i for i in range(T.n) if (v >> i) & 1) for v in T.opens}


def close_family(n, family):
    """Smallest family containing ∅, X, ``family`` and closed under ∩ and ∪."""
    fam = {frozenset(), frozenset(range(n))} | {frozenset(s) for s in family}
    while True:
        new = {a & b for a in fam for b in fam} | {a | b for a in fam for b in fam}
        if new <= fam:
            return fam
        fam |= new


def from_sets(n, opens, labels=None):
    """Topology value from an explicit family of open sets."""
    minimal = []
    for x in range(n):
        u = frozenset(range(n))
        for v in opens:
            if x in v:
                u &= v
        minimal.append(sum(1 << i for i in u))
    return FiniteTopology(n, tuple(minimal), labels)


# -- fixtures ----------------------------------------------------------------

@pytest.fixture
def max3():
    return max_mvs(3)


@pytest.fixture
def collapse():
    return collapse_mvs()


def clique_space():
    pts = [f"{c}{i}" for c in "abc" for i in range(3)]
    d = tuple(tuple(0 if x == y else 1 if x[0] == y[0] else 2 for y in pts) for x in pts)
    return QmSpace(tuple(pts), max_mvs(3), d)


def uniform_space():
    return QmSpace(("u", "v", "w"), max_mvs(2), tuple(tuple(0 if x == y else 1 for y in range(3)) for x in range(3)))


def sierpinski():
    return FiniteTopology(2, (0b01, 0b11), ("a", "b"))


@pytest.fixture
def clique():
    return clique_space()


@pytest.fixture
def uniform3():
    return uniform_space()


@pytest.fixture
def sierp():
    return sierpinski()


def space_from_seed(seed, symmetric=False, max_points=4):
    return corpus.random_space(random.Random(seed), max_points=max_points, symmetric=symmetric)


# -- acceptance summary ----------------------------------------------------------

ACCEPTANCE: dict[int, tuple[str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        status, title = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {title}")
