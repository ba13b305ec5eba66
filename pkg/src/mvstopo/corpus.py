"""Seeded random quasimetric spaces for property suites.

Generator, fixed so that a seed names one corpus forever:

1. ``rng = random.Random(seed)`` (Python's Mersenne Twister; any int seed,
   64-bit values included).
2. Per space: ``n = rng.randint(1, max_points)``; then for each ordered pair
   ``x != y`` in row-major order one draw ``rng.choice(M elements)``.  With
   ``symmetric=True`` only pairs ``x < y`` are drawn and mirrored.
3. Repair: for ``y`` in ``0..n-1``, then ``x``, then ``z`` (Floyd-Warshall
   order), replace ``d[x][z]`` by ``d[x][y] + d[y][z]`` whenever the old
   value is not ``⊴`` that sum.  When ``⊴`` is a total order on ``M`` (as
   for :func:`~mvstopo.mvs.max_mvs`) values only go down and the result is
   a quasimetric; the final :class:`QmSpace` constructor re-checks it.

Points are labelled ``p0, p1, ...``.
"""

from __future__ import annotations

import random
from typing import Iterator

from .errors import HypothesisError
from .mvs import MvsTable, max_mvs
from .qmetric import QmSpace

__all__ = ["DEFAULT_MVS", "random_space", "random_spaces", "random_pairs"]

DEFAULT_MVS = max_mvs(3)


def _is_chain(M: MvsTable) -> bool:
    return all(M.leq(a, b) or M.leq(b, a) for a in range(M.k) for b in range(M.k))


def random_space(rng: random.Random, M: MvsTable = DEFAULT_MVS, max_points: int = 4,
                 symmetric: bool = False) -> QmSpace:
    if not _is_chain(M):
        raise HypothesisError("the corpus repair step needs a totally ordered MVS")
    if max_points < 1:
        raise ValueError("max_points must be positive")
    n = rng.randint(1, max_points)
    d = [[M.neutral] * n for _ in range(n)]
    for x in range(n):
        for y in range(n):
            if x == y or (symmetric and y < x):
                continue
            d[x][y] = rng.choice(range(M.k))
            if symmetric:
                d[y][x] = d[x][y]
    for y in range(n):
        for x in range(n):
            for z in range(n):
                s = M.add(d[x][y], d[y][z])
                if not M.leq(d[x][z], s):
                    d[x][z] = s
    return QmSpace(tuple(f"p{i}" for i in range(n)), M, tuple(map(tuple, d)))


def random_spaces(seed: int, count: int, M: MvsTable = DEFAULT_MVS, max_points: int = 4,
                  symmetric: bool = False) -> Iterator[QmSpace]:
    rng = random.Random(seed)
    for _ in range(count):
        yield random_space(rng, M, max_points, symmetric)


def random_pairs(seed: int, count: int, M: MvsTable = DEFAULT_MVS,
                 max_points: int = 4) -> Iterator[tuple[QmSpace, QmSpace]]:
    """Consecutive draws from one stream: pair ``i`` uses spaces ``2i`` and ``2i+1``."""
    rng = random.Random(seed)
    for _ in range(count):
        yield random_space(rng, M, max_points), random_space(rng, M, max_points)
