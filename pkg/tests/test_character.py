import pytest
from hypothesis import given, settings, strategies as st

from mvstopo.character import (
    convexify_stage,
    convexify_until,
    embed_full,
    entourage_mvs,
    full_convex_report,
    is_convex,
    metrize_from_base,
    roundtrip,
)
from mvstopo.errors import AxiomViolation, HypothesisError
from mvstopo.mvs import are_isomorphic, max_mvs
from mvstopo.qmetric import QmSpace, alexandrov_metrize, canonical_metric_function, induced_topology
from mvstopo.quniform import Entourage, base_from_qm, compose
from mvstopo.report import Report
from mvstopo.topology import indiscrete

from conftest import sierpinski, space_from_seed

seeds = st.integers(0, 2**63 - 1)


def midpoint_oracle(Q):
    """(x, y, a, b) with f(x,y) = a+b and no z having f(x,z)=a, f(z,y)=b."""
    M = Q.mvs
    out = []
    for x in range(Q.n):
        for y in range(Q.n):
            for a in range(M.k):
                for b in range(M.k):
                    if M.add(a, b) == Q.d[x][y] and not any(
                            Q.d[x][z] == a and Q.d[z][y] == b for z in range(Q.n)):
                        out.append((x, y, a, b))
    return out


def test_full_and_convex_examples(uniform3, max3):
    fc = full_convex_report(uniform3)
    assert fc.full and fc.convex
    fm = full_convex_report(canonical_metric_function(max3))
    assert fm.full and not fm.convex
    assert (0, 2, 2, 1) in fm.unrealized
    one = full_convex_report(QmSpace(("p",), max3, ((0,),)))
    assert not one.full and one.missing == (1, 2)


def test_embed_one_point(max3):
    inc = embed_full(QmSpace(("p",), max3, ((0,),)))
    big = inc.space
    assert big.n == 3
    assert big.d[1][0] == 1          # (p,1) to (p,0)
    assert inc.image == (0,)
    assert full_convex_report(big).full


def test_embed_empty_space_is_canonical(max3):
    inc = embed_full(QmSpace((), max3, ()))
    assert inc.space.d == canonical_metric_function(max3).d


def test_worked_quadruple(max3):
    Q = QmSpace(("a", "b"), max3, ((0, 2), (2, 0)))
    inc = convexify_stage(Q)
    S = inc.space
    q = S.index("(a,1,2,b)")
    assert S.d[0][q] == 1 and S.d[q][1] == 2
    assert S.d[0][1] == Q.d[0][1] and S.d[1][0] == Q.d[1][0]


def test_stage_on_convex_space_grows_but_stays_convex(uniform3):
    S = convexify_stage(uniform3).space
    assert S.n > uniform3.n
    assert not [w for w in midpoint_oracle(S) if w[0] < 3 and w[1] < 3]


def test_convexify_budgets(clique, uniform3, max3):
    assert convexify_until(clique).stages == 0
    assert convexify_until(uniform3).stages == 0
    res = convexify_until(canonical_metric_function(max3), max_stages=3, max_points=1000)
    # observed: 3 -> 29 points, the next stage would need 3721
    assert res.partial and res.stages == 1 and res.space.n == 29
    assert "3721" in res.reason


def test_entourage_mvs_clique(clique, max3):
    rep = Report("clique")
    em = entourage_mvs(clique, rep)
    assert len(em.members) == 3
    U0, U1, U2 = em.members
    assert U0 == Entourage.diagonal(9) and U2 == Entourage.full(9)
    assert U1 == Entourage.from_pairs(9, [(x, y) for x in range(9) for y in range(9) if x // 3 == y // 3])
    assert compose(U1, U1) == U1
    assert em.mvs.add(1, 1) == 1
    assert are_isomorphic(em.mvs, max3)
    assert em.hom.is_surjective
    assert rep.ok


def test_entourage_mvs_uniform(uniform3):
    em = entourage_mvs(uniform3)
    assert em.members == (Entourage.diagonal(3), Entourage.full(3))
    assert are_isomorphic(em.mvs, max_mvs(2))


def test_entourage_mvs_hypotheses(max3):
    with pytest.raises(HypothesisError):
        entourage_mvs(canonical_metric_function(max3))     # not convex
    with pytest.raises(HypothesisError):
        entourage_mvs(QmSpace(("p",), max3, ((0,),)))     # not full


def test_metrize_from_clique_base(clique):
    em = entourage_mvs(clique)
    res = metrize_from_base(clique.points, em.u0, em.base)
    assert res.same_topology
    assert res.topology == induced_topology(clique)


def test_metrize_full_base_on_two_points():
    res = metrize_from_base(["x", "y"], Entourage.diagonal(2), [Entourage.full(2)])
    assert res.space.d == ((0, 1), (1, 0))
    assert res.topology == indiscrete(2)
    assert len(res.members) == 2


def test_metrize_refuses_single_point():
    with pytest.raises(AxiomViolation):
        metrize_from_base(["p"], Entourage.diagonal(1), [Entourage.diagonal(1)])


def test_roundtrip_clique(clique):
    res = roundtrip(clique)
    assert res.complete and res.report.ok
    assert res.report.facts["convexify_stages"] == 0
    assert res.report.facts["entourage_mvs_order"] == 3


def test_roundtrip_uniform(uniform3):
    res = roundtrip(uniform3)
    assert res.complete and res.report.ok


def test_roundtrip_sierpinski_hits_budget():
    # observed data, not a theorem: two stages reach 386 points and a third would need 707476
    res = roundtrip(alexandrov_metrize(sierpinski()))
    assert not res.complete and not res.report.ok
    assert res.report.facts["convexify_stages"] == 2
    assert res.report.facts["final_points"] == 386
    failed = [c.anchor for c in res.report.clauses if not c.passed]
    assert failed == ["roundtrip: convex space reached within budget"]


def test_roundtrip_one_point_embeds_then_stops(max3):
    res = roundtrip(QmSpace(("p",), max3, ((0,),)), max_points=1000)
    assert not res.complete
    assert res.report.facts["final_points"] == 29


# -- properties -------------------------------------------------------------------

@settings(max_examples=100)
@given(seeds)
def test_embedding_restriction_and_fullness(seed):
    Q = space_from_seed(seed)
    inc = embed_full(Q)
    S, k = inc.space, Q.mvs.k
    assert all(S.d[inc.image[x]][inc.image[y]] == Q.d[x][y] for x in range(Q.n) for y in range(Q.n))
    assert all(S.d[x * k + m][x * k] == m for x in range(Q.n) for m in range(k))
    assert full_convex_report(S).full


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_stage_realizes_every_old_split(seed):
    Q = space_from_seed(seed, max_points=3)
    S = convexify_stage(Q).space
    assert all(S.d[x][y] == Q.d[x][y] for x in range(Q.n) for y in range(Q.n))
    assert not [w for w in midpoint_oracle(S) if w[0] < Q.n and w[1] < Q.n]


@settings(max_examples=60)
@given(seeds)
def test_convexity_scan_matches_oracle(seed):
    Q = space_from_seed(seed)
    fc = full_convex_report(Q, limit=None)
    oracle = midpoint_oracle(Q)
    assert fc.unrealized_count == len(oracle)
    assert list(fc.unrealized) == sorted(oracle)
    assert is_convex(Q) == (not oracle)


def partition_space(sizes, perm):
    """Blocks of the given sizes, distance 1 inside a block and 2 across, points shuffled."""
    block = [b for b, size in enumerate(sizes) for _ in range(size)]
    block = [block[i] for i in perm]
    n = len(block)
    d = tuple(tuple(0 if x == y else 1 if block[x] == block[y] else 2 for y in range(n)) for x in range(n))
    return QmSpace(None, max_mvs(3), d), block


partitions = st.lists(st.integers(3, 4), min_size=3, max_size=4).flatmap(
    lambda sizes: st.tuples(st.just(sizes), st.permutations(range(sum(sizes)))))


@settings(max_examples=25, deadline=None)
@given(partitions)
def test_partition_spaces_roundtrip(args):
    Q, block = partition_space(*args)
    fc = full_convex_report(Q)
    assert fc.full and fc.convex
    em = entourage_mvs(Q)
    assert are_isomorphic(em.mvs, max_mvs(3))
    assert set(base_from_qm(Q).base.members) == set(em.base.members)
    res = metrize_from_base(Q.points, em.u0, em.base)
    assert res.topology == induced_topology(Q)
    assert set(res.topology.minimal) == {sum(1 << x for x in range(Q.n) if block[x] == b) for b in set(block)}
