import itertools

import pytest
from hypothesis import given, settings, strategies as st

from mvstopo.errors import InputError
from mvstopo.topology import (
    FiniteTopology,
    NbhdSystem,
    discrete,
    enumerate_topologies_by_closure,
    enumerate_topologies_by_subbase,
    generate_topology,
    generate_topology_closure,
    indiscrete,
    induced_by_maps,
    is_open_via_cover,
    min_neighbourhoods,
    point_finite_refinement,
    product_topology,
    relative_topology,
    specialization_pairs,
    subbase_reduction_equivalent,
    systems_equivalent,
    topology_from_opens,
    topology_of,
    validate_nbhd_system,
)

from conftest import close_family, from_sets, opens_as_sets

S = lambda *xs: sum(1 << x for x in xs)  # noqa: E731  points 0-indexed


def test_generate_from_overlapping_pair():
    # points 1,2,3 are indices 0,1,2
    T = generate_topology(3, [S(0, 1), S(1, 2)])
    assert set(T.opens) == {0, S(1), S(0, 1), S(1, 2), S(0, 1, 2)}
    assert frozenset(T.opens) == generate_topology_closure(3, [S(0, 1), S(1, 2)])


def test_generate_edge_cases():
    assert set(generate_topology(3, []).opens) == {0, 0b111}
    assert len(generate_topology(3, [S(0), S(1), S(2)]).opens) == 8


def test_subbase_reduction():
    assert subbase_reduction_equivalent(2, [S(0, 1), S(0), S(1)], [S(0), S(1)])
    assert subbase_reduction_equivalent(2, [S(0), S(1)], [S(0), S(1)])
    with pytest.raises(InputError):
        subbase_reduction_equivalent(2, [S(0, 1)], [S(0)])


def test_topology_validation():
    with pytest.raises(InputError):
        FiniteTopology(2, (0b10, 0b11))      # 0 not in U(0)
    with pytest.raises(InputError):
        FiniteTopology(3, (0b011, 0b110, 0b100))   # 1 in U(0) but U(1) not inside U(0)
    with pytest.raises(InputError):
        topology_from_opens(2, [0, 0b01, 0b10])    # union missing


def test_neighbourhood_systems():
    n = 3
    disc = NbhdSystem(n, tuple((1 << x,) for x in range(n)))
    f = validate_nbhd_system(disc)
    assert f.is_system and f.is_open_system
    assert topology_of(disc) == discrete(n)
    whole = NbhdSystem(n, ((0b111,),) * n)
    assert validate_nbhd_system(whole).is_system
    assert topology_of(whole) == indiscrete(n)


def test_nbhd_axiom_failures():
    f = validate_nbhd_system(NbhdSystem(2, ((0b10,), (0b10,))))
    assert not f.b1
    # B2: two members at 0 whose meet contains no member
    f = validate_nbhd_system(NbhdSystem(3, ((0b011, 0b101), (0b010,), (0b100,))))
    assert f.b1 and not f.b2
    with pytest.raises(InputError):
        topology_of(NbhdSystem(2, ((0b10,), (0b10,))))


def test_systems_equivalent():
    disc = NbhdSystem(2, ((0b01,), (0b10,)))
    ind = NbhdSystem(2, ((0b11,), (0b11,)))
    assert systems_equivalent(disc, disc)
    assert not systems_equivalent(disc, ind)


def test_induced_by_maps():
    T = generate_topology(3, [S(0, 1), S(1, 2)])
    assert induced_by_maps(3, [(T, [0, 1, 2])]) == T
    assert induced_by_maps(3, [(T, [1, 1, 1])]) == indiscrete(3)
    A, B = generate_topology(3, [S(0, 1)]), generate_topology(3, [S(1, 2)])
    assert induced_by_maps(3, [(A, [0, 1, 2]), (B, [0, 1, 2])]) == T


def test_relative_and_product(sierp):
    rel = relative_topology(sierp, S(1))
    assert rel.n == 1 and set(rel.opens) == {0, 1} and rel.labels == ("b",)
    point = discrete(1)
    assert product_topology(sierp, point).minimal == sierp.minimal
    assert product_topology(discrete(2), discrete(2)) == discrete(4)


def test_minimal_neighbourhoods(sierp):
    assert min_neighbourhoods(sierp) == (S(0), S(0, 1))
    assert min_neighbourhoods(discrete(3)) == (1, 2, 4)
    assert min_neighbourhoods(indiscrete(3)) == (7, 7, 7)


def test_open_via_cover():
    T = generate_topology(3, [S(0, 1), S(1, 2)])
    cover = [S(0, 1), S(1, 2)]
    assert is_open_via_cover(T, cover, S(1))
    assert not is_open_via_cover(T, cover, S(0))
    assert is_open_via_cover(T, cover, T.full)


def test_point_finite_refinement():
    T = generate_topology(3, [S(0, 1), S(1, 2)])
    assert point_finite_refinement(T, [S(0, 1), S(1, 2)]).refinement == (S(0, 1), S(1, 2))
    assert point_finite_refinement(T, [S(0, 1), S(1, 2), S(0, 1)]).refinement == (S(0, 1), S(1, 2))
    U = generate_topology(3, [S(0)])
    data = point_finite_refinement(U, [U.full, S(0)])
    assert data.refinement == (U.full,)
    assert data.assignment == (0,)


def test_specialization(sierp):
    assert specialization_pairs(sierp) == [(1, 0)]


def test_topology_counts_and_paths_agree():
    expected = {1: 1, 2: 4, 3: 29}
    for n, count in expected.items():
        a = enumerate_topologies_by_subbase(n)
        b = enumerate_topologies_by_closure(n)
        assert len(a) == len(b) == count
        assert {frozenset(T.opens) for T in a} == b


@pytest.mark.slow
def test_four_point_topologies():
    a = enumerate_topologies_by_subbase(4)
    assert len(a) == 355
    assert {frozenset(T.opens) for T in a} == enumerate_topologies_by_closure(4)


# -- properties -----------------------------------------------------------------

families = st.integers(1, 4).flatmap(
    lambda n: st.tuples(st.just(n), st.lists(st.integers(0, (1 << n) - 1), max_size=5)))


def as_sets(n, masks):
    return [frozenset(i for i in range(n) if (m >> i) & 1) for m in masks]


@given(families)
def test_generation_matches_closure_oracle(fam):
    n, sub = fam
    T = generate_topology(n, sub)
    assert opens_as_sets(T) == close_family(n, as_sets(n, sub))


@given(families)
def test_opens_are_closed_under_union_and_meet(fam):
    n, sub = fam
    opens = set(generate_topology(n, sub).opens)
    assert all(a | b in opens and a & b in opens for a in opens for b in opens)


@given(families, st.integers(1, 15))
def test_relative_topology_is_the_trace(fam, a):
    n, sub = fam
    a &= (1 << n) - 1
    if not a:
        return
    T = generate_topology(n, sub)
    pts = [p for p in range(n) if (a >> p) & 1]
    trace = {frozenset(i for i, p in enumerate(pts) if (v >> p) & 1) for v in T.opens}
    assert opens_as_sets(relative_topology(T, a)) == trace


@settings(max_examples=40)
@given(families, families)
def test_product_topology_matches_rectangle_oracle(f1, f2):
    T1, T2 = generate_topology(*f1), generate_topology(*f2)
    P = product_topology(T1, T2)
    rects = [frozenset(i * T2.n + j for i in range(T1.n) if (u >> i) & 1 for j in range(T2.n) if (v >> j) & 1)
             for u in T1.opens for v in T2.opens]
    assert opens_as_sets(P) == close_family(T1.n * T2.n, rects)


@given(families)
def test_minimal_neighbourhoods_round_trip(fam):
    T = generate_topology(*fam)
    assert min_neighbourhoods(T) == T.minimal
    assert from_sets(T.n, opens_as_sets(T)) == T


@given(families)
def test_specialization_is_a_preorder(fam):
    T = generate_topology(*fam)
    rel = set(specialization_pairs(T)) | {(x, x) for x in range(T.n)}
    for (x, y), (y2, z) in itertools.product(rel, rel):
        if y == y2:
            assert (x, z) in rel
