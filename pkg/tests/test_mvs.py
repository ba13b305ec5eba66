import itertools

import pytest
from hypothesis import given, settings, strategies as st

from mvstopo.errors import AxiomViolation, InputError
from mvstopo.mvs import (
    MvsTable,
    adjoin_infinity,
    are_isomorphic,
    axiom_witnesses,
    canonical_form,
    classify,
    collapse_mvs,
    common_lower_bound,
    enumerate_mvs,
    enumerate_mvs_bruteforce,
    find_subdivision,
    is_atom_free,
    is_commutative,
    is_strictly_atom_free,
    max_mvs,
    n_times,
    validate_hom,
    validate_mvs,
)

from conftest import oracle_leq, oracle_lt

ORDER3 = list(enumerate_mvs(3))
ORDER4 = list(enumerate_mvs(4))


def test_max_mvs_is_valid_and_commutative(max3):
    assert max3.table == ((0, 1, 2), (1, 1, 2), (2, 2, 2))
    assert is_commutative(max3)


def test_collapse_mvs_is_valid_and_commutative(collapse):
    assert collapse.table == ((0, 1, 2), (1, 2, 2), (2, 2, 2))
    assert is_commutative(collapse)


def test_m3_violation_carries_witness():
    with pytest.raises(AxiomViolation) as exc:
        validate_mvs(["0", "1"], 0, [[0, 1], [1, 0]])
    assert exc.value.axiom == "M3"
    assert exc.value.witness == (1, 1)


@pytest.mark.parametrize("table,tag", [
    ([[0, 1, 2], [1, 2, 2], [2, 1, 2]], "M1"),   # (1+2)+1 = 1 but 1+(2+1) = 2
    ([[0, 1], [0, 1]], "M2"),
    ([[0, 1, 2], [1, 1, 0], [2, 0, 2]], "M1"),
])
def test_first_failed_axiom_is_reported(table, tag):
    with pytest.raises(AxiomViolation) as exc:
        validate_mvs(["0", "1", "2"][: len(table)], 0, table)
    assert exc.value.axiom == tag


def test_m4_failure():
    # 1 and 2 are both idempotent and 1+2 = 2+1 = 3: no common non-neutral left part
    table = [[0, 1, 2, 3], [1, 1, 3, 3], [2, 3, 2, 3], [3, 3, 3, 3]]
    wit = axiom_witnesses(table, 0)
    assert wit["M1"] is None and wit["M2"] is None and wit["M3"] is None
    assert wit["M4"] == (1, 2)
    with pytest.raises(AxiomViolation) as exc:
        validate_mvs("0123", 0, table)
    assert exc.value.axiom == "M4"


@pytest.mark.parametrize("bad", [
    dict(labels=["0"], neutral=0, table=[[0]]),
    dict(labels=["0", "0"], neutral=0, table=[[0, 1], [1, 1]]),
    dict(labels=["0", "1"], neutral=0, table=[[0, 1]]),
    dict(labels=["0", "1"], neutral=0, table=[[0, 1], [1, 2]]),
    dict(labels=["0", "1"], neutral=5, table=[[0, 1], [1, 1]]),
])
def test_malformed_tables_are_input_errors(bad):
    with pytest.raises(InputError):
        validate_mvs(**bad)


def test_inner_group_table_is_an_mvs():
    # {1, 2} is a two-element group with identity 2; e is still adjoined from outside
    M = validate_mvs("012", 0, [[0, 1, 2], [1, 2, 1], [2, 1, 2]])
    assert M.lt(1, 1) and M.lt(2, 1)


def test_labels_do_not_affect_equality(max3):
    assert MvsTable(("a", "b", "c"), 0, max3.table) == max3


def test_order_relations(max3, collapse):
    assert max3.leq(1, 2)
    assert all(max3.leq(max3.neutral, m) for m in range(3))
    assert not collapse.lt(1, 1)
    assert collapse.lt(1, 2)


def test_classification(max3, collapse):
    assert classify(max3) == {"commutative": True, "atom_free": True, "strictly_atom_free": False}
    assert is_commutative(collapse) and not is_atom_free(collapse)
    assert not is_strictly_atom_free(collapse)


def test_homomorphisms(max3):
    ident = validate_hom([0, 1, 2], max3, max3)
    assert ident.is_surjective
    with pytest.raises(AxiomViolation) as exc:
        validate_hom([0, 0, 0], max3, max3)
    assert exc.value.axiom == "H1"


def test_homomorphism_additivity_failure(max3):
    # 1 -> 2, 2 -> 1 keeps H1 but breaks 1+2 = 2
    with pytest.raises(AxiomViolation) as exc:
        validate_hom([0, 2, 1], max3, max3)
    assert exc.value.axiom == "H2"


def test_adjoin_infinity(max3):
    Mi = adjoin_infinity(max3)
    inf = 3
    assert Mi.k == 4 and Mi.labels[inf] == "∞"
    assert all(Mi.leq(m, inf) for m in range(4))
    assert Mi.add(inf, inf) == inf
    assert all(not Mi.lt(inf, m) for m in range(3))
    assert is_atom_free(Mi)


def test_n_times(max3, collapse):
    assert n_times(max3, 1, 3) == 1
    assert all(n_times(M, M.neutral, 4) == M.neutral for M in (max3, collapse))
    assert n_times(collapse, 1, 2) == 2


def test_find_subdivision(max3, collapse):
    assert find_subdivision(max3, 2, 5) == 1
    assert find_subdivision(max3, 1, 2) == 1
    assert find_subdivision(collapse, 1, 2) is None


def test_common_lower_bound(max3, collapse):
    assert common_lower_bound(max3, [1, 2]) == 1
    assert common_lower_bound(max3, [2]) == 1
    assert common_lower_bound(collapse, [1, 2]) == 1


def test_canonical_metric_function_values(max3):
    from mvstopo.qmetric import canonical_metric_function

    Q = canonical_metric_function(max3)
    assert all(Q.d[m][m] == 0 for m in range(3))
    assert Q.d[1][2] == 2


def test_enumeration_small_orders():
    assert len(list(enumerate_mvs(2))) == 1
    assert len(list(enumerate_mvs(2, up_to_iso=True))) == 1
    assert [M.table for M in enumerate_mvs(2)] == [((0, 1), (1, 1))]


@pytest.mark.parametrize("k", [2, 3, 4])
def test_enumeration_paths_agree(k):
    a = {M.table for M in enumerate_mvs(k)}
    b = {M.table for M in enumerate_mvs_bruteforce(k)}
    assert a == b
    ai = {canonical_form(M) for M in enumerate_mvs(k, up_to_iso=True)}
    bi = {canonical_form(M) for M in enumerate_mvs_bruteforce(k, up_to_iso=True)}
    assert ai == bi


def oracle_count(k):
    """Direct product over the inner table, axioms checked by plain loops."""
    inner = range(1, k)
    count = 0
    for vals in itertools.product(range(k), repeat=(k - 1) ** 2):
        t = [[0] * k for _ in range(k)]
        for a in range(k):
            t[0][a] = t[a][0] = a
        for (i, j), v in zip(itertools.product(inner, inner), vals):
            t[i][j] = v
        if any(t[i][j] == 0 for i in inner for j in inner):
            continue
        if any(t[t[a][b]][c] != t[a][t[b][c]] for a in range(k) for b in range(k) for c in range(k)):
            continue
        below = [{a for a in range(k) for c in range(k) if t[a][c] == b} for b in range(k)]
        if all(any(c != 0 and c in below[a] and c in below[b] for c in range(k)) for a in inner for b in inner):
            count += 1
    return count


@pytest.mark.parametrize("k", [2, 3])
def test_enumeration_matches_plain_loop_oracle(k):
    assert len(list(enumerate_mvs(k))) == oracle_count(k)


def test_enumeration_counts_frozen():
    # values fixed by the exhaustive scans above
    assert len(ORDER3) == 7
    assert len(list(enumerate_mvs(3, up_to_iso=True))) == 4
    assert len(ORDER4) == 79
    assert len(list(enumerate_mvs(4, up_to_iso=True))) == 16


@pytest.mark.slow
def test_order_five_has_no_strictly_atom_free_table():
    found = list(enumerate_mvs(5))
    assert len(found) == 1565
    assert not any(is_strictly_atom_free(M) for M in found)


def test_enumeration_rejects_orders_out_of_range():
    with pytest.raises(InputError):
        list(enumerate_mvs(6))
    with pytest.raises(InputError):
        list(enumerate_mvs_bruteforce(5))


def test_isomorphism_ignores_element_order(max3):
    swapped = MvsTable(("0", "2", "1"), 0, ((0, 1, 2), (1, 1, 1), (2, 1, 2)))
    assert are_isomorphic(swapped, max3)
    assert not are_isomorphic(collapse_mvs(), max3)


# -- properties over every small MVS ------------------------------------------

small = st.sampled_from(ORDER3 + ORDER4)


@given(small)
def test_order_relations_match_oracle(M):
    for a in range(M.k):
        for b in range(M.k):
            assert M.leq(a, b) == oracle_leq(M, a, b)
            assert M.lt(a, b) == oracle_lt(M, a, b)
            if M.lt(a, b):
                assert M.leq(a, b)


@given(small)
def test_neutral_is_bottom_and_leq_is_reflexive_transitive(M):
    e = M.neutral
    assert all(M.leq(e, m) and M.leq(m, m) for m in range(M.k))
    for a, b, c in itertools.product(range(M.k), repeat=3):
        if M.leq(a, b) and M.leq(b, c):
            assert M.leq(a, c)


@given(small)
def test_adjoined_infinity_stays_an_mvs(M):
    Mi = adjoin_infinity(M)
    inf = M.k
    assert all(Mi.add(inf, m) == inf == Mi.add(m, inf) for m in range(Mi.k))
    assert is_commutative(Mi) == is_commutative(M)
    if is_atom_free(M):
        assert is_atom_free(Mi)


@given(small)
def test_strictly_atom_free_implies_atom_free(M):
    if is_strictly_atom_free(M):
        assert is_atom_free(M)


@given(small, st.integers(1, 4))
def test_subdivision_is_minimal_and_correct(M, n):
    for m in M.star:
        s = find_subdivision(M, m, n)
        candidates = [c for c in M.star if M.leq(n_times(M, c, n), m)]
        assert s == (min(candidates) if candidates else None)


@given(small)
def test_common_lower_bound_is_a_lower_bound(M):
    for a in M.star:
        for b in M.star:
            c = common_lower_bound(M, [a, b])
            assert c != M.neutral and M.leq(c, a) and M.leq(c, b)


@settings(max_examples=50)
@given(small, st.permutations([1, 2, 3]))
def test_canonical_form_is_invariant_under_relabelling(M, perm):
    p = [0] + [v for v in perm if v < M.k]
    inv = {v: i for i, v in enumerate(p)}
    relabelled = MvsTable(tuple(str(i) for i in range(M.k)), 0,
                          tuple(tuple(inv[M.table[p[a]][p[b]]] for b in range(M.k)) for a in range(M.k)))
    assert canonical_form(relabelled) == canonical_form(M)
