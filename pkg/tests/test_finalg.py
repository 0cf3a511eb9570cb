import itertools

import numpy as np
import pytest

from coext.corpus import RING_SIG, boolean_ring, chain_lattice, group_zn, ring_zn, trivial_ring
from coext.finalg import (AlgebraError, BudgetExceeded, Congruence, FiniteAlgebra, Homomorphism, Variety,
                          all_congruences, congruence_closure, evaluate, free_algebra, generated_subalgebra,
                          identity_congruence, is_isomorphic, kernel, product, quotient, total_congruence)
from coext.formats import format_algebra, parse_algebra
from coext.terms import Signature, parse_term

from oracles import congruences_by_partitions, naive_congruence, naive_subalgebra, random_algebra


def T(s):
    return parse_term(s, RING_SIG)


def test_table_validation():
    with pytest.raises(AlgebraError):
        FiniteAlgebra(RING_SIG, 2, {"add": [[0, 1], [1, 2]], "mul": [[0, 0], [0, 1]], "zero": 0, "one": 1})
    with pytest.raises(AlgebraError):
        FiniteAlgebra(RING_SIG, 2, {"add": [[0, 1], [1, 0]], "zero": 0, "one": 1})


def test_evaluate_examples():
    assert evaluate(ring_zn(6), T("add(mul(x,y),one)"), {"x": 2, "y": 3}) == 1
    assert evaluate(ring_zn(5), T("one"), {}) == 1
    t = parse_term("add(mul(a,c),mul(b,d))", RING_SIG)
    assert evaluate(ring_zn(2), t, {"a": 1, "b": 0, "c": 1, "d": 0}) == 1
    with pytest.raises(AlgebraError):
        evaluate(ring_zn(2), T("add(x,y)"), {"x": 1})


def test_product_z2_z3_is_z6():
    P, p1, p2 = product(ring_zn(2), ring_zn(3))
    assert P.size == 6 and p1.is_valid() and p2.is_valid()
    assert p1.is_surjective() and p2.is_surjective()
    iso = is_isomorphic(P, ring_zn(6))
    assert iso is not None
    assert Homomorphism(P, ring_zn(6), iso).is_valid()


def test_product_with_trivial_and_size():
    A = ring_zn(4)
    P, p1, _ = product(A, trivial_ring())
    assert is_isomorphic(P, A) is not None and p1.is_valid()
    assert product(ring_zn(2), ring_zn(2))[0].size == 4
    with pytest.raises(AlgebraError):
        product(ring_zn(2), group_zn(2))


def test_generated_subalgebra_examples():
    assert generated_subalgebra(ring_zn(4), []) == [0, 1, 2, 3]
    assert generated_subalgebra(ring_zn(4), range(4)) == [0, 1, 2, 3]
    P, _, _ = product(ring_zn(2), ring_zn(2))
    assert generated_subalgebra(P, [0]) == [0, 3]     # the diagonal (0,0), (1,1)


def test_generated_subalgebra_matches_naive():
    rng = np.random.default_rng(1)
    sig = Signature([("f", 2), ("g", 1), ("c", 0)])
    for _ in range(40):
        A = random_algebra(rng, int(rng.integers(1, 6)), sig)
        seed = rng.integers(0, A.size, int(rng.integers(0, 3)))
        assert set(generated_subalgebra(A, seed)) == naive_subalgebra(A, seed)


def test_congruence_closure_examples():
    assert congruence_closure(ring_zn(4), [(0, 2)]).classes() == [[0, 2], [1, 3]]
    assert congruence_closure(ring_zn(4), []).num_classes == 4
    assert congruence_closure(ring_zn(6), [(0, 3)]).classes() == [[0, 3], [1, 4], [2, 5]]


def test_congruence_closure_matches_naive():
    rng = np.random.default_rng(7)
    sig = Signature([("f", 2), ("g", 1), ("c", 0)])
    for _ in range(60):
        A = random_algebra(rng, int(rng.integers(1, 6)), sig)
        pairs = [tuple(int(v) for v in rng.integers(0, A.size, 2)) for _ in range(int(rng.integers(0, 4)))]
        theta = congruence_closure(A, pairs)
        rel = naive_congruence(A, pairs)
        assert np.array_equal(theta.rep[:, None] == theta.rep[None, :], rel)
        assert theta.is_compatible()


def test_closure_edges_form_a_forest():
    A = ring_zn(12)
    theta = congruence_closure(A, [(0, 4)])
    assert len(theta.edges) == A.size - theta.num_classes


def test_quotient_examples():
    A = ring_zn(4)
    Q, proj = quotient(A, congruence_closure(A, [(0, 2)]))
    assert Q.size == 2 and proj.is_valid() and proj.is_surjective()
    assert is_isomorphic(Q, ring_zn(2)) is not None
    assert is_isomorphic(quotient(A, identity_congruence(A))[0], A) is not None
    assert quotient(A, total_congruence(A))[0].size == 1


def test_quotient_rejects_incompatible_partition():
    A = ring_zn(4)
    with pytest.raises(AlgebraError):
        quotient(A, Congruence(A, [0, 0, 2, 3]))


def test_kernel_examples():
    P, p1, _ = product(ring_zn(2), ring_zn(2))
    assert kernel(p1).classes() == [[0, 1], [2, 3]]
    ident = Homomorphism(P, P, np.arange(4))
    assert kernel(ident).num_classes == 4
    mod2 = Homomorphism(ring_zn(4), ring_zn(2), np.arange(4) % 2)
    assert mod2.is_valid()
    assert kernel(mod2) == congruence_closure(ring_zn(4), [(0, 2)])


def test_homomorphism_failure_reports_op():
    h = Homomorphism(ring_zn(2), ring_zn(2), np.array([1, 0]))
    assert not h.is_valid()
    assert h.failure()[0] in ("add", "mul", "zero", "one")


@pytest.mark.parametrize("A", [ring_zn(4), ring_zn(6), chain_lattice(3), group_zn(4), boolean_ring()],
                         ids=lambda A: A.name)
def test_all_congruences_match_partition_filter(A):
    assert sorted(c.key() for c in all_congruences(A)) == congruences_by_partitions(A)


def test_all_congruences_z12():
    assert len(all_congruences(ring_zn(12))) == 6     # ideals of Z_12 <-> divisors of 12


@pytest.mark.parametrize("n,size", [(0, 2), (1, 4), (2, 16)])
def test_free_boolean_ring_sizes(n, size):
    F = free_algebra([ring_zn(2)], n)
    assert F.size == size
    assert len(F.generators) == n


def _check_universal_property(F, gens):
    assert generated_subalgebra(F.algebra, F.generators) == list(range(F.size))
    n = len(F.generators)
    for b, A in enumerate(gens):
        for values in itertools.product(range(A.size), repeat=n):
            col = F.assignment_index(b, values)
            h = Homomorphism(F.algebra, A, F.vectors[:, col])
            assert h.is_valid()
            assert [int(h(g)) for g in F.generators] == list(values)


# F(2) for the ring Z_3 has 3^9 elements, so its operation tables are out of reach; Z_3 rings stop at n = 1.
UNIVERSAL_CASES = [([ring_zn(2)], n) for n in (0, 1, 2)] + [([ring_zn(3)], n) for n in (0, 1)] + \
    [([ring_zn(2), ring_zn(3)], n) for n in (0, 1)] + [([chain_lattice(2)], n) for n in (0, 1, 2)] + \
    [([chain_lattice(3)], n) for n in (0, 1, 2)] + [([group_zn(3)], n) for n in (0, 1, 2)]


@pytest.mark.parametrize("gens,n", UNIVERSAL_CASES,
                         ids=[f"{'+'.join(A.name for A in g)}-n{n}" for g, n in UNIVERSAL_CASES])
def test_free_algebra_universal_property(gens, n):
    _check_universal_property(free_algebra(gens, n), gens)


def test_free_algebra_witness_terms():
    F = free_algebra([ring_zn(3)], 1)
    for el in range(F.size):
        assert F.element_of(F.term(el)) == el


def test_free_algebra_budget():
    with pytest.raises(BudgetExceeded):
        free_algebra([ring_zn(6)], 3)


def test_variety_equality_and_counterexample():
    V = Variety([ring_zn(2)])
    assert V.equal(T("mul(x,x)"), T("x"))
    assert V.equal(T("add(x,x)"), T("zero"))
    W = Variety([ring_zn(6)])
    assert not W.equal(T("mul(x,x)"), T("x"))
    name, assignment = W.counterexample(T("mul(x,x)"), T("x"))
    assert name == "z6" and assignment == {"x": 2}


def test_variety_pairs_are_free_generators():
    V = Variety([ring_zn(2)])
    # (one|zero) is a fresh generator, not the constant one
    assert not V.equal(T("(one|zero)"), T("one"))
    assert V.equal(T("mul((one|zero),(one|zero))"), T("(one|zero)"))
    # pairs are identified when their components agree in F(0)
    assert V.equal(T("(add(one,one)|one)"), T("(zero|one)"))


def test_algebra_format_round_trip():
    for A in (ring_zn(3), chain_lattice(2), group_zn(2)):
        B = parse_algebra(format_algebra(A))
        assert B.sig == A.sig and all(np.array_equal(A.tables[s], B.tables[s]) for s in A.sig.symbols)
