import itertools

import numpy as np
import pytest

from coext.corpus import (GROUP_SIG, LATTICE_SIG, chain_lattice, group_zn, ring_pack, ring_zn)
from coext.decompose import (CompatibilityError, Counterexample, Decomposition, DecompositionError,
                             TransitivityError, compute_factor_congruences, decompose, verify_congruence)
from coext.diagonal import DiagPack
from coext.finalg import Homomorphism, all_congruences, product, quotient
from coext.terms import parse_term

ABELIAN_PACK = DiagPack(parse_term("add(x,y)", GROUP_SIG), [], [])
LATTICE_PACK = DiagPack(parse_term("join(meet(x,c1),meet(y,c2))", LATTICE_SIG),
                        [parse_term("top", LATTICE_SIG), parse_term("bot", LATTICE_SIG)],
                        [parse_term("bot", LATTICE_SIG), parse_term("top", LATTICE_SIG)])


def _hom(X, Y, cod, fn):
    P, _, _ = product(X, Y)
    return Homomorphism(P, cod, np.array([fn(a, b) for a in range(X.size) for b in range(Y.size)]))


def factor_relations_by_definition(X, Y, q):
    ex = np.zeros((X.size, X.size), dtype=bool)
    ey = np.zeros((Y.size, Y.size), dtype=bool)
    for a, b, c, d in itertools.product(range(X.size), range(Y.size), range(X.size), range(Y.size)):
        if q(a * Y.size + b) == q(c * Y.size + d):
            ex[a, c] = True
            ey[b, d] = True
    return ex, ey


def test_factor_relations_projection():
    Z2 = ring_zn(2)
    q = _hom(Z2, Z2, Z2, lambda a, b: a)
    ex, ey = compute_factor_congruences(Z2, Z2, q)
    assert np.array_equal(ex, np.eye(2, dtype=bool)) and ey.all()


def test_factor_relations_identity_and_mod2():
    Z2, Z3, Z4 = ring_zn(2), ring_zn(3), ring_zn(4)
    P, _, _ = product(Z2, Z3)
    ex, ey = compute_factor_congruences(Z2, Z3, Homomorphism(P, P, np.arange(6)))
    assert np.array_equal(ex, np.eye(2, dtype=bool)) and np.array_equal(ey, np.eye(3, dtype=bool))
    cod, _, _ = product(Z4, Z2)
    q = _hom(Z4, Z4, cod, lambda a, b: a * 2 + b % 2)
    assert q.is_valid()
    ex, ey = compute_factor_congruences(Z4, Z4, q)
    assert np.array_equal(ex, np.eye(4, dtype=bool))
    assert np.array_equal(ey, (np.arange(4)[:, None] % 2) == (np.arange(4)[None, :] % 2))
    assert all(np.array_equal(m, o) for m, o in zip((ex, ey), factor_relations_by_definition(Z4, Z4, q)))


def test_factor_relations_reject_bad_input():
    Z2 = ring_zn(2)
    with pytest.raises(DecompositionError):
        compute_factor_congruences(Z2, Z2, _hom(Z2, Z2, ring_zn(3), lambda a, b: 0))  # not surjective
    P, _, _ = product(Z2, ring_zn(3))
    with pytest.raises(DecompositionError):
        compute_factor_congruences(Z2, Z2, Homomorphism(P, P, np.arange(6)))


def test_verify_congruence_examples():
    Z2 = ring_zn(2)
    assert verify_congruence(np.ones((2, 2), bool), ring_pack(), Z2).num_classes == 1
    assert verify_congruence(np.eye(2, dtype=bool), ring_pack(), Z2).num_classes == 2


def test_verify_congruence_transitivity_witness():
    rel = np.eye(3, dtype=bool)
    rel[0, 1] = rel[1, 0] = rel[1, 2] = rel[2, 1] = True
    with pytest.raises(TransitivityError) as info:
        verify_congruence(rel, ring_pack(), ring_zn(3))
    assert info.value.triple == (0, 1, 2)
    assert "pack valid" in str(info.value)


def test_verify_congruence_compatibility():
    rel = np.eye(4, dtype=bool)
    rel[0, 1] = rel[1, 0] = True
    with pytest.raises(CompatibilityError):
        verify_congruence(rel, None, ring_zn(4))


def test_decompose_crt_iso():
    Z2, Z3, Z6 = ring_zn(2), ring_zn(3), ring_zn(6)
    res = decompose(Z2, Z3, _hom(Z2, Z3, Z6, lambda a, b: (3 * a + 4 * b) % 6), ring_pack())
    assert isinstance(res, Decomposition) and res.is_identity_pair() == (True, True)


def test_decompose_projection():
    Z2 = ring_zn(2)
    res = decompose(Z2, Z2, _hom(Z2, Z2, Z2, lambda a, b: a), ring_pack())
    assert res.theta_X.num_classes == 2 and res.theta_Y.num_classes == 1


def test_abelian_sum_counterexample_matches_brute_force():
    G = group_zn(2)
    q = _hom(G, G, G, lambda a, b: (a + b) % 2)
    ex, ey = compute_factor_congruences(G, G, q)
    assert ex.all() and ey.all()                        # both total, still transitive
    res = decompose(G, G, q, ABELIAN_PACK)
    assert isinstance(res, Counterexample)
    # brute force: first pair (in product order) on which the two kernels disagree
    want = None
    for i, j in itertools.combinations(range(4), 2):
        if q(i) != q(j):                                # q_X x q_Y merges everything here
            want = (divmod(i, 2), divmod(j, 2))
            break
    assert (res.first, res.second) == want == ((0, 0), (0, 1))
    assert res.merged_by_q is False


CASES = [(ring_zn(a), ring_zn(b), ring_pack()) for a in (2, 3) for b in (2, 3)] + \
        [(chain_lattice(2), chain_lattice(2), LATTICE_PACK), (chain_lattice(2), chain_lattice(3), LATTICE_PACK)]


@pytest.mark.parametrize("X,Y,pack", CASES, ids=[f"{X.name}x{Y.name}" for X, Y, _ in CASES])
def test_every_quotient_of_a_product_splits(X, Y, pack):
    P, _, _ = product(X, Y)
    for theta in all_congruences(P):
        _Q, q = quotient(P, theta)
        res = decompose(X, Y, q, pack)
        assert isinstance(res, Decomposition)
        # iso o q = q_X x q_Y pointwise
        QY = res.q_Y.cod.size
        for a, b in itertools.product(range(X.size), range(Y.size)):
            assert res.iso(q(a * Y.size + b)) == res.q_X(a) * QY + res.q_Y(b)
        # E_X, E_Y contain the projections of ker q
        ex, ey = compute_factor_congruences(X, Y, q)
        for i, j in itertools.product(range(P.size), repeat=2):
            if q(i) == q(j):
                assert ex[i // Y.size, j // Y.size] and ey[i % Y.size, j % Y.size]
