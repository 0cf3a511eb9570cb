"""Acceptance criteria, one test each.  Every test prints a PASS/FAIL line with its runtime."""
import itertools
import time

import numpy as np
import pytest

from coext.cli import main as cli_main
from coext.corpus import GROUP_SIG, RING_SIG, corpus_path, group_zn, ring_zn
from coext.decompose import Counterexample, Decomposition, decompose
from coext.diagonal import DiagPack, check_diag, search_diag
from coext.finalg import (Homomorphism, Variety, all_congruences, congruence_closure, free_algebra,
                          generated_subalgebra, product, quotient)
from coext.formats import load_certificate, load_pack
from coext.terms import Signature, Var, parse_term
from coext.witness import ProofForest, hom_obligation, idempotence_obligation, verify_certificate, verify_step

from oracles import naive_congruence, random_algebra


@pytest.fixture
def verdict(capsys):
    def emit(label, ok, seconds, limit=None):
        bound = f" (limit {limit:g} s)" if limit is not None else ""
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {label}: {seconds:.2f} s{bound}")
    return emit


def test_ring_example_replay(verdict):
    t0 = time.perf_counter()
    V = Variety([ring_zn(6)])
    pack = load_pack(corpus_path("crings.diag"), RING_SIG)
    cert = load_certificate(corpus_path("crings.cert"), RING_SIG)
    ok_pack = check_diag(V, pack) and cert.pack == pack
    report = verify_certificate(cert, V)
    failures = sum(len(o.failures) for o in report.obligations)
    chains = {"idempotence", "hom add", "hom mul"} <= {o.name for o in report.obligations if o.passed}
    dt = time.perf_counter() - t0
    ok = ok_pack and report.passed and failures == 0 and chains and dt < 5
    verdict("1 ring certificate replay over Z6", ok, dt, 5)
    assert ok, report.text()


def test_every_product_quotient_splits(verdict):
    t0 = time.perf_counter()
    gens = [ring_zn(2), ring_zn(3)]
    pack = load_pack(corpus_path("crings.diag"), RING_SIG)
    assert check_diag(Variety(gens), pack)
    total = succeeded = 0
    for X, Y in itertools.product(gens, repeat=2):
        P, _, _ = product(X, Y)
        for theta in all_congruences(P):
            total += 1
            _Q, q = quotient(P, theta)
            res = decompose(X, Y, q, pack)
            if isinstance(res, Decomposition):
                QY = res.q_Y.cod.size
                if all(res.iso(q(a * Y.size + b)) == res.q_X(a) * QY + res.q_Y(b)
                       for a in range(X.size) for b in range(Y.size)) and res.iso.is_valid():
                    succeeded += 1
    dt = time.perf_counter() - t0
    ok = total > 0 and succeeded == total and dt < 30
    verdict(f"2 product quotients split ({succeeded}/{total})", ok, dt, 30)
    assert ok


def test_abelian_negative_control(verdict):
    t0 = time.perf_counter()
    G = group_zn(2)
    res = search_diag(Variety([G]), 3, 2)
    P, _, _ = product(G, G)
    q = Homomorphism(P, G, np.array([(a + b) % 2 for a in range(2) for b in range(2)]))
    pack = DiagPack(parse_term("add(x,y)", GROUP_SIG), [], [])
    dec = decompose(G, G, q, pack)
    dt = time.perf_counter() - t0
    ok = (not res.found and "not found" in res.diagnostic and isinstance(dec, Counterexample)
          and (dec.first, dec.second) == ((0, 0), (0, 1)) and dt < 10)
    verdict("3 abelian groups: no pack, counterexample pair", ok, dt, 10)
    assert ok


def test_closure_matches_naive_oracle(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240601)
    sigs = [Signature([("f", 2), ("g", 1), ("c", 0)]), Signature([("m", 2), ("j", 2)]),
            Signature([("h", 3)]), Signature([("u", 1), ("v", 1)])]
    instances = discrepancies = 0
    for i in range(240):
        A = random_algebra(rng, int(rng.integers(1, 6)), sigs[i % len(sigs)])
        pairs = [tuple(int(v) for v in rng.integers(0, A.size, 2)) for _ in range(int(rng.integers(0, 4)))]
        theta = congruence_closure(A, pairs)
        instances += 1
        if not np.array_equal(theta.rep[:, None] == theta.rep[None, :], naive_congruence(A, pairs)):
            discrepancies += 1
    dt = time.perf_counter() - t0
    ok = instances >= 200 and discrepancies == 0
    verdict(f"4 closure vs naive oracle ({instances} instances, {discrepancies} discrepancies)", ok, dt)
    assert ok


def test_free_boolean_ring(verdict):
    t0 = time.perf_counter()
    Z2 = ring_zn(2)
    sizes = []
    universal = True
    for n in (0, 1, 2):
        F = free_algebra([Z2], n)
        sizes.append(F.size)
        universal &= generated_subalgebra(F.algebra, F.generators) == list(range(F.size))
        for values in itertools.product(range(2), repeat=n):
            h = Homomorphism(F.algebra, Z2, F.vectors[:, F.assignment_index(0, values)])
            universal &= h.is_valid() and [int(h(g)) for g in F.generators] == list(values)
    dt = time.perf_counter() - t0
    ok = sizes == [2, 4, 16] and universal
    verdict(f"5 free Boolean ring sizes {sizes}, universal property", ok, dt)
    assert ok


def test_search_round_trip(tmp_path, verdict, capsys):
    t0 = time.perf_counter()
    out = tmp_path / "rings.cert"
    found = cli_main(["search-cert", "z2.alg", "crings.diag", "--depth", "6", "-o", str(out)])
    accepted = cli_main(["verify-cert", "z2.alg", str(out)]) if found == 0 else 1
    capsys.readouterr()
    steps_ok = False
    if found == 0:
        V = Variety([ring_zn(2)])
        cert = load_certificate(out, RING_SIG)
        pack = cert.pack
        obligations = [idempotence_obligation(pack)] + [hom_obligation(pack, s, a) for s, a in RING_SIG.ops]
        chains = [cert.idempotence_chain] + [cert.hom_chains[s] for s, _ in RING_SIG.ops]
        steps_ok = True
        for (start, end), chain in zip(obligations, chains):
            point = start
            for st in chain:
                steps_ok &= verify_step(st, point, st.right(), V, pack)
                point = st.right()
            steps_ok &= V.equal(point, end)
    dt = time.perf_counter() - t0
    ok = found == 0 and accepted == 0 and steps_ok
    verdict("6 search-cert on rings, verify-cert accepts, every step verifies", ok, dt)
    assert ok


def test_quotient_construction(verdict):
    t0 = time.perf_counter()
    V = Variety([ring_zn(2)])
    pack = load_pack(corpus_path("crings.diag"), RING_SIG)
    # F({x} + basic pairs) / Cg(R); the other pairs are eliminated by (w|w') = delta(w, w')
    forest = ProofForest(V, pack, [Var("x")])
    left, right = idempotence_obligation(pack)
    idem = forest.related(forest.element(left), forest.element(right))
    Q, proj = quotient(forest.F.algebra, forest.E0)
    p, q = (int(proj(g)) for g in forest.F.generators[1:])
    add, mul = Q.tables["add"], Q.tables["mul"]

    def delta(a, b):
        return add[mul[a, p], mul[b, q]]

    e = np.arange(Q.size)
    a1, a2, b1, b2 = np.meshgrid(e, e, e, e, indexing="ij")
    hom_add = np.array_equal(delta(add[a1, a2], add[b1, b2]), add[delta(a1, b1), delta(a2, b2)])
    hom_mul = np.array_equal(delta(mul[a1, a2], mul[b1, b2]), mul[delta(a1, b1), delta(a2, b2)])
    idem_all = np.array_equal(delta(e, e), e)
    dt = time.perf_counter() - t0
    ok = idem and idem_all and hom_add and hom_mul and Q.size == 16 and dt < 60
    verdict(f"7 quotient of F(x + pairs) ({forest.F.size} -> {Q.size}): delta(x,x)=x, hom law for add, mul",
            ok, dt, 60)
    assert ok
