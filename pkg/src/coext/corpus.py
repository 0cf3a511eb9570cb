"""Small algebras used throughout: rings Z_n, lattices, groups, degenerate cases.

The same algebras ship as ``.alg`` files under ``coext/corpus/``; these
constructors are how those files were produced.
"""
from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from .finalg import FiniteAlgebra
from .terms import Op, Signature

RING_SIG = Signature([("add", 2), ("mul", 2), ("zero", 0), ("one", 0)])
GROUP_SIG = Signature([("add", 2), ("neg", 1), ("zero", 0)])
LATTICE_SIG = Signature([("join", 2), ("meet", 2), ("bot", 0), ("top", 0)])
POINTED_SIG = Signature([("pt", 0)])


def ring_zn(n: int) -> FiniteAlgebra:
    a = np.arange(n)
    return FiniteAlgebra(RING_SIG, n, {
        "add": (a[:, None] + a[None, :]) % n,
        "mul": (a[:, None] * a[None, :]) % n,
        "zero": 0,
        "one": 1 % n,
    }, name=f"z{n}")


def group_zn(n: int) -> FiniteAlgebra:
    a = np.arange(n)
    return FiniteAlgebra(GROUP_SIG, n, {
        "add": (a[:, None] + a[None, :]) % n,
        "neg": (-a) % n,
        "zero": 0,
    }, name=f"group_z{n}")


def chain_lattice(n: int = 2) -> FiniteAlgebra:
    a = np.arange(n)
    return FiniteAlgebra(LATTICE_SIG, n, {
        "join": np.maximum(a[:, None], a[None, :]),
        "meet": np.minimum(a[:, None], a[None, :]),
        "bot": 0,
        "top": n - 1,
    }, name=f"chain{n}")


def pointed_set(n: int = 2) -> FiniteAlgebra:
    return FiniteAlgebra(POINTED_SIG, n, {"pt": 0}, name=f"pointed{n}")


def trivial_ring() -> FiniteAlgebra:
    return FiniteAlgebra(RING_SIG, 1, {"add": [[0]], "mul": [[0]], "zero": 0, "one": 0}, name="trivial")


def semilattice2() -> FiniteAlgebra:
    """Two-element join semilattice: a signature with no constants."""
    a = np.arange(2)
    return FiniteAlgebra(Signature([("join", 2)]), 2, {"join": np.maximum(a[:, None], a[None, :])},
                         name="semilattice2")


def boolean_ring() -> FiniteAlgebra:
    """The Boolean ring on two atoms, Z_2 x Z_2."""
    from .finalg import product
    P, _, _ = product(ring_zn(2), ring_zn(2))
    P.name = "boolean4"
    return P


def ring_pack():
    """t(x, y, c1, c2) = x*c1 + y*c2 with e = (1, 0), e' = (0, 1)."""
    from .diagonal import DiagPack
    from .terms import parse_term
    return DiagPack(parse_term("add(mul(x,c1),mul(y,c2))", RING_SIG),
                    [parse_term("one", RING_SIG), parse_term("zero", RING_SIG)],
                    [parse_term("zero", RING_SIG), parse_term("one", RING_SIG)])


def ring_certificate():
    """Hand-written chains for commutative rings under ``ring_pack``.

    Idempotence rewrites 1 into delta(1, 1); addition needs no rewriting;
    multiplication goes through x*x'*delta(1,0)^2 + ... and back.  The two
    nullary operations are left to the verifier, which derives them from the
    idempotence chain.
    """
    from .diagonal import delta_expand
    from .terms import parse_term
    from .witness import Certificate, ChainStep

    pack = ring_pack()

    def T(text):
        return parse_term(text, RING_SIG)

    def d(a, b):
        return delta_expand(T(a), T(b), pack)

    p, q = T("(one|zero)"), T("(zero|one)")
    x, y = T("x"), T("y")

    idem_alpha = [x, p, q, T("one")]
    idem_beta = [x, p, q, d("one", "one")]
    idem_just = ["a", "a", "a", "d"]
    idem = [ChainStep(T("add(mul(a0,a1),mul(a0,a2))"), idem_alpha, idem_beta, idem_just),
            ChainStep(T("mul(a0,a3)"), idem_alpha, idem_beta, idem_just)]

    x1, x2, y1, y2 = T("x1"), T("x2"), T("y1"), T("y2")
    add_slots = [x1, x2, y1, y2, p, q]
    add_chain = [ChainStep(T("add(add(add(mul(a0,a4),mul(a1,a4)),mul(a2,a5)),mul(a3,a5))"),
                           add_slots, add_slots, ["a"] * 6)]

    def mul3(a, b, c):
        return f"mul(mul({a},{b}),{c})"

    def sum4(*ts):
        return f"add(add(add({ts[0]},{ts[1]}),{ts[2]}),{ts[3]})"

    u0 = sum4(mul3("a0", "a1", "a4"), mul3("a0", "a3", "a6"), mul3("a1", "a2", "a6"), mul3("a2", "a3", "a5"))
    u1 = sum4(mul3("a0", "a1", "a7"), mul3("a0", "a3", "a8"), mul3("a1", "a2", "a8"), mul3("a2", "a3", "a9"))
    u2 = "mul(add(mul(a0,a10),mul(a2,a11)),add(mul(a1,a10),mul(a3,a11)))"
    d10, d01 = d("one", "zero"), d("zero", "one")
    mul_alpha = [x1, x2, y1, y2, p, q, T("zero"),
                 d("mul(one,one)", "mul(zero,zero)"), d("mul(one,zero)", "mul(zero,one)"),
                 d("mul(zero,zero)", "mul(one,one)"), d10, d01]
    mul_beta = [x1, x2, y1, y2, d10, d01, d("zero", "zero"),
                Op("mul", [d10, d10]), Op("mul", [d10, d01]), Op("mul", [d01, d01]), p, q]
    mul_just = ["a", "a", "a", "a", "b", "b", "d", "e", "e", "e", "c", "c"]
    mul_chain = [ChainStep(T(u), mul_alpha, mul_beta, mul_just) for u in (u0, u1, u2)]
    return Certificate(pack, idem, {"add": add_chain, "mul": mul_chain})


def corpus_dir() -> Path:
    return Path(str(resources.files("coext") / "corpus"))


def corpus_path(name: str) -> Path:
    return corpus_dir() / name
