"""Factoring a surjection out of a finite product into a product of surjections.

Given ``q: X x Y -> Z`` the factor relations are

    E_X = {(a, c) | q(a, b) = q(c, d) for some b, d}
    E_Y = {(b, d) | q(a, b) = q(c, d) for some a, c}

With a diagonalizing pack both are congruences and ``q`` is isomorphic to
``q_X x q_Y``.  Here everything is checked exhaustively and failures come
with the lexicographically first witness.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .finalg import (AlgebraError, Congruence, FiniteAlgebra, Homomorphism, kernel, product,
                     quotient, same_signature)


class DecompositionError(AlgebraError):
    pass


class TransitivityError(DecompositionError):
    def __init__(self, triple: Tuple[int, int, int], note: str = ""):
        self.triple = triple
        msg = f"relation is not transitive: {triple[0]}~{triple[1]}~{triple[2]} but not {triple[0]}~{triple[2]}"
        super().__init__(msg + (f" ({note})" if note else ""))


class CompatibilityError(DecompositionError):
    def __init__(self, op: str, pos: int, args: Tuple[int, ...]):
        self.op, self.pos, self.args = op, pos, args
        super().__init__(f"relation is not compatible with {op} at argument {pos} of {args}")


def _check_product_domain(X: FiniteAlgebra, Y: FiniteAlgebra, q: Homomorphism) -> None:
    same_signature(X, Y, q.cod)
    if q.dom.size != X.size * Y.size or q.dom.sig != X.sig:
        raise DecompositionError("domain of q is not X x Y")
    P, _, _ = product(X, Y)
    for sym, _ar in X.sig.ops:
        if not np.array_equal(P.tables[sym], q.dom.tables[sym]):
            raise DecompositionError("domain of q is not the product X x Y")
    if not q.is_surjective():
        raise DecompositionError("q is not surjective")


def compute_factor_congruences(X: FiniteAlgebra, Y: FiniteAlgebra, q: Homomorphism
                               ) -> Tuple[np.ndarray, np.ndarray]:
    """Boolean relation matrices E_X (|X| x |X|) and E_Y (|Y| x |Y|)."""
    _check_product_domain(X, Y, q)
    img = q.map.reshape(X.size, Y.size)
    # onehot[z, a, b] = q(a, b) == z
    onehot = img[None, :, :] == np.arange(q.cod.size)[:, None, None]
    hit_x = onehot.any(axis=2).astype(np.int64)   # (z, a): some b with q(a,b)=z
    hit_y = onehot.any(axis=1).astype(np.int64)   # (z, b)
    ex = (hit_x.T @ hit_x) > 0
    ey = (hit_y.T @ hit_y) > 0
    return ex, ey


def verify_congruence(rel: np.ndarray, pack, A: FiniteAlgebra) -> Congruence:
    """Check that a reflexive symmetric relation is a congruence of A.

    ``pack`` only feeds the diagnostic: a transitivity failure means either the
    pack is not diagonalizing on A or the variety is not coextensive.
    """
    rel = np.asarray(rel, dtype=bool)
    n = A.size
    if rel.shape != (n, n):
        raise DecompositionError("relation has the wrong shape")
    if not rel.diagonal().all():
        raise DecompositionError("relation is not reflexive")
    if not np.array_equal(rel, rel.T):
        raise DecompositionError("relation is not symmetric")
    two_step = (rel.astype(np.int64) @ rel.astype(np.int64)) > 0
    bad = np.argwhere(two_step & ~rel)
    if bad.size:
        a, c = (int(v) for v in bad[0])
        b = int(np.nonzero(rel[a] & rel[:, c])[0][0])
        note = ""
        if pack is not None:
            from .diagonal import check_diag
            from .finalg import Variety
            note = "pack valid on this algebra" if check_diag(Variety([A]), pack) else "pack fails on this algebra"
        raise TransitivityError((a, b, c), note)
    # equivalence now; representatives = least related element
    rep = np.argmax(rel, axis=1)
    theta = Congruence(A, rep)
    fail = theta.compatibility_failure()
    if fail is not None:
        raise CompatibilityError(fail[0], fail[1], fail[2])
    return theta


@dataclass
class Decomposition:
    q_X: Homomorphism
    q_Y: Homomorphism
    iso: Homomorphism                  # Z -> X/E_X x Y/E_Y
    theta_X: Congruence
    theta_Y: Congruence

    def is_identity_pair(self) -> Tuple[bool, bool]:
        return self.theta_X.num_classes == self.theta_X.algebra.size, \
            self.theta_Y.num_classes == self.theta_Y.algebra.size


@dataclass
class Counterexample:
    """Two elements of X x Y merged by exactly one of ker q and ker(q_X x q_Y)."""
    first: Tuple[int, int]
    second: Tuple[int, int]
    merged_by_q: bool
    theta_X: Congruence
    theta_Y: Congruence


def decompose(X: FiniteAlgebra, Y: FiniteAlgebra, q: Homomorphism, pack=None):
    """Returns a Decomposition, or a Counterexample when the kernels differ."""
    ex, ey = compute_factor_congruences(X, Y, q)
    theta_x = verify_congruence(ex, pack, X)
    theta_y = verify_congruence(ey, pack, Y)
    QX, qx = quotient(X, theta_x)
    QY, qy = quotient(Y, theta_y)
    QP, _, _ = product(QX, QY)
    a = np.repeat(np.arange(X.size), Y.size)
    b = np.tile(np.arange(Y.size), X.size)
    prod_map = qx.map[a] * QY.size + qy.map[b]
    kq = q.map
    same_q = kq[:, None] == kq[None, :]
    same_p = prod_map[:, None] == prod_map[None, :]
    diff = np.argwhere(np.triu(same_q != same_p, 1))
    if diff.size:
        i, j = (int(v) for v in diff[0])
        return Counterexample(divmod(i, Y.size), divmod(j, Y.size), bool(same_q[i, j]), theta_x, theta_y)
    iso_map = np.empty(q.cod.size, dtype=np.int64)
    iso_map[kq] = prod_map
    iso = Homomorphism(q.cod, QP, iso_map)
    if not iso.is_valid():  # kernels agree, so this cannot happen for homomorphisms q
        raise DecompositionError("constructed iso is not a homomorphism; is q a homomorphism?")
    return Decomposition(qx, qy, iso, theta_x, theta_y)
