"""Diagonalizing terms: checking, bounded search, delta expansion.

A pack is a term ``t(x, y, c1..ck)`` with constant lists ``e`` and ``e'``
such that ``t(x, y, e) = x`` and ``t(x, y, e') = y`` hold in the variety.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .finalg import (BudgetExceeded, DEFAULT_SCAN_BUDGET, FiniteAlgebra, Variety,
                     free_algebra, generated_subalgebra, product)
from .terms import Op, Pair, Term, Var, format_term, substitute

X, Y = Var("x"), Var("y")


def slot_var(i: int) -> Var:
    return Var(f"c{i + 1}")


@dataclass(frozen=True)
class DiagPack:
    t: Term
    e: Tuple[Term, ...]
    e_prime: Tuple[Term, ...]

    def __init__(self, t: Term, e: Sequence[Term], e_prime: Sequence[Term]):
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "e", tuple(e))
        object.__setattr__(self, "e_prime", tuple(e_prime))
        if len(self.e) != len(self.e_prime):
            raise ValueError("e and e' must have the same length")
        allowed = {"x", "y"} | {slot_var(i).name for i in range(self.k)}
        extra = set(t.variables()) - allowed
        if extra:
            raise ValueError(f"t uses undeclared variables {sorted(extra)}")
        if t.pairs():
            raise ValueError("t may not contain paired constants")
        for c in self.e + self.e_prime:
            if not c.is_constant():
                raise ValueError(f"{format_term(c)} is not a constant term")

    @property
    def k(self) -> int:
        return len(self.e)

    def basic_pairs(self) -> List[Pair]:
        return [Pair(a, b) for a, b in zip(self.e, self.e_prime)]

    def instantiate(self, a: Term, b: Term, consts: Sequence[Term]) -> Term:
        env = {X: a, Y: b}
        env.update({slot_var(i): c for i, c in enumerate(consts)})
        return substitute(self.t, env)

    def __str__(self) -> str:
        return (f"t = {format_term(self.t)}; e = {','.join(map(format_term, self.e))}; "
                f"e' = {','.join(map(format_term, self.e_prime))}")


def delta_expand(a: Term, b: Term, pack: DiagPack) -> Term:
    """delta(a, b) = t(a, b, (e1|e1'), ..., (ek|ek'))."""
    return pack.instantiate(a, b, pack.basic_pairs())


@dataclass
class DiagFailure:
    identity: str               # "left" (t(x,y,e)=x) or "right" (t(x,y,e')=y)
    algebra: str
    assignment: Dict[str, int]


def diag_failure(variety: Variety, pack: DiagPack) -> Optional[DiagFailure]:
    for label, consts, target in (("left", pack.e, X), ("right", pack.e_prime, Y)):
        lhs = pack.instantiate(X, Y, consts)
        bad = variety.counterexample(lhs, target)
        if bad is not None:
            name, assignment = bad
            assignment = {"x": assignment.get("x", 0), "y": assignment.get("y", 0)}
            return DiagFailure(label, name, assignment)
    return None


def check_diag(variety: Variety, pack: DiagPack) -> bool:
    """Both pack identities hold in every generating algebra."""
    return diag_failure(variety, pack) is None


# --- search --------------------------------------------------------------------

@dataclass
class DiagSearchResult:
    pack: Optional[DiagPack]
    diagnostic: str
    depth: int
    k: int
    candidates: int = 0

    @property
    def found(self) -> bool:
        return self.pack is not None


class _Enumerator:
    """Semantically deduplicated term enumeration over {x, y, c1..ck}.

    Keeps, for each function realised so far, the first term in the canonical
    enumeration order (see ``terms.enumerate_terms``) producing it.
    """

    def __init__(self, variety: Variety, k: int, budget: int):
        self.variety = variety
        self.sig = variety.sig
        self.k = k
        self.budget = budget
        nv = k + 2
        self.blocks = []
        cols = []
        start = 0
        for A in variety.gens:
            width = A.size ** nv
            cols.append(np.indices((A.size,) * nv).reshape(nv, -1))
            self.blocks.append((start, start + width))
            start += width
        if start > budget:
            raise BudgetExceeded(f"{start} assignments for k={k} exceeds budget {budget}")
        self.length = start
        self.vecs: List[np.ndarray] = []
        self.terms: List[Term] = []
        self.seen: Dict[bytes, int] = {}
        self.level_start = [0]
        leaves: List[Tuple[Term, np.ndarray]] = []
        for j, v in enumerate([X, Y] + [slot_var(i) for i in range(k)]):
            leaves.append((v, np.concatenate([c[j] for c in cols]).astype(np.int64)))
        for c in self.sig.constants:
            vec = np.concatenate([np.full(e - s, int(A.tables[c]), dtype=np.int64)
                                  for A, (s, e) in zip(variety.gens, self.blocks)])
            leaves.append((Op(c), vec))
        for t, v in leaves:
            self._add(t, v)
        self.level_start.append(len(self.terms))

    def _add(self, t: Term, v: np.ndarray) -> bool:
        key = v.tobytes()
        if key in self.seen:
            return False
        self.seen[key] = len(self.terms)
        self.terms.append(t)
        self.vecs.append(v)
        return True

    def grow(self) -> Tuple[int, int]:
        """Add the new functions of the next depth; returns their index range."""
        prev_total = len(self.terms)
        newest = self.level_start[-2]
        mat = np.stack(self.vecs)
        for sym, ar in self.sig.ops:
            if ar == 0:
                continue
            count = prev_total ** ar - newest ** ar
            if count * self.length > 50 * self.budget:
                raise BudgetExceeded(f"depth expansion needs {count} candidates")
            grid = np.meshgrid(*([np.arange(prev_total)] * ar), indexing="ij")
            idxs = np.stack([g.ravel() for g in grid], axis=1)
            idxs = idxs[idxs.max(axis=1) >= newest]
            if not idxs.size:
                continue
            res = np.concatenate([A.tables[sym][tuple(mat[idxs[:, j], s:e] for j in range(ar))]
                                  for A, (s, e) in zip(self.variety.gens, self.blocks)], axis=1)
            _, first = np.unique(res, axis=0, return_index=True)
            for r in np.sort(first):
                self._add_lazy(sym, idxs[r], res[r])
        self.level_start.append(len(self.terms))
        return prev_total, len(self.terms)

    def _add_lazy(self, sym, idx, vec):
        key = vec.tobytes()
        if key in self.seen:
            return
        self.seen[key] = len(self.terms)
        self.terms.append(Op(sym, [self.terms[int(i)] for i in idx]))
        self.vecs.append(vec)


def search_diag(variety: Variety, max_depth: int, max_k: int,
                budget: int = DEFAULT_SCAN_BUDGET) -> DiagSearchResult:
    """Smallest pack in (depth, k, term, e, e') order that passes ``check_diag``."""
    if max_depth < 0 or max_k < 0:
        raise ValueError("budgets must be non-negative")
    if not variety.has_constants():
        return DiagSearchResult(None, "no constants: F(0) is empty, so no pack can be formed", -1, -1)
    f0 = variety.constants_algebra
    pool = list(range(f0.size))
    # value of each F(0) element in each generating algebra
    const_vals = [[int(f0.vectors[el][s]) for (s, _e) in f0.blocks] for el in pool]
    enums: Dict[int, _Enumerator] = {}
    candidates = 0
    for depth in range(max_depth + 1):
        for k in range(max_k + 1):
            if k not in enums:
                enums[k] = _Enumerator(variety, k, budget)
                lo, hi = 0, len(enums[k].terms)
                if depth > 0:
                    for _ in range(depth):
                        lo, hi = enums[k].grow()
            else:
                lo, hi = enums[k].grow()
            en = enums[k]
            etuples = list(itertools.product(pool, repeat=k))
            for idx in range(lo, hi):
                candidates += 1
                pick = _match_constants(en, en.vecs[idx], etuples, const_vals)
                if pick is not None:
                    e, e2 = pick
                    pack = DiagPack(en.terms[idx], [f0.term(c) for c in e], [f0.term(c) for c in e2])
                    return DiagSearchResult(pack, "found", depth, k, candidates)
    return DiagSearchResult(None, f"not found with depth <= {max_depth}, k <= {max_k}",
                            max_depth, max_k, candidates)


def _match_constants(en: _Enumerator, vec: np.ndarray, etuples, const_vals):
    """First e with t(x,y,e)=x and first e' with t(x,y,e')=y, or None."""
    k = en.k
    ok_x = np.ones(len(etuples), dtype=bool)
    ok_y = np.ones(len(etuples), dtype=bool)
    et = np.array(etuples, dtype=np.int64).reshape(len(etuples), k)
    for b, (A, (s, e)) in enumerate(zip(en.variety.gens, en.blocks)):
        n = A.size
        table = vec[s:e].reshape((n,) * (k + 2))
        vals = np.array([[const_vals[c][b] for c in row] for row in et], dtype=np.int64).reshape(len(etuples), k)
        sub = table[(slice(None), slice(None)) + tuple(vals[:, j] for j in range(k))] if k else table[:, :, None]
        # sub has shape (n, n, len(etuples))
        xs = np.arange(n)[:, None, None]
        ys = np.arange(n)[None, :, None]
        ok_x &= np.all(sub == xs, axis=(0, 1))
        ok_y &= np.all(sub == ys, axis=(0, 1))
    if ok_x.any() and ok_y.any():
        return etuples[int(np.argmax(ok_x))], etuples[int(np.argmax(ok_y))]
    return None


# --- the pair-generation test ----------------------------------------------------

def pair_generation_test(variety: Variety, budget: int = DEFAULT_SCAN_BUDGET) -> bool:
    """Is (x, y) in the subalgebra of F(x,y)^2 generated by F(0)^2 and (x,x), (y,y)?"""
    F = free_algebra(variety.gens, 2, budget=budget)
    A = F.algebra
    if A.size ** 2 > budget:
        raise BudgetExceeded(f"F(2)^2 has {A.size ** 2} elements > budget {budget}")
    P, _, _ = product(A, A)
    consts = generated_subalgebra(A, [])
    x, y = F.generators
    seed = [a * A.size + b for a in consts for b in consts] + [x * A.size + x, y * A.size + y]
    members = set(generated_subalgebra(P, seed))
    return x * A.size + y in members
