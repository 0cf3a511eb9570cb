"""Finite algebras given by operation tables.

Carriers are ``0..n-1``; each operation is a numpy array of shape
``(n,) * arity``.  Besides the usual constructions (products, quotients,
generated subalgebras, congruence closure) this module computes free algebras
of the variety generated by a list of finite algebras, and decides identities
in such a variety by exhaustive evaluation (:class:`Variety`).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from . import _kernels
from .terms import Op, Pair, Signature, Term, TermError, Var, format_term

DEFAULT_SCAN_BUDGET = 10 ** 6


class AlgebraError(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    pass


class FiniteAlgebra:
    def __init__(self, sig: Signature, size: int, tables: Mapping[str, object],
                 name: str = "", element_names: Optional[Sequence[str]] = None):
        if size < 1:
            raise AlgebraError("carrier must be nonempty")
        self.sig = sig
        self.size = int(size)
        self.name = name
        self.tables: Dict[str, np.ndarray] = {}
        for sym, ar in sig.ops:
            if sym not in tables:
                raise AlgebraError(f"missing table for {sym}")
            tab = np.asarray(tables[sym], dtype=np.int64)
            if tab.shape != (self.size,) * ar:
                raise AlgebraError(f"table for {sym}/{ar} has shape {tab.shape}")
            if tab.size and (tab.min() < 0 or tab.max() >= self.size):
                raise AlgebraError(f"table for {sym} leaves the carrier")
            tab.setflags(write=False)
            self.tables[sym] = tab
        if element_names is not None and len(element_names) != self.size:
            raise AlgebraError("element_names has the wrong length")
        self.element_names = list(element_names) if element_names is not None else None
        self._packed = None

    def __repr__(self) -> str:
        return f"FiniteAlgebra({self.name or '?'}, size={self.size}, {self.sig})"

    def element_name(self, i: int) -> str:
        return self.element_names[i] if self.element_names else str(i)

    def constant(self, sym: str) -> int:
        return int(self.tables[sym])

    def apply(self, sym: str, *args: int) -> int:
        return int(self.tables[sym][tuple(args)])

    def packed(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(arities, offsets, flat) layout consumed by the kernels."""
        if self._packed is None:
            arities = np.array([a for _, a in self.sig.ops], dtype=np.int64)
            parts = [self.tables[s].ravel() for s, _ in self.sig.ops]
            sizes = [p.size for p in parts]
            offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(np.int64) if sizes else np.zeros(0, np.int64)
            flat = np.concatenate(parts).astype(np.int64) if parts else np.zeros(0, np.int64)
            self._packed = (arities, offsets, flat)
        return self._packed


def same_signature(*algs: FiniteAlgebra) -> Signature:
    sig = algs[0].sig
    for a in algs[1:]:
        if a.sig != sig:
            raise AlgebraError(f"signature mismatch: {a.sig} vs {sig}")
    return sig


# --- evaluation --------------------------------------------------------------

def evaluate(A: FiniteAlgebra, t: Term, assignment: Mapping[str, int]) -> int:
    def go(s: Term) -> int:
        if isinstance(s, Var):
            if s.name not in assignment:
                raise AlgebraError(f"unbound variable {s.name}")
            return int(assignment[s.name])
        if isinstance(s, Pair):
            raise AlgebraError("cannot evaluate a paired constant in a single algebra")
        if s.sym not in A.sig:
            raise AlgebraError(f"symbol {s.sym} not in signature")
        return int(A.tables[s.sym][tuple(go(c) for c in s.args)])
    return go(t)


def evaluate_vector(A: FiniteAlgebra, t: Term, leaf: Callable[[Term], np.ndarray],
                    length: int, memo: Optional[Dict[Term, np.ndarray]] = None) -> np.ndarray:
    """Evaluate ``t`` on many assignments at once.

    ``leaf`` maps each Var/Pair leaf to an int array of the given length.
    """
    memo = {} if memo is None else memo

    def go(s: Term) -> np.ndarray:
        r = memo.get(s)
        if r is not None:
            return r
        if isinstance(s, Op):
            tab = A.tables[s.sym]
            if not s.args:
                r = np.full(length, int(tab), dtype=np.int64)
            else:
                r = tab[tuple(go(c) for c in s.args)]
        else:
            r = leaf(s)
        memo[s] = r
        return r
    return go(t)


# --- homomorphisms and congruences ---------------------------------------------

@dataclass
class Homomorphism:
    dom: FiniteAlgebra
    cod: FiniteAlgebra
    map: np.ndarray

    def __post_init__(self):
        self.map = np.asarray(self.map, dtype=np.int64)
        if self.map.shape != (self.dom.size,):
            raise AlgebraError("homomorphism map has the wrong length")
        if self.map.size and (self.map.min() < 0 or self.map.max() >= self.cod.size):
            raise AlgebraError("homomorphism map leaves the codomain")

    def __call__(self, a: int) -> int:
        return int(self.map[a])

    def is_surjective(self) -> bool:
        return np.unique(self.map).size == self.cod.size

    def failure(self) -> Optional[Tuple[str, Tuple[int, ...]]]:
        """First (op, argument tuple) where the map does not commute, if any."""
        same_signature(self.dom, self.cod)
        h = self.map
        for sym, ar in self.dom.sig.ops:
            if ar == 0:
                if h[int(self.dom.tables[sym])] != int(self.cod.tables[sym]):
                    return sym, ()
                continue
            lhs = h[self.dom.tables[sym]]
            rhs = self.cod.tables[sym][np.ix_(*([h] * ar))]
            bad = np.argwhere(lhs != rhs)
            if bad.size:
                return sym, tuple(int(v) for v in bad[0])
        return None

    def is_valid(self) -> bool:
        return self.failure() is None


class Congruence:
    """Partition of a carrier, stored as least-element representatives."""

    def __init__(self, algebra: FiniteAlgebra, rep: Sequence[int], edges: Optional[np.ndarray] = None):
        self.algebra = algebra
        rep = np.asarray(rep, dtype=np.int64)
        if rep.shape != (algebra.size,):
            raise AlgebraError("representative map has the wrong length")
        # canonicalise: representative = least member of the class
        least: Dict[int, int] = {}
        for i, r in enumerate(rep.tolist()):
            least.setdefault(r, i)
        self.rep = np.array([least[r] for r in rep.tolist()], dtype=np.int64)
        self.rep.setflags(write=False)
        self.edges = edges

    def related(self, a: int, b: int) -> bool:
        return self.rep[a] == self.rep[b]

    def classes(self) -> List[List[int]]:
        out: Dict[int, List[int]] = {}
        for i, r in enumerate(self.rep.tolist()):
            out.setdefault(r, []).append(i)
        return list(out.values())

    @property
    def num_classes(self) -> int:
        return int(np.unique(self.rep).size)

    def key(self) -> Tuple[int, ...]:
        return tuple(self.rep.tolist())

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Congruence) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return "Congruence(" + " ".join("{" + ",".join(map(str, c)) + "}" for c in self.classes()) + ")"

    def compatibility_failure(self) -> Optional[Tuple[str, int, Tuple[int, ...], int, int]]:
        """First (op, position, argument tuple, a, b) breaking op-compatibility."""
        return _compatibility_failure(self.algebra, self.rep)

    def is_compatible(self) -> bool:
        return self.compatibility_failure() is None


def _compatibility_failure(A: FiniteAlgebra, rep: np.ndarray):
    # suffices to check basic translations: replacing one argument by its representative
    for sym, ar in A.sig.ops:
        tab = A.tables[sym]
        for pos in range(ar):
            moved = np.take(tab, rep, axis=pos)
            bad = np.argwhere(rep[tab] != rep[moved])
            if bad.size:
                idx = tuple(int(v) for v in bad[0])
                return sym, pos, idx, int(tab[idx]), int(moved[idx])
    return None


def identity_congruence(A: FiniteAlgebra) -> Congruence:
    return Congruence(A, np.arange(A.size))


def total_congruence(A: FiniteAlgebra) -> Congruence:
    return Congruence(A, np.zeros(A.size, dtype=np.int64))


def congruence_closure(A: FiniteAlgebra, pairs: Iterable[Tuple[int, int]]) -> Congruence:
    """Least congruence containing ``pairs`` (union-find plus translation worklist)."""
    pairs = list(pairs)
    sa = np.array([p[0] for p in pairs], dtype=np.int64)
    sb = np.array([p[1] for p in pairs], dtype=np.int64)
    if pairs and (min(sa.min(), sb.min()) < 0 or max(sa.max(), sb.max()) >= A.size):
        raise AlgebraError("pair outside the carrier")
    arities, offsets, flat = A.packed()
    rep, edges = _kernels.cg_closure(A.size, arities, offsets, flat, sa, sb)
    return Congruence(A, rep, edges)


def kernel(h: Homomorphism) -> Congruence:
    return Congruence(h.dom, h.map)


def quotient(A: FiniteAlgebra, theta: Congruence) -> Tuple[FiniteAlgebra, Homomorphism]:
    if theta.algebra is not A and theta.algebra.size != A.size:
        raise AlgebraError("congruence belongs to a different algebra")
    bad = _compatibility_failure(A, theta.rep)
    if bad is not None:
        raise AlgebraError(f"relation is not compatible with {bad[0]}")
    reps = np.unique(theta.rep)
    index = np.full(A.size, -1, dtype=np.int64)
    index[reps] = np.arange(reps.size)
    proj = index[theta.rep]
    tables = {}
    for sym, ar in A.sig.ops:
        sub = A.tables[sym][np.ix_(*([reps] * ar))] if ar else A.tables[sym]
        tables[sym] = proj[sub]
    names = [A.element_name(int(r)) for r in reps] if A.element_names else None
    Q = FiniteAlgebra(A.sig, reps.size, tables, name=f"{A.name}/~", element_names=names)
    return Q, Homomorphism(A, Q, proj)


# --- products and subalgebras --------------------------------------------------

def product(A: FiniteAlgebra, B: FiniteAlgebra) -> Tuple[FiniteAlgebra, Homomorphism, Homomorphism]:
    """Direct product; element (a, b) is encoded as ``a * |B| + b``."""
    sig = same_signature(A, B)
    nb = B.size
    tables = {}
    for sym, ar in sig.ops:
        ta, tb = A.tables[sym], B.tables[sym]
        if ar == 0:
            tables[sym] = int(ta) * nb + int(tb)
            continue
        # axes interleaved (a1, b1, a2, b2, ...) then flattened pairwise
        grid_a = np.expand_dims(ta, tuple(range(1, 2 * ar, 2)))
        grid_b = np.expand_dims(tb, tuple(range(0, 2 * ar, 2)))
        full = (grid_a * nb + grid_b)
        tables[sym] = full.reshape((A.size * nb,) * ar)
    names = None
    if A.element_names or B.element_names:
        names = [f"({A.element_name(a)},{B.element_name(b)})" for a in range(A.size) for b in range(nb)]
    P = FiniteAlgebra(sig, A.size * nb, tables, name=f"{A.name}x{B.name}", element_names=names)
    idx = np.arange(P.size)
    return P, Homomorphism(P, A, idx // nb), Homomorphism(P, B, idx % nb)


def generated_subalgebra(A: FiniteAlgebra, seed: Iterable[int]) -> List[int]:
    mask = np.zeros(A.size, dtype=bool)
    for s in seed:
        if not 0 <= s < A.size:
            raise AlgebraError(f"seed element {s} outside the carrier")
        mask[s] = True
    arities, offsets, flat = A.packed()
    inside = _kernels.subalgebra_closure(A.size, arities, offsets, flat, mask)
    return [int(i) for i in np.nonzero(inside)[0]]


def all_congruences(A: FiniteAlgebra) -> List[Congruence]:
    """Every congruence of A, as joins of principal congruences."""
    principal: Dict[Tuple[int, ...], Congruence] = {}
    for a in range(A.size):
        for b in range(a + 1, A.size):
            th = congruence_closure(A, [(a, b)])
            principal.setdefault(th.key(), th)
    found: Dict[Tuple[int, ...], Congruence] = {}
    ident = identity_congruence(A)
    found[ident.key()] = ident
    frontier = [ident]
    gens = list(principal.values())
    while frontier:
        nxt = []
        for th in frontier:
            for p in gens:
                pairs = [(i, int(r)) for i, r in enumerate(th.rep) if i != r]
                pairs += [(i, int(r)) for i, r in enumerate(p.rep) if i != r]
                j = congruence_closure(A, pairs)
                if j.key() not in found:
                    found[j.key()] = j
                    nxt.append(j)
        frontier = nxt
    return sorted(found.values(), key=lambda c: (c.num_classes * -1, c.key()))


def is_isomorphic(A: FiniteAlgebra, B: FiniteAlgebra) -> Optional[np.ndarray]:
    """Brute-force isomorphism search for small algebras; returns the map or None."""
    if A.sig != B.sig or A.size != B.size:
        return None
    for perm in itertools.permutations(range(B.size)):
        h = Homomorphism(A, B, np.array(perm))
        if h.is_valid():
            return h.map
    return None


# --- free algebras -------------------------------------------------------------

@dataclass
class FreeAlgebra:
    """Free algebra of var(gens) on ``n`` generators, with witnessing terms."""

    algebra: FiniteAlgebra
    generators: List[int]
    vectors: np.ndarray            # element -> concatenated function tables
    blocks: List[Tuple[int, int]]  # (start, stop) of each generating algebra's block
    gens: List[FiniteAlgebra]
    generator_terms: List[Term]
    _provenance: List[Tuple] = field(repr=False, default_factory=list)
    _term_cache: Dict[int, Term] = field(repr=False, default_factory=dict)

    @property
    def size(self) -> int:
        return self.algebra.size

    def term(self, element: int) -> Term:
        """A term whose value is ``element``."""
        cached = self._term_cache.get(element)
        if cached is not None:
            return cached
        kind, payload = self._provenance[element]
        if kind == "gen":
            t = self.generator_terms[payload]
        else:
            sym, args = payload
            t = Op(sym, [self.term(a) for a in args])
        self._term_cache[element] = t
        return t

    def element_of(self, t: Term, leaf: Optional[Callable[[Term], int]] = None) -> int:
        """Evaluate a term in the free algebra; generator leaves map via ``leaf``."""
        lookup = {g: i for g, i in zip(self.generator_terms, self.generators)}

        def default_leaf(s: Term) -> int:
            if s in lookup:
                return lookup[s]
            raise AlgebraError(f"{format_term(s)} is not a generator")

        return _eval_scalar(self.algebra, t, leaf or default_leaf)

    def assignment_index(self, block: int, values: Sequence[int]) -> int:
        """Column inside ``block`` for the assignment generators -> values."""
        n = self.gens[block].size
        idx = 0
        for v in values:
            idx = idx * n + int(v)
        return self.blocks[block][0] + idx


def _eval_scalar(A: FiniteAlgebra, t: Term, leaf: Callable[[Term], int]) -> int:
    memo: Dict[Term, int] = {}

    def go(s: Term) -> int:
        r = memo.get(s)
        if r is None:
            if isinstance(s, Op):
                r = int(A.tables[s.sym][tuple(go(c) for c in s.args)])
            else:
                r = int(leaf(s))
            memo[s] = r
        return r
    return go(t)


def default_generator_names(n: int) -> List[str]:
    return ["x", "y", "z"][:n] if n <= 3 else [f"x{i + 1}" for i in range(n)]


def free_algebra(gens: Sequence[FiniteAlgebra], n: int, names: Optional[Sequence[Term]] = None,
                 budget: int = DEFAULT_SCAN_BUDGET) -> FreeAlgebra:
    """Subalgebra of prod_A A^(A^n) generated by the projections.

    ``budget`` bounds both the number of elements and the number of table
    cells computed (``N ** arity`` per operation).
    """
    if not gens:
        raise AlgebraError("need at least one generating algebra")
    sig = same_signature(*gens)
    gen_terms = list(names) if names is not None else [Var(s) for s in default_generator_names(n)]
    if len(gen_terms) != n:
        raise AlgebraError("wrong number of generator names")

    blocks, columns = [], []
    start = 0
    for A in gens:
        width = A.size ** n
        if start + width > budget:
            raise BudgetExceeded(f"free algebra on {n} generators needs {start + width} columns > budget {budget}")
        grid = np.indices((A.size,) * n).reshape(n, -1) if n else np.zeros((0, 1), dtype=np.int64)
        columns.append(grid)
        blocks.append((start, start + width))
        start += width
    L = start

    rows: List[np.ndarray] = []
    index: Dict[bytes, int] = {}
    provenance: List[Tuple] = []

    def add(vec: np.ndarray, prov) -> bool:
        key = vec.tobytes()
        if key in index:
            return False
        if len(rows) >= budget:
            raise BudgetExceeded(f"free algebra exceeds {budget} elements")
        index[key] = len(rows)
        rows.append(vec)
        provenance.append(prov)
        return True

    generators = []
    for j in range(n):
        vec = np.concatenate([columns[b][j] for b in range(len(gens))]).astype(np.int64)
        add(vec, ("gen", j))
        generators.append(index[vec.tobytes()])

    def apply(sym: str, arg_rows: Sequence[np.ndarray]) -> np.ndarray:
        """Apply ``sym`` to stacked argument matrices (C, L) -> (C, L)."""
        out = []
        for A, (s, e) in zip(gens, blocks):
            tab = A.tables[sym]
            out.append(tab[tuple(r[:, s:e] for r in arg_rows)])
        return np.concatenate(out, axis=1)

    for sym, ar in sig.ops:
        if ar == 0:
            vec = np.concatenate([np.full(e - s, int(A.tables[sym]), dtype=np.int64)
                                  for A, (s, e) in zip(gens, blocks)])
            add(vec, ("op", (sym, ())))

    done = 0  # rows[:done] have been combined with each other
    while done < len(rows):
        total = len(rows)
        mat = np.stack(rows)
        for sym, ar in sig.ops:
            if ar == 0:
                continue
            # tuples over rows[:total] with at least one index >= done
            for first_new in range(ar):
                ranges = [np.arange(0, done)] * first_new + [np.arange(done, total)] + \
                         [np.arange(0, total)] * (ar - first_new - 1)
                count = int(np.prod([len(r) for r in ranges]))
                if count == 0:
                    continue
                if count > budget:
                    raise BudgetExceeded(f"free algebra closure step needs {count} applications > budget {budget}")
                grid = np.meshgrid(*ranges, indexing="ij")
                idxs = [g.ravel() for g in grid]
                res = apply(sym, [mat[i] for i in idxs])
                _, first = np.unique(res, axis=0, return_index=True)
                for k in np.sort(first):
                    add(res[k], ("op", (sym, tuple(int(i[k]) for i in idxs))))
        done = total

    N = len(rows)
    vectors = np.stack(rows) if rows else np.zeros((0, L), dtype=np.int64)
    tables = {}
    for sym, ar in sig.ops:
        if N ** ar > budget:
            raise BudgetExceeded(f"free algebra table for {sym} needs {N ** ar} cells > budget {budget}")
        if ar == 0:
            tables[sym] = index[apply_const(gens, blocks, sym).tobytes()]
            continue
        grid = np.meshgrid(*([np.arange(N)] * ar), indexing="ij")
        idxs = [g.ravel() for g in grid]
        res = apply(sym, [vectors[i] for i in idxs])
        tables[sym] = np.array([index[r.tobytes()] for r in res], dtype=np.int64).reshape((N,) * ar)
    alg = FiniteAlgebra(sig, N, tables, name=f"F{n}")
    fa = FreeAlgebra(alg, generators, vectors, blocks, list(gens), gen_terms, provenance)
    alg.element_names = [format_term(fa.term(i)) for i in range(N)]
    return fa


def apply_const(gens, blocks, sym) -> np.ndarray:
    return np.concatenate([np.full(e - s, int(A.tables[sym]), dtype=np.int64)
                           for A, (s, e) in zip(gens, blocks)])


# --- the variety-equality oracle ---------------------------------------------

class Variety:
    """The variety generated by finitely many finite algebras.

    Identities are decided by evaluating both sides under every assignment into
    every generating algebra.  Paired constants are treated as free generators,
    two of them being the same generator exactly when their components agree in
    F(0), i.e. in every generating algebra.
    """

    def __init__(self, gens: Sequence[FiniteAlgebra], budget: int = DEFAULT_SCAN_BUDGET):
        if not gens:
            raise AlgebraError("a variety needs at least one generating algebra")
        self.gens = list(gens)
        self.sig = same_signature(*self.gens)
        self.budget = budget
        self._f0: Optional[FreeAlgebra] = None

    def __repr__(self) -> str:
        return "Variety(" + ", ".join(A.name or "?" for A in self.gens) + ")"

    @property
    def constants_algebra(self) -> FreeAlgebra:
        """F(0): the algebra of constant terms."""
        if self._f0 is None:
            self._f0 = free_algebra(self.gens, 0, budget=self.budget)
        return self._f0

    def has_constants(self) -> bool:
        return bool(self.sig.constants)

    def constant_value(self, t: Term) -> Tuple[int, ...]:
        """Value of a constant term in each generating algebra."""
        return tuple(evaluate(A, t, {}) for A in self.gens)

    def pair_key(self, p: Pair) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
        return self.constant_value(p.left), self.constant_value(p.right)

    def leaf_keys(self, terms: Iterable[Term]) -> List[object]:
        """Distinct generator keys (variable names, pair keys) in first-seen order."""
        keys: Dict[object, None] = {}
        for t in terms:
            for g in t.leaves():
                keys.setdefault(self._key(g), None)
        return list(keys)

    def _key(self, g: Term):
        if isinstance(g, Var):
            return ("var", g.name)
        return ("pair", self.pair_key(g))

    def vectors(self, terms: Sequence[Term], keys: Optional[Sequence[object]] = None) -> List[np.ndarray]:
        """Value of each term on every assignment, concatenated over generators."""
        keys = list(keys) if keys is not None else self.leaf_keys(terms)
        pos = {k: i for i, k in enumerate(keys)}
        total = sum(A.size ** len(keys) for A in self.gens)
        if total > self.budget:
            raise BudgetExceeded(f"identity check needs {total} assignments > budget {self.budget}")
        outs: List[List[np.ndarray]] = [[] for _ in terms]
        for A in self.gens:
            v = len(keys)
            grid = np.indices((A.size,) * v).reshape(v, -1) if v else np.zeros((0, 1), dtype=np.int64)
            length = grid.shape[1]
            memo: Dict[Term, np.ndarray] = {}

            def leaf(g: Term) -> np.ndarray:
                return grid[pos[self._key(g)]]

            for i, t in enumerate(terms):
                outs[i].append(evaluate_vector(A, t, leaf, length, memo))
        return [np.concatenate(o) for o in outs]

    def equal(self, s: Term, t: Term) -> bool:
        if s == t:
            return True
        a, b = self.vectors([s, t])
        return bool(np.array_equal(a, b))

    def counterexample(self, s: Term, t: Term) -> Optional[Tuple[str, Dict[str, int]]]:
        """First (algebra name, assignment) where s and t differ, if any."""
        keys = self.leaf_keys([s, t])
        for A in self.gens:
            sub = Variety([A], self.budget)
            sub._f0 = None
            a, b = sub.vectors([s, t], keys)
            bad = np.nonzero(a != b)[0]
            if bad.size:
                v = len(keys)
                vals = np.unravel_index(int(bad[0]), (A.size,) * v) if v else ()
                names = [k[1] if k[0] == "var" else f"pair{i}" for i, k in enumerate(keys)]
                return A.name, {nm: int(x) for nm, x in zip(names, vals)}
        return None
