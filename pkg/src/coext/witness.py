"""Rewrite-chain certificates for coextensivity.

The relation R over constants (all of them from F(0)) consists of

* ``delta(w, w') ~ (w|w')``                                     -- cases b / c
* ``v(delta(w1,w1'), ..) ~ delta(v(w1, ..), v(w1', ..))``       -- cases d / e

A chain step is a context ``u(a0..an)`` with two slot tuples ``alpha`` and
``beta``; slot by slot the two are equal (case a) or an R-instance.  The step
relates ``u(beta)`` (its left end) to ``u(alpha)`` (its right end).
Consecutive chain points are compared by equality in the variety, with paired
constants acting as free generators.

A certificate holds one chain for ``delta(x,x) = x`` and, per operation
symbol ``s``, one for ``delta(s(x1..), s(y1..)) = s(delta(x1,y1), ..)``.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .diagonal import DiagPack, check_diag, delta_expand
from .finalg import (BudgetExceeded, DEFAULT_SCAN_BUDGET, FreeAlgebra, Variety, _eval_scalar,
                     congruence_closure, evaluate_vector, free_algebra)
from .terms import Op, Pair, Term, TermError, Var, format_term, match, substitute
from . import _kernels

JUST_LETTERS = ("a", "b", "c", "d", "e")
_MIRROR = {"a": "a", "b": "c", "c": "b", "d": "e", "e": "d"}


class CertificateError(ValueError):
    pass


def slot(i: int) -> Var:
    return Var(f"a{i}")


# --- the relation R ------------------------------------------------------------

@dataclass(frozen=True)
class RInstance:
    """One oriented R-equation ``lhs ~ rhs``.

    ``kind`` is "pair" or "hom"; ``lhs_is_delta`` tells which side is the
    delta(...) side (for "pair" the other side is a paired constant, for "hom"
    it is v(delta(..), ..)).
    """
    lhs: Term
    rhs: Term
    kind: str
    lhs_is_delta: bool

    def letter(self) -> str:
        """Justification letter when alpha = rhs and beta = lhs."""
        if self.kind == "pair":
            return "b" if self.lhs_is_delta else "c"
        return "d" if self.lhs_is_delta else "e"

    def reversed(self) -> "RInstance":
        return RInstance(self.rhs, self.lhs, self.kind, not self.lhs_is_delta)


def rewrite_relation(pack: DiagPack, sig, pool: Sequence[Term],
                     max_instances: int = 100_000) -> List[RInstance]:
    """All R-instances over the constant pool, in both orientations."""
    out: List[RInstance] = []

    def emit(delta_side: Term, other: Term, kind: str) -> None:
        if len(out) // 2 >= max_instances:
            raise BudgetExceeded(f"more than {max_instances} R-instances")
        out.append(RInstance(delta_side, other, kind, True))
        out.append(RInstance(other, delta_side, kind, False))

    for w, w2 in itertools.product(pool, repeat=2):
        emit(delta_expand(w, w2, pack), Pair(w, w2), "pair")
    for sym, ar in sig.ops:
        for ws in itertools.product(pool, repeat=ar):
            for ws2 in itertools.product(pool, repeat=ar):
                vside = Op(sym, [delta_expand(a, b, pack) for a, b in zip(ws, ws2)])
                dside = delta_expand(Op(sym, ws), Op(sym, ws2), pack)
                emit(dside, vside, "hom")
    return out


# --- justifications --------------------------------------------------------------

def _check_pair(pair_side: Term, delta_side: Term, pack: DiagPack) -> Optional[str]:
    if not isinstance(pair_side, Pair):
        return f"{format_term(pair_side)} is not a paired constant"
    want = delta_expand(pair_side.left, pair_side.right, pack)
    if want != delta_side:
        return f"expected {format_term(want)}, got {format_term(delta_side)}"
    return None


def _delta_args(term: Term, pack: DiagPack) -> Optional[Dict[str, Term]]:
    return match(delta_expand(Var("x"), Var("y"), pack), term, ("x", "y"))


def _check_hom(v_side: Term, delta_side: Term, pack: DiagPack) -> Optional[str]:
    if not isinstance(v_side, Op):
        return f"{format_term(v_side)} is not an operation applied to deltas"
    v, l = v_side.sym, len(v_side.args)
    ws: Optional[List[Term]] = None
    ws2: Optional[List[Term]] = None
    b = _delta_args(delta_side, pack)
    if b is not None and "x" in b and "y" in b:
        A, B = b["x"], b["y"]
        if isinstance(A, Op) and isinstance(B, Op) and A.sym == v and B.sym == v \
                and len(A.args) == l and len(B.args) == l:
            ws, ws2 = list(A.args), list(B.args)
    if ws is None:
        # the pack's t ignores x or y; read the constants off the v side instead
        ws, ws2 = [], []
        for child in v_side.args:
            cb = _delta_args(child, pack)
            if cb is None or "x" not in cb or "y" not in cb:
                return f"cannot read constants from {format_term(v_side)}"
            ws.append(cb["x"])
            ws2.append(cb["y"])
    for w in ws + ws2:
        if not w.is_constant():
            return f"{format_term(w)} is not a constant term"
    want_v = Op(v, [delta_expand(a, c, pack) for a, c in zip(ws, ws2)])
    want_d = delta_expand(Op(v, ws), Op(v, ws2), pack)
    if want_v != v_side or want_d != delta_side:
        return f"{format_term(v_side)} ~ {format_term(delta_side)} is not an R-instance"
    return None


def _check_letter(letter: str, alpha: Term, beta: Term, pack: DiagPack) -> Optional[str]:
    if letter == "a":
        return None if alpha == beta else f"{format_term(alpha)} != {format_term(beta)}"
    if letter == "b":
        return _check_pair(alpha, beta, pack)
    if letter == "c":
        return _check_pair(beta, alpha, pack)
    if letter == "d":
        return _check_hom(alpha, beta, pack)
    if letter == "e":
        return _check_hom(beta, alpha, pack)
    return f"unknown justification {letter!r}"


def check_justification(letter: str, alpha: Term, beta: Term, pack: DiagPack) -> Optional[str]:
    """None when (alpha, beta) is justified by ``letter``; otherwise a message.

    b/c and d/e only differ in orientation; the mirrored case is accepted too.
    """
    err = _check_letter(letter, alpha, beta, pack)
    if err is None or letter not in _MIRROR or letter == "a":
        return err
    return None if _check_letter(_MIRROR[letter], alpha, beta, pack) is None else err


# --- steps and chains --------------------------------------------------------------

@dataclass(frozen=True)
class ChainStep:
    u: Term
    alpha: Tuple[Term, ...]
    beta: Tuple[Term, ...]
    just: Tuple[str, ...]

    def __init__(self, u: Term, alpha: Sequence[Term], beta: Sequence[Term], just: Sequence[str]):
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "alpha", tuple(alpha))
        object.__setattr__(self, "beta", tuple(beta))
        object.__setattr__(self, "just", tuple(just))

    def left(self) -> Term:
        return substitute(self.u, {slot(i): b for i, b in enumerate(self.beta)}, strict=True)

    def right(self) -> Term:
        return substitute(self.u, {slot(i): a for i, a in enumerate(self.alpha)}, strict=True)

    def swapped(self) -> "ChainStep":
        return ChainStep(self.u, self.beta, self.alpha, [_MIRROR.get(j, j) for j in self.just])

    def substitute_vars(self, env: Dict[Term, Term]) -> "ChainStep":
        return ChainStep(self.u, [substitute(a, env) for a in self.alpha],
                         [substitute(b, env) for b in self.beta], self.just)


@dataclass
class StepFailure:
    step: int
    position: Optional[int]   # slot index, or None for endpoint/shape problems
    message: str

    def __str__(self) -> str:
        where = f"step {self.step}" + (f", position {self.position}" if self.position is not None else "")
        return f"{where}: {self.message}"


def step_failures(step: ChainStep, left: Optional[Term], right: Optional[Term], variety: Variety,
                  pack: DiagPack, index: int = 0) -> List[StepFailure]:
    n = len(step.alpha)
    if len(step.beta) != n or len(step.just) != n:
        return [StepFailure(index, None, f"slot count mismatch: {n} alpha, {len(step.beta)} beta, "
                                         f"{len(step.just)} just")]
    allowed = {slot(i).name for i in range(n)}
    stray = [v for v in step.u.variables() if v not in allowed]
    if stray or step.u.pairs():
        return [StepFailure(index, None, f"u must only use slots a0..a{n - 1}")]
    out = []
    for j, (letter, a, b) in enumerate(zip(step.just, step.alpha, step.beta)):
        err = check_justification(letter, a, b, pack)
        if err is not None:
            out.append(StepFailure(index, j, f"case {letter}: {err}"))
    if out:
        return out
    if left is not None and not variety.equal(step.left(), left):
        out.append(StepFailure(index, None, f"u(beta) = {format_term(step.left())} does not equal "
                                            f"{format_term(left)}"))
    if right is not None and not variety.equal(step.right(), right):
        out.append(StepFailure(index, None, f"u(alpha) = {format_term(step.right())} does not equal "
                                            f"{format_term(right)}"))
    return out


def verify_step(step: ChainStep, left: Term, right: Term, variety: Variety, pack: DiagPack) -> bool:
    """Each slot is justified and u(beta) = left, u(alpha) = right in the variety."""
    return not step_failures(step, left, right, variety, pack)


def chain_failures(steps: Sequence[ChainStep], start: Term, end: Term, variety: Variety,
                   pack: DiagPack) -> List[StepFailure]:
    """Walk the chain from ``start``; each step may be used in either direction."""
    point = start
    for i, st in enumerate(steps):
        errs = step_failures(st, None, None, variety, pack, i)
        if errs:
            return errs
        if variety.equal(st.left(), point):
            point = st.right()
        elif variety.equal(st.right(), point):
            point = st.left()
        else:
            return [StepFailure(i, None, f"neither u(beta) = {format_term(st.left())} nor "
                                         f"u(alpha) = {format_term(st.right())} equals the previous point "
                                         f"{format_term(point)}")]
    if not variety.equal(point, end):
        return [StepFailure(len(steps), None, f"chain ends at {format_term(point)}, "
                                              f"expected {format_term(end)}")]
    return []


def verify_chain(steps, start, end, variety, pack) -> List[StepFailure]:
    """Failures of the chain read start->end; a chain written end->start is accepted too."""
    errs = chain_failures(steps, start, end, variety, pack)
    if errs and not chain_failures(steps, end, start, variety, pack):
        return []
    return errs


# --- obligations and certificates --------------------------------------------------

def idempotence_obligation(pack: DiagPack) -> Tuple[Term, Term]:
    x = Var("x")
    return delta_expand(x, x, pack), x


def hom_obligation(pack: DiagPack, sym: str, arity: int) -> Tuple[Term, Term]:
    xs = [Var(f"x{i + 1}") for i in range(arity)]
    ys = [Var(f"y{i + 1}") for i in range(arity)]
    start = delta_expand(Op(sym, xs), Op(sym, ys), pack)
    end = Op(sym, [delta_expand(a, b, pack) for a, b in zip(xs, ys)])
    return start, end


@dataclass
class Certificate:
    pack: DiagPack
    idempotence_chain: List[ChainStep]
    hom_chains: Dict[str, List[ChainStep]]


@dataclass
class ObligationResult:
    name: str
    start: Term
    end: Term
    passed: bool
    failures: List[StepFailure] = field(default_factory=list)
    note: str = ""

    def line(self) -> str:
        head = f"{'PASS' if self.passed else 'FAIL'} {self.name}: {format_term(self.start)} = {format_term(self.end)}"
        if self.note:
            head += f" [{self.note}]"
        return "\n".join([head] + [f"    {f}" for f in self.failures])


@dataclass
class CertificateReport:
    pack_valid: bool
    obligations: List[ObligationResult]
    errors: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.pack_valid and not self.errors and all(o.passed for o in self.obligations)

    def text(self) -> str:
        lines = [f"{'PASS' if self.pack_valid else 'FAIL'} pack: diagonalizing identities"]
        lines += [o.line() for o in self.obligations]
        lines += [f"ERROR {e}" for e in self.errors]
        lines.append("certificate " + ("verified" if self.passed else "rejected"))
        return "\n".join(lines)


def verify_certificate(cert: Certificate, variety: Variety) -> CertificateReport:
    pack = cert.pack
    report = CertificateReport(check_diag(variety, pack), [])
    start, end = idempotence_obligation(pack)
    errs = verify_chain(cert.idempotence_chain, start, end, variety, pack)
    report.obligations.append(ObligationResult("idempotence", start, end, not errs, errs))
    for sym in cert.hom_chains:
        if sym not in variety.sig:
            report.errors.append(f"chain for unknown operation {sym}")
    for sym, ar in variety.sig.ops:
        start, end = hom_obligation(pack, sym, ar)
        note = ""
        if sym in cert.hom_chains:
            steps = cert.hom_chains[sym]
        elif ar == 0:
            # delta(c, c) = c is the idempotence chain at x := c
            steps = [st.substitute_vars({Var("x"): Op(sym)}) for st in cert.idempotence_chain]
            note = "derived from idempotence"
        else:
            report.obligations.append(ObligationResult(f"hom {sym}", start, end, False,
                                                       [StepFailure(0, None, "missing chain")]))
            continue
        errs = verify_chain(steps, start, end, variety, pack)
        report.obligations.append(ObligationResult(f"hom {sym}", start, end, not errs, errs, note))
    return report


# --- chain search ----------------------------------------------------------------------

_PRIV = "_s"


def _priv(i: int) -> Var:
    return Var(f"{_PRIV}{i}")


@dataclass
class _RawStep:
    """A step whose context may still contain generator leaves."""
    u: Term                     # over private slots _s0.. plus arbitrary leaves
    alpha: List[Term]
    beta: List[Term]
    just: List[str]

    def swapped(self) -> "_RawStep":
        return _RawStep(self.u, list(self.beta), list(self.alpha), [_MIRROR[j] for j in self.just])

    def finish(self) -> ChainStep:
        """Move every non-slot leaf of u into a reflexive slot; rename slots a0..aN."""
        alpha, beta, just = list(self.alpha), list(self.beta), list(self.just)
        env: Dict[Term, Term] = {}
        leaf_slots: Dict[Term, int] = {}
        for g in self.u.leaves():
            if isinstance(g, Var) and g.name.startswith(_PRIV):
                continue
            if g not in leaf_slots:
                leaf_slots[g] = len(alpha)
                alpha.append(g)
                beta.append(g)
                just.append("a")
        for i in range(len(self.alpha)):
            env[_priv(i)] = slot(i)
        for g, i in leaf_slots.items():
            env[g] = slot(i)
        return ChainStep(substitute(self.u, env), alpha, beta, just)


def _shift(step: _RawStep, offset: int) -> _RawStep:
    env = {_priv(i): _priv(i + offset) for i in range(len(step.alpha))}
    return _RawStep(substitute(step.u, env), step.alpha, step.beta, step.just)


@dataclass
class ChainSearchResult:
    steps: Optional[List[ChainStep]]
    diagnostic: str
    expanded: int = 0

    @property
    def found(self) -> bool:
        return self.steps is not None


class ProofForest:
    """Cg(R) on a free algebra F(G), G = variables plus the pack's basic pairs.

    Other paired constants are eliminated through ``(w|w') = delta(w, w')``.
    The union log of the closure is a proof forest: any two related elements
    are connected by a path whose edges unfold into single-instance steps.
    """

    def __init__(self, variety: Variety, pack: DiagPack, variables: Sequence[Var],
                 budget: int = DEFAULT_SCAN_BUDGET, instances: Optional[List[RInstance]] = None):
        self.variety = variety
        self.pack = pack
        basic: Dict[object, Pair] = {}
        for p in pack.basic_pairs():
            basic.setdefault(variety.pair_key(p), p)
        self.basic_keys = list(basic)
        self.basic = list(basic.values())
        self.variables = list(variables)
        names = self.variables + self.basic
        self.F: FreeAlgebra = free_algebra(variety.gens, len(names), names=names, budget=budget)
        self._lookup: Dict[object, int] = {("var", v.name): self.F.generators[i]
                                           for i, v in enumerate(self.variables)}
        for i, k in enumerate(self.basic_keys):
            self._lookup[("pair", k)] = self.F.generators[len(self.variables) + i]
        if instances is None:
            pool = [variety.constants_algebra.term(i) for i in range(variety.constants_algebra.size)]
            instances = rewrite_relation(pack, variety.sig, pool)
        seeds_a, seeds_b, self.seed_inst = [], [], []
        for inst in instances[::2]:
            x, y = self.element(inst.lhs), self.element(inst.rhs)
            if x != y:
                seeds_a.append(x)
                seeds_b.append(y)
                self.seed_inst.append(inst)
        self.E0 = congruence_closure(self.F.algebra, zip(seeds_a, seeds_b))
        self.edges = self.E0.edges
        self._adj: Dict[int, List[Tuple[int, int, bool]]] = {}
        for row, (x, y, *_rest) in enumerate(self.edges.tolist()):
            self._adj.setdefault(x, []).append((y, row, True))
            self._adj.setdefault(y, []).append((x, row, False))
        self._edge_cache: Dict[int, List[_RawStep]] = {}
        self._classes: Dict[int, List[int]] = {}
        for i, r in enumerate(self.E0.rep.tolist()):
            self._classes.setdefault(r, []).append(i)

    def element(self, t: Term) -> int:
        """Value of ``t`` in F(G); paired constants outside G go through delta."""
        def leaf(g: Term) -> int:
            key = self.variety._key(g)
            if key in self._lookup:
                return self._lookup[key]
            if isinstance(g, Pair):
                return self.element(delta_expand(g.left, g.right, self.pack))
            raise CertificateError(f"{format_term(g)} is not a generator here")
        return _eval_scalar(self.F.algebra, t, leaf)

    def class_of(self, el: int) -> List[int]:
        return self._classes[int(self.E0.rep[el])]

    def related(self, a: int, b: int) -> bool:
        return bool(self.E0.rep[a] == self.E0.rep[b])

    def _edge_steps(self, row: int) -> List[_RawStep]:
        cached = self._edge_cache.get(row)
        if cached is not None:
            return cached
        a, b, reason, f, pos, tix, src = (int(v) for v in self.edges[row])
        if reason == _kernels.SEED:
            inst = self.seed_inst[src]
            steps = [_RawStep(_priv(0), [inst.rhs], [inst.lhs], [inst.letter()])]
        else:
            sym, ar = self.variety.sig.ops[f]
            n = self.F.size
            others = np.unravel_index(tix, (n,) * (ar - 1)) if ar > 1 else ()
            args_other = [self.F.term(int(o)) for o in others]
            steps = []
            for st in self._edge_steps(src):
                args = args_other[:pos] + [st.u] + args_other[pos:]
                steps.append(_RawStep(Op(sym, args), st.alpha, st.beta, st.just))
        self._edge_cache[row] = steps
        return steps

    def explain(self, a: int, b: int) -> List[_RawStep]:
        """Single-instance steps leading from element a to element b."""
        if a == b:
            return []
        if not self.related(a, b):
            raise CertificateError(f"elements {a} and {b} are not related")
        prev: Dict[int, Tuple[int, int, bool]] = {a: (-1, -1, True)}
        queue = deque([a])
        while queue:
            x = queue.popleft()
            if x == b:
                break
            for y, row, forward in self._adj.get(x, []):
                if y not in prev:
                    prev[y] = (x, row, forward)
                    queue.append(y)
        path: List[Tuple[int, bool]] = []
        cur = b
        while cur != a:
            x, row, forward = prev[cur]
            path.append((row, forward))
            cur = x
        path.reverse()
        out: List[_RawStep] = []
        for row, forward in path:
            steps = self._edge_steps(row)
            out.extend(steps if forward else [s.swapped() for s in reversed(steps)])
        return out


class ChainSearcher:
    """Bounded search for chains between two terms.

    Ground facts are handled exactly by a ``ProofForest`` over the basic
    pairs alone (the congruence E0).  When the free algebra over the
    obligation's variables plus the basic pairs fits the budget, the chain is
    read off that forest directly and the search is complete.  Otherwise a
    search move takes the current term, abstracts its maximal variable-free
    subterms into slots, and moves each slot within its E0 class; this runs
    breadth-first from both ends until the frontiers meet in the variety.
    """

    def __init__(self, variety: Variety, pack: DiagPack, budget: int = DEFAULT_SCAN_BUDGET,
                 max_fillers: int = 1 << 14, exact: bool = True):
        self.variety = variety
        self.pack = pack
        self.budget = budget
        self.max_fillers = max_fillers
        self.exact = exact
        pool = [variety.constants_algebra.term(i) for i in range(variety.constants_algebra.size)]
        self.instances = rewrite_relation(pack, variety.sig, pool)
        self.ground = ProofForest(variety, pack, [], budget, self.instances)
        self.basic_keys = self.ground.basic_keys
        self.F = self.ground.F
        self.E0 = self.ground.E0
        self._fvec_cache: Dict[Tuple, np.ndarray] = {}
        self._exact_cache: Dict[Tuple[str, ...], Optional[ProofForest]] = {}

    def element(self, t: Term) -> int:
        return self.ground.element(t)

    def class_of(self, el: int) -> List[int]:
        return self.ground.class_of(el)

    def explain(self, a: int, b: int) -> List[_RawStep]:
        return self.ground.explain(a, b)

    def exact_forest(self, names: Sequence[str]) -> Optional[ProofForest]:
        """Forest over F(names + basic pairs), or None when it exceeds the budget."""
        key = tuple(names)
        if key not in self._exact_cache:
            try:
                self._exact_cache[key] = ProofForest(self.variety, self.pack, [Var(v) for v in names],
                                                     self.budget, self.instances)
            except BudgetExceeded:
                self._exact_cache[key] = None
        return self._exact_cache[key]

    # big moves
    def _template(self, t: Term) -> Tuple[Term, List[Term]]:
        """Abstract maximal variable-free subterms (that are not bare constants) into slots."""
        slots: List[Term] = []

        def go(s: Term) -> Term:
            if not any(isinstance(g, Var) for g in s.leaves()) and not s.is_constant():
                slots.append(s)
                return Var(f"_z{len(slots) - 1}")
            if isinstance(s, Op) and s.args:
                return Op(s.sym, [go(c) for c in s.args])
            return s
        return go(t), slots

    def _fvec(self, keys: Tuple) -> np.ndarray:
        """For each F(P) element, its value on every assignment of ``keys``."""
        cached = self._fvec_cache.get(keys)
        if cached is not None:
            return cached
        pair_pos = {k: i for i, k in enumerate(keys)}
        cols = []
        for b, A in enumerate(self.variety.gens):
            v = len(keys)
            grid = np.indices((A.size,) * v).reshape(v, -1) if v else np.zeros((0, 1), dtype=np.int64)
            s, _e = self.F.blocks[b]
            # column inside the block for each assignment: digits of the basic pairs
            idx = np.zeros(grid.shape[1], dtype=np.int64)
            for k in self.basic_keys:
                idx = idx * A.size + grid[pair_pos[("pair", k)]]
            cols.append(self.F.vectors[:, s + idx])
        out = np.concatenate(cols, axis=1)
        self._fvec_cache[keys] = out
        return out

    def _moves(self, t: Term, keys: Tuple, beam: int):
        """Yield (new_term, semantic_key, move) for each slot filling of t's template."""
        H, slot_terms = self._template(t)
        if not slot_terms:
            return []
        g = [self.element(s) for s in slot_terms]
        classes = [self.class_of(x) for x in g]
        total = int(np.prod([len(c) for c in classes]))
        combos = np.array(list(itertools.islice(itertools.product(*classes), self.max_fillers)),
                          dtype=np.int64).reshape(-1, len(g))
        fv = self._fvec(keys)
        vals = self._evaluate_template(H, combos, fv, keys)
        _, first = np.unique(vals, axis=0, return_index=True)
        out = []
        for r in np.sort(first):
            newg = [int(v) for v in combos[r]]
            if newg == g:
                continue
            env = {Var(f"_z{j}"): self.F.term(e) for j, e in enumerate(newg)}
            out.append((substitute(H, env), vals[r].tobytes(), (H, slot_terms, g, newg)))
        return out

    def _evaluate_template(self, H: Term, combos: np.ndarray, fv: np.ndarray, keys: Tuple) -> np.ndarray:
        pos = {k: i for i, k in enumerate(keys)}
        parts = []
        offset = 0
        for A in self.variety.gens:
            v = len(keys)
            grid = np.indices((A.size,) * v).reshape(v, -1) if v else np.zeros((0, 1), dtype=np.int64)
            L = grid.shape[1]
            block = fv[:, offset:offset + L]

            def leaf(s: Term, grid=grid, block=block):
                if isinstance(s, Var) and s.name.startswith("_z"):
                    return block[combos[:, int(s.name[2:])]]
                return grid[pos[self.variety._key(s)]][None, :]

            r = evaluate_vector(A, H, leaf, L)
            parts.append(np.broadcast_to(r, (combos.shape[0], L)))
            offset += L
        return np.ascontiguousarray(np.concatenate(parts, axis=1))

    def _move_steps(self, move) -> List[_RawStep]:
        H, slot_terms, g, newg = move
        current = list(slot_terms)
        out: List[_RawStep] = []
        r = len(slot_terms)
        for j in range(r):
            if g[j] == newg[j]:
                continue
            for st in self.explain(g[j], newg[j]):
                env = {Var(f"_z{i}"): current[i] for i in range(r) if i != j}
                env[Var(f"_z{j}")] = st.u
                out.append(_RawStep(substitute(H, env), st.alpha, st.beta, st.just))
            current[j] = self.F.term(newg[j])
        return out

    def _normalize(self, t: Term) -> Tuple[Term, List[_RawStep]]:
        """Replace paired constants outside P by their delta expansion (one step)."""
        basic = set(self.basic_keys)
        alpha, beta, just = [], [], []
        occurrence: Dict[Pair, Var] = {}

        def go(s: Term) -> Term:
            if isinstance(s, Pair) and self.variety.pair_key(s) not in basic:
                if s not in occurrence:
                    occurrence[s] = _priv(len(alpha))
                    beta.append(s)
                    alpha.append(delta_expand(s.left, s.right, self.pack))
                    just.append("c")
                return occurrence[s]
            if isinstance(s, Op) and s.args:
                return Op(s.sym, [go(c) for c in s.args])
            return s
        u = go(t)
        if not alpha:
            return t, []
        step = _RawStep(u, alpha, beta, just)
        new = substitute(u, {_priv(i): a for i, a in enumerate(alpha)})
        return new, [step]

    def search(self, left: Term, right: Term, depth: int, beam: int = 64) -> ChainSearchResult:
        if depth < 0 or beam < 1:
            raise ValueError("depth must be >= 0 and beam >= 1")
        l0, pre = self._normalize(left)
        r0, post = self._normalize(right)
        var_keys = [k for k in self.variety.leaf_keys([l0, r0]) if k[0] == "var"]
        keys = tuple(var_keys + [("pair", k) for k in self.basic_keys])
        lkey = self.variety.vectors([l0], keys)[0].tobytes()
        rkey = self.variety.vectors([r0], keys)[0].tobytes()

        # per side: key -> (term, parent key, move)
        seen = [{lkey: (l0, None, None)}, {rkey: (r0, None, None)}]
        frontier = [[lkey], [rkey]]
        meet = lkey if lkey in seen[1] else None
        expanded = 0
        layer = 0
        while meet is None and layer < depth:
            side = layer % 2
            if not frontier[side]:
                side = 1 - side
                if not frontier[side]:
                    break
            nxt = []
            for key in frontier[side]:
                term = seen[side][key][0]
                expanded += 1
                for new_term, nkey, move in self._moves(term, keys, beam):
                    if nkey in seen[side]:
                        continue
                    seen[side][nkey] = (new_term, key, move)
                    if nkey in seen[1 - side]:
                        meet = nkey
                        break
                    if len(nxt) < beam:
                        nxt.append(nkey)
                if meet is not None:
                    break
            frontier[side] = nxt
            layer += 1
        if meet is None:
            if self.exact and depth > 0:
                forest = self.exact_forest([k[1] for k in var_keys])
                if forest is not None:
                    a, b = forest.element(l0), forest.element(r0)
                    if forest.related(a, b):
                        raw = list(pre) + forest.explain(a, b) + [s.swapped() for s in reversed(post)]
                        return ChainSearchResult([s.finish() for s in raw], "found (exact)", expanded)
                    return ChainSearchResult(None, f"not found with depth <= {depth}, beam {beam} "
                                                   "(closure over the obligation's generators does not "
                                                   "relate the two sides)", expanded)
            return ChainSearchResult(None, f"not found with depth <= {depth}, beam {beam}", expanded)

        raw: List[_RawStep] = list(pre)
        # forward half: l0 -> meet
        moves = []
        k = meet
        while seen[0][k][1] is not None:
            _t, parent, move = seen[0][k]
            moves.append(move)
            k = parent
        for move in reversed(moves):
            raw.extend(self._move_steps(move))
        # backward half: each move went from a right-side term towards the meet
        k = meet
        while seen[1][k][1] is not None:
            _t, parent, move = seen[1][k]
            raw.extend(s.swapped() for s in reversed(self._move_steps(move)))
            k = parent
        raw.extend(s.swapped() for s in reversed(post))
        steps = [s.finish() for s in raw]
        return ChainSearchResult(steps, "found", expanded)


def search_chain(left: Term, right: Term, variety: Variety, pack: DiagPack, depth: int,
                 beam: int = 64, searcher: Optional[ChainSearcher] = None) -> Optional[List[ChainStep]]:
    """Steps leading from ``left`` to ``right``, or None when not found in budget.

    Every returned step has been re-checked with ``verify_step``.
    """
    searcher = searcher or ChainSearcher(variety, pack)
    res = searcher.search(left, right, depth, beam)
    if res.steps is None:
        return None
    _assert_sound(res.steps, left, right, variety, pack)
    return res.steps


def _assert_sound(steps, left, right, variety, pack) -> None:
    point = left
    for i, st in enumerate(steps):
        if not verify_step(st, point, st.right(), variety, pack):
            errs = step_failures(st, point, st.right(), variety, pack, i)
            raise AssertionError("search produced an invalid step: " + "; ".join(map(str, errs)))
        point = st.right()
    if not variety.equal(point, right):
        raise AssertionError("search produced a chain with the wrong end point")


@dataclass
class CertificateSearchResult:
    certificate: Optional[Certificate]
    missing: List[str]
    diagnostics: Dict[str, str]

    @property
    def found(self) -> bool:
        return self.certificate is not None


def search_certificate(variety: Variety, pack: DiagPack, depth: int, beam: int = 64,
                       budget: int = DEFAULT_SCAN_BUDGET) -> CertificateSearchResult:
    searcher = ChainSearcher(variety, pack, budget=budget)
    diagnostics: Dict[str, str] = {}
    missing: List[str] = []
    start, end = idempotence_obligation(pack)
    idem = search_chain(start, end, variety, pack, depth, beam, searcher)
    diagnostics["idempotence"] = "found" if idem is not None else f"not found <= depth {depth}"
    if idem is None:
        missing.append("idempotence")
    homs: Dict[str, List[ChainStep]] = {}
    for sym, ar in variety.sig.ops:
        start, end = hom_obligation(pack, sym, ar)
        steps = search_chain(start, end, variety, pack, depth, beam, searcher)
        name = f"hom {sym}"
        diagnostics[name] = "found" if steps is not None else f"not found <= depth {depth}"
        if steps is None:
            missing.append(name)
        else:
            homs[sym] = steps
    if missing:
        return CertificateSearchResult(None, missing, diagnostics)
    return CertificateSearchResult(Certificate(pack, idem, homs), [], diagnostics)
