"""Signatures and terms over variables and paired constants.

Terms are immutable trees.  A leaf is either a variable ``Var`` or a paired
constant ``Pair`` (an element of F(0)^2 used as a free generator); inner nodes
are ``Op`` applications.  Constants are nullary ``Op`` nodes.

Concrete syntax::

    term := ident | ident "(" term ("," term)* ")" | "(" term "|" term ")"
"""
from __future__ import annotations

import itertools
import re
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple


class TermError(ValueError):
    pass


class Signature:
    """Ordered list of operation symbols with arities."""

    def __init__(self, ops: Iterable[Tuple[str, int]]):
        self.ops: Tuple[Tuple[str, int], ...] = tuple((str(s), int(a)) for s, a in ops)
        self.arity: Dict[str, int] = {}
        for sym, ar in self.ops:
            if ar < 0:
                raise TermError(f"negative arity for {sym}")
            if sym in self.arity:
                raise TermError(f"duplicate symbol {sym}")
            if not _IDENT.fullmatch(sym):
                raise TermError(f"bad symbol name {sym!r}")
            self.arity[sym] = ar

    @property
    def symbols(self) -> List[str]:
        return [s for s, _ in self.ops]

    @property
    def constants(self) -> List[str]:
        return [s for s, a in self.ops if a == 0]

    def __contains__(self, sym: str) -> bool:
        return sym in self.arity

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Signature) and self.ops == other.ops

    def __hash__(self) -> int:
        return hash(self.ops)

    def __repr__(self) -> str:
        return "Signature(" + ", ".join(f"{s}/{a}" for s, a in self.ops) + ")"


class Term:
    __slots__ = ("_hash",)

    def is_ground(self) -> bool:
        """True when the term has no variable leaves."""
        return not any(isinstance(g, Var) for g in self.leaves())

    def is_constant(self) -> bool:
        """True for terms built from constant symbols only (no leaves at all)."""
        return not any(True for _ in self.leaves())

    def leaves(self) -> Iterator["Term"]:
        stack = [self]
        while stack:
            t = stack.pop()
            if isinstance(t, Op):
                stack.extend(reversed(t.args))
            else:
                yield t

    def variables(self) -> List[str]:
        seen: Dict[str, None] = {}
        for g in self.leaves():
            if isinstance(g, Var):
                seen.setdefault(g.name, None)
        return list(seen)

    def pairs(self) -> List["Pair"]:
        seen: Dict[Pair, None] = {}
        for g in self.leaves():
            if isinstance(g, Pair):
                seen.setdefault(g, None)
        return list(seen)

    def depth(self) -> int:
        if isinstance(self, Op) and self.args:
            return 1 + max(a.depth() for a in self.args)
        return 0

    def size(self) -> int:
        if isinstance(self, Op):
            return 1 + sum(a.size() for a in self.args)
        return 1

    def __str__(self) -> str:
        return format_term(self)


class Var(Term):
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name
        self._hash = hash(("v", name))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Var) and other.name == self.name

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Var({self.name!r})"


class Pair(Term):
    """Paired constant (left|right); both components are constant terms."""

    __slots__ = ("left", "right")

    def __init__(self, left: Term, right: Term):
        if not (left.is_constant() and right.is_constant()):
            raise TermError(f"paired constant components must be constant terms: ({left}|{right})")
        self.left = left
        self.right = right
        self._hash = hash(("p", left, right))

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, Pair) and self._hash == other._hash
                and other.left == self.left and other.right == self.right)

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Pair({self.left!r}, {self.right!r})"


class Op(Term):
    __slots__ = ("sym", "args")

    def __init__(self, sym: str, args: Sequence[Term] = ()):
        self.sym = sym
        self.args: Tuple[Term, ...] = tuple(args)
        self._hash = hash((sym, self.args))

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        return (isinstance(other, Op) and self._hash == other._hash
                and other.sym == self.sym and other.args == self.args)

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        if not self.args:
            return f"Op({self.sym!r})"
        return f"Op({self.sym!r}, {list(self.args)!r})"


def const(sym: str) -> Op:
    return Op(sym, ())


def format_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Pair):
        return f"({format_term(t.left)}|{format_term(t.right)})"
    assert isinstance(t, Op)
    if not t.args:
        return t.sym
    return t.sym + "(" + ",".join(format_term(a) for a in t.args) + ")"


# --- parsing -----------------------------------------------------------------

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_TOKEN = re.compile(r"\s*(?:([A-Za-z_][A-Za-z0-9_]*)|([(),|]))")


def _tokenize(text: str) -> List[str]:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise TermError(f"unexpected character {text[pos:].lstrip()[:1]!r} in {text!r}")
        out.append(m.group(1) or m.group(2))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str, sig: Signature):
        self.toks = _tokenize(text)
        self.i = 0
        self.sig = sig
        self.text = text

    def peek(self) -> Optional[str]:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expect: Optional[str] = None) -> str:
        tok = self.peek()
        if tok is None:
            raise TermError(f"unexpected end of input in {self.text!r}")
        if expect is not None and tok != expect:
            raise TermError(f"expected {expect!r}, got {tok!r} in {self.text!r}")
        self.i += 1
        return tok

    def term(self) -> Term:
        tok = self.take()
        if tok == "(":
            left = self.term()
            self.take("|")
            right = self.term()
            self.take(")")
            for side in (left, right):
                if not side.is_constant():
                    raise TermError(f"paired constant component {side} is not a constant term")
            return Pair(left, right)
        if not _IDENT.fullmatch(tok):
            raise TermError(f"unexpected {tok!r} in {self.text!r}")
        if self.peek() == "(":
            if tok not in self.sig:
                raise TermError(f"unknown symbol {tok!r}")
            self.take("(")
            args = [self.term()]
            while self.peek() == ",":
                self.take(",")
                args.append(self.term())
            self.take(")")
            if len(args) != self.sig.arity[tok]:
                raise TermError(f"arity mismatch: {tok} takes {self.sig.arity[tok]} arguments, got {len(args)}")
            return Op(tok, args)
        if tok in self.sig:
            if self.sig.arity[tok] != 0:
                raise TermError(f"arity mismatch: {tok} takes {self.sig.arity[tok]} arguments, got 0")
            return Op(tok, ())
        return Var(tok)


def parse_term(text: str, sig: Signature) -> Term:
    p = _Parser(text, sig)
    t = p.term()
    if p.peek() is not None:
        raise TermError(f"trailing input {p.peek()!r} in {text!r}")
    return t


def check_term(t: Term, sig: Signature) -> None:
    """Raise TermError unless every node of ``t`` is arity-correct for ``sig``."""
    if isinstance(t, Op):
        if t.sym not in sig:
            raise TermError(f"unknown symbol {t.sym!r}")
        if len(t.args) != sig.arity[t.sym]:
            raise TermError(f"arity mismatch at {t.sym}")
        for a in t.args:
            check_term(a, sig)
    elif isinstance(t, Pair):
        check_term(t.left, sig)
        check_term(t.right, sig)


# --- substitution ------------------------------------------------------------

def substitute(t: Term, env: Mapping[Term, Term], strict: bool = False) -> Term:
    """Simultaneously replace generator leaves (Var or Pair) by terms.

    With ``strict=True`` every leaf must be bound.
    """
    cache: Dict[Term, Term] = {}

    def go(s: Term) -> Term:
        if isinstance(s, Op):
            if not s.args:
                return s
            r = cache.get(s)
            if r is None:
                r = Op(s.sym, [go(a) for a in s.args])
                cache[s] = r
            return r
        r = env.get(s)
        if r is None:
            if strict:
                raise TermError(f"no binding for {format_term(s)}")
            return s
        return r

    return go(t)


def substitute_vars(t: Term, env: Mapping[str, Term], strict: bool = False) -> Term:
    return substitute(t, {Var(k): v for k, v in env.items()}, strict=strict)


# --- enumeration -------------------------------------------------------------

def enumerate_terms(sig: Signature, gens: Sequence[Term], max_depth: int) -> Iterator[Term]:
    """Yield every term of depth <= max_depth exactly once.

    Order: by depth; leaves are the generators followed by the constants in
    symbol order; at each depth by symbol order, then lexicographically on the
    positions of the children in the enumeration so far.
    """
    if max_depth < 0:
        return
    upto: List[Term] = list(dict.fromkeys(list(gens) + [Op(c) for c in sig.constants]))
    yield from upto
    newest_start = 0
    for _ in range(max_depth):
        prev = upto
        level: List[Term] = []
        for sym, ar in sig.ops:
            if ar == 0:
                continue
            for idx in itertools.product(range(len(prev)), repeat=ar):
                if max(idx) < newest_start:
                    continue
                level.append(Op(sym, [prev[i] for i in idx]))
        newest_start = len(prev)
        upto = prev + level
        yield from level


# --- matching ----------------------------------------------------------------

def match(pattern: Term, term: Term, pvars: Iterable[str],
          bindings: Optional[Dict[str, Term]] = None) -> Optional[Dict[str, Term]]:
    """Syntactic one-sided matching; only variables named in ``pvars`` bind."""
    pv = set(pvars)
    b: Dict[str, Term] = dict(bindings or {})

    def go(p: Term, s: Term) -> bool:
        if isinstance(p, Var) and p.name in pv:
            old = b.get(p.name)
            if old is None:
                b[p.name] = s
                return True
            return old == s
        if isinstance(p, Op):
            if not isinstance(s, Op) or s.sym != p.sym or len(s.args) != len(p.args):
                return False
            return all(go(pa, sa) for pa, sa in zip(p.args, s.args))
        return p == s

    return b if go(pattern, term) else None


def positions(t: Term) -> Iterator[Tuple[Tuple[int, ...], Term]]:
    """Preorder (path, subterm) pairs."""
    stack: List[Tuple[Tuple[int, ...], Term]] = [((), t)]
    while stack:
        path, s = stack.pop()
        yield path, s
        if isinstance(s, Op):
            for i in reversed(range(len(s.args))):
                stack.append((path + (i,), s.args[i]))


def replace_at(t: Term, path: Sequence[int], new: Term) -> Term:
    if not path:
        return new
    assert isinstance(t, Op)
    i = path[0]
    args = list(t.args)
    args[i] = replace_at(args[i], path[1:], new)
    return Op(t.sym, args)
