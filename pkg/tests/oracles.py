"""Slow, obviously-correct reference implementations used only by the tests."""
from __future__ import annotations

import itertools
from typing import Dict, Iterator, List, Sequence, Set, Tuple

import numpy as np

from coext.finalg import FiniteAlgebra
from coext.terms import Signature


def random_algebra(rng: np.random.Generator, size: int, sig: Signature, name: str = "R") -> FiniteAlgebra:
    tables = {}
    for sym, ar in sig.ops:
        tables[sym] = int(rng.integers(size)) if ar == 0 else rng.integers(0, size, (size,) * ar)
    return FiniteAlgebra(sig, size, tables, name=name)


def naive_congruence(A: FiniteAlgebra, pairs: Sequence[Tuple[int, int]]) -> np.ndarray:
    """Boolean relation matrix: close under refl/sym/trans/compatibility by rescanning."""
    n = A.size
    rel = np.eye(n, dtype=bool)
    for a, b in pairs:
        rel[a, b] = rel[b, a] = True
    changed = True
    while changed:
        changed = False
        for a, b, c in itertools.product(range(n), repeat=3):
            if rel[a, b] and rel[b, c] and not rel[a, c]:
                rel[a, c] = rel[c, a] = True
                changed = True
        for sym, ar in A.sig.ops:
            if ar == 0:
                continue
            tab = A.tables[sym]
            for xs in itertools.product(range(n), repeat=ar):
                for ys in itertools.product(range(n), repeat=ar):
                    if all(rel[x, y] for x, y in zip(xs, ys)):
                        u, v = int(tab[xs]), int(tab[ys])
                        if not rel[u, v]:
                            rel[u, v] = rel[v, u] = True
                            changed = True
    return rel


def naive_subalgebra(A: FiniteAlgebra, seed) -> Set[int]:
    got = set(int(s) for s in seed) | {int(A.tables[c]) for c in A.sig.constants}
    while True:
        new = set(got)
        for sym, ar in A.sig.ops:
            if ar == 0:
                continue
            for xs in itertools.product(sorted(got), repeat=ar):
                new.add(int(A.tables[sym][xs]))
        if new == got:
            return got
        got = new


def set_partitions(n: int) -> Iterator[List[int]]:
    """All partitions of range(n) as restricted growth strings."""
    def go(prefix: List[int], top: int):
        if len(prefix) == n:
            yield list(prefix)
            return
        for b in range(top + 2):
            prefix.append(b)
            yield from go(prefix, max(top, b))
            prefix.pop()
    if n == 0:
        yield []
    else:
        yield from go([0], 0)


def is_compatible_partition(A: FiniteAlgebra, blocks: Sequence[int]) -> bool:
    blocks = np.asarray(blocks)
    for sym, ar in A.sig.ops:
        if ar == 0:
            continue
        out = blocks[A.tables[sym]]
        for pos in range(ar):
            # outputs may only depend on the block of argument pos
            for a, b in itertools.combinations(range(A.size), 2):
                if blocks[a] == blocks[b]:
                    if not np.array_equal(np.take(out, a, axis=pos), np.take(out, b, axis=pos)):
                        return False
    return True


def congruences_by_partitions(A: FiniteAlgebra) -> List[Tuple[int, ...]]:
    """Least-representative keys of every congruence, by filtering all partitions."""
    out = []
    for blocks in set_partitions(A.size):
        if is_compatible_partition(A, blocks):
            first: Dict[int, int] = {}
            out.append(tuple(first.setdefault(b, i) for i, b in enumerate(blocks)))
    return sorted(out)


def all_functions(n_dom: int, n_cod: int) -> Iterator[Tuple[int, ...]]:
    return itertools.product(range(n_cod), repeat=n_dom)
