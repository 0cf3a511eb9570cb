"""Hot loops over flattened operation tables.

Two implementations of each kernel live here: a numba one and a plain
numpy/python one.  ``COEXT_DISABLE_JIT=1`` (or a missing numba) selects the
numpy path for the module-level names ``cg_closure`` and ``subalgebra_closure``.

Tables are passed packed: ``arities[f]``, ``offsets[f]`` into ``flat``, where
op ``f`` occupies ``n**arities[f]`` row-major entries.
"""
from __future__ import annotations

import os

import numpy as np

try:  # pragma: no cover - exercised implicitly
    import numba as _nb
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _nb = None
    HAVE_NUMBA = False

JIT_DISABLED = os.environ.get("COEXT_DISABLE_JIT", "").strip().lower() in ("1", "true", "yes")
USE_NUMBA = HAVE_NUMBA and not JIT_DISABLED

# edge reason codes
SEED = 0
TRANSLATION = 1


def _njit(fn):
    if HAVE_NUMBA:
        return _nb.njit(cache=True, nogil=True)(fn)
    return fn


# --- congruence closure ------------------------------------------------------

def _find_py(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def cg_closure_numpy(n, arities, offsets, flat, seed_a, seed_b):
    """Least congruence containing the seed pairs.

    Returns ``(rep, edges)``: ``rep[i]`` is the least element of the class of
    ``i``; ``edges`` is an int64 array of shape (m, 7) logging each union as
    ``(a, b, reason, op, pos, tuple_index, source)`` where ``source`` is the
    seed index for SEED edges and the parent edge row for TRANSLATION edges.
    """
    parent = list(range(n))
    edges = []

    def union(a, b, reason, f, pos, tix, src):
        ra, rb = _find_py(parent, a), _find_py(parent, b)
        if ra == rb:
            return
        if rb < ra:
            ra, rb = rb, ra
        parent[rb] = ra
        edges.append((a, b, reason, f, pos, tix, src))

    for s in range(len(seed_a)):
        union(int(seed_a[s]), int(seed_b[s]), SEED, -1, -1, -1, s)

    tables = []
    for f in range(len(arities)):
        m = int(arities[f])
        size = n ** m
        tables.append(flat[offsets[f]:offsets[f] + size].reshape((n,) * m) if m else None)

    head = 0
    while head < len(edges):
        c, d = edges[head][0], edges[head][1]
        for f in range(len(arities)):
            m = int(arities[f])
            if m == 0:
                continue
            tab = tables[f]
            for pos in range(m):
                left = np.take(tab, c, axis=pos).ravel()
                right = np.take(tab, d, axis=pos).ravel()
                for t in np.nonzero(left != right)[0]:
                    union(int(left[t]), int(right[t]), TRANSLATION, f, pos, int(t), head)
        head += 1

    rep = np.array([_find_py(parent, i) for i in range(n)], dtype=np.int64)
    out = np.array(edges, dtype=np.int64).reshape(-1, 7)
    return rep, out


@_njit
def _find_nb(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@_njit
def _cg_closure_nb(n, arities, offsets, flat, seed_a, seed_b):
    parent = np.arange(n)
    edges = np.empty((max(n - 1, 0), 7), dtype=np.int64)
    ne = 0
    for s in range(seed_a.shape[0]):
        a = seed_a[s]
        b = seed_b[s]
        ra = _find_nb(parent, a)
        rb = _find_nb(parent, b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            parent[rb] = ra
            edges[ne, 0] = a
            edges[ne, 1] = b
            edges[ne, 2] = 0
            edges[ne, 3] = -1
            edges[ne, 4] = -1
            edges[ne, 5] = -1
            edges[ne, 6] = s
            ne += 1
    head = 0
    while head < ne:
        c = edges[head, 0]
        d = edges[head, 1]
        for f in range(arities.shape[0]):
            m = arities[f]
            if m == 0:
                continue
            base = offsets[f]
            rest = 1
            for _ in range(m - 1):
                rest *= n
            for pos in range(m):
                stride = 1
                for _ in range(m - 1 - pos):
                    stride *= n
                for t in range(rest):
                    high = t // stride
                    low = t % stride
                    idx = high * stride * n + low
                    x = flat[base + idx + c * stride]
                    y = flat[base + idx + d * stride]
                    if x == y:
                        continue
                    rx = _find_nb(parent, x)
                    ry = _find_nb(parent, y)
                    if rx == ry:
                        continue
                    if ry < rx:
                        rx, ry = ry, rx
                    parent[ry] = rx
                    edges[ne, 0] = x
                    edges[ne, 1] = y
                    edges[ne, 2] = 1
                    edges[ne, 3] = f
                    edges[ne, 4] = pos
                    edges[ne, 5] = t
                    edges[ne, 6] = head
                    ne += 1
        head += 1
    rep = np.empty(n, dtype=np.int64)
    for i in range(n):
        rep[i] = _find_nb(parent, i)
    return rep, edges[:ne]


def cg_closure_numba(n, arities, offsets, flat, seed_a, seed_b):
    return _cg_closure_nb(np.int64(n), np.asarray(arities, np.int64), np.asarray(offsets, np.int64),
                          np.asarray(flat, np.int64), np.asarray(seed_a, np.int64),
                          np.asarray(seed_b, np.int64))


# --- subalgebra closure ------------------------------------------------------

def subalgebra_closure_numpy(n, arities, offsets, flat, mask):
    """Least subset containing ``mask`` and closed under every table."""
    inside = np.asarray(mask, dtype=bool).copy()
    tables = [flat[offsets[f]:offsets[f] + n ** int(arities[f])].reshape((n,) * int(arities[f]))
              for f in range(len(arities))]
    while True:
        grown = False
        members = np.nonzero(inside)[0]
        for f, tab in enumerate(tables):
            m = int(arities[f])
            img = tab if m == 0 else tab[np.ix_(*([members] * m))]
            img = np.unique(np.asarray(img).ravel())
            fresh = img[~inside[img]]
            if fresh.size:
                inside[fresh] = True
                grown = True
        if not grown:
            return inside


@_njit
def _subalgebra_closure_nb(n, arities, offsets, flat, mask):
    inside = mask.copy()
    grown = True
    while grown:
        grown = False
        for f in range(arities.shape[0]):
            m = arities[f]
            base = offsets[f]
            size = 1
            for _ in range(m):
                size *= n
            for idx in range(size):
                r = idx
                ok = True
                for _ in range(m):
                    if not inside[r % n]:
                        ok = False
                        break
                    r //= n
                if ok:
                    v = flat[base + idx]
                    if not inside[v]:
                        inside[v] = True
                        grown = True
    return inside


def subalgebra_closure_numba(n, arities, offsets, flat, mask):
    return _subalgebra_closure_nb(np.int64(n), np.asarray(arities, np.int64),
                                  np.asarray(offsets, np.int64), np.asarray(flat, np.int64),
                                  np.asarray(mask, dtype=np.bool_))


if USE_NUMBA:
    cg_closure = cg_closure_numba
    subalgebra_closure = subalgebra_closure_numba
else:
    cg_closure = cg_closure_numpy
    subalgebra_closure = subalgebra_closure_numpy

BACKEND = "numba" if USE_NUMBA else "numpy"
