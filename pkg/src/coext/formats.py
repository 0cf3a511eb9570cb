"""Line-oriented text formats: algebras, packs, homomorphisms, certificates.

Algebra::

    algebra z2
    carrier 2
    names 0 1              # optional
    op add/2
    0 1
    1 0
    op zero/0 = 0

Pack::

    diag k=2
    t = add(mul(x,c1),mul(y,c2))
    e = one,zero
    e' = zero,one

Homomorphism out of a product X x Y (images listed for (a, b) in order
``a * |Y| + b``; the codomain path is relative to the file)::

    hom q
    codomain z6.alg
    map 0 1 2 3 4 5

Certificate: ``certificate``, a pack block, then ``chain idempotence`` /
``chain hom <sym>`` blocks of steps ``u = ..``, ``alpha = ..;..``,
``beta = ..;..``, ``just = a,b,..``.
"""
from __future__ import annotations

from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .finalg import AlgebraError, FiniteAlgebra
from .terms import Signature, Term, TermError, format_term, parse_term


class FormatError(ValueError):
    pass


def _lines(text: str) -> List[Tuple[int, str]]:
    out = []
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append((no, line))
    return out


# --- algebras ------------------------------------------------------------------

def parse_algebra(text: str) -> FiniteAlgebra:
    lines = _lines(text)
    if not lines or not lines[0][1].startswith("algebra"):
        raise FormatError("algebra file must start with 'algebra <name>'")
    name = lines[0][1][len("algebra"):].strip()
    i = 1
    if i >= len(lines) or not lines[i][1].startswith("carrier"):
        raise FormatError("expected 'carrier <k>'")
    try:
        n = int(lines[i][1].split()[1])
    except (IndexError, ValueError):
        raise FormatError(f"line {lines[i][0]}: bad carrier line") from None
    i += 1
    names = None
    if i < len(lines) and lines[i][1].startswith("names"):
        names = lines[i][1].split()[1:]
        i += 1
    ops: List[Tuple[str, int]] = []
    tables: Dict[str, object] = {}
    while i < len(lines):
        no, line = lines[i]
        if not line.startswith("op "):
            raise FormatError(f"line {no}: expected 'op <sym>/<arity>'")
        head = line[3:].strip()
        value = None
        if "=" in head:
            head, value = (s.strip() for s in head.split("=", 1))
        try:
            sym, ar_text = head.split("/")
            ar = int(ar_text)
        except ValueError:
            raise FormatError(f"line {no}: bad op header {head!r}") from None
        i += 1
        if ar == 0:
            if value is None:
                raise FormatError(f"line {no}: nullary op needs '= <element>'")
            tables[sym] = _elem(value, no)
        else:
            if value is not None:
                raise FormatError(f"line {no}: only nullary ops take '='")
            rows = n ** (ar - 1)
            if i + rows > len(lines):
                raise FormatError(f"line {no}: table for {sym} is truncated")
            data = []
            for r in range(rows):
                rno, rline = lines[i + r]
                entries = [_elem(tok, rno) for tok in rline.split()]
                if len(entries) != n:
                    raise FormatError(f"line {rno}: expected {n} entries, got {len(entries)}")
                data.extend(entries)
            i += rows
            tables[sym] = np.array(data, dtype=np.int64).reshape((n,) * ar)
        ops.append((sym, ar))
    try:
        return FiniteAlgebra(Signature(ops), n, tables, name=name, element_names=names)
    except (AlgebraError, TermError) as exc:
        raise FormatError(str(exc)) from None


def _elem(tok: str, no: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise FormatError(f"line {no}: bad element {tok!r}") from None


def format_algebra(A: FiniteAlgebra) -> str:
    out = [f"algebra {A.name or 'A'}", f"carrier {A.size}"]
    if A.element_names:
        out.append("names " + " ".join(A.element_names))
    for sym, ar in A.sig.ops:
        tab = A.tables[sym]
        if ar == 0:
            out.append(f"op {sym}/0 = {int(tab)}")
            continue
        out.append(f"op {sym}/{ar}")
        for row in tab.reshape(-1, A.size):
            out.append(" ".join(str(int(v)) for v in row))
    return "\n".join(out) + "\n"


def load_algebra(path) -> FiniteAlgebra:
    return parse_algebra(Path(path).read_text())


# --- packs -------------------------------------------------------------------

def _parse_pack_lines(lines: List[Tuple[int, str]], i: int, sig: Signature):
    from .diagonal import DiagPack

    no, head = lines[i]
    if not head.startswith("diag"):
        raise FormatError(f"line {no}: expected 'diag k=<k>'")
    try:
        k = int(head.split("k=", 1)[1])
    except (IndexError, ValueError):
        raise FormatError(f"line {no}: bad pack header {head!r}") from None
    fields: Dict[str, str] = {}
    j = i + 1
    while j < len(lines) and len(fields) < 3:
        lno, line = lines[j]
        key, sep, val = line.partition("=")
        key = key.strip()
        if not sep or key not in ("t", "e", "e'"):
            break
        fields[key] = val.strip()
        j += 1
    if set(fields) != {"t", "e", "e'"}:
        raise FormatError(f"line {no}: pack needs t, e and e' lines")
    try:
        t = parse_term(fields["t"], sig)
        e = [parse_term(s, sig) for s in _split_top(fields["e"], ",")]
        e2 = [parse_term(s, sig) for s in _split_top(fields["e'"], ",")]
        pack = DiagPack(t, e, e2)
    except (TermError, ValueError) as exc:
        raise FormatError(f"line {no}: {exc}") from None
    if pack.k != k:
        raise FormatError(f"line {no}: header says k={k} but {pack.k} constants given")
    return pack, j


def parse_pack(text: str, sig: Signature):
    lines = _lines(text)
    if not lines:
        raise FormatError("empty pack file")
    pack, j = _parse_pack_lines(lines, 0, sig)
    if j != len(lines):
        raise FormatError(f"line {lines[j][0]}: unexpected content after pack")
    return pack


def format_pack(pack) -> str:
    return (f"diag k={pack.k}\n"
            f"t = {format_term(pack.t)}\n"
            f"e = {','.join(format_term(c) for c in pack.e)}\n"
            f"e' = {','.join(format_term(c) for c in pack.e_prime)}\n")


def load_pack(path, sig: Signature):
    return parse_pack(Path(path).read_text(), sig)


def _split_top(text: str, sep: str) -> List[str]:
    """Split on ``sep`` outside parentheses; empty text gives no parts."""
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    last = "".join(cur).strip()
    if last or parts:
        parts.append(last)
    if any(not p for p in parts):
        raise FormatError(f"empty item in {text!r}")
    return parts


# --- homomorphisms -------------------------------------------------------------

def parse_hom(text: str, base: Optional[Path] = None) -> Tuple[str, FiniteAlgebra, np.ndarray]:
    """Returns (name, codomain, image array)."""
    lines = _lines(text)
    if len(lines) != 3 or not lines[0][1].startswith("hom"):
        raise FormatError("hom file needs 'hom', 'codomain' and 'map' lines")
    name = lines[0][1][3:].strip()
    if not lines[1][1].startswith("codomain"):
        raise FormatError(f"line {lines[1][0]}: expected 'codomain <path>'")
    cpath = Path(lines[1][1].split(None, 1)[1])
    if base is not None and not cpath.is_absolute():
        cpath = base / cpath
    cod = load_algebra(cpath)
    if not lines[2][1].startswith("map"):
        raise FormatError(f"line {lines[2][0]}: expected 'map ...'")
    images = np.array([_elem(t, lines[2][0]) for t in lines[2][1].split()[1:]], dtype=np.int64)
    return name, cod, images


def load_hom(path):
    path = Path(path)
    return parse_hom(path.read_text(), path.parent)


# --- certificates ----------------------------------------------------------------

def parse_certificate(text: str, sig: Signature):
    from .witness import Certificate, ChainStep

    lines = _lines(text)
    if not lines or lines[0][1] != "certificate":
        raise FormatError("certificate file must start with 'certificate'")
    if len(lines) < 2:
        raise FormatError("certificate needs a pack block")
    pack, i = _parse_pack_lines(lines, 1, sig)
    idem: Optional[List] = None
    homs: Dict[str, List] = {}
    current: Optional[List] = None
    while i < len(lines):
        no, line = lines[i]
        if line.startswith("chain"):
            parts = line.split()
            if parts[1:] == ["idempotence"]:
                idem = current = []
            elif len(parts) == 3 and parts[1] == "hom":
                if parts[2] not in sig:
                    raise FormatError(f"line {no}: unknown operation {parts[2]!r}")
                current = homs[parts[2]] = []
            else:
                raise FormatError(f"line {no}: bad chain header {line!r}")
            i += 1
            continue
        if current is None:
            raise FormatError(f"line {no}: step outside a chain")
        block = {}
        for key in ("u", "alpha", "beta", "just"):
            if i >= len(lines):
                raise FormatError("truncated step")
            lno, l2 = lines[i]
            k2, sep, val = l2.partition("=")
            if k2.strip() != key or not sep:
                raise FormatError(f"line {lno}: expected '{key} = ...'")
            block[key] = (lno, val.strip())
            i += 1
        try:
            u = parse_term(block["u"][1], sig)
            alpha = [parse_term(s, sig) for s in _split_top(block["alpha"][1], ";")]
            beta = [parse_term(s, sig) for s in _split_top(block["beta"][1], ";")]
            just = [s.strip() for s in _split_top(block["just"][1], ",")]
        except TermError as exc:
            raise FormatError(f"line {block['u'][0]}: {exc}") from None
        current.append(ChainStep(u, alpha, beta, just))
    if idem is None:
        raise FormatError("certificate has no idempotence chain")
    return Certificate(pack, idem, homs)


def format_certificate(cert) -> str:
    out = ["certificate", format_pack(cert.pack).rstrip("\n")]

    def chain(header, steps):
        out.append(header)
        for st in steps:
            out.append(f"u = {format_term(st.u)}")
            out.append("alpha = " + ";".join(format_term(a) for a in st.alpha))
            out.append("beta = " + ";".join(format_term(b) for b in st.beta))
            out.append("just = " + ",".join(st.just))

    chain("chain idempotence", cert.idempotence_chain)
    for sym, steps in cert.hom_chains.items():
        chain(f"chain hom {sym}", steps)
    return "\n".join(out) + "\n"


def load_certificate(path, sig: Signature):
    return parse_certificate(Path(path).read_text(), sig)
