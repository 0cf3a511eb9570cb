"""Command line interface: ``ualg <command> ...``.

Exit status is 0 when the check passes, 1 on a semantic failure (identity
fails, nothing found, certificate rejected) and 2 on malformed input or an
exhausted budget.  File arguments that do not exist are looked up in the
bundled corpus, so ``ualg check-diag z6.alg crings.diag`` works anywhere.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

from . import __version__
from .corpus import corpus_path
from .decompose import Counterexample, DecompositionError, decompose
from .diagonal import check_diag, diag_failure, search_diag
from .finalg import (AlgebraError, BudgetExceeded, DEFAULT_SCAN_BUDGET, Homomorphism, Variety,
                     free_algebra, product)
from .formats import (FormatError, format_certificate, format_pack, load_algebra, load_certificate,
                      load_hom, load_pack)
from .terms import TermError, format_term
from .witness import CertificateError, search_certificate, verify_certificate

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    inputs: List[str]
    max_depth: int = 3
    max_k: int = 2
    depth: int = 6
    beam: int = 64
    generators: int = 1
    budget: int = DEFAULT_SCAN_BUDGET
    format: str = "text"
    seed: int = 0
    output: Optional[str] = None

    def __post_init__(self):
        for name in ("max_depth", "max_k", "depth", "generators"):
            if getattr(self, name) < 0:
                raise InputError(f"--{name.replace('_', '-')} must be non-negative")
        if self.beam < 1 or self.budget < 1:
            raise InputError("--beam and --budget must be positive")


@dataclass
class Report:
    config: RunConfig
    status: str = "pass"
    lines: List[str] = field(default_factory=list)
    data: dict = field(default_factory=dict)

    def exit_code(self) -> int:
        return {"pass": EXIT_OK, "fail": EXIT_FAIL}.get(self.status, EXIT_INPUT)

    def emit(self, out) -> None:
        if self.config.format == "report":
            payload = {"command": self.config.command, "status": self.status, "seed": self.config.seed,
                       "config": asdict(self.config), "lines": self.lines, **self.data}
            out.write(json.dumps(payload, indent=2, default=str) + "\n")
        else:
            for line in self.lines:
                out.write(line + "\n")
            out.write(f"{self.status.upper()} (seed {self.config.seed})\n")


def resolve(path: str) -> Path:
    p = Path(path)
    if p.exists():
        return p
    alt = corpus_path(path)
    if alt.exists():
        return alt
    raise InputError(f"no such file: {path}")


def _variety(paths: Sequence[str], budget: int) -> Variety:
    if not paths:
        raise InputError("need at least one algebra file")
    return Variety([load_algebra(resolve(p)) for p in paths], budget=budget)


def _write(report: Report, text: str, default_name: str) -> None:
    if report.config.output:
        Path(report.config.output).write_text(text)
        report.lines.append(f"wrote {report.config.output}")
    else:
        report.lines.extend(text.rstrip("\n").splitlines())
    report.data[default_name] = text


# --- commands ----------------------------------------------------------------

def cmd_check_diag(cfg: RunConfig) -> Report:
    *algs, pack_file = _need(cfg, 2)
    V = _variety(algs, cfg.budget)
    pack = load_pack(resolve(pack_file), V.sig)
    rep = Report(cfg)
    rep.lines.append(f"pack: {pack}")
    fail = diag_failure(V, pack)
    if fail is None:
        rep.lines.append("t(x,y,e) = x and t(x,y,e') = y hold in every generating algebra")
    else:
        which = "t(x,y,e) = x" if fail.identity == "left" else "t(x,y,e') = y"
        rep.status = "fail"
        rep.lines.append(f"{which} fails in {fail.algebra} at {fail.assignment}")
        rep.data["failure"] = asdict(fail)
    return rep


def cmd_search_diag(cfg: RunConfig) -> Report:
    V = _variety(_need(cfg, 1), cfg.budget)
    res = search_diag(V, cfg.max_depth, cfg.max_k, cfg.budget)
    rep = Report(cfg)
    rep.data.update(depth=res.depth, k=res.k, candidates=res.candidates)
    if not res.found:
        rep.status = "fail"
        rep.lines.append(res.diagnostic)
        return rep
    rep.lines.append(f"found at depth {res.depth}, k = {res.k} after {res.candidates} candidates")
    _write(rep, format_pack(res.pack), "pack")
    return rep


def cmd_decompose(cfg: RunConfig) -> Report:
    files = _need(cfg, 3)
    if len(files) > 4:
        raise InputError("decompose takes X Y HOM [PACK]")
    X = load_algebra(resolve(files[0]))
    Y = load_algebra(resolve(files[1]))
    name, cod, images = load_hom(resolve(files[2]))
    pack = load_pack(resolve(files[3]), X.sig) if len(files) == 4 else None
    P, _, _ = product(X, Y)
    if images.shape != (P.size,):
        raise InputError(f"hom {name} lists {images.size} images, expected {P.size}")
    q = Homomorphism(P, cod, images)
    bad = q.failure()
    if bad is not None:
        raise InputError(f"{name} is not a homomorphism: fails at {bad[0]} on {bad[1]}")
    rep = Report(cfg)
    try:
        res = decompose(X, Y, q, pack)
    except DecompositionError as exc:
        rep.status = "fail"
        rep.lines.append(str(exc))
        return rep
    tx, ty = res.theta_X, res.theta_Y
    rep.lines.append(f"E_X on {X.name}: {_describe(tx)}")
    rep.lines.append(f"E_Y on {Y.name}: {_describe(ty)}")
    rep.data.update(theta_X=list(tx.key()), theta_Y=list(ty.key()))
    if isinstance(res, Counterexample):
        rep.status = "fail"
        who = "q but not by q_X x q_Y" if res.merged_by_q else "q_X x q_Y but not by q"
        rep.lines.append(f"{res.first} and {res.second} are identified by {who}")
        rep.data["witness"] = [list(res.first), list(res.second)]
        return rep
    fx = "id" if tx.num_classes == X.size else ("!" if tx.num_classes == 1 else "q_X")
    fy = "id" if ty.num_classes == Y.size else ("!" if ty.num_classes == 1 else "q_Y")
    rep.lines.append(f"q = {fx} x {fy} up to the iso {cod.name} -> X/E_X x Y/E_Y: "
                     + " ".join(str(int(v)) for v in res.iso.map))
    rep.data["iso"] = res.iso.map.tolist()
    return rep


def _describe(theta) -> str:
    n = theta.algebra.size
    if theta.num_classes == n:
        kind = "identity"
    elif theta.num_classes == 1:
        kind = "total"
    else:
        kind = f"{theta.num_classes} classes"
    return f"{kind} {theta!r}"


def cmd_verify_cert(cfg: RunConfig) -> Report:
    *algs, cert_file = _need(cfg, 2)
    V = _variety(algs, cfg.budget)
    cert = load_certificate(resolve(cert_file), V.sig)
    res = verify_certificate(cert, V)
    rep = Report(cfg, "pass" if res.passed else "fail")
    rep.lines.extend(res.text().splitlines())
    rep.data["obligations"] = {o.name: o.passed for o in res.obligations}
    return rep


def cmd_search_cert(cfg: RunConfig) -> Report:
    *algs, pack_file = _need(cfg, 2)
    V = _variety(algs, cfg.budget)
    pack = load_pack(resolve(pack_file), V.sig)
    rep = Report(cfg)
    if not check_diag(V, pack):
        rep.status = "fail"
        rep.lines.append("pack is not diagonalizing in this variety")
        return rep
    res = search_certificate(V, pack, cfg.depth, cfg.beam, cfg.budget)
    for name, msg in res.diagnostics.items():
        rep.lines.append(f"{name}: {msg}")
    rep.data["diagnostics"] = res.diagnostics
    if not res.found:
        rep.status = "fail"
        rep.lines.append(f"not found: {', '.join(res.missing)}")
        return rep
    _write(rep, format_certificate(res.certificate), "certificate")
    return rep


def cmd_free(cfg: RunConfig) -> Report:
    V = _variety(_need(cfg, 1), cfg.budget)
    F = free_algebra(V.gens, cfg.generators, budget=cfg.budget)
    rep = Report(cfg)
    rep.lines.append(f"F({cfg.generators}) has {F.size} elements")
    for i in range(F.size):
        rep.lines.append(f"{i}: {format_term(F.term(i))}")
    rep.data["size"] = F.size
    return rep


COMMANDS = {
    "check-diag": (cmd_check_diag, "check a diagonalizing pack: ALG... PACK"),
    "search-diag": (cmd_search_diag, "search for a diagonalizing pack: ALG..."),
    "decompose": (cmd_decompose, "factor q: X x Y -> Z: X Y HOM [PACK]"),
    "verify-cert": (cmd_verify_cert, "verify a chain certificate: ALG... CERT"),
    "search-cert": (cmd_search_cert, "search for a chain certificate: ALG... PACK"),
    "free": (cmd_free, "list the free algebra with witness terms: ALG..."),
}


def _need(cfg: RunConfig, n: int) -> List[str]:
    if len(cfg.inputs) < n:
        raise InputError(f"{cfg.command} needs at least {n} file arguments")
    return list(cfg.inputs)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ualg", description="Coextensivity checks for finite algebras.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_fn, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("inputs", nargs="+", help="input files (corpus names also accepted)")
        p.add_argument("--max-depth", type=int, default=3, help="term depth for search-diag")
        p.add_argument("--max-k", type=int, default=2, help="number of constant slots for search-diag")
        p.add_argument("--depth", type=int, default=6, help="search depth for search-cert")
        p.add_argument("--beam", type=int, default=64, help="states kept per layer for search-cert")
        p.add_argument("--generators", type=int, default=1, help="free generators for free")
        p.add_argument("--budget", type=int, default=DEFAULT_SCAN_BUDGET, help="element/assignment cap")
        p.add_argument("--format", choices=("text", "report"), default="text")
        p.add_argument("--seed", type=int, default=0, help="recorded in every report")
        p.add_argument("-o", "--output", help="write the found pack or certificate here")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    fmt = args.format
    started = time.perf_counter()
    try:
        cfg = RunConfig(args.command, args.inputs, args.max_depth, args.max_k, args.depth, args.beam,
                        args.generators, args.budget, fmt, args.seed, args.output)
        report = COMMANDS[args.command][0](cfg)
    except (InputError, FormatError, TermError, AlgebraError, BudgetExceeded, CertificateError,
            OSError) as exc:
        kind = "budget exceeded" if isinstance(exc, BudgetExceeded) else "error"
        if fmt == "report":
            print(json.dumps({"command": args.command, "status": "error", "seed": args.seed,
                              "error": f"{kind}: {exc}"}, indent=2))
        else:
            print(f"{kind}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report.data["seconds"] = round(time.perf_counter() - started, 4)
    report.emit(sys.stdout)
    return report.exit_code()


if __name__ == "__main__":
    sys.exit(main())
