"""Finite-algebra tools for deciding and certifying coextensivity of varieties.

A variety is given by finitely many finite generating algebras.  The package
checks and searches diagonalizing terms, factors surjections out of products,
and verifies or searches rewrite-chain certificates.
"""
from .terms import Op, Pair, Signature, Term, Var, format_term, parse_term
from .finalg import FiniteAlgebra, Variety, free_algebra, congruence_closure
from .diagonal import DiagPack, check_diag, delta_expand, search_diag
from .decompose import decompose
from .witness import Certificate, ChainStep, search_certificate, search_chain, verify_certificate, verify_step

__version__ = "0.1.0"

__all__ = [
    "Op", "Pair", "Signature", "Term", "Var", "format_term", "parse_term",
    "FiniteAlgebra", "Variety", "free_algebra", "congruence_closure",
    "DiagPack", "check_diag", "delta_expand", "search_diag", "decompose",
    "Certificate", "ChainStep", "search_certificate", "search_chain", "verify_certificate", "verify_step",
]
