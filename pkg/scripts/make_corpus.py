"""Regenerate the bundled corpus under src/coext/corpus/."""
from pathlib import Path

from coext.corpus import (GROUP_SIG, LATTICE_SIG, RING_SIG, boolean_ring, chain_lattice, group_zn,
                          pointed_set, ring_certificate, semilattice2, trivial_ring, ring_zn)
from coext.diagonal import DiagPack
from coext.formats import format_algebra, format_certificate, format_pack
from coext.terms import parse_term
from coext.witness import Certificate

OUT = Path(__file__).resolve().parent.parent / "src" / "coext" / "corpus"


def write(name: str, text: str) -> None:
    (OUT / name).write_text(text)
    print("wrote", name)


def main() -> None:
    OUT.mkdir(exist_ok=True)
    for n in range(2, 13):
        write(f"z{n}.alg", format_algebra(ring_zn(n)))
    write("boolean4.alg", format_algebra(boolean_ring()))
    write("chain2.alg", format_algebra(chain_lattice(2)))
    write("group_z2.alg", format_algebra(group_zn(2)))
    write("pointed2.alg", format_algebra(pointed_set(2)))
    write("trivial.alg", format_algebra(trivial_ring()))
    write("semilattice2.alg", format_algebra(semilattice2()))

    cert = ring_certificate()
    write("crings.diag", format_pack(cert.pack))
    write("crings.cert", format_certificate(cert))
    lat = DiagPack(parse_term("join(meet(x,c1),meet(y,c2))", LATTICE_SIG),
                   [parse_term("top", LATTICE_SIG), parse_term("bot", LATTICE_SIG)],
                   [parse_term("bot", LATTICE_SIG), parse_term("top", LATTICE_SIG)])
    write("lattice.diag", format_pack(lat))
    write("abelian.diag", format_pack(DiagPack(parse_term("add(x,y)", GROUP_SIG), [], [])))
    triv = DiagPack(parse_term("x", RING_SIG), [], [])
    write("trivial.diag", format_pack(triv))
    write("trivial.cert", format_certificate(Certificate(triv, [], {s: [] for s in RING_SIG.symbols})))

    write("p1_z2z2.hom", "# first projection Z2 x Z2 -> Z2\nhom p1\ncodomain z2.alg\nmap 0 0 1 1\n")
    write("crt_z2z3.hom", "# (a, b) -> 3a + 4b mod 6, an isomorphism Z2 x Z3 -> Z6\nhom crt\ncodomain z6.alg\n"
          "map " + " ".join(str((3 * a + 4 * b) % 6) for a in range(2) for b in range(3)) + "\n")
    write("sum_z2z2.hom", "# addition Z2 x Z2 -> Z2 in abelian groups\nhom sum\ncodomain group_z2.alg\n"
          "map " + " ".join(str((a + b) % 2) for a in range(2) for b in range(2)) + "\n")


if __name__ == "__main__":
    main()
