import pytest
from hypothesis import given, settings, strategies as st

from coext.corpus import RING_SIG
from coext.terms import (Op, Pair, Signature, TermError, Var, const, enumerate_terms, format_term,
                         match, parse_term, positions, replace_at, substitute)

X, Y = Var("x"), Var("y")
ONE, ZERO = const("one"), const("zero")


def test_parse_nested():
    t = parse_term("add(mul(x,one),zero)", RING_SIG)
    assert t == Op("add", [Op("mul", [X, ONE]), ZERO])


def test_parse_paired_constant():
    t = parse_term("mul(x,(one|zero))", RING_SIG)
    assert t.args[1] == Pair(ONE, ZERO)
    assert t.pairs() == [Pair(ONE, ZERO)]


def test_parse_whitespace_and_nested_pair():
    t = parse_term(" add ( x , ( add(one,one) | zero ) ) ", RING_SIG)
    assert t.args[1] == Pair(Op("add", [ONE, ONE]), ZERO)


@pytest.mark.parametrize("text", ["add(x)", "add(x,y,x)", "zero(x)", "(x|one)", "mul(x,", "add(x,y))", ""])
def test_parse_errors(text):
    with pytest.raises(TermError):
        parse_term(text, RING_SIG)


def test_signature_validation():
    with pytest.raises(TermError):
        Signature([("f", 1), ("f", 2)])
    with pytest.raises(TermError):
        Signature([("f", -1)])


def test_ground_and_constant():
    assert parse_term("add(one,(one|zero))", RING_SIG).is_ground()
    assert not parse_term("add(one,(one|zero))", RING_SIG).is_constant()
    assert not parse_term("add(x,one)", RING_SIG).is_ground()


def test_substitute_simple_and_strict():
    a0, a1 = Var("a0"), Var("a1")
    assert substitute(Op("add", [a0, a1]), {a0: X, a1: Y}) == Op("add", [X, Y])
    assert substitute(Op("add", [a0, a1]), {a0: X}) == Op("add", [X, a1])
    with pytest.raises(TermError):
        substitute(Op("add", [a0, a1]), {a0: X}, strict=True)


def test_substitute_ring_idempotence_context():
    u0 = parse_term("add(mul(a0,a1),mul(a0,a2))", RING_SIG)
    alpha = [X, Pair(ONE, ZERO), Pair(ZERO, ONE), ONE]
    env = {Var(f"a{i}"): v for i, v in enumerate(alpha)}
    assert format_term(substitute(u0, env)) == "add(mul(x,(one|zero)),mul(x,(zero|one)))"


def test_substitute_is_simultaneous():
    assert substitute(Op("add", [X, Y]), {X: Y, Y: X}) == Op("add", [Y, X])


def test_enumerate_leaves_only():
    assert list(enumerate_terms(RING_SIG, [X], 0)) == [X, ZERO, ONE]


def test_enumerate_constants_depth_one():
    terms = list(enumerate_terms(RING_SIG, [], 1))
    assert Op("add", [ZERO, ONE]) in terms


def test_enumerate_count_matches_brute_force():
    terms = list(enumerate_terms(RING_SIG, [X, Y], 1))
    leaves = [X, Y, ZERO, ONE]
    brute = set(leaves) | {Op(s, [a, b]) for s in ("add", "mul") for a in leaves for b in leaves}
    assert len(terms) == 36 == len(brute)
    assert set(terms) == brute


def test_enumerate_monotone_and_depth_major():
    d1 = list(enumerate_terms(RING_SIG, [X], 1))
    d2 = list(enumerate_terms(RING_SIG, [X], 2))
    assert d2[:len(d1)] == d1
    assert len(set(d2)) == len(d2)
    depths = [t.depth() for t in d2]
    assert depths == sorted(depths)


def test_match_and_positions():
    pat = parse_term("add(mul(x,(one|zero)),mul(y,(zero|one)))", RING_SIG)
    t = parse_term("add(mul(add(one,one),(one|zero)),mul(zero,(zero|one)))", RING_SIG)
    b = match(pat, t, ("x", "y"))
    assert b == {"x": Op("add", [ONE, ONE]), "y": ZERO}
    assert match(pat, parse_term("add(mul(x,(zero|one)),mul(y,(zero|one)))", RING_SIG), ("x", "y")) is None
    paths = dict(positions(t))
    assert paths[(0, 1)] == Pair(ONE, ZERO)
    assert replace_at(t, (1, 0), X).args[1].args[0] == X


# --- round trip ------------------------------------------------------------

def _terms(depth: int):
    ground = st.sampled_from([ZERO, ONE])
    leaf = st.one_of(st.sampled_from([X, Y, Var("a10"), Var("_s")]), ground,
                     st.builds(Pair, ground, ground))
    return st.recursive(leaf, lambda kids: st.builds(lambda s, a, b: Op(s, [a, b]),
                                                     st.sampled_from(["add", "mul"]), kids, kids),
                        max_leaves=12)


@settings(max_examples=200, deadline=None)
@given(_terms(3))
def test_parse_print_round_trip(t):
    assert parse_term(format_term(t), RING_SIG) == t
