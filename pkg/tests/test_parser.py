import pytest
from hypothesis import given, settings, strategies as st

from bvterm.lctrs import LCTRS, ConstrainedRule
from bvterm.parser import ParseError, format_lctrs, parse, parse_term, unparse
from bvterm.term import App, Symbol, Var, bv_sort, lit, op

from conftest import FIXTURES

CORPUS = sorted(FIXTURES.glob("*.lctrs"))


def test_corpus_is_large_enough():
    assert len(CORPUS) >= 20


def test_r1_fixture(r1):
    assert len(r1.rules) == 3
    assert {s.name for s in r1.defined_symbols} == {"cnt", "u1"}
    assert (FIXTURES / "cnt.lctrs").read_text() == (
        "(fun cnt ((bv 4)) (bv 4))\n"
        "(fun u1 ((bv 4) (bv 4) (bv 4)) (bv 4))\n"
        "(rule (cnt x) (u1 x #b0000 #b0000))\n"
        "(rule (u1 x i z) (u1 x (bvadd i #b0001) (bvadd z #b0001)) :guard (bvslt i x))\n"
        "(rule (u1 x i z) z :guard (bvsge i x))\n"
    )


def test_small_examples():
    system = parse("(fun f ((bv 4)) (bv 4)) (rule (f x) x)")
    assert len(system.rules) == 1
    with pytest.raises(ParseError) as exc:
        parse("(rule (f x) y)")
    assert exc.value.code == "unknown-symbol" and "f" in exc.value.message


def test_print_examples(r1):
    assert unparse(lit("0001")) == "#b0001"
    assert unparse(r1.rules[1]) == (
        "(rule (u1 x i z) (u1 x (bvadd i #b0001) (bvadd z #b0001)) :guard (bvslt i x))")
    assert parse(unparse(r1)) == r1


@pytest.mark.parametrize("src, code, line, col", [
    ("(fun f ((bv 4)) (bv 4)) (rule (f x) (f x x))", "arity-mismatch", 1, 37),
    ("(fun f ((bv 4)) (bv 4))\n(rule (f x) (bvadd x #b01))", "width-mismatch", 2, 22),
    ("(fun f ((bv 4)) bool) (rule (f x) x)", "sort-mismatch", 1, 35),
    ("(fun f ((bv 4)) (bv 4)) (fun f ((bv 4)) (bv 4))", "duplicate-declaration", 1, 30),
    ("(fun bvadd ((bv 4)) (bv 4))", "reserved-name", 1, 6),
    ("(fun f ((bv 4)) (bv 4)) (rule (bvadd x x) x)", "bad-rule", 1, 32),
    ("(fun f ((bv 4)) (bv 4)) (rule (f x) x", "syntax", 1, 25),
    ("(fun f ((bv 4)) (bv 4))\n  (rule (f x) (g x))", "unknown-symbol", 2, 16),
    ("(fun f ((bv 4)) (bv 4)) (rule (f x) x :guard x)", "sort-mismatch", 1, 46),
])
def test_error_codes_and_locations(src, code, line, col):
    with pytest.raises(ParseError) as exc:
        parse(src)
    assert (exc.value.code, exc.value.line, exc.value.col) == (code, line, col)
    assert f"{line}:{col}" in str(exc.value)


def test_guard_sorts_are_inferred_from_lhs():
    system = parse("(fun f ((bv 3) (bv 3)) (bv 3)) (rule (f x y) y :guard (bvult x y))")
    assert system.rules[0].guard == op("bvult", Var("x", bv_sort(3)), Var("y", bv_sort(3)))


def test_smtlib_sorts_and_names():
    system = parse("(fun f ((_ BitVec 2)) (_ BitVec 2)) (rule (f x) x :name id)")
    assert system.rule_names == ["id"]
    assert "(rule (f x) x :name id)" in format_lctrs(system)


def test_parse_term(r1):
    term = parse_term("(u1 #b0010 (bvadd #b0000 #b0001) z)", r1)
    assert term.args[2] == Var("z", bv_sort(4))


@pytest.mark.parametrize("path", CORPUS, ids=lambda p: p.stem)
def test_round_trip_corpus(path):
    system = parse(path.read_text())
    again = parse(format_lctrs(system))
    assert again == system
    assert format_lctrs(again) == format_lctrs(system)


# random systems over a fixed signature
BV3 = bv_sort(3)
F = Symbol("f", (BV3, BV3), BV3)
G = Symbol("g", (BV3,), BV3)
xs = [Var(n, BV3) for n in "xyz"]
leaves = st.sampled_from(xs + [lit("000"), lit("101"), lit("111")])
bv_terms = st.recursive(leaves, lambda k: st.one_of(
    st.tuples(st.sampled_from(["bvadd", "bvsub"]), k, k).map(lambda p: op(*p)),
    st.tuples(k).map(lambda p: App(G, p)),
    st.tuples(k, k).map(lambda p: App(F, p)),
), max_leaves=6)
theory_terms = st.recursive(leaves, lambda k: st.tuples(st.sampled_from(["bvadd", "bvsub"]), k, k)
                            .map(lambda p: op(*p)), max_leaves=4)
atoms = st.tuples(st.sampled_from(["bvult", "bvsle", "="]), theory_terms, theory_terms).map(lambda p: op(*p))
guards = st.recursive(atoms, lambda k: st.one_of(
    st.tuples(k).map(lambda p: op("not", *p)),
    st.tuples(st.sampled_from(["and", "or", "=>"]), k, k).map(lambda p: op(*p)),
), max_leaves=3)


@st.composite
def rules(draw):
    lhs = draw(st.sampled_from([App(F, (xs[0], xs[1])), App(G, (xs[0],)), App(F, (xs[0], lit("001")))]))
    return ConstrainedRule(lhs, draw(bv_terms), draw(guards))


@settings(max_examples=60, deadline=None)
@given(st.lists(rules(), max_size=4))
def test_round_trip_random_systems(rs):
    system = LCTRS({"f": F, "g": G}, rs)
    assert parse(format_lctrs(system)) == system
    for rule in rs:
        env = {v.name: v for v in rule.variables()}
        assert parse_term(unparse(rule.rhs), system, rule.rhs.sort, env) == rule.rhs


def test_vars_annotation_fixes_uninferable_sorts():
    src = "(fun f ((bv 3)) (bv 3)) (rule (f x) x :guard (bvult z z) :vars ((z (bv 3))))"
    system = parse(src)
    assert system.rules[0].guard == op("bvult", Var("z", BV3), Var("z", BV3))
    assert parse(format_lctrs(system)) == system
    with pytest.raises(ParseError) as exc:
        parse("(fun f ((bv 3)) (bv 3)) (rule (f x) x :guard (bvult z z))")
    assert exc.value.code == "sort-mismatch"
    with pytest.raises(ParseError) as exc:
        parse("(fun f ((bv 3)) (bv 3)) (rule (f x) x :vars ((x (bv 2))))")
    assert exc.value.code == "sort-mismatch"
