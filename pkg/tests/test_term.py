import pytest
from hypothesis import given, strategies as st

from bvterm.term import (
    BOOL, DPSORT, App, NotMarkable, SortError, Symbol, SymbolKind, Var, apply, bv_sort,
    compose, is_theory_term, lit, mark, op, replace_at, subterm_at, subterms, variables,
)

BV4 = bv_sort(4)
x, i, z, y = (Var(n, BV4) for n in "xizy")
cnt = Symbol("cnt", (BV4,), BV4)
u1 = Symbol("u1", (BV4,) * 3, BV4)


def test_subterms_examples():
    t = App(u1, (x, op("bvadd", i, lit("0001")), z))
    subs = subterms(t)
    assert [s for _, s in subs] == [t, x, op("bvadd", i, lit("0001")), i, lit("0001"), z]
    assert [p for p, _ in subs] == [(), (1,), (2,), (2, 1), (2, 2), (3,)]
    assert subterms(x) == [((), x)]
    assert subterms(App(cnt, (lit("0010"),))) == [((), App(cnt, (lit("0010"),))), ((1,), lit("0010"))]


def test_positions_address_subterms():
    t = App(u1, (x, op("bvadd", i, lit("0001")), z))
    for pos, s in subterms(t):
        assert subterm_at(t, pos) == s
        assert replace_at(t, pos, s) == t


def test_apply_examples():
    guard = op("bvslt", i, x)
    sigma = {i: lit("0000"), x: lit("0010"), z: lit("0000")}
    assert apply(sigma, guard) == op("bvslt", lit("0000"), lit("0010"))
    assert apply({}, guard) is guard
    assert apply({x: y}, App(cnt, (x,))) == App(cnt, (y,))


def test_apply_rejects_sort_changes():
    with pytest.raises(SortError):
        apply({x: Var("b", BOOL)}, App(cnt, (x,)))


def test_mark_examples():
    m = mark(App(cnt, (x,)))
    assert m.symbol.name == "cnt#" and m.sort == DPSORT and m.args == (x,)
    assert m.symbol.kind is SymbolKind.MARKED
    assert mark(App(u1, (x, i, z))).symbol.name == "u1#"
    with pytest.raises(NotMarkable):
        mark(x)
    with pytest.raises(NotMarkable):
        mark(op("bvadd", x, i))


def test_is_theory_term_examples():
    assert is_theory_term(op("bvadd", i, lit("0001")))
    assert not is_theory_term(App(cnt, (x,)))
    assert is_theory_term(x)


def test_sort_checking():
    with pytest.raises(SortError):
        App(cnt, (Var("b", BOOL),))
    with pytest.raises(SortError):
        App(cnt, ())
    with pytest.raises(SortError):
        App(Symbol("bad", (DPSORT,), BV4), (mark(App(cnt, (x,))),))
    with pytest.raises(SortError):
        op("bvadd", x, lit("01"))
    with pytest.raises(ValueError):
        bv_sort(0)


def test_variables_in_first_occurrence_order():
    assert variables(App(u1, (z, op("bvadd", x, z), i))) == [z, x, i]


# random terms over u1/cnt/bvadd with variables x, i, z
leaves = st.sampled_from([x, i, z, lit("0001"), lit("1010")])
terms = st.recursive(
    leaves,
    lambda kids: st.one_of(
        st.tuples(kids, kids).map(lambda p: op("bvadd", *p)),
        st.tuples(kids).map(lambda p: App(cnt, p)),
        st.tuples(kids, kids, kids).map(lambda p: App(u1, p)),
    ),
    max_leaves=12,
)
substs = st.dictionaries(st.sampled_from([x, i, z]), terms, max_size=3)


@given(terms, substs, substs)
def test_composition_law(t, s1, s2):
    assert apply(s2, apply(s1, t)) == apply(compose(s1, s2), t)


@given(terms, substs)
def test_apply_keeps_sort_and_only_touches_its_domain(t, s):
    out = apply(s, t)
    assert out.sort == t.sort
    for v in variables(t):
        if v not in s:
            assert v in variables(out)


@given(terms)
def test_subterm_count_matches_size(t):
    def size(s):
        return 1 if isinstance(s, Var) else 1 + sum(size(a) for a in s.args)
    assert len(subterms(t)) == size(t)
