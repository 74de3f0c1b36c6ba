import itertools

import pytest
from hypothesis import given, settings, strategies as st

from bvterm.bitvec import BitVec
from bvterm.solver import (
    And, Atom, CapacityError, Exists, Forall, Iff, Implies, Not, Or, UnsupportedSort,
    constant_value, enumeration_cap, eval_formula, eval_term, find_model, free_vars,
    is_satisfiable, is_valid, substitute,
)
from bvterm.term import BOOL, FALSE, TRUE, Var, bv_sort, lit, named_sort, op

BV4 = bv_sort(4)
x, i, y = (Var(n, BV4) for n in "xiy")


def v4(d):
    return BitVec.from_bits(d)


def test_eval_term_examples():
    assert eval_term(op("bvadd", lit("0000"), lit("0001")), {}) == v4("0001")
    assert eval_term(op("bvslt", i, x), {i: v4("0010"), x: v4("0010")}) is False
    assert eval_term(x, {x: v4("1111")}) == v4("1111")


def test_eval_formula_examples():
    assert eval_formula(Forall((i,), Atom(op("bvslt", i, x))), {x: v4("0111")}) is False
    # i = 1000 is -8, below 0
    assert eval_formula(Exists((i,), Atom(op("bvslt", i, x))), {x: v4("0000")}) is True
    assert eval_formula(Atom(TRUE), {}) is True


def test_eval_needs_total_assignment():
    with pytest.raises(Exception):
        eval_term(op("bvadd", x, i), {x: v4("0000")})


def test_satisfiability_examples():
    assert is_satisfiable(Atom(op("bvslt", i, x)))
    assert not is_satisfiable(Forall((i,), Atom(op("bvslt", i, x))))
    assert is_valid(Atom(op("=", op("bvsub", op("bvadd", i, lit("0001")), i), lit("0001"))))
    assert not is_valid(Atom(op("bvslt", i, op("bvadd", i, lit("0001")))))
    assert not is_satisfiable(Atom(op("bvult", x, x)))


def test_constant_value_examples():
    assert constant_value(op("bvsub", op("bvadd", i, lit("0001")), i), [i]) == v4("0001")
    assert constant_value(op("bvsub", i, i), [i]) == v4("0000")
    assert constant_value(op("bvadd", i, x), [i, x]) is None
    # variables of the term are always included
    assert constant_value(op("bvadd", i, x)) is None


def test_find_model_is_first_in_counting_order():
    m = find_model(Atom(op("bvslt", i, x)), order=[i, x])
    # i is the fast digit: at x = 0000 the first i below it is 1000 (-8)
    assert m == {i: v4("1000"), x: v4("0000")}
    assert find_model(Atom(FALSE)) is None
    assert find_model(Atom(TRUE)) == {}


def test_model_satisfies_formula():
    f = And((Atom(op("bvult", x, y)), Atom(op("=", op("bvadd", x, y), lit("0101")))))
    m = find_model(f)
    assert eval_formula(f, m)


def test_capacity_is_an_error_not_an_answer():
    vs = [Var(f"w{k}", bv_sort(8)) for k in range(4)]
    f = Atom(op("=", op("bvadd", op("bvadd", vs[0], vs[1]), op("bvadd", vs[2], vs[3])), vs[0]))
    with pytest.raises(CapacityError) as exc:
        is_satisfiable(f)
    assert exc.value.required == 2 ** 32
    with enumeration_cap(16):
        with pytest.raises(CapacityError):
            is_satisfiable(Atom(op("bvult", x, y)))
    assert is_satisfiable(Atom(op("bvult", x, y)))


def test_named_sorts_are_not_enumerable():
    n = Var("n", named_sort("List"))
    with pytest.raises(UnsupportedSort):
        is_satisfiable(Exists((n,), Atom(TRUE)))


def test_wide_arithmetic_uses_exact_integers():
    w = Var("w", bv_sort(70))
    big = (1 << 70) - 1
    t = op("bvsub", op("bvadd", w, lit("1" * 70)), w)
    assert eval_term(t, {w: BitVec(70, 5)}) == BitVec(70, big)
    # a single 70-bit variable is over the cap
    with pytest.raises(CapacityError):
        is_valid(Atom(op("=", t, lit("1" * 70))))
    assert is_valid(Atom(op("bvule", lit("0" * 70), lit("1" * 70))))


def test_substitution_avoids_capture():
    f = Exists((i,), Atom(op("bvslt", i, x)))
    g = substitute(f, {x: i})
    assert i in free_vars(g)
    assert eval_formula(g, {i: v4("0000")}) is True
    assert substitute(f, {i: lit("0000")}) == f  # bound occurrences are untouched


def test_determinism():
    f = Or((Atom(op("bvslt", i, x)), Atom(op("=", y, lit("0011")))))
    assert all(find_model(f) == find_model(f) for _ in range(3))


# --- property tests at width 2 -------------------------------------------------

W2 = bv_sort(2)
a, b, c = (Var(n, W2) for n in "abc")
bvars = [a, b, c]
consts = [lit(format(k, "02b")) for k in range(4)]
CMPS = ["=", "bvult", "bvule", "bvslt", "bvsle", "bvsge", "bvugt"]

bv_terms = st.recursive(
    st.sampled_from(bvars + consts),
    lambda kids: st.tuples(st.sampled_from(["bvadd", "bvsub"]), kids, kids).map(lambda p: op(*p)),
    max_leaves=4,
)
atoms = st.tuples(st.sampled_from(CMPS), bv_terms, bv_terms).map(lambda p: Atom(op(*p)))
formulas = st.recursive(
    atoms,
    lambda kids: st.one_of(
        kids.map(Not),
        st.tuples(kids, kids).map(And),
        st.tuples(kids, kids).map(Or),
        st.tuples(kids, kids).map(lambda p: Implies(*p)),
        st.tuples(kids, kids).map(lambda p: Iff(*p)),
        st.tuples(st.sampled_from(bvars), kids).map(lambda p: Forall((p[0],), p[1])),
        st.tuples(st.sampled_from(bvars), kids).map(lambda p: Exists((p[0],), p[1])),
    ),
    max_leaves=6,
)


def assignments(vs):
    doms = [[BitVec(v.sort.width, k) for k in range(1 << v.sort.width)] if v.sort != BOOL
            else [False, True] for v in vs]
    for point in itertools.product(*doms):
        yield dict(zip(vs, point))


@settings(max_examples=150, deadline=None)
@given(formulas)
def test_vectorised_route_matches_scalar_enumeration(f):
    free = free_vars(f)
    scalar = [eval_formula(f, alpha) for alpha in assignments(free)]
    assert is_satisfiable(f) == any(scalar)
    assert is_valid(f) == all(scalar)
    m = find_model(f)
    assert (m is None) == (not any(scalar))
    if m is not None:
        assert eval_formula(f, m)


@settings(max_examples=100, deadline=None)
@given(formulas)
def test_validity_satisfiability_duality(f):
    assert is_valid(f) == (not is_satisfiable(Not(f)))


@settings(max_examples=100, deadline=None)
@given(formulas, st.sampled_from(bvars))
def test_quantifiers_are_loops(f, v):
    rest = [w for w in free_vars(f) if w != v]
    for alpha in assignments(rest):
        inner = [eval_formula(f, {**alpha, v: BitVec(2, k)}) for k in range(4)]
        assert eval_formula(Forall((v,), f), alpha) == all(inner)
        assert eval_formula(Exists((v,), f), alpha) == any(inner)


@settings(max_examples=100, deadline=None)
@given(bv_terms)
def test_constant_value_matches_enumeration(t):
    vals = {eval_term(t, alpha) for alpha in assignments(bvars)}
    got = constant_value(t, bvars)
    assert (got is None) == (len(vals) > 1)
    if got is not None:
        assert vals == {got}
