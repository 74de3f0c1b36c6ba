"""Builders and random generators shared by the test modules."""
import random

from bvterm.bitvec import BitVec
from bvterm.dp import DependencyPair, DPProblem
from bvterm.lctrs import LCTRS, ConstrainedRule
from bvterm.parser import parse
from bvterm.term import App, Symbol, Var, bv_sort, mark, op, value_term

COMPARISONS = ["=", "bvult", "bvule", "bvugt", "bvuge", "bvslt", "bvsle", "bvsgt", "bvsge"]


def bv(digits: str):
    return value_term(BitVec.parse("#b" + digits))


def self_loop(xs, ts, guard, name="u"):
    """The one-pair problem ``name#(xs) -> name#(ts) [guard]``."""
    f = Symbol(name, tuple(x.sort for x in xs), xs[0].sort)
    system = LCTRS({name: f}, [])
    rule = ConstrainedRule(mark(App(f, tuple(xs))), mark(App(f, tuple(ts))), guard)
    return DPProblem((DependencyPair(1, rule),), system)


def loop_from_source(src: str):
    """Parse a one-symbol system and return its pairs as a problem."""
    from bvterm.dp import dependency_pairs
    return dependency_pairs(parse(src))


def random_guard(rng: random.Random, xs, width, depth=2):
    def atom():
        a = rng.choice(xs)
        b = rng.choice(xs + [None])
        if b is None or b == a:
            b = value_term(BitVec(width, rng.randrange(1 << width)))
        if rng.random() < 0.3:
            a = op("bvadd", a, value_term(BitVec(width, rng.randrange(1 << width))))
        return op(rng.choice(COMPARISONS), a, b)

    def build(d):
        r = rng.random()
        if d == 0 or r < 0.5:
            return atom()
        if r < 0.65:
            return op("not", build(d - 1))
        return op(rng.choice(["and", "or"]), build(d - 1), build(d - 1))

    return build(depth)


def random_self_loop(rng: random.Random, widths=(2, 4), max_arity=3, cross=True):
    """A random problem ``f#(x1..xn) -> f#(t1..tn) [phi]`` with ``t_j = x_k + c``."""
    w = rng.randint(*widths)
    n = rng.randint(1, max_arity)
    xs = [Var(f"x{k}", bv_sort(w)) for k in range(1, n + 1)]
    guard = random_guard(rng, xs, w)
    ts = []
    for k in range(n):
        src = rng.choice(xs) if cross and rng.random() < 0.4 else xs[k]
        c = rng.randrange(1 << w) if rng.random() < 0.8 else 0
        ts.append(op("bvadd", src, value_term(BitVec(w, c))) if c else src)
    return self_loop(xs, ts, guard, name="f")
