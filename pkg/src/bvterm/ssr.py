"""Singleton self-loop removal.

A DP problem ``{f#(x1..xn) -> f#(t1..tn) [phi]}`` whose pair can follow
itself is solved when some bit-vector argument ``i`` acts as a loop counter
that moves by a fixed non-zero step while nothing else influences ``phi``,
and the counter is bound to reach a region where ``phi`` is false.  The
region is either implicit (odd step: ``forall x_i. phi`` must be
unsatisfiable) or given by a pair of terms ``u, v`` bounding an interval
``[u, v)`` that the pair never changes.

Every solver call here may run out of enumeration budget; that is always
read as "condition not established", never as a verdict.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import Union

from .bitvec import BitVec, trailing_zeros
from .dp import DependencyPair, DPProblem, dg_approximation
from .lctrs import ConstrainedRule
from .solver import (
    And, Atom, CapacityError, Exists, Forall, Iff, Implies, Or, UnsupportedSort,
    constant_value, is_satisfiable, is_valid, substitute,
)
from .term import (
    App, Symbol, Term, Var, apply, is_theory_term, op, value_term, variables,
)

__all__ = [
    "Rejection", "SingletonSelfLoop", "IncrementInfo", "IntervalWitness", "SSRProof",
    "analyze_self_loop", "as_singleton_self_loop", "preserves_constraint",
    "increment_analysis", "check_theorem3", "check_theorem2",
    "witness_templates", "search_interval_witness", "find_ssr_proof", "proc_ssr",
    "DEFAULT_WIDTH_CAP",
]

log = logging.getLogger(__name__)

DEFAULT_WIDTH_CAP = 8
_UNKNOWN = (CapacityError, UnsupportedSort)


class Rejection(enum.Enum):
    NOT_SINGLETON = "not-singleton"
    ROOT_MISMATCH = "root-mismatch"
    LHS_NOT_DISTINCT_VARS = "lhs-not-distinct-vars"
    GUARD_UNSAT = "guard-unsat"
    NO_SELF_EDGE = "no-self-edge"
    SOLVER_UNKNOWN = "solver-unknown"


@dataclass(frozen=True)
class SingletonSelfLoop:
    pair: DependencyPair
    symbol: Symbol
    lhs_vars: tuple[Var, ...]
    rhs_args: tuple[Term, ...]
    guard: Term

    @property
    def arity(self) -> int:
        return len(self.lhs_vars)

    @property
    def bv_positions(self) -> list[int]:
        """1-based argument positions of bit-vector sort."""
        return [k for k, s in enumerate(self.symbol.arg_sorts, 1) if s.is_bv]

    def var(self, i: int) -> Var:
        return self.lhs_vars[i - 1]

    def arg(self, i: int) -> Term:
        return self.rhs_args[i - 1]

    def width(self, i: int) -> int:
        return self.symbol.arg_sorts[i - 1].width


@dataclass(frozen=True)
class IncrementInfo:
    position: int
    delta: BitVec
    a: int  # trailing zeros of delta
    c: str  # the l-a-1 digits above the lowest one

    @property
    def min_gap(self) -> BitVec:
        """``0^(l-a-1) 1 0^a``, the least interval length that cannot be skipped."""
        return BitVec(self.delta.width, 1 << self.a)


@dataclass(frozen=True)
class IntervalWitness:
    u: Term
    v: Term

    def __str__(self):
        return f"u = {self.u}, v = {self.v}"


@dataclass(frozen=True)
class SSRProof:
    theorem: int  # 2 or 3
    position: int
    increment: IncrementInfo
    witness: IntervalWitness | None = None


# --- recognising the problem shape ------------------------------------------------------

def analyze_self_loop(problem: DPProblem) -> tuple[SingletonSelfLoop | None, Rejection | None]:
    """The singleton self-loop view of ``problem``, or the reason there is none."""
    if len(problem.pairs) != 1:
        return None, Rejection.NOT_SINGLETON
    pair = problem.pairs[0]
    lhs, rhs = pair.lhs, pair.rhs
    if not isinstance(rhs, App) or lhs.symbol != rhs.symbol:
        return None, Rejection.ROOT_MISMATCH
    xs = lhs.args
    if not all(isinstance(x, Var) for x in xs) or len(set(xs)) != len(xs):
        return None, Rejection.LHS_NOT_DISTINCT_VARS
    try:
        if not is_satisfiable(pair.guard):
            return None, Rejection.GUARD_UNSAT
    except _UNKNOWN as exc:
        log.debug("guard satisfiability unknown: %s", exc)
        return None, Rejection.SOLVER_UNKNOWN
    if (pair.id, pair.id) not in dg_approximation(problem).edges:
        return None, Rejection.NO_SELF_EDGE
    return SingletonSelfLoop(pair, lhs.symbol, tuple(xs), tuple(rhs.args), pair.guard), None


def as_singleton_self_loop(problem: DPProblem) -> SingletonSelfLoop | None:
    return analyze_self_loop(problem)[0]


# --- side conditions -------------------------------------------------------------------

RuleLike = Union[ConstrainedRule, DependencyPair, SingletonSelfLoop]


def _shape(rule: RuleLike) -> tuple[tuple[Var, ...], tuple[Term, ...], Term]:
    if isinstance(rule, SingletonSelfLoop):
        return rule.lhs_vars, rule.rhs_args, rule.guard
    if isinstance(rule, DependencyPair):
        rule = rule.rule
    xs, ts = rule.lhs.args, rule.rhs.args
    if not all(isinstance(x, Var) for x in xs) or len(set(xs)) != len(xs) or len(xs) != len(ts):
        raise ValueError(f"{rule} is not of the form f#(x1..xn) -> f#(t1..tn) [phi]")
    return tuple(xs), tuple(ts), rule.guard


def preserves_constraint(rule: RuleLike, indices) -> bool:
    """Whether only the arguments outside ``indices`` can change the truth of the
    guard when the pair is applied.  ``indices`` are 1-based positions.
    """
    xs, ts, phi = _shape(rule)
    indices = set(indices)
    phi_vars = variables(phi)
    # every argument outside the index set must be constrained
    if any(xs[k - 1] not in phi_vars for k in range(1, len(xs) + 1) if k not in indices):
        return False
    # constrained arguments must be rewritten to theory terms
    if any(x in phi_vars and not is_theory_term(t) for x, t in zip(xs, ts)):
        return False
    ys = tuple(v for v in phi_vars if v not in xs)
    closed = Exists(ys, Atom(phi)) if ys else Atom(phi)
    theta = {xs[k - 1]: ts[k - 1] for k in sorted(indices) if xs[k - 1] in phi_vars}
    try:
        return is_valid(Iff(closed, substitute(closed, theta)))
    except _UNKNOWN as exc:
        log.debug("constraint preservation unknown: %s", exc)
        return False


def _others(view: SingletonSelfLoop, i: int) -> list[int]:
    return [k for k in range(1, view.arity + 1) if k != i]


def increment_analysis(view: SingletonSelfLoop, i: int) -> IncrementInfo | None:
    """The constant non-zero step of argument ``i``, if it has one."""
    x, t = view.var(i), view.arg(i)
    if not x.sort.is_bv or not is_theory_term(t):
        return None
    try:
        delta = constant_value(op("bvsub", t, x), [x] + variables(t))
    except _UNKNOWN as exc:
        log.debug("increment of argument %d unknown: %s", i, exc)
        return None
    if delta is None or delta.value == 0:
        return None
    a = trailing_zeros(delta)
    return IncrementInfo(i, delta, a, delta.bits[: delta.width - a - 1])


def check_theorem3(view: SingletonSelfLoop, i: int) -> bool:
    """Odd step at argument ``i``, nothing else affects the guard, and no
    fixed choice of the other variables keeps the guard true for every ``x_i``.
    """
    if i not in view.bv_positions:
        return False
    if not preserves_constraint(view, _others(view, i)):
        return False
    info = increment_analysis(view, i)
    if info is None or info.a != 0:
        return False
    try:
        return not is_satisfiable(Forall((view.var(i),), Atom(view.guard)))
    except _UNKNOWN as exc:
        log.debug("odd-step check at %d unknown: %s", i, exc)
        return False


def _full_theta(view: SingletonSelfLoop, needed) -> dict[Var, Term] | None:
    theta = {}
    for x, t in zip(view.lhs_vars, view.rhs_args):
        if x in needed:
            if not is_theory_term(t):
                return None
            theta[x] = t
    return theta


def _interval_formulas(view: SingletonSelfLoop, i: int, info: IncrementInfo, w: IntervalWitness):
    """The invariance (a) and separation (b) conditions on ``w``, or ``None``
    when ``w`` mentions something the pair rewrites to a non-theory term."""
    u, v = w.u, w.v
    theta = _full_theta(view, set(variables(u)) | set(variables(v)))
    if theta is None:
        return None
    phi = Atom(view.guard)
    xi = view.var(i)
    gap = value_term(info.min_gap)
    invariance = Implies(phi, And((
        Atom(op("=", u, apply(theta, u))),
        Atom(op("=", v, apply(theta, v))),
        Atom(op("bvuge", op("bvsub", v, u), gap)),
    )))
    outside = Forall((xi,), Implies(phi, And((
        Or((Atom(op("bvult", xi, u)), Atom(op("bvule", v, xi)))),
        Atom(op("bvult", u, v)),
    ))))
    wrapped = Forall((xi,), Implies(phi, And((
        Atom(op("bvule", v, xi)),
        Atom(op("bvult", xi, u)),
    ))))
    return invariance, Or((outside, wrapped))


def _witness_ok(view, i, info, w) -> bool:
    sort = view.var(i).sort
    if w.u.sort != sort or w.v.sort != sort:
        return False
    allowed = set(variables(view.guard))
    if not (set(variables(w.u)) | set(variables(w.v))) <= allowed:
        return False
    if not (is_theory_term(w.u) and is_theory_term(w.v)):
        return False
    formulas = _interval_formulas(view, i, info, w)
    if formulas is None:
        return False
    try:
        return all(is_valid(f) for f in formulas)
    except _UNKNOWN as exc:
        log.debug("interval witness check unknown: %s", exc)
        return False


def check_theorem2(view: SingletonSelfLoop, i: int, witness: IntervalWitness) -> bool:
    """All side conditions of the interval criterion for argument ``i`` and
    the given ``u, v``."""
    if i not in view.bv_positions:
        return False
    if not preserves_constraint(view, _others(view, i)):
        return False
    info = increment_analysis(view, i)
    if info is None:
        return False
    return _witness_ok(view, i, info, witness)


def witness_templates(view: SingletonSelfLoop, i: int) -> list[Term]:
    """Candidate bounds ``y``, ``y + k`` and ``k`` in search order.

    ``y`` ranges over the guard's variables of the counter's sort (argument
    variables first, by position), ``k`` over all constants ascending.
    """
    sort = view.var(i).sort
    width = sort.width
    guard_vars = variables(view.guard)
    ordered = [x for x in view.lhs_vars if x in guard_vars]
    ordered += [y for y in guard_vars if y not in ordered]
    ys = [y for y in ordered if y.sort == sort]
    consts = [value_term(BitVec(width, k)) for k in range(1 << width)]
    return ys + [op("bvadd", y, k) for y in ys for k in consts[1:]] + consts


def search_interval_witness(view: SingletonSelfLoop, i: int, info: IncrementInfo | None = None,
                            width_cap: int = DEFAULT_WIDTH_CAP) -> IntervalWitness | None:
    """First template pair ``(u, v)`` satisfying the interval conditions.

    Bounds that the pair can move are discarded up front: the invariance
    condition is a conjunction under ``phi``, so ``u`` and ``v`` must each be
    invariant on their own.
    """
    if info is None:
        info = increment_analysis(view, i)
        if info is None:
            return None
    if view.width(i) > width_cap:
        log.debug("argument %d is %d bits wide, over the template cap %d", i, view.width(i), width_cap)
        return None
    phi = Atom(view.guard)
    stable = []
    for t in witness_templates(view, i):
        theta = _full_theta(view, set(variables(t)))
        if theta is None:
            continue
        try:
            if is_valid(Implies(phi, Atom(op("=", t, apply(theta, t))))):
                stable.append(t)
        except _UNKNOWN:
            continue
    for u in stable:
        for v in stable:
            w = IntervalWitness(u, v)
            if _witness_ok(view, i, info, w):
                return w
    return None


# --- the processor ------------------------------------------------------------------

def find_ssr_proof(problem: DPProblem, width_cap: int = DEFAULT_WIDTH_CAP) -> SSRProof | None:
    """Try each bit-vector argument in turn; the odd-step criterion first."""
    view = as_singleton_self_loop(problem)
    if view is None:
        return None
    for i in view.bv_positions:
        if not preserves_constraint(view, _others(view, i)):
            continue
        info = increment_analysis(view, i)
        if info is None:
            continue
        if check_theorem3(view, i):
            return SSRProof(3, i, info)
        witness = search_interval_witness(view, i, info, width_cap)
        if witness is not None:
            return SSRProof(2, i, info, witness)
    return None


def proc_ssr(problem: DPProblem, width_cap: int = DEFAULT_WIDTH_CAP) -> list[DPProblem] | None:
    """``[empty problem]`` when the problem is removed, ``None`` when inapplicable."""
    if find_ssr_proof(problem, width_cap) is None:
        return None
    return [DPProblem((), problem.system)]
