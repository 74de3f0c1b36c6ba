"""Quantified bit-vector formulas decided by exhaustive enumeration.

Two evaluators live here.  :func:`eval_term` / :func:`eval_formula` walk a
term for one concrete assignment and are what rewriting and the
brute-force oracle use.  :func:`is_satisfiable` and friends instead give
every variable (free or bound) its own numpy axis holding its whole domain,
evaluate the formula once by broadcasting, and reduce quantifiers with
``all``/``any`` along the bound axes.

The total number of enumerated points is bounded by a cap
(:data:`DEFAULT_CAP`, adjustable with :func:`enumeration_cap`).  Going over
it raises :class:`CapacityError`, which callers must read as "unknown".
"""
from __future__ import annotations

import contextlib
import contextvars
import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Mapping, Union

import numpy as np

from .bitvec import BitVec, bv_add, bv_compare, bv_sub
from .term import (
    BOOL, TRUE, App, Sort, SymbolKind, Term, Var, apply, is_theory_term,
    value_term, variables,
)

__all__ = [
    "Formula", "Atom", "Not", "And", "Or", "Implies", "Iff", "Forall", "Exists",
    "as_formula", "free_vars", "substitute",
    "EvaluationError", "CapacityError", "UnsupportedSort",
    "DEFAULT_CAP", "enumeration_cap", "current_cap",
    "eval_term", "eval_formula", "domain", "domain_size",
    "is_satisfiable", "is_valid", "find_model", "constant_value", "model_terms",
]

Value = Union[bool, BitVec]

DEFAULT_CAP = 1 << 24
_cap: contextvars.ContextVar[int] = contextvars.ContextVar("bvterm_enum_cap", default=DEFAULT_CAP)


class EvaluationError(ValueError):
    pass


class UnsupportedSort(EvaluationError):
    """A variable ranges over a sort with no finite enumeration."""


class CapacityError(RuntimeError):
    """The enumeration would visit more points than the cap allows."""

    def __init__(self, required: int, cap: int):
        super().__init__(f"enumeration needs {required} assignments, cap is {cap}")
        self.required = required
        self.cap = cap


def current_cap() -> int:
    return _cap.get()


@contextlib.contextmanager
def enumeration_cap(cap: int) -> Iterator[int]:
    token = _cap.set(cap)
    try:
        yield cap
    finally:
        _cap.reset(token)


# --- formula AST -----------------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    term: Term

    def __post_init__(self):
        if self.term.sort != BOOL:
            raise TypeError(f"atom {self.term} is not boolean")


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    parts: tuple


@dataclass(frozen=True)
class Or:
    parts: tuple


@dataclass(frozen=True)
class Implies:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class Iff:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class Forall:
    vars: tuple
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    vars: tuple
    body: "Formula"


Formula = Union[Atom, Not, And, Or, Implies, Iff, Forall, Exists]
_QUANTIFIERS = (Forall, Exists)


def as_formula(x: Union[Formula, Term]) -> Formula:
    if isinstance(x, (Var, App)):
        return Atom(x)
    return x


def _children(f: Formula) -> tuple:
    if isinstance(f, (And, Or)):
        return f.parts
    if isinstance(f, (Implies, Iff)):
        return (f.lhs, f.rhs)
    if isinstance(f, (Not, Forall, Exists)):
        return (f.body,)
    return ()


def free_vars(f: Union[Formula, Term]) -> list[Var]:
    """Free variables in order of first occurrence."""
    f = as_formula(f)
    seen: dict[Var, None] = {}

    def walk(g, bound):
        if isinstance(g, Atom):
            for v in variables(g.term):
                if v not in bound:
                    seen.setdefault(v)
        elif isinstance(g, _QUANTIFIERS):
            walk(g.body, bound | set(g.vars))
        else:
            for c in _children(g):
                walk(c, bound)

    walk(f, frozenset())
    return list(seen)


def _fresh(v: Var, taken: set[str]) -> Var:
    name = v.name
    while name in taken:
        name += "'"
    return Var(name, v.sort)


def substitute(f: Union[Formula, Term], theta: Mapping[Var, Term]) -> Formula:
    """Capture-avoiding application of ``theta`` to a formula."""
    f = as_formula(f)
    if not theta:
        return f
    if isinstance(f, Atom):
        return Atom(apply(theta, f.term))
    if isinstance(f, _QUANTIFIERS):
        inner = {v: t for v, t in theta.items() if v not in f.vars}
        incoming = {w for t in inner.values() for w in variables(t)}
        taken = {v.name for v in incoming} | {v.name for v in free_vars(f.body)}
        renamed = []
        for v in f.vars:
            if v in incoming:
                w = _fresh(v, taken)
                taken.add(w.name)
                inner[v] = w
                renamed.append(w)
            else:
                renamed.append(v)
        return type(f)(tuple(renamed), substitute(f.body, inner))
    if isinstance(f, Not):
        return Not(substitute(f.body, theta))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(substitute(p, theta) for p in f.parts))
    return type(f)(substitute(f.lhs, theta), substitute(f.rhs, theta))


# --- scalar evaluation --------------------------------------------------------

def domain_size(sort: Sort) -> int:
    if sort == BOOL:
        return 2
    if sort.is_bv:
        return 1 << sort.width
    raise UnsupportedSort(f"cannot enumerate sort {sort}")


def domain(sort: Sort) -> Iterator[Value]:
    """All values of ``sort`` in ascending order (false before true)."""
    if sort == BOOL:
        yield from (False, True)
    elif sort.is_bv:
        for k in range(1 << sort.width):
            yield BitVec(sort.width, k)
    else:
        raise UnsupportedSort(f"cannot enumerate sort {sort}")


def _apply_theory(name: str, args: list) -> Value:
    if name == "bvadd":
        return bv_add(*args)
    if name == "bvsub":
        return bv_sub(*args)
    if name == "and":
        return all(args)
    if name == "or":
        return any(args)
    if name == "not":
        return not args[0]
    if name == "=>":
        return (not args[0]) or args[1]
    if name == "=":
        return args[0] == args[1]
    return bv_compare(name, *args)


def eval_term(t: Term, alpha: Mapping[Var, Value]) -> Value:
    """Value of theory term ``t`` under ``alpha``."""
    if isinstance(t, Var):
        try:
            return alpha[t]
        except KeyError:
            raise EvaluationError(f"unbound variable {t.name}") from None
    sym = t.symbol
    if sym.value is not None:
        return sym.value
    if sym.kind is not SymbolKind.THEORY:
        raise EvaluationError(f"{sym.name} is not a theory symbol")
    return _apply_theory(sym.name, [eval_term(a, alpha) for a in t.args])


def eval_formula(f: Union[Formula, Term], alpha: Mapping[Var, Value]) -> bool:
    f = as_formula(f)
    if isinstance(f, Atom):
        return bool(eval_term(f.term, alpha))
    if isinstance(f, Not):
        return not eval_formula(f.body, alpha)
    if isinstance(f, And):
        return all(eval_formula(p, alpha) for p in f.parts)
    if isinstance(f, Or):
        return any(eval_formula(p, alpha) for p in f.parts)
    if isinstance(f, Implies):
        return (not eval_formula(f.lhs, alpha)) or eval_formula(f.rhs, alpha)
    if isinstance(f, Iff):
        return eval_formula(f.lhs, alpha) == eval_formula(f.rhs, alpha)
    points = itertools.product(*(domain(v.sort) for v in f.vars))
    results = (eval_formula(f.body, {**alpha, **dict(zip(f.vars, p))}) for p in points)
    return all(results) if isinstance(f, Forall) else any(results)


# --- vectorised enumeration ---------------------------------------------------------

def _dtype(width: int):
    # a + b must not overflow before masking
    return np.uint64 if width <= 63 else object


class _Grid:
    """One numpy axis per variable occurrence (free first, then binders)."""

    def __init__(self, f: Formula, free: list[Var]):
        self.sorts: list[Sort] = [v.sort for v in free]
        self._binders(f)
        self.ndim = len(self.sorts)
        self.sizes = [domain_size(s) for s in self.sorts]
        self.points = math.prod(self.sizes)
        self._next = len(free)

    def _binders(self, f):
        if isinstance(f, _QUANTIFIERS):
            self.sorts.extend(v.sort for v in f.vars)
        for c in _children(f):
            self._binders(c)

    def check_cap(self, cap: int):
        if self.points > cap:
            raise CapacityError(self.points, cap)

    def axis_values(self, axis: int):
        sort = self.sorts[axis]
        if sort == BOOL:
            vals = np.array([False, True])
        else:
            vals = np.arange(1 << sort.width, dtype=_dtype(sort.width))
        shape = [1] * self.ndim
        shape[axis] = vals.size
        return vals.reshape(shape)

    def full(self, x):
        x = np.asarray(x)
        if x.ndim < self.ndim:
            x = x.reshape((1,) * (self.ndim - x.ndim) + x.shape)
        return x

    def term(self, t: Term, env: Mapping[Var, int]):
        if isinstance(t, Var):
            try:
                return self.axis_values(env[t])
            except KeyError:
                raise EvaluationError(f"unbound variable {t.name}") from None
        sym = t.symbol
        if sym.value is not None:
            v = sym.value
            if isinstance(v, bool):
                return np.bool_(v)
            return _dtype(v.width)(v.value) if v.width <= 63 else np.array(v.value, dtype=object)
        if sym.kind is not SymbolKind.THEORY:
            raise EvaluationError(f"{sym.name} is not a theory symbol")
        args = [self.term(a, env) for a in t.args]
        name = sym.name
        if name in ("bvadd", "bvsub"):
            w = sym.result.width
            mask = (1 << w) - 1
            if w <= 63:
                mask = np.uint64(mask)
            a, b = args
            if name == "bvsub":
                b = (mask - b) + 1  # two's-complement negation, kept non-negative
            return (a + b) & mask
        if name == "and":
            return np.logical_and.reduce(np.broadcast_arrays(*args)) if args else np.bool_(True)
        if name == "or":
            return np.logical_or.reduce(np.broadcast_arrays(*args)) if args else np.bool_(False)
        if name == "not":
            return np.logical_not(args[0])
        if name == "=>":
            return np.logical_or(np.logical_not(args[0]), args[1])
        a, b = args
        if name == "=":
            return a == b
        if name.startswith("bvs"):
            w = sym.arg_sorts[0].width
            sign = 1 << (w - 1)
            if w <= 63:
                sign = np.uint64(sign)
            a, b = a ^ sign, b ^ sign
        return {
            "bvult": np.less, "bvslt": np.less,
            "bvule": np.less_equal, "bvsle": np.less_equal,
            "bvugt": np.greater, "bvsgt": np.greater,
            "bvuge": np.greater_equal, "bvsge": np.greater_equal,
        }[name](a, b)

    def formula(self, f: Formula, env: Mapping[Var, int]):
        if isinstance(f, Atom):
            return self.term(f.term, env)
        if isinstance(f, Not):
            return np.logical_not(self.formula(f.body, env))
        if isinstance(f, (And, Or)):
            parts = [self.full(self.formula(p, env)) for p in f.parts]
            if not parts:
                return np.bool_(isinstance(f, And))
            op = np.logical_and if isinstance(f, And) else np.logical_or
            acc = parts[0]
            for p in parts[1:]:
                acc = op(acc, p)
            return acc
        if isinstance(f, Implies):
            return np.logical_or(np.logical_not(self.formula(f.lhs, env)), self.formula(f.rhs, env))
        if isinstance(f, Iff):
            return np.equal(self.formula(f.lhs, env), self.formula(f.rhs, env))
        axes = tuple(range(self._next, self._next + len(f.vars)))
        self._next += len(f.vars)
        inner = {**env, **dict(zip(f.vars, axes))}
        body = self.full(self.formula(f.body, inner))
        reduce = np.all if isinstance(f, Forall) else np.any
        return reduce(body, axis=axes, keepdims=True)


def _truth_table(f: Formula, free: list[Var], cap: int | None):
    """Boolean array over the free variables (axis k = ``free[k]``)."""
    grid = _Grid(f, free)
    grid.check_cap(current_cap() if cap is None else cap)
    env = {v: k for k, v in enumerate(free)}
    out = grid.full(grid.formula(f, env))
    shape = grid.sizes[: len(free)] + [1] * (grid.ndim - len(free))
    return np.broadcast_to(out, shape).reshape(grid.sizes[: len(free)])


def _ordered_free(f: Formula, order) -> list[Var]:
    free = free_vars(f)
    if order is None:
        return free
    order = list(dict.fromkeys(order))
    missing = [v for v in free if v not in order]
    return order + missing


def find_model(f: Union[Formula, Term], order=None, cap: int | None = None) -> dict[Var, Value] | None:
    """First satisfying assignment of the free variables, or ``None``.

    Each variable counts upwards from zero; the first variable in ``order``
    (default: order of first occurrence) is the fastest-moving digit.
    """
    f = as_formula(f)
    free = _ordered_free(f, order)
    table = _truth_table(f, free, cap)
    flat = np.transpose(table).reshape(-1) if free else table.reshape(-1)
    if not flat.any():
        return None
    idx = np.unravel_index(int(np.argmax(flat)), tuple(reversed(table.shape)))
    model = {}
    for v, k in zip(free, reversed(idx)):
        model[v] = bool(k) if v.sort == BOOL else BitVec(v.sort.width, int(k))
    return model


def is_satisfiable(f: Union[Formula, Term], cap: int | None = None) -> bool:
    f = as_formula(f)
    return bool(_truth_table(f, free_vars(f), cap).any())


def is_valid(f: Union[Formula, Term], cap: int | None = None) -> bool:
    return not is_satisfiable(Not(as_formula(f)), cap)


def constant_value(t: Term, vars=None, cap: int | None = None) -> BitVec | None:
    """The value ``t`` takes under every assignment of ``vars``, if unique."""
    if not is_theory_term(t) or not t.sort.is_bv:
        raise EvaluationError(f"{t} is not a bit-vector theory term")
    free = list(dict.fromkeys(list(vars or ()) + variables(t)))
    grid = _Grid(Atom(TRUE), free)
    grid.check_cap(current_cap() if cap is None else cap)
    values = np.asarray(grid.term(t, {v: k for k, v in enumerate(free)}))
    first = values.reshape(-1)[0]
    if not np.all(values == first):
        return None
    return BitVec(t.sort.width, int(first))


def model_terms(model: Mapping[Var, Value]) -> dict[Var, Term]:
    """A model as a substitution to value terms."""
    return {v: value_term(x) for v, x in model.items()}
