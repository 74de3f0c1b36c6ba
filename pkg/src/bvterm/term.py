"""Sorted signatures and first-order terms.

Terms are immutable and hashable.  Variables carry their sort, so a term
can be sort-checked without an environment.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Union

from .bitvec import COMPARISONS, BitVec

__all__ = [
    "Sort", "BOOL", "DPSORT", "bv_sort", "named_sort",
    "SymbolKind", "Symbol", "Var", "App", "Term",
    "SortError", "NotMarkable",
    "theory_symbol", "value_term", "TRUE", "FALSE",
    "is_value", "term_value", "variables", "subterms", "subterm_at",
    "replace_at", "apply", "compose", "mark", "is_theory_term",
    "root", "THEORY_OPERATORS", "op", "lit",
]


class SortError(TypeError):
    """A term is not well-sorted."""


class NotMarkable(ValueError):
    """``mark`` was called on a term whose root is not a defined symbol."""


@dataclass(frozen=True)
class Sort:
    kind: str  # "bool" | "bv" | "dp" | "named"
    width: int | None = None
    name: str | None = None

    def __post_init__(self):
        if self.kind == "bv" and (self.width is None or self.width < 1):
            raise ValueError(f"bit-vector sort needs a width >= 1, got {self.width}")

    @property
    def is_bv(self) -> bool:
        return self.kind == "bv"

    @property
    def enumerable(self) -> bool:
        return self.kind in ("bool", "bv")

    def __str__(self):
        if self.kind == "bv":
            return f"(bv {self.width})"
        if self.kind == "named":
            return self.name
        return "bool" if self.kind == "bool" else "dpsort"


BOOL = Sort("bool")
DPSORT = Sort("dp")


def bv_sort(width: int) -> Sort:
    return Sort("bv", width)


def named_sort(name: str) -> Sort:
    return Sort("named", name=name)


class SymbolKind(enum.Enum):
    THEORY = "theory"
    DEFINED = "defined"  # an ordinary (non-theory) function symbol
    MARKED = "marked"


@dataclass(frozen=True)
class Symbol:
    name: str
    arg_sorts: tuple[Sort, ...]
    result: Sort
    kind: SymbolKind = SymbolKind.DEFINED
    # set only for the value constants true/false and bit-vector literals
    value: Union[bool, BitVec, None] = field(default=None, compare=True)

    @property
    def arity(self) -> int:
        return len(self.arg_sorts)

    @property
    def is_value(self) -> bool:
        return self.value is not None

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Var:
    name: str
    sort: Sort

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class App:
    symbol: Symbol
    args: tuple = ()

    def __post_init__(self):
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))
        sym = self.symbol
        if len(self.args) != sym.arity:
            raise SortError(f"{sym.name} expects {sym.arity} arguments, got {len(self.args)}")
        for k, (arg, want) in enumerate(zip(self.args, sym.arg_sorts), 1):
            if arg.sort != want:
                raise SortError(f"argument {k} of {sym.name} has sort {arg.sort}, expected {want}")
            if want == DPSORT:
                raise SortError("dpsort may not occur as an argument sort")

    @property
    def sort(self) -> Sort:
        return self.symbol.result

    def __str__(self):
        from .parser import format_term
        return format_term(self)


Term = Union[Var, App]


# --- theory signature -----------------------------------------------------

# operator name -> (argument shape, result shape); "bv" means the operand
# width, "any" means the shared operand sort of an equality.
THEORY_OPERATORS = {
    "bvadd": ("bv", "bv"),
    "bvsub": ("bv", "bv"),
    **{name: ("bv", "bool") for name in COMPARISONS if name != "="},
    "=": ("any", "bool"),
    "and": ("bool", "bool"),
    "or": ("bool", "bool"),
    "not": ("bool", "bool"),
    "=>": ("bool", "bool"),
}

_UNARY = {"not"}


def theory_symbol(name: str, operand: Sort, arity: int = 2) -> Symbol:
    """The instance of theory operator ``name`` at operand sort ``operand``.

    ``and``/``or`` are n-ary; everything else has fixed arity.
    """
    try:
        arg_kind, res_kind = THEORY_OPERATORS[name]
    except KeyError:
        raise KeyError(f"unknown theory operator {name!r}") from None
    if arg_kind == "bv" and not operand.is_bv:
        raise SortError(f"{name} needs bit-vector operands, got {operand}")
    if arg_kind == "bool" and operand != BOOL:
        raise SortError(f"{name} needs bool operands, got {operand}")
    if arg_kind == "any" and not operand.enumerable:
        raise SortError(f"= is only defined on theory sorts, got {operand}")
    if name in _UNARY:
        arity = 1
    elif name not in ("and", "or"):
        arity = 2
    result = operand if res_kind == "bv" else BOOL
    return Symbol(name, (operand,) * arity, result, SymbolKind.THEORY)


def value_term(v: Union[bool, BitVec]) -> App:
    if isinstance(v, bool):
        return TRUE if v else FALSE
    return App(Symbol(str(v), (), bv_sort(v.width), SymbolKind.THEORY, v))


TRUE = App(Symbol("true", (), BOOL, SymbolKind.THEORY, True))
FALSE = App(Symbol("false", (), BOOL, SymbolKind.THEORY, False))


def is_value(t: Term) -> bool:
    return isinstance(t, App) and t.symbol.is_value


def term_value(t: Term) -> Union[bool, BitVec]:
    if not is_value(t):
        raise ValueError(f"{t} is not a value")
    return t.symbol.value


def root(t: Term) -> Symbol | None:
    return t.symbol if isinstance(t, App) else None


# --- traversal ---------------------------------------------------------------

def subterms(t: Term) -> list[tuple[tuple[int, ...], Term]]:
    """All ``(position, subterm)`` pairs in pre-order; the root is ``()``.

    Positions index children from 1.
    """
    out = []
    stack = [((), t)]
    while stack:
        pos, s = stack.pop()
        out.append((pos, s))
        if isinstance(s, App):
            for k in range(len(s.args), 0, -1):
                stack.append((pos + (k,), s.args[k - 1]))
    return out


def subterm_at(t: Term, pos: tuple[int, ...]) -> Term:
    for k in pos:
        t = t.args[k - 1]
    return t


def replace_at(t: Term, pos: tuple[int, ...], new: Term) -> Term:
    if not pos:
        return new
    k = pos[0]
    args = list(t.args)
    args[k - 1] = replace_at(args[k - 1], pos[1:], new)
    return App(t.symbol, tuple(args))


def _iter_vars(t: Term) -> Iterator[Var]:
    if isinstance(t, Var):
        yield t
    else:
        for a in t.args:
            yield from _iter_vars(a)


def variables(t: Term) -> list[Var]:
    """Variables of ``t`` in order of first (leftmost) occurrence."""
    return list(dict.fromkeys(_iter_vars(t)))


def apply(sigma: Mapping[Var, Term], t: Term) -> Term:
    """Apply a substitution; variables outside its domain stay put."""
    if not sigma:
        return t
    if isinstance(t, Var):
        image = sigma.get(t)
        if image is None:
            return t
        if image.sort != t.sort:
            raise SortError(f"substitution maps {t}:{t.sort} to a term of sort {image.sort}")
        return image
    if not t.args:
        return t
    return App(t.symbol, tuple(apply(sigma, a) for a in t.args))


def compose(first: Mapping[Var, Term], second: Mapping[Var, Term]) -> dict[Var, Term]:
    """The substitution applying ``first`` and then ``second``."""
    out = {v: apply(second, s) for v, s in first.items()}
    for v, s in second.items():
        out.setdefault(v, s)
    return out


def mark(t: Term) -> App:
    """``f(t1..tn)`` to ``f#(t1..tn)`` of sort dpsort."""
    if not isinstance(t, App):
        raise NotMarkable(f"variable {t} has no root symbol")
    sym = t.symbol
    if sym.kind is not SymbolKind.DEFINED:
        raise NotMarkable(f"root {sym.name} of {t} is not a defined symbol")
    marked = Symbol(sym.name + "#", sym.arg_sorts, DPSORT, SymbolKind.MARKED)
    return App(marked, t.args)


def is_theory_term(t: Term) -> bool:
    if isinstance(t, Var):
        return True
    return t.symbol.kind is SymbolKind.THEORY and all(is_theory_term(a) for a in t.args)


# --- builders ------------------------------------------------------------------

def op(name: str, *args: Term) -> App:
    """Apply theory operator ``name``, instantiated at the first argument's sort."""
    operand = args[0].sort if args else BOOL
    return App(theory_symbol(name, operand, len(args)), args)


def lit(digits: str) -> App:
    """Bit-vector literal from binary digits, e.g. ``lit("0001")``."""
    return value_term(BitVec.from_bits(digits))
