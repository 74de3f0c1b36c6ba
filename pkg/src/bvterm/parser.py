"""Reading and writing ``.lctrs`` files.

The format is a sequence of s-expressions::

    (sort list)                            ; optional named sorts
    (fun cnt ((bv 4)) (bv 4))              ; function declarations
    (rule (cnt x) (u1 x #b0000 #b0000))    ; rules, guard defaults to true
    (rule (u1 x i z) z :guard (bvsge i x))

Theory operators use their SMT-LIB names (``bvadd``, ``bvslt``, ...).  Any
identifier that is not a declared function is a variable, scoped to its
rule; its sort is inferred from the position it occurs in.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from .bitvec import BitVec
from .lctrs import LCTRS, ConstrainedRule, RuleError
from .term import (
    BOOL, DPSORT, FALSE, THEORY_OPERATORS, TRUE, App, Sort, SortError, Symbol,
    SymbolKind, Term, Var, bv_sort, named_sort, theory_symbol, value_term,
)

__all__ = [
    "ParseError", "parse", "parse_file", "parse_term",
    "format_sort", "format_term", "format_rule", "format_lctrs", "unparse",
]

_TOKEN = re.compile(r"\s+|;[^\n]*|\(|\)|[^\s();]+")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_'.\-]*")
_RESERVED = set(THEORY_OPERATORS) | {"true", "false", "bool", "bv", "sort", "fun", "rule"}


class ParseError(ValueError):
    """Input error with a stable ``code`` and a 1-based source location.

    Codes: ``syntax``, ``unknown-symbol``, ``sort-mismatch``,
    ``width-mismatch``, ``arity-mismatch``, ``duplicate-declaration``,
    ``reserved-name``, ``bad-rule``.
    """

    def __init__(self, code: str, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: [{code}] {message}")
        self.code = code
        self.message = message
        self.line = line
        self.col = col


@dataclass
class _Atom:
    text: str
    line: int
    col: int


@dataclass
class _List:
    items: list
    line: int
    col: int


_SExpr = Union[_Atom, _List]


def _read(text: str) -> list[_SExpr]:
    stack: list[_List] = [_List([], 1, 1)]
    line, line_start = 1, 0
    for m in _TOKEN.finditer(text):
        tok = m.group()
        col = m.start() - line_start + 1
        if tok[0].isspace() or tok[0] == ";":
            nl = tok.count("\n")
            if nl:
                line += nl
                line_start = m.start() + tok.rindex("\n") + 1
            continue
        if tok == "(":
            stack.append(_List([], line, col))
        elif tok == ")":
            if len(stack) == 1:
                raise ParseError("syntax", "unbalanced ')'", line, col)
            done = stack.pop()
            stack[-1].items.append(done)
        else:
            stack[-1].items.append(_Atom(tok, line, col))
    if len(stack) > 1:
        open_ = stack[-1]
        raise ParseError("syntax", "unclosed '('", open_.line, open_.col)
    return stack[0].items


def _err(code: str, message: str, sx: _SExpr) -> ParseError:
    return ParseError(code, message, sx.line, sx.col)


class _Elaborator:
    def __init__(self):
        self.sorts: dict[str, Sort] = {}
        self.funs: dict[str, Symbol] = {}

    # -- sorts and declarations --

    def sort(self, sx: _SExpr) -> Sort:
        if isinstance(sx, _Atom):
            if sx.text == "bool":
                return BOOL
            if sx.text in self.sorts:
                return self.sorts[sx.text]
            raise _err("unknown-symbol", f"unknown sort {sx.text}", sx)
        items = sx.items
        heads = [i.text if isinstance(i, _Atom) else None for i in items]
        if len(items) == 2 and heads[0] == "bv":
            width = items[1]
        elif len(items) == 3 and heads[:2] == ["_", "BitVec"]:
            width = items[2]
        else:
            raise _err("syntax", "expected a sort: bool, (bv N) or a declared sort", sx)
        if not (isinstance(width, _Atom) and width.text.isdigit() and int(width.text) >= 1):
            raise _err("syntax", "bit-vector width must be a positive integer", sx)
        return bv_sort(int(width.text))

    def _check_new_name(self, name_sx: _SExpr, table: dict, what: str) -> str:
        if not isinstance(name_sx, _Atom) or not _IDENT.fullmatch(name_sx.text):
            raise _err("syntax", f"expected a {what} name", name_sx)
        name = name_sx.text
        if name in _RESERVED:
            raise _err("reserved-name", f"{name} is reserved", name_sx)
        if name in table:
            raise _err("duplicate-declaration", f"{what} {name} is already declared", name_sx)
        return name

    def declare_sort(self, form: _List):
        if len(form.items) != 2:
            raise _err("syntax", "expected (sort <name>)", form)
        name = self._check_new_name(form.items[1], self.sorts, "sort")
        self.sorts[name] = named_sort(name)

    def declare_fun(self, form: _List):
        if len(form.items) != 4 or not isinstance(form.items[2], _List):
            raise _err("syntax", "expected (fun <name> (<sort>...) <sort>)", form)
        name = self._check_new_name(form.items[1], self.funs, "function")
        args = tuple(self.sort(s) for s in form.items[2].items)
        self.funs[name] = Symbol(name, args, self.sort(form.items[3]))

    # -- terms --

    def peek(self, sx: _SExpr, env: dict[str, Var]) -> Sort | None:
        """Sort of ``sx`` if it can be told without context."""
        if isinstance(sx, _Atom):
            t = sx.text
            if t.startswith("#b"):
                return bv_sort(len(t) - 2) if len(t) > 2 else None
            if t in ("true", "false"):
                return BOOL
            if t in self.funs:
                return self.funs[t].result
            return env[t].sort if t in env else None
        if not sx.items or not isinstance(sx.items[0], _Atom):
            return None
        head = sx.items[0].text
        if head in self.funs:
            return self.funs[head].result
        if head in THEORY_OPERATORS:
            if THEORY_OPERATORS[head][1] == "bool":
                return BOOL
            for a in sx.items[1:]:
                s = self.peek(a, env)
                if s is not None:
                    return s
        return None

    def _expect(self, t: Term, expected: Sort | None, sx: _SExpr) -> Term:
        if expected is not None and t.sort != expected:
            literal = isinstance(sx, _Atom) and sx.text.startswith("#b")
            if literal and expected.is_bv:
                raise _err("width-mismatch",
                           f"literal {sx.text} has width {t.sort.width}, expected {expected.width}", sx)
            raise _err("sort-mismatch", f"expected sort {expected}, found {t.sort}", sx)
        return t

    def term(self, sx: _SExpr, expected: Sort | None, env: dict[str, Var]) -> Term:
        if isinstance(sx, _Atom):
            return self._atom(sx, expected, env)
        if not sx.items:
            raise _err("syntax", "empty application", sx)
        head, args = sx.items[0], sx.items[1:]
        if not isinstance(head, _Atom):
            raise _err("syntax", "application head must be a symbol", head)
        name = head.text
        if name in self.funs:
            sym = self.funs[name]
            if len(args) != sym.arity:
                raise _err("arity-mismatch", f"{name} takes {sym.arity} arguments, got {len(args)}", sx)
            built = tuple(self.term(a, s, env) for a, s in zip(args, sym.arg_sorts))
            return self._expect(App(sym, built), expected, sx)
        if name not in THEORY_OPERATORS:
            raise _err("unknown-symbol", f"undeclared symbol {name}", head)
        arg_kind, res_kind = THEORY_OPERATORS[name]
        fixed = 1 if name == "not" else (None if name in ("and", "or") else 2)
        if (fixed is not None and len(args) != fixed) or (fixed is None and not args):
            want = fixed if fixed is not None else "at least 1"
            raise _err("arity-mismatch", f"{name} takes {want} arguments, got {len(args)}", sx)
        if arg_kind == "bool":
            operand = BOOL
        elif res_kind == "bv" and expected is not None and expected.is_bv:
            operand = expected
        else:
            operand = next((s for s in (self.peek(a, env) for a in args) if s is not None), None)
            if operand is None:
                raise _err("sort-mismatch", f"cannot infer operand sort of {name}", sx)
        try:
            sym = theory_symbol(name, operand, len(args))
        except SortError as exc:
            raise _err("sort-mismatch", str(exc), sx) from None
        built = tuple(self.term(a, operand, env) for a in args)
        return self._expect(App(sym, built), expected, sx)

    def _atom(self, sx: _Atom, expected: Sort | None, env: dict[str, Var]) -> Term:
        text = sx.text
        if text.startswith("#b"):
            try:
                value = BitVec.parse(text)
            except ValueError:
                raise _err("syntax", f"malformed literal {text}", sx) from None
            return self._expect(value_term(value), expected, sx)
        if text in ("true", "false"):
            return self._expect(TRUE if text == "true" else FALSE, expected, sx)
        if text in self.funs:
            sym = self.funs[text]
            if sym.arity:
                raise _err("arity-mismatch", f"{text} takes {sym.arity} arguments", sx)
            return self._expect(App(sym), expected, sx)
        if text in THEORY_OPERATORS:
            raise _err("arity-mismatch", f"operator {text} used without arguments", sx)
        if not _IDENT.fullmatch(text):
            raise _err("syntax", f"unexpected token {text}", sx)
        if text in env:
            return self._expect(env[text], expected, sx)
        if expected is None:
            raise _err("sort-mismatch", f"cannot infer the sort of variable {text}", sx)
        if expected == DPSORT:
            raise _err("sort-mismatch", "variables cannot have sort dpsort", sx)
        env[text] = Var(text, expected)
        return env[text]

    # -- rules --

    def _declare_vars(self, vars_sx: _List, env: dict[str, Var]):
        """``:vars ((y (bv 4)) ...)`` fixes sorts that cannot be inferred."""
        for entry in vars_sx.items:
            if not (isinstance(entry, _List) and len(entry.items) == 2 and isinstance(entry.items[0], _Atom)
                    and _IDENT.fullmatch(entry.items[0].text)):
                raise _err("syntax", "expected (<name> <sort>)", entry)
            name = entry.items[0].text
            if name in self.funs or name in _RESERVED:
                raise _err("reserved-name", f"{name} is not a variable name", entry.items[0])
            sort = self.sort(entry.items[1])
            if sort == DPSORT:
                raise _err("sort-mismatch", "variables cannot have sort dpsort", entry)
            if name in env and env[name].sort != sort:
                raise _err("sort-mismatch", f"{name} has sort {env[name].sort} in the left-hand side", entry)
            env.setdefault(name, Var(name, sort))

    def rule(self, form: _List) -> tuple[ConstrainedRule, str | None]:
        items = form.items[1:]
        if len(items) < 2:
            raise _err("syntax", "expected (rule <lhs> <rhs> [:guard <formula>] [:vars (...)] [:name <id>])", form)
        lhs_sx, rhs_sx, rest = items[0], items[1], items[2:]
        guard_sx, name, vars_sx = None, None, None
        while rest:
            if len(rest) < 2 or not isinstance(rest[0], _Atom):
                raise _err("syntax", "expected a keyword argument", rest[0])
            key, val = rest[0], rest[1]
            if key.text == ":guard" and guard_sx is None:
                guard_sx = val
            elif key.text == ":name" and name is None:
                if not isinstance(val, _Atom) or not _IDENT.fullmatch(val.text):
                    raise _err("syntax", "rule name must be an identifier", val)
                name = val.text
            elif key.text == ":vars" and vars_sx is None:
                if not isinstance(val, _List):
                    raise _err("syntax", "expected :vars ((<name> <sort>)...)", val)
                vars_sx = val
            else:
                raise _err("syntax", f"unexpected {key.text}", key)
            rest = rest[2:]
        if isinstance(lhs_sx, _Atom):
            head = lhs_sx
        elif lhs_sx.items and isinstance(lhs_sx.items[0], _Atom):
            head = lhs_sx.items[0]
        else:
            raise _err("bad-rule", "left-hand side must be rooted by a declared function", lhs_sx)
        if head.text not in self.funs:
            if head.text in _RESERVED or not _IDENT.fullmatch(head.text):
                raise _err("bad-rule", "left-hand side must be rooted by a declared function", head)
            raise _err("unknown-symbol", f"undeclared symbol {head.text}", head)
        env: dict[str, Var] = {}
        lhs = self.term(lhs_sx, None, env)
        if vars_sx is not None:
            self._declare_vars(vars_sx, env)
        guard = TRUE
        if guard_sx is not None:
            trial = dict(env)
            try:
                guard = self.term(guard_sx, BOOL, trial)
                env = trial
            except ParseError as exc:
                # a guard-only variable may get its sort from the right-hand side
                if exc.code != "sort-mismatch" or "cannot infer" not in exc.message:
                    raise
                self.term(rhs_sx, lhs.sort, env)
                guard = self.term(guard_sx, BOOL, env)
        rhs = self.term(rhs_sx, lhs.sort, env)
        try:
            return ConstrainedRule(lhs, rhs, guard), name
        except RuleError as exc:
            raise _err("bad-rule", str(exc), form) from None


def parse(text: str) -> LCTRS:
    """Parse an ``.lctrs`` source into a well-sorted :class:`LCTRS`."""
    elab = _Elaborator()
    rules, names = [], []
    for form in _read(text):
        if not isinstance(form, _List) or not form.items or not isinstance(form.items[0], _Atom):
            raise _err("syntax", "expected a (sort ...), (fun ...) or (rule ...) form", form)
        kind = form.items[0].text
        if kind == "sort":
            elab.declare_sort(form)
        elif kind == "fun":
            elab.declare_fun(form)
        elif kind == "rule":
            rule, name = elab.rule(form)
            rules.append(rule)
            names.append(name)
        else:
            raise _err("syntax", f"unknown form ({kind} ...)", form)
    return LCTRS(dict(elab.funs), rules, list(elab.sorts), names)


def parse_file(path) -> LCTRS:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def parse_term(text: str, system: LCTRS, expected: Sort | None = None,
               env: dict[str, Var] | None = None) -> Term:
    """Parse a single term against the signature of ``system``."""
    elab = _Elaborator()
    elab.funs = dict(system.symbols)
    elab.sorts = {n: named_sort(n) for n in system.sorts}
    forms = _read(text)
    if len(forms) != 1:
        raise ParseError("syntax", "expected exactly one term", 1, 1)
    return elab.term(forms[0], expected, {} if env is None else env)


# --- printing ------------------------------------------------------------------

def format_sort(s: Sort) -> str:
    return str(s)


def format_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    sym = t.symbol
    if isinstance(sym.value, BitVec):
        return str(sym.value)
    if not t.args:
        return sym.name
    return "(" + " ".join([sym.name] + [format_term(a) for a in t.args]) + ")"


def format_rule(rule: ConstrainedRule, name: str | None = None, head: str = "rule") -> str:
    parts = [head, format_term(rule.lhs), format_term(rule.rhs)]
    if rule.guard != TRUE:
        parts += [":guard", format_term(rule.guard)]
    extra = rule.extra_variables()
    if extra and head == "rule":
        parts += [":vars", "(" + " ".join(f"({v.name} {format_sort(v.sort)})" for v in extra) + ")"]
    if name is not None:
        parts += [":name", name]
    return "(" + " ".join(parts) + ")"


def format_lctrs(system: LCTRS) -> str:
    lines = [f"(sort {s})" for s in system.sorts]
    for sym in system.symbols.values():
        if sym.kind is SymbolKind.DEFINED:
            args = " ".join(format_sort(s) for s in sym.arg_sorts)
            lines.append(f"(fun {sym.name} ({args}) {format_sort(sym.result)})")
    for rule, name in zip(system.rules, system.rule_names):
        lines.append(format_rule(rule, name))
    return "\n".join(lines) + "\n"


def unparse(entity) -> str:
    """Canonical surface syntax for a term, rule, sort or system."""
    if isinstance(entity, LCTRS):
        return format_lctrs(entity)
    if isinstance(entity, ConstrainedRule):
        return format_rule(entity)
    if isinstance(entity, Sort):
        return format_sort(entity)
    return format_term(entity)
