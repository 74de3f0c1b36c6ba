"""Constrained rewrite rules and the rewrite relation they induce."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Mapping

from .solver import domain, eval_term
from .term import (
    BOOL, TRUE, App, Symbol, SymbolKind, Term, Var, apply, is_theory_term,
    is_value, replace_at, subterms, value_term, variables,
)

__all__ = [
    "ConstrainedRule", "LCTRS", "RuleError", "RewriteError", "StepLimitExceeded",
    "match", "respects", "calculation_step", "rewrite_successors",
    "rewrite_to_normal_form", "NormalForm",
]


class RuleError(ValueError):
    """A rule violates the shape constraints on constrained rules."""


class RewriteError(ValueError):
    """The rewrite engine cannot execute a rule."""


class StepLimitExceeded(RuntimeError):
    def __init__(self, start: Term, trace: list[Term], limit: int):
        super().__init__(f"no normal form of {start} within {limit} steps")
        self.start = start
        self.trace = trace
        self.limit = limit


@dataclass(frozen=True)
class ConstrainedRule:
    lhs: Term
    rhs: Term
    guard: Term = TRUE

    def __post_init__(self):
        if not isinstance(self.lhs, App):
            raise RuleError("left-hand side is a variable")
        if self.lhs.symbol.kind is SymbolKind.THEORY:
            raise RuleError(f"left-hand side root {self.lhs.symbol.name} is a theory symbol")
        if self.guard.sort != BOOL or not is_theory_term(self.guard):
            raise RuleError(f"guard {self.guard} is not a boolean theory term")
        if self.lhs.sort != self.rhs.sort:
            raise RuleError(f"sides have sorts {self.lhs.sort} and {self.rhs.sort}")

    def variables(self) -> list[Var]:
        return list(dict.fromkeys(variables(self.lhs) + variables(self.rhs) + variables(self.guard)))

    def extra_variables(self) -> list[Var]:
        """Variables of the rule that do not occur in the left-hand side."""
        lhs = set(variables(self.lhs))
        return [v for v in self.variables() if v not in lhs]

    def __str__(self):
        from .parser import format_rule
        return format_rule(self)


@dataclass
class LCTRS:
    symbols: dict[str, Symbol] = field(default_factory=dict)
    rules: list[ConstrainedRule] = field(default_factory=list)
    sorts: list[str] = field(default_factory=list)
    rule_names: list[str | None] = field(default_factory=list)

    def __post_init__(self):
        if len(self.rule_names) < len(self.rules):
            self.rule_names += [None] * (len(self.rules) - len(self.rule_names))

    @property
    def defined_symbols(self) -> list[Symbol]:
        return list(dict.fromkeys(r.lhs.symbol for r in self.rules))

    def is_defined(self, sym: Symbol) -> bool:
        return any(r.lhs.symbol == sym for r in self.rules)


# --- matching and respecting substitutions ---------------------------------------

def match(pattern: Term, t: Term, sigma: dict[Var, Term] | None = None) -> dict[Var, Term] | None:
    """Syntactic matching: ``sigma`` with ``pattern sigma == t``, or ``None``."""
    sigma = {} if sigma is None else dict(sigma)
    stack = [(pattern, t)]
    while stack:
        p, s = stack.pop()
        if isinstance(p, Var):
            bound = sigma.get(p)
            if bound is None:
                if p.sort != s.sort:
                    return None
                sigma[p] = s
            elif bound != s:
                return None
        elif isinstance(s, Var) or p.symbol != s.symbol:
            return None
        else:
            stack.extend(zip(p.args, s.args))
    return sigma


def respects(gamma: Mapping[Var, Term], rule: ConstrainedRule) -> bool:
    """Guard variables and rhs-only variables map to values, and the guard holds."""
    must_be_values = set(variables(rule.guard))
    must_be_values |= set(variables(rule.rhs)) - set(variables(rule.lhs))
    assignment = {}
    for v in must_be_values:
        image = gamma.get(v, v)
        if not is_value(image):
            return False
        assignment[v] = image.symbol.value
    return bool(eval_term(rule.guard, assignment))


# --- rewriting ----------------------------------------------------------------

def calculation_step(t: Term) -> Term | None:
    """Evaluate a theory operator applied to values, e.g. ``#b0000 + #b0001``."""
    if not isinstance(t, App) or t.symbol.kind is not SymbolKind.THEORY or is_value(t):
        return None
    if not all(is_value(a) for a in t.args):
        return None
    return value_term(eval_term(t, {}))


def _check_executable(rule: ConstrainedRule):
    lhs_guard = set(variables(rule.lhs)) | set(variables(rule.guard))
    stray = [v.name for v in variables(rule.rhs) if v not in lhs_guard]
    if stray:
        raise RewriteError(
            f"rule {rule} has right-hand side variables {', '.join(stray)} "
            "occurring in neither the left-hand side nor the guard")


def _rule_instances(rule: ConstrainedRule, t: Term) -> Iterator[Term]:
    """Contracta of ``t`` at the root by ``rule`` under respecting substitutions."""
    sigma = match(rule.lhs, t)
    if sigma is None:
        return
    free = [v for v in variables(rule.guard) if v not in sigma]
    # guard-only variables range over values; enumerate them in ascending order
    for point in itertools.product(*(domain(v.sort) for v in free)):
        gamma = dict(sigma)
        gamma.update((v, value_term(x)) for v, x in zip(free, point))
        if respects(gamma, rule):
            yield apply(gamma, rule.rhs)


def _positions(t: Term):
    """Positions in leftmost-innermost order (children before parents, left first)."""
    order = []

    def walk(s, pos):
        if isinstance(s, App):
            for k, a in enumerate(s.args, 1):
                walk(a, pos + (k,))
        order.append((pos, s))

    walk(t, ())
    return order


def rewrite_successors(system: LCTRS, t: Term) -> list[Term]:
    """All one-step reducts of ``t``, without duplicates, in a fixed order."""
    for rule in system.rules:
        _check_executable(rule)
    out: dict[Term, None] = {}
    for pos, s in subterms(t):
        calc = calculation_step(s)
        if calc is not None:
            out.setdefault(replace_at(t, pos, calc))
        for rule in system.rules:
            for contractum in _rule_instances(rule, s):
                out.setdefault(replace_at(t, pos, contractum))
    return list(out)


def _strategy_step(system: LCTRS, t: Term) -> Term | None:
    positions = _positions(t)
    for pos, s in positions:
        calc = calculation_step(s)
        if calc is not None:
            return replace_at(t, pos, calc)
    for pos, s in positions:
        for rule in system.rules:
            for contractum in _rule_instances(rule, s):
                return replace_at(t, pos, contractum)
    return None


@dataclass(frozen=True)
class NormalForm:
    term: Term
    trace: list  # terms after each step; empty if ``term`` was already normal


def rewrite_to_normal_form(system: LCTRS, t: Term, step_cap: int = 1000) -> NormalForm:
    """Leftmost-innermost rewriting with calculation steps taking priority.

    Raises :class:`StepLimitExceeded` (carrying the partial trace) when no
    normal form is reached within ``step_cap`` steps.
    """
    if step_cap < 0:
        raise ValueError("step_cap must be non-negative")
    for rule in system.rules:
        _check_executable(rule)
    trace: list[Term] = []
    current = t
    while True:
        nxt = _strategy_step(system, current)
        if nxt is None:
            return NormalForm(current, trace)
        if len(trace) == step_cap:
            raise StepLimitExceeded(t, trace, step_cap)
        trace.append(nxt)
        current = nxt
