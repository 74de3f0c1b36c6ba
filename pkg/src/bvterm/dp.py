"""Dependency pairs, dependency-graph approximation and the DG processor."""
from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field
from typing import Iterable

from .lctrs import LCTRS, ConstrainedRule
from .solver import And, Atom, CapacityError, UnsupportedSort, find_model
from .term import (
    App, Term, Var, apply, is_theory_term, mark, subterms,
)

__all__ = [
    "DependencyPair", "DPProblem", "DepGraph",
    "dependency_pairs", "connecting_constraint", "dg_approximation",
    "sccs", "proc_dg", "to_dot",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DependencyPair:
    id: int
    rule: ConstrainedRule

    @property
    def lhs(self) -> App:
        return self.rule.lhs

    @property
    def rhs(self) -> App:
        return self.rule.rhs

    @property
    def guard(self) -> Term:
        return self.rule.guard

    def __str__(self):
        from .parser import format_rule
        return f"({self.id}) " + format_rule(self.rule, head="dp")


@dataclass(frozen=True)
class DPProblem:
    pairs: tuple[DependencyPair, ...]
    system: LCTRS = field(compare=False, hash=False, repr=False)

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(p.id for p in self.pairs)

    def __len__(self):
        return len(self.pairs)

    def subproblem(self, ids: Iterable[int]) -> DPProblem:
        keep = set(ids)
        return DPProblem(tuple(p for p in self.pairs if p.id in keep), self.system)

    def __str__(self):
        return "{" + ", ".join(f"({i})" for i in self.ids) + "}"


@dataclass(frozen=True)
class DepGraph:
    nodes: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]

    def successors(self, node: int) -> list[int]:
        return [b for a, b in self.edges if a == node]


def dependency_pairs(system: LCTRS) -> DPProblem:
    """DP(R): one pair per rule and defined-rooted subterm of its right-hand side."""
    defined = set(system.defined_symbols)
    pairs = []
    for rule in system.rules:
        lhs_marked = mark(rule.lhs)
        for _, sub in subterms(rule.rhs):
            if isinstance(sub, App) and sub.symbol in defined:
                pairs.append(DependencyPair(
                    len(pairs) + 1, ConstrainedRule(lhs_marked, mark(sub), rule.guard)))
    return DPProblem(tuple(pairs), system)


def _rename_apart(rule: ConstrainedRule, avoid: set[str]) -> ConstrainedRule:
    renaming = {}
    for v in rule.variables():
        name = v.name
        while name in avoid:
            name += "'"
        if name != v.name:
            renaming[v] = Var(name, v.sort)
    if not renaming:
        return rule
    return ConstrainedRule(apply(renaming, rule.lhs), apply(renaming, rule.rhs), apply(renaming, rule.guard))


def connecting_constraint(first: DependencyPair, second: DependencyPair) -> And | None:
    """Guard of ``first`` conjoined with the guard of ``second`` seen through the
    argument flow; ``None`` if the marked roots differ.

    A left-hand variable of ``second`` at argument ``j`` is replaced by the
    ``j``-th right-hand argument of ``first`` when that argument is a theory
    term; otherwise it stays unconstrained.
    """
    if first.rhs.symbol != second.lhs.symbol:
        return None
    taken = {v.name for v in first.rule.variables()}
    nxt = _rename_apart(second.rule, taken)
    sigma: dict[Var, Term] = {}
    for target, source in zip(nxt.lhs.args, first.rhs.args):
        if isinstance(target, Var) and target not in sigma and is_theory_term(source):
            sigma[target] = source
    return And((Atom(first.guard), Atom(apply(sigma, nxt.guard))))


def _may_follow(first: DependencyPair, second: DependencyPair) -> bool:
    constraint = connecting_constraint(first, second)
    if constraint is None:
        return False
    try:
        return find_model(constraint) is not None
    except (CapacityError, UnsupportedSort) as exc:
        log.debug("keeping edge (%d, %d): %s", first.id, second.id, exc)
        return True


def dg_approximation(problem: DPProblem) -> DepGraph:
    """An over-approximation of the dependency graph of ``problem``."""
    edges = [(a.id, b.id) for a in problem.pairs for b in problem.pairs if _may_follow(a, b)]
    return DepGraph(problem.ids, tuple(sorted(edges)))


def sccs(graph: DepGraph) -> list[frozenset[int]]:
    """Strongly connected components that contain at least one edge.

    Tarjan's algorithm, iterative.  Components come out in topological
    order of the condensation (a component precedes those it reaches),
    unrelated components by their smallest node.
    """
    succ: dict[int, list[int]] = {n: [] for n in graph.nodes}
    for a, b in graph.edges:
        succ[a].append(b)
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    found: list[frozenset[int]] = []
    counter = 0

    for start in sorted(graph.nodes):
        if start in index:
            continue
        work = [(start, iter(succ[start]))]
        index[start] = low[start] = counter
        counter += 1
        stack.append(start)
        on_stack.add(start)
        while work:
            node, children = work[-1]
            for child in children:
                if child not in index:
                    index[child] = low[child] = counter
                    counter += 1
                    stack.append(child)
                    on_stack.add(child)
                    work.append((child, iter(succ[child])))
                    break
                if child in on_stack:
                    low[node] = min(low[node], index[child])
            else:
                work.pop()
                if work:
                    parent = work[-1][0]
                    low[parent] = min(low[parent], low[node])
                if low[node] == index[node]:
                    comp = set()
                    while True:
                        w = stack.pop()
                        on_stack.discard(w)
                        comp.add(w)
                        if w == node:
                            break
                    found.append(frozenset(comp))

    edge_set = set(graph.edges)
    cyclic = {c for c in found if len(c) > 1 or (next(iter(c)),) * 2 in edge_set}
    return [c for c in _topological(found, graph.edges) if c in cyclic]


def _topological(components: list[frozenset[int]], edges) -> list[frozenset[int]]:
    """Kahn's algorithm on the condensation; ties go to the smallest node."""
    owner = {n: k for k, comp in enumerate(components) for n in comp}
    succ: dict[int, set[int]] = {k: set() for k in range(len(components))}
    indegree = dict.fromkeys(succ, 0)
    for a, b in edges:
        ca, cb = owner[a], owner[b]
        if ca != cb and cb not in succ[ca]:
            succ[ca].add(cb)
            indegree[cb] += 1
    ready = [(min(components[k]), k) for k, d in indegree.items() if d == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        _, k = heapq.heappop(ready)
        order.append(components[k])
        for m in succ[k]:
            indegree[m] -= 1
            if indegree[m] == 0:
                heapq.heappush(ready, (min(components[m]), m))
    return order


def proc_dg(problem: DPProblem) -> list[DPProblem]:
    """Split ``problem`` into the node sets of the cyclic SCCs of its graph."""
    graph = dg_approximation(problem)
    return [problem.subproblem(comp) for comp in sccs(graph)]


def to_dot(graph: DepGraph, name: str = "dg", labels: dict | None = None) -> str:
    """Graphviz source for a dependency graph (nodes labelled by pair id)."""
    lines = [f"digraph {name} {{"]
    for n in graph.nodes:
        label = labels.get(n, f"({n})") if labels else f"({n})"
        lines.append(f'  n{n} [label="{label}"];')
    for a, b in graph.edges:
        lines.append(f"  n{a} -> n{b};")
    lines.append("}")
    return "\n".join(lines) + "\n"
