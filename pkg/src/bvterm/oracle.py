"""Ground-level chain analysis for singleton self-loops at small widths.

For a pair ``f#(x1..xn) -> f#(t1..tn) [phi]`` whose arguments are all
bit-vectors and theory terms over ``x1..xn``, the ground instances form a
finite graph with at most one successor per node, so an infinite chain
exists exactly when that graph has a cycle.  This module builds the graph
with the scalar evaluator and looks for cycles.  It is a test instrument;
the prover never consults it for a verdict.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .bitvec import BitVec
from .solver import domain, eval_term
from .ssr import SingletonSelfLoop
from .term import is_theory_term, variables

__all__ = [
    "OracleInapplicable", "GroundGraph", "DEFAULT_ORACLE_CAP",
    "ground_transition_graph", "projection_graph", "find_cycle",
    "is_acyclic", "is_chain_free_bruteforce", "to_dot",
]

DEFAULT_ORACLE_CAP = 1 << 20


class OracleInapplicable(ValueError):
    pass


@dataclass(frozen=True)
class GroundGraph:
    nodes: tuple
    edges: tuple
    projection: int | None = None  # 1-based argument position, if projected

    def successors(self) -> dict:
        out = {n: [] for n in self.nodes}
        for a, b in self.edges:
            out[a].append(b)
        return out


def _check(view: SingletonSelfLoop, cap: int) -> None:
    allowed = set(view.lhs_vars)
    for k, (x, t) in enumerate(zip(view.lhs_vars, view.rhs_args), 1):
        if not x.sort.is_bv:
            raise OracleInapplicable(f"argument {k} has non-bit-vector sort {x.sort}")
        if not is_theory_term(t):
            raise OracleInapplicable(f"argument {k} of the right-hand side is not a theory term")
        if not set(variables(t)) <= allowed:
            raise OracleInapplicable(f"argument {k} of the right-hand side has fresh variables")
    if not set(variables(view.guard)) <= allowed:
        raise OracleInapplicable("the guard has variables outside the left-hand side")
    states = math.prod(1 << x.sort.width for x in view.lhs_vars)
    if states > cap:
        raise OracleInapplicable(f"{states} ground states exceed the oracle cap {cap}")


def ground_transition_graph(view: SingletonSelfLoop, cap: int = DEFAULT_ORACLE_CAP) -> GroundGraph:
    """All argument tuples, with an edge from each tuple where the guard holds
    to the tuple the pair rewrites it to."""
    _check(view, cap)
    xs = view.lhs_vars
    nodes = tuple(itertools.product(*(tuple(domain(x.sort)) for x in xs)))
    edges = []
    for point in nodes:
        alpha = dict(zip(xs, point))
        if eval_term(view.guard, alpha):
            edges.append((point, tuple(eval_term(t, alpha) for t in view.rhs_args)))
    return GroundGraph(nodes, tuple(edges))


def projection_graph(view: SingletonSelfLoop, i: int, cap: int = DEFAULT_ORACLE_CAP) -> GroundGraph:
    """The ground graph seen through argument ``i`` only."""
    full = ground_transition_graph(view, cap)
    width = view.width(i)
    nodes = tuple(BitVec(width, k) for k in range(1 << width))
    edges = sorted({(a[i - 1], b[i - 1]) for a, b in full.edges}, key=lambda e: (e[0].value, e[1].value))
    return GroundGraph(nodes, tuple(edges), projection=i)


def find_cycle(graph: GroundGraph) -> list | None:
    """Some cycle as a node list (first node not repeated), or ``None``."""
    succ = graph.successors()
    WHITE, GREY, BLACK = 0, 1, 2
    color = dict.fromkeys(graph.nodes, WHITE)
    for start in graph.nodes:
        if color[start] != WHITE:
            continue
        color[start] = GREY
        path = [start]
        iters = [iter(succ[start])]
        while iters:
            for nxt in iters[-1]:
                if color[nxt] == GREY:
                    return path[path.index(nxt):]
                if color[nxt] == WHITE:
                    color[nxt] = GREY
                    path.append(nxt)
                    iters.append(iter(succ[nxt]))
                    break
            else:
                color[path.pop()] = BLACK
                iters.pop()
    return None


def is_acyclic(graph: GroundGraph) -> bool:
    return find_cycle(graph) is None


def is_chain_free_bruteforce(view: SingletonSelfLoop, cap: int = DEFAULT_ORACLE_CAP) -> bool:
    return is_acyclic(ground_transition_graph(view, cap))


def _label(node) -> str:
    if isinstance(node, tuple):
        return "(" + " ".join(str(v) for v in node) + ")"
    return str(node)


def to_dot(graph: GroundGraph, name: str = "ground") -> str:
    ids = {n: k for k, n in enumerate(graph.nodes)}
    lines = [f"digraph {name} {{"]
    lines += [f'  s{k} [label="{_label(n)}"];' for n, k in ids.items()]
    lines += [f"  s{ids[a]} -> s{ids[b]};" for a, b in graph.edges]
    lines.append("}")
    return "\n".join(lines) + "\n"
