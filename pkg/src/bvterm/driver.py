"""The proving pipeline: DP(R), then the DG processor, then SSR on each SCC."""
from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field

from .dp import DPProblem, dependency_pairs, proc_dg
from .lctrs import LCTRS
from .solver import enumeration_cap, current_cap
from .ssr import DEFAULT_WIDTH_CAP, SSRProof, find_ssr_proof

__all__ = ["Verdict", "ProofNode", "ProofResult", "prove_termination", "replay", "format_proof"]


class Verdict(enum.Enum):
    TERMINATING = "YES"
    UNKNOWN = "MAYBE"


@dataclass
class ProofNode:
    problem: DPProblem
    processor: str | None = None  # "DG", "SSR", or None for a leaf
    children: list["ProofNode"] = field(default_factory=list)
    detail: SSRProof | None = None
    seconds: float = 0.0

    @property
    def solved(self) -> bool:
        return self.processor is None and len(self.problem) == 0

    def leaves(self):
        if not self.children:
            yield self
        for c in self.children:
            yield from c.leaves()


@dataclass
class ProofResult:
    verdict: Verdict
    root: ProofNode
    system: LCTRS

    @property
    def terminating(self) -> bool:
        return self.verdict is Verdict.TERMINATING


def _solved(problem: DPProblem) -> ProofNode:
    return ProofNode(DPProblem((), problem.system))


def _ssr_node(problem: DPProblem, width_cap: int) -> ProofNode:
    start = time.perf_counter()
    proof = find_ssr_proof(problem, width_cap)
    elapsed = time.perf_counter() - start
    if proof is None:
        # processor inapplicable: this is an open leaf
        return ProofNode(problem, seconds=elapsed)
    return ProofNode(problem, "SSR", [_solved(problem)], proof, elapsed)


def prove_termination(system: LCTRS, enum_cap: int | None = None,
                      width_cap: int = DEFAULT_WIDTH_CAP) -> ProofResult:
    """Try to prove ``system`` terminating.  MAYBE never means non-terminating."""
    with enumeration_cap(enum_cap or current_cap()):
        initial = dependency_pairs(system)
        if not initial.pairs:
            root = ProofNode(initial)
        else:
            start = time.perf_counter()
            parts = proc_dg(initial)
            root = ProofNode(initial, "DG", seconds=time.perf_counter() - start)
            if not parts:
                root.children.append(_solved(initial))
            for part in parts:
                root.children.append(_ssr_node(part, width_cap))
    done = all(leaf.solved for leaf in root.leaves())
    return ProofResult(Verdict.TERMINATING if done else Verdict.UNKNOWN, root, system)


def replay(node: ProofNode, width_cap: int = DEFAULT_WIDTH_CAP) -> bool:
    """Re-run every recorded processor and compare with the recorded children."""
    if node.processor == "DG":
        again = [p.ids for p in proc_dg(node.problem)] or [()]
        if again != [c.problem.ids for c in node.children]:
            return False
    elif node.processor == "SSR":
        if find_ssr_proof(node.problem, width_cap) != node.detail:
            return False
    return all(replay(c, width_cap) for c in node.children)


def _describe(node: ProofNode) -> list[str]:
    if node.processor == "DG":
        return ["dependency graph processor"]
    if node.processor == "SSR":
        p = node.detail
        inc = p.increment
        lines = [f"singleton self-loop removal, theorem {p.theorem}, argument {p.position}",
                 f"step {inc.delta} (a = {inc.a})"]
        if p.witness is not None:
            lines.append(f"interval witness {p.witness}")
        return lines
    if node.solved:
        return ["solved"]
    return ["no processor applies"]


def format_proof(result: ProofResult) -> str:
    out = [result.verdict.value]

    def walk(node: ProofNode, depth: int):
        pad = "  " * depth
        label = "DP(R)" if depth == 0 else "problem"
        out.append(f"{pad}{label} {node.problem}")
        for pair in node.problem.pairs:
            out.append(f"{pad}  {pair}")
        for line in _describe(node):
            out.append(f"{pad}  - {line}")
        if node.processor:
            out.append(f"{pad}  - time {node.seconds * 1000:.1f} ms")
        for child in node.children:
            walk(child, depth + 1)

    walk(result.root, 0)
    return "\n".join(out) + "\n"
