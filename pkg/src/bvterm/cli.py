"""Command line: ``bvterm prove <file.lctrs> [options]``.

Exit status: 0 on YES, 1 on MAYBE, 2 on input errors, 3 when ``--oracle``
finds a ground cycle in a problem the prover removed.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import oracle
from .dp import dependency_pairs, dg_approximation, to_dot
from .driver import ProofResult, format_proof, prove_termination
from .lctrs import RewriteError, StepLimitExceeded, rewrite_to_normal_form
from .parser import ParseError, format_term, parse_file, parse_term
from .solver import DEFAULT_CAP
from .ssr import DEFAULT_WIDTH_CAP, as_singleton_self_loop
from .term import variables

EXIT_YES, EXIT_MAYBE, EXIT_INPUT, EXIT_UNSOUND = 0, 1, 2, 3

log = logging.getLogger("bvterm")


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bvterm", description="Termination prover for bit-vector LCTRSs.")
    sub = ap.add_subparsers(dest="command", required=True)
    prove = sub.add_parser("prove", help="prove termination of an .lctrs file")
    prove.add_argument("file", type=Path)
    prove.add_argument("--width-cap", type=int, default=DEFAULT_WIDTH_CAP,
                       help="widest loop counter for interval-witness search (default %(default)s)")
    prove.add_argument("--enum-cap", type=int, default=DEFAULT_CAP,
                       help="max assignments per solver query; BVTERM_ENUM_CAP overrides")
    prove.add_argument("--oracle", action="store_true",
                       help="cross-check every SCC with the brute-force ground-graph oracle")
    prove.add_argument("--emit-dot", metavar="DIR", type=Path,
                       help="write the dependency graph (and oracle graphs) as Graphviz files")
    prove.add_argument("--trace", metavar="TERM",
                       help="rewrite a ground term to normal form and print the trace")
    prove.add_argument("-v", "--verbose", action="store_true")
    return ap


def _enum_cap(args) -> int:
    env = os.environ.get("BVTERM_ENUM_CAP")
    if env:
        try:
            return int(env)
        except ValueError:
            log.warning("ignoring non-integer BVTERM_ENUM_CAP=%r", env)
    return args.enum_cap


def _run_oracle(result: ProofResult, dot_dir: Path | None, out) -> bool:
    """Report oracle findings; False on a soundness failure."""
    sound = True
    for node in result.root.children:
        problem = node.problem
        view = as_singleton_self_loop(problem) if problem.pairs else None
        if view is None:
            if problem.pairs:
                print(f"oracle {problem}: not applicable (not a singleton self-loop)", file=out)
            continue
        try:
            graph = oracle.ground_transition_graph(view)
        except oracle.OracleInapplicable as exc:
            print(f"oracle {problem}: not applicable ({exc})", file=out)
            continue
        cycle = oracle.find_cycle(graph)
        removed = node.processor == "SSR"
        if cycle is None:
            print(f"oracle {problem}: ground graph acyclic", file=out)
        else:
            shown = " -> ".join("(" + " ".join(map(str, s)) + ")" for s in cycle[:4])
            more = " -> ..." if len(cycle) > 4 else ""
            print(f"oracle {problem}: ground cycle of length {len(cycle)}: {shown}{more}", file=out)
            if removed:
                sound = False
        if dot_dir is not None:
            tag = "-".join(map(str, problem.ids))
            (dot_dir / f"oracle-{tag}.dot").write_text(oracle.to_dot(graph))
            if removed:
                proj = oracle.projection_graph(view, node.detail.position)
                (dot_dir / f"projection-{tag}.dot").write_text(oracle.to_dot(proj, "projection"))
    return sound


def _trace(system, text: str, out) -> int:
    try:
        term = parse_term(text, system)
    except ParseError as exc:
        print(f"bvterm: --trace: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if variables(term):
        print("bvterm: --trace needs a ground term", file=sys.stderr)
        return EXIT_INPUT
    print("trace:", file=out)
    print(f"  {format_term(term)}", file=out)
    try:
        nf = rewrite_to_normal_form(system, term, step_cap=10_000)
        steps = nf.trace
    except StepLimitExceeded as exc:
        steps = exc.trace
        print(f"  (stopped after {exc.limit} steps)", file=sys.stderr)
    except RewriteError as exc:
        print(f"bvterm: --trace: {exc}", file=sys.stderr)
        return EXIT_INPUT
    for t in steps:
        print(f"  -> {format_term(t)}", file=out)
    return 0


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        system = parse_file(args.file)
    except OSError as exc:
        print(f"bvterm: cannot read {args.file}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_INPUT
    except ParseError as exc:
        print(f"bvterm: {args.file}:{exc}", file=sys.stderr)
        return EXIT_INPUT

    result = prove_termination(system, enum_cap=_enum_cap(args), width_cap=args.width_cap)
    out.write(format_proof(result))

    if args.emit_dot is not None:
        args.emit_dot.mkdir(parents=True, exist_ok=True)
        (args.emit_dot / "dg.dot").write_text(to_dot(dg_approximation(dependency_pairs(system))))

    status = EXIT_YES if result.terminating else EXIT_MAYBE
    if args.oracle and not _run_oracle(result, args.emit_dot, out):
        print("bvterm: internal soundness failure: a removed problem has a ground cycle", file=sys.stderr)
        return EXIT_UNSOUND
    if args.trace is not None:
        trace_status = _trace(system, args.trace, out)
        if trace_status:
            return trace_status
    return status


if __name__ == "__main__":
    sys.exit(main())
