"""Termination prover for logically constrained rewrite systems over bit-vectors."""
from .bitvec import BitVec
from .driver import ProofResult, Verdict, prove_termination
from .parser import parse, parse_file

__all__ = ["BitVec", "ProofResult", "Verdict", "prove_termination", "parse", "parse_file"]
__version__ = "0.1.0"
