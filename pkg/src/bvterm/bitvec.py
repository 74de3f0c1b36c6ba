"""Fixed-width two's-complement bit-vectors.

Values are stored as a width plus a non-negative Python integer below
``2**width``; Python integers are unbounded, so any width >= 1 works.
"""
from __future__ import annotations

from dataclasses import dataclass

__all__ = [
    "BitVec",
    "WidthMismatch",
    "bv_add",
    "bv_sub",
    "bv_compare",
    "trailing_zeros",
    "COMPARISONS",
]


class WidthMismatch(ValueError):
    """Operands of a binary bit-vector operation have different widths."""


@dataclass(frozen=True, order=False)
class BitVec:
    width: int
    value: int

    def __post_init__(self):
        if not isinstance(self.width, int) or self.width < 1:
            raise ValueError(f"bit-vector width must be >= 1, got {self.width!r}")
        if not 0 <= self.value < (1 << self.width):
            raise ValueError(f"{self.value} does not fit in {self.width} bits")

    @classmethod
    def wrap(cls, value: int, width: int) -> BitVec:
        """Reduce an arbitrary integer modulo ``2**width``."""
        return cls(width, value & ((1 << width) - 1))

    @classmethod
    def from_bits(cls, digits: str) -> BitVec:
        """Build from binary digits, most significant first (``"0010"``)."""
        if not digits or any(c not in "01" for c in digits):
            raise ValueError(f"not a binary numeral: {digits!r}")
        return cls(len(digits), int(digits, 2))

    @classmethod
    def parse(cls, literal: str) -> BitVec:
        """Parse the SMT-LIB form ``#b0101``."""
        if not literal.startswith("#b"):
            raise ValueError(f"not an SMT-LIB binary literal: {literal!r}")
        return cls.from_bits(literal[2:])

    @property
    def bits(self) -> str:
        return format(self.value, f"0{self.width}b")

    @property
    def unsigned(self) -> int:
        return self.value

    @property
    def signed(self) -> int:
        if self.value >> (self.width - 1):
            return self.value - (1 << self.width)
        return self.value

    def bit(self, index: int) -> int:
        """Digit at ``index`` counted from the least significant end."""
        return (self.value >> index) & 1

    def __str__(self):
        return "#b" + self.bits

    def __repr__(self):
        return f"BitVec({self})"

    def __add__(self, other: BitVec) -> BitVec:
        return bv_add(self, other)

    def __sub__(self, other: BitVec) -> BitVec:
        return bv_sub(self, other)


def _check(x: BitVec, y: BitVec) -> int:
    if x.width != y.width:
        raise WidthMismatch(f"width {x.width} vs {y.width}")
    return x.width


def bv_add(x: BitVec, y: BitVec) -> BitVec:
    return BitVec.wrap(x.value + y.value, _check(x, y))


def bv_sub(x: BitVec, y: BitVec) -> BitVec:
    return BitVec.wrap(x.value - y.value, _check(x, y))


# SMT-LIB names; the signed/unsigned split is explicit, there is no default.
COMPARISONS = {
    "=": lambda x, y: x.value == y.value,
    "bvult": lambda x, y: x.unsigned < y.unsigned,
    "bvule": lambda x, y: x.unsigned <= y.unsigned,
    "bvugt": lambda x, y: x.unsigned > y.unsigned,
    "bvuge": lambda x, y: x.unsigned >= y.unsigned,
    "bvslt": lambda x, y: x.signed < y.signed,
    "bvsle": lambda x, y: x.signed <= y.signed,
    "bvsgt": lambda x, y: x.signed > y.signed,
    "bvsge": lambda x, y: x.signed >= y.signed,
}


def bv_compare(op: str, x: BitVec, y: BitVec) -> bool:
    """Compare two same-width vectors; ``op`` is an SMT-LIB comparison name."""
    _check(x, y)
    try:
        fn = COMPARISONS[op]
    except KeyError:
        raise ValueError(f"unknown comparison {op!r}") from None
    return fn(x, y)


def trailing_zeros(x: BitVec) -> int:
    """Number of least-significant zero digits; ``width`` for the zero vector."""
    if x.value == 0:
        return x.width
    return (x.value & -x.value).bit_length() - 1
