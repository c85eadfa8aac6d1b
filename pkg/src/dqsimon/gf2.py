"""GF(2) vectors and subgroups backed by int bitsets.

A vector of width ``w`` is stored as a Python int whose most significant bit
(bit ``w - 1``) is coordinate x_1, so ``str(v)`` reads left to right as
x_1 ... x_w and ``int(str(v), 2) == v.value``. Elimination picks pivots from
coordinate x_1 downwards and keeps rows in reduced echelon form, which makes
every basis this module returns canonical for the subgroup it spans.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass

MAX_WIDTH = 24
MAX_ENUM_RANK = 20


class WidthMismatch(ValueError):
    pass


class SpanTooLarge(ValueError):
    pass


@dataclass(frozen=True, order=True)
class BitVector:
    width: int
    value: int

    def __post_init__(self) -> None:
        if not 0 < self.width <= MAX_WIDTH:
            raise ValueError(f"width must be in 1..{MAX_WIDTH}, got {self.width}")
        if self.value < 0 or self.value >> self.width:
            raise ValueError(f"value {self.value} does not fit in {self.width} bits")

    @classmethod
    def from_str(cls, bits: str) -> BitVector:
        if not bits or set(bits) - {"0", "1"}:
            raise ValueError(f"not a bitstring: {bits!r}")
        return cls(len(bits), int(bits, 2))

    @classmethod
    def zero(cls, width: int) -> BitVector:
        return cls(width, 0)

    def __str__(self) -> str:
        return format(self.value, f"0{self.width}b")

    def __xor__(self, other: BitVector) -> BitVector:
        return xor_add(self, other)

    def __bool__(self) -> bool:
        return self.value != 0

    def concat(self, other: BitVector) -> BitVector:
        """``self`` on the left (high bits), ``other`` on the right."""
        return BitVector(self.width + other.width, (self.value << other.width) | other.value)

    def split(self, left_width: int) -> tuple[BitVector, BitVector]:
        right_width = self.width - left_width
        return (
            BitVector(left_width, self.value >> right_width),
            BitVector(right_width, self.value & ((1 << right_width) - 1)),
        )


def _check_widths(*vectors: BitVector) -> int:
    widths = {v.width for v in vectors}
    if len(widths) > 1:
        raise WidthMismatch(f"width mismatch: {sorted(widths)}")
    return widths.pop()


def xor_add(x: BitVector, y: BitVector) -> BitVector:
    width = _check_widths(x, y)
    return BitVector(width, x.value ^ y.value)


def dot(x: BitVector, y: BitVector) -> int:
    _check_widths(x, y)
    return (x.value & y.value).bit_count() & 1


def _rref(rows: Iterable[int], width: int) -> tuple[list[int], list[int]]:
    """Reduced row echelon form of int rows; returns (rows, pivot bit positions)."""
    basis: list[int] = []
    pivots: list[int] = []
    for row in rows:
        for b, p in zip(basis, pivots):
            if (row >> p) & 1:
                row ^= b
        if not row:
            continue
        p = row.bit_length() - 1
        for i, b in enumerate(basis):
            if (b >> p) & 1:
                basis[i] = b ^ row
        basis.append(row)
        pivots.append(p)
    # Pivot on x_1 first, i.e. the highest bit.
    order = sorted(range(len(basis)), key=lambda i: -pivots[i])
    return [basis[i] for i in order], [pivots[i] for i in order]


def _reduce(value: int, rows: Sequence[int], pivots: Sequence[int]) -> int:
    for b, p in zip(rows, pivots):
        if (value >> p) & 1:
            value ^= b
    return value


@dataclass(frozen=True)
class Gf2Basis:
    """An ordered, linearly independent list of vectors of one width."""

    ambient_width: int
    vectors: tuple[BitVector, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "vectors", tuple(self.vectors))
        for v in self.vectors:
            if v.width != self.ambient_width:
                raise WidthMismatch(
                    f"basis of width {self.ambient_width} got vector of width {v.width}"
                )
        if len(_rref(self.ints(), self.ambient_width)[0]) != len(self.vectors):
            raise ValueError("basis vectors are linearly dependent")

    @classmethod
    def spanning(cls, ambient_width: int, vectors: Iterable[BitVector]) -> Gf2Basis:
        """Canonical (RREF) basis of the span of arbitrary vectors."""
        vectors = list(vectors)
        if vectors:
            _check_widths(BitVector.zero(ambient_width), *vectors)
        rows, _ = _rref((v.value for v in vectors), ambient_width)
        return cls(ambient_width, tuple(BitVector(ambient_width, r) for r in rows))

    def __len__(self) -> int:
        return len(self.vectors)

    def __iter__(self):
        return iter(self.vectors)

    @property
    def rank(self) -> int:
        return len(self.vectors)

    def ints(self) -> list[int]:
        return [v.value for v in self.vectors]

    def canonical(self) -> Gf2Basis:
        return Gf2Basis.spanning(self.ambient_width, self.vectors)

    def same_span(self, other: Gf2Basis) -> bool:
        return (
            self.ambient_width == other.ambient_width
            and self.canonical().vectors == other.canonical().vectors
        )


def in_span(z: BitVector, basis: Gf2Basis) -> bool:
    _check_widths(z, BitVector.zero(basis.ambient_width))
    rows, pivots = _rref(basis.ints(), basis.ambient_width)
    return _reduce(z.value, rows, pivots) == 0


def extend_if_independent(basis: Gf2Basis, z: BitVector) -> tuple[Gf2Basis, bool]:
    """Append ``z`` when it lies outside the span. Returns (basis, appended)."""
    if in_span(z, basis):
        return basis, False
    return Gf2Basis(basis.ambient_width, basis.vectors + (z,)), True


def rank(vectors: Sequence[BitVector]) -> int:
    if not vectors:
        return 0
    width = _check_widths(*vectors)
    return len(_rref((v.value for v in vectors), width)[0])


def perp(basis: Gf2Basis) -> Gf2Basis:
    """Orthogonal complement {g : g.h = 0 for all h in span(basis)}.

    Solves the homogeneous XOR system whose rows are the basis vectors.
    """
    width = basis.ambient_width
    rows, pivots = _rref(basis.ints(), width)
    pivot_set = set(pivots)
    null = []
    for free in range(width):
        if free in pivot_set:
            continue
        g = 1 << free
        for row, p in zip(rows, pivots):
            if (row >> free) & 1:
                g |= 1 << p
        null.append(g)
    out, _ = _rref(null, width)
    return Gf2Basis(width, tuple(BitVector(width, v) for v in out))


def span_ints(rows: Sequence[int]) -> list[int]:
    """All XOR combinations of independent int rows (Gray-code order)."""
    if len(rows) > MAX_ENUM_RANK:
        raise SpanTooLarge(f"refusing to enumerate a span of rank {len(rows)}")
    out = [0]
    for r in rows:
        out += [x ^ r for x in out]
    return out


def enumerate_span(basis: Gf2Basis) -> set[BitVector]:
    width = basis.ambient_width
    return {BitVector(width, v) for v in span_ints(basis.ints())}


__all__ = [
    "BitVector",
    "Gf2Basis",
    "SpanTooLarge",
    "WidthMismatch",
    "dot",
    "enumerate_span",
    "extend_if_independent",
    "in_span",
    "perp",
    "rank",
    "span_ints",
    "xor_add",
]
