"""Exact arithmetic for the weight group.

Four group kinds are supported, all with a solvable word problem and a unique
canonical form per element: the trivial group, cyclic groups Z/m, free abelian
groups Z^r and free groups F_r.  Equality of canonical forms is equality in
the group, so weights can be compared, hashed and interned exactly.

Canonical payloads:

* trivial       -- always ``0``
* cyclic(m)     -- residue in [0, m)
* free-abelian  -- exponent tuple of length r
* free          -- reduced word as a tuple of nonzero signed generator
                   indices (``2`` is the second generator, ``-2`` its inverse)
"""

from __future__ import annotations

import re
from dataclasses import dataclass

TRIVIAL = "trivial"
CYCLIC = "cyclic"
FREE_ABELIAN = "free-abelian"
FREE = "free"

_KINDS = (TRIVIAL, CYCLIC, FREE_ABELIAN, FREE)


class GroupError(ValueError):
    """Bad group kind, malformed element text, or mixed-kind arithmetic."""


@dataclass(frozen=True)
class GroupKind:
    """The active weight group: one of trivial, cyclic(m), free-abelian(r), free(r).

    ``param`` is the modulus for cyclic groups and the rank for the free
    kinds; it is 0 for the trivial group.  Degenerate parameters (cyclic
    m=1, rank r=0) are allowed and behave like the trivial group.
    """

    name: str
    param: int = 0

    def __post_init__(self):
        if self.name not in _KINDS:
            raise GroupError(f"unknown group kind {self.name!r}")
        if self.name == TRIVIAL and self.param != 0:
            raise GroupError("trivial group takes no parameter")
        if self.name == CYCLIC and self.param < 1:
            raise GroupError("cyclic modulus must be >= 1")
        if self.name in (FREE_ABELIAN, FREE) and self.param < 0:
            raise GroupError("rank must be >= 0")

    def __str__(self):
        if self.name == TRIVIAL:
            return "trivial"
        return f"{self.name}({self.param})"


def trivial_kind() -> GroupKind:
    return GroupKind(TRIVIAL)


def cyclic_kind(modulus: int) -> GroupKind:
    return GroupKind(CYCLIC, modulus)


def free_abelian_kind(rank: int) -> GroupKind:
    return GroupKind(FREE_ABELIAN, rank)


def free_kind(rank: int) -> GroupKind:
    return GroupKind(FREE, rank)


def _reduce_word(letters) -> tuple[int, ...]:
    # stack-based cancellation of adjacent x, x^-1 pairs
    out: list[int] = []
    for x in letters:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


@dataclass(frozen=True)
class GroupElement:
    """An element of the weight group in canonical form."""

    kind: GroupKind
    payload: object

    def is_identity(self) -> bool:
        name = self.kind.name
        if name == TRIVIAL:
            return True
        if name == CYCLIC:
            return self.payload == 0
        if name == FREE_ABELIAN:
            return not any(self.payload)
        return self.payload == ()

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return multiply(self, other)

    def inverse(self) -> "GroupElement":
        return invert(self)

    def __str__(self):
        return format_element(self)


def identity(kind: GroupKind) -> GroupElement:
    """The neutral element of ``kind``."""
    name = kind.name
    if name == TRIVIAL:
        return GroupElement(kind, 0)
    if name == CYCLIC:
        return GroupElement(kind, 0)
    if name == FREE_ABELIAN:
        return GroupElement(kind, (0,) * kind.param)
    return GroupElement(kind, ())


def multiply(g: GroupElement, h: GroupElement) -> GroupElement:
    """Canonical form of ``g*h``.  Raises on kind mismatch."""
    kind = g.kind
    if kind != h.kind:
        raise GroupError(f"cannot multiply {kind} element by {h.kind} element")
    name = kind.name
    if name == TRIVIAL:
        return g
    if name == CYCLIC:
        return GroupElement(kind, (g.payload + h.payload) % kind.param)
    if name == FREE_ABELIAN:
        return GroupElement(kind, tuple(a + b for a, b in zip(g.payload, h.payload)))
    # free: concatenate and cancel across the seam
    left = list(g.payload)
    for x in h.payload:
        if left and left[-1] == -x:
            left.pop()
        else:
            left.append(x)
    return GroupElement(kind, tuple(left))


def invert(g: GroupElement) -> GroupElement:
    """The inverse; ``multiply(g, invert(g))`` is the identity."""
    kind = g.kind
    name = kind.name
    if name == TRIVIAL:
        return g
    if name == CYCLIC:
        return GroupElement(kind, (-g.payload) % kind.param)
    if name == FREE_ABELIAN:
        return GroupElement(kind, tuple(-a for a in g.payload))
    return GroupElement(kind, tuple(-x for x in reversed(g.payload)))


def product(kind: GroupKind, factors) -> GroupElement:
    """Ordered product of ``factors`` (identity for an empty sequence)."""
    acc = identity(kind)
    for f in factors:
        acc = multiply(acc, f)
    return acc


_FREE_TOKEN = re.compile(r"^x(\d+)(\^-1)?$")


def parse_element(kind: GroupKind, text: str) -> GroupElement:
    """Parse the element grammar; round-trips with :func:`format_element`.

    Grammar: free -- whitespace-separated ``x<k>`` / ``x<k>^-1`` tokens,
    empty string is the identity; cyclic -- a decimal integer, normalized
    mod m; free-abelian -- ``(1,0,-2)``; trivial -- the string ``e``.
    """
    name = kind.name
    text = text.strip()
    if name == TRIVIAL:
        if text != "e":
            raise GroupError(f"trivial group element must be 'e', got {text!r}")
        return identity(kind)
    if name == CYCLIC:
        try:
            value = int(text)
        except ValueError:
            raise GroupError(f"not an integer residue: {text!r}") from None
        return GroupElement(kind, value % kind.param)
    if name == FREE_ABELIAN:
        if not (text.startswith("(") and text.endswith(")")):
            raise GroupError(f"free-abelian element must be parenthesized: {text!r}")
        inner = text[1:-1].strip()
        parts = [p.strip() for p in inner.split(",")] if inner else []
        try:
            vec = tuple(int(p) for p in parts)
        except ValueError:
            raise GroupError(f"bad integer vector: {text!r}") from None
        if len(vec) != kind.param:
            raise GroupError(
                f"expected vector of length {kind.param}, got {len(vec)}: {text!r}"
            )
        return GroupElement(kind, vec)
    # free
    letters = []
    for token in text.split():
        m = _FREE_TOKEN.match(token)
        if not m:
            raise GroupError(f"bad free-group token {token!r}")
        index = int(m.group(1))
        if not 1 <= index <= kind.param:
            raise GroupError(f"generator index {index} out of range 1..{kind.param}")
        letters.append(-index if m.group(2) else index)
    return GroupElement(kind, _reduce_word(letters))


def format_element(g: GroupElement) -> str:
    """Canonical text form; the identity of a free group is the empty string."""
    name = g.kind.name
    if name == TRIVIAL:
        return "e"
    if name == CYCLIC:
        return str(g.payload)
    if name == FREE_ABELIAN:
        return "(" + ",".join(str(a) for a in g.payload) + ")"
    return " ".join(f"x{x}" if x > 0 else f"x{-x}^-1" for x in g.payload)


def kind_to_json(kind: GroupKind) -> dict:
    if kind.name == TRIVIAL:
        return {"kind": TRIVIAL}
    if kind.name == CYCLIC:
        return {"kind": CYCLIC, "modulus": kind.param}
    return {"kind": kind.name, "rank": kind.param}


def kind_from_json(data: dict) -> GroupKind:
    if not isinstance(data, dict) or "kind" not in data:
        raise GroupError(f"bad group description {data!r}")
    name = data["kind"]
    if name == TRIVIAL:
        return trivial_kind()
    if name == CYCLIC:
        return cyclic_kind(int(data["modulus"]))
    if name in (FREE_ABELIAN, FREE):
        return GroupKind(name, int(data["rank"]))
    raise GroupError(f"unknown group kind {name!r}")


def generator(kind: GroupKind, index: int = 1) -> GroupElement:
    """Convenience: a standard generator (x_index, e_index, or 1 mod m)."""
    name = kind.name
    if name == TRIVIAL:
        return identity(kind)
    if name == CYCLIC:
        return GroupElement(kind, 1 % kind.param)
    if name == FREE_ABELIAN:
        if not 1 <= index <= kind.param:
            raise GroupError(f"generator index {index} out of range")
        vec = [0] * kind.param
        vec[index - 1] = 1
        return GroupElement(kind, tuple(vec))
    if not 1 <= index <= kind.param:
        raise GroupError(f"generator index {index} out of range")
    return GroupElement(kind, (index,))
