"""Kernel backend selection and the compact quiver form.

The search drivers (nondegeneracy checking, the sign-coherence experiment)
spend nearly all their time mutating quivers inside a BFS loop.  That loop
runs on a compact representation: vertex indices, interned weight ids, and
*signed weight-class counts* — for each vertex pair and weight value one
signed multiplicity, which turns weight reduction into addition and keeps
mutation cost independent of arrow multiplicities (these grow doubly
exponentially on wild quivers).  For the trivial group the state is exactly
the exchange matrix.

A compiled Cython kernel (128-bit counts) is used when available; a
pure-Python twin with identical semantics and unbounded integers is the
fallback and the overflow escape hatch.  Set ``WQUIV_KERNEL=pure`` to force
the fallback.
"""

from __future__ import annotations

import os

from . import _kernel_pure
from .groups import GroupElement, GroupKind, identity, invert, multiply
from .quiver import Arrow, Vertex, WeightedQuiver

_cy = None
if os.environ.get("WQUIV_KERNEL", "") != "pure":
    try:
        from . import _kernel_cy as _cy
    except ImportError:
        _cy = None

active = _cy if _cy is not None else _kernel_pure

BACKEND = active.BACKEND

MAX_WEIGHTS = 1 << 21  # weight ids share an int64 with two vertex indices


def backends() -> dict:
    """All importable kernel backends, keyed by name."""
    out = {"pure": _kernel_pure}
    if _cy is not None:
        out["cython"] = _cy
    return out


def explore(n, frozen, state, table, max_depth, **checks):
    """Run the active backend's BFS, falling back to the pure backend if the
    compiled one overflows its 128-bit class counts."""
    try:
        return active.explore(n, frozen, state, table, max_depth, **checks)
    except OverflowError:
        return _kernel_pure.explore(n, frozen, state, table, max_depth, **checks)


class WeightTable:
    """Interns group elements of one kind as dense integer ids.

    Id 0 is always the identity.  Products and inverses are memoized, so a
    BFS run touches the group arithmetic only on first sight of a pair.
    """

    def __init__(self, kind: GroupKind):
        self.kind = kind
        ident = identity(kind)
        self.elements: list[GroupElement] = [ident]
        self.index: dict = {ident.payload: 0}
        self.mul_memo: dict = {}
        self.inv_memo: dict = {0: 0}

    def size(self) -> int:
        return len(self.elements)

    def intern(self, element: GroupElement) -> int:
        wid = self.index.get(element.payload)
        if wid is None:
            wid = len(self.elements)
            if wid >= MAX_WEIGHTS:
                raise OverflowError("weight table exceeded 2^21 distinct elements")
            self.elements.append(element)
            self.index[element.payload] = wid
        return wid

    def element(self, wid: int) -> GroupElement:
        return self.elements[wid]

    def mul(self, i: int, j: int) -> int:
        key = (i << 21) | j
        wid = self.mul_memo.get(key)
        if wid is None:
            wid = self.intern(multiply(self.elements[i], self.elements[j]))
            self.mul_memo[key] = wid
        return wid

    def inv(self, i: int) -> int:
        wid = self.inv_memo.get(i)
        if wid is None:
            wid = self.intern(invert(self.elements[i]))
            self.inv_memo[i] = wid
        return wid


class CompactQuiver:
    """A quiver lowered to the kernel form, remembering the id mappings."""

    def __init__(self, quiver: WeightedQuiver):
        self.vertex_ids = quiver.vertex_ids()
        index = {vid: n for n, vid in enumerate(self.vertex_ids)}
        self.frozen = tuple(v.frozen for v in quiver.vertices)
        self.table = WeightTable(quiver.group)
        triples = [
            (index[a.src], index[a.dst], self.table.intern(a.weight))
            for a in quiver.arrows
        ]
        self.state = _kernel_pure.state_from_arrows(triples, self.table)
        self.n = len(self.vertex_ids)

    def to_vertex_ids(self, indices) -> list[int]:
        return [self.vertex_ids[i] for i in indices]

    def class_arrow_info(self, cls) -> tuple:
        """(src id, dst id, weight text, multiplicity) for one signed class."""
        from .groups import format_element

        a, b, w, c = cls
        if c > 0:
            return (
                self.vertex_ids[a],
                self.vertex_ids[b],
                format_element(self.table.element(w)),
                c,
            )
        return (
            self.vertex_ids[b],
            self.vertex_ids[a],
            format_element(invert(self.table.element(w))),
            -c,
        )

    def quiver_from_state(self, state, group: GroupKind) -> WeightedQuiver:
        """Lift a kernel state back to a full quiver (fresh arrow ids)."""
        vertices = [
            Vertex(vid, self.frozen[n]) for n, vid in enumerate(self.vertex_ids)
        ]
        arrows = []
        aid = 1
        for a, b, w, c in state:
            element = self.table.element(w)
            src, dst = self.vertex_ids[a], self.vertex_ids[b]
            if c < 0:
                src, dst = dst, src
                element = invert(element)
                c = -c
            for _ in range(c):
                arrows.append(Arrow(aid, src, dst, element))
                aid += 1
        return WeightedQuiver(group, tuple(vertices), tuple(arrows))
