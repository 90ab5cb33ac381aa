"""Weighted quiver data model: vertices with frozen flags, arrow multisets
with group-valued weights, validation, and the integer exchange-matrix view.

Quivers are immutable values.  Equality is *labeled* equality: same vertex
ids and frozen flags, same multiset of (src, dst, weight) triples — arrow ids
are bookkeeping only and are ignored by ``==`` and by the canonical key.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .groups import GroupElement, GroupKind, format_element, multiply


class QuiverError(ValueError):
    """Structural misuse: unknown vertices, invalid quivers, bad operations."""


@dataclass(frozen=True)
class Vertex:
    id: int
    frozen: bool = False


@dataclass(frozen=True)
class Arrow:
    id: int
    src: int
    dst: int
    weight: GroupElement


def _sort_key(arrow: Arrow):
    return (arrow.src, arrow.dst, format_element(arrow.weight), arrow.id)


@dataclass(frozen=True, eq=False)
class WeightedQuiver:
    group: GroupKind
    vertices: tuple[Vertex, ...]
    arrows: tuple[Arrow, ...]
    _by_id: dict = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        object.__setattr__(
            self, "vertices", tuple(sorted(self.vertices, key=lambda v: v.id))
        )
        object.__setattr__(self, "arrows", tuple(sorted(self.arrows, key=_sort_key)))
        object.__setattr__(self, "_by_id", {a.id: a for a in self.arrows})

    # -- lookups ---------------------------------------------------------

    def vertex_ids(self) -> list[int]:
        return [v.id for v in self.vertices]

    def mutable_ids(self) -> list[int]:
        return [v.id for v in self.vertices if not v.frozen]

    def frozen_ids(self) -> list[int]:
        return [v.id for v in self.vertices if v.frozen]

    def has_vertex(self, vid: int) -> bool:
        return any(v.id == vid for v in self.vertices)

    def vertex(self, vid: int) -> Vertex:
        for v in self.vertices:
            if v.id == vid:
                return v
        raise QuiverError(f"no vertex {vid}")

    def arrow(self, aid: int) -> Arrow:
        try:
            return self._by_id[aid]
        except KeyError:
            raise QuiverError(f"no arrow with id {aid}") from None

    def arrows_from(self, vid: int) -> list[Arrow]:
        return [a for a in self.arrows if a.src == vid]

    def arrows_to(self, vid: int) -> list[Arrow]:
        return [a for a in self.arrows if a.dst == vid]

    def arrows_at(self, vid: int) -> list[Arrow]:
        return [a for a in self.arrows if vid in (a.src, a.dst)]

    def next_arrow_id(self) -> int:
        return max((a.id for a in self.arrows), default=0) + 1

    def replace_arrows(self, arrows) -> "WeightedQuiver":
        return WeightedQuiver(self.group, self.vertices, tuple(arrows))

    # -- labeled equality --------------------------------------------------

    def labeled_key(self):
        """Canonical hashable key; two quivers are equal iff keys are equal."""
        return (
            self.group,
            tuple((v.id, v.frozen) for v in self.vertices),
            tuple(sorted((a.src, a.dst, format_element(a.weight)) for a in self.arrows)),
        )

    def __eq__(self, other):
        if not isinstance(other, WeightedQuiver):
            return NotImplemented
        return self.labeled_key() == other.labeled_key()

    def __hash__(self):
        return hash(self.labeled_key())

    def __repr__(self):
        arrows = ", ".join(
            f"{a.src}->{a.dst}[{format_element(a.weight)}]" for a in self.arrows
        )
        return f"WeightedQuiver({self.group}; {len(self.vertices)} vertices; {arrows})"


def validate(q: WeightedQuiver) -> list[str]:
    """Every violated invariant as a message; empty list iff the quiver is valid."""
    violations = []
    seen_v = set()
    for v in q.vertices:
        if v.id in seen_v:
            violations.append(f"duplicate vertex id {v.id}")
        seen_v.add(v.id)
    seen_a = set()
    for a in q.arrows:
        if a.id in seen_a:
            violations.append(f"duplicate arrow id {a.id}")
        seen_a.add(a.id)
        if a.src == a.dst:
            violations.append(f"loop at {a.src} (arrow {a.id})")
        if a.src not in seen_v:
            violations.append(f"arrow {a.id} has unknown source {a.src}")
        if a.dst not in seen_v:
            violations.append(f"arrow {a.id} has unknown target {a.dst}")
        if a.weight.kind != q.group:
            violations.append(
                f"weight kind mismatch on arrow {a.id}: "
                f"{a.weight.kind} in a {q.group} quiver"
            )
    return violations


def check_valid(q: WeightedQuiver) -> None:
    violations = validate(q)
    if violations:
        raise QuiverError("; ".join(violations))


def two_cycles(q: WeightedQuiver) -> list[tuple[Arrow, Arrow, bool]]:
    """All opposite-arrow pairs (a: i->j, b: j->i), each with the
    triviality of the cycle weight wt(a)*wt(b)."""
    by_pair: dict[tuple[int, int], list[Arrow]] = {}
    for a in q.arrows:
        by_pair.setdefault((a.src, a.dst), []).append(a)
    out = []
    for (i, j), fwd in sorted(by_pair.items()):
        if i >= j:
            continue
        for a in fwd:
            for b in by_pair.get((j, i), ()):
                out.append((a, b, multiply(a.weight, b.weight).is_identity()))
    return out


def has_two_cycle(q: WeightedQuiver) -> bool:
    pairs = {(a.src, a.dst) for a in q.arrows}
    return any((j, i) in pairs for (i, j) in pairs)


def exchange_matrix(q: WeightedQuiver) -> "ExchangeMatrix":
    """Skew-symmetric matrix of signed arrow counts b_ij = #(i->j) - #(j->i).

    Defined only for 2-cycle-free quivers, where the counts do not conflate.
    """
    check_valid(q)
    if has_two_cycle(q):
        raise QuiverError("exchange matrix undefined: quiver has a 2-cycle")
    ids = q.vertex_ids()
    index = {vid: n for n, vid in enumerate(ids)}
    b = np.zeros((len(ids), len(ids)), dtype=np.int64)
    for a in q.arrows:
        b[index[a.src], index[a.dst]] += 1
        b[index[a.dst], index[a.src]] -= 1
    return ExchangeMatrix(vertex_ids=tuple(ids), matrix=b)


@dataclass(frozen=True)
class ExchangeMatrix:
    vertex_ids: tuple[int, ...]
    matrix: np.ndarray

    def entry(self, i: int, j: int) -> int:
        idx = {vid: n for n, vid in enumerate(self.vertex_ids)}
        return int(self.matrix[idx[i], idx[j]])
