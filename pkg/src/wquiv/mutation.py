"""Mutation of weighted quivers.

Mutation at a vertex k splits into a premutation (compose through k, then
reverse every arrow at k with inverted weight) followed by weight reduction
(maximal removal of oriented 2-cycles whose weight product is the identity).
The result may retain 2-cycles of nontrivial weight; those block further
mutation at every vertex under the strict reading, or at their endpoints
only when ``lenient`` is set.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .groups import invert, multiply
from .quiver import Arrow, WeightedQuiver, check_valid, has_two_cycle


class MutationError(ValueError):
    """Illegal mutation: frozen vertex, unknown vertex, or blocking 2-cycle."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


@dataclass(frozen=True)
class PremutationResult:
    """The intermediate quiver with composite arrows [ab] and reversed arrows.

    ``provenance`` maps each new arrow id to ("composite", a_id, b_id) or
    ("reversed", old_id); untouched arrows keep their ids and do not appear.
    """

    quiver: WeightedQuiver
    provenance: dict = field(default_factory=dict)


@dataclass(frozen=True)
class MutationRecord:
    vertex: int
    cancelled: tuple[tuple[int, int], ...]
    result: WeightedQuiver


def _check_mutable(q: WeightedQuiver, k: int, lenient: bool) -> None:
    check_valid(q)
    v = q.vertex(k)  # raises on unknown vertex
    if v.frozen:
        raise MutationError(f"vertex {k} is frozen")
    pairs = {(a.src, a.dst) for a in q.arrows}
    cycles = [(i, j) for (i, j) in pairs if (j, i) in pairs and i < j]
    if not cycles:
        return
    if lenient and all(k not in pair for pair in cycles):
        return
    i, j = cycles[0]
    raise MutationError(
        f"mutation at {k} undefined: quiver has an oriented 2-cycle "
        f"between {i} and {j}"
    )


def premutate(q: WeightedQuiver, k: int, lenient: bool = False) -> PremutationResult:
    """Steps 1-2 of mutation: add composites [ab]: i->j with weight
    wt(a)wt(b) for every a: i->k, b: k->j, then reverse all arrows at k
    with inverted weights."""
    _check_mutable(q, k, lenient)
    incoming = sorted((a for a in q.arrows if a.dst == k), key=lambda a: a.id)
    outgoing = sorted((a for a in q.arrows if a.src == k), key=lambda a: a.id)

    next_id = q.next_arrow_id()
    new_arrows: list[Arrow] = [a for a in q.arrows if k not in (a.src, a.dst)]
    provenance: dict[int, tuple] = {}
    for a in incoming:
        for b in outgoing:
            composite = Arrow(next_id, a.src, b.dst, multiply(a.weight, b.weight))
            new_arrows.append(composite)
            provenance[next_id] = ("composite", a.id, b.id)
            next_id += 1
    for a in incoming + outgoing:
        reversed_arrow = Arrow(next_id, a.dst, a.src, invert(a.weight))
        new_arrows.append(reversed_arrow)
        provenance[next_id] = ("reversed", a.id)
        next_id += 1
    return PremutationResult(q.replace_arrows(new_arrows), provenance)


def weight_reduce(q: WeightedQuiver) -> MutationRecord:
    """Maximal cancellation of trivial-weight 2-cycles.

    For every vertex pair {i, j} and weight value g, exactly
    min(#(i->j with weight g), #(j->i with weight g^-1)) pairs are removed,
    lowest arrow ids first.  The output has no trivial-weight 2-cycle.
    """
    check_valid(q)
    by_class: dict[tuple, list[Arrow]] = {}
    for a in q.arrows:
        by_class.setdefault((a.src, a.dst, a.weight.payload), []).append(a)

    removed: set[int] = set()
    cancelled: list[tuple[int, int]] = []
    for (i, j, _), fwd in sorted(by_class.items(), key=lambda kv: kv[0][:2]):
        if i > j:
            continue
        g = fwd[0].weight
        bwd = by_class.get((j, i, invert(g).payload))
        if not bwd:
            continue
        fwd_ids = sorted(a.id for a in fwd if a.id not in removed)
        bwd_ids = sorted(b.id for b in bwd if b.id not in removed)
        for a_id, b_id in zip(fwd_ids, bwd_ids):
            removed.add(a_id)
            removed.add(b_id)
            cancelled.append((a_id, b_id))
    kept = [a for a in q.arrows if a.id not in removed]
    return MutationRecord(
        vertex=-1, cancelled=tuple(cancelled), result=q.replace_arrows(kept)
    )


def mutate(q: WeightedQuiver, k: int, lenient: bool = False) -> MutationRecord:
    """Full mutation at k: premutation followed by weight reduction."""
    pre = premutate(q, k, lenient=lenient)
    reduced = weight_reduce(pre.quiver)
    return MutationRecord(vertex=k, cancelled=reduced.cancelled, result=reduced.result)


def mutate_sequence(
    q: WeightedQuiver, ks, lenient: bool = False
) -> list[MutationRecord]:
    """Apply mutations left to right; failures re-raise with the failing index."""
    records = []
    current = q
    for n, k in enumerate(ks):
        try:
            record = mutate(current, k, lenient=lenient)
        except MutationError as err:
            raise MutationError(f"step {n} (vertex {k}): {err}", index=n) from None
        records.append(record)
        current = record.result
    return records
