"""Vertex (gauge) equivalence of weight systems.

Two weight systems on the same quiver shape are equivalent when some vertex
function g carries one to the other via wt'(a) = g(i)^-1 wt(a) g(j).  On a
spanning tree every weight system normalizes to identity tree-weights, which
reduces the equivalence decision to simultaneous conjugacy of the non-tree
arrow weights by a single constant.  Conjugation is trivial for the abelian
kinds; for free groups the solution coset of the first nontrivial equation
is cyclic and is searched over a bounded exponent range, so the decision can
come back ``undecided`` when the bound is hit.
"""

from __future__ import annotations

from dataclasses import dataclass

from .groups import (
    FREE,
    GroupElement,
    identity,
    invert,
    multiply,
    product,
)
from .quiver import WeightedQuiver, check_valid, QuiverError
from .graphs import connected_components


@dataclass(frozen=True)
class WalkCycle:
    """A closed walk: ``steps`` of (arrow id, traversed forward) read from
    ``base``.  Vertices may repeat; arrows traversed backward contribute
    inverted weights."""

    base: int
    steps: tuple[tuple[int, bool], ...]

    def vertices(self, q: WeightedQuiver) -> list[int]:
        position = self.base
        out = [position]
        for aid, forward in self.steps:
            a = q.arrow(aid)
            if forward:
                if a.src != position:
                    raise QuiverError(f"broken walk at arrow {aid}")
                position = a.dst
            else:
                if a.dst != position:
                    raise QuiverError(f"broken walk at arrow {aid}")
                position = a.src
            out.append(position)
        if position != self.base:
            raise QuiverError("walk does not close")
        return out


def cycle_weight(q: WeightedQuiver, c: WalkCycle) -> GroupElement:
    """Ordered product of step weights, inverting backward traversals."""
    c.vertices(q)  # validates
    acc = identity(q.group)
    for aid, forward in c.steps:
        w = q.arrow(aid).weight
        acc = multiply(acc, w if forward else invert(w))
    return acc


# -- gauge transformations ---------------------------------------------------


def apply_gauge(q: WeightedQuiver, gauge: dict) -> WeightedQuiver:
    """wt'(a) = g(src)^-1 wt(a) g(dst); ``gauge`` must cover every vertex."""
    check_valid(q)
    for v in q.vertices:
        if v.id not in gauge:
            raise QuiverError(f"gauge missing vertex {v.id}")
    arrows = [
        a.__class__(
            a.id,
            a.src,
            a.dst,
            multiply(multiply(invert(gauge[a.src]), a.weight), gauge[a.dst]),
        )
        for a in q.arrows
    ]
    return q.replace_arrows(arrows)


def pointwise_inverse(gauge: dict) -> dict:
    return {v: invert(g) for v, g in gauge.items()}


def compose_gauges(first: dict, second: dict) -> dict:
    """Applying ``first`` then ``second`` equals applying the pointwise product."""
    return {v: multiply(first[v], second[v]) for v in first}


def identity_gauge(q: WeightedQuiver) -> dict:
    e = identity(q.group)
    return {v.id: e for v in q.vertices}


def mutate_gauge(gauge: dict, k: int) -> dict:
    """Mutation transports an equivalence witness unchanged: the same vertex
    function witnesses equivalence of the mutated quivers."""
    return dict(gauge)


# -- spanning trees and normalization ----------------------------------------


def _spanning_tree(q: WeightedQuiver, root: int, allowed: set):
    """BFS tree over the underlying undirected graph, neighbors ascending by
    (vertex id, arrow id).  Returns (order, parent_step) where parent_step
    maps vertex -> (arrow id, entered_forward)."""
    incident: dict[int, list[tuple[int, int, bool]]] = {v: [] for v in allowed}
    for a in q.arrows:
        if a.src in allowed and a.dst in allowed:
            incident[a.src].append((a.dst, a.id, True))
            incident[a.dst].append((a.src, a.id, False))
    for v in incident:
        incident[v].sort()
    order = [root]
    parent_step: dict[int, tuple[int, bool]] = {}
    seen = {root}
    head = 0
    while head < len(order):
        v = order[head]
        head += 1
        for w, aid, forward in incident[v]:
            if w not in seen:
                seen.add(w)
                parent_step[w] = (aid, forward)
                order.append(w)
    return order, parent_step


def tree_normalize(q: WeightedQuiver, root: int | None = None):
    """Gauge away all tree-arrow weights.

    Picks the BFS spanning tree from ``root`` (least vertex by default) and
    returns (gauge, normalized quiver) with every tree arrow of identity
    weight in the normalized quiver.  On a tree quiver all weights become
    identity.  Raises on disconnected input.
    """
    check_valid(q)
    ids = q.vertex_ids()
    if not ids:
        raise QuiverError("empty quiver")
    components = connected_components(ids, [(a.src, a.dst) for a in q.arrows])
    if len(components) > 1:
        raise QuiverError(f"quiver is disconnected: components {components}")
    if root is None:
        root = min(ids)
    q.vertex(root)
    gauge = _normalize_component(q, root, set(ids))
    return gauge, apply_gauge(q, gauge)


def _normalize_component(q: WeightedQuiver, root: int, allowed: set) -> dict:
    order, parent_step = _spanning_tree(q, root, allowed)
    gauge = {root: identity(q.group)}
    for v in order[1:]:
        aid, forward = parent_step[v]
        a = q.arrow(aid)
        if forward:  # arrow parent -> v; want gauge[v] = wt^-1 * gauge[parent]
            gauge[v] = multiply(invert(a.weight), gauge[a.src])
        else:  # arrow v -> parent; want gauge[v] = wt * gauge[parent]
            gauge[v] = multiply(a.weight, gauge[a.dst])
    return gauge


def fundamental_cycle(q: WeightedQuiver, root: int, allowed: set, aid: int) -> WalkCycle:
    """The cycle closed by non-tree arrow ``aid`` against the BFS tree."""
    order, parent_step = _spanning_tree(q, root, allowed)

    def path_from_root(v: int) -> list[tuple[int, bool]]:
        steps = []
        while v != root:
            step_aid, forward = parent_step[v]
            a = q.arrow(step_aid)
            steps.append((step_aid, forward))
            v = a.src if forward else a.dst
        return steps[::-1]

    a = q.arrow(aid)
    up = path_from_root(a.src)
    down = [(s, not f) for (s, f) in reversed(path_from_root(a.dst))]
    return WalkCycle(base=root, steps=tuple(up + [(aid, True)] + down))


# -- free group conjugacy helpers ---------------------------------------------


def _cyclic_reduce(word: tuple) -> tuple[tuple, tuple]:
    """word = prefix . core . prefix^-1 with core cyclically reduced."""
    core = list(word)
    prefix = []
    while len(core) >= 2 and core[0] == -core[-1]:
        prefix.append(core[0])
        core = core[1:-1]
    return tuple(core), tuple(prefix)


def _rotations(word: tuple):
    for m in range(len(word)):
        yield m, word[m:] + word[:m]


def _primitive_root(word: tuple) -> tuple:
    n = len(word)
    for d in range(1, n + 1):
        if n % d == 0 and word == word[:d] * (n // d):
            return word[:d]
    return word


def _conjugacy_solutions(kind, u: GroupElement, v: GroupElement):
    """For nontrivial u: a particular h0 with h0^-1 u h0 = v and the
    generator r of the solution coset r^k h0, or None if not conjugate."""
    cu, p = _cyclic_reduce(u.payload)
    cv, qq = _cyclic_reduce(v.payload)
    if len(cu) != len(cv):
        return None
    for m, rot in _rotations(cu):
        if rot == cv:
            # h0 = p . cu[:m] . q^-1
            h0 = multiply(
                GroupElement(kind, p + cu[:m]),
                invert(GroupElement(kind, qq)),
            )
            root_core = _primitive_root(cu)
            r = multiply(
                multiply(GroupElement(kind, p), GroupElement(kind, root_core)),
                invert(GroupElement(kind, p)),
            )
            return h0, r
    return None


# -- the equivalence decision --------------------------------------------------


@dataclass(frozen=True)
class EquivalenceResult:
    status: str  # "equivalent" | "not-equivalent" | "undecided"
    gauge: dict | None = None
    detail: dict | None = None

    def __bool__(self):
        return self.status == "equivalent"


def _same_shape(q1: WeightedQuiver, q2: WeightedQuiver) -> None:
    if q1.group != q2.group:
        raise QuiverError("group kinds differ")
    if tuple((v.id, v.frozen) for v in q1.vertices) != tuple(
        (v.id, v.frozen) for v in q2.vertices
    ):
        raise QuiverError("vertex sets differ")
    shape1 = sorted((a.id, a.src, a.dst) for a in q1.arrows)
    shape2 = sorted((a.id, a.src, a.dst) for a in q2.arrows)
    if shape1 != shape2:
        raise QuiverError("arrow shapes differ (same arrow ids required)")


def are_equivalent(
    q1: WeightedQuiver, q2: WeightedQuiver, conjugacy_bound: int = 64
) -> EquivalenceResult:
    """Decide (Q, wt) ~ (Q, wt') on the same quiver shape.

    Both weight systems are tree-normalized per connected component; any
    witness must then be constant per component, so the decision reduces to
    simultaneous conjugacy over the non-tree arrow weights.  A returned
    witness always verifies: apply_gauge(q1, gauge) == q2.
    """
    check_valid(q1)
    check_valid(q2)
    _same_shape(q1, q2)
    kind = q1.group
    abelian = kind.name != FREE

    gauge: dict = {}
    components = connected_components(
        q1.vertex_ids(), [(a.src, a.dst) for a in q1.arrows]
    )
    for component in components:
        allowed = set(component)
        root = min(component)
        n1 = _normalize_component(q1, root, allowed)
        n2 = _normalize_component(q2, root, allowed)
        norm1 = apply_gauge(q1, {**identity_gauge(q1), **n1})
        norm2 = apply_gauge(q2, {**identity_gauge(q2), **n2})
        _, tree_steps = _spanning_tree(q1, root, allowed)
        tree_arrows = {aid for aid, _ in tree_steps.values()}
        non_tree = [
            a.id
            for a in q1.arrows
            if a.src in allowed and a.dst in allowed and a.id not in tree_arrows
        ]
        pairs = [
            (norm1.arrow(aid).weight, norm2.arrow(aid).weight) for aid in non_tree
        ]

        h = None
        if abelian:
            for aid, (u, v) in zip(non_tree, pairs):
                if u != v:
                    cyc = fundamental_cycle(q1, root, allowed, aid)
                    return EquivalenceResult(
                        "not-equivalent",
                        detail={
                            "cycle": cyc,
                            "weight_a": cycle_weight(q1, cyc),
                            "weight_b": cycle_weight(q2, cyc),
                        },
                    )
            h = identity(kind)
        else:
            anchor = None
            for aid, (u, v) in zip(non_tree, pairs):
                if u.is_identity() != v.is_identity():
                    cyc = fundamental_cycle(q1, root, allowed, aid)
                    return EquivalenceResult(
                        "not-equivalent",
                        detail={
                            "cycle": cyc,
                            "weight_a": cycle_weight(q1, cyc),
                            "weight_b": cycle_weight(q2, cyc),
                        },
                    )
                if anchor is None and not u.is_identity():
                    anchor = (aid, u, v)
            if anchor is None:
                h = identity(kind)
            else:
                aid0, u0, v0 = anchor
                solutions = _conjugacy_solutions(kind, u0, v0)
                if solutions is None:
                    cyc = fundamental_cycle(q1, root, allowed, aid0)
                    return EquivalenceResult(
                        "not-equivalent",
                        detail={
                            "cycle": cyc,
                            "weight_a": cycle_weight(q1, cyc),
                            "weight_b": cycle_weight(q2, cyc),
                            "reason": "cycle weights not conjugate",
                        },
                    )
                h0, r = solutions

                def order_of_exponents():
                    yield 0
                    for k in range(1, conjugacy_bound + 1):
                        yield k
                        yield -k

                def power(base: GroupElement, k: int) -> GroupElement:
                    if k >= 0:
                        return product(kind, [base] * k)
                    return product(kind, [invert(base)] * (-k))

                for k in order_of_exponents():
                    candidate = multiply(power(r, k), h0)
                    inv_candidate = invert(candidate)
                    if all(
                        multiply(multiply(inv_candidate, u), candidate) == v
                        for (u, v) in pairs
                    ):
                        h = candidate
                        break
                if h is None:
                    return EquivalenceResult(
                        "undecided",
                        detail={"reason": f"conjugacy bound {conjugacy_bound} hit"},
                    )

        # overall witness on this component: n1(i) * h * n2(i)^-1
        for v in component:
            gauge[v] = multiply(multiply(n1[v], h), invert(n2[v]))

    witness_check = apply_gauge(q1, gauge)
    if witness_check != q2:
        raise AssertionError("constructed witness failed verification")
    return EquivalenceResult("equivalent", gauge=gauge)
