"""Classification machinery for tame weighted quivers.

Triangles are oriented 3-cycles of trivial weight; filling them in gives the
Euler characteristic |Q0| - |Q1| + |Q2|.  The class C_n(t) characterizes the
nontrivially-weighted tame quivers of affine type A: every member carries a
unique unoriented triangle-free cycle of weight t, and mutation moves within
the class, eventually straightening every member into a plain n-cycle.
"""

from __future__ import annotations

from dataclasses import dataclass

from .equivalence import WalkCycle, are_equivalent, cycle_weight
from .graphs import is_connected, simple_undirected_cycles
from .groups import GroupElement, identity, product
from .mutation import mutate
from .quiver import WeightedQuiver, check_valid, QuiverError

ENUMERATION_CYCLOMATIC_CAP = 8


@dataclass(frozen=True)
class Triangle:
    """An oriented 3-cycle of trivial weight; ``arrow_ids`` in cycle order,
    rotated so the least id comes first."""

    arrow_ids: tuple[int, int, int]

    def edge_set(self) -> frozenset:
        return frozenset(self.arrow_ids)


def triangles(q: WeightedQuiver) -> list[Triangle]:
    check_valid(q)
    outgoing: dict[int, list] = {}
    for a in q.arrows:
        outgoing.setdefault(a.src, []).append(a)
    for v in outgoing:
        outgoing[v].sort(key=lambda a: a.id)
    seen = set()
    out = []
    for a in q.arrows:
        for b in outgoing.get(a.dst, ()):
            if b.dst in (a.src, a.dst):
                continue
            for c in outgoing.get(b.dst, ()):
                if c.dst != a.src:
                    continue
                key = frozenset((a.id, b.id, c.id))
                if key in seen:
                    continue
                if product(q.group, [a.weight, b.weight, c.weight]).is_identity():
                    seen.add(key)
                    ids = (a.id, b.id, c.id)
                    least = ids.index(min(ids))
                    out.append(Triangle(ids[least:] + ids[:least]))
    return sorted(out, key=lambda t: t.arrow_ids)


def euler_characteristic(q: WeightedQuiver) -> int:
    check_valid(q)
    return len(q.vertices) - len(q.arrows) + len(triangles(q))


def _cycle_is_delta_free(steps, triangle_edges) -> bool:
    used = {aid for aid, _ in steps}
    return all(len(used & edges) <= 1 for edges in triangle_edges)


def delta_free_cycles(q: WeightedQuiver) -> list[WalkCycle]:
    """All simple cycles of the underlying multigraph using at most one edge
    of any triangle, canonicalized (least base vertex, lexicographically
    least direction); gamma and gamma^-1 are one cycle."""
    check_valid(q)
    triangle_edges = [t.edge_set() for t in triangles(q)]
    out = []
    for steps in simple_undirected_cycles((a.id, a.src, a.dst) for a in q.arrows):
        if _cycle_is_delta_free(steps, triangle_edges):
            aid, forward = steps[0]
            a = q.arrow(aid)
            base = a.src if forward else a.dst
            out.append(WalkCycle(base=base, steps=tuple(steps)))
    return out


def is_oriented_cycle(q: WeightedQuiver, c: WalkCycle) -> bool:
    directions = {forward for _, forward in c.steps}
    return len(directions) == 1


def reduce_cycle(q: WeightedQuiver, c: WalkCycle) -> WalkCycle:
    """Apply the triangle reduction: two consecutive cycle edges lying in one
    triangle are replaced by its third edge, preserving the cycle weight read
    at the basepoint, until the cycle is a triangle or triangle-free.

    Reduction order is deterministic (leftmost reducible pair); the end
    result is not claimed unique.  The basepoint is kept fixed except when
    the only reducible pair is centered there, in which case the cycle is
    rotated first (conjugating the weight).
    """
    check_valid(q)
    tri_list = triangles(q)
    by_edge: dict[int, list[Triangle]] = {}
    for t in tri_list:
        for aid in t.arrow_ids:
            by_edge.setdefault(aid, []).append(t)

    steps = list(c.steps)
    base = c.base

    def shared_triangle(aid1, aid2):
        for t in by_edge.get(aid1, ()):
            if aid2 in t.arrow_ids and aid1 != aid2:
                return t
        return None

    while True:
        length = len(steps)
        if length <= 2:
            break
        cycle_edges = {aid for aid, _ in steps}
        if length == 3 and any(
            t.edge_set() == cycle_edges for t in tri_list
        ):
            break  # the cycle is itself a triangle
        reducible = []
        for n in range(length):
            t = shared_triangle(steps[n][0], steps[(n + 1) % length][0])
            if t is None:
                continue
            third = next(
                aid for aid in t.arrow_ids
                if aid not in (steps[n][0], steps[(n + 1) % length][0])
            )
            if third in cycle_edges:
                continue  # replacement would reuse an edge already on the cycle
            reducible.append((n, t, third))
        if not reducible:
            break
        vertices = WalkCycle(base=base, steps=tuple(steps)).vertices(q)
        choice = None
        for n, t, third in reducible:
            middle = vertices[(n + 1) % length]
            if middle != base:
                choice = (n, t, third)
                break
        if choice is None:
            # rotate so the pair is interior, conjugating the weight
            n, t, third = reducible[0]
            steps = steps[-1:] + steps[:-1]
            base = vertices[length - 1]
            continue
        n, t, third = choice
        weight_before = cycle_weight(q, WalkCycle(base=base, steps=tuple(steps)))
        u = vertices[n]
        w = vertices[(n + 2) % length]
        third_arrow = q.arrow(third)
        if third_arrow.src == u and third_arrow.dst == w:
            new_step = (third, True)
        elif third_arrow.src == w and third_arrow.dst == u:
            new_step = (third, False)
        else:
            raise AssertionError("triangle third edge does not span the gap")
        if n + 1 < length:
            steps = steps[:n] + [new_step] + steps[n + 2:]
        else:  # pair wraps around; middle vertex is steps[0]'s start == base handled above
            steps = [new_step] + steps[1:-1]
        after = WalkCycle(base=base, steps=tuple(steps))
        if cycle_weight(q, after) != weight_before:
            raise AssertionError("reduction step changed the cycle weight")
    return WalkCycle(base=base, steps=tuple(steps))


# -- the class C_n(t) ----------------------------------------------------------


@dataclass(frozen=True)
class CnMembership:
    member: bool
    t: GroupElement | None = None
    cycle: WalkCycle | None = None
    violated: int | None = None
    witness: dict | None = None

    def __bool__(self):
        return self.member


def _degree_counts(q: WeightedQuiver) -> dict[int, int]:
    deg = {v.id: 0 for v in q.vertices}
    for a in q.arrows:
        deg[a.src] += 1
        deg[a.dst] += 1
    return deg


def _triangle_count_at(q: WeightedQuiver, tri_list) -> dict[int, int]:
    count = {v.id: 0 for v in q.vertices}
    for t in tri_list:
        vertices = set()
        for aid in t.arrow_ids:
            a = q.arrow(aid)
            vertices.add(a.src)
            vertices.add(a.dst)
        for v in vertices:
            count[v] += 1
    return count


def _delta_free_via_reduction(q: WeightedQuiver, tri_list) -> list[WalkCycle]:
    """Fallback for large cyclomatic number, valid under conditions (1)-(2):
    delete one edge per triangle, find the unique graph cycle, reduce."""
    deleted = {max(t.arrow_ids) for t in tri_list}
    kept = [(a.id, a.src, a.dst) for a in q.arrows if a.id not in deleted]
    # leaf pruning exposes the unique cycle of a connected chi=0 graph
    incident: dict[int, list] = {v.id: [] for v in q.vertices}
    for aid, s, d in kept:
        incident[s].append((aid, s, d))
        incident[d].append((aid, s, d))
    removed_edges: set[int] = set()
    changed = True
    while changed:
        changed = False
        for v, edges in incident.items():
            live = [e for e in edges if e[0] not in removed_edges]
            if len(live) == 1:
                removed_edges.add(live[0][0])
                changed = True
    core = [e for e in kept if e[0] not in removed_edges]
    cycles = simple_undirected_cycles(core)
    if len(cycles) != 1:
        return delta_free_cycles(q)  # defensive fallback
    steps = cycles[0]
    aid, forward = steps[0]
    a = q.arrow(aid)
    base = a.src if forward else a.dst
    reduced = reduce_cycle(q, WalkCycle(base=base, steps=tuple(steps)))
    triangle_sets = [t.edge_set() for t in tri_list]
    if not _cycle_is_delta_free(reduced.steps, triangle_sets):
        return delta_free_cycles(q)
    return [reduced]


def cn_membership(q: WeightedQuiver, enumeration_cap: int = ENUMERATION_CYCLOMATIC_CAP) -> CnMembership:
    """Check the defining conditions of C_n(t) in order, returning the first
    violation with a witness, or the membership data (t, the cycle)."""
    check_valid(q)
    ids = q.vertex_ids()
    edge_pairs = [(a.src, a.dst) for a in q.arrows]
    if not is_connected(ids, edge_pairs):
        raise QuiverError("C_n(t) membership requires a connected quiver")

    tri_list = triangles(q)

    # (1) no edge in more than one triangle
    per_edge: dict[int, list[Triangle]] = {}
    for t in tri_list:
        for aid in t.arrow_ids:
            per_edge.setdefault(aid, []).append(t)
    for aid in sorted(per_edge):
        if len(per_edge[aid]) > 1:
            return CnMembership(
                member=False,
                violated=1,
                witness={
                    "arrow": aid,
                    "triangles": [t.arrow_ids for t in per_edge[aid]],
                },
            )

    # (2) Euler characteristic zero
    chi = len(q.vertices) - len(q.arrows) + len(tri_list)
    if chi != 0:
        return CnMembership(member=False, violated=2, witness={"chi": chi})

    # (3) the unique triangle-free cycle is unoriented with nontrivial weight
    cyclomatic = len(q.arrows) - len(q.vertices) + 1
    if cyclomatic <= enumeration_cap:
        cycles = delta_free_cycles(q)
    else:
        cycles = _delta_free_via_reduction(q, tri_list)
    if len(cycles) != 1:
        return CnMembership(
            member=False,
            violated=3,
            witness={"delta_free_cycle_count": len(cycles)},
        )
    cycle = cycles[0]
    if is_oriented_cycle(q, cycle):
        return CnMembership(
            member=False, violated=3, witness={"oriented_cycle": cycle.steps}
        )
    t = cycle_weight(q, cycle)
    if t.is_identity():
        return CnMembership(
            member=False, violated=3, witness={"trivial_weight_cycle": cycle.steps}
        )

    # (4) valency conditions
    deg = _degree_counts(q)
    tri_at = _triangle_count_at(q, tri_list)
    for v in sorted(deg):
        if deg[v] > 4:
            return CnMembership(
                member=False, violated=4, witness={"vertex": v, "degree": deg[v]}
            )
        if deg[v] == 3 and tri_at[v] != 1:
            return CnMembership(
                member=False,
                violated=4,
                witness={"vertex": v, "degree": 3, "triangles": tri_at[v]},
            )
        if deg[v] == 4 and tri_at[v] != 2:
            return CnMembership(
                member=False,
                violated=4,
                witness={"vertex": v, "degree": 4, "triangles": tri_at[v]},
            )
    return CnMembership(member=True, t=t, cycle=cycle)


def canonicalize_to_cycle(q: WeightedQuiver):
    """Mutate a C_n(t) member until its triangle-free cycle spans all n
    vertices.  Each step picks the triangle with one side on the cycle whose
    cycle-side arrow id is least and mutates at the opposite vertex; the
    intermediate quivers must stay members (a breach is an internal error).
    Returns (mutation sequence, final quiver)."""
    membership = cn_membership(q)
    if not membership:
        raise QuiverError(
            f"not a C_n(t) member: condition {membership.violated} fails "
            f"({membership.witness})"
        )
    n = len(q.vertices)
    sequence = []
    current = q
    while len(membership.cycle.steps) < n:
        cycle_edges = {aid for aid, _ in membership.cycle.steps}
        tri_list = triangles(current)
        candidates = []
        for t in tri_list:
            on_cycle = sorted(set(t.arrow_ids) & cycle_edges)
            if len(on_cycle) == 1:
                candidates.append((on_cycle[0], t))
        if not candidates:
            raise AssertionError(
                "no triangle with exactly one side on the minimal cycle"
            )
        side_aid, t = min(candidates, key=lambda item: item[0])
        side = current.arrow(side_aid)
        side_ends = {side.src, side.dst}
        opposite = None
        for aid in t.arrow_ids:
            a = current.arrow(aid)
            for v in (a.src, a.dst):
                if v not in side_ends:
                    opposite = v
        if opposite is None:
            raise AssertionError("degenerate triangle")
        record = mutate(current, opposite)
        sequence.append(opposite)
        current = record.result
        previous_len = len(membership.cycle.steps)
        membership = cn_membership(current)
        if not membership:
            raise AssertionError(
                f"mutation at {opposite} left C_n(t): condition "
                f"{membership.violated} ({membership.witness})"
            )
        if len(membership.cycle.steps) != previous_len + 1:
            raise AssertionError("minimal cycle length did not grow by one")
    return sequence, current


@dataclass(frozen=True)
class TameVerdict:
    kind: str  # "gauge-trivial" | "cn-member" | "unknown"
    gauge: dict | None = None
    membership: CnMembership | None = None


def classify_tame(q: WeightedQuiver) -> TameVerdict:
    """Gauge-trivial (with witness) if the weights gauge away; else C_n(t)
    membership; else unknown (mutation-equivalence to tame acyclic quivers
    is not decided in general)."""
    check_valid(q)
    if not is_connected(q.vertex_ids(), [(a.src, a.dst) for a in q.arrows]):
        raise QuiverError("classification requires a connected quiver")
    trivial_weights = q.replace_arrows(
        a.__class__(a.id, a.src, a.dst, identity(q.group)) for a in q.arrows
    )
    result = are_equivalent(q, trivial_weights)
    if result.status == "equivalent":
        return TameVerdict(kind="gauge-trivial", gauge=result.gauge)
    membership = cn_membership(q)
    if membership:
        return TameVerdict(kind="cn-member", membership=membership)
    return TameVerdict(kind="unknown")
