import random

import pytest

from conftest import build_quiver
from oracles import brute_force_undirected_cycles
from wquiv.equivalence import WalkCycle, cycle_weight
from wquiv.groups import format_element, free_kind, identity, invert, parse_element, trivial_kind
from wquiv.io import cn_member, unoriented_cycle_quiver
from wquiv.mutation import mutate
from wquiv.quiver import QuiverError
from wquiv.tame import (
    canonicalize_to_cycle,
    classify_tame,
    cn_membership,
    delta_free_cycles,
    euler_characteristic,
    is_oriented_cycle,
    reduce_cycle,
    triangles,
)

FREE1 = free_kind(1)
FREE2 = free_kind(2)
X1 = parse_element(FREE1, "x1")


def oriented_triangle(weights):
    return build_quiver(FREE2, 3, [(1, 2, weights[0]), (2, 3, weights[1]), (3, 1, weights[2])])


# -- triangles / Euler characteristic ----------------------------------------------


def test_triangle_trivial_product():
    w = parse_element(FREE2, "x1")
    q = oriented_triangle([w, invert(w), None])
    assert len(triangles(q)) == 1


def test_triangle_nontrivial_product_excluded():
    q = oriented_triangle([parse_element(FREE2, "x1"), None, None])
    assert triangles(q) == []


def test_unoriented_three_cycle_is_no_triangle():
    q = build_quiver(FREE2, 3, [(1, 2, None), (3, 2, None), (3, 1, None)])
    assert triangles(q) == []


def test_chi_tree_is_one():
    rng = random.Random(5)
    for _ in range(50):
        n = rng.randint(1, 7)
        arrows = []
        for v in range(2, n + 1):
            parent = rng.randint(1, v - 1)
            src, dst = (parent, v) if rng.random() < 0.5 else (v, parent)
            arrows.append((src, dst, None))
        q = build_quiver(FREE2, n, arrows)
        assert euler_characteristic(q) == 1


def test_chi_unoriented_cycle_zero():
    q = unoriented_cycle_quiver(5, FREE1, X1)
    assert euler_characteristic(q) == 0


def test_chi_trivial_triangle_is_one():
    q = oriented_triangle([None, None, None])
    assert euler_characteristic(q) == 3 - 3 + 1


# -- delta-free cycles ----------------------------------------------------------------


def test_delta_free_unoriented_cycle_unique():
    q = unoriented_cycle_quiver(6, FREE1, X1)
    cycles = delta_free_cycles(q)
    assert len(cycles) == 1
    assert len(cycles[0].steps) == 6


def test_delta_free_single_triangle_none():
    q = oriented_triangle([None, None, None])
    assert delta_free_cycles(q) == []


def test_delta_free_two_glued_triangles():
    # square 1-2-3-4 with trivial-weight triangles completed over two of its
    # sides: the only delta-free cycle is the square itself
    q = build_quiver(
        FREE2,
        6,
        [
            (1, 2, None),   # 1: square side, base of ear (1,2,5)
            (2, 5, None),   # 2: ear
            (5, 1, None),   # 3: ear
            (3, 4, None),   # 4: square side, base of ear (3,4,6)
            (4, 6, None),   # 5: ear
            (6, 3, None),   # 6: ear
            (2, 3, None),   # 7: square side
            (1, 4, None),   # 8: square side
        ],
    )
    tri = triangles(q)
    assert len(tri) == 2
    cycles = delta_free_cycles(q)
    # oracle cross-check: brute-force edge sets using <=1 edge per triangle
    edge_sets = brute_force_undirected_cycles((a.id, a.src, a.dst) for a in q.arrows)
    tri_sets = [set(t.arrow_ids) for t in tri]
    expected = [
        s for s in edge_sets if all(len(s & ts) <= 1 for ts in tri_sets)
    ]
    assert len(cycles) == len(expected)
    assert sorted(frozenset(a for a, _ in c.steps) for c in cycles) == sorted(
        frozenset(s) for s in expected
    )
    assert all(len(c.steps) == 4 for c in cycles)


def test_delta_free_matches_brute_force_on_random_quivers():
    from wquiv.io import random_quiver

    rng = random.Random(505)
    for _ in range(200):
        q = random_quiver(rng.randint(2, 5), FREE2, rng, density=0.7, weights="random")
        tri_sets = [set(t.arrow_ids) for t in triangles(q)]
        got = {frozenset(a for a, _ in c.steps) for c in delta_free_cycles(q)}
        edge_sets = brute_force_undirected_cycles((a.id, a.src, a.dst) for a in q.arrows)
        expected = {
            frozenset(s)
            for s in edge_sets
            if all(len(s & ts) <= 1 for ts in tri_sets)
        }
        assert got == expected


# -- reduce_cycle ------------------------------------------------------------------


def _attach_triangle(n=5):
    """Unoriented n-cycle with one triangle hung on the cycle arrow 2->3:
    the figure-2 shape."""
    q = unoriented_cycle_quiver(n, FREE1, X1)
    arrows = [(a.id, a.src, a.dst, a.weight) for a in q.arrows]
    # replace arrow e1: 2->3 by the path 2->v, v->3 plus keep e1, making
    # (e1*, 2->v, v->3) an oriented triangle of trivial weight
    extra = n + 1
    aid = q.next_arrow_id()
    from wquiv.quiver import Arrow, Vertex, WeightedQuiver

    e1 = q.arrow(2)
    vertices = tuple(list(q.vertices) + [Vertex(extra)])
    e = identity(FREE1)
    new_arrows = list(q.arrows) + [
        Arrow(aid, e1.dst, extra, e),        # 3 -> v
        Arrow(aid + 1, extra, e1.src, invert(e1.weight)),  # v -> 2 closing the triangle
    ]
    return WeightedQuiver(FREE1, vertices, tuple(new_arrows))


def test_reduce_cycle_figure2_weight_preserved():
    q = _attach_triangle(5)
    tri = triangles(q)
    assert len(tri) == 1
    # the long way around through the triangle, avoiding e1
    long_cycle = None
    for s in brute_force_undirected_cycles((a.id, a.src, a.dst) for a in q.arrows):
        if len(s) == 6:
            long_cycle = s
    assert long_cycle is not None
    from wquiv.graphs import simple_undirected_cycles

    steps = next(
        c
        for c in simple_undirected_cycles((a.id, a.src, a.dst) for a in q.arrows)
        if frozenset(a for a, _ in c) == long_cycle
    )
    aid, fwd = steps[0]
    a = q.arrow(aid)
    cyc = WalkCycle(base=a.src if fwd else a.dst, steps=steps)
    before = cycle_weight(q, cyc)
    reduced = reduce_cycle(q, cyc)
    assert len(reduced.steps) == 5
    assert cycle_weight(q, reduced) in (before, invert(before))


def test_reduce_cycle_fixpoints():
    q = unoriented_cycle_quiver(4, FREE1, X1)
    cycles = delta_free_cycles(q)
    assert reduce_cycle(q, cycles[0]) == cycles[0]
    tri_quiver = oriented_triangle([None, None, None])
    cyc = WalkCycle(base=1, steps=((1, True), (2, True), (3, True)))
    assert reduce_cycle(tri_quiver, cyc) == cyc


# -- C_n(t) membership ----------------------------------------------------------------


def test_cn_member_unoriented_cycle():
    q = unoriented_cycle_quiver(5, FREE1, X1)
    verdict = cn_membership(q)
    assert verdict.member
    assert format_element(verdict.t) in ("x1", "x1^-1")


def test_cn_tree_fails_chi():
    q = build_quiver(FREE1, 3, [(1, 2, None), (2, 3, None)])
    verdict = cn_membership(q)
    assert not verdict.member and verdict.violated == 2
    assert verdict.witness["chi"] == 1


def test_cn_oriented_cycle_fails_condition_3():
    q = build_quiver(FREE1, 5, [(1, 2, None), (2, 3, None), (3, 4, None), (4, 5, None), (5, 1, None)])
    verdict = cn_membership(q)
    assert not verdict.member and verdict.violated == 3


def test_cn_trivial_weight_cycle_fails_condition_3():
    q = build_quiver(FREE1, 4, [(1, 2, None), (2, 3, None), (3, 4, None), (1, 4, None)])
    verdict = cn_membership(q)
    assert not verdict.member and verdict.violated == 3
    assert "trivial_weight_cycle" in verdict.witness


def test_cn_requires_connected():
    q = build_quiver(FREE1, 4, [(1, 2, X1), (3, 4, None)])
    with pytest.raises(QuiverError):
        cn_membership(q)


def test_cn_membership_closed_under_mutation():
    rng = random.Random(31)
    for _ in range(60):
        n = rng.randint(3, 7)
        q = cn_member(n, FREE1, rng)
        base = cn_membership(q)
        assert base.member
        for k in q.mutable_ids():
            step = mutate(q, k).result
            verdict = cn_membership(step)
            assert verdict.member
            assert format_element(verdict.t) in (
                format_element(base.t),
                format_element(invert(base.t)),
            )
            assert euler_characteristic(step) == 0


def test_cn_no_trivial_weight_simple_cycles_besides_triangles():
    rng = random.Random(32)
    for _ in range(40):
        n = rng.randint(3, 7)
        q = cn_member(n, FREE1, rng)
        tri_sets = {t.edge_set() for t in triangles(q)}
        from wquiv.graphs import simple_undirected_cycles

        for steps in simple_undirected_cycles((a.id, a.src, a.dst) for a in q.arrows):
            aid, fwd = steps[0]
            a = q.arrow(aid)
            cyc = WalkCycle(base=a.src if fwd else a.dst, steps=steps)
            if cycle_weight(q, cyc).is_identity():
                assert frozenset(x for x, _ in steps) in tri_sets


# -- canonicalization -----------------------------------------------------------------


def test_canonicalize_already_cycle():
    q = unoriented_cycle_quiver(5, FREE1, X1)
    sequence, final = canonicalize_to_cycle(q)
    assert sequence == []
    assert final == q


def test_canonicalize_one_attached_triangle():
    rng = random.Random(99)
    # build a member whose delta-free cycle is one short of n
    for _ in range(50):
        n = rng.randint(4, 7)
        q = cn_member(n, FREE1, rng, reverse_steps=1)
        membership = cn_membership(q)
        if len(membership.cycle.steps) == n:
            continue
        assert len(membership.cycle.steps) == n - 1
        sequence, final = canonicalize_to_cycle(q)
        assert len(sequence) == 1
        verdict = cn_membership(final)
        assert len(verdict.cycle.steps) == n
        return
    pytest.skip("random member search never left the plain cycle")


def test_canonicalize_roundtrip_from_reverse_mutations():
    rng = random.Random(404)
    for _ in range(40):
        n = rng.randint(4, 8)
        q = cn_member(n, FREE1, rng)
        membership = cn_membership(q)
        sequence, final = canonicalize_to_cycle(q)
        assert len(sequence) <= n - len(membership.cycle.steps)
        verdict = cn_membership(final)
        assert verdict.member
        assert len(verdict.cycle.steps) == n
        assert not is_oriented_cycle(final, verdict.cycle)
        assert format_element(verdict.t) in ("x1", "x1^-1")


# -- classify -----------------------------------------------------------------------


def test_classify_tree_gauge_trivial():
    rng = random.Random(3)
    from wquiv.io import random_element

    arrows = [(1, 2, random_element(FREE2, rng)), (3, 2, random_element(FREE2, rng))]
    q = build_quiver(FREE2, 3, arrows)
    verdict = classify_tame(q)
    assert verdict.kind == "gauge-trivial"
    assert verdict.gauge is not None


def test_classify_unoriented_cycle_member():
    q = unoriented_cycle_quiver(4, FREE1, X1)
    verdict = classify_tame(q)
    assert verdict.kind == "cn-member"
    assert format_element(verdict.membership.t) in ("x1", "x1^-1")


def test_classify_unknown():
    # wild: double arrows with incoherent weights (chi != 0 and not gauge-trivial)
    x1 = parse_element(FREE2, "x1")
    x2 = parse_element(FREE2, "x2")
    q = build_quiver(FREE2, 2, [(1, 2, x1), (1, 2, x2), (2, 1, None) ])
    # the 2-cycle pair (1->2 x1 against 2->1 e) is nontrivial; quiver valid
    verdict = classify_tame(q)
    assert verdict.kind == "unknown"
