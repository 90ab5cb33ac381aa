"""Small graph algorithms on quiver arrow lists.

Strongly connected components (iterative Tarjan) and simple-cycle
enumeration in the underlying multigraph, where every arrow is traversable
in both directions, each arrow is used at most once, and vertices are
distinct.  Cycle counts are bounded by 2^(cyclomatic number), so exhaustive
enumeration is cheap on the sparse quivers this package deals with.
"""

from __future__ import annotations


def strongly_connected_components(vertex_ids, edges) -> list[list[int]]:
    """Tarjan's algorithm, iterative.  ``edges`` is an iterable of (src, dst);
    parallel edges are fine.  Components come out in a deterministic order
    and each is sorted."""
    adjacency: dict[int, list[int]] = {v: [] for v in vertex_ids}
    for s, d in edges:
        adjacency[s].append(d)
    for v in adjacency:
        adjacency[v].sort()

    index_of: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    components: list[list[int]] = []
    counter = 0

    for root in sorted(adjacency):
        if root in index_of:
            continue
        work = [(root, iter(adjacency[root]))]
        index_of[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index_of:
                    index_of[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(adjacency[w])))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index_of[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index_of[v]:
                component = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    component.append(w)
                    if w == v:
                        break
                components.append(sorted(component))
    return components


def connected_components(vertex_ids, edges) -> list[list[int]]:
    """Components of the underlying undirected graph."""
    adjacency: dict[int, set[int]] = {v: set() for v in vertex_ids}
    for s, d in edges:
        adjacency[s].add(d)
        adjacency[d].add(s)
    seen: set[int] = set()
    components = []
    for root in sorted(adjacency):
        if root in seen:
            continue
        queue = [root]
        seen.add(root)
        component = []
        while queue:
            v = queue.pop()
            component.append(v)
            for w in adjacency[v]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        components.append(sorted(component))
    return components


def is_connected(vertex_ids, edges) -> bool:
    ids = list(vertex_ids)
    if not ids:
        return True
    return len(connected_components(ids, edges)) == 1


def simple_undirected_cycles(arrows) -> list[tuple[tuple[int, bool], ...]]:
    """All simple cycles of the underlying multigraph, canonicalized.

    ``arrows`` is an iterable of (arrow_id, src, dst).  A cycle is returned
    as a tuple of (arrow_id, forward) steps read from its base vertex; each
    arrow appears at most once, vertices are distinct, and length >= 2.
    Canonical form: base at the smallest vertex, direction chosen to make
    the step sequence lexicographically least; each cycle appears once
    (gamma and gamma^-1 are identified).
    """
    arrow_list = [(aid, s, d) for (aid, s, d) in arrows]
    incident: dict[int, list[tuple[int, int, int]]] = {}
    for aid, s, d in arrow_list:
        incident.setdefault(s, []).append((aid, s, d))
        incident.setdefault(d, []).append((aid, s, d))
    for v in incident:
        incident[v].sort()

    found: dict[frozenset, tuple] = {}

    def canonical(steps: list[tuple[int, bool]], vertices: list[int]):
        # rotations x two directions; pick lexicographically least encoding
        length = len(steps)
        best = None
        for start in range(length):
            if vertices[start] != min(vertices):
                continue
            fwd = tuple(steps[(start + t) % length] for t in range(length))
            rev = tuple(
                (steps[(start - 1 - t) % length][0], not steps[(start - 1 - t) % length][1])
                for t in range(length)
            )
            for cand in (fwd, rev):
                if best is None or cand < best:
                    best = cand
        return best

    def extend(base: int, v: int, steps: list, vertices: list, used: set):
        for aid, s, d in incident.get(v, ()):
            if aid in used:
                continue
            forward = s == v
            w = d if forward else s
            if w == base:
                if len(steps) >= 1:
                    cycle_steps = steps + [(aid, forward)]
                    if len(cycle_steps) >= 2:
                        key = frozenset(a for a, _ in cycle_steps)
                        if key not in found:
                            found[key] = canonical(cycle_steps, vertices)
                continue
            if w in vertices or w < base:
                continue
            used.add(aid)
            extend(base, w, steps + [(aid, forward)], vertices + [w], used)
            used.discard(aid)

    for base in sorted(incident):
        extend(base, base, [], [base], set())
    return sorted(found.values())


def simple_directed_cycles(arrows) -> list[tuple[int, ...]]:
    """All simple oriented cycles as canonical tuples of arrow ids.

    ``arrows`` is an iterable of (arrow_id, src, dst); vertices on a cycle
    are distinct; 2-cycles via opposite arrows are included.  Canonical form
    rotates the arrow-id sequence so the smallest id comes first.
    """
    outgoing: dict[int, list[tuple[int, int]]] = {}
    for aid, s, d in arrows:
        outgoing.setdefault(s, []).append((aid, d))
    for v in outgoing:
        outgoing[v].sort()

    cycles = []

    def walk(base: int, v: int, path: list, vertices: list):
        for aid, w in outgoing.get(v, ()):
            if w == base:
                cycle = path + [aid]
                least = min(range(len(cycle)), key=lambda t: cycle[t])
                cycles.append(tuple(cycle[least:] + cycle[:least]))
                continue
            if w in vertices or w < base:
                continue
            walk(base, w, path + [aid], vertices + [w])

    for base in sorted(outgoing):
        walk(base, base, [], [base])
    return sorted(set(cycles))
