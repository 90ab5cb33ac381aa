"""Nondegeneracy search, oriented-cycle weight triviality, framing,
c-vectors and the sign-coherence experiment.

Nondegeneracy of a weighted quiver is a statement over all mutation
sequences, so it can only be refuted by search: the checker runs a bounded,
deduplicated BFS and reports either a counterexample sequence (replayable,
ending in a nontrivial-weight 2-cycle) or "clean to depth".  A 2-cycle that
is cancelled during weight reduction does not count; only surviving ones do.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernel
from .groups import GroupElement, identity, invert, multiply
from .quiver import Arrow, Vertex, WeightedQuiver, check_valid, has_two_cycle, QuiverError
from .graphs import strongly_connected_components
from .equivalence import WalkCycle


# -- oriented-cycle weight triviality (SCC potentials) ---------------------


def _scc_paths(q: WeightedQuiver, component: list[int]) -> dict[int, list[int]]:
    """Directed BFS tree inside one SCC: vertex -> arrow-id path from base."""
    inside = set(component)
    base = min(component)
    paths = {base: []}
    frontier = [base]
    while frontier:
        next_frontier = []
        for v in frontier:
            for a in q.arrows_from(v):
                if a.dst in inside and a.dst not in paths:
                    paths[a.dst] = paths[v] + [a.id]
                    next_frontier.append(a.dst)
        frontier = next_frontier
    return paths


def _path_weight(q: WeightedQuiver, arrow_ids) -> GroupElement:
    acc = identity(q.group)
    for aid in arrow_ids:
        acc = multiply(acc, q.arrow(aid).weight)
    return acc


def oriented_cycles_trivial(q: WeightedQuiver):
    """True iff every closed directed walk has weight 1.

    Decided exactly via SCC potentials: inside each strongly connected
    component, fix g(v) as the weight of a chosen path from the component
    base; the condition holds iff wt(a) = g(i)^-1 g(j) for every in-component
    arrow a: i->j.  On failure returns (False, witness) where the witness is
    a closed directed walk of nontrivial weight.
    """
    check_valid(q)
    for component in strongly_connected_components(
        q.vertex_ids(), [(a.src, a.dst) for a in q.arrows]
    ):
        inside = set(component)
        if len(component) == 1:
            continue  # no loops, so no closed walk stays here
        paths = _scc_paths(q, component)
        base = min(component)
        g = {v: _path_weight(q, p) for v, p in paths.items()}
        for a in q.arrows:
            if a.src not in inside or a.dst not in inside:
                continue
            expected = multiply(invert(g[a.src]), g[a.dst])
            if a.weight == expected:
                continue
            # inconsistent arrow: one of the two closed walks below is nontrivial
            back = _directed_path(q, inside, a.dst, base)
            walk_a = paths[a.src] + [a.id] + back
            walk_b = paths[a.dst] + back
            for walk in (walk_a, walk_b):
                if walk and not _path_weight(q, walk).is_identity():
                    steps = tuple((aid, True) for aid in walk)
                    return False, WalkCycle(base=base, steps=steps)
            raise AssertionError("inconsistent arrow but both witness walks trivial")
    return True, None


def _directed_path(q: WeightedQuiver, inside: set, start: int, goal: int) -> list[int]:
    """Arrow-id path start -> goal using arrows within ``inside`` (BFS)."""
    if start == goal:
        return []
    paths = {start: []}
    frontier = [start]
    while frontier:
        next_frontier = []
        for v in frontier:
            for a in q.arrows_from(v):
                if a.dst in inside and a.dst not in paths:
                    paths[a.dst] = paths[v] + [a.id]
                    if a.dst == goal:
                        return paths[goal]
                    next_frontier.append(a.dst)
        frontier = next_frontier
    raise QuiverError(f"no directed path {start} -> {goal} inside component")


# -- nondegeneracy search --------------------------------------------------


@dataclass(frozen=True)
class NondegeneracyVerdict:
    depth: int
    clean: bool
    states: int
    sequence: tuple[int, ...] | None = None
    witness: tuple | None = None

    def describe(self) -> str:
        if self.clean:
            return f"clean-to-depth {self.depth} ({self.states} states)"
        return f"counterexample after {self.sequence}: 2-cycle {self.witness}"


def check_nondegenerate(q: WeightedQuiver, depth: int) -> NondegeneracyVerdict:
    """BFS over all mutation sequences of length <= depth at unfrozen
    vertices, deduplicating states by canonical form.  Returns the first
    counterexample (a surviving 2-cycle, necessarily of nontrivial weight)
    in BFS order, or clean-to-depth."""
    check_valid(q)
    if has_two_cycle(q):
        raise QuiverError("nondegeneracy check requires a 2-cycle-free quiver")
    compact = kernel.CompactQuiver(q)
    result = kernel.explore(
        compact.n,
        compact.frozen,
        compact.state,
        compact.table,
        depth,
        check_two_cycles=True,
    )
    violation = result["violation"]
    if violation is None:
        return NondegeneracyVerdict(depth=depth, clean=True, states=result["states"])
    first, second = violation["witness"]
    witness = (
        compact.class_arrow_info(first),
        compact.class_arrow_info(second),
    )
    return NondegeneracyVerdict(
        depth=depth,
        clean=False,
        states=result["states"],
        sequence=tuple(compact.to_vertex_ids(violation["sequence"])),
        witness=witness,
    )


# -- framing and c-vectors ---------------------------------------------------


def frame(q: WeightedQuiver, frame_weight: GroupElement | None = None) -> WeightedQuiver:
    """Add one frozen source i' per vertex i with an arrow i' -> i.

    Frame arrows carry the identity weight unless ``frame_weight`` is given.
    The frozen copy of vertex i gets id i + max(vertex ids).
    """
    check_valid(q)
    if any(v.frozen for v in q.vertices):
        raise QuiverError("quiver already has frozen vertices")
    if frame_weight is None:
        frame_weight = identity(q.group)
    offset = max(q.vertex_ids(), default=0)
    vertices = list(q.vertices)
    arrows = list(q.arrows)
    next_id = q.next_arrow_id()
    for v in q.vertices:
        vertices.append(Vertex(v.id + offset, frozen=True))
        arrows.append(Arrow(next_id, v.id + offset, v.id, frame_weight))
        next_id += 1
    return WeightedQuiver(q.group, tuple(vertices), tuple(arrows))


@dataclass(frozen=True)
class CVectorMatrix:
    row_ids: tuple[int, ...]  # unfrozen vertices
    col_ids: tuple[int, ...]  # frozen vertices
    matrix: np.ndarray

    def row(self, vid: int):
        return self.matrix[self.row_ids.index(vid)]


def c_vectors(q: WeightedQuiver) -> CVectorMatrix:
    """c_kj = #(arrows k -> j') - #(arrows j' -> k) over frozen vertices j'.

    Well-defined only while no arrow joins two frozen vertices; such an
    arrow is reported as an error (it is exactly the sign-coherence failure
    witness)."""
    check_valid(q)
    row_ids = tuple(q.mutable_ids())
    col_ids = tuple(q.frozen_ids())
    frozen = set(col_ids)
    row_index = {vid: n for n, vid in enumerate(row_ids)}
    col_index = {vid: n for n, vid in enumerate(col_ids)}
    matrix = np.zeros((len(row_ids), len(col_ids)), dtype=np.int64)
    for a in q.arrows:
        if a.src in frozen and a.dst in frozen:
            raise QuiverError(
                f"arrow {a.id} joins frozen vertices {a.src} and {a.dst}"
            )
        if a.src in frozen:
            matrix[row_index[a.dst], col_index[a.src]] -= 1
        elif a.dst in frozen:
            matrix[row_index[a.src], col_index[a.dst]] += 1
    return CVectorMatrix(row_ids=row_ids, col_ids=col_ids, matrix=matrix)


def is_sign_coherent(m: CVectorMatrix):
    """Row-wise verdict: every row all-nonnegative or all-nonpositive.
    Returns (True, None) or (False, offending row id)."""
    for n, vid in enumerate(m.row_ids):
        row = m.matrix[n]
        if (row > 0).any() and (row < 0).any():
            return False, vid
    return True, None


def attach_probe_arrow(
    q: WeightedQuiver, i: int, j: int, w: GroupElement
) -> WeightedQuiver:
    """Add a probe arrow j -> i of weight w (the sign-coherence experiment
    device: a nontrivial weight on an arrow lying on no oriented cycle)."""
    check_valid(q)
    if i == j:
        raise QuiverError("probe would be a loop")
    q.vertex(i)
    q.vertex(j)
    for a in q.arrows:
        if a.src == i and a.dst == j and a.weight == invert(w):
            raise QuiverError(
                f"probe forms a trivial-weight 2-cycle with arrow {a.id}"
            )
    arrows = list(q.arrows) + [Arrow(q.next_arrow_id(), j, i, w)]
    return q.replace_arrows(arrows)


# -- the sign-coherence experiment -------------------------------------------


def explore_framed(q: WeightedQuiver, max_len: int) -> dict:
    """BFS a framed quiver to depth ``max_len``, watching for arrows between
    frozen vertices and for sign-incoherent c-vector rows."""
    compact = kernel.CompactQuiver(q)
    result = kernel.explore(
        compact.n,
        compact.frozen,
        compact.state,
        compact.table,
        max_len,
        check_frozen_pair=True,
        check_sign=True,
    )
    violation = result["violation"]
    out = {"states": result["states"], "ok": violation is None}
    if violation is not None:
        out["violation"] = {
            "kind": violation["kind"],
            "sequence": compact.to_vertex_ids(violation["sequence"]),
            "witness": repr(violation["witness"]),
        }
    return out


def _experiment_case(args):
    index, payload, max_len = args
    from .io import quiver_from_json_text

    q = quiver_from_json_text(payload)
    case = explore_framed(q, max_len)
    case["index"] = index
    case["mutable_vertices"] = len(q.mutable_ids())
    case["arrows"] = len(q.arrows)
    return case


def sign_coherence_experiment(quivers, max_len: int, jobs: int = 1) -> dict:
    """Frame every quiver and explore all mutation sequences of length
    <= max_len; a machine-readable report collects pass/fail per case."""
    from .io import quiver_to_json_text

    framed = [frame(q) if not q.frozen_ids() else q for q in quivers]
    work = [(n, quiver_to_json_text(fq), max_len) for n, fq in enumerate(framed)]
    if jobs > 1:
        import multiprocessing

        with multiprocessing.Pool(jobs) as pool:
            cases = list(pool.imap(_experiment_case, work, chunksize=64))
    else:
        cases = [_experiment_case(item) for item in work]
    cases.sort(key=lambda c: c["index"])
    return {
        "schema_version": 1,
        "experiment": "sign-coherence",
        "max_len": max_len,
        "kernel": kernel.BACKEND,
        "cases": cases,
        "states_total": sum(c["states"] for c in cases),
        "passed": all(c["ok"] for c in cases),
    }


def _probe_case(args):
    index, payload, depth = args
    from .io import quiver_from_json_text

    q = quiver_from_json_text(payload)
    verdict = check_nondegenerate(q, depth)
    case = {
        "index": index,
        "states": verdict.states,
        "ok": verdict.clean,
    }
    if not verdict.clean:
        case["sequence"] = list(verdict.sequence)
        case["witness"] = list(verdict.witness)
    return case


def probe_nondegeneracy_sweep(quivers, depth: int, jobs: int = 1) -> dict:
    """The Cor 1.2 device at scale: frame each quiver over the free group,
    attach a probe arrow of weight x1 between two frozen vertices (it lies on
    no oriented cycle), and verify the result is clean to ``depth``."""
    from .groups import free_kind, generator, identity as group_identity
    from .io import quiver_to_json_text
    from .quiver import Arrow, Vertex, WeightedQuiver

    kind = free_kind(1)
    x1 = generator(kind, 1)
    e = group_identity(kind)
    work = []
    skipped = 0
    for n, q in enumerate(quivers):
        if len(q.vertex_ids()) < 2 or q.frozen_ids():
            skipped += 1
            continue
        rekinded = WeightedQuiver(
            kind,
            q.vertices,
            tuple(Arrow(a.id, a.src, a.dst, e) for a in q.arrows),
        )
        framed = frame(rekinded)
        frozen = framed.frozen_ids()
        probed = attach_probe_arrow(framed, frozen[0], frozen[1], x1)
        work.append((n, quiver_to_json_text(probed), depth))
    if jobs > 1:
        import multiprocessing

        with multiprocessing.Pool(jobs) as pool:
            cases = list(pool.imap(_probe_case, work, chunksize=64))
    else:
        cases = [_probe_case(item) for item in work]
    cases.sort(key=lambda c: c["index"])
    return {
        "schema_version": 1,
        "experiment": "cor12-probe",
        "depth": depth,
        "kernel": kernel.BACKEND,
        "cases": cases,
        "skipped": skipped,
        "states_total": sum(c["states"] for c in cases),
        "passed": all(c["ok"] for c in cases),
    }


def exhaustive_catalog(max_vertices: int = 4, max_parallel: int = 2):
    """All 2-cycle-free trivial-weight quivers on 1..max_vertices labeled
    vertices with at most ``max_parallel`` parallel arrows, enumerated
    deterministically (the bundled experiment catalog)."""
    import itertools

    from .groups import trivial_kind

    kind = trivial_kind()
    e = identity(kind)
    for n in range(1, max_vertices + 1):
        pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
        states = range(-max_parallel, max_parallel + 1)
        for combo in itertools.product(states, repeat=len(pairs)):
            arrows = []
            aid = 1
            for (i, j), count in zip(pairs, combo):
                src, dst = (i, j) if count > 0 else (j, i)
                for _ in range(abs(count)):
                    arrows.append(Arrow(aid, src, dst, e))
                    aid += 1
            vertices = tuple(Vertex(v) for v in range(1, n + 1))
            yield WeightedQuiver(kind, vertices, tuple(arrows))
