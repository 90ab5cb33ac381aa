"""Pure-Python mutation kernel.

Compact states for the search drivers are *signed weight-class counts*: a
state is a sorted tuple of ``(a, b, wid, count)`` with a < b and count != 0,
meaning ``count`` parallel arrows a -> b of the interned weight ``wid`` when
positive, and ``|count|`` arrows b -> a of the inverse weight when negative.
Weight reduction is then just signed addition, and mutation cost does not
depend on arrow multiplicities (which grow doubly exponentially on wild
quivers).  For the trivial group this is exactly the exchange matrix.

Counts are plain Python integers, so this backend never overflows; the
compiled twin uses 128-bit counts and raises OverflowError past its range.
"""

from __future__ import annotations

BACKEND = "pure"


def state_from_arrows(triples, table):
    """Build the class-count state from (src, dst, wid) arrow triples."""
    classes = {}
    for s, d, w in triples:
        if s == d:
            raise ValueError(f"loop at {s} not representable")
        if s < d:
            key = (s, d, w)
            delta = 1
        else:
            key = (d, s, table.inv(w))
            delta = -1
        classes[key] = classes.get(key, 0) + delta
    return tuple(
        sorted((a, b, w, c) for (a, b, w), c in classes.items() if c != 0)
    )


def arrows_from_state(state, table):
    """Expand a class state back to (src, dst, wid) triples (sorted)."""
    out = []
    for a, b, w, c in state:
        if c > 0:
            out.extend([(a, b, w)] * c)
        else:
            out.extend([(b, a, table.inv(w))] * (-c))
    return tuple(sorted(out))


def mutate_state(state, k, table):
    """Mutate a 2-cycle-free class state at vertex index k.

    Reverses classes incident to k (count negation), adds composite classes
    with multiplied counts, and lets signed addition do the weight reduction.
    """
    mul = table.mul
    inv = table.inv
    incoming = []  # (vertex, wid, count>0) arrows v -> k
    outgoing = []  # (vertex, wid, count>0) arrows k -> v
    new = {}
    for a, b, w, c in state:
        if a == k:
            new[(a, b, w)] = -c
            if c > 0:
                outgoing.append((b, w, c))
            else:
                incoming.append((b, inv(w), -c))
        elif b == k:
            new[(a, b, w)] = -c
            if c > 0:
                incoming.append((a, w, c))
            else:
                outgoing.append((a, inv(w), -c))
        else:
            new[(a, b, w)] = c
    for i, g, ci in incoming:
        for j, h, cj in outgoing:
            if i == j:
                raise ValueError(f"2-cycle through {k}: composite would be a loop")
            w = mul(g, h)
            if i < j:
                key = (i, j, w)
                delta = ci * cj
            else:
                key = (j, i, inv(w))
                delta = -ci * cj
            new[key] = new.get(key, 0) + delta
    return tuple(sorted((a, b, w, c) for (a, b, w), c in new.items() if c != 0))


def find_two_cycle(state):
    """Two classes on one vertex pair with opposite signs witness a
    (necessarily nontrivial) 2-cycle."""
    by_pair = {}
    for a, b, w, c in state:
        seen = by_pair.get((a, b))
        if seen is not None and (seen[3] > 0) != (c > 0):
            return (seen, (a, b, w, c))
        if seen is None:
            by_pair[(a, b)] = (a, b, w, c)
    return None


def find_frozen_pair(state, frozen):
    for a, b, w, c in state:
        if frozen[a] and frozen[b]:
            return (a, b, w, c)
    return None


def find_incoherent_row(state, frozen):
    """A mutable vertex whose c-vector row mixes signs; entries are
    c_kj = #(k->j') - #(j'->k)."""
    rows = {}
    for a, b, _, c in state:
        if frozen[b] and not frozen[a]:
            row = rows.setdefault(a, {})
            row[b] = row.get(b, 0) + c
        elif frozen[a] and not frozen[b]:
            row = rows.setdefault(b, {})
            row[a] = row.get(a, 0) - c
    for k in sorted(rows):
        entries = rows[k]
        has_pos = any(v > 0 for v in entries.values())
        has_neg = any(v < 0 for v in entries.values())
        if has_pos and has_neg:
            return (k, sorted(entries.items()))
    return None


def _check_state(state, frozen, check_two_cycles, check_frozen_pair, check_sign):
    if check_frozen_pair:
        t = find_frozen_pair(state, frozen)
        if t is not None:
            return {"kind": "frozen-arrow", "witness": t}
    if check_sign:
        row = find_incoherent_row(state, frozen)
        if row is not None:
            return {"kind": "incoherent-row", "witness": row}
    if check_two_cycles:
        pair = find_two_cycle(state)
        if pair is not None:
            return {"kind": "two-cycle", "witness": pair}
    return None


def explore(
    n,
    frozen,
    state,
    table,
    max_depth,
    check_two_cycles=False,
    check_frozen_pair=False,
    check_sign=False,
):
    """Deterministic BFS over mutation sequences at unfrozen vertices.

    Immediate back-mutations are pruned, states are deduplicated by their
    canonical form, and states containing a 2-cycle are terminal.  Returns
    ``{"states": count, "violation": None}`` or the first violation in BFS
    order as ``{"kind", "witness", "sequence": [vertex indices]}``.
    """
    mutable = [v for v in range(n) if not frozen[v]]
    root = tuple(sorted(state))
    violation = _check_state(
        root, frozen, check_two_cycles, check_frozen_pair, check_sign
    )
    if violation is not None:
        violation["sequence"] = []
        return {"states": 1, "violation": violation}

    states = [root]
    parents = [-1]
    via = [-1]
    depth = [0]
    blocked = [find_two_cycle(root) is not None]
    seen = {root: 0}

    head = 0
    while head < len(states):
        idx = head
        head += 1
        if blocked[idx] or depth[idx] >= max_depth:
            continue
        state_here = states[idx]
        last = via[idx]
        for k in mutable:
            if k == last:
                continue
            child = mutate_state(state_here, k, table)
            if child in seen:
                continue
            seen[child] = len(states)
            states.append(child)
            parents.append(idx)
            via.append(k)
            depth.append(depth[idx] + 1)
            blocked.append(find_two_cycle(child) is not None)
            violation = _check_state(
                child, frozen, check_two_cycles, check_frozen_pair, check_sign
            )
            if violation is not None:
                seq = []
                node = len(states) - 1
                while node > 0:
                    seq.append(via[node])
                    node = parents[node]
                violation["sequence"] = seq[::-1]
                return {"states": len(states), "violation": violation}
    return {"states": len(states), "violation": None}
