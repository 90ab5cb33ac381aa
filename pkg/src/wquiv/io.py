"""Quiver file format, canonical serialization, and seeded corpus generation.

One JSON format carries a quiver and an optional ``potential`` section:

    {"group": {"kind": "free", "rank": 2},
     "vertices": [{"id": 1, "frozen": false}, ...],
     "arrows": [{"src": 1, "dst": 2, "weight": "x1"}, ...],
     "potential": [{"cycle": [1, 2, 3], "coeff": "1"}]}          (optional)

Serialization is canonical: vertices sorted by id, arrows sorted by
(src, dst, formatted weight).  Arrow ids are implied by canonical position
(1-based) unless the file carries explicit ``id`` fields, which the
potential section's cycles reference.  The canonical text of a quiver is a
total order: two quivers are labeled-equal iff their canonical bytes agree.
"""

from __future__ import annotations

import json
import random
from fractions import Fraction
from pathlib import Path

from .groups import (
    GroupError,
    GroupKind,
    format_element,
    generator,
    identity,
    invert,
    kind_from_json,
    kind_to_json,
    multiply,
    parse_element,
)
from .quiver import Arrow, Vertex, WeightedQuiver, check_valid, validate


class FormatError(ValueError):
    """Malformed quiver/potential file."""


# -- serialization ---------------------------------------------------------------


def quiver_to_json(q: WeightedQuiver, include_ids: bool = False) -> dict:
    arrows = []
    for a in q.arrows:  # already canonically sorted
        entry = {"src": a.src, "dst": a.dst, "weight": format_element(a.weight)}
        if include_ids:
            entry["id"] = a.id
        arrows.append(entry)
    return {
        "group": kind_to_json(q.group),
        "vertices": [{"id": v.id, "frozen": v.frozen} for v in q.vertices],
        "arrows": arrows,
    }


def quiver_to_json_text(q: WeightedQuiver, include_ids: bool = False) -> str:
    return json.dumps(quiver_to_json(q, include_ids=include_ids), indent=2) + "\n"


def quiver_from_json(data: dict) -> WeightedQuiver:
    if not isinstance(data, dict):
        raise FormatError("quiver file must be a JSON object")
    for key in ("group", "vertices", "arrows"):
        if key not in data:
            raise FormatError(f"missing field {key!r}")
    try:
        kind = kind_from_json(data["group"])
    except (GroupError, KeyError, TypeError, ValueError) as err:
        raise FormatError(f"bad group section: {err}") from None

    vertices = []
    for n, v in enumerate(data["vertices"]):
        try:
            vertices.append(Vertex(int(v["id"]), bool(v.get("frozen", False))))
        except (KeyError, TypeError, ValueError) as err:
            raise FormatError(f"bad vertex #{n}: {err}") from None

    arrows = []
    explicit_ids = any("id" in a for a in data["arrows"])
    for n, a in enumerate(data["arrows"]):
        try:
            src = int(a["src"])
            dst = int(a["dst"])
        except (KeyError, TypeError, ValueError) as err:
            raise FormatError(f"bad arrow #{n}: {err}") from None
        try:
            weight = parse_element(kind, a.get("weight", default_weight_text(kind)))
        except GroupError as err:
            raise FormatError(
                f"bad weight on arrow #{n} ({src}->{dst}): {err}"
            ) from None
        aid = int(a["id"]) if explicit_ids else n + 1
        if explicit_ids and "id" not in a:
            raise FormatError(f"arrow #{n} missing id while others carry ids")
        arrows.append(Arrow(aid, src, dst, weight))

    q = WeightedQuiver(kind, tuple(vertices), tuple(arrows))
    violations = validate(q)
    if violations:
        raise FormatError("; ".join(violations))
    return q


def default_weight_text(kind: GroupKind) -> str:
    return format_element(identity(kind))


def quiver_from_json_text(text: str) -> WeightedQuiver:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise FormatError(f"not valid JSON: {err}") from None
    return quiver_from_json(data)


def load_quiver(path) -> WeightedQuiver:
    return quiver_from_json_text(Path(path).read_text(encoding="utf-8"))


def save_quiver(q: WeightedQuiver, path, include_ids: bool = False) -> None:
    Path(path).write_text(
        quiver_to_json_text(q, include_ids=include_ids), encoding="utf-8"
    )


def canonical_text(q: WeightedQuiver) -> str:
    """The canonical serialization used for byte-level equality and dedup."""
    return quiver_to_json_text(q)


# -- wQP files --------------------------------------------------------------------


def load_wqp(path, bound: int | None = None):
    """Load a quiver plus its potential section as a Series (arrow ids are
    the explicit ids, or canonical positions when absent)."""
    from .potential import Series, cyclic_normal_form

    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise FormatError(f"not valid JSON: {err}") from None
    q = quiver_from_json(data)
    terms = {}
    for n, item in enumerate(data.get("potential", [])):
        try:
            cycle = tuple(int(x) for x in item["cycle"])
            coeff = Fraction(item.get("coeff", "1"))
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as err:
            raise FormatError(f"bad potential term #{n}: {err}") from None
        terms[cycle] = terms.get(cycle, Fraction(0)) + coeff
    if bound is None:
        bound = int(data.get("degree_bound", 2 * max([len(w) for w in terms] or [2]) + 2))
    return cyclic_normal_form(Series(q, terms, bound))


def save_wqp(series, path) -> None:
    data = quiver_to_json(series.quiver, include_ids=True)
    data["potential"] = [
        {"cycle": list(word), "coeff": str(coeff)}
        for word, coeff in sorted(series.terms.items())
    ]
    data["degree_bound"] = series.bound
    Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")


# -- corpus generation ----------------------------------------------------------------


POLICIES = ("trivial", "gauge", "oriented-cycle-trivial", "cn-reverse-mutation", "free-random")


def random_element(kind: GroupKind, rng: random.Random, max_len: int = 3):
    """A short random element of the group (identity allowed)."""
    if kind.name == "trivial":
        return identity(kind)
    if kind.name == "cyclic":
        return parse_element(kind, str(rng.randrange(kind.param)))
    if kind.name == "free-abelian":
        vec = [rng.randint(-2, 2) for _ in range(kind.param)]
        return parse_element(kind, "(" + ",".join(map(str, vec)) + ")")
    acc = identity(kind)
    for _ in range(rng.randint(0, max_len)):
        index = rng.randint(1, max(kind.param, 1))
        g = generator(kind, index)
        acc = multiply(acc, g if rng.random() < 0.5 else invert(g))
    return acc


def random_quiver(
    n: int,
    kind: GroupKind,
    rng: random.Random,
    density: float = 0.5,
    max_parallel: int = 2,
    weights: str = "identity",
) -> WeightedQuiver:
    """Random 2-cycle-free quiver on vertices 1..n (each unordered pair gets
    0..max_parallel arrows in one direction)."""
    vertices = tuple(Vertex(v) for v in range(1, n + 1))
    arrows = []
    aid = 1
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            if rng.random() >= density:
                continue
            count = rng.randint(1, max_parallel)
            src, dst = (i, j) if rng.random() < 0.5 else (j, i)
            for _ in range(count):
                w = (
                    identity(kind)
                    if weights == "identity"
                    else random_element(kind, rng)
                )
                arrows.append(Arrow(aid, src, dst, w))
                aid += 1
    return WeightedQuiver(kind, vertices, tuple(arrows))


def _gauge_weights(q: WeightedQuiver, rng: random.Random) -> WeightedQuiver:
    values = {v.id: random_element(q.group, rng) for v in q.vertices}
    arrows = [
        Arrow(a.id, a.src, a.dst, multiply(invert(values[a.src]), values[a.dst]))
        for a in q.arrows
    ]
    return q.replace_arrows(arrows)


def _oriented_cycle_trivial_weights(
    q: WeightedQuiver, rng: random.Random
) -> WeightedQuiver:
    """Gauge weights inside each strongly connected component, random weights
    on arrows between components (those lie on no directed cycle)."""
    from .graphs import strongly_connected_components

    components = strongly_connected_components(
        q.vertex_ids(), [(a.src, a.dst) for a in q.arrows]
    )
    component_of = {}
    for n, component in enumerate(components):
        for v in component:
            component_of[v] = n
    values = {v.id: random_element(q.group, rng) for v in q.vertices}
    arrows = []
    for a in q.arrows:
        if component_of[a.src] == component_of[a.dst]:
            w = multiply(invert(values[a.src]), values[a.dst])
        else:
            w = random_element(q.group, rng)
        arrows.append(Arrow(a.id, a.src, a.dst, w))
    return q.replace_arrows(arrows)


def unoriented_cycle_quiver(
    n: int, kind: GroupKind, t, flip: int = 0
) -> WeightedQuiver:
    """An unoriented n-cycle: arrows v -> v+1 around, with arrow ``flip``
    reversed to break orientation, and weight t on arrow 1."""
    if n < 3:
        raise FormatError("cycle needs at least 3 vertices")
    vertices = tuple(Vertex(v) for v in range(1, n + 1))
    arrows = []
    for v in range(1, n + 1):
        nxt = v % n + 1
        w = t if v == 1 else identity(kind)
        if v - 1 == flip:
            arrows.append(Arrow(v, nxt, v, invert(w)))
        else:
            arrows.append(Arrow(v, v, nxt, w))
    return WeightedQuiver(kind, vertices, tuple(arrows))


def cn_member(
    n: int, kind: GroupKind, rng: random.Random, reverse_steps: int | None = None
) -> WeightedQuiver:
    """A C_n(t) member generated by mutating an unoriented n-cycle with
    t = x1 (or the kind's generator); mutation stays inside the class."""
    from .mutation import mutate

    t = generator(kind, 1)
    if t.is_identity():
        raise FormatError(f"C_n(t) needs a nontrivial group, got {kind}")
    flip = rng.randrange(1, n)
    q = unoriented_cycle_quiver(n, kind, t, flip=flip)
    if reverse_steps is None:
        reverse_steps = rng.randint(0, max(n - 3, 0))
    for _ in range(reverse_steps):
        k = rng.choice(q.mutable_ids())
        q = mutate(q, k).result
    return q


def generate_corpus(
    count: int,
    n: int,
    kind: GroupKind,
    policy: str,
    seed: int,
    out_dir=None,
) -> list:
    """Deterministic corpus of valid quivers; every emitted quiver passes its
    policy postcondition.  Writes canonical files when ``out_dir`` is given;
    returns the quiver list."""
    from .analysis import oriented_cycles_trivial
    from .tame import cn_membership

    if policy not in POLICIES:
        raise FormatError(f"unknown policy {policy!r}; choose from {POLICIES}")
    rng = random.Random(seed)
    quivers = []
    attempts = 0
    while len(quivers) < count:
        attempts += 1
        if attempts > count * 100 + 100:
            raise FormatError(f"policy {policy!r} failed to produce {count} quivers")
        if policy == "cn-reverse-mutation":
            size = max(3, n)
            q = cn_member(size, kind, rng)
            if not cn_membership(q):
                continue
        else:
            q = random_quiver(n, kind, rng)
            if policy == "trivial":
                pass
            elif policy == "gauge":
                q = _gauge_weights(q, rng)
            elif policy == "oriented-cycle-trivial":
                q = _oriented_cycle_trivial_weights(q, rng)
                ok, _ = oriented_cycles_trivial(q)
                if not ok:
                    continue
            elif policy == "free-random":
                arrows = [
                    Arrow(a.id, a.src, a.dst, random_element(kind, rng))
                    for a in q.arrows
                ]
                q = q.replace_arrows(arrows)
        check_valid(q)
        quivers.append(q)

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        width = len(str(count - 1)) if count > 1 else 1
        for idx, q in enumerate(quivers):
            save_quiver(q, out / f"{policy}-{idx:0{width}d}.json")
    return quivers
