"""Weighted quivers with potential: truncated path-algebra series over exact
rationals, cyclic normal forms, the trivial/reduced splitting, and wQP
mutation.

A potential is a finite rational combination of identity-weight oriented
cycles, stored with every cycle rotated to its least arrow-id rotation so
that cyclic equivalence is literal equality of stored words.  All series
arithmetic is truncated at a degree bound; the splitting iteration reports
when the bound was too small to absorb the correction terms it generated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .groups import GroupElement, identity, invert, multiply
from .mutation import mutate
from .quiver import Arrow, WeightedQuiver, check_valid, QuiverError


class PotentialError(ValueError):
    """Malformed series/potential or incompatible automorphism."""


class SplitError(PotentialError):
    """The splitting iteration spilled past the degree bound."""

    def __init__(self, message: str, degree_reached: int):
        super().__init__(message)
        self.degree_reached = degree_reached


# -- path words ----------------------------------------------------------------


def word_endpoints(q: WeightedQuiver, word: tuple) -> tuple[int, int]:
    """(source, target) of a composable arrow-id word; raises if broken."""
    if not word:
        raise PotentialError("empty word has no endpoints")
    arrows = [q.arrow(aid) for aid in word]
    for left, right in zip(arrows, arrows[1:]):
        if left.dst != right.src:
            raise PotentialError(
                f"word {word} breaks between arrows {left.id} and {right.id}"
            )
    return arrows[0].src, arrows[-1].dst


def word_weight(q: WeightedQuiver, word: tuple) -> GroupElement:
    acc = identity(q.group)
    for aid in word:
        acc = multiply(acc, q.arrow(aid).weight)
    return acc


def min_rotation(word: tuple) -> tuple:
    return min(word[m:] + word[:m] for m in range(len(word)))


# -- series ---------------------------------------------------------------------


@dataclass
class Series:
    """Finite map from composable arrow-id words to rational coefficients,
    truncated above ``bound``.  Zero coefficients are never stored."""

    quiver: WeightedQuiver
    terms: dict = field(default_factory=dict)
    bound: int = 16

    def __post_init__(self):
        clean = {}
        for word, coeff in self.terms.items():
            coeff = Fraction(coeff)
            if coeff == 0 or len(word) > self.bound:
                continue
            word_endpoints(self.quiver, word)
            clean[tuple(word)] = coeff
        self.terms = clean

    def is_zero(self) -> bool:
        return not self.terms

    def max_degree(self) -> int:
        return max((len(w) for w in self.terms), default=0)

    def min_degree(self) -> int:
        return min((len(w) for w in self.terms), default=0)

    def degree_part(self, d: int) -> "Series":
        return Series(
            self.quiver,
            {w: c for w, c in self.terms.items() if len(w) == d},
            self.bound,
        )

    def add(self, other: "Series") -> "Series":
        terms = dict(self.terms)
        for w, c in other.terms.items():
            new = terms.get(w, Fraction(0)) + c
            if new == 0:
                terms.pop(w, None)
            else:
                terms[w] = new
        return Series(self.quiver, terms, self.bound)

    def scale(self, factor) -> "Series":
        factor = Fraction(factor)
        return Series(
            self.quiver, {w: c * factor for w, c in self.terms.items()}, self.bound
        )

    def mul(self, other: "Series") -> tuple["Series", bool]:
        """Truncated concatenation product; the flag reports whether any
        nonzero composable product exceeded the bound (was truncated)."""
        terms: dict = {}
        spilled = False
        for w1, c1 in self.terms.items():
            end1 = self.quiver.arrow(w1[-1]).dst
            for w2, c2 in other.terms.items():
                if self.quiver.arrow(w2[0]).src != end1:
                    continue
                if len(w1) + len(w2) > self.bound:
                    spilled = True
                    continue
                w = w1 + w2
                new = terms.get(w, Fraction(0)) + c1 * c2
                if new == 0:
                    terms.pop(w, None)
                else:
                    terms[w] = new
        return Series(self.quiver, terms, self.bound), spilled


def arrow_series(q: WeightedQuiver, aid: int, bound: int) -> Series:
    return Series(q, {(aid,): Fraction(1)}, bound)


# -- potentials ------------------------------------------------------------------


def cyclic_normal_form(series: Series) -> Series:
    """Rotate every term to its least arrow-id rotation and merge.

    Every term must be an oriented cycle of identity weight and length >= 2;
    violations raise."""
    q = series.quiver
    terms: dict = {}
    for word, coeff in series.terms.items():
        src, dst = word_endpoints(q, word)
        if src != dst:
            raise PotentialError(f"term {word} is not an oriented cycle")
        if len(word) < 2:
            raise PotentialError(f"loop term {word} not allowed")
        if not word_weight(q, word).is_identity():
            raise PotentialError(
                f"term {word} has nontrivial weight "
                f"{word_weight(q, word)} (potentials are weight-1)"
            )
        w = min_rotation(word)
        new = terms.get(w, Fraction(0)) + coeff
        if new == 0:
            terms.pop(w, None)
        else:
            terms[w] = new
    return Series(q, terms, series.bound)


def weight_compatible(series: Series) -> bool:
    """True iff every stored term has identity weight."""
    return all(word_weight(series.quiver, w).is_identity() for w in series.terms)


# -- degree-2 forward-backward blocks ----------------------------------------------


@dataclass(frozen=True)
class PairingBlock:
    source: int
    target: int
    weight: GroupElement
    forward: tuple[int, ...]   # arrow ids source -> target of this weight
    backward: tuple[int, ...]  # arrow ids target -> source of inverse weight
    matrix: tuple               # rows: forward, cols: backward, Fractions


def degree2_forward_backward(series: Series, ordering=None) -> list[PairingBlock]:
    """The degree-2 part of a potential as per-(i<j, g) coefficient blocks,
    with the arrows themselves as the homogeneous bases.  Blocks exist for
    every (i, j, g) carrying at least one forward or backward arrow."""
    q = series.quiver
    if ordering is None:
        ordering = q.vertex_ids()
    position = {vid: n for n, vid in enumerate(ordering)}

    groups: dict = {}
    for a in q.arrows:
        if position[a.src] < position[a.dst]:
            key = (a.src, a.dst, a.weight.payload)
            groups.setdefault(key, ([], []))[0].append(a.id)
        else:
            back_weight = invert(a.weight)
            key = (a.dst, a.src, back_weight.payload)
            groups.setdefault(key, ([], []))[1].append(a.id)

    coeffs: dict = {}
    for word, c in series.terms.items():
        if len(word) != 2:
            continue
        p, r = word
        ap = q.arrow(p)
        if position[ap.src] < position[ap.dst]:
            fwd, bwd = p, r
        else:
            fwd, bwd = r, p
        coeffs[(fwd, bwd)] = coeffs.get((fwd, bwd), Fraction(0)) + c

    blocks = []
    for (i, j, payload), (fwd_ids, bwd_ids) in sorted(
        groups.items(), key=lambda kv: (kv[0][0], kv[0][1], str(kv[0][2]))
    ):
        fwd_ids = tuple(sorted(fwd_ids))
        bwd_ids = tuple(sorted(bwd_ids))
        matrix = tuple(
            tuple(coeffs.get((p, r), Fraction(0)) for r in bwd_ids) for p in fwd_ids
        )
        weight = None
        for a in q.arrows:
            if a.src == i and a.dst == j and a.weight.payload == payload:
                weight = a.weight
                break
        if weight is None:
            weight = invert(q.arrow(bwd_ids[0]).weight)
        blocks.append(
            PairingBlock(
                source=i, target=j, weight=weight,
                forward=fwd_ids, backward=bwd_ids, matrix=matrix,
            )
        )
    return blocks


# -- exact rational elimination ------------------------------------------------------


def _rank(matrix) -> int:
    m = [list(row) for row in matrix]
    if not m or not m[0]:
        return 0
    rows, cols = len(m), len(m[0])
    rank = 0
    for col in range(cols):
        pivot = next((r for r in range(rank, rows) if m[r][col] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        inv_p = Fraction(1) / m[rank][col]
        m[rank] = [x * inv_p for x in m[rank]]
        for r in range(rows):
            if r != rank and m[r][col] != 0:
                factor = m[r][col]
                m[r] = [x - factor * y for x, y in zip(m[r], m[rank])]
        rank += 1
    return rank


def is_trivial(series: Series) -> bool:
    """True iff the wQP (arrows of the series' quiver, this potential) is
    trivial: no terms of degree >= 3 and every forward-backward block square
    and invertible."""
    normal = cyclic_normal_form(series)
    if any(len(w) != 2 for w in normal.terms):
        return False
    for block in degree2_forward_backward(normal):
        rows = len(block.forward)
        cols = len(block.backward)
        if rows != cols:
            return False
        if rows and _rank(block.matrix) != rows:
            return False
    return True


def _reduce_to_identity_blocks(matrix):
    """Invertible P (rows x rows) and Q (cols x cols) with P @ C @ Q in
    smith-like form diag(I_r, 0); returns (P, Q, r)."""
    rows = len(matrix)
    cols = len(matrix[0]) if rows else 0
    m = [[Fraction(x) for x in row] for row in matrix]
    p = [[Fraction(1 if a == b else 0) for b in range(rows)] for a in range(rows)]
    q = [[Fraction(1 if a == b else 0) for b in range(cols)] for a in range(cols)]

    # row reduction to RREF, recording row ops in p
    rank = 0
    pivot_cols = []
    for col in range(cols):
        pivot = next((r for r in range(rank, rows) if m[r][col] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        p[rank], p[pivot] = p[pivot], p[rank]
        inv_piv = Fraction(1) / m[rank][col]
        m[rank] = [x * inv_piv for x in m[rank]]
        p[rank] = [x * inv_piv for x in p[rank]]
        for r in range(rows):
            if r != rank and m[r][col] != 0:
                factor = m[r][col]
                m[r] = [x - factor * y for x, y in zip(m[r], m[rank])]
                p[r] = [x - factor * y for x, y in zip(p[r], p[rank])]
        pivot_cols.append(col)
        rank += 1
        if rank == rows:
            break

    # column ops: move pivot columns into leading position, clear the rest
    for target, col in enumerate(pivot_cols):
        if col != target:
            for r in range(rows):
                m[r][col], m[r][target] = m[r][target], m[r][col]
            for r in range(cols):
                q[r][col], q[r][target] = q[r][target], q[r][col]
    for target in range(rank):
        for col in range(cols):
            if col != target and m[target][col] != 0:
                factor = m[target][col]
                for r in range(rows):
                    m[r][col] -= factor * m[r][target]
                for r in range(cols):
                    q[r][col] -= factor * q[r][target]
    return p, q, rank


# -- graded automorphisms ----------------------------------------------------------


@dataclass
class GradedAutomorphism:
    """Substitution map arrow id -> image series; arrows not mapped go to
    themselves.  Every image word must share the arrow's endpoints and
    weight; a unitriangular map sends each arrow to itself plus terms of
    degree >= 2."""

    quiver: WeightedQuiver
    images: dict
    unitriangular: bool = False

    def __post_init__(self):
        for aid, image in self.images.items():
            a = self.quiver.arrow(aid)
            for word in image.terms:
                src, dst = word_endpoints(self.quiver, word)
                if (src, dst) != (a.src, a.dst):
                    raise PotentialError(
                        f"image of arrow {aid} has word {word} with wrong endpoints"
                    )
                if word_weight(self.quiver, word) != a.weight:
                    raise PotentialError(
                        f"image of arrow {aid} has word {word} of wrong weight"
                    )
            if self.unitriangular:
                lead = image.terms.get((aid,), None)
                if lead != 1:
                    raise PotentialError(
                        f"unitriangular image of arrow {aid} must lead with the arrow"
                    )
                if any(len(w) < 2 for w in image.terms if w != (aid,)):
                    raise PotentialError(
                        f"unitriangular correction for arrow {aid} must have degree >= 2"
                    )

    def image_of(self, aid: int, bound: int) -> Series:
        if aid in self.images:
            img = self.images[aid]
            return Series(img.quiver, img.terms, bound)
        return arrow_series(self.quiver, aid, bound)


def apply_automorphism(
    phi: GradedAutomorphism, series: Series, bound: int | None = None
):
    """Substitute each arrow by its image and expand, truncating above the
    bound.  Returns (series, spilled)."""
    if bound is None:
        bound = series.bound
    out = Series(series.quiver, {}, bound)
    spilled = False
    for word, coeff in series.terms.items():
        acc = phi.image_of(word[0], bound)
        for aid in word[1:]:
            acc, s = acc.mul(phi.image_of(aid, bound))
            spilled = spilled or s
        out = out.add(acc.scale(coeff))
    return out, spilled


def compose(later: GradedAutomorphism, earlier: GradedAutomorphism, bound: int):
    """The automorphism acting as ``later after earlier``."""
    aids = set(later.images) | set(earlier.images)
    images = {}
    spilled = False
    for aid in sorted(aids):
        img, s = apply_automorphism(later, earlier.image_of(aid, bound), bound)
        images[aid] = img
        spilled = spilled or s
    return (
        GradedAutomorphism(
            later.quiver,
            images,
            unitriangular=later.unitriangular and earlier.unitriangular,
        ),
        spilled,
    )


# -- the splitting theorem -------------------------------------------------------


@dataclass
class SplitResult:
    quiver: WeightedQuiver          # arrow set after the basis change (same ids)
    trivial_arrows: tuple           # paired ids (a_p, b_p) per block position
    reduced_arrows: tuple
    s_trivial: Series
    s_reduced: Series
    arrow_change: GradedAutomorphism | None  # linear change expressing old arrows
    automorphism: GradedAutomorphism | None  # composed unitriangular substitution


def split(series: Series, bound: int | None = None, strict: bool = True) -> SplitResult:
    """Decompose (A, S) into a trivial part (invertible 2-cycle pairing) and
    a reduced part with all words of length >= 3.

    Follows the constructive proof: bring the degree-2 pairing to identity
    blocks by a change of arrows, then iterate the unitriangular substitution
    a_p -> a_p - v_p, b_p -> b_p - u_p until no term mixes trivial-pair
    arrows with anything but their partners.  With ``strict`` a truncation
    past the bound raises :class:`SplitError`; otherwise the result is exact
    modulo words longer than the bound.
    """
    q = series.quiver
    if bound is None:
        bound = 2 * max(series.max_degree(), 2) + 2
    s = cyclic_normal_form(Series(q, series.terms, bound))

    # identity-block basis change from the degree-2 pairing
    blocks = degree2_forward_backward(s)
    images: dict = {}
    pairs: list[tuple[int, int]] = []
    for block in blocks:
        rows, cols = len(block.forward), len(block.backward)
        if rows == 0 or cols == 0:
            continue
        p, qq, rank = _reduce_to_identity_blocks(block.matrix)
        if rank == 0:
            continue
        # old forward arrow t expressed in new coordinates: sum_k P[k][t] a'_k
        for t, aid in enumerate(block.forward):
            terms = {
                (block.forward[k],): p[k][t] for k in range(rows) if p[k][t] != 0
            }
            if terms != {(aid,): Fraction(1)}:
                images[aid] = Series(q, terms, bound)
        for t, aid in enumerate(block.backward):
            terms = {
                (block.backward[k],): qq[t][k] for k in range(cols) if qq[t][k] != 0
            }
            if terms != {(aid,): Fraction(1)}:
                images[aid] = Series(q, terms, bound)
        pairs.extend(
            (block.forward[k], block.backward[k]) for k in range(rank)
        )

    spilled = False
    arrow_change = None
    if images:
        arrow_change = GradedAutomorphism(q, images, unitriangular=False)
        s, sp = apply_automorphism(arrow_change, s, bound)
        spilled = spilled or sp
        s = cyclic_normal_form(s)

    trivial_ids = {aid for pair in pairs for aid in pair}
    pair_words = {min_rotation(pair) for pair in pairs}
    partner = {}
    for a_p, b_p in pairs:
        partner[a_p] = b_p
        partner[b_p] = a_p

    def decompose(current: Series):
        """Mixed terms attributed per trivial arrow: u tails (after a_p) and
        v tails (before b_p)."""
        u: dict[int, dict] = {}
        v: dict[int, dict] = {}
        leftover = {}
        for word, coeff in current.terms.items():
            if min_rotation(word) in pair_words and len(word) == 2:
                continue
            hits = [
                (aid, pos) for pos, aid in enumerate(word) if aid in trivial_ids
            ]
            if not hits:
                leftover[word] = coeff
                continue
            aid, pos = min(hits)
            rotated = word[pos:] + word[:pos]
            is_forward = any(aid == a_p for a_p, _ in pairs)
            tail = rotated[1:]
            if is_forward:  # rotated = a_p . tail  -> u_{a_p}
                u.setdefault(aid, {})[tail] = (
                    u.get(aid, {}).get(tail, Fraction(0)) + coeff
                )
            else:  # rotated = b_p . tail ~ tail . b_p -> v_{b_p}
                v.setdefault(aid, {})[tail] = (
                    v.get(aid, {}).get(tail, Fraction(0)) + coeff
                )
        return u, v, leftover

    unitriangular_total = GradedAutomorphism(q, {}, unitriangular=True)
    max_iterations = bound + 2
    for _ in range(max_iterations):
        u, v, _ = decompose(s)
        if not u and not v:
            break
        images = {}
        for a_p, b_p in pairs:
            u_tail = u.get(a_p)   # terms after a_p: phi(b_p) = b_p - u
            v_tail = v.get(b_p)   # terms before b_p: phi(a_p) = a_p - v
            if v_tail:
                terms = {(a_p,): Fraction(1)}
                for w, c in v_tail.items():
                    terms[w] = terms.get(w, Fraction(0)) - c
                images[a_p] = Series(q, terms, bound)
            if u_tail:
                terms = {(b_p,): Fraction(1)}
                for w, c in u_tail.items():
                    terms[w] = terms.get(w, Fraction(0)) - c
                images[b_p] = Series(q, terms, bound)
        step = GradedAutomorphism(q, images, unitriangular=True)
        s, sp = apply_automorphism(step, s, bound)
        spilled = spilled or sp
        s = cyclic_normal_form(s)
        unitriangular_total, sp = compose(step, unitriangular_total, bound)
        spilled = spilled or sp
    else:
        raise SplitError(
            f"splitting did not stabilize within {max_iterations} iterations",
            degree_reached=bound,
        )

    if strict and spilled:
        raise SplitError(
            f"degree bound {bound} too small: correction terms were truncated",
            degree_reached=bound,
        )

    s_triv_terms = {}
    s_red_terms = {}
    for word, coeff in s.terms.items():
        if len(word) == 2 and min_rotation(word) in pair_words:
            s_triv_terms[word] = coeff
        else:
            s_red_terms[word] = coeff
    s_trivial = Series(q, s_triv_terms, bound)
    s_reduced = Series(q, s_red_terms, bound)
    if s_reduced.terms and s_reduced.min_degree() < 3:
        raise AssertionError(
            f"reduced part has a word of degree {s_reduced.min_degree()} < 3"
        )
    reduced_arrows = tuple(
        a.id for a in q.arrows if a.id not in trivial_ids
    )
    return SplitResult(
        quiver=q,
        trivial_arrows=tuple(pairs),
        reduced_arrows=reduced_arrows,
        s_trivial=s_trivial,
        s_reduced=s_reduced,
        arrow_change=arrow_change,
        automorphism=unitriangular_total if unitriangular_total.images else None,
    )


# -- wQP premutation and mutation ----------------------------------------------------


def qp_premutate(series: Series, k: int, bound: int | None = None):
    """Build the premutated wQP: composite arrows through k, starred
    reversals, [S] with k-passages composed, plus the canonical trivial
    3-cycles Delta_k = sum [ab] b* a*.

    Returns (premutated series, provenance) where provenance records
    composite and star arrow ids."""
    q = series.quiver
    check_valid(q)
    if bound is None:
        bound = series.bound
    vertex = q.vertex(k)
    if vertex.frozen:
        raise QuiverError(f"vertex {k} is frozen")
    incoming = sorted((a for a in q.arrows if a.dst == k), key=lambda a: a.id)
    outgoing = sorted((a for a in q.arrows if a.src == k), key=lambda a: a.id)
    for a in incoming:
        for b in outgoing:
            if a.src == b.dst:
                raise QuiverError(
                    f"composite of arrows {a.id}, {b.id} through {k} would be a loop "
                    f"(2-cycle through {k})"
                )
    for word in series.terms:
        if len(word) == 2 and k in word_vertices(q, word):
            raise PotentialError(
                f"potential term {word} is a 2-cycle through {k}; substitution undefined"
            )

    new_arrows = [a for a in q.arrows if k not in (a.src, a.dst)]
    next_id = q.next_arrow_id()
    comp_of = {}
    for a in incoming:
        for b in outgoing:
            comp_of[(a.id, b.id)] = next_id
            new_arrows.append(
                Arrow(next_id, a.src, b.dst, multiply(a.weight, b.weight))
            )
            next_id += 1
    star_of = {}
    for a in incoming + outgoing:
        star_of[a.id] = next_id
        new_arrows.append(Arrow(next_id, a.dst, a.src, invert(a.weight)))
        next_id += 1
    new_quiver = q.replace_arrows(new_arrows)

    terms = {}
    for word, coeff in series.terms.items():
        # rotate so the word starts outside k, then fuse k-passages
        start = next(
            n for n, aid in enumerate(word) if q.arrow(aid).src != k
        )
        rotated = word[start:] + word[:start]
        out_word = []
        n = 0
        while n < len(rotated):
            aid = rotated[n]
            if q.arrow(aid).dst == k:
                out_word.append(comp_of[(aid, rotated[n + 1])])
                n += 2
            else:
                out_word.append(aid)
                n += 1
        w = tuple(out_word)
        terms[w] = terms.get(w, Fraction(0)) + coeff
    for a in incoming:
        for b in outgoing:
            w = (comp_of[(a.id, b.id)], star_of[b.id], star_of[a.id])
            terms[w] = terms.get(w, Fraction(0)) + Fraction(1)

    premutated = cyclic_normal_form(Series(new_quiver, terms, bound))
    return premutated, {"composites": comp_of, "stars": star_of}


def word_vertices(q: WeightedQuiver, word: tuple) -> set:
    out = set()
    for aid in word:
        a = q.arrow(aid)
        out.add(a.src)
        out.add(a.dst)
    return out


@dataclass
class QpMutationResult:
    split: SplitResult
    quiver: WeightedQuiver           # underlying quiver of the reduced part
    potential: Series                # the reduced potential
    matches_weight_reduction: bool   # weight_reduce(quiver) == mutate(Q, k)


def qp_mutate(series: Series, k: int, bound: int | None = None) -> QpMutationResult:
    """Mutation of a weighted quiver with potential at k: premutate, then
    take the reduced part of the splitting.  Also reports whether the weight
    reduction of the underlying quiver agrees with plain weighted-quiver
    mutation (it always should)."""
    from .mutation import weight_reduce

    q = series.quiver
    premutated, _ = qp_premutate(series, k, bound)
    result = split(premutated, bound=premutated.bound)
    reduced_ids = set(result.reduced_arrows)
    reduced_quiver = result.quiver.replace_arrows(
        a for a in result.quiver.arrows if a.id in reduced_ids
    )
    reduced_potential = Series(
        reduced_quiver, result.s_reduced.terms, result.s_reduced.bound
    )
    plain = mutate(q, k, lenient=True).result
    matches = weight_reduce(reduced_quiver).result == plain
    return QpMutationResult(
        split=result,
        quiver=reduced_quiver,
        potential=reduced_potential,
        matches_weight_reduction=matches,
    )
