# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled mutation kernel.

Same contract as ``wquiv._kernel_pure``: states are signed weight-class
counts, here packed as sorted int64 keys (21 bits each for the two vertices
and the weight id) with 128-bit signed counts in a parallel array.  Class
counts reach ~1e22 within depth-8 searches on wild catalog quivers, which
overflows int64 but sits comfortably in __int128; anything approaching the
128-bit range raises OverflowError so callers can fall back to the pure
backend (which uses Python integers and cannot overflow).
"""

from cpython.dict cimport PyDict_GetItem
from cpython.ref cimport PyObject
from libc.stdlib cimport free, malloc, realloc
from libc.string cimport memcpy

BACKEND = "cython"

cdef extern from *:
    ctypedef long long i128 "__int128"
    ctypedef unsigned long long u128 "unsigned __int128"

cdef enum:
    SHIFT_A = 42
    SHIFT_B = 21
    FIELD_MASK = (1 << 21) - 1

# products of counts below 2**62 cannot overflow; larger factors take the
# division-verified slow path
cdef i128 MUL_FAST = (<i128> 1) << 62
cdef i128 ACC_GUARD = (<i128> 1) << 120


cdef inline i128 _checked_mul(i128 a, i128 b) except? -1:
    cdef i128 p
    if (-MUL_FAST < a < MUL_FAST) and (-MUL_FAST < b < MUL_FAST):
        return a * b
    p = a * b
    if b != 0 and p / b != a:
        raise OverflowError("class count product exceeds 128 bits")
    if p >= ACC_GUARD or -p >= ACC_GUARD:
        raise OverflowError("class count product exceeds the 128-bit guard")
    return p


cdef inline long long _pack(long a, long b, long w) noexcept nogil:
    return ((<long long> a) << SHIFT_A) | ((<long long> b) << SHIFT_B) | (<long long> w)


cdef object _i128_to_py(i128 v):
    cdef bint negative = v < 0
    cdef u128 mag = <u128> (-v) if negative else <u128> v
    cdef unsigned long long hi = <unsigned long long> (mag >> 64)
    cdef unsigned long long lo = <unsigned long long> mag
    out = (int(hi) << 64) | int(lo)
    return -out if negative else out


cdef i128 _py_to_i128(object v) except? -1:
    cdef bint negative = v < 0
    mag = -v if negative else v
    if mag >> 126:
        raise OverflowError("count does not fit in 128 bits")
    cdef unsigned long long hi = <unsigned long long> (mag >> 64)
    cdef unsigned long long lo = <unsigned long long> (mag & 0xFFFFFFFFFFFFFFFF)
    cdef u128 m = ((<u128> hi) << 64) | (<u128> lo)
    return -(<i128> m) if negative else <i128> m


cdef inline long _memo_mul(object memo, object table, long i, long j) except? -1:
    cdef object key = (i << 21) | j
    cdef PyObject* hit = PyDict_GetItem(<dict> memo, key)
    if hit != NULL:
        return <long> <object> hit
    return <long> table.mul(i, j)


cdef inline long _memo_inv(object memo, object table, long i) except? -1:
    cdef PyObject* hit = PyDict_GetItem(<dict> memo, i)
    if hit != NULL:
        return <long> <object> hit
    return <long> table.inv(i)


cdef struct ClassArray:
    long long* keys
    i128* counts
    int size
    int cap


cdef int _ca_reserve(ClassArray* ca, int need) except -1:
    if need <= ca.cap:
        return 0
    cdef int cap = ca.cap if ca.cap > 0 else 32
    while cap < need:
        cap *= 2
    ca.keys = <long long*> realloc(ca.keys, cap * sizeof(long long))
    ca.counts = <i128*> realloc(ca.counts, cap * sizeof(i128))
    if ca.keys == NULL or ca.counts == NULL:
        raise MemoryError()
    ca.cap = cap
    return 0


cdef void _ca_free(ClassArray* ca) noexcept:
    free(ca.keys)
    free(ca.counts)
    ca.keys = NULL
    ca.counts = NULL
    ca.size = 0
    ca.cap = 0


cdef int _mutate_core(long long* keys, i128* counts, int m, long k,
                      object table, bint trivial, ClassArray* out) except -1:
    """Mutate the class state at vertex k into ``out`` (sorted, zero-free);
    returns the new size."""
    cdef int idx, i, j, t, n_in = 0, n_out = 0, n_comp = 0
    cdef long a, b, w
    cdef i128 c, delta
    cdef long long key

    # worst case: every class incident to k in both roles
    cdef long* in_v = <long*> malloc(m * sizeof(long))
    cdef long* in_w = <long*> malloc(m * sizeof(long))
    cdef i128* in_c = <i128*> malloc(m * sizeof(i128))
    cdef long* out_v = <long*> malloc(m * sizeof(long))
    cdef long* out_w = <long*> malloc(m * sizeof(long))
    cdef i128* out_c = <i128*> malloc(m * sizeof(i128))
    cdef long long* comp_keys = NULL
    cdef i128* comp_counts = NULL
    if in_v == NULL or in_w == NULL or in_c == NULL or \
            out_v == NULL or out_w == NULL or out_c == NULL:
        free(in_v); free(in_w); free(in_c)
        free(out_v); free(out_w); free(out_c)
        raise MemoryError()

    try:
        _ca_reserve(out, m)
        # pass 1: copy with reversal (count negation) at k, collect arrows at k
        for idx in range(m):
            key = keys[idx]
            a = <long> (key >> SHIFT_A)
            b = <long> ((key >> SHIFT_B) & FIELD_MASK)
            w = <long> (key & FIELD_MASK)
            c = counts[idx]
            if a == k:
                out.keys[idx] = key
                out.counts[idx] = -c
                if c > 0:  # c arrows k -> b of weight w
                    out_v[n_out] = b; out_w[n_out] = w; out_c[n_out] = c
                    n_out += 1
                else:      # -c arrows b -> k of weight w^-1
                    in_v[n_in] = b
                    in_w[n_in] = 0 if trivial else _memo_inv(table.inv_memo, table, w)
                    in_c[n_in] = -c
                    n_in += 1
            elif b == k:
                out.keys[idx] = key
                out.counts[idx] = -c
                if c > 0:  # c arrows a -> k of weight w
                    in_v[n_in] = a; in_w[n_in] = w; in_c[n_in] = c
                    n_in += 1
                else:      # -c arrows k -> a of weight w^-1
                    out_v[n_out] = a
                    out_w[n_out] = 0 if trivial else _memo_inv(table.inv_memo, table, w)
                    out_c[n_out] = -c
                    n_out += 1
            else:
                out.keys[idx] = key
                out.counts[idx] = c
        out.size = m

        if n_in and n_out:
            comp_keys = <long long*> malloc(n_in * n_out * sizeof(long long))
            comp_counts = <i128*> malloc(n_in * n_out * sizeof(i128))
            if comp_keys == NULL or comp_counts == NULL:
                raise MemoryError()
            for i in range(n_in):
                for j in range(n_out):
                    a = in_v[i]
                    b = out_v[j]
                    if a == b:
                        raise ValueError("2-cycle through the mutation vertex")
                    w = 0 if trivial else _memo_mul(table.mul_memo, table, in_w[i], out_w[j])
                    delta = _checked_mul(in_c[i], out_c[j])
                    if a < b:
                        key = _pack(a, b, w)
                    else:
                        if not trivial:
                            w = _memo_inv(table.inv_memo, table, w)
                        key = _pack(b, a, w)
                        delta = -delta
                    comp_keys[n_comp] = key
                    comp_counts[n_comp] = delta
                    n_comp += 1
            # insertion sort (tiny) and merge duplicates
            for i in range(1, n_comp):
                key = comp_keys[i]
                delta = comp_counts[i]
                j = i - 1
                while j >= 0 and comp_keys[j] > key:
                    comp_keys[j + 1] = comp_keys[j]
                    comp_counts[j + 1] = comp_counts[j]
                    j -= 1
                comp_keys[j + 1] = key
                comp_counts[j + 1] = delta
            t = 0
            for i in range(n_comp):
                if t and comp_keys[t - 1] == comp_keys[i]:
                    comp_counts[t - 1] += comp_counts[i]
                else:
                    comp_keys[t] = comp_keys[i]
                    comp_counts[t] = comp_counts[i]
                    t += 1
            n_comp = t

            # merge sorted base (out) with sorted composites into fresh array
            merged = ClassArray(NULL, NULL, 0, 0)
            _ca_reserve(&merged, out.size + n_comp)
            i = 0; j = 0; t = 0
            while i < out.size or j < n_comp:
                if j >= n_comp or (i < out.size and out.keys[i] < comp_keys[j]):
                    merged.keys[t] = out.keys[i]
                    merged.counts[t] = out.counts[i]
                    i += 1; t += 1
                elif i >= out.size or comp_keys[j] < out.keys[i]:
                    merged.keys[t] = comp_keys[j]
                    merged.counts[t] = comp_counts[j]
                    j += 1; t += 1
                else:
                    c = out.counts[i] + comp_counts[j]
                    if c >= ACC_GUARD or -c >= ACC_GUARD:
                        _ca_free(&merged)
                        raise OverflowError("class count exceeds the 128-bit guard")
                    if c != 0:
                        merged.keys[t] = out.keys[i]
                        merged.counts[t] = c
                        t += 1
                    i += 1; j += 1
            merged.size = t
            # swap merged into out
            free(out.keys); free(out.counts)
            out.keys = merged.keys
            out.counts = merged.counts
            out.size = merged.size
            out.cap = merged.cap
        # drop zero counts (only possible without composites if input had none;
        # counts here are nonzero by construction in the no-composite path)
        return out.size
    finally:
        free(in_v); free(in_w); free(in_c)
        free(out_v); free(out_w); free(out_c)
        free(comp_keys); free(comp_counts)


cdef tuple _class_tuple(long long key, i128 count):
    return (
        <long> (key >> SHIFT_A),
        <long> ((key >> SHIFT_B) & FIELD_MASK),
        <long> (key & FIELD_MASK),
        _i128_to_py(count),
    )


cdef object _check_packed(long long* keys, i128* counts, int m,
                          object frozen_flags, bint check_two_cycles,
                          bint check_frozen_pair, bint check_sign):
    cdef int idx, run_start
    cdef long a, b
    cdef long long key, pair, run_pair
    if check_frozen_pair:
        for idx in range(m):
            key = keys[idx]
            a = <long> (key >> SHIFT_A)
            b = <long> ((key >> SHIFT_B) & FIELD_MASK)
            if frozen_flags[a] and frozen_flags[b]:
                return {"kind": "frozen-arrow", "witness": _class_tuple(key, counts[idx])}
    if check_sign:
        rows = {}
        for idx in range(m):
            key = keys[idx]
            a = <long> (key >> SHIFT_A)
            b = <long> ((key >> SHIFT_B) & FIELD_MASK)
            if frozen_flags[b] and not frozen_flags[a]:
                row = rows.setdefault(a, {})
                row[b] = row.get(b, 0) + _i128_to_py(counts[idx])
            elif frozen_flags[a] and not frozen_flags[b]:
                row = rows.setdefault(b, {})
                row[a] = row.get(a, 0) - _i128_to_py(counts[idx])
        for k in sorted(rows):
            entries = rows[k]
            has_pos = any(v > 0 for v in entries.values())
            has_neg = any(v < 0 for v in entries.values())
            if has_pos and has_neg:
                return {"kind": "incoherent-row", "witness": (k, sorted(entries.items()))}
    if check_two_cycles:
        # classes on one vertex pair are adjacent in key order
        idx = 0
        while idx < m:
            run_pair = keys[idx] >> SHIFT_B
            run_start = idx
            idx += 1
            while idx < m and (keys[idx] >> SHIFT_B) == run_pair:
                if (counts[run_start] > 0) != (counts[idx] > 0):
                    return {
                        "kind": "two-cycle",
                        "witness": (
                            _class_tuple(keys[run_start], counts[run_start]),
                            _class_tuple(keys[idx], counts[idx]),
                        ),
                    }
                idx += 1
    return None


cdef int _check_fast(long long* keys, i128* counts, int m, char* froz,
                     int* mut_idx, int* froz_idx, int n_mut, int n_froz,
                     i128* rows, bint c2, bint cf, bint cs) noexcept nogil:
    """C-only violation test mirroring _check_packed's order; returns 0 when
    clean, else 1 (frozen pair), 2 (incoherent row), 3 (two-cycle)."""
    cdef int idx, r, col
    cdef long a, b
    cdef long long key
    cdef bint has_pos, has_neg
    cdef i128 v
    if cf:
        for idx in range(m):
            key = keys[idx]
            a = <long> (key >> SHIFT_A)
            b = <long> ((key >> SHIFT_B) & FIELD_MASK)
            if froz[a] and froz[b]:
                return 1
    if cs and n_mut and n_froz:
        for idx in range(n_mut * n_froz):
            rows[idx] = 0
        for idx in range(m):
            key = keys[idx]
            a = <long> (key >> SHIFT_A)
            b = <long> ((key >> SHIFT_B) & FIELD_MASK)
            if froz[b] and not froz[a]:
                rows[mut_idx[a] * n_froz + froz_idx[b]] += counts[idx]
            elif froz[a] and not froz[b]:
                rows[mut_idx[b] * n_froz + froz_idx[a]] -= counts[idx]
        for r in range(n_mut):
            has_pos = False
            has_neg = False
            for col in range(n_froz):
                v = rows[r * n_froz + col]
                if v > 0:
                    has_pos = True
                elif v < 0:
                    has_neg = True
            if has_pos and has_neg:
                return 2
    if c2:
        if _has_two_cycle_packed(keys, counts, m):
            return 3
    return 0


cdef bint _has_two_cycle_packed(long long* keys, i128* counts, int m) noexcept nogil:
    cdef int idx = 0, run_start
    cdef long long run_pair
    while idx < m:
        run_pair = keys[idx] >> SHIFT_B
        run_start = idx
        idx += 1
        while idx < m and (keys[idx] >> SHIFT_B) == run_pair:
            if (counts[run_start] > 0) != (counts[idx] > 0):
                return True
            idx += 1
    return False


cdef int _state_to_arrays(object state, long long** keys_out, i128** counts_out) except -1:
    cdef int m = len(state)
    cdef long long* keys = <long long*> malloc((m if m else 1) * sizeof(long long))
    cdef i128* counts = <i128*> malloc((m if m else 1) * sizeof(i128))
    if keys == NULL or counts == NULL:
        free(keys); free(counts)
        raise MemoryError()
    cdef int idx = 0
    cdef long long prev_key = -1
    for a, b, w, c in state:
        keys[idx] = _pack(a, b, w)
        if keys[idx] < prev_key:
            free(keys); free(counts)
            raise ValueError("state classes must be sorted")
        prev_key = keys[idx]
        counts[idx] = _py_to_i128(c)
        idx += 1
    keys_out[0] = keys
    counts_out[0] = counts
    return m


cdef bytes _encode(long long* keys, i128* counts, int m):
    cdef int nbytes = m * (sizeof(long long) + sizeof(i128))
    cdef char* buf = <char*> malloc(nbytes if nbytes else 1)
    if buf == NULL:
        raise MemoryError()
    try:
        memcpy(buf, keys, m * sizeof(long long))
        memcpy(buf + m * sizeof(long long), counts, m * sizeof(i128))
        return buf[:nbytes]
    finally:
        free(buf)


cdef int _decode(bytes blob, long long** keys_out, i128** counts_out) except -1:
    cdef int m = len(blob) // (sizeof(long long) + sizeof(i128))
    cdef long long* keys = <long long*> malloc((m if m else 1) * sizeof(long long))
    cdef i128* counts = <i128*> malloc((m if m else 1) * sizeof(i128))
    if keys == NULL or counts == NULL:
        free(keys); free(counts)
        raise MemoryError()
    cdef const char* raw = blob
    memcpy(keys, raw, m * sizeof(long long))
    memcpy(counts, raw + m * sizeof(long long), m * sizeof(i128))
    keys_out[0] = keys
    counts_out[0] = counts
    return m


# -- python-level API ----------------------------------------------------------


def state_from_arrows(triples, table):
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
    return tuple(sorted((a, b, w, c) for (a, b, w), c in classes.items() if c != 0))


def arrows_from_state(state, table):
    out = []
    for a, b, w, c in state:
        if c > 0:
            out.extend([(a, b, w)] * c)
        else:
            out.extend([(b, a, table.inv(w))] * (-c))
    return tuple(sorted(out))


def mutate_state(state, k, table):
    cdef long long* keys = NULL
    cdef i128* counts = NULL
    cdef int m = _state_to_arrays(state, &keys, &counts)
    cdef ClassArray out = ClassArray(NULL, NULL, 0, 0)
    cdef bint trivial = table.size() == 1
    cdef int size, idx
    try:
        size = _mutate_core(keys, counts, m, k, table, trivial, &out)
        return tuple(_class_tuple(out.keys[idx], out.counts[idx]) for idx in range(size))
    finally:
        free(keys)
        free(counts)
        _ca_free(&out)


def find_two_cycle(state):
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


def explore(n, frozen, state, table, max_depth,
            check_two_cycles=False, check_frozen_pair=False, check_sign=False):
    """BFS over mutation sequences; see the pure kernel for the contract."""
    cdef list mutable = [v for v in range(n) if not frozen[v]]
    cdef int n_mutable = len(mutable)
    cdef bint trivial = table.size() == 1
    cdef bint c2 = check_two_cycles, cf = check_frozen_pair, cs = check_sign
    cdef int depth_cap = max_depth
    cdef int nn = n

    cdef long long* root_keys = NULL
    cdef i128* root_counts = NULL
    cdef int m0 = _state_to_arrays(tuple(sorted(state)), &root_keys, &root_counts)
    cdef ClassArray scratch = ClassArray(NULL, NULL, 0, 0)
    cdef long long* cur_keys = NULL
    cdef i128* cur_counts = NULL
    cdef int m, size, ki, head, idx, last, verdict
    cdef long k
    cdef object violation, child_key

    # C-side lookup tables for the per-state checks
    cdef char* froz = <char*> malloc(nn if nn else 1)
    cdef int* mut_idx = <int*> malloc((nn if nn else 1) * sizeof(int))
    cdef int* froz_idx = <int*> malloc((nn if nn else 1) * sizeof(int))
    cdef i128* rows = NULL
    cdef int n_mut = 0, n_froz = 0
    if froz == NULL or mut_idx == NULL or froz_idx == NULL:
        free(froz); free(mut_idx); free(froz_idx)
        free(root_keys); free(root_counts)
        raise MemoryError()
    for idx in range(nn):
        froz[idx] = 1 if frozen[idx] else 0
        if froz[idx]:
            froz_idx[idx] = n_froz
            mut_idx[idx] = -1
            n_froz += 1
        else:
            mut_idx[idx] = n_mut
            froz_idx[idx] = -1
            n_mut += 1
    if n_mut and n_froz:
        rows = <i128*> malloc(n_mut * n_froz * sizeof(i128))
        if rows == NULL:
            free(froz); free(mut_idx); free(froz_idx)
            free(root_keys); free(root_counts)
            raise MemoryError()

    try:
        verdict = _check_fast(root_keys, root_counts, m0, froz, mut_idx, froz_idx,
                              n_mut, n_froz, rows, c2, cf, cs)
        if verdict:
            violation = _check_packed(root_keys, root_counts, m0, frozen, c2, cf, cs)
            violation["sequence"] = []
            return {"states": 1, "violation": violation}
        root_blob = _encode(root_keys, root_counts, m0)

        states = [root_blob]
        parents = [-1]
        via = [-1]
        depths = [0]
        blocked = [_has_two_cycle_packed(root_keys, root_counts, m0)]
        seen = {root_blob: 0}

        head = 0
        while head < len(states):
            idx = head
            head += 1
            if blocked[idx] or depths[idx] >= depth_cap:
                continue
            free(cur_keys); free(cur_counts)
            cur_keys = NULL; cur_counts = NULL
            m = _decode(states[idx], &cur_keys, &cur_counts)
            last = via[idx]
            for ki in range(n_mutable):
                k = mutable[ki]
                if k == last:
                    continue
                size = _mutate_core(cur_keys, cur_counts, m, k, table, trivial, &scratch)
                child_key = _encode(scratch.keys, scratch.counts, size)
                if child_key in seen:
                    continue
                seen[child_key] = len(states)
                states.append(child_key)
                parents.append(idx)
                via.append(k)
                depths.append(depths[idx] + 1)
                blocked.append(_has_two_cycle_packed(scratch.keys, scratch.counts, size))
                verdict = _check_fast(scratch.keys, scratch.counts, size, froz,
                                      mut_idx, froz_idx, n_mut, n_froz, rows,
                                      c2, cf, cs)
                if verdict:
                    violation = _check_packed(
                        scratch.keys, scratch.counts, size, frozen, c2, cf, cs
                    )
                    seq = []
                    node = len(states) - 1
                    while node > 0:
                        seq.append(via[node])
                        node = parents[node]
                    seq.reverse()
                    violation["sequence"] = seq
                    return {"states": len(states), "violation": violation}
        return {"states": len(states), "violation": None}
    finally:
        free(root_keys)
        free(root_counts)
        free(cur_keys)
        free(cur_counts)
        free(froz)
        free(mut_idx)
        free(froz_idx)
        free(rows)
        _ca_free(&scratch)
