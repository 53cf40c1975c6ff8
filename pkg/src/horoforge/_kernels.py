"""Hot kernels for suffix enumeration and Rips edge generation.

The same source runs two ways: compiled with numba when it is installed
and HOROFORGE_NO_NUMBA is unset, or as plain numpy/Python otherwise. Words
live in padded int32 matrices; machines are dense transition tables; suffix
identity for membership tests is an int64 positional key, looked up by
binary search in a sorted key array. benchmarks/compare_backends.py times
the two paths against each other.
"""
from __future__ import annotations

import os

import numpy as np

_DISABLE_ENV = "HOROFORGE_NO_NUMBA"


def numba_enabled() -> bool:
    if os.environ.get(_DISABLE_ENV):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def _maybe_jit(fn):
    if not numba_enabled():
        return fn
    import numba

    return numba.njit(cache=False, nogil=True)(fn)


def word_key(row, length, base) -> np.int64:
    """Positional encoding of a padded word row; injective for any length."""
    key = np.int64(0)
    mult = np.int64(1)
    for t in range(length):
        key += (np.int64(row[t]) + 1) * mult
        mult *= base
    return key


def lookup(keys_sorted, idx_sorted, key) -> np.int64:
    lo = np.int64(0)
    hi = np.int64(len(keys_sorted))
    while lo < hi:
        mid = (lo + hi) // 2
        if keys_sorted[mid] < key:
            lo = mid + 1
        else:
            hi = mid
    if lo < len(keys_sorted) and keys_sorted[lo] == key:
        return idx_sorted[lo]
    return np.int64(-1)


def run_table(trans, start, row, length) -> np.int64:
    state = np.int64(start)
    for t in range(length):
        state = np.int64(trans[state, row[t]])
        if state < 0:
            return np.int64(-1)
    return state


def enum_fill(trans, acc, start, max_len, out_words, out_lens) -> np.int64:
    """Depth-first fill of all accepted words of length <= max_len.

    Emission is lexicographic by prefix; callers re-sort to (length, word).
    Returns the number of rows written.
    """
    q = trans.shape[1]
    states = np.empty(max_len + 1, dtype=np.int64)
    next_letter = np.zeros(max_len + 1, dtype=np.int64)
    path = np.empty(max_len, dtype=np.int32)
    states[0] = start
    depth = 0
    n = np.int64(0)
    if acc[start]:
        out_lens[n] = 0
        n += 1
    while depth >= 0:
        a = next_letter[depth]
        if a >= q or depth == max_len:
            next_letter[depth] = 0
            depth -= 1
            continue
        next_letter[depth] = a + 1
        target = trans[states[depth], a]
        if target < 0:
            continue
        path[depth] = a
        depth += 1
        states[depth] = target
        if acc[target]:
            for t in range(depth):
                out_words[n, t] = path[t]
            out_lens[n] = depth
            n += 1
    return n


def delete_last(row, length, a, link_masks, out) -> np.int64:
    """Delete the last copy of ``a`` that commutes to the end; -1 if none."""
    after = np.int64(0)
    pos = np.int64(-1)
    for t in range(length - 1, -1, -1):
        x = row[t]
        if x == a and after & ~link_masks[a] == 0:
            pos = t
            break
        after |= np.int64(1) << np.int64(x)
    if pos < 0:
        return np.int64(-1)
    m = 0
    for t in range(length):
        if t != pos:
            out[m] = row[t]
            m += 1
    return np.int64(m)


def shortlex_insert_row(row, length, a, link_masks, out) -> np.int64:
    """One-pass shortlex insertion into a padded row; returns new length."""
    best = np.int64(length)
    link_a = link_masks[a]
    for t in range(length - 1, -1, -1):
        x = row[t]
        if not (link_a >> np.int64(x)) & 1:
            break
        if a < x:
            best = t
    for t in range(best):
        out[t] = row[t]
    out[best] = a
    for t in range(best, length):
        out[t + 1] = row[t]
    return length + 1


def rips_edge_chunk(
    words,
    lengths,
    keys_sorted,
    idx_sorted,
    chunk_start,
    chunk_end,
    trans_geo,
    payload_geo,
    geo_start,
    trans_gs,
    gs_start,
    link_masks,
    ray_i,
    ray_j,
    k,
    key_base,
    out_edges,
) -> np.int64:
    """Same-length and shorter-suffix Rips edges for one vertex chunk.

    Each candidate is re-encoded and looked up in the vertex key table, so
    truncation (and any vertex budget) falls out of membership. Returns the
    number of (source, target) rows written to ``out_edges``.
    """
    q = trans_geo.shape[1]
    max_len = words.shape[1]
    shorter = np.empty(max_len, dtype=np.int32)
    candidate = np.empty(max_len + 1, dtype=np.int32)
    n_out = np.int64(0)
    for v_idx in range(chunk_start, chunk_end):
        ln = lengths[v_idx]
        if ln == 0:
            continue
        row = words[v_idx]
        gstate = run_table(trans_geo, geo_start, row, ln)
        last_mask = payload_geo[gstate]
        required = ray_j if (k - ln) % 2 == 0 else ray_i
        for a_k in range(q):
            if not (last_mask >> np.int64(a_k)) & 1:
                continue
            sh_len = delete_last(row, ln, a_k, link_masks, shorter)
            # same suffix length: reinsert any letter the geodesic suffix
            # machine permits, except the one giving back the source
            st = run_table(trans_gs, gs_start, shorter, sh_len)
            for a_l in range(q):
                if trans_gs[st, a_l] < 0:
                    continue
                new_len = shortlex_insert_row(shorter, sh_len, a_l, link_masks, candidate)
                if a_l == a_k:
                    same = True
                    for t in range(ln):
                        if candidate[t] != row[t]:
                            same = False
                            break
                    if same:
                        continue
                key = word_key(candidate, new_len, key_base)
                target = lookup(keys_sorted, idx_sorted, key)
                if target >= 0 and target != v_idx:
                    out_edges[n_out, 0] = v_idx
                    out_edges[n_out, 1] = target
                    n_out += 1
            # shorter suffix: valid when the prefix letter joining or leaving
            # the prefix commutes with everything that remains
            ok = True
            for t in range(sh_len):
                if not (link_masks[required] >> np.int64(shorter[t])) & 1:
                    ok = False
                    break
            if ok:
                key = word_key(shorter, sh_len, key_base)
                target = lookup(keys_sorted, idx_sorted, key)
                if target >= 0:
                    out_edges[n_out, 0] = v_idx
                    out_edges[n_out, 1] = target
                    n_out += 1
    return n_out


def normalize_row(row, length, link_masks, out) -> np.int64:
    """Shortlex normal form into ``out`` (production algorithm: cancel a
    reaching last letter, otherwise one-pass insert). Returns the length."""
    n = np.int64(0)
    for t in range(length):
        a = row[t]
        link_a = link_masks[a]
        # does a cancel? find the last copy that commutes to the end
        after = np.int64(0)
        pos = np.int64(-1)
        for s in range(n - 1, -1, -1):
            x = out[s]
            if x == a and after & ~link_a == 0:
                pos = s
                break
            after |= np.int64(1) << np.int64(x)
        if pos >= 0:
            for s in range(pos, n - 1):
                out[s] = out[s + 1]
            n -= 1
            continue
        best = n
        for s in range(n - 1, -1, -1):
            x = out[s]
            if not (link_a >> np.int64(x)) & 1:
                break
            if a < x:
                best = s
        for s in range(n, best, -1):
            out[s] = out[s - 1]
        out[best] = a
        n += 1
    return n


def oracle_normalize_row(row, length, link_masks, out) -> np.int64:
    """Independent normal form: cancel deletion pairs to a fixed point, then
    greedily extract the least front-movable letter. Shares no logic with
    the production path; used only by oracles."""
    buf = np.empty(length, dtype=np.int32)
    n = np.int64(0)
    for t in range(length):
        buf[n] = row[t]
        n += 1
    reduced = True
    while reduced:
        reduced = False
        for i in range(n):
            if reduced:
                break
            for j in range(i + 1, n):
                if buf[j] == buf[i]:
                    for s in range(j, n - 1):
                        buf[s] = buf[s + 1]
                    for s in range(i, n - 2):
                        buf[s] = buf[s + 1]
                    n -= 2
                    reduced = True
                    break
                if not (link_masks[buf[i]] >> np.int64(buf[j])) & 1:
                    break
    m = np.int64(0)
    while n > 0:
        best = np.int64(-1)
        for p in range(n):
            x = buf[p]
            ok = True
            for q in range(p):
                if not (link_masks[x] >> np.int64(buf[q])) & 1:
                    ok = False
                    break
            if ok and (best < 0 or x < buf[best]):
                best = p
        out[m] = buf[best]
        m += 1
        for s in range(best, n - 1):
            buf[s] = buf[s + 1]
        n -= 1
    return m


def busemann_formula_bulk(words, lengths, ray_i, ray_j, link_masks, out) -> None:
    """Busemann values by the prefix-suffix formula, one word per row."""
    for idx in range(words.shape[0]):
        ln = lengths[idx]
        suffix_mask = np.int64(0)
        pref_len = 0
        pref_first = np.int32(-1)
        suff_len = 0
        for t in range(ln):
            a = words[idx, t]
            if (a == ray_i or a == ray_j) and suffix_mask & ~link_masks[a] == 0:
                if pref_len == 0:
                    pref_first = a
                pref_len += 1
            else:
                suff_len += 1
                suffix_mask |= np.int64(1) << np.int64(a)
        if pref_first == ray_i:
            out[idx] = -pref_len + suff_len
        else:
            out[idx] = pref_len + suff_len


def busemann_limit_bulk(words, lengths, ray_i, ray_j, link_masks, out) -> np.int64:
    """Busemann values straight from the limit definition, at two depths.

    Returns the index of the first word whose two evaluations disagree, or
    -1 when all stabilize. Words must be shortlex (they come from the
    canonical enumeration).
    """
    max_len = words.shape[1]
    scratch_in = np.empty(2 * (max_len + 4) + max_len + 8, dtype=np.int32)
    scratch_out = np.empty(scratch_in.shape[0], dtype=np.int32)
    for idx in range(words.shape[0]):
        ln = int(lengths[idx])
        vals = np.empty(2, dtype=np.int64)
        for which in range(2):
            n_depth = ln + 2 + 2 * which
            # reverse of gamma(N) followed by the word
            pos = 0
            for t in range(n_depth - 1, -1, -1):
                scratch_in[pos] = ray_i if t % 2 == 0 else ray_j
                pos += 1
            for t in range(ln):
                scratch_in[pos] = words[idx, t]
                pos += 1
            red = normalize_row(scratch_in, pos, link_masks, scratch_out)
            vals[which] = red - n_depth
        if vals[0] != vals[1]:
            return np.int64(idx)
        out[idx] = vals[0]
    return np.int64(-1)


word_key = _maybe_jit(word_key)
lookup = _maybe_jit(lookup)
run_table = _maybe_jit(run_table)
enum_fill = _maybe_jit(enum_fill)
delete_last = _maybe_jit(delete_last)
shortlex_insert_row = _maybe_jit(shortlex_insert_row)
rips_edge_chunk = _maybe_jit(rips_edge_chunk)
normalize_row = _maybe_jit(normalize_row)
oracle_normalize_row = _maybe_jit(oracle_normalize_row)
busemann_formula_bulk = _maybe_jit(busemann_formula_bulk)
busemann_limit_bulk = _maybe_jit(busemann_limit_bulk)
