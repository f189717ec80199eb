"""Pure-numpy fallback kernels.

Semantically identical to the numba backend (same clamping, the same
normalization points, the same tie-break streams in graph construction),
so the two can be cross-checked and benchmarked against each other.
Message updates are vectorized over padded (check, slot) tensors and
chunked so the temporaries stay bounded; graph routines fall back to
plain Python BFS, which is fine for construction-time work.
"""

from __future__ import annotations

from collections import deque

import numpy as np

_CHUNK_FLOATS = 4_000_000  # ~32 MB of float64 temporaries per padded chunk
_U64 = 0xFFFFFFFFFFFFFFFF


def fwht_rows(a):
    """In-place unnormalized Walsh-Hadamard transform of every row."""
    n = a.shape[-1]
    h = 1
    while h < n:
        v = a.reshape(-1, n // (2 * h), 2, h)
        x = v[:, :, 0, :].copy()
        y = v[:, :, 1, :].copy()
        v[:, :, 0, :] = x + y
        v[:, :, 1, :] = x - y
        h *= 2


def check_pass(q_msg, r_msg, check_ptr, perm_in, perm_out, z, floor):
    """Check-to-symbol update for all checks (see numba twin for the math)."""
    q = q_msg.shape[1]
    n_chk = len(check_ptr) - 1
    deg = np.diff(check_ptr)
    kmax = int(deg.max())
    inv_q = 1.0 / q
    step = max(1, _CHUNK_FLOATS // (kmax * q))

    slot = np.arange(kmax)[None, :]
    m0 = 0
    while m0 < n_chk:
        m1 = min(n_chk, m0 + step)
        elo, ehi = int(check_ptr[m0]), int(check_ptr[m1])
        dd = deg[m0:m1]

        qt = np.take_along_axis(
            q_msg[elo:ehi], perm_in[elo:ehi].astype(np.int64), axis=1
        )
        fwht_rows(qt)

        valid = slot < dd[:, None]
        eidx = np.where(valid, (check_ptr[m0:m1, None] - elo) + slot, 0)
        F = np.where(valid[:, :, None], qt[eidx], 1.0)

        pref = np.ones((m1 - m0, kmax + 1, q))
        np.cumprod(F, axis=1, out=pref[:, 1:])
        suf = np.ones_like(pref)
        suf[:, :-1] = np.cumprod(F[:, ::-1], axis=1)[:, ::-1]
        ext = (pref[:, :-1] * suf[:, 1:])[valid]  # (edges, q) in CSR order

        fwht_rows(ext)
        ext *= inv_q
        zz = np.repeat(z[m0:m1].astype(np.int64), dd)
        idx = perm_out[elo:ehi].astype(np.int64) ^ zz[:, None]
        r = np.take_along_axis(ext, idx, axis=1)
        np.maximum(r, floor, out=r)
        r /= r.sum(axis=1, keepdims=True)
        r_msg[elo:ehi] = r
        m0 = m1


def symbol_pass(prior, r_msg, q_msg, sym_ptr, sym_edge, xhat, floor):
    """Symbol-to-check update plus tentative decision for all symbols."""
    n_sym, q = prior.shape
    deg = np.diff(sym_ptr)
    dmax = int(deg.max())
    step = max(1, _CHUNK_FLOATS // (dmax * q))

    slot = np.arange(dmax)[None, :]
    n0 = 0
    while n0 < n_sym:
        n1 = min(n_sym, n0 + step)
        dd = deg[n0:n1]
        valid = slot < dd[:, None]
        eids = sym_edge[np.where(valid, sym_ptr[n0:n1, None] + slot, 0)]
        R = np.where(valid[:, :, None], r_msg[eids], 1.0)

        pref = np.empty((n1 - n0, dmax + 1, q))
        pref[:, 0] = prior[n0:n1]
        for i in range(dmax):
            pref[:, i + 1] = pref[:, i] * R[:, i]
        suf = np.ones_like(pref)
        for i in range(dmax - 1, -1, -1):
            suf[:, i] = R[:, i] * suf[:, i + 1]

        xhat[n0:n1] = np.argmax(pref[:, dmax], axis=1)
        ext = (pref[:, :-1] * suf[:, 1:])[valid]
        np.maximum(ext, floor, out=ext)
        ext /= ext.sum(axis=1, keepdims=True)
        q_msg[eids[valid]] = ext
        n0 = n1


def posteriors(prior, r_msg, sym_ptr, sym_edge, out):
    """Normalized per-symbol posteriors (prior times all check messages)."""
    n_sym, q = prior.shape
    deg = np.diff(sym_ptr)
    dmax = int(deg.max())
    slot = np.arange(dmax)[None, :]
    valid = slot < deg[:, None]
    eids = sym_edge[np.where(valid, sym_ptr[:-1][:, None] + slot, 0)]
    R = np.where(valid[:, :, None], r_msg[eids], 1.0)
    post = prior.copy()
    for i in range(dmax):
        post *= R[:, i]
    post /= post.sum(axis=1, keepdims=True)
    out[:] = post


def aggregate_priors(logp0, logp1, rep_log, exp_t, log_t, n_sym, out):
    """Fold per-bit log posteriors of all symbol copies into mother priors."""
    n_copies, p = logp0.shape
    q = out.shape[1]
    qm1 = q - 1 if q > 2 else 1

    shifts = p - 1 - np.arange(p)
    bits = ((np.arange(q)[None, :] >> shifts[:, None]) & 1).astype(np.float64)
    b0 = 1.0 - bits

    out[:] = logp0[:n_sym] @ b0 + logp1[:n_sym] @ bits

    n_rep = n_copies - n_sym
    alog = log_t[np.arange(q)].astype(np.int64)
    start = 0
    while start < n_rep:
        count = min(n_sym, n_rep - start)
        rows = slice(n_sym + start, n_sym + start + count)
        scores = logp0[rows] @ b0 + logp1[rows] @ bits
        la = (rep_log[start : start + count, None].astype(np.int64) + alog[None, :]) % qm1
        perm = exp_t[la].astype(np.int64)
        perm[:, 0] = 0
        out[:count] += np.take_along_axis(scores, perm, axis=1)
        start += count

    out -= out.max(axis=1, keepdims=True)
    np.exp(out, out=out)
    out /= out.sum(axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# Graph construction (python twins of the numba routines)
# ---------------------------------------------------------------------------


def _xorshift64s(state):
    state ^= state >> 12
    state = (state ^ (state << 25)) & _U64
    state ^= state >> 27
    return state & _U64


def _rand_below(state, n):
    state = _xorshift64s(state)
    return state, ((state * 2685821657736338717 & _U64) >> 32) % n


def _pick_check(deg, cap, dist, use_dist, exclude, state):
    n_chk = len(deg)
    best = -1
    best_unreached = False
    best_dist = -1
    best_num = 0
    best_den = 1
    best_deg = 0
    ties = 0

    for c in range(n_chk):
        if c == exclude or deg[c] >= cap[c]:
            continue
        unreached = False
        dc = -1
        if use_dist:
            dc = int(dist[c])
            unreached = dc < 0

        better = False
        tie = False
        if best < 0:
            better = True
        elif use_dist and unreached != best_unreached:
            better = unreached
        elif use_dist and not unreached and dc != best_dist:
            better = dc > best_dist
        else:
            left = int(deg[c]) * best_den
            right = best_num * int(cap[c])
            if left != right:
                better = left < right
            elif deg[c] != best_deg:
                better = int(deg[c]) < best_deg
            else:
                tie = True

        if better:
            best = c
            best_unreached = unreached
            best_dist = dc
            best_num = int(deg[c])
            best_den = int(cap[c])
            best_deg = int(deg[c])
            ties = 1
        elif tie:
            ties += 1
            state, r = _rand_below(state, ties)
            if r == 0:
                best = c
                best_dist = dc
    return best, state


def peg_build(n_chk, cap, sym_checks, seed):
    """Python twin of the numba PEG placement (identical output)."""
    n_sym = sym_checks.shape[0]
    deg = np.zeros(n_chk, np.int32)
    adj: list[list[int]] = [[] for _ in range(n_chk)]
    dist = np.empty(n_chk, np.int32)

    state = (2 * seed + 1) & _U64
    for _ in range(8):
        state = _xorshift64s(state)

    for s in range(n_sym):
        c1, state = _pick_check(deg, cap, dist, False, -1, state)
        if c1 < 0:
            return s

        dist[:] = -1
        dist[c1] = 0
        queue = deque([c1])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    queue.append(v)

        c2, state = _pick_check(deg, cap, dist, True, c1, state)
        if c2 < 0:
            return s

        sym_checks[s, 0] = c1
        sym_checks[s, 1] = c2
        adj[c1].append(c2)
        adj[c2].append(c1)
        deg[c1] += 1
        deg[c2] += 1
    return -1


def check_graph_girth(sym_checks, n_chk):
    """Shortest cycle length in the check multigraph (0 when acyclic)."""
    n_edge = sym_checks.shape[0]
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n_chk)]
    for e in range(n_edge):
        a, b = int(sym_checks[e, 0]), int(sym_checks[e, 1])
        adj[a].append((b, e))
        adj[b].append((a, e))

    dist = np.empty(n_chk, np.int32)
    pedge = np.empty(n_chk, np.int32)
    stamp = np.zeros(n_chk, np.int32)
    best = 2 * n_edge + 1

    for src in range(n_chk):
        token = src + 1
        stamp[src] = token
        dist[src] = 0
        pedge[src] = -1
        queue = deque([src])
        while queue:
            u = queue.popleft()
            du = int(dist[u])
            if 2 * du + 1 >= best:
                continue
            for v, ev in adj[u]:
                if ev == pedge[u]:
                    continue
                if stamp[v] != token:
                    stamp[v] = token
                    dist[v] = du + 1
                    pedge[v] = ev
                    queue.append(v)
                else:
                    cyc = du + int(dist[v]) + 1
                    if cyc < best:
                        best = cyc
        if best == 2:
            break

    return 0 if best > 2 * n_edge else best
