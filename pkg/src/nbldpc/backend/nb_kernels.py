"""Numba implementations of the hot kernels.

All kernels are single-threaded on purpose: Monte Carlo runs parallelize
over frames in worker processes, and keeping the kernels serial makes the
results bitwise independent of scheduling.  ``cache=True`` so that worker
processes load the compiled code from disk instead of re-jitting.

Message conventions (shared with the numpy backend):

- message arrays are C-contiguous float64 with one length-q row per edge;
- rows are clamped to ``floor`` and renormalized to sum 1 before they are
  handed to the next processing stage;
- permutation tables are int16 (q <= 4096) and syndrome symbols are
  composed into the outgoing gather index by XOR.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# ---------------------------------------------------------------------------
# Walsh-Hadamard transform
# ---------------------------------------------------------------------------


@njit(cache=True, fastmath=True, inline="always")
def _r8_pass(v, h, q):
    step = 8 * h
    for i in range(0, q, step):
        for j in range(i, i + h):
            a0 = v[j]
            a1 = v[j + h]
            a2 = v[j + 2 * h]
            a3 = v[j + 3 * h]
            a4 = v[j + 4 * h]
            a5 = v[j + 5 * h]
            a6 = v[j + 6 * h]
            a7 = v[j + 7 * h]
            b0 = a0 + a1
            b1 = a0 - a1
            b2 = a2 + a3
            b3 = a2 - a3
            b4 = a4 + a5
            b5 = a4 - a5
            b6 = a6 + a7
            b7 = a6 - a7
            c0 = b0 + b2
            c1 = b1 + b3
            c2 = b0 - b2
            c3 = b1 - b3
            c4 = b4 + b6
            c5 = b5 + b7
            c6 = b4 - b6
            c7 = b5 - b7
            v[j] = c0 + c4
            v[j + h] = c1 + c5
            v[j + 2 * h] = c2 + c6
            v[j + 3 * h] = c3 + c7
            v[j + 4 * h] = c0 - c4
            v[j + 5 * h] = c1 - c5
            v[j + 6 * h] = c2 - c6
            v[j + 7 * h] = c3 - c7


@njit(cache=True, fastmath=True, inline="always")
def _fwht(v):
    """Unnormalized in-place transform of one length-2^p row (radix 8)."""
    q = v.shape[0]
    h = 1
    while 8 * h <= q:
        _r8_pass(v, h, q)
        h *= 8
    while h < q:  # leftover factor of 2 or 4
        for i in range(0, q, 2 * h):
            for j in range(i, i + h):
                x = v[j]
                y = v[j + h]
                v[j] = x + y
                v[j + h] = x - y
        h *= 2


@njit(cache=True, fastmath=True)
def fwht_rows(a):
    """In-place unnormalized Walsh-Hadamard transform of every row."""
    for r in range(a.shape[0]):
        _fwht(a[r])


# ---------------------------------------------------------------------------
# Sum-product message passing
# ---------------------------------------------------------------------------


@njit(cache=True, fastmath=True)
def check_pass(q_msg, r_msg, check_ptr, perm_in, perm_out, z, floor):
    """Check-to-symbol update for all checks (one flooding half-iteration).

    Per check: permute each incoming message by the inverse edge
    coefficient, transform, form extrinsic products in the transform
    domain, transform back, then read out through the coefficient
    permutation shifted by the check's syndrome symbol.
    """
    n_chk = check_ptr.shape[0] - 1
    q = q_msg.shape[1]
    inv_q = 1.0 / q

    kmax = 0
    for m in range(n_chk):
        d = check_ptr[m + 1] - check_ptr[m]
        if d > kmax:
            kmax = d

    work = np.empty((kmax, q))
    pref = np.empty((kmax + 1, q))
    tmp = np.empty(q)

    for m in range(n_chk):
        lo = check_ptr[m]
        d = check_ptr[m + 1] - lo
        zm = np.int64(z[m])

        for i in range(d):
            e = lo + i
            for a in range(q):
                work[i, a] = q_msg[e, perm_in[e, a]]
            _fwht(work[i])

        # extrinsic products: pref[i] = prod of transforms 0..i-1,
        # running suffix folds in from the right
        for a in range(q):
            pref[0, a] = 1.0
        for i in range(d):
            for a in range(q):
                pref[i + 1, a] = pref[i, a] * work[i, a]
        for a in range(q):
            tmp[a] = 1.0
        for i in range(d - 1, -1, -1):
            for a in range(q):
                p = pref[i, a] * tmp[a]
                tmp[a] *= work[i, a]
                work[i, a] = p

        for i in range(d):
            e = lo + i
            _fwht(work[i])
            s = 0.0
            for a in range(q):
                v = work[i, np.int64(perm_out[e, a]) ^ zm] * inv_q
                if v < floor:
                    v = floor
                r_msg[e, a] = v
                s += v
            inv_s = 1.0 / s
            for a in range(q):
                r_msg[e, a] *= inv_s


@njit(cache=True, fastmath=True)
def symbol_pass(prior, r_msg, q_msg, sym_ptr, sym_edge, xhat, floor):
    """Symbol-to-check update plus tentative decision for all symbols.

    Writes the extrinsic messages for the next iteration into ``q_msg``
    and the argmax of prior times all incoming check messages into
    ``xhat`` (ties resolved to the smallest symbol value).
    """
    n_sym = prior.shape[0]
    q = prior.shape[1]

    dmax = 0
    for n in range(n_sym):
        d = sym_ptr[n + 1] - sym_ptr[n]
        if d > dmax:
            dmax = d
    pref = np.empty((dmax + 1, q))
    tmp = np.empty(q)

    for n in range(n_sym):
        lo = sym_ptr[n]
        d = sym_ptr[n + 1] - lo

        if d == 2:  # the construction's regular case, kept branch-light
            e1 = sym_edge[lo]
            e2 = sym_edge[lo + 1]
            best = -1.0
            bi = 0
            s1 = 0.0
            s2 = 0.0
            for a in range(q):
                pa = prior[n, a]
                ra = r_msg[e1, a]
                rb = r_msg[e2, a]
                post = pa * ra * rb
                if post > best:
                    best = post
                    bi = a
                v1 = pa * rb
                if v1 < floor:
                    v1 = floor
                v2 = pa * ra
                if v2 < floor:
                    v2 = floor
                q_msg[e1, a] = v1
                q_msg[e2, a] = v2
                s1 += v1
                s2 += v2
            xhat[n] = bi
            i1 = 1.0 / s1
            i2 = 1.0 / s2
            for a in range(q):
                q_msg[e1, a] *= i1
                q_msg[e2, a] *= i2
            continue

        for a in range(q):
            pref[0, a] = prior[n, a]
        for i in range(d):
            e = sym_edge[lo + i]
            for a in range(q):
                pref[i + 1, a] = pref[i, a] * r_msg[e, a]
        best = -1.0
        bi = 0
        for a in range(q):
            if pref[d, a] > best:
                best = pref[d, a]
                bi = a
        xhat[n] = bi
        for a in range(q):
            tmp[a] = 1.0
        for i in range(d - 1, -1, -1):
            e = sym_edge[lo + i]
            s = 0.0
            for a in range(q):
                v = pref[i, a] * tmp[a]
                tmp[a] *= r_msg[e, a]
                if v < floor:
                    v = floor
                q_msg[e, a] = v
                s += v
            inv_s = 1.0 / s
            for a in range(q):
                q_msg[e, a] *= inv_s


@njit(cache=True, fastmath=True)
def posteriors(prior, r_msg, sym_ptr, sym_edge, out):
    """Normalized per-symbol posteriors (prior times all check messages)."""
    n_sym = prior.shape[0]
    q = prior.shape[1]
    for n in range(n_sym):
        lo = sym_ptr[n]
        d = sym_ptr[n + 1] - lo
        s = 0.0
        for a in range(q):
            v = prior[n, a]
            for i in range(d):
                v *= r_msg[sym_edge[lo + i], a]
            out[n, a] = v
            s += v
        inv_s = 1.0 / s
        for a in range(q):
            out[n, a] *= inv_s


# ---------------------------------------------------------------------------
# Prior aggregation over multiplicative repetitions
# ---------------------------------------------------------------------------


@njit(cache=True, fastmath=True)
def aggregate_priors(logp0, logp1, rep_log, exp_t, log_t, n_sym, out):
    """Fold per-bit log posteriors of all symbol copies into mother priors.

    ``logp0``/``logp1`` hold the log probability of each transmitted bit
    being 0/1 given its channel observation, one row per transmitted
    symbol (mother word first, then repetition stages in order, MSB
    first within a row).  Copy t*N+n constrains mother symbol n through
    the value rotation by its repetition coefficient, so its row scores
    are accumulated at the rotated index.  Rows of ``out`` are softmax
    normalized log scores, i.e. proper distributions.
    """
    n_copies = logp0.shape[0]
    p = logp0.shape[1]
    q = out.shape[1]
    qm1 = q - 1

    cur = np.empty(q)
    out[:, :] = 0.0

    for c in range(n_copies):
        # score of this copy taking each of the q values: in-place
        # doubling DP over bit positions, MSB first
        cur[0] = 0.0
        size = 1
        for j in range(p):
            l0 = logp0[c, j]
            l1 = logp1[c, j]
            for i in range(size - 1, -1, -1):
                v = cur[i]
                cur[2 * i + 1] = v + l1
                cur[2 * i] = v + l0
            size *= 2

        if c < n_sym:
            for a in range(q):
                out[c, a] += cur[a]
        else:
            n = (c - n_sym) % n_sym
            lr = np.int64(rep_log[c - n_sym])
            out[n, 0] += cur[0]
            for a in range(1, q):
                la = lr + np.int64(log_t[a])
                if la >= qm1:
                    la -= qm1
                out[n, a] += cur[exp_t[la]]

    for n in range(n_sym):
        mx = out[n, 0]
        for a in range(1, q):
            if out[n, a] > mx:
                mx = out[n, a]
        s = 0.0
        for a in range(q):
            e = np.exp(out[n, a] - mx)
            out[n, a] = e
            s += e
        inv_s = 1.0 / s
        for a in range(q):
            out[n, a] *= inv_s


# ---------------------------------------------------------------------------
# Graph construction (PEG specialized to symbol degree 2)
# ---------------------------------------------------------------------------


@njit(cache=True, inline="always")
def _xorshift64s(state):
    state ^= state >> np.uint64(12)
    state ^= (state << np.uint64(25)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    state ^= state >> np.uint64(27)
    return state & np.uint64(0xFFFFFFFFFFFFFFFF)


@njit(cache=True, inline="always")
def _rand_below(state, n):
    state = _xorshift64s(state)
    return state, np.int64((state * np.uint64(2685821657736338717)) >> np.uint64(32)) % n


@njit(cache=True)
def _pick_check(deg, cap, dist, use_dist, exclude, state):
    """Select a check by (unreached, distance desc, fill ratio asc, degree asc).

    With ``use_dist`` false only the fill-ratio/degree keys apply (used
    for the first edge of each symbol).  Fill ratios are compared by
    cross multiplication to stay in integers; ties break uniformly via
    reservoir sampling on the xorshift stream.
    """
    n_chk = deg.shape[0]
    best = np.int64(-1)
    best_unreached = False
    best_dist = np.int64(-1)
    best_num = np.int64(0)
    best_den = np.int64(1)
    best_deg = np.int64(0)
    ties = np.int64(0)

    for c in range(n_chk):
        if c == exclude or deg[c] >= cap[c]:
            continue
        unreached = False
        dc = np.int64(-1)
        if use_dist:
            dc = np.int64(dist[c])
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
            left = np.int64(deg[c]) * best_den
            right = best_num * np.int64(cap[c])
            if left != right:
                better = left < right
            elif deg[c] != best_deg:
                better = deg[c] < best_deg
            else:
                tie = True

        if better:
            best = c
            best_unreached = unreached
            best_dist = dc
            best_num = np.int64(deg[c])
            best_den = np.int64(cap[c])
            best_deg = np.int64(deg[c])
            ties = 1
        elif tie:
            ties += 1
            state, r = _rand_below(state, ties)
            if r == 0:
                best = c
                best_dist = dc
    return best, state


@njit(cache=True)
def peg_build(n_chk, cap, sym_checks, seed):
    """Place the two check sockets of every symbol, girth-greedy.

    For each symbol the first edge goes to the least-filled check; the
    second goes to a check as far as possible from the first in the
    current graph (unreachable preferred), breaking ties by fill then
    uniformly.  Returns -1 on success, or the index of the symbol for
    which no second check was available.
    """
    n_sym = sym_checks.shape[0]
    kmax = np.int64(cap.max())
    deg = np.zeros(n_chk, np.int32)
    adj = np.full((n_chk, kmax), -1, np.int32)
    dist = np.empty(n_chk, np.int32)
    fr = np.empty(n_chk, np.int32)
    nfr = np.empty(n_chk, np.int32)

    state = np.uint64(2 * seed + 1)
    for _ in range(8):
        state = _xorshift64s(state)

    for s in range(n_sym):
        c1, state = _pick_check(deg, cap, dist, False, np.int64(-1), state)
        if c1 < 0:
            return s

        dist[:] = -1
        dist[c1] = 0
        fr[0] = c1
        nf = 1
        while nf > 0:
            nn = 0
            for i in range(nf):
                u = fr[i]
                for t in range(deg[u]):
                    v = adj[u, t]
                    if dist[v] < 0:
                        dist[v] = dist[u] + 1
                        nfr[nn] = v
                        nn += 1
            for i in range(nn):
                fr[i] = nfr[i]
            nf = nn

        c2, state = _pick_check(deg, cap, dist, True, np.int64(c1), state)
        if c2 < 0:
            return s

        sym_checks[s, 0] = c1
        sym_checks[s, 1] = c2
        adj[c1, deg[c1]] = c2
        deg[c1] += 1
        adj[c2, deg[c2]] = c1
        deg[c2] += 1
    return -1


@njit(cache=True)
def check_graph_girth(sym_checks, n_chk):
    """Shortest cycle length in the check multigraph (0 when acyclic).

    The Tanner-graph girth is twice this value.  BFS from every check
    with parent-edge tracking; a non-tree edge closing at depths
    d(u), d(v) witnesses a cycle of length d(u)+d(v)+1.
    """
    n_edge = sym_checks.shape[0]
    deg = np.zeros(n_chk, np.int32)
    for e in range(n_edge):
        deg[sym_checks[e, 0]] += 1
        deg[sym_checks[e, 1]] += 1
    ptr = np.zeros(n_chk + 1, np.int32)
    for c in range(n_chk):
        ptr[c + 1] = ptr[c] + deg[c]
    nbr = np.empty(2 * n_edge, np.int32)
    eid = np.empty(2 * n_edge, np.int32)
    fill = ptr[:-1].copy()
    for e in range(n_edge):
        a = sym_checks[e, 0]
        b = sym_checks[e, 1]
        nbr[fill[a]] = b
        eid[fill[a]] = e
        fill[a] += 1
        nbr[fill[b]] = a
        eid[fill[b]] = e
        fill[b] += 1

    dist = np.full(n_chk, -1, np.int32)
    pedge = np.empty(n_chk, np.int32)
    queue = np.empty(n_chk, np.int32)
    stamp = np.zeros(n_chk, np.int32)
    best = np.int64(2 * n_edge + 1)

    for src in range(n_chk):
        token = src + 1
        stamp[src] = token
        dist[src] = 0
        pedge[src] = -1
        queue[0] = src
        head = 0
        tail = 1
        while head < tail:
            u = queue[head]
            head += 1
            du = dist[u]
            if 2 * du + 1 >= best:
                continue
            for t in range(ptr[u], ptr[u + 1]):
                v = nbr[t]
                ev = eid[t]
                if ev == pedge[u]:
                    continue
                if stamp[v] != token:
                    stamp[v] = token
                    dist[v] = du + 1
                    pedge[v] = ev
                    queue[tail] = v
                    tail += 1
                else:
                    cyc = du + dist[v] + 1
                    if cyc < best:
                        best = cyc
        if best == 2:
            break

    if best > 2 * n_edge:
        return 0
    return int(best)
