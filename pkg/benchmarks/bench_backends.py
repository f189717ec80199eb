#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times the three hot paths (batched Walsh-Hadamard transform, one full
decoder iteration, prior aggregation) on a paper-scale code and prints a
side-by-side table.  Run with --small for a quick look.

The library's active backend is picked by NBLDPC_BACKEND at import
time; this script loads both explicitly regardless.
"""

import argparse
import time

import numpy as np

from nbldpc import gf
from nbldpc.backend import get_backend
from nbldpc.channel import bit_log_priors, transmit
from nbldpc.code import build_mother, encode_word, repeat_code, syndrome
from nbldpc.decoder import MSG_FLOOR, decode_tables


def timeit(fn, min_reps=3, min_time=0.4):
    fn()  # warm up (and JIT-compile on the numba side)
    reps = 0
    t0 = time.perf_counter()
    while reps < min_reps or time.perf_counter() - t0 < min_time:
        fn()
        reps += 1
    return (time.perf_counter() - t0) / reps


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--small", action="store_true", help="N=1000 instead of 10000")
    parser.add_argument("--p", type=int, default=10, help="field degree (default 10)")
    parser.add_argument("--stages", type=int, default=15, help="repetition parameter")
    args = parser.parse_args()

    n_sym = 1000 if args.small else 10_000
    fld = gf.make_field(args.p)
    mother = build_mother(fld, n_sym, 3, seed=1)
    rep = repeat_code(mother, args.stages, seed=1)
    tabs = decode_tables(mother)

    rng = np.random.default_rng(0)
    sigma = 4.0
    x = rng.integers(0, fld.q, n_sym).astype(np.int32)
    z16 = syndrome(rep, x).astype(np.int16)
    y = transmit(encode_word(rep, x), fld.p, sigma, rng)
    l0, l1 = bit_log_priors(y, sigma)
    l0 = np.ascontiguousarray(l0.reshape(-1, fld.p))
    l1 = np.ascontiguousarray(l1.reshape(-1, fld.p))
    rep_log = fld.log_table[rep.rep_coef].astype(np.int32)

    fwht_block = rng.random((2 * n_sym, fld.q))
    priors = rng.random((n_sym, fld.q))
    priors /= priors.sum(axis=1, keepdims=True)

    print(f"code: N={n_sym} GF(2^{args.p}) T={args.stages}  "
          f"({mother.n_edges} edges, {rep.total_symbols * fld.p} transmitted bits)")
    print(f"{'kernel':<22}{'numba':>12}{'numpy':>12}{'speedup':>9}")

    results = {}
    for name in ("numba", "numpy"):
        k = get_backend(name)

        def bench_fwht(k=k):
            k.fwht_rows(fwht_block)

        q_msg = np.ascontiguousarray(priors[tabs.edge_sym])
        r_msg = np.empty_like(q_msg)
        xhat = np.empty(n_sym, np.int32)

        def bench_iteration(k=k):
            k.check_pass(q_msg, r_msg, tabs.check_ptr, tabs.perm_in, tabs.perm_out,
                         z16, MSG_FLOOR)
            k.symbol_pass(priors, r_msg, q_msg, tabs.sym_ptr, tabs.sym_edge, xhat,
                          MSG_FLOOR)

        out = np.empty((n_sym, fld.q))

        def bench_priors(k=k):
            k.aggregate_priors(l0, l1, rep_log, fld.exp_table, fld.log_table,
                               n_sym, out)

        results[name] = {
            "fwht_rows (2N x q)": timeit(bench_fwht),
            "decode iteration": timeit(bench_iteration),
            "prior aggregation": timeit(bench_priors),
        }

    for key in results["numba"]:
        a = results["numba"][key]
        b = results["numpy"][key]
        print(f"{key:<22}{a * 1e3:>10.1f}ms{b * 1e3:>10.1f}ms{b / a:>8.1f}x")


if __name__ == "__main__":
    main()
