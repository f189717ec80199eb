"""Syndrome-based sum-product decoding on the mother graph.

Flooding schedule, probability-domain messages, Walsh-Hadamard check
processing.  One iteration is: check-to-symbol update (permute by the
edge coefficient, transform, extrinsic product, back-transform, read out
shifted by the syndrome symbol), then symbol-to-check update and a
tentative decision, then optional syndrome validation for early exit.
Repetition symbols never enter the loop: they are folded into the
priors beforehand and regenerated from the decided mother word after.
"""

from __future__ import annotations

from dataclasses import dataclass, field as _field

import numpy as np

from .backend import kernels as K
from .code import MotherCode, RepCode, encode_word, syndrome

#: probability floor applied to every message entry before normalization,
#: so long products at very low SNR can never zero out a whole vector
MSG_FLOOR = 1e-300


@dataclass
class DecoderConfig:
    max_iters: int = 200
    validate_each_iter: bool = True
    track_posteriors: bool = False
    collect_trace: bool = False

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass
class DecodeResult:
    success: bool
    iterations: int
    mother_estimate: np.ndarray
    full_estimate: np.ndarray
    posteriors: np.ndarray | None = None
    trace: list[tuple[int, int, int]] | None = None  # (iter, unsat checks, changed syms)


@dataclass
class DecodeTables:
    """Mother-graph arrays reorganized for the kernels.

    ``perm_in[e, a] = inv(h_e) * a`` feeds the check-side permutation;
    ``perm_out[e, a] = h_e * a`` is XORed with the syndrome symbol for
    the outgoing read-back and doubles as the coefficient product table
    for validation.
    """

    q: int
    check_ptr: np.ndarray
    edge_sym: np.ndarray
    sym_ptr: np.ndarray
    sym_edge: np.ndarray
    perm_in: np.ndarray
    perm_out: np.ndarray


def _build_tables(m: MotherCode) -> DecodeTables:
    fld = m.field
    q = fld.q
    n_edges = m.n_edges

    order = np.argsort(m.edge_sym, kind="stable").astype(np.int32)
    counts = np.bincount(m.edge_sym, minlength=m.n_sym)
    sym_ptr = np.zeros(m.n_sym + 1, np.int32)
    np.cumsum(counts, out=sym_ptr[1:])

    coef = m.edge_coef.astype(np.int64)
    qm1 = q - 1 if q > 2 else 1
    inv_coef = fld.exp_table[(qm1 - fld.log_table[coef]) % qm1].astype(np.int64)

    perm_in = np.empty((n_edges, q), np.int16)
    perm_out = np.empty((n_edges, q), np.int16)
    alpha = np.arange(q)
    chunk = max(1, 4_000_000 // q)
    for lo in range(0, n_edges, chunk):
        hi = min(n_edges, lo + chunk)
        perm_out[lo:hi] = fld.mul_vec(coef[lo:hi, None], alpha[None, :])
        perm_in[lo:hi] = fld.mul_vec(inv_coef[lo:hi, None], alpha[None, :])

    return DecodeTables(
        q=q,
        check_ptr=m.check_ptr.astype(np.int32),
        edge_sym=m.edge_sym.astype(np.int32),
        sym_ptr=sym_ptr,
        sym_edge=order,
        perm_in=perm_in,
        perm_out=perm_out,
    )


def decode_tables(m: MotherCode) -> DecodeTables:
    """Build (or fetch the cached) kernel tables for a mother code."""
    if m._tables is None:
        m._tables = _build_tables(m)
    return m._tables


def decode(
    code: MotherCode | RepCode,
    priors: np.ndarray,
    z: np.ndarray,
    config: DecoderConfig | None = None,
) -> DecodeResult:
    """Decode the coset of syndrome ``z`` given per-symbol priors.

    ``priors`` must be one normalized length-q distribution per mother
    symbol (see ``channel.symbol_priors``, which already folds in the
    repetition copies).  Success means the decided word reproduces the
    syndrome exactly in field arithmetic.
    """
    cfg = config or DecoderConfig()
    mother = code.mother if isinstance(code, RepCode) else code
    tabs = decode_tables(mother)
    n, q = mother.n_sym, mother.field.q

    priors = np.ascontiguousarray(priors, dtype=np.float64)
    if priors.shape != (n, q):
        raise ValueError(f"priors must have shape ({n}, {q}), got {priors.shape}")
    sums = priors.sum(axis=1)
    if priors.min() < 0 or not np.allclose(sums, 1.0, atol=1e-6):
        raise ValueError("priors are not normalized probability vectors")
    z = np.asarray(z)
    if z.shape != (mother.n_chk,):
        raise ValueError(f"syndrome must have length {mother.n_chk}")
    if z.size and (z.min() < 0 or z.max() >= q):
        raise ValueError("syndrome symbol out of field range")
    z16 = z.astype(np.int16)

    q_msg = np.ascontiguousarray(priors[tabs.edge_sym])
    r_msg = np.empty_like(q_msg)
    xhat = np.empty(n, np.int32)
    prev = None
    trace: list[tuple[int, int, int]] | None = [] if cfg.collect_trace else None

    success = False
    it = 0
    for it in range(1, cfg.max_iters + 1):
        K.check_pass(q_msg, r_msg, tabs.check_ptr, tabs.perm_in, tabs.perm_out, z16, MSG_FLOOR)
        K.symbol_pass(priors, r_msg, q_msg, tabs.sym_ptr, tabs.sym_edge, xhat, MSG_FLOOR)

        if cfg.validate_each_iter or it == cfg.max_iters or trace is not None:
            z_hat = syndrome(mother, xhat)
            ok = np.array_equal(z_hat, z)
            if trace is not None:
                unsat = int(np.count_nonzero(z_hat != z))
                changed = n if prev is None else int(np.count_nonzero(xhat != prev))
                trace.append((it, unsat, changed))
                prev = xhat.copy()
            if ok and (cfg.validate_each_iter or it == cfg.max_iters):
                success = True
                break

    post = None
    if cfg.track_posteriors:
        post = np.empty_like(priors)
        K.posteriors(priors, r_msg, tabs.sym_ptr, tabs.sym_edge, post)

    mother_est = xhat.copy()
    full_est = encode_word(code, mother_est) if isinstance(code, RepCode) else mother_est.copy()
    return DecodeResult(
        success=success,
        iterations=it,
        mother_estimate=mother_est,
        full_estimate=full_est,
        posteriors=post,
        trace=trace,
    )


# ---------------------------------------------------------------------------
# Transform / convolution API
# ---------------------------------------------------------------------------


def fwht(values: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform, in place over the last axis.

    Applying the transform twice multiplies by the length, so the
    inverse is this same function followed by division by 2^p; the
    decoder folds that factor into its message normalization.
    """
    a = np.asarray(values)
    q = a.shape[-1]
    if q & (q - 1) or q < 1:
        raise ValueError(f"length must be a power of two, got {q}")
    if a.dtype != np.float64 or not a.flags.c_contiguous:
        raise ValueError("fwht operates in place and needs contiguous float64 data")
    K.fwht_rows(a.reshape(-1, q))
    return values


def convolve_gf(m1: np.ndarray, m2: np.ndarray) -> np.ndarray:
    """XOR-indexed convolution of two symbol distributions.

    Addition in GF(2^p) is bitwise XOR of the representations, so the
    convolution diagonalizes under the Walsh-Hadamard transform
    regardless of the field polynomial.  The result is clamped to be
    nonnegative and renormalized.
    """
    a = np.array(m1, dtype=np.float64)
    b = np.array(m2, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("need two equal-length vectors")
    q = a.shape[0]
    fwht(a)
    fwht(b)
    a *= b
    fwht(a)
    a /= q
    np.maximum(a, 0.0, out=a)
    s = a.sum()
    if s > 0:
        a /= s
    return a
