"""(2,k)-regular non-binary LDPC mother codes and multiplicative repetition.

The mother code is a sparse parity-check graph where every symbol node
participates in exactly two checks and checks have degree k (when 2N is
not divisible by k, the last few checks have degree k-1 so that the
edge budget works out; at most k-1 checks are reduced).  Lower-rate
codes are obtained by appending repetition symbols: stage t assigns to
mother symbol n one extra symbol constrained to r*x_n with a fresh
uniform nonzero coefficient r.  Repetition symbols add degree-1 symbol
nodes and degree-2 checks to the graph, so they never participate in
message passing; the decoder works on the mother graph alone.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field as _field

import numpy as np

from . import gf
from .backend import kernels as K


@dataclass
class MotherCode:
    """Sparse (2,k)-regular parity-check graph over GF(2^p).

    Edge arrays are grouped by check (CSR): edge e belongs to check
    ``edge_check[e]``, touches symbol ``edge_sym[e]`` and carries the
    nonzero coefficient ``edge_coef[e]``.  Instances are treated as
    immutable after construction.
    """

    field: gf.FieldContext
    n_sym: int
    n_chk: int
    check_degree: int
    edge_check: np.ndarray
    edge_sym: np.ndarray
    edge_coef: np.ndarray
    check_ptr: np.ndarray
    seed: int
    girth: int
    _tables: object = _field(default=None, repr=False, compare=False)

    @property
    def n_edges(self) -> int:
        return len(self.edge_sym)

    @property
    def rate(self) -> float:
        return (self.n_sym - self.n_chk) / self.n_sym

    def check_degrees(self) -> np.ndarray:
        return np.diff(self.check_ptr)

    def symbol_degrees(self) -> np.ndarray:
        return np.bincount(self.edge_sym, minlength=self.n_sym)


@dataclass
class RepCode:
    """Mother code plus an ordered list of repetition coefficients.

    Repetition symbol j (0-based, full-word index ``n_sym + j``) copies
    mother symbol ``j % n_sym`` with coefficient ``rep_coef[j]``; stages
    fill round-robin in mother-symbol order, so the last stage may stop
    early (``tail_len < n_sym``).
    """

    mother: MotherCode
    n_stages: int
    tail_len: int
    rep_coef: np.ndarray

    @property
    def field(self) -> gf.FieldContext:
        return self.mother.field

    @property
    def n_sym(self) -> int:
        return self.mother.n_sym

    @property
    def n_rep(self) -> int:
        return len(self.rep_coef)

    @property
    def total_symbols(self) -> int:
        return self.mother.n_sym + self.n_rep

    @property
    def total_bits(self) -> int:
        return self.total_symbols * self.field.p

    @property
    def rate(self) -> float:
        return (self.mother.n_sym - self.mother.n_chk) / self.total_symbols


def build_mother(
    field: gf.FieldContext,
    n_sym: int,
    check_degree: int = 3,
    seed: int = 0,
    girth_target: int | None = None,
) -> MotherCode:
    """Construct a (2,k)-regular mother code with greedy girth maximization.

    Deterministic for a fixed seed (identical edges and coefficients on
    every platform and backend).  If a girth target is given and the
    greedy placement falls short, a warning is emitted; construction
    never fails on girth.
    """
    k = check_degree
    if k < 2:
        raise ValueError("check degree must be >= 2")
    if n_sym < k:
        raise ValueError(f"need at least {k} symbols for check degree {k}")

    n_chk = math.ceil(2 * n_sym / k)
    deficit = k * n_chk - 2 * n_sym  # spread over the last checks
    cap = np.full(n_chk, k, dtype=np.int32)
    if deficit:
        cap[n_chk - deficit :] = k - 1

    sym_checks = np.empty((n_sym, 2), dtype=np.int32)
    bad = K.peg_build(n_chk, cap, sym_checks, seed)
    if bad >= 0:
        raise RuntimeError(f"graph placement ran out of check sockets at symbol {bad}")

    # flatten to edge lists grouped by check; stable sort keeps the
    # per-check ordering reproducible
    edge_check = sym_checks.ravel().astype(np.int32)
    edge_sym = np.repeat(np.arange(n_sym, dtype=np.int32), 2)
    order = np.argsort(edge_check, kind="stable")
    edge_check = edge_check[order]
    edge_sym = edge_sym[order]
    counts = np.bincount(edge_check, minlength=n_chk)
    check_ptr = np.zeros(n_chk + 1, dtype=np.int32)
    np.cumsum(counts, out=check_ptr[1:])

    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x636F6566]))
    edge_coef = rng.integers(1, field.q, size=2 * n_sym, dtype=np.int64).astype(np.int32)

    girth = 2 * K.check_graph_girth(sym_checks, n_chk)
    if girth_target is not None and girth and girth < girth_target:
        warnings.warn(
            f"achieved girth {girth} below target {girth_target} (best effort)",
            stacklevel=2,
        )

    return MotherCode(
        field=field,
        n_sym=n_sym,
        n_chk=n_chk,
        check_degree=k,
        edge_check=edge_check,
        edge_sym=edge_sym,
        edge_coef=edge_coef,
        check_ptr=check_ptr,
        seed=seed,
        girth=girth,
    )


def _as_rep(code: MotherCode | RepCode) -> RepCode:
    if isinstance(code, RepCode):
        return code
    return RepCode(
        mother=code, n_stages=1, tail_len=code.n_sym, rep_coef=np.empty(0, np.int32)
    )


def extend(code: MotherCode | RepCode, n_rep_total: int, seed: int = 0) -> RepCode:
    """Grow a code to ``n_rep_total`` repetition symbols in total.

    Existing coefficients are kept; only the new tail is drawn (uniform
    over GF(q) minus zero, stream keyed by seed and starting index), so
    rate adaptation re-extends a code without disturbing the prefix.
    """
    if n_rep_total < 0:
        raise ValueError("repetition symbol count must be >= 0")
    rep = _as_rep(code)
    n_sym = rep.n_sym
    have = rep.n_rep
    if n_rep_total < have:
        raise ValueError(f"code already has {have} repetition symbols")

    if n_rep_total > have:
        rng = np.random.default_rng(np.random.SeedSequence([seed, have]))
        fresh = rng.integers(
            1, rep.field.q, size=n_rep_total - have, dtype=np.int64
        ).astype(np.int32)
        coef = np.concatenate([rep.rep_coef, fresh])
    else:
        coef = rep.rep_coef

    if n_rep_total == 0:
        stages, tail = 1, n_sym
    else:
        stages = 1 + math.ceil(n_rep_total / n_sym)
        tail = n_rep_total - (stages - 2) * n_sym
    return RepCode(mother=rep.mother, n_stages=stages, tail_len=tail, rep_coef=coef)


def repeat_code(mother: MotherCode, n_stages: int, seed: int = 0) -> RepCode:
    """Full-stage extension: T-1 complete repetition stages."""
    if n_stages < 1:
        raise ValueError("repetition parameter must be >= 1")
    return extend(mother, (n_stages - 1) * mother.n_sym, seed)


def syndrome(code: MotherCode | RepCode, x: np.ndarray) -> np.ndarray:
    """Mother-word syndrome: z_m = sum over the check of h_mn * x_n.

    Repetition constraints are implicit (regenerated from the
    coefficients), so the syndrome length is always the mother check
    count.
    """
    m = code.mother if isinstance(code, RepCode) else code
    x = np.asarray(x)
    if x.shape != (m.n_sym,):
        raise ValueError(f"expected {m.n_sym} symbols, got shape {x.shape}")
    if x.size and (x.min() < 0 or x.max() >= m.field.q):
        raise ValueError("symbol out of field range")
    vals = m.field.mul_vec(m.edge_coef, x[m.edge_sym])
    return np.bitwise_xor.reduceat(vals, m.check_ptr[:-1]).astype(np.int32)


def encode_word(code: RepCode, x: np.ndarray) -> np.ndarray:
    """Expand a mother word to the full transmitted word.

    Every repetition symbol is the coefficient-rotated copy of its
    mother symbol, which is exactly the parity constraint the extra
    degree-2 checks encode.
    """
    x = np.asarray(x)
    if x.shape != (code.n_sym,):
        raise ValueError(f"expected {code.n_sym} symbols, got shape {x.shape}")
    if code.n_rep == 0:
        return x.astype(np.int32).copy()
    src = np.arange(code.n_rep) % code.n_sym
    reps = code.field.mul_vec(code.rep_coef, x[src])
    return np.concatenate([x, reps]).astype(np.int32)


# ---------------------------------------------------------------------------
# Code file format (text, versioned)
# ---------------------------------------------------------------------------

_MAGIC = "NBLDPC v1"


def save_code(code: MotherCode | RepCode, path) -> None:
    """Write the versioned text format (LF endings, round-trip exact)."""
    rep = _as_rep(code)
    m = rep.mother
    lines = [_MAGIC]
    lines.append(f"{m.field.q} {m.n_sym} {m.n_chk} {m.check_degree} {m.seed} {m.field.poly}")
    for e in range(m.n_edges):
        lines.append(f"{m.edge_check[e]} {m.edge_sym[e]} {m.edge_coef[e]}")
    lines.append(f"{rep.n_stages} {rep.tail_len}")
    for j in range(rep.n_rep):
        lines.append(f"{m.n_sym + j} {rep.rep_coef[j]}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_code(path) -> RepCode:
    """Read a code file written by :func:`save_code`."""
    with open(path, newline="\n") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != _MAGIC:
        raise ValueError(f"{path}: not a {_MAGIC} file")
    q, n_sym, n_chk, k, seed, poly = (int(t) for t in lines[1].split())
    p = q.bit_length() - 1
    if 1 << p != q:
        raise ValueError(f"{path}: field order {q} is not a power of two")
    fld = gf.make_field(p, poly)

    n_edges = 2 * n_sym
    edge_check = np.empty(n_edges, np.int32)
    edge_sym = np.empty(n_edges, np.int32)
    edge_coef = np.empty(n_edges, np.int32)
    for e in range(n_edges):
        a, b, c = (int(t) for t in lines[2 + e].split())
        edge_check[e] = a
        edge_sym[e] = b
        edge_coef[e] = c
    if np.any(np.diff(edge_check) < 0):
        raise ValueError(f"{path}: edges not grouped by check")
    counts = np.bincount(edge_check, minlength=n_chk)
    check_ptr = np.zeros(n_chk + 1, np.int32)
    np.cumsum(counts, out=check_ptr[1:])

    sym_checks = np.empty((n_sym, 2), np.int32)
    slot = np.zeros(n_sym, np.int32)
    for e in range(n_edges):
        s = edge_sym[e]
        sym_checks[s, slot[s]] = edge_check[e]
        slot[s] += 1
    if not np.all(slot == 2):
        raise ValueError(f"{path}: symbol degrees are not all 2")

    mother = MotherCode(
        field=fld,
        n_sym=n_sym,
        n_chk=n_chk,
        check_degree=k,
        edge_check=edge_check,
        edge_sym=edge_sym,
        edge_coef=edge_coef,
        check_ptr=check_ptr,
        seed=seed,
        girth=2 * K.check_graph_girth(sym_checks, n_chk),
    )

    row = 2 + n_edges
    n_stages, tail = (int(t) for t in lines[row].split())
    row += 1
    n_rep = (n_stages - 2) * n_sym + tail if n_stages > 1 else 0
    rep_coef = np.empty(n_rep, np.int32)
    for j in range(n_rep):
        idx, c = (int(t) for t in lines[row + j].split())
        if idx != n_sym + j:
            raise ValueError(f"{path}: repetition indices out of order at {idx}")
        rep_coef[j] = c
    return RepCode(mother=mother, n_stages=n_stages, tail_len=tail, rep_coef=rep_coef)
