"""Arithmetic in binary extension fields GF(2^p) for 1 <= p <= 12.

Field elements are integers in [0, 2^p): bit i of the integer is the
coefficient of x^i of a binary polynomial of degree < p.  Addition is
bitwise XOR; multiplication is polynomial multiplication modulo an
irreducible polynomial, served from discrete log/antilog tables built
once per field.

Default polynomials are the numerically smallest irreducible polynomial
of each degree (bit mask including the x^p term):

    p:  1      2      3      4      5      6      7
        0x2    0x7    0xb    0x13   0x25   0x43   0x83
    p:  8      9      10     11     12
        0x11b  0x203  0x409  0x805  0x1009

They are recomputed and re-verified at construction, so the table above
is documentation, not a load-bearing constant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MAX_DEGREE = 12


def _poly_mul_mod(a: int, b: int, poly: int, p: int) -> int:
    """Shift-and-reduce product of two elements modulo `poly`."""
    acc = 0
    while b:
        if b & 1:
            acc ^= a
        b >>= 1
        a <<= 1
        if a >> p & 1:
            a ^= poly
    return acc


def _poly_rem(a: int, b: int) -> int:
    """Remainder of GF(2)[x] division of a by b."""
    db = b.bit_length() - 1
    while a.bit_length() - 1 >= db and a:
        a ^= b << (a.bit_length() - 1 - db)
    return a


def is_irreducible(poly: int, p: int) -> bool:
    """Exhaustive trial division by all polynomials of degree 1..p//2."""
    if poly.bit_length() - 1 != p:
        return False
    if p == 1:
        return True
    for d in range(2, 1 << (p // 2 + 1)):
        if _poly_rem(poly, d) == 0:
            return False
    return True


def default_poly(p: int) -> int:
    """Numerically smallest irreducible polynomial of degree p."""
    for cand in range(1 << p, 1 << (p + 1)):
        if is_irreducible(cand, p):
            return cand
    raise AssertionError(f"no irreducible polynomial of degree {p}")


@dataclass(frozen=True)
class FieldContext:
    """GF(2^p) with precomputed log/antilog tables.

    Immutable after construction; safe to share across threads and
    pickle into worker processes.

    Attributes
    ----------
    p : int
        Extension degree (bits per symbol).
    q : int
        Field order, 2**p.
    poly : int
        Irreducible modulus as a bit mask including the x^p term.
    exp_table : ndarray
        exp_table[i] = g**i for a fixed generator g; length q, with
        exp_table[q-1] == exp_table[0] == 1 so that log sums below
        2*(q-1) index directly after one conditional fold.
    log_table : ndarray
        log_table[a] = discrete log of a; log_table[0] is a sentinel
        (q-1) that must never be dereferenced for arithmetic.
    """

    p: int
    q: int
    poly: int
    exp_table: np.ndarray = field(repr=False, compare=False)
    log_table: np.ndarray = field(repr=False, compare=False)

    def add(self, a: int, b: int) -> int:
        return a ^ b

    sub = add  # characteristic two

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        la = int(self.log_table[a]) + int(self.log_table[b])
        if la >= self.q - 1:
            la -= self.q - 1
        return int(self.exp_table[la])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no multiplicative inverse")
        return int(self.exp_table[(self.q - 1 - int(self.log_table[a])) % (self.q - 1)])

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def mul_vec(self, a, b) -> np.ndarray:
        """Elementwise product of two integer arrays (broadcasting)."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        s = self.log_table[a] + self.log_table[b]
        s %= self.q - 1 if self.q > 2 else 1
        out = self.exp_table[s]
        return np.where((a == 0) | (b == 0), 0, out)

    def mul_row(self, c: int) -> np.ndarray:
        """Multiplication-by-c permutation table: row[x] = c*x."""
        return self.mul_vec(c, np.arange(self.q))


def _build_tables(p: int, poly: int) -> tuple[np.ndarray, np.ndarray]:
    q = 1 << p
    # Smallest primitive element; the smallest irreducible polynomial is
    # not always primitive (e.g. p=8), so x itself may not generate.
    for g in range(2, q) if q > 2 else [1]:
        exp = np.zeros(q, dtype=np.int32)
        log = np.full(q, q - 1, dtype=np.int32)
        x = 1
        ok = True
        for i in range(q - 1):
            if log[x] != q - 1 and x != 1:
                ok = False
                break
            if x == 1 and i > 0:
                ok = False
                break
            exp[i] = x
            log[x] = i
            x = _poly_mul_mod(x, g, poly, p)
        if ok and x == 1:
            exp[q - 1] = 1
            return exp, log
    raise AssertionError(f"no generator found for poly {poly:#x}")


_FIELD_CACHE: dict[tuple[int, int], FieldContext] = {}


def make_field(p: int, poly: int | None = None) -> FieldContext:
    """Build (or fetch the cached) GF(2^p) context.

    Parameters
    ----------
    p : int
        Extension degree, 1 <= p <= 12.
    poly : int, optional
        Irreducible modulus override; validated by trial division.
    """
    if not 1 <= p <= MAX_DEGREE:
        raise ValueError(f"extension degree must be in [1, {MAX_DEGREE}], got {p}")
    if poly is None:
        poly = default_poly(p)
    elif not is_irreducible(poly, p):
        raise ValueError(f"{poly:#x} is not irreducible of degree {p}")
    key = (p, poly)
    if key not in _FIELD_CACHE:
        exp, log = _build_tables(p, poly)
        exp.setflags(write=False)
        log.setflags(write=False)
        _FIELD_CACHE[key] = FieldContext(p=p, q=1 << p, poly=poly, exp_table=exp, log_table=log)
    return _FIELD_CACHE[key]


def add(field: FieldContext, a: int, b: int) -> int:
    return field.add(a, b)


def mul(field: FieldContext, a: int, b: int) -> int:
    return field.mul(a, b)


def inv(field: FieldContext, a: int) -> int:
    return field.inv(a)


def div(field: FieldContext, a: int, b: int) -> int:
    return field.div(a, b)
