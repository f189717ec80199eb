"""BIAWGN channel simulation and symbol-prior construction.

Conventions (documented, not statistically significant): bits map to
antipodal signals 0 -> +1, 1 -> -1; within a symbol the most significant
polynomial coefficient is transmitted first; the linear SNR is
s = 1/sigma^2 with unit signal power per bit channel use, so the AWGN
capacity approximation is C = log2(1+s)/2 and dB values are 10*log10(s).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import expit

from .backend import kernels as K
from .code import MotherCode, RepCode


@dataclass(frozen=True)
class ChannelParams:
    snr: float  # linear
    seed: int = 0

    def __post_init__(self):
        if self.snr <= 0:
            raise ValueError("SNR must be positive")

    @property
    def sigma(self) -> float:
        """Noise standard deviation per bit channel use."""
        return 1.0 / np.sqrt(self.snr)


def snr_db(snr_linear: float) -> float:
    return 10.0 * np.log10(snr_linear)


def snr_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def symbols_to_signal(word: np.ndarray, p: int) -> np.ndarray:
    """BPSK signal of a symbol word: p antipodal values per symbol."""
    word = np.asarray(word)
    shifts = p - 1 - np.arange(p)
    bits = (word[:, None] >> shifts[None, :]) & 1
    return (1.0 - 2.0 * bits).ravel()


def transmit(word: np.ndarray, p: int, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Add white Gaussian noise to the BPSK signal of a symbol word."""
    sig = symbols_to_signal(word, p)
    return sig + rng.normal(0.0, sigma, size=sig.shape)


def transmit_with_params(word: np.ndarray, p: int, params: ChannelParams) -> np.ndarray:
    """One-shot transmission with the RNG seeded from the parameter set."""
    return transmit(word, p, params.sigma, np.random.default_rng(params.seed))


def bit_prior(y, sigma: float):
    """P(bit = 0 | observation): logistic in 2y/sigma^2."""
    return expit(2.0 * np.asarray(y) / (sigma * sigma))


def bit_log_priors(y: np.ndarray, sigma: float) -> tuple[np.ndarray, np.ndarray]:
    """(log P(bit=0|y), log P(bit=1|y)), stable for any magnitude of y."""
    t = 2.0 * np.asarray(y, dtype=np.float64) / (sigma * sigma)
    zero = np.zeros_like(t)
    return -np.logaddexp(zero, -t), -np.logaddexp(zero, t)


def symbol_priors(code: MotherCode | RepCode, y: np.ndarray, sigma: float) -> np.ndarray:
    """Per-mother-symbol prior distributions from channel observations.

    Every copy of a mother symbol (the symbol itself plus its rotated
    repetitions) contributes the product of its bit posteriors at the
    correspondingly rotated value.  Aggregation runs in the log domain
    with max subtraction: at large repetition parameters one symbol
    collects thousands of bit observations, which underflows any
    linear-domain product.
    """
    rep = code if isinstance(code, RepCode) else None
    mother = rep.mother if rep else code
    fld = mother.field
    total = rep.total_symbols if rep else mother.n_sym
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (total * fld.p,):
        raise ValueError(f"expected {total * fld.p} observations, got {y.shape}")

    logp0, logp1 = bit_log_priors(y, sigma)
    logp0 = np.ascontiguousarray(logp0.reshape(total, fld.p))
    logp1 = np.ascontiguousarray(logp1.reshape(total, fld.p))
    rep_log = (
        fld.log_table[rep.rep_coef].astype(np.int32)
        if rep is not None
        else np.empty(0, np.int32)
    )
    out = np.empty((mother.n_sym, fld.q), dtype=np.float64)
    K.aggregate_priors(logp0, logp1, rep_log, fld.exp_table, fld.log_table, mother.n_sym, out)
    return out


def save_observations(y: np.ndarray, path) -> None:
    """Debug dump: raw observations as little-endian float64."""
    np.asarray(y, dtype="<f8").tofile(path)


def load_observations(path) -> np.ndarray:
    return np.fromfile(path, dtype="<f8")


# ---------------------------------------------------------------------------
# Capacities
# ---------------------------------------------------------------------------


def awgn_capacity(snr: float) -> float:
    """Gaussian-input capacity, the standard low-SNR approximation."""
    return 0.5 * np.log2(1.0 + snr)


def _f_y(y: np.ndarray, snr: float) -> np.ndarray:
    # equiprobable antipodal inputs: mixture of two Gaussians of
    # variance 1/snr; prefactor sqrt(snr/8pi) makes it a density
    c = np.sqrt(snr / (8.0 * np.pi))
    return c * (
        np.exp(-snr * (y - 1.0) ** 2 / 2.0) + np.exp(-snr * (y + 1.0) ** 2 / 2.0)
    )


def biawgn_capacity(snr: float) -> float:
    """Exact binary-input AWGN capacity by adaptive quadrature.

    C = -int f_Y log2 f_Y dy + log2(snr / 2 pi e) / 2, evaluated to
    absolute error well below 1e-9.  Gaussian tails beyond 12 noise
    standard deviations from the signal points are negligible at the
    accuracies involved.
    """
    if snr <= 0:
        raise ValueError("SNR must be positive")
    span = 1.0 + 12.0 / np.sqrt(snr)

    def integrand(y):
        f = _f_y(np.asarray(y), snr)
        return np.where(f > 0, -f * np.log2(np.maximum(f, 1e-320)), 0.0)

    h_y, _ = integrate.quad(integrand, -span, span, epsabs=1e-12, epsrel=1e-11, limit=400)
    h_noise = -0.5 * np.log2(snr / (2.0 * np.pi * np.e))
    return h_y - h_noise
