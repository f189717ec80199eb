"""Reconciliation efficiency and the finite-length achievability bound.

Efficiency is the ratio of code rate to channel capacity at the
operating SNR.  The non-asymptotic bound uses the normal approximation
with the conditional entropy h(s) = 1 - C(s) and its variance
v(s) = e(s) - h(s)^2, where e(s) is the second moment of the binary
input's conditional information density.  All densities use the
normalized joint f_XY(x,y) = sqrt(s/8pi) * exp(-s(y-x)^2/2) (negative
exponent so the density integrates to one).
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import ndtri

from .channel import awgn_capacity, biawgn_capacity

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EfficiencyPoint:
    """One measured operating point of a code."""

    rate: float
    snr: float  # linear
    capacity: float
    beta: float
    fer: float
    n_bits: int  # effective binary block length, p * total symbols

    @property
    def suspect(self) -> bool:
        """Efficiency above 1 signals a measurement or bound inconsistency."""
        return self.beta > 1.0


def efficiency(rate: float, snr: float, exact: bool = True) -> float:
    """beta = R / C(s), capacity exact (BIAWGN) or the AWGN closed form."""
    if rate <= 0:
        raise ValueError("rate must be positive")
    cap = biawgn_capacity(snr) if exact else awgn_capacity(snr)
    beta = rate / cap
    if beta > 1.0:
        log.warning("efficiency %.4f > 1 at rate %.6g, snr %.6g", beta, rate, snr)
    return beta


def snr_for_beta(rate: float, beta: float, exact: bool = True) -> float:
    """Invert efficiency: the linear SNR where R / C(s) equals beta."""
    if not 0 < beta:
        raise ValueError("beta must be positive")
    cap = rate / beta
    if not exact:
        return 2.0 ** (2.0 * cap) - 1.0
    lo, hi = 1e-8, 1.0
    while biawgn_capacity(hi) < cap:
        hi *= 2.0
        if hi > 1e9:
            raise ValueError(f"capacity target {cap} not reachable")
    from scipy.optimize import brentq

    return brentq(lambda s: biawgn_capacity(s) - cap, lo, hi, xtol=1e-14, rtol=1e-13)


def _fxy1(y: np.ndarray, snr: float) -> np.ndarray:
    """Joint density at x = +1 (inputs equiprobable)."""
    return np.sqrt(snr / (8.0 * np.pi)) * np.exp(-snr * (y - 1.0) ** 2 / 2.0)


def f_y(y: np.ndarray, snr: float) -> np.ndarray:
    """Output density: f_XY(1, y) + f_XY(-1, y)."""
    return _fxy1(y, snr) + _fxy1(-np.asarray(y), snr)


def conditional_entropy(snr: float) -> float:
    """h(s) = 1 - C(s) for the binary-input AWGN channel."""
    return 1.0 - biawgn_capacity(snr)


def entropy_second_moment(snr: float) -> float:
    """e(s) = 2 int f_XY(1,y) (log2 (f_XY(1,y) / f_Y(y)))^2 dy.

    This is the second moment of -log2 P(X|Y) under the joint law; the
    integrand decays like the x=+1 Gaussian times a polynomial, so the
    12-sigma truncation leaves tails far below the 1e-9 target.
    """
    span = 12.0 / np.sqrt(snr)

    def integrand(y):
        a = _fxy1(np.asarray(y), snr)
        # -log2 of the posterior P(X=1|y) = a / f_Y(y), in stable form
        t = np.logaddexp(0.0, -2.0 * snr * np.asarray(y)) / np.log(2.0)
        return 2.0 * a * t * t

    val, _ = integrate.quad(integrand, 1.0 - span, 1.0 + span, epsabs=1e-12, epsrel=1e-11, limit=400)
    return val


def entropy_variance(snr: float) -> float:
    """v(s) = e(s) - h(s)^2, the conditional entropy variance."""
    h = conditional_entropy(snr)
    return entropy_second_moment(snr) - h * h


def finite_length_beta(n_bits: float, epsilon: float, snr: float) -> float:
    """Upper bound on efficiency at block length n and frame error epsilon.

    beta(n, eps, s) = 1 - sqrt(v(s)/n) / (1 - h(s)) * PhiInv(1 - eps).
    The inverse normal CDF comes from scipy's ndtri (Cephes rational
    approximation, far beyond the 1e-9 accuracy needed here).
    """
    if n_bits < 1:
        raise ValueError("block length must be >= 1")
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    h = conditional_entropy(snr)
    v = entropy_variance(snr)
    if v < 0:
        warnings.warn(f"negative entropy variance {v:.3e} at snr {snr:.6g}; clamping")
        v = 0.0
    return 1.0 - np.sqrt(v / n_bits) / (1.0 - h) * ndtri(1.0 - epsilon)
