"""Multiplicatively repeated non-binary LDPC codes for low-rate reconciliation.

Builds (2,k)-regular codes over GF(2^p), extends them by multiplicative
repetition to arbitrarily low rates, decodes syndromes with a
Walsh-Hadamard sum-product decoder over the BIAWGN channel, and derives
reconciliation efficiencies and finite-size secret-key rates.
"""

__version__ = "0.1.0"

from .backend import active_backend
from .gf import FieldContext, make_field
from .code import (
    MotherCode,
    RepCode,
    build_mother,
    encode_word,
    extend,
    load_code,
    repeat_code,
    save_code,
    syndrome,
)
from .channel import (
    ChannelParams,
    awgn_capacity,
    biawgn_capacity,
    bit_prior,
    symbol_priors,
    transmit,
)
from .decoder import DecodeResult, DecoderConfig, convolve_gf, decode, fwht
from .analysis import EfficiencyPoint, efficiency, finite_length_beta, snr_for_beta
from .skr import FiniteSizeParams, KeyRateResult, LinkParams, delta_n, key_rate, optimize_va
from .sim import SimRecord, SimSpec, efficiency_curve, find_snr_at_fer, run_fer

__all__ = [
    "FieldContext",
    "make_field",
    "MotherCode",
    "RepCode",
    "build_mother",
    "extend",
    "repeat_code",
    "syndrome",
    "encode_word",
    "save_code",
    "load_code",
    "ChannelParams",
    "transmit",
    "bit_prior",
    "symbol_priors",
    "awgn_capacity",
    "biawgn_capacity",
    "DecoderConfig",
    "DecodeResult",
    "decode",
    "fwht",
    "convolve_gf",
    "EfficiencyPoint",
    "efficiency",
    "snr_for_beta",
    "finite_length_beta",
    "LinkParams",
    "FiniteSizeParams",
    "KeyRateResult",
    "delta_n",
    "key_rate",
    "optimize_va",
    "SimSpec",
    "SimRecord",
    "run_fer",
    "find_snr_at_fer",
    "efficiency_curve",
    "active_backend",
]
