import numpy as np
import pytest
from scipy import integrate

from nbldpc import gf
from nbldpc.channel import (
    awgn_capacity,
    biawgn_capacity,
    bit_log_priors,
    bit_prior,
    symbol_priors,
    symbols_to_signal,
    transmit,
)
from nbldpc.code import build_mother, encode_word, repeat_code


def biawgn_capacity_oracle(s: float) -> float:
    """Independent formulation: C = 1 - E_t[log2(1 + exp(-2s - 2 sqrt(s) t))]."""

    def g(t):
        u = -2.0 * s - 2.0 * np.sqrt(s) * t
        return np.exp(-t * t / 2) / np.sqrt(2 * np.pi) * (np.logaddexp(0.0, u) / np.log(2.0))

    v, _ = integrate.quad(g, -40, 40, epsabs=1e-13, limit=500)
    return 1.0 - v


def joint_posterior_oracle(code, y, sigma):
    """Brute force P(X_n = a | all observations of all copies of n)."""
    fld = code.field
    q, p = fld.q, fld.p
    n_sym = code.n_sym
    out = np.zeros((n_sym, q))
    yb = y.reshape(-1, p)
    for n in range(n_sym):
        copies = [(n, 1)] + [
            (n_sym + j, int(code.rep_coef[j]))
            for j in range(code.n_rep)
            if j % n_sym == n
        ]
        for a in range(q):
            like = 1.0
            for idx, coef in copies:
                v = fld.mul(coef, a)
                bits = [(v >> (p - 1 - i)) & 1 for i in range(p)]
                sig = [1.0 - 2.0 * b for b in bits]
                for obs, mean in zip(yb[idx], sig):
                    like *= np.exp(-((obs - mean) ** 2) / (2 * sigma**2))
            out[n, a] = like
        out[n] /= out[n].sum()
    return out


def test_signal_mapping_msb_first():
    # value 0b10 in GF(4): coefficient of x (MSB) first -> signal (-1, +1)
    assert symbols_to_signal(np.array([0b10]), 2).tolist() == [-1.0, 1.0]
    assert symbols_to_signal(np.array([0b01]), 2).tolist() == [1.0, -1.0]


def test_transmit_noiseless_limit():
    rng = np.random.default_rng(0)
    word = np.array([3, 0, 5, 7])
    y = transmit(word, 3, 1e-12, rng)
    assert np.allclose(np.abs(y), 1.0, atol=1e-9)
    assert np.allclose(y, symbols_to_signal(word, 3), atol=1e-9)


def test_transmit_with_params_deterministic():
    from nbldpc.channel import ChannelParams, transmit_with_params

    params = ChannelParams(snr=0.1, seed=42)
    assert params.sigma == pytest.approx(1.0 / np.sqrt(0.1))
    word = np.array([1, 2, 3])
    a = transmit_with_params(word, 2, params)
    b = transmit_with_params(word, 2, params)
    assert (a == b).all()
    with pytest.raises(ValueError):
        ChannelParams(snr=0.0)


def test_transmit_noise_statistics():
    rng = np.random.default_rng(1)
    sigma = 0.7
    word = rng.integers(0, 1024, 100_000)
    y = transmit(word, 10, sigma, rng)
    noise = y - symbols_to_signal(word, 10)
    assert len(y) == 1_000_000
    assert abs(noise.var() - sigma**2) < 0.01 * sigma**2
    assert abs(noise.mean()) < 4 * sigma / np.sqrt(len(y))


def test_bit_prior_values():
    sigma = 0.8
    assert bit_prior(0.0, sigma) == pytest.approx(0.5)
    assert bit_prior(1e6, sigma) == pytest.approx(1.0)
    assert bit_prior(-1e6, sigma) == pytest.approx(0.0)
    # y = sigma^2 makes the exponent exactly -2
    assert bit_prior(sigma * sigma, sigma) == pytest.approx(1.0 / (1.0 + np.exp(-2.0)))


def test_bit_log_priors_stable():
    l0, l1 = bit_log_priors(np.array([-1e4, 0.0, 1e4]), 0.5)
    assert np.isfinite(l0).all() and np.isfinite(l1).all()
    assert l0[1] == pytest.approx(np.log(0.5))
    assert np.allclose(np.exp(l0) + np.exp(l1), 1.0)


def test_symbol_priors_noiseless_point_mass(gf16):
    m = build_mother(gf16, 12, 3, seed=0)
    rep = repeat_code(m, 3, seed=1)
    rng = np.random.default_rng(2)
    x = rng.integers(0, 16, 12).astype(np.int32)
    y = transmit(encode_word(rep, x), 4, 1e-6, rng)
    pri = symbol_priors(rep, y, 1e-6)
    assert np.allclose(pri.sum(axis=1), 1.0, atol=1e-12)
    assert (np.argmax(pri, axis=1) == x).all()
    assert pri[np.arange(12), x].min() > 0.999999


def test_symbol_priors_no_repetition_matches_enumeration(gf4):
    m = build_mother(gf4, 6, 3, seed=1)
    rep = repeat_code(m, 1, seed=0)
    rng = np.random.default_rng(3)
    sigma = 1.1
    x = rng.integers(0, 4, 6).astype(np.int32)
    y = transmit(encode_word(rep, x), 2, sigma, rng)
    got = symbol_priors(rep, y, sigma)
    want = joint_posterior_oracle(rep, y, sigma)
    assert np.allclose(got, want, atol=1e-12)


@pytest.mark.parametrize("total_rep", [6, 9, 14])
def test_symbol_priors_repetition_matches_enumeration(gf4, total_rep):
    from nbldpc.code import extend

    m = build_mother(gf4, 6, 3, seed=1)
    rep = extend(m, total_rep, seed=5)
    rng = np.random.default_rng(4 + total_rep)
    sigma = 0.9
    x = rng.integers(0, 4, 6).astype(np.int32)
    y = transmit(encode_word(rep, x), 2, sigma, rng)
    got = symbol_priors(rep, y, sigma)
    want = joint_posterior_oracle(rep, y, sigma)
    assert np.allclose(got, want, atol=1e-12)


def test_symbol_priors_rotation_gf16(gf16):
    # aggregated prior of a rotated copy equals the bit-posterior product
    # at the rotated value, enumerated over all values
    m = build_mother(gf16, 4, 4, seed=2)
    rep = repeat_code(m, 2, seed=3)
    rng = np.random.default_rng(7)
    sigma = 1.3
    x = rng.integers(0, 16, 4).astype(np.int32)
    y = transmit(encode_word(rep, x), 4, sigma, rng)
    got = symbol_priors(rep, y, sigma)
    want = joint_posterior_oracle(rep, y, sigma)
    assert np.allclose(got, want, atol=1e-12)


def test_symbol_priors_extreme_observations(gf16):
    # |y| up to 60/sigma must not produce NaN or zero rows
    m = build_mother(gf16, 8, 3, seed=0)
    rep = repeat_code(m, 5, seed=0)
    sigma = 0.05
    n_obs = rep.total_symbols * 4
    y = np.linspace(-60 / sigma, 60 / sigma, n_obs)
    pri = symbol_priors(rep, y, sigma)
    assert np.isfinite(pri).all()
    assert np.allclose(pri.sum(axis=1), 1.0, atol=1e-9)
    assert (pri >= 0).all()


def test_awgn_capacity_closed_form():
    assert awgn_capacity(1.0) == pytest.approx(0.5)
    assert awgn_capacity(3.0) == pytest.approx(1.0)


def test_biawgn_capacity_against_oracle():
    # frozen from two independent quadratures agreeing to 1e-15
    assert biawgn_capacity(1.0) == pytest.approx(0.4859441541, abs=1e-9)
    for s in (0.01, 0.05, 0.3, 2.0, 5.0):
        assert biawgn_capacity(s) == pytest.approx(biawgn_capacity_oracle(s), abs=1e-9)


def test_biawgn_below_both_limits():
    for s in (0.01, 0.1, 1.0, 4.0, 30.0):
        c = biawgn_capacity(s)
        assert c < min(1.0, awgn_capacity(s)) + 1e-12
        assert c > 0


def test_low_snr_capacity_agreement():
    # the paper's operating regime: the two capacities agree within 1%
    for s in (0.001, 0.01, 0.03, 0.05):
        assert biawgn_capacity(s) == pytest.approx(awgn_capacity(s), rel=0.01)


def test_validation(gf16):
    m = build_mother(gf16, 8, 3, seed=0)
    rep = repeat_code(m, 2, seed=0)
    with pytest.raises(ValueError):
        symbol_priors(rep, np.zeros(7), 1.0)
    with pytest.raises(ValueError):
        biawgn_capacity(0.0)


def test_observation_dump_roundtrip(tmp_path):
    from nbldpc.channel import load_observations, save_observations

    rng = np.random.default_rng(0)
    y = rng.normal(size=257)
    path = tmp_path / "obs.f64"
    save_observations(y, path)
    assert path.stat().st_size == 257 * 8
    back = load_observations(path)
    assert (back == y).all()
