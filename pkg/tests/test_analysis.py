import math

import numpy as np
import pytest
from scipy import integrate

from nbldpc import analysis
from nbldpc.channel import awgn_capacity, biawgn_capacity


def awgn_inverse_oracle(rate: float, beta: float) -> float:
    """Independent inversion of beta = R/C with the AWGN closed form."""
    return 2.0 ** (2.0 * rate / beta) - 1.0


def test_efficiency_unity_at_capacity():
    s = 0.05
    c = biawgn_capacity(s)
    assert analysis.efficiency(c, s) == pytest.approx(1.0, abs=1e-12)


def test_efficiency_table_inversions():
    # implied SNRs for two published (R, beta) pairs, frozen from the
    # closed-form oracle above
    s1 = awgn_inverse_oracle(0.0111, 0.9079)
    assert s1 == pytest.approx(0.01709330, abs=1e-7)
    assert 10 * math.log10(s1) == pytest.approx(-17.6717, abs=0.001)
    s2 = awgn_inverse_oracle(0.0333, 0.9112)
    assert s2 == pytest.approx(0.05196772, abs=1e-7)
    assert 10 * math.log10(s2) == pytest.approx(-12.8427, abs=0.001)
    # library inversion agrees with the oracle
    assert analysis.snr_for_beta(0.0111, 0.9079, exact=False) == pytest.approx(s1, rel=1e-12)
    # and the round trip closes
    for exact in (False, True):
        s = analysis.snr_for_beta(0.0111, 0.9079, exact=exact)
        assert analysis.efficiency(0.0111, s, exact=exact) == pytest.approx(0.9079, abs=1e-9)


def test_efficiency_flags_above_one(caplog):
    import logging

    with caplog.at_level(logging.WARNING, logger="nbldpc.analysis"):
        beta = analysis.efficiency(0.6, 1.0)  # rate above capacity
    assert beta > 1.0
    assert any("efficiency" in r.message for r in caplog.records)
    pt = analysis.EfficiencyPoint(rate=0.6, snr=1.0, capacity=0.486, beta=beta, fer=0.1, n_bits=10)
    assert pt.suspect
    ok = analysis.EfficiencyPoint(rate=0.01, snr=0.02, capacity=0.014, beta=0.7, fer=0.1, n_bits=10)
    assert not ok.suspect


def test_finite_length_beta_half_epsilon_is_one():
    for n, s in ((1e4, 0.02), (3e5, 0.0178), (1e7, 1.0)):
        assert analysis.finite_length_beta(n, 0.5, s) == 1.0


def test_finite_length_beta_monotone_in_n():
    s = 0.0178
    vals = [analysis.finite_length_beta(n, 0.1, s) for n in (1e4, 1e5, 1e6, 1e8)]
    assert all(b2 > b1 for b1, b2 in zip(vals, vals[1:]))
    assert all(v < 1.0 for v in vals)


def test_finite_length_beta_monotone_in_epsilon():
    vals = [analysis.finite_length_beta(3e5, e, 0.0178) for e in (0.01, 0.1, 0.3, 0.5)]
    assert all(b2 > b1 for b1, b2 in zip(vals, vals[1:]))
    assert vals[-1] == 1.0


def test_entropy_variance_nonnegative():
    for s in (1e-4, 1e-3, 0.0178, 0.1, 1.0):
        assert analysis.entropy_variance(s) >= 0.0
        h = analysis.conditional_entropy(s)
        assert 0.0 < h < 1.0


def test_f_y_normalized():
    for s in (0.005, 0.0178, 0.3, 2.0):
        span = 1.0 + 12.0 / math.sqrt(s)
        total, _ = integrate.quad(lambda y: analysis.f_y(y, s), -span, span, epsabs=1e-12, limit=300)
        assert total == pytest.approx(1.0, abs=1e-9)


def test_entropy_second_moment_vs_sampling():
    s = 0.02
    quad = analysis.entropy_second_moment(s)
    rng = np.random.default_rng(123)
    n = 2_000_000
    x = 1.0 - 2.0 * rng.integers(0, 2, size=n)
    y = x + rng.normal(0.0, 1.0 / math.sqrt(s), size=n)
    stat = np.logaddexp(0.0, -2.0 * s * x * y) / math.log(2.0)
    sq = stat * stat
    se = sq.std(ddof=1) / math.sqrt(n)
    assert abs(quad - sq.mean()) <= 3.0 * se


def test_entropy_identities():
    # e(s) - h(s)^2 = v(s) >= 0 and h = 1 - C checks out against channel
    for s in (0.01, 0.1, 1.0):
        h = analysis.conditional_entropy(s)
        assert h == pytest.approx(1.0 - biawgn_capacity(s), abs=1e-12)
        v = analysis.entropy_variance(s)
        assert v == pytest.approx(analysis.entropy_second_moment(s) - h * h, abs=1e-12)


def test_validation_errors():
    with pytest.raises(ValueError):
        analysis.finite_length_beta(0, 0.1, 0.1)
    with pytest.raises(ValueError):
        analysis.finite_length_beta(1e5, 0.0, 0.1)
    with pytest.raises(ValueError):
        analysis.finite_length_beta(1e5, 1.0, 0.1)
    with pytest.raises(ValueError):
        analysis.efficiency(0.0, 0.1)
    with pytest.raises(ValueError):
        analysis.snr_for_beta(0.1, 0.0)
