import numpy as np
import pytest

from nbldpc import gf
from nbldpc.code import MotherCode, build_mother, repeat_code, syndrome
from nbldpc.decoder import DecodeResult, DecoderConfig, convolve_gf, decode, fwht
from tests.conftest import random_message


# ---------------------------------------------------------------------------
# transforms and convolution
# ---------------------------------------------------------------------------


def direct_xor_convolution(m1, m2):
    """O(q^2) oracle: (m1 (*) m2)(a) = sum over a1 ^ a2 = a."""
    q = len(m1)
    out = np.zeros(q)
    for a1 in range(q):
        for a2 in range(q):
            out[a1 ^ a2] += m1[a1] * m2[a2]
    return out


def test_fwht_two_point():
    v = np.array([3.0, 5.0])
    assert fwht(v).tolist() == [8.0, -2.0]


def test_fwht_delta_to_ones():
    v = np.zeros(16)
    v[0] = 1.0
    assert np.allclose(fwht(v), np.ones(16))


def test_fwht_double_application_identity():
    rng = np.random.default_rng(0)
    for q in (2, 8, 64, 1024, 4096):
        v = rng.random(q)
        w = v.copy()
        fwht(w)
        fwht(w)
        assert np.allclose(w / q, v, atol=1e-12), q


def test_fwht_validation():
    with pytest.raises(ValueError):
        fwht(np.zeros(3))
    with pytest.raises(ValueError):
        fwht(np.zeros(4, dtype=np.float32))


def test_convolve_point_masses():
    q = 16
    for a, b in [(0, 0), (3, 5), (7, 7), (15, 1)]:
        m1 = np.zeros(q)
        m2 = np.zeros(q)
        m1[a] = 1.0
        m2[b] = 1.0
        c = convolve_gf(m1, m2)
        assert c[a ^ b] == pytest.approx(1.0)
        assert c.sum() == pytest.approx(1.0)


def test_convolve_uniform_absorbs():
    rng = np.random.default_rng(1)
    q = 64
    u = np.full(q, 1.0 / q)
    m = random_message(rng, q)
    assert np.allclose(convolve_gf(u, m), u, atol=1e-12)


@pytest.mark.parametrize("q", [4, 16, 256, 1024])
def test_convolve_matches_direct_sum(q):
    rng = np.random.default_rng(q)
    # vectorized oracle (same math as direct_xor_convolution)
    idx = np.arange(q)[:, None] ^ np.arange(q)[None, :]
    for _ in range(10):
        m1 = random_message(rng, q)
        m2 = random_message(rng, q)
        want = np.zeros(q)
        np.add.at(want, idx, np.outer(m1, m2))
        got = convolve_gf(m1, m2)
        assert np.max(np.abs(got - want)) < 1e-10


def test_convolve_small_against_loop_oracle():
    rng = np.random.default_rng(5)
    m1 = random_message(rng, 8)
    m2 = random_message(rng, 8)
    assert np.allclose(convolve_gf(m1, m2), direct_xor_convolution(m1, m2), atol=1e-12)


# ---------------------------------------------------------------------------
# decoding
# ---------------------------------------------------------------------------


def point_mass_priors(x, q):
    pri = np.full((len(x), q), 1e-12)
    pri[np.arange(len(x)), x] = 1.0
    return pri / pri.sum(axis=1, keepdims=True)


def test_decode_point_mass_one_iteration(gf16):
    m = build_mother(gf16, 30, 3, seed=2)
    rep = repeat_code(m, 2, seed=0)
    rng = np.random.default_rng(3)
    x = rng.integers(0, 16, 30).astype(np.int32)
    z = syndrome(rep, x)
    res = decode(rep, point_mass_priors(x, 16), z, DecoderConfig(max_iters=5))
    assert res.success
    assert res.iterations == 1
    assert (res.mother_estimate == x).all()


def test_decode_binary_field_edge_case():
    # p=1: two-valued messages, degenerate transform sizes
    f2 = gf.make_field(1)
    m = build_mother(f2, 12, 3, seed=1)
    rng = np.random.default_rng(4)
    x = rng.integers(0, 2, 12).astype(np.int32)
    z = syndrome(m, x)
    res = decode(m, point_mass_priors(x, 2), z, DecoderConfig(max_iters=5))
    assert res.success and (res.mother_estimate == x).all()


def test_decode_success_implies_syndrome_match(gf16):
    m = build_mother(gf16, 24, 3, seed=4)
    rng = np.random.default_rng(6)
    pri = np.stack([random_message(rng, 16) for _ in range(24)])
    z = syndrome(m, rng.integers(0, 16, 24))
    res = decode(m, pri, z, DecoderConfig(max_iters=40))
    if res.success:
        assert (syndrome(m, res.mother_estimate) == z).all()


def test_decode_zero_syndrome_symmetric(gf4):
    m = build_mother(gf4, 12, 3, seed=0)
    rng = np.random.default_rng(1)
    pri = np.stack([random_message(rng, 4) for _ in range(12)])
    res = decode(m, pri, np.zeros(m.n_chk, dtype=int), DecoderConfig(max_iters=60))
    if res.success:
        assert (syndrome(m, res.mother_estimate) == 0).all()


def test_repetition_regeneration(gf16):
    m = build_mother(gf16, 21, 3, seed=9)
    rep = repeat_code(m, 4, seed=2)
    rng = np.random.default_rng(12)
    x = rng.integers(0, 16, 21).astype(np.int32)
    res = decode(rep, point_mass_priors(x, 16), syndrome(rep, x))
    assert res.success
    full = res.full_estimate
    assert full.shape == (rep.total_symbols,)
    for j in range(rep.n_rep):
        assert full[21 + j] == gf16.mul(int(rep.rep_coef[j]), int(full[j % 21]))


def test_validate_off_runs_fixed_iterations(gf16):
    m = build_mother(gf16, 30, 3, seed=2)
    rng = np.random.default_rng(3)
    x = rng.integers(0, 16, 30).astype(np.int32)
    z = syndrome(m, x)
    cfg = DecoderConfig(max_iters=7, validate_each_iter=False)
    res = decode(m, point_mass_priors(x, 16), z, cfg)
    assert res.iterations == 7
    assert res.success


def test_trace_collection(gf16):
    m = build_mother(gf16, 30, 3, seed=2)
    rng = np.random.default_rng(3)
    pri = np.stack([random_message(rng, 16) for _ in range(30)])
    z = syndrome(m, rng.integers(0, 16, 30))
    res = decode(m, pri, z, DecoderConfig(max_iters=10, collect_trace=True))
    assert res.trace is not None and len(res.trace) >= 1
    iters, unsat, changed = zip(*res.trace)
    assert list(iters) == list(range(1, len(iters) + 1))
    assert all(0 <= u <= m.n_chk for u in unsat)
    if res.success:
        assert unsat[-1] == 0


def test_decoder_validation_errors(gf4):
    m = build_mother(gf4, 6, 3, seed=0)
    good = np.full((6, 4), 0.25)
    z = np.zeros(m.n_chk, dtype=int)
    with pytest.raises(ValueError):
        decode(m, good[:, :3], z)
    with pytest.raises(ValueError):
        decode(m, good * 2.0, z)  # not normalized
    with pytest.raises(ValueError):
        decode(m, good, z[:-1])
    with pytest.raises(ValueError):
        decode(m, good, np.full(m.n_chk, 4))
    with pytest.raises(ValueError):
        DecoderConfig(max_iters=0)


# ---------------------------------------------------------------------------
# exactness on cycle-free graphs
# ---------------------------------------------------------------------------


def random_tree_code(field, rng, max_symbols=6):
    """Random cycle-free Tanner graph as a raw MotherCode record."""
    n_sym = int(rng.integers(2, max_symbols + 1))
    n_chk = int(rng.integers(n_sym, n_sym + 2))
    # grow a random bipartite tree: nodes alternate between symbol and
    # check types; every new node hangs off an existing node of the
    # other type
    edges = []
    sym_seen = [0]
    chk_seen = [0]
    edges.append((0, 0))
    next_sym, next_chk = 1, 1
    while next_sym < n_sym or next_chk < n_chk:
        if next_sym < n_sym and (next_chk >= n_chk or rng.random() < 0.5):
            parent = int(rng.integers(0, len(chk_seen)))
            edges.append((chk_seen[parent], next_sym))
            sym_seen.append(next_sym)
            next_sym += 1
        else:
            parent = int(rng.integers(0, len(sym_seen)))
            edges.append((next_chk, sym_seen[parent]))
            chk_seen.append(next_chk)
            next_chk += 1
    edges.sort()
    edge_check = np.array([e[0] for e in edges], dtype=np.int32)
    edge_sym = np.array([e[1] for e in edges], dtype=np.int32)
    edge_coef = rng.integers(1, field.q, size=len(edges)).astype(np.int32)
    counts = np.bincount(edge_check, minlength=n_chk)
    check_ptr = np.zeros(n_chk + 1, np.int32)
    np.cumsum(counts, out=check_ptr[1:])
    return MotherCode(
        field=field,
        n_sym=n_sym,
        n_chk=n_chk,
        check_degree=0,
        edge_check=edge_check,
        edge_sym=edge_sym,
        edge_coef=edge_coef,
        check_ptr=check_ptr,
        seed=0,
        girth=0,
    )


def coset_posteriors(code, priors, z):
    """Enumerate all q^N words; exact P(x_n = a | syndrome, priors)."""
    fld = code.field
    q, n = fld.q, code.n_sym
    words = np.indices((q,) * n).reshape(n, -1).T  # (q^n, n)
    zs = np.zeros((len(words), code.n_chk), dtype=np.int64)
    for e in range(code.n_edges):
        zs[:, code.edge_check[e]] ^= fld.mul_vec(
            int(code.edge_coef[e]), words[:, code.edge_sym[e]]
        )
    keep = (zs == z[None, :]).all(axis=1)
    words = words[keep]
    assert len(words) > 0
    w = np.prod(priors[np.arange(n)[None, :], words], axis=1)
    out = np.zeros((n, q))
    for i in range(n):
        np.add.at(out[i], words[:, i], w)
    return out / out.sum(axis=1, keepdims=True)


@pytest.mark.parametrize("p,seed", [(2, s) for s in range(12)] + [(4, s) for s in range(8)])
def test_bp_exact_on_trees(p, seed):
    fld = gf.make_field(p)
    rng = np.random.default_rng(1000 + seed)
    code = random_tree_code(fld, rng, max_symbols=6 if p == 2 else 4)
    priors = np.stack([random_message(rng, fld.q) for _ in range(code.n_sym)])
    x = rng.integers(0, fld.q, code.n_sym)
    z = syndrome(code, x)
    cfg = DecoderConfig(
        max_iters=2 * (code.n_sym + code.n_chk),
        validate_each_iter=False,
        track_posteriors=True,
    )
    res = decode(code, priors, z, cfg)
    want = coset_posteriors(code, priors, z)
    assert np.max(np.abs(res.posteriors - want)) < 1e-9


def test_messages_stay_normalized_at_extreme_noise(gf16):
    # SNR of -30 dB: the message floor must keep every vector finite and
    # normalized through long products
    from nbldpc.backend import kernels as K
    from nbldpc.decoder import MSG_FLOOR, decode_tables

    m = build_mother(gf16, 24, 3, seed=1)
    rep = repeat_code(m, 6, seed=0)
    rng = np.random.default_rng(2)
    from nbldpc.channel import symbol_priors, transmit
    from nbldpc.code import encode_word

    sigma = 1.0 / np.sqrt(10 ** (-30 / 10))
    x = rng.integers(0, 16, 24).astype(np.int32)
    z = syndrome(rep, x).astype(np.int16)
    y = transmit(encode_word(rep, x), 4, sigma, rng)
    priors = symbol_priors(rep, y, sigma)
    tabs = decode_tables(m)
    q_msg = np.ascontiguousarray(priors[tabs.edge_sym])
    r_msg = np.empty_like(q_msg)
    xhat = np.empty(24, np.int32)
    for _ in range(30):
        K.check_pass(q_msg, r_msg, tabs.check_ptr, tabs.perm_in, tabs.perm_out, z, MSG_FLOOR)
        K.symbol_pass(priors, r_msg, q_msg, tabs.sym_ptr, tabs.sym_edge, xhat, MSG_FLOOR)
        for arr in (q_msg, r_msg):
            assert np.isfinite(arr).all()
            assert (arr >= 0).all()
            assert np.allclose(arr.sum(axis=1), 1.0, atol=1e-9)


def test_extrinsic_rule_by_perturbation(gf4):
    """The check message returned to a symbol ignores that symbol's prior."""
    from nbldpc.backend import kernels as K
    from nbldpc.decoder import MSG_FLOOR, decode_tables

    m = build_mother(gf4, 6, 3, seed=3)
    tabs = decode_tables(m)
    rng = np.random.default_rng(8)
    priors = np.stack([random_message(rng, 4) for _ in range(6)])
    z = syndrome(m, rng.integers(0, 4, 6)).astype(np.int16)

    def one_check_pass(pri):
        q_msg = np.ascontiguousarray(pri[tabs.edge_sym])
        r_msg = np.empty_like(q_msg)
        K.check_pass(q_msg, r_msg, tabs.check_ptr, tabs.perm_in, tabs.perm_out, z, MSG_FLOOR)
        return r_msg

    r_base = one_check_pass(priors)
    target_sym = 0
    perturbed = priors.copy()
    perturbed[target_sym] = random_message(rng, 4)
    r_pert = one_check_pass(perturbed)
    edges_of_sym = np.where(m.edge_sym == target_sym)[0]
    # messages sent back to the perturbed symbol are unchanged
    assert np.allclose(r_base[edges_of_sym], r_pert[edges_of_sym], atol=1e-12)
    # but messages to the other symbols of those checks do change
    touched_checks = m.edge_check[edges_of_sym]
    other = [
        e
        for e in range(m.n_edges)
        if m.edge_check[e] in touched_checks and m.edge_sym[e] != target_sym
    ]
    assert not np.allclose(r_base[other], r_pert[other], atol=1e-12)


def test_backends_agree_full_decode(gf16):
    from nbldpc.backend import get_backend
    from nbldpc.decoder import MSG_FLOOR, decode_tables

    m = build_mother(gf16, 36, 3, seed=5)
    tabs = decode_tables(m)
    rng = np.random.default_rng(9)
    priors = np.stack([random_message(rng, 16) for _ in range(36)])
    z = syndrome(m, rng.integers(0, 16, 36)).astype(np.int16)

    results = {}
    for name in ("numba", "numpy"):
        K = get_backend(name)
        q_msg = np.ascontiguousarray(priors[tabs.edge_sym])
        r_msg = np.empty_like(q_msg)
        xhat = np.empty(36, np.int32)
        for _ in range(8):
            K.check_pass(q_msg, r_msg, tabs.check_ptr, tabs.perm_in, tabs.perm_out, z, MSG_FLOOR)
            K.symbol_pass(priors, r_msg, q_msg, tabs.sym_ptr, tabs.sym_edge, xhat, MSG_FLOOR)
        post = np.empty_like(priors)
        K.posteriors(priors, r_msg, tabs.sym_ptr, tabs.sym_edge, post)
        results[name] = (q_msg, xhat.copy(), post)
    assert np.allclose(results["numba"][0], results["numpy"][0], rtol=1e-8, atol=1e-12)
    assert (results["numba"][1] == results["numpy"][1]).all()
    assert np.allclose(results["numba"][2], results["numpy"][2], rtol=1e-8, atol=1e-12)
