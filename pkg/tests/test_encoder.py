import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare

from bmstr.code_model import CodeSpec, frame_layout
from bmstr.encoder import (BmstCode, Encoder, Interleaver, build_interleavers, build_puncture_pattern,
                           encode_frame, parity_blocks)


@st.composite
def code_and_messages(draw, n_msgs=2):
    N = draw(st.integers(2, 4))
    K = draw(st.integers(1, 12))
    Kp = draw(st.integers(0, K - 1))
    L = draw(st.integers(1, 6))
    m = draw(st.integers(0, 4))
    seed = draw(st.integers(0, 2**64 - 1))
    pseed = draw(st.integers(0, 2**64 - 1))
    spec = CodeSpec(N, K, Kp, L, m, interleaver_seed=seed, puncture_seed=pseed)
    rng = np.random.default_rng(draw(st.integers(0, 2**32)))
    return BmstCode(spec), [rng.integers(0, 2, size=(L, K), dtype=np.uint8) for _ in range(n_msgs)]


def test_hand_example_identity_interleavers():
    code = BmstCode.identity(CodeSpec(2, 2, 0, 2, 1))
    enc = Encoder(code)
    b0 = enc.encode_block(np.array([1, 1]))
    b1 = enc.encode_block(np.array([0, 1]))
    assert b0.systematic.tolist() == [1, 1] and b0.punctured.tolist() == [1, 1]
    assert b1.systematic.tolist() == [0, 1] and b1.punctured.tolist() == [1, 0]
    tail = enc.terminate()
    assert len(tail) == 1 and tail[0].systematic is None and tail[0].punctured.tolist() == [0, 1]
    assert enc.state.is_zero()
    frame = np.concatenate([b.bits() for b in (b0, b1, *tail)])
    assert frame.tolist() == [1, 1, 1, 1, 0, 1, 1, 0, 0, 1]
    bits, layout = encode_frame(code, np.array([[1, 1], [0, 1]]))
    assert bits.tolist() == frame.tolist() and layout.n == 10


def test_memoryless_is_interleaved_repetition():
    code = BmstCode(CodeSpec(2, 16, 0, 3, 0, interleaver_seed=9))
    u = np.random.default_rng(0).integers(0, 2, size=(3, 16))
    bits, _ = encode_frame(code, u)
    perm = code.perms[0, 0]
    expect = np.concatenate([np.concatenate([ut, ut[perm]]) for ut in u])
    assert np.array_equal(bits, expect)


def test_frame_size_example():
    spec = CodeSpec(2, 30, 0, 20, 2)
    bits, lay = encode_frame(spec, np.zeros((20, 30), dtype=np.uint8))
    assert bits.size == lay.n == 1260 and not bits.any()


def test_wrong_shapes_rejected():
    spec = CodeSpec(2, 4, 0, 3, 1)
    with pytest.raises(ValueError):
        encode_frame(spec, np.zeros((2, 4), dtype=np.uint8))
    with pytest.raises(ValueError):
        Encoder(BmstCode(spec)).encode_block(np.zeros(3))
    with pytest.raises(ValueError):
        encode_frame(spec, np.full((3, 4), 2))


def test_interleavers_deterministic_and_bijective():
    spec = CodeSpec(3, 20, 0, 4, 2, interleaver_seed=123)
    a, b = build_interleavers(spec), build_interleavers(spec)
    assert len(a) == 6
    for x, y in zip(a, b):
        assert np.array_equal(x.perm, y.perm)
        v = np.arange(20)
        assert np.array_equal(x.invert(x.apply(v)), v)
        assert np.array_equal(x.perm[x.inverse], v)
    assert not all(np.array_equal(a[0].perm, il.perm) for il in a[1:])


def test_interleaver_rejects_non_permutation():
    with pytest.raises(ValueError):
        Interleaver(np.array([0, 0, 1]))


def test_single_bit_interleavers_are_identity():
    for il in build_interleavers(CodeSpec(3, 1, 0, 2, 2, interleaver_seed=77)):
        assert il.perm.tolist() == [0]


def test_interleaver_positions_uniform():
    K, trials = 8, 10_000
    counts = np.zeros((K, K))
    for seed in range(trials):
        p = build_interleavers(CodeSpec(2, K, 0, 1, 0, interleaver_seed=seed))[0].perm
        counts[np.arange(K), p] += 1
    for row in counts:
        assert chisquare(row).pvalue > 0.01 / K  # Bonferroni over rows


def test_puncture_pattern():
    assert build_puncture_pattern(CodeSpec(2, 8, 0, 2, 1)).size == 0
    p = build_puncture_pattern(CodeSpec(2, 4, 3, 2, 1, puncture_seed=5))
    assert p.size == 3 and len(set(p.tolist())) == 3 and list(p) == sorted(p) and p.max() < 4
    q = build_puncture_pattern(CodeSpec(2, 4, 3, 2, 1, puncture_seed=5))
    assert np.array_equal(p, q)


@settings(max_examples=150, deadline=None)
@given(code_and_messages())
def test_linearity(cm):
    code, (u, v) = cm
    cu, cv, cw = (encode_frame(code, x)[0] for x in (u, v, u ^ v))
    assert np.array_equal(cw, cu ^ cv)


@settings(max_examples=150, deadline=None)
@given(code_and_messages(n_msgs=1))
def test_systematic_and_layout(cm):
    code, (u,) = cm
    bits, lay = encode_frame(code, u)
    assert bits.size == lay.n
    offs = lay.layer_offsets()
    for t in range(code.spec.L):
        assert np.array_equal(bits[offs[t]:offs[t] + code.spec.K], u[t])


@settings(max_examples=150, deadline=None)
@given(code_and_messages(n_msgs=1))
def test_blockwise_encoder_matches_frame_and_terminates(cm):
    code, (u,) = cm
    enc = Encoder(code)
    blocks = [enc.encode_block(ut) for ut in u] + enc.terminate()
    assert enc.state.is_zero()
    assert np.array_equal(np.concatenate([b.bits() for b in blocks]), encode_frame(code, u)[0])
    extra = enc.encode_block(np.zeros(code.spec.K, dtype=np.uint8))
    assert not any(p.any() for p in extra.parity) and not extra.punctured.any()


@settings(max_examples=150, deadline=None)
@given(st.integers(2, 4), st.integers(1, 10), st.integers(1, 5), st.integers(0, 4), st.integers(0, 2**63),
       st.data())
def test_weight_one_rows(N, K, L, m, seed, data):
    code = BmstCode(CodeSpec(N, K, 0, L, m, interleaver_seed=seed))
    pos = data.draw(st.integers(0, K * L - 1))
    u = np.zeros(K * L, dtype=np.uint8)
    u[pos] = 1
    bits, _ = encode_frame(code, u.reshape(L, K))
    assert bits.sum() == N + m * (N - 1)


def test_batch_encoding_matches_single():
    code = BmstCode(CodeSpec(3, 7, 2, 4, 2, interleaver_seed=1, puncture_seed=2))
    u = np.random.default_rng(3).integers(0, 2, size=(5, 4, 7), dtype=np.uint8)
    batch, _ = encode_frame(code, u)
    for b in range(5):
        assert np.array_equal(batch[b], encode_frame(code, u[b])[0])


def test_layer_dependent_interleavers_shape():
    spec = CodeSpec(2, 4, 0, 3, 1)
    rng = np.random.default_rng(0)
    perms = np.array([[[rng.permutation(4) for _ in range(2)]] for _ in range(4)])
    u = rng.integers(0, 2, size=(3, 4), dtype=np.uint8)
    par = parity_blocks(u, perms, 1)
    assert par.shape == (4, 1, 4)
    assert np.array_equal(par[0, 0], u[0][perms[0, 0, 0]])
    assert np.array_equal(par[3, 0], u[2][perms[3, 0, 1]])
    assert frame_layout(spec).n == 12 + 16
