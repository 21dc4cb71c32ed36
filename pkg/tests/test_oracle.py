import math

import numpy as np
import pytest

from bmstr.bounds import lower_bound_per_bit, q_function
from bmstr.code_model import CodeSpec
from bmstr.encoder import BmstCode, encode_frame
from bmstr.oracle import (CODE_A, CODE_B, BlockTrellis, Codebook, OracleSizeError, dmin, dmin_per_bit,
                          enumerate_codebook, ensemble_irwef_exhaustive, list_decode, map_decode, ml_decode,
                          product_code_ber, row_weights, simulate_product_code, specific_irwef)
from bmstr.wef import compute_irwef, crwef_closed_form


def _noisy(book, sigma, frames, seed):
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, book.size, size=frames)
    y = book.symbols()[idx] + sigma * rng.standard_normal((frames, book.n))
    return idx, y


def test_repetition_codebook():
    book = enumerate_codebook(CodeSpec(2, 1, 0, 1, 0))
    assert book.codewords.tolist() == [[0, 0], [1, 1]]
    assert dmin(book) == 2 and dmin_per_bit(book).tolist() == [2]


def test_codebook_is_linear_and_generated_by_rows():
    code = BmstCode(CodeSpec(2, 3, 1, 3, 1, interleaver_seed=4, puncture_seed=2))
    book = enumerate_codebook(code)
    words = {tuple(c) for c in book.codewords}
    assert len(words) == book.size == 2**9
    rng = np.random.default_rng(0)
    for _ in range(50):
        a, b = rng.integers(0, book.size, 2)
        assert tuple(book.codewords[a] ^ book.codewords[b]) in words
    assert np.array_equal(Codebook.from_generator(book.generator()).codewords, book.codewords)


def test_unit_rows_have_full_weight():
    for N, m in ((2, 0), (2, 2), (3, 1)):
        w = row_weights(CodeSpec(N, 4, 0, 3, m, interleaver_seed=1))
        assert np.all(w == N + m * (N - 1))


def test_oracle_size_guard():
    with pytest.raises(OracleSizeError):
        enumerate_codebook(CodeSpec(2, 6, 0, 3, 1))
    with pytest.raises(OracleSizeError):
        BlockTrellis(BmstCode(CodeSpec(2, 9, 0, 2, 1)))


def test_map_and_ml_noiseless():
    book = enumerate_codebook(CodeSpec(2, 3, 0, 2, 1, interleaver_seed=3))
    y = book.symbols()
    _, bits = map_decode(y, book, 0.05)
    assert np.array_equal(bits, book.messages)
    for i in range(0, book.size, 7):
        msg, cw = ml_decode(y[i], book)
        assert np.array_equal(msg, book.messages[i]) and np.array_equal(cw, book.codewords[i])


def test_map_beats_hard_decisions():
    code = BmstCode(CodeSpec(2, 3, 0, 3, 1, interleaver_seed=5))
    book = enumerate_codebook(code)
    sigma = 0.9
    idx, y = _noisy(book, sigma, 2000, 1)
    _, bits = map_decode(y, book, sigma)
    sys_pos = np.concatenate([np.arange(t * 6, t * 6 + 3) for t in range(3)])
    hard = (y[:, sys_pos] < 0).astype(np.uint8)
    truth = book.messages[idx]
    assert np.sum(bits != truth) < np.sum(hard != truth)


def test_list_decoding_limits():
    code = BmstCode(CodeSpec(2, 3, 0, 3, 1, interleaver_seed=2))
    book = enumerate_codebook(code)
    sigma = 1.0
    _, y = _noisy(book, sigma, 40, 2)
    offs = np.concatenate([np.arange(t * 6, t * 6 + 3) for t in range(3)])
    for row in y:
        full = list_decode(row, code, book.k)
        ml, _ = ml_decode(row, book)
        assert np.array_equal(full.reshape(-1), ml)
        zero = list_decode(row, code, 0)
        assert np.array_equal(zero.reshape(-1), (row[offs] < 0).astype(np.uint8))


def test_exhaustive_single_bit_layer_matches_specific_code():
    # with K = 1 every interleaver is the identity, so the ensemble is one code
    spec = CodeSpec(3, 1, 0, 4, 2)
    ens = ensemble_irwef_exhaustive(spec)
    one = specific_irwef(BmstCode(spec))
    assert np.allclose(ens.A, one.A)


def test_exhaustive_matches_trellis_and_closed_form():
    spec = CodeSpec(2, 2, 1, 2, 1)
    ens = ensemble_irwef_exhaustive(spec)
    tr = compute_irwef(spec, spec.k)
    n = max(ens.A.shape[1], tr.A.shape[1])
    pad = lambda a: np.pad(a, ((0, 0), (0, n - a.shape[1])))
    assert np.allclose(pad(ens.A), pad(tr.A), atol=1e-12)
    A1, A2 = crwef_closed_form(spec)
    assert np.allclose(ens.row(1)[:len(A1)], A1[:ens.A.shape[1]], atol=1e-12)
    assert np.allclose(ens.row(2)[:len(A2)], A2[:ens.A.shape[1]], atol=1e-12)


def test_trellis_map_equals_codebook_map():
    code = BmstCode(CodeSpec(2, 3, 1, 3, 1, interleaver_seed=7, puncture_seed=1))
    book = enumerate_codebook(code)
    sigma = 0.8
    _, y = _noisy(book, sigma, 64, 3)
    p0, bits = map_decode(y, book, sigma)
    llr, tbits = BlockTrellis(code).map_decode(y, sigma)
    exact = np.log(p0) - np.log1p(-p0)
    assert np.allclose(llr.reshape(64, -1), exact, atol=1e-6)
    assert np.array_equal(tbits.reshape(64, -1), bits)


def test_trellis_enumerators_equal_codebook():
    code = BmstCode(CodeSpec(2, 3, 0, 4, 1, interleaver_seed=9))
    book = enumerate_codebook(code)
    tr = BlockTrellis(code)
    assert np.allclose(tr.irwef().A, specific_irwef(code).A)
    assert np.array_equal(tr.dmin_per_bit(), dmin_per_bit(book))


def test_per_bit_bound_below_map_simulation():
    code = BmstCode(CodeSpec(2, 3, 0, 3, 1, interleaver_seed=1))
    book = enumerate_codebook(code)
    sigma = 0.8
    idx, y = _noisy(book, sigma, 20000, 4)
    _, bits = map_decode(y, book, sigma)
    ber = np.mean(bits != book.messages[idx])
    lb = lower_bound_per_bit(dmin_per_bit(book), sigma)
    assert ber >= lb - 3 * math.sqrt(lb / (20000 * book.k))


def test_product_code_components():
    assert CODE_A.codewords.tolist() == [[0, 0], [1, 0]]
    assert CODE_B.codewords.tolist() == [[0, 0], [1, 1]]
    J, sigma = 9, 1.0
    errs, bits = simulate_product_code(J, sigma, 20000, np.random.default_rng(5))
    exact = product_code_ber(J, sigma)
    assert bits == 20000 * (J + 1)
    assert abs(errs / bits - exact) < 3 * math.sqrt(exact / bits) + 1e-4
    assert product_code_ber(0, sigma) == pytest.approx(q_function(1.0))


def test_encode_frame_matches_codebook_rows():
    code = BmstCode(CodeSpec(3, 2, 1, 2, 1, interleaver_seed=3, puncture_seed=4))
    book = enumerate_codebook(code)
    u = book.messages[11].reshape(2, 2)
    assert np.array_equal(encode_frame(code, u)[0], book.codewords[11])
