import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dense_oracle import dense_qc, syndrome_table_decode
from qcmce.analysis.threshold import bf_threshold_opt
from qcmce.crypto import systematic_generator
from qcmce.decoders import BfConfig, bf_decode, bf_decode_batch, spa_decode, spa_decode_batch, tanner_graph
from qcmce.errors import ValidationError
from qcmce.gf2 import qc_vec_mul
from qcmce.simulate import error_patterns

TOY_B = BfConfig((2, 2, 2, 2))


def block_shift(v, p, s):
    return np.concatenate([np.roll(v[i * p : (i + 1) * p], s) for i in range(len(v) // p)])


def random_codeword(h, rng):
    g = systematic_generator(h)
    u = rng.integers(0, 2, g.rows0 * g.p).astype(np.uint8)
    return qc_vec_mul(u, g)


def test_tanner_graph_syndrome_matches_dense(toy_h):
    rng = np.random.default_rng(0)
    words = rng.integers(0, 2, (5, 256)).astype(np.uint8)
    expect = (words.astype(int) @ dense_qc(toy_h).T.astype(int)) % 2
    assert np.array_equal(tanner_graph(toy_h).syndrome(words), expect)


def test_bf_codeword_is_fixed_point(toy_h):
    c = random_codeword(toy_h, np.random.default_rng(1))
    out = bf_decode(toy_h, c, TOY_B)
    assert out.converged and out.iterations_used == 0
    assert np.array_equal(out.word, c)


def test_spa_codeword_is_fixed_point(toy_h):
    c = random_codeword(toy_h, np.random.default_rng(2))
    out = spa_decode(toy_h, c, 0.01)
    assert out.converged and out.iterations_used == 0
    assert np.array_equal(out.word, c)


@pytest.mark.parametrize("pos", [0, 77, 255])
def test_bf_single_error_matches_syndrome_table(toy_h, pos):
    c = random_codeword(toy_h, np.random.default_rng(pos))
    y = c.copy()
    y[pos] ^= 1
    oracle = syndrome_table_decode(dense_qc(toy_h), y, 1)
    out = bf_decode(toy_h, y, TOY_B)
    assert out.converged
    assert np.array_equal(out.word, oracle)
    assert np.array_equal(out.word, c)


def test_spa_two_errors_matches_syndrome_table(toy_h):
    rng = np.random.default_rng(3)
    c = random_codeword(toy_h, rng)
    y = c.copy()
    y[[5, 140]] ^= 1
    oracle = syndrome_table_decode(dense_qc(toy_h), y, 2)
    out = spa_decode(toy_h, y, 2 / 256)
    assert out.converged
    assert np.array_equal(out.word, oracle)
    assert np.array_equal(out.word, c)


def test_bf_far_above_threshold_fails(toy_h):
    t_th = bf_threshold_opt(256, (3, 3, 3, 3)).t_th
    weight = min(4 * t_th + 20, 100)
    rng = np.random.default_rng(4)
    _, _, conv = bf_decode_batch(toy_h, error_patterns(256, weight, 100, rng), TOY_B)
    assert conv.sum() < 50


def test_shift_equivariance_both_decoders(toy_h):
    rng = np.random.default_rng(5)
    e = error_patterns(256, 6, 1, rng)[0]
    for s in (1, 17, 63):
        e_s = block_shift(e, 64, s)
        bf0, bf1 = (bf_decode(toy_h, v, TOY_B) for v in (e, e_s))
        assert np.array_equal(block_shift(bf0.word, 64, s), bf1.word)
        assert bf0.iterations_used == bf1.iterations_used
        sp0, sp1 = (spa_decode(toy_h, v, 6 / 256) for v in (e, e_s))
        assert np.array_equal(block_shift(sp0.word, 64, s), sp1.word)
        assert sp0.iterations_used == sp1.iterations_used


@given(st.integers(0, 2**32 - 1), st.integers(1, 40))
@settings(max_examples=30, deadline=None)
def test_converged_implies_zero_syndrome(toy_h, seed, weight):
    rng = np.random.default_rng(seed)
    e = error_patterns(256, weight, 4, rng)
    g = tanner_graph(toy_h)
    for words, _, conv in (bf_decode_batch(toy_h, e, TOY_B), spa_decode_batch(toy_h, e, weight / 256, 20)):
        synd = g.syndrome(words).any(axis=1)
        assert not (conv & synd).any()


def test_batch_equals_single(toy_h):
    rng = np.random.default_rng(6)
    e = error_patterns(256, 8, 6, rng)
    words, iters, conv = bf_decode_batch(toy_h, e, TOY_B)
    for f in range(6):
        one = bf_decode(toy_h, e[f], TOY_B)
        assert np.array_equal(one.word, words[f]) and one.converged == conv[f]


def test_bf_config_range_check():
    with pytest.raises(ValidationError):
        BfConfig((1, 2, 2, 2)).check_against((3, 3, 3, 3))
    with pytest.raises(ValidationError):
        BfConfig((3, 2, 2, 2)).check_against((3, 3, 3, 3))
    with pytest.raises(ValidationError):
        BfConfig((2, 2)).check_against((3, 3, 3, 3))
    BfConfig.gallager_a((3, 5)).check_against((3, 5))


def test_spa_crossover_domain(toy_h):
    with pytest.raises(ValidationError):
        spa_decode(toy_h, np.zeros(256, np.uint8), 0.5)
    with pytest.raises(ValidationError):
        spa_decode(toy_h, np.zeros(256, np.uint8), 0.0)


def test_wrong_length_rejected(toy_h):
    with pytest.raises(ValidationError):
        bf_decode(toy_h, np.zeros(255, np.uint8), TOY_B)
