import math
import warnings
from fractions import Fraction

import numpy as np
import pytest

from dense_oracle import count_4cycles, dense_qc, gf2_rank
from qcmce import codes
from qcmce.codes import (
    DegreeProfile,
    QProfile,
    check_realizable_m,
    degree_polynomials,
    edge_to_node,
    generate_h,
    generate_q,
    generate_s,
    pooled_differences_distinct,
    q_block_weights,
)
from qcmce.errors import GenerationExhausted, InfeasibleProfile, ValidationError
from qcmce.gf2 import QcMatrix, circ_from_support, qc_inv, qc_mul, qc_vec_mul


# -- degree polynomials ----------------------------------------------------------


def test_regular_polynomials():
    dp = degree_polynomials(DegreeProfile((13,) * 4, 4096))
    assert dp.v_coeffs == {13: 1}
    assert dp.lambda_coeffs == {13: 1}
    assert dp.c_coeffs == {52: 1}
    assert dp.rho_coeffs == {52: 1}


def test_single_block_point_masses():
    dp = degree_polynomials(DegreeProfile((5,), 31))
    for poly in (dp.v_coeffs, dp.lambda_coeffs, dp.c_coeffs, dp.rho_coeffs):
        assert poly == {5: 1}


def test_irregular_edge_fractions():
    dp = degree_polynomials(DegreeProfile((8, 11, 15, 18), 4096))
    assert dp.v_coeffs == {d: Fraction(1, 4) for d in (8, 11, 15, 18)}
    assert dp.lambda_coeffs == {d: Fraction(d, 52) for d in (8, 11, 15, 18)}


@pytest.mark.parametrize("profile", [(8, 11, 15, 18), (9, 11, 15, 17), (5, 5, 8, 13), (3, 3, 3, 3)])
def test_polynomial_round_trip(profile):
    dp = degree_polynomials(DegreeProfile(profile, 4096))
    for poly in (dp.lambda_coeffs, dp.rho_coeffs, dp.v_coeffs, dp.c_coeffs):
        assert abs(float(sum(poly.values())) - 1) < 1e-12
    for edge, node in ((dp.lambda_coeffs, dp.v_coeffs), (dp.rho_coeffs, dp.c_coeffs)):
        back = edge_to_node(edge)
        assert all(abs(float(back[i] - node[i])) < 1e-12 for i in node)


def test_profile_validation():
    with pytest.raises(ValidationError):
        DegreeProfile((1, 3), 16)
    with pytest.raises(ValidationError):
        DegreeProfile((3, 16), 16)
    with pytest.raises(ValidationError):
        DegreeProfile((3, 5), 16, security_bits=20)
    prof = DegreeProfile((8, 11, 15, 18), 4381, security_bits=80)
    assert math.log2(math.comb(4381, 8)) >= 80
    assert prof.dc == 52 and prof.dv_avg == 13


# -- H ------------------------------------------------------------------------


def test_smallest_rdf_block():
    assert pooled_differences_distinct([[0, 1]], 5)
    # an even-weight single block is never invertible, so only the
    # difference-family part applies
    h = generate_h(DegreeProfile((2,), 5), np.random.default_rng(0), require_invertible_last=False)
    assert h[0, 0].weight == 2
    assert count_4cycles(dense_qc(h)) == 0


def test_two_block_example_has_no_4cycles():
    assert pooled_differences_distinct([[0, 1], [0, 3]], 7)
    h = QcMatrix.from_blocks([[circ_from_support(7, {0, 1}), circ_from_support(7, {0, 3})]])
    assert count_4cycles(dense_qc(h)) == 0


def test_repeated_difference_gives_4cycle():
    assert not pooled_differences_distinct([[0, 1], [0, 1]], 7)
    h = QcMatrix.from_blocks([[circ_from_support(7, {0, 1}), circ_from_support(7, {0, 1})]])
    assert count_4cycles(dense_qc(h)) > 0


@pytest.mark.parametrize(
    "profile,p,seed",
    [((3,), 11, 0), ((3, 3, 3, 3), 64, 1), ((2, 3, 4, 5), 64, 2), ((3, 5), 64, 3), ((2, 2, 3), 31, 4)],
)
def test_generated_h_structure(profile, p, seed):
    h = generate_h(DegreeProfile(profile, p), np.random.default_rng(seed))
    d = dense_qc(h)
    assert tuple(h.column_weights()) == profile
    assert (d.sum(axis=1) == sum(profile)).all()
    assert count_4cycles(d) == 0
    assert gf2_rank(d[:, -p:]) == p


def test_generate_h_many_seeds_no_4cycles():
    for seed in range(20):
        h = generate_h(DegreeProfile((2, 3, 3, 5), 64), np.random.default_rng(seed))
        assert count_4cycles(dense_qc(h)) == 0


def test_generate_h_is_deterministic():
    prof = DegreeProfile((5, 8, 10, 13), 512)
    assert generate_h(prof, np.random.default_rng(5)) == generate_h(prof, np.random.default_rng(5))


def test_generate_h_infeasible():
    with pytest.raises(InfeasibleProfile):
        generate_h(DegreeProfile((5, 5), 31), np.random.default_rng(0))
    with pytest.raises(InfeasibleProfile):
        generate_h(DegreeProfile((3, 4), 64), np.random.default_rng(0))


def test_generate_h_budget_exhausted(monkeypatch):
    # 60 of the 60 nonzero differences at p = 61 would be needed: a perfect
    # difference family that a handful of random draws cannot find
    monkeypatch.setattr(codes, "RDF_ATTEMPTS", 5)
    monkeypatch.setattr(codes, "RESTARTS", 3)
    with pytest.raises(GenerationExhausted):
        generate_h(DegreeProfile((5, 5, 5), 61), np.random.default_rng(0))


# -- Q ------------------------------------------------------------------------


def test_q_m1_is_block_permutation_of_shifts():
    q = generate_q(QProfile(4, 32, Fraction(1)), np.random.default_rng(0))
    d = dense_qc(q)
    assert (d.sum(axis=0) == 1).all() and (d.sum(axis=1) == 1).all()
    for row in q.block_weights():
        assert sorted(row) == [0, 0, 0, 1]


def test_q_grid_m45():
    w = q_block_weights(4, Fraction(9, 2), np.random.default_rng(0))
    rows = sorted(sum(r) for r in w)
    cols = sorted(sum(w[i][j] for i in range(4)) for j in range(4))
    assert rows == [4, 4, 5, 5] and cols == [4, 4, 5, 5]
    assert QProfile(4, 64, Fraction(9, 2), w).m == Fraction(9, 2)


def test_q_m75_invertible_dense():
    q = generate_q(QProfile.random(4, 64, Fraction(15, 2), np.random.default_rng(2)), np.random.default_rng(3))
    d = dense_qc(q)
    assert gf2_rank(d) == 256
    assert set(d.sum(axis=1)) <= {7, 8} and set(d.sum(axis=0)) <= {7, 8}
    assert qc_mul(q, qc_inv(q)) == QcMatrix.identity(4, 64)


@pytest.mark.parametrize("m", [Fraction(5, 4), Fraction(3, 2), Fraction(9, 4), Fraction(3), Fraction(19, 4)])
def test_q_weights_and_error_spread(m):
    rng = np.random.default_rng(7)
    q = generate_q(QProfile.random(4, 128, m, rng), rng)
    d = dense_qc(q)
    allowed = {math.floor(m), math.ceil(m)}
    assert set(d.sum(axis=1)) <= allowed and set(d.sum(axis=0)) <= allowed
    t_prime = 12
    for _ in range(20):
        e = np.zeros(512, np.uint8)
        e[rng.choice(512, t_prime, replace=False)] = 1
        assert qc_vec_mul(e, q).sum() <= t_prime * math.ceil(m)


def test_q_profile_rejects_unrealizable_m():
    with pytest.raises(InfeasibleProfile):
        QProfile(4, 64, Fraction(73, 16))
    with pytest.raises(InfeasibleProfile):
        QProfile(4, 64, Fraction(1, 2))


def test_even_integer_m_is_infeasible():
    # every row of Q(1) then has even weight, so the all-ones vector is in its kernel
    with pytest.raises(InfeasibleProfile):
        q_block_weights(4, Fraction(2))


def test_q_profile_rejects_bad_grid():
    with pytest.raises(InfeasibleProfile):
        QProfile(2, 16, Fraction(3, 2), ((3, 0), (0, 0)))


def test_check_realizable_m_warns():
    with pytest.warns(UserWarning):
        assert check_realizable_m(Fraction(73, 16), 4) == Fraction(19, 4)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert check_realizable_m(Fraction(9, 2), 4) == Fraction(9, 2)


# -- S ------------------------------------------------------------------------


def test_s_single_block_odd_weight():
    s = generate_s(1, 31, np.random.default_rng(0))
    assert s[0, 0].weight % 2 == 1


def test_s_3x3_invertible():
    s = generate_s(3, 8, np.random.default_rng(1))
    assert gf2_rank(dense_qc(s)) == 24


def test_s_blocks_are_dense():
    s = generate_s(3, 256, np.random.default_rng(2))
    weights = [w for row in s.block_weights() for w in row]
    assert all(80 < w < 176 for w in weights)
