import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from wavetriplet.errors import (AsymmetryError, IndefiniteWeightError,
                                NonFiniteError, NotSquareError)
from wavetriplet.numerics import (contraction_certificate, default_times,
                                  is_psd, matrix_exponential, null_space,
                                  numerical_rank, operator_norm,
                                  same_subspace, subspace_angles,
                                  weighted_operator_norm)

finite = st.floats(-5, 5, allow_nan=False, allow_infinity=False)


def test_expm_zero_and_empty():
    assert np.array_equal(matrix_exponential(np.zeros((3, 3))), np.eye(3))
    assert matrix_exponential(np.zeros((0, 0))).shape == (0, 0)


def test_expm_rotation_closed_form():
    A = np.array([[0.0, -1.0], [1.0, 0.0]])
    t = 0.7
    R = np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])
    assert np.allclose(matrix_exponential(A, t), R, atol=1e-14)


def test_expm_diagonal():
    d = np.array([-3.0, 0.5, 40.0])
    assert np.allclose(matrix_exponential(np.diag(d)), np.diag(np.exp(d)),
                       rtol=1e-13)


@settings(max_examples=60, deadline=None)
@given(arrays(float, (4, 4), elements=finite), st.floats(0, 3))
def test_expm_matches_scipy(A, t):
    ours = matrix_exponential(A, t)
    ref = scipy.linalg.expm(A * t)
    assert np.allclose(ours, ref, rtol=1e-10, atol=1e-10 * np.abs(ref).max())


def test_expm_rejects_bad_input():
    with pytest.raises(NotSquareError):
        matrix_exponential(np.zeros((2, 3)))
    with pytest.raises(NonFiniteError):
        matrix_exponential([[np.nan]])


def test_is_psd_basic():
    assert is_psd(np.eye(3))
    assert is_psd(np.zeros((2, 2)))
    assert not is_psd(np.diag([1.0, -1e-3]))
    # within tolerance of the boundary
    assert is_psd(np.diag([1.0, -1e-12]))
    with pytest.raises(AsymmetryError):
        is_psd([[0.0, 1.0], [0.0, 0.0]])


def test_weighted_norm_identity_weight():
    A = np.array([[1.0, 2.0], [0.0, 1.0]])
    assert weighted_operator_norm(A, np.eye(2)) == pytest.approx(
        operator_norm(A))


def test_weighted_norm_congruence():
    rng = np.random.default_rng(0)
    R = np.triu(rng.standard_normal((3, 3))) + 3 * np.eye(3)
    W = R.T @ R
    A = rng.standard_normal((3, 3))
    expected = np.linalg.norm(R @ A @ np.linalg.inv(R), 2)
    assert weighted_operator_norm(A, W) == pytest.approx(expected, rel=1e-12)


def test_indefinite_weight_rejected():
    with pytest.raises(IndefiniteWeightError):
        weighted_operator_norm(np.eye(2), np.diag([1.0, -1.0]))


def test_certificate_skew_and_dissipative():
    skew = np.array([[0.0, 2.0], [-2.0, 0.0]])
    rep = contraction_certificate(skew)
    assert rep.passed and abs(rep.max_norm - 1.0) < 1e-12
    rep = contraction_certificate(-np.eye(2))
    assert rep.passed and rep.max_norm == pytest.approx(1.0)
    rep = contraction_certificate(np.eye(2) * 0.1)
    assert not rep.passed and rep.argmax_time == default_times()[-1]


def test_certificate_needs_weight_for_weighted_skew():
    # skew in the weight diag(1, 4) but not in the Euclidean product
    W = np.diag([1.0, 4.0])
    A = np.array([[0.0, 4.0], [-1.0, 0.0]])
    assert contraction_certificate(A, W).passed
    assert not contraction_certificate(A).passed


def test_rank_and_null_space():
    M = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]])
    assert numerical_rank(M) == 1
    N = null_space(M)
    assert N.shape == (3, 2)
    assert np.allclose(M @ N, 0, atol=1e-14)
    assert np.allclose(N.T @ N, np.eye(2))
    assert null_space(np.zeros((2, 3))).shape == (3, 3)


def test_subspace_angles():
    a = np.array([[1.0], [0.0]])
    b = np.array([[1.0], [1.0]])
    assert subspace_angles(a, b)[0] == pytest.approx(np.pi / 4)
    assert same_subspace(a, 3 * a)
    assert not same_subspace(a, b)
    tiny = np.array([[1.0], [1e-12]])
    assert subspace_angles(a, tiny)[0] == pytest.approx(1e-12, rel=1e-6)
