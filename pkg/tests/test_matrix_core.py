"""Tests for the matrix substrate: definiteness, roots, pseudo-inverse,
blocks and the JSON wire format."""

import json
import math

import numpy as np
import pytest

from oplab import (
    DimensionError,
    DomainError,
    HermitianError,
    MatrixFormatError,
    Tolerance,
    block_compose,
    block_split,
    definiteness,
    eigenvalues,
    hermitian_part,
    is_hermitian,
    matrix_from_json,
    matrix_to_json,
    moore_penrose,
    operator_norm,
    spectral_radius,
    sqrt_psd,
)
from oplab.generators import gen_haar_unitary, gen_psd

from conftest import ginibre, philox, rank_deficient

# 2x2 eigenvalue oracle lambda = (tr +- sqrt(tr^2 - 4 det)) / 2 applied to
# [[-4,-2],[-2,-3]] (tr = -7, det = 8): both roots negative.
NSD_EXAMPLE_EIGS = ((-7 - math.sqrt(17)) / 2, (-7 + math.sqrt(17)) / 2)
# sigma_max of [[2,0],[1,2]]: largest eigenvalue of T*T = [[5,2],[2,4]].
NORM_EXAMPLE = math.sqrt((9 + math.sqrt(17)) / 2)


def test_is_hermitian_identity():
    for d in (1, 3, 6):
        assert is_hermitian(np.eye(d))


def test_is_hermitian_strict_upper():
    assert not is_hermitian([[0, 1], [0, 0]])


def test_is_hermitian_complex_example():
    assert is_hermitian([[1, 1j], [-1j, 1]])


def test_definiteness_zero_matrix():
    verdict = definiteness(np.zeros((3, 3)))
    assert verdict.verdict == "ZERO"
    assert verdict.is_psd and verdict.is_nsd


def test_definiteness_nsd_example():
    verdict = definiteness([[-4, -2], [-2, -3]])
    assert verdict.verdict == "NSD"
    assert verdict.min_eig == pytest.approx(NSD_EXAMPLE_EIGS[0])
    assert verdict.max_eig == pytest.approx(NSD_EXAMPLE_EIGS[1])


def test_definiteness_indefinite_example():
    verdict = definiteness([[0, 1], [1, 0]])
    assert verdict.verdict == "INDEFINITE"
    assert verdict.min_eig == pytest.approx(-1.0)
    assert verdict.max_eig == pytest.approx(1.0)


def test_definiteness_rejects_non_hermitian():
    with pytest.raises(HermitianError):
        definiteness([[0, 1], [0, 0]])


def test_definiteness_unitary_conjugation_invariant():
    # verdicts survive a change of orthonormal basis (10x tolerance slack)
    rng = philox(11)
    tol = Tolerance()
    loose = Tolerance(rel_eps=10 * tol.rel_eps, abs_eps=10 * tol.abs_eps)
    for trial in range(25):
        d = int(rng.integers(2, 9))
        h = hermitian_part(ginibre(rng, d))
        u = gen_haar_unitary(500 + trial, d)
        base = definiteness(h, tol).verdict
        conjugated = definiteness(u.conj().T @ h @ u, loose).verdict
        assert base == conjugated


def test_sqrt_psd_identity_and_diagonal():
    np.testing.assert_allclose(sqrt_psd(np.eye(4)), np.eye(4), atol=1e-14)
    np.testing.assert_allclose(sqrt_psd([[4, 0], [0, 9]]), [[2, 0], [0, 3]], atol=1e-14)
    np.testing.assert_allclose(sqrt_psd([[0, 0], [0, 4]]), [[0, 0], [0, 2]], atol=1e-14)


def test_sqrt_psd_rejects_indefinite_and_negative():
    with pytest.raises(DomainError):
        sqrt_psd([[0, 1], [1, 0]])
    with pytest.raises(DomainError):
        sqrt_psd([[-1, 0], [0, -2]])


def test_sqrt_psd_squares_back():
    for trial in range(20):
        d = int(philox(trial).integers(1, 17))
        p = gen_psd(trial, d, condition_cap=1e8)
        s = sqrt_psd(p)
        assert operator_norm(s @ s - p) <= 1e-8 * (1 + operator_norm(p))


def test_moore_penrose_invertible_and_zero():
    rng = philox(5)
    a = ginibre(rng, 4) + 2 * np.eye(4)
    np.testing.assert_allclose(moore_penrose(a), np.linalg.inv(a), atol=1e-10)
    np.testing.assert_allclose(moore_penrose(np.zeros((3, 3))), np.zeros((3, 3)))


def test_moore_penrose_example():
    # oracle: check the four Penrose identities for the claimed inverse
    a = np.array([[0, 2], [0, 0]], dtype=complex)
    claimed = np.array([[0, 0], [0.5, 0]], dtype=complex)
    np.testing.assert_allclose(a @ claimed @ a, a, atol=1e-15)
    np.testing.assert_allclose(claimed @ a @ claimed, claimed, atol=1e-15)
    np.testing.assert_allclose((a @ claimed).conj().T, a @ claimed, atol=1e-15)
    np.testing.assert_allclose((claimed @ a).conj().T, claimed @ a, atol=1e-15)
    np.testing.assert_allclose(moore_penrose(a), claimed, atol=1e-12)


def test_moore_penrose_identities_rank_deficient():
    rng = philox(9)
    for trial in range(15):
        d = int(rng.integers(2, 17))
        a = rank_deficient(rng, d, rank=int(rng.integers(1, d)))
        pinv = moore_penrose(a)
        scale = 1e-8 * (1 + operator_norm(a) + operator_norm(pinv))
        assert operator_norm(a @ pinv @ a - a) <= scale
        assert operator_norm(pinv @ a @ pinv - pinv) <= scale
        assert operator_norm(a @ pinv - (a @ pinv).conj().T) <= scale
        assert operator_norm(pinv @ a - (pinv @ a).conj().T) <= scale


def test_norms_and_spectrum_examples():
    assert operator_norm(np.eye(5)) == pytest.approx(1.0)
    assert spectral_radius(np.eye(5)) == pytest.approx(1.0)
    nil = [[0, 1], [0, 0]]
    assert operator_norm(nil) == pytest.approx(1.0)
    assert spectral_radius(nil) == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(sorted(eigenvalues(nil)), [0, 0], atol=1e-12)
    t = [[2, 0], [1, 2]]
    assert spectral_radius(t) == pytest.approx(2.0)
    assert operator_norm(t) == pytest.approx(NORM_EXAMPLE)


def test_eigenvalues_of_symmetrized_are_real():
    rng = philox(13)
    for _ in range(10):
        d = int(rng.integers(2, 10))
        h = hermitian_part(ginibre(rng, d))
        eigs = eigenvalues(h)
        assert float(np.max(np.abs(eigs.imag))) <= 1e-12 * max(1.0, operator_norm(h))


def test_norm_requires_square_for_spectrum():
    with pytest.raises(DimensionError):
        spectral_radius(np.zeros((2, 3)))


def test_block_compose_examples():
    composed = block_compose([[np.eye(1), np.zeros((1, 1))], [np.zeros((1, 1)), np.zeros((1, 1))]])
    np.testing.assert_allclose(composed, np.diag([1.0, 0.0]))
    grid = block_split(np.diag([1.0, 2.0, 3.0]), 2)
    np.testing.assert_allclose(grid[0][0], np.diag([1.0, 2.0]))
    np.testing.assert_allclose(grid[1][1], [[3.0]])
    np.testing.assert_allclose(grid[0][1], np.zeros((2, 1)))


def test_block_round_trip_exact():
    rng = philox(21)
    m = ginibre(rng, 4)
    assert np.array_equal(block_compose(block_split(m, 3)), m)


def test_block_compose_rejects_non_conformable():
    with pytest.raises(DimensionError):
        block_compose([[np.eye(2), np.zeros((1, 1))], [np.zeros((1, 2)), np.eye(1)]])


def test_matrix_json_round_trip():
    rng = philox(33)
    m = ginibre(rng, 3, 2)
    payload = matrix_to_json(m)
    assert payload["rows"] == 3 and payload["cols"] == 2
    text = json.dumps(payload)
    np.testing.assert_array_equal(matrix_from_json(json.loads(text)), m)


@pytest.mark.parametrize(
    "payload",
    [
        {"rows": 2, "cols": 2, "data": [[[1, 0], [0, 0]], [[0, 0]]]},
        {"rows": 2, "cols": 1, "data": [[[1, 0]], [[float("nan"), 0]]]},
        {"rows": 1, "cols": 1, "data": [[[1]]]},
        {"rows": 1, "cols": 1},
        {"rows": "1", "cols": 1, "data": [[[1, 0]]]},
        [[1, 0]],
    ],
)
def test_matrix_json_rejects_malformed(payload):
    with pytest.raises(MatrixFormatError):
        matrix_from_json(payload)
