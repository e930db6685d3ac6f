import math

import numpy as np
import pytest

from models import (BinaryMatrix, ConfigValidationError, DegenerateMatrixError, DenseMatrix,
                    DimensionMismatchError, MatrixFormatError, frobenius_norm, hamming_distance,
                    percent_change_b, percent_change_c, relative_residual)


def test_frobenius_norm_examples():
    assert frobenius_norm(DenseMatrix(np.eye(2))) == pytest.approx(math.sqrt(2))
    assert frobenius_norm(DenseMatrix(np.zeros((3, 3)))) == 0.0
    assert frobenius_norm(DenseMatrix.from_rows([[3, 4]])) == 5.0


def test_frobenius_norm_is_absolutely_homogeneous():
    M = np.random.default_rng(1).standard_normal((4, 5))
    assert frobenius_norm(-3.0 * M) == pytest.approx(3.0 * frobenius_norm(M))


def test_relative_residual_examples():
    B = DenseMatrix.from_rows([[1.0, 2.0], [0.5, 0.0], [1.0, 1.0]])
    C = BinaryMatrix.from_rows([[1, 0, 1], [0, 1, 1]])
    A = DenseMatrix(B.values @ C.as_float())
    assert relative_residual(A, B, C) == 0.0
    assert relative_residual(A, DenseMatrix(np.zeros((3, 2))), C) == pytest.approx(1.0)

    A = DenseMatrix(np.eye(2))
    assert relative_residual(A, DenseMatrix.from_rows([[1], [0]]), BinaryMatrix.from_rows([[1, 1]])) == pytest.approx(1.0)


def test_relative_residual_invariant_under_row_permutation():
    rng = np.random.default_rng(3)
    A, B = DenseMatrix(rng.random((5, 4))), DenseMatrix(rng.random((5, 2)))
    C = BinaryMatrix(rng.integers(0, 2, (2, 4)))
    order = rng.permutation(5)
    permuted = relative_residual(DenseMatrix(A.values[order]), DenseMatrix(B.values[order]), C)
    assert permuted == pytest.approx(relative_residual(A, B, C))


def test_relative_residual_errors():
    C = BinaryMatrix.from_rows([[1, 1]])
    with pytest.raises(DimensionMismatchError):
        relative_residual(DenseMatrix(np.ones((2, 3))), DenseMatrix(np.ones((2, 1))), C)
    with pytest.raises(DegenerateMatrixError):
        relative_residual(DenseMatrix(np.zeros((2, 2))), DenseMatrix(np.ones((2, 1))), C)


def test_percent_change_b_examples():
    eye = DenseMatrix(np.eye(2))
    assert percent_change_b(eye, eye) == 0.0
    assert percent_change_b(eye, DenseMatrix(2 * np.eye(2))) == pytest.approx(1.0)
    assert percent_change_b(eye, DenseMatrix(np.zeros((2, 2)))) == pytest.approx(1.0)
    with pytest.raises(DegenerateMatrixError):
        percent_change_b(DenseMatrix(np.zeros((2, 2))), eye)
    with pytest.raises(DimensionMismatchError):
        percent_change_b(eye, DenseMatrix(np.eye(3)))


def test_percent_change_c_examples():
    C = BinaryMatrix.from_rows([[1, 0], [0, 1]])
    assert percent_change_c(C, C) == 0.0
    assert percent_change_c(C, BinaryMatrix(1 - C.bits)) == 1.0

    before = BinaryMatrix(np.zeros((3, 4), dtype=np.uint8))
    after = before.with_column(0, np.array([1, 1, 0])).with_column(2, np.array([0, 0, 1]))
    assert hamming_distance(before, after) == 3
    assert percent_change_c(before, after) == 0.25


def test_percent_change_c_is_symmetric():
    rng = np.random.default_rng(5)
    X, Y = BinaryMatrix(rng.integers(0, 2, (4, 6))), BinaryMatrix(rng.integers(0, 2, (4, 6)))
    assert percent_change_c(X, Y) == percent_change_c(Y, X)


def test_matrices_are_immutable_and_validated():
    M = DenseMatrix.from_rows([[1, 2], [3, 4]])
    with pytest.raises(ValueError):
        M.values[0, 0] = 5.0
    with pytest.raises(ValueError):
        BinaryMatrix.from_rows([[0, 2]])
    with pytest.raises(DimensionMismatchError):
        DenseMatrix.from_flat(2, 3, [1, 2, 3])
    assert DenseMatrix.from_flat(2, 2, M.flat()) == M


def test_error_messages_carry_context():
    error = MatrixFormatError('data/a.csv', 'not a number', location='line 3')
    assert 'data/a.csv' in str(error) and 'line 3' in str(error)

    error = ConfigValidationError({'factorize.r': ['too big'], 'run.seed': ['negative']})
    assert 'factorize.r' in str(error) and 'run.seed' in str(error)
