import numpy as np
import pytest

from numerics.linalg import sym_eig
from utils.errors import ConvergenceError, DimensionError


def random_symmetric(rng, n):
    a = rng.standard_normal((n, n))
    return (a + a.T) / 2


def test_diagonal_matrix_sorted_with_axis_vectors():
    values, vectors = sym_eig(np.diag([3.0, 1.0, 2.0]))
    np.testing.assert_allclose(values, [3.0, 2.0, 1.0], atol=1e-12)
    np.testing.assert_allclose(vectors, np.eye(3)[:, [0, 2, 1]], atol=1e-12)


@pytest.mark.parametrize("n", [1, 2, 5, 8, 16])
def test_residual_orthonormality_and_reconstruction(rng, n):
    a = random_symmetric(rng, n)
    values, vectors = sym_eig(a)
    for i in range(n):
        np.testing.assert_allclose(a @ vectors[:, i], values[i] * vectors[:, i], atol=1e-8)
    np.testing.assert_allclose(vectors.T @ vectors, np.eye(n), atol=1e-8)
    np.testing.assert_allclose(vectors @ np.diag(values) @ vectors.T, a, atol=1e-8)
    assert abs(values.sum() - np.trace(a)) <= 1e-8
    assert np.all(np.diff(values) <= 0)


def test_sign_convention_makes_largest_entry_positive(rng):
    _, vectors = sym_eig(random_symmetric(rng, 6))
    for i in range(6):
        column = vectors[:, i]
        assert column[np.argmax(np.abs(column))] > 0


def test_results_are_bit_identical_across_calls(rng):
    a = random_symmetric(rng, 7)
    first = sym_eig(a)
    second = sym_eig(a.copy())
    np.testing.assert_array_equal(first[0], second[0])
    np.testing.assert_array_equal(first[1], second[1])


def test_slightly_asymmetric_input_is_symmetrized(rng):
    a = random_symmetric(rng, 4)
    nudged = a.copy()
    nudged[0, 1] += 1e-10
    np.testing.assert_allclose(sym_eig(nudged)[0], sym_eig(a)[0], atol=1e-9)


def test_non_square_input_rejected():
    with pytest.raises(DimensionError):
        sym_eig(np.ones((2, 3)))


def test_exhausted_sweep_budget_raises(rng):
    with pytest.raises(ConvergenceError):
        sym_eig(random_symmetric(rng, 6), max_sweeps=1)
