import itertools

import numpy as np
import pytest

from models import DenseMatrix, DimensionMismatchError
from solvers.annealer import exact_solve
from solvers.qubo import Qubo, build_column_qubo, energies, energy, residual_energy


def _all_states(k):
    return np.array(list(itertools.product((0, 1), repeat=k)), dtype=np.uint8)


def test_identity_basis_zero_target():
    Q = build_column_qubo(DenseMatrix(np.eye(2)), [0.0, 0.0])
    np.testing.assert_array_equal(Q.linear, [1.0, 1.0])
    np.testing.assert_array_equal(Q.quadratic, [0.0])
    assert Q.offset == 0.0


def test_small_column_qubo_matches_direct_residual(small_qubo):
    B = DenseMatrix.from_rows([[1, 0], [0, 1], [1, 1]])
    a_col = np.array([1.0, 0.0, 1.0])
    Q = build_column_qubo(B, a_col)
    np.testing.assert_allclose(Q.linear, small_qubo.linear)
    np.testing.assert_allclose(Q.quadratic, small_qubo.quadratic)
    assert Q.offset == 2.0

    for q in _all_states(2):
        direct = float(np.sum((a_col - B.values @ q) ** 2))
        assert residual_energy(Q, q) == pytest.approx(direct, abs=1e-12)
    assert energy(Q, [1, 0]) == -2.0
    assert residual_energy(Q, [1, 0]) == pytest.approx(0.0, abs=1e-9)


def test_energy_examples(small_qubo):
    assert energy(small_qubo, [0, 0]) == 0.0
    assert energy(small_qubo, [1, 1]) == 0.0
    assert energy(Qubo([1.0, 1.0], [0.0]), [0, 1]) == 1.0
    assert residual_energy(small_qubo, [0, 0]) == small_qubo.offset


def test_upper_layout_and_coupling_lookup():
    Q = Qubo([0.0, 0.0, 0.0, 0.0], [1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
    assert Q.coupling(0, 1) == 1.0
    assert Q.coupling(0, 3) == 3.0
    assert Q.coupling(2, 1) == 4.0
    assert Q.coupling(2, 3) == 6.0
    np.testing.assert_array_equal(Q.couplings(), Q.couplings().T)


def test_qubo_validation():
    with pytest.raises(DimensionMismatchError):
        Qubo([1.0, 2.0, 3.0], [1.0])
    with pytest.raises(DimensionMismatchError):
        energy(Qubo([1.0, 2.0], [0.0]), [1, 0, 1])
    with pytest.raises(ValueError):
        energy(Qubo([1.0, 2.0], [0.0]), [1, 2])


def test_batched_energies_agree_with_single_states(random_qubo):
    Q = random_qubo(k=7, seed=4)
    states = _all_states(7)
    batch = energies(Q, states)
    for index in (0, 17, 64, 127):
        assert batch[index] == pytest.approx(energy(Q, states[index]), abs=1e-12)


def test_qubo_dict_round_trip(random_qubo):
    Q = random_qubo(k=5)
    restored = Qubo.from_dict(Q.to_dict())
    np.testing.assert_array_equal(restored.linear, Q.linear)
    np.testing.assert_array_equal(restored.quadratic, Q.quadratic)
    assert restored.offset == Q.offset


def test_column_qubo_argmin_matches_brute_force_least_squares():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        n, k = int(rng.integers(1, 11)), int(rng.integers(1, 13))
        B = DenseMatrix(np.abs(rng.standard_normal((n, k))))
        a_col = np.abs(rng.standard_normal(n)) * rng.uniform(0.5, 3.0)
        Q = build_column_qubo(B, a_col)

        states = _all_states(k)
        direct = np.sum((a_col[np.newaxis, :] - states @ B.values.T) ** 2, axis=1)
        np.testing.assert_allclose(energies(Q, states) + Q.offset, direct, rtol=0, atol=1e-9)

        state, best = exact_solve(Q)
        index = int(state.astype(np.int64) @ (1 << np.arange(k - 1, -1, -1)))
        assert direct[index] == pytest.approx(direct.min(), abs=1e-9)
        assert best + Q.offset == pytest.approx(direct.min(), abs=1e-9)
        gap = np.sort(direct)[1] - direct.min() if direct.size > 1 else np.inf
        if gap > 1e-9:
            assert index == int(np.argmin(direct))
