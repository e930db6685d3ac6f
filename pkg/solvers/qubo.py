"""Per-column binary least squares as a QUBO.

For a column a of A and the current basis B, minimizing ||a - B q||^2 over binary q
expands to

    f(q) = sum_j a_j q_j + sum_{j<k} b_jk q_j q_k   (+ ||a||^2)

with a_j = sum_l B_lj (B_lj - 2 a_l) and b_jk = 2 sum_l B_lj B_lk.
"""
from dataclasses import dataclass
from typing import Dict, Sequence, Union

import numpy as np

from models import DenseMatrix, DimensionMismatchError

BinaryVector = np.ndarray


@dataclass(frozen=True, eq=False)
class Qubo:
    """Linear terms, strictly-upper-triangular couplings (row-major over i<j) and the
    constant ||A_j||^2 that turns energies into squared residuals."""

    linear: np.ndarray
    quadratic: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        linear = np.array(self.linear, dtype=np.float64).ravel()
        quadratic = np.array(self.quadratic, dtype=np.float64).ravel()
        k = linear.size
        if k < 1:
            raise ValueError("a QUBO needs at least one variable")
        if quadratic.size != k * (k - 1) // 2:
            raise DimensionMismatchError(
                f"{k} variables need {k * (k - 1) // 2} couplings, got {quadratic.size}"
            )
        if self.offset < 0:
            raise ValueError(f"offset must be nonnegative, got {self.offset}")
        linear.setflags(write=False)
        quadratic.setflags(write=False)
        object.__setattr__(self, 'linear', linear)
        object.__setattr__(self, 'quadratic', quadratic)
        object.__setattr__(self, 'offset', float(self.offset))

    @property
    def k(self) -> int:
        return self.linear.size

    def upper(self) -> np.ndarray:
        """k x k matrix holding b_ij above the diagonal and zeros elsewhere."""
        matrix = np.zeros((self.k, self.k))
        matrix[np.triu_indices(self.k, 1)] = self.quadratic
        return matrix

    def couplings(self) -> np.ndarray:
        """Symmetric coupling matrix W with W_ij = W_ji = b_ij and a zero diagonal."""
        upper = self.upper()
        return upper + upper.T

    def coupling(self, i: int, j: int) -> float:
        if i == j:
            raise ValueError("no self-coupling in a QUBO")
        i, j = min(i, j), max(i, j)
        index = i * self.k - i * (i + 1) // 2 + (j - i - 1)
        return float(self.quadratic[index])

    def max_abs_coefficient(self) -> float:
        largest = float(np.max(np.abs(self.linear)))
        if self.quadratic.size:
            largest = max(largest, float(np.max(np.abs(self.quadratic))))
        return largest

    def to_dict(self) -> Dict:
        return {
            'k': self.k,
            'linear': self.linear.tolist(),
            'quadratic': self.quadratic.tolist(),
            'offset': self.offset,
        }

    @classmethod
    def from_dict(cls, payload: Dict) -> 'Qubo':
        qubo = cls(payload['linear'], payload['quadratic'], payload.get('offset', 0.0))
        if 'k' in payload and int(payload['k']) != qubo.k:
            raise DimensionMismatchError(f"declared k={payload['k']} but found {qubo.k} linear terms")
        return qubo


def as_binary_vector(q: Union[Sequence[int], np.ndarray], k: int) -> BinaryVector:
    vector = np.asarray(q).ravel()
    if vector.size != k:
        raise DimensionMismatchError(f"state has {vector.size} entries, QUBO has {k} variables")
    if not np.isin(vector, (0, 1)).all():
        raise ValueError("state entries must be 0 or 1")
    return vector.astype(np.uint8)


def build_column_qubo(B: DenseMatrix, a_col: Union[Sequence[float], np.ndarray]) -> Qubo:
    target = np.asarray(a_col, dtype=np.float64).ravel()
    if target.size != B.rows:
        raise DimensionMismatchError(f"column has {target.size} entries, B has {B.rows} rows")
    basis = B.values
    gram = basis.T @ basis
    linear = np.diag(gram) - 2.0 * (basis.T @ target)
    quadratic = 2.0 * gram[np.triu_indices(B.cols, 1)]
    return Qubo(linear, quadratic, float(target @ target))


def energies(Q: Qubo, states: np.ndarray) -> np.ndarray:
    """Vectorized f(q) for an (S, k) array of states."""
    states = np.atleast_2d(np.asarray(states, dtype=np.float64))
    if states.shape[1] != Q.k:
        raise DimensionMismatchError(f"states have {states.shape[1]} entries, QUBO has {Q.k} variables")
    # einsum keeps each row's summation order independent of the batch size
    return np.einsum('si,i->s', states, Q.linear) + np.einsum('si,ij,sj->s', states, Q.upper(), states)


def energy(Q: Qubo, q: Union[Sequence[int], np.ndarray]) -> float:
    return float(energies(Q, as_binary_vector(q, Q.k))[0])


def residual_energy(Q: Qubo, q: Union[Sequence[int], np.ndarray]) -> float:
    """energy + offset, i.e. ||A_j - B q||^2."""
    return energy(Q, q) + Q.offset
