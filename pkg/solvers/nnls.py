"""Nonnegative least squares update for B: argmin_{X >= 0} ||A - X C||^2 + ridge ||X||^2.

Rows of X decouple and share the Gram matrix C C^T, so every row is iterated against the
same Gram matrix in one matrix-shaped projected gradient step of size 1/L,
L = 2 * lambda_max(C C^T) + 2 * ridge.
"""
from dataclasses import dataclass
from typing import Optional
import logging
import math

import numpy as np

from models import BinaryMatrix, DenseMatrix, DimensionMismatchError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NnlsConfig:
    max_iterations: int = 5000
    tolerance: float = 1e-8
    ridge: float = 0.0
    accelerated: bool = False
    power_iterations: int = 50

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be at least 1, got {self.max_iterations}")
        if self.tolerance <= 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if self.ridge < 0:
            raise ValueError(f"ridge must be nonnegative, got {self.ridge}")

    def to_dict(self):
        return {
            'max_iterations': self.max_iterations,
            'tolerance': self.tolerance,
            'ridge': self.ridge,
            'accelerated': self.accelerated,
        }


@dataclass(frozen=True, eq=False)
class NnlsResult:
    B: DenseMatrix
    converged: bool
    iterations: int
    projected_gradient: float
    objective: float


def lipschitz_constant(gram: np.ndarray, ridge: float, steps: int = 50) -> float:
    """2 * largest eigenvalue of the Gram matrix (power iteration) + 2 * ridge."""
    k = gram.shape[0]
    vector = np.full(k, 1.0 / math.sqrt(k))
    for _ in range(steps):
        image = gram @ vector
        norm = float(np.linalg.norm(image))
        if norm == 0.0:
            return 2.0 * ridge
        vector = image / norm
    return 2.0 * float(vector @ gram @ vector) + 2.0 * ridge


def projected_gradient(X: np.ndarray, gradient: np.ndarray) -> np.ndarray:
    return np.where(X > 0, gradient, np.minimum(gradient, 0.0))


def _objective(A: np.ndarray, X: np.ndarray, C: np.ndarray, ridge: float) -> float:
    residual = A - X @ C
    return float(np.sum(residual * residual) + ridge * np.sum(X * X))


def solve_nonnegative(A: DenseMatrix, C: BinaryMatrix, cfg: NnlsConfig = NnlsConfig(),
                      initial: Optional[DenseMatrix] = None) -> NnlsResult:
    if C.cols != A.cols:
        raise DimensionMismatchError(f"A has {A.cols} columns but C has {C.cols}")
    if initial is not None and initial.shape != (A.rows, C.rows):
        raise DimensionMismatchError(f"warm start has shape {initial.shape}, expected {(A.rows, C.rows)}")

    target = A.values
    factor = C.as_float()
    gram = factor @ factor.T
    cross = target @ factor.T
    # all-zero rows of C leave their column of X without any data term; pin those at 0
    inactive = np.diag(gram) == 0

    X = np.zeros((A.rows, C.rows)) if initial is None else np.maximum(initial.values, 0.0)
    X[:, inactive] = 0.0

    def gradient(point):
        return 2.0 * (point @ gram - cross) + 2.0 * cfg.ridge * point

    lipschitz = lipschitz_constant(gram, cfg.ridge, cfg.power_iterations)
    if lipschitz == 0.0:
        return NnlsResult(DenseMatrix(X), True, 0, 0.0, _objective(target, X, factor, cfg.ridge))
    step = 1.0 / lipschitz

    momentum_point, momentum = X.copy(), 1.0
    best_X, best_objective = X.copy(), _objective(target, X, factor, cfg.ridge)
    pg_norm = math.inf
    iteration = 0
    converged = False
    for iteration in range(1, cfg.max_iterations + 1):
        grad = gradient(X)
        pg_norm = float(np.max(np.abs(projected_gradient(X, grad))))
        if pg_norm <= cfg.tolerance:
            converged = True
            break
        if cfg.accelerated:
            X_next = np.maximum(momentum_point - step * gradient(momentum_point), 0.0)
            next_momentum = (1.0 + math.sqrt(1.0 + 4.0 * momentum * momentum)) / 2.0
            momentum_point = X_next + ((momentum - 1.0) / next_momentum) * (X_next - X)
            momentum = next_momentum
            X = X_next
            objective = _objective(target, X, factor, cfg.ridge)
            if objective < best_objective:
                best_X, best_objective = X.copy(), objective
        else:
            X = np.maximum(X - step * grad, 0.0)

    if cfg.accelerated and not converged:
        X = best_X
    objective = _objective(target, X, factor, cfg.ridge)
    if not converged:
        logger.warning(
            f"⚠️ NNLS stopped after {cfg.max_iterations} iterations with projected gradient {pg_norm:.3e}"
        )
    return NnlsResult(DenseMatrix(X), converged, iteration, pg_norm, objective)
