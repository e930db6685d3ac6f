"""Alternating least squares for A ~ B C with B >= 0 and C binary.

Each iteration first re-solves B against the current C (nonnegative least squares) and
then re-solves every column of C as an independent QUBO. The first
`forward_warmup_iterations` iterations use forward annealing (global search, best sample
wins outright); later iterations reverse-anneal from the current column, which is kept
whenever no sample beats it.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple
import logging
import math
import os

import numpy as np

from models import (BinaryMatrix, DegenerateMatrixError, DenseMatrix, DimensionMismatchError,
                    frobenius_norm, percent_change_b, percent_change_c, relative_residual)
from services.cost_model import CostModel, access_time, default_forward_cost, default_reverse_cost
from solvers.annealer import SamplerConfig, exact_solve, forward_sample, reverse_sample, stream_rng
from solvers.nnls import NnlsConfig, solve_nonnegative
from solvers.qubo import build_column_qubo, residual_energy

logger = logging.getLogger(__name__)

INIT_STREAM = 0


class UpdateMode(str, Enum):
    FORWARD = 'forward'
    REVERSE = 'reverse'
    EXACT = 'exact'


@dataclass(frozen=True)
class DriverConfig:
    k: int
    total_iterations: int = 10
    forward_warmup_iterations: int = 1
    r: float = 0.45
    t_r: float = 10.0
    forward_samples_per_qubo: int = 1000
    reverse_samples_per_qubo: int = 240
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    nnls: NnlsConfig = field(default_factory=NnlsConfig)
    master_seed: int = 0
    init_density: float = 0.5
    threads: int = 1
    forward_cost: CostModel = field(default_factory=default_forward_cost)
    reverse_cost: CostModel = field(default_factory=default_reverse_cost)

    def __post_init__(self):
        problems = []
        if self.k < 1:
            problems.append(f"k must be at least 1, got {self.k}")
        if self.total_iterations < 0:
            problems.append(f"total_iterations must be nonnegative, got {self.total_iterations}")
        if not 0 <= self.forward_warmup_iterations <= self.total_iterations:
            problems.append(
                f"forward_warmup_iterations must be within [0, {self.total_iterations}], "
                f"got {self.forward_warmup_iterations}"
            )
        if not 0 <= self.r <= 1:
            problems.append(f"r must be within [0, 1], got {self.r}")
        if self.t_r <= 0:
            problems.append(f"t_r must be positive, got {self.t_r}")
        if self.forward_samples_per_qubo < 1 or self.reverse_samples_per_qubo < 1:
            problems.append("samples per QUBO must be at least 1")
        if not 0 < self.init_density <= 1:
            problems.append(f"init_density must be within (0, 1], got {self.init_density}")
        if self.master_seed < 0:
            problems.append(f"master_seed must be nonnegative, got {self.master_seed}")
        if self.threads < 0:
            problems.append(f"threads must be nonnegative, got {self.threads}")
        if problems:
            raise ValueError("; ".join(problems))

    def mode_for(self, iteration: int) -> UpdateMode:
        return UpdateMode.FORWARD if iteration <= self.forward_warmup_iterations else UpdateMode.REVERSE

    def sampler_for(self, mode: UpdateMode) -> SamplerConfig:
        samples = self.forward_samples_per_qubo if mode == UpdateMode.FORWARD else self.reverse_samples_per_qubo
        return SamplerConfig(samples, self.sampler.sweeps_per_microsecond, self.master_seed,
                             self.sampler.hot_temperature_scale)

    def qpu_time_per_column(self, mode: UpdateMode) -> int:
        if mode == UpdateMode.FORWARD:
            return access_time(self.forward_cost, self.forward_samples_per_qubo)
        if mode == UpdateMode.REVERSE:
            return access_time(self.reverse_cost, self.reverse_samples_per_qubo)
        return 0

    @property
    def worker_count(self) -> int:
        return self.threads if self.threads > 0 else (os.cpu_count() or 1)

    def to_dict(self) -> Dict:
        return {
            'k': self.k,
            'total_iterations': self.total_iterations,
            'forward_warmup_iterations': self.forward_warmup_iterations,
            'r': self.r,
            't_r': self.t_r,
            'forward_samples_per_qubo': self.forward_samples_per_qubo,
            'reverse_samples_per_qubo': self.reverse_samples_per_qubo,
            'sampler': self.sampler.to_dict(),
            'nnls': self.nnls.to_dict(),
            'master_seed': self.master_seed,
            'init_density': self.init_density,
            'forward_cost': self.forward_cost.to_dict(),
            'reverse_cost': self.reverse_cost.to_dict(),
        }


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    mode: str
    relative_residual: float
    squared_residual: float
    pct_change_b: float
    pct_change_c: float
    cumulative_qpu_time_us: int
    nnls_converged: bool = True

    def to_dict(self) -> Dict:
        return {
            'iteration': self.iteration,
            'mode': self.mode,
            'relative_residual': self.relative_residual,
            'squared_residual': self.squared_residual,
            'pct_change_b': self.pct_change_b,
            'pct_change_c': self.pct_change_c,
            'cumulative_qpu_time_us': self.cumulative_qpu_time_us,
            'nnls_converged': self.nnls_converged,
        }


@dataclass(frozen=True)
class ColumnMove:
    column: int
    energy_before: float
    energy_after: float
    flipped: int


@dataclass(frozen=True)
class FactorizationState:
    iteration: int
    B: DenseMatrix
    C: BinaryMatrix
    relative_residual: float
    history: Tuple[IterationRecord, ...] = ()
    column_moves: Tuple[ColumnMove, ...] = ()
    nnls_converged: bool = True

    @property
    def cumulative_qpu_time_us(self) -> int:
        return self.history[-1].cumulative_qpu_time_us if self.history else 0


def _check_shapes(state: FactorizationState, A: DenseMatrix):
    if state.B.shape != (A.rows, state.C.rows) or state.C.cols != A.cols:
        raise DimensionMismatchError(
            f"state B {state.B.shape} / C {state.C.shape} does not fit A {A.shape}"
        )


def init_state(A: DenseMatrix, cfg: DriverConfig) -> FactorizationState:
    """Random Bernoulli(init_density) C, then one nonnegative solve for B."""
    if frobenius_norm(A) == 0.0:
        raise DegenerateMatrixError("cannot factor an all-zero matrix")
    rng = stream_rng(cfg.master_seed, (INIT_STREAM,))
    C = BinaryMatrix(rng.random((cfg.k, A.cols)) < cfg.init_density)
    solved = solve_nonnegative(A, C, cfg.nnls)
    return FactorizationState(0, solved.B, C, relative_residual(A, solved.B, C),
                              nnls_converged=solved.converged)


def update_b(state: FactorizationState, A: DenseMatrix, cfg: DriverConfig) -> FactorizationState:
    _check_shapes(state, A)
    solved = solve_nonnegative(A, state.C, cfg.nnls, initial=state.B)
    return replace(state, B=solved.B, relative_residual=relative_residual(A, solved.B, state.C),
                   nnls_converged=solved.converged)


def _solve_column(j: int, state: FactorizationState, A: DenseMatrix, cfg: DriverConfig,
                  mode: UpdateMode, iteration: int) -> Tuple[np.ndarray, ColumnMove]:
    qubo = build_column_qubo(state.B, A.values[:, j])
    current = state.C.bits[:, j]
    if mode == UpdateMode.EXACT:
        chosen, _ = exact_solve(qubo)
    elif mode == UpdateMode.FORWARD:
        chosen = forward_sample(qubo, cfg.sampler_for(mode), stream=(iteration, j)).best_state
    else:
        chosen = reverse_sample(qubo, current, cfg.r, cfg.t_r, cfg.sampler_for(mode),
                                stream=(iteration, j)).best_state
    move = ColumnMove(j, residual_energy(qubo, current), residual_energy(qubo, chosen),
                      int(np.count_nonzero(chosen != current)))
    return chosen, move


def update_c(state: FactorizationState, A: DenseMatrix, cfg: DriverConfig,
             mode: UpdateMode, iteration: Optional[int] = None) -> FactorizationState:
    """Re-solve every column of C; `iteration` selects the per-column random streams."""
    _check_shapes(state, A)
    iteration = state.iteration + 1 if iteration is None else iteration
    mode = UpdateMode(mode)
    columns = range(A.cols)

    def solve(j):
        return _solve_column(j, state, A, cfg, mode, iteration)

    if cfg.worker_count > 1 and A.cols > 1:
        with ThreadPoolExecutor(max_workers=cfg.worker_count) as pool:
            results = list(pool.map(solve, columns))
    else:
        results = [solve(j) for j in columns]

    bits = np.column_stack([chosen for chosen, _ in results]).astype(np.uint8)
    C = BinaryMatrix(bits)
    return replace(state, C=C, relative_residual=relative_residual(A, state.B, C),
                   column_moves=tuple(move for _, move in results))


def _safe_percent_change_b(B_prev: DenseMatrix, B_next: DenseMatrix) -> float:
    try:
        return percent_change_b(B_prev, B_next)
    except DegenerateMatrixError:
        logger.warning("⚠️ previous B is all zeros; % change in B is undefined for this iteration")
        return math.nan


def run(A: DenseMatrix, cfg: DriverConfig, resume_from: Optional[FactorizationState] = None,
        on_iteration: Optional[Callable[[FactorizationState], None]] = None) -> FactorizationState:
    """Full factorization: init (or resume), then update_b and update_c per iteration.

    `on_iteration` sees every finished iteration; pass `checkpoint_writer` to persist them.
    """
    state = resume_from if resume_from is not None else init_state(A, cfg)
    _check_shapes(state, A)
    if state.iteration:
        logger.info(f"🔄 Resuming factorization at iteration {state.iteration + 1}")

    for iteration in range(state.iteration + 1, cfg.total_iterations + 1):
        mode = cfg.mode_for(iteration)
        previous = state
        state = update_b(state, A, cfg)
        state = update_c(state, A, cfg, mode, iteration)

        spent = previous.cumulative_qpu_time_us + A.cols * cfg.qpu_time_per_column(mode)
        record = IterationRecord(
            iteration=iteration,
            mode=mode.value,
            relative_residual=state.relative_residual,
            squared_residual=frobenius_norm(A.values - state.B.values @ state.C.as_float()) ** 2,
            pct_change_b=_safe_percent_change_b(previous.B, state.B),
            pct_change_c=percent_change_c(previous.C, state.C),
            cumulative_qpu_time_us=spent,
            nnls_converged=state.nnls_converged,
        )
        state = replace(state, iteration=iteration, history=state.history + (record,))
        logger.info(
            f"iteration {iteration}/{cfg.total_iterations} [{mode.value}] "
            f"residual={record.relative_residual:.6f} dC={record.pct_change_c:.4f} "
            f"qpu={record.cumulative_qpu_time_us}us"
        )
        if on_iteration is not None:
            on_iteration(state)

    return state


def history_rows(state: FactorizationState) -> List[Dict]:
    return [record.to_dict() for record in state.history]
