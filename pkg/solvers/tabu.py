from dataclasses import dataclass
from typing import Optional
import logging
import time

import numpy as np

from solvers.qubo import BinaryVector, Qubo, as_binary_vector, energy

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TabuResult:
    best_state: BinaryVector
    best_energy: float
    time_to_target_us: Optional[float]
    iterations: int
    elapsed_us: float

    @property
    def reached(self) -> bool:
        return self.time_to_target_us is not None


def tabu_tenure(k: int) -> int:
    return max(7, k // 4)


def tabu_solve(Q: Qubo, initial, target_energy: float, max_time_us: float,
               stop_at_target: bool = True, seed: int = 0,
               max_iterations: Optional[int] = None) -> TabuResult:
    """Single-bit-flip tabu search warm-started from `initial`.

    The time to target is the monotonic-clock time at which the incumbent first reaches
    `target_energy` (0 when the initial state already does). A timeout is a normal return
    with time_to_target_us = None.
    """
    if max_time_us <= 0:
        raise ValueError(f"max_time_us must be positive, got {max_time_us}")
    started = time.perf_counter_ns()
    deadline = started + int(max_time_us * 1000)

    x = as_binary_vector(initial, Q.k).astype(np.float64)
    couplings = Q.couplings()
    fields = Q.linear + couplings @ x
    current = energy(Q, x.astype(np.uint8))
    best_state, best_energy = x.copy(), current

    time_to_target = 0.0 if best_energy <= target_energy else None
    if time_to_target is not None and stop_at_target:
        return TabuResult(best_state.astype(np.uint8), best_energy, 0.0, 0, 0.0)

    rng = np.random.default_rng(seed)
    tenure = tabu_tenure(Q.k)
    stall_limit = 20 * Q.k
    tabu_until = np.zeros(Q.k, dtype=np.int64)
    iteration, stalled, restarts = 0, 0, 0

    while time.perf_counter_ns() < deadline:
        if max_iterations is not None and iteration >= max_iterations:
            break
        iteration += 1

        deltas = np.where(x == 0, fields, -fields)
        allowed = (tabu_until < iteration) | (current + deltas < best_energy)
        if allowed.any():
            scored = np.where(allowed, deltas, np.inf)
            candidates = np.flatnonzero(scored == scored.min())
            v = int(rng.choice(candidates)) if candidates.size > 1 else int(candidates[0])
        else:
            v = int(np.argmin(tabu_until))

        step = 1.0 - 2.0 * x[v]
        x[v] += step
        fields += couplings[:, v] * step
        current += deltas[v]
        tabu_until[v] = iteration + tenure

        if current < best_energy:
            # resync on every new incumbent so target comparisons see exact energies
            current = energy(Q, x.astype(np.uint8))
            fields = Q.linear + couplings @ x
            if current < best_energy:
                best_state, best_energy = x.copy(), current
                stalled = 0
                if time_to_target is None and best_energy <= target_energy:
                    time_to_target = (time.perf_counter_ns() - started) / 1000.0
                    logger.debug(f"tabu reached target {target_energy} after {iteration} iterations")
                    if stop_at_target:
                        break
                continue

        stalled += 1
        if stalled >= stall_limit:
            # alternate kicks around the incumbent with uniformly random restarts
            restarts += 1
            if restarts % 2:
                x = best_state.copy()
                kick = rng.choice(Q.k, size=max(1, Q.k // 3), replace=False)
                x[kick] = 1.0 - x[kick]
            else:
                x = rng.integers(0, 2, Q.k).astype(np.float64)
            fields = Q.linear + couplings @ x
            current = energy(Q, x.astype(np.uint8))
            tabu_until[:] = 0
            stalled = 0
            if current < best_energy:
                best_state, best_energy = x.copy(), current
                if time_to_target is None and best_energy <= target_energy:
                    time_to_target = (time.perf_counter_ns() - started) / 1000.0
                    if stop_at_target:
                        break

    elapsed = (time.perf_counter_ns() - started) / 1000.0
    return TabuResult(best_state.astype(np.uint8), best_energy, time_to_target, iteration, elapsed)
