"""Classical simulation of forward and reverse annealing on a QUBO.

The anneal parameter s is mapped onto a Metropolis temperature T(s) = T_hot * (1 - s),
with T_hot = hot_temperature_scale * (largest |coefficient| of the QUBO). A schedule of
D microseconds runs D * sweeps_per_microsecond sweeps; a sweep proposes every variable
once in random order. At T = 0 only strictly downhill flips are accepted.
"""
from dataclasses import dataclass
from typing import List, NamedTuple, Sequence, Tuple
import logging
import math

import numba
import numpy as np

from models import DimensionMismatchError
from solvers.qubo import BinaryVector, Qubo, as_binary_vector, energies, energy
from solvers.schedules import AnnealSchedule, forward_schedule, reverse_schedule, temperatures

logger = logging.getLogger(__name__)

EXACT_SOLVE_MAX_K = 25
_ENUMERATION_CHUNK_BITS = 16


@dataclass(frozen=True)
class SamplerConfig:
    num_samples: int = 100
    sweeps_per_microsecond: int = 10
    seed: int = 0
    hot_temperature_scale: float = 1.0

    def __post_init__(self):
        if self.num_samples < 1:
            raise ValueError(f"num_samples must be at least 1, got {self.num_samples}")
        if self.sweeps_per_microsecond < 1:
            raise ValueError(f"sweeps_per_microsecond must be at least 1, got {self.sweeps_per_microsecond}")
        if self.seed < 0:
            raise ValueError(f"seed must be nonnegative, got {self.seed}")
        if self.hot_temperature_scale <= 0:
            raise ValueError(f"hot_temperature_scale must be positive, got {self.hot_temperature_scale}")

    def with_samples(self, num_samples: int) -> 'SamplerConfig':
        return SamplerConfig(num_samples, self.sweeps_per_microsecond, self.seed, self.hot_temperature_scale)

    def to_dict(self):
        return {
            'num_samples': self.num_samples,
            'sweeps_per_microsecond': self.sweeps_per_microsecond,
            'seed': self.seed,
            'hot_temperature_scale': self.hot_temperature_scale,
        }


@dataclass(frozen=True, eq=False)
class SampleSet:
    states: np.ndarray
    energies: np.ndarray
    best_state: BinaryVector
    best_energy: float

    def __len__(self):
        return len(self.energies)

    @property
    def samples(self) -> List[Tuple[BinaryVector, float]]:
        return [(state, float(e)) for state, e in zip(self.states, self.energies)]

    def __eq__(self, other):
        if not isinstance(other, SampleSet):
            return NotImplemented
        return (
            np.array_equal(self.states, other.states)
            and np.array_equal(self.energies, other.energies)
            and np.array_equal(self.best_state, other.best_state)
            and self.best_energy == other.best_energy
        )


class CategoryFractions(NamedTuple):
    same: float
    better: float
    worse: float


def stream_rng(seed: int, stream: Sequence[int] = ()) -> np.random.Generator:
    """Independent generator for one (seed, stream index) pair."""
    return np.random.default_rng([int(seed), *(int(part) for part in stream)])


@numba.njit(nogil=True)
def _metropolis_sweep(states, fields, couplings, order, temperature, uniforms):
    num_samples, k = states.shape
    for sample in range(num_samples):
        for position in range(k):
            v = order[position]
            if states[sample, v] == 0:
                delta_e = fields[sample, v]
                step = 1.0
            else:
                delta_e = -fields[sample, v]
                step = -1.0
            accept = delta_e < 0.0
            if not accept and temperature > 0.0:
                accept = uniforms[sample, position] < math.exp(-delta_e / temperature)
            if accept:
                states[sample, v] = 1 - states[sample, v]
                for u in range(k):
                    fields[sample, u] += couplings[u, v] * step


def _anneal(Q: Qubo, start: np.ndarray, schedule: AnnealSchedule, cfg: SamplerConfig,
            rng: np.random.Generator) -> np.ndarray:
    couplings = np.ascontiguousarray(Q.couplings())
    states = np.ascontiguousarray(start, dtype=np.int8)
    fields = Q.linear[np.newaxis, :] + states.astype(np.float64) @ couplings
    hot = cfg.hot_temperature_scale * Q.max_abs_coefficient()
    profile = temperatures(schedule.sweep_parameters(cfg.sweeps_per_microsecond), hot)
    for temperature in profile:
        order = rng.permutation(Q.k)
        uniforms = rng.random(states.shape)
        _metropolis_sweep(states, fields, couplings, order, float(temperature), uniforms)
    return states.astype(np.uint8)


def _sample_set(Q: Qubo, states: np.ndarray) -> SampleSet:
    sample_energies = energies(Q, states)
    best = int(np.argmin(sample_energies))
    return SampleSet(states, sample_energies, states[best].copy(), float(sample_energies[best]))


def forward_sample(Q: Qubo, cfg: SamplerConfig, stream: Sequence[int] = ()) -> SampleSet:
    """Forward anneal from uniformly random states along the default 20 us schedule."""
    rng = stream_rng(cfg.seed, stream)
    start = rng.integers(0, 2, size=(cfg.num_samples, Q.k))
    states = _anneal(Q, start, forward_schedule(), cfg, rng)
    return _sample_set(Q, states)


def reverse_sample(Q: Qubo, initial, r: float, t_r: float, cfg: SamplerConfig,
                   stream: Sequence[int] = ()) -> SampleSet:
    """Reverse anneal every sample from `initial`.

    The initial state is always kept as the fallback incumbent, so the returned
    best_energy never exceeds energy(Q, initial). r = 0 performs no search.
    """
    initial = as_binary_vector(initial, Q.k)
    if not 0 <= r <= 1:
        raise ValueError(f"reversal distance r must be in [0, 1], got {r}")
    start = np.tile(initial, (cfg.num_samples, 1))
    if r == 0:
        states = start
    else:
        rng = stream_rng(cfg.seed, stream)
        states = _anneal(Q, start, reverse_schedule(r, t_r), cfg, rng)

    sampled = _sample_set(Q, states)
    initial_energy = energy(Q, initial)
    if sampled.best_energy < initial_energy:
        return sampled
    return SampleSet(sampled.states, sampled.energies, initial.copy(), initial_energy)


def categorize_samples(Q: Qubo, initial, S: SampleSet) -> CategoryFractions:
    """Share of samples that are the same as, better than, or worse than `initial`.

    Samples with exactly the initial energy count as the same.
    """
    initial = as_binary_vector(initial, Q.k)
    if S.states.shape[1] != Q.k:
        raise DimensionMismatchError(f"samples have {S.states.shape[1]} variables, QUBO has {Q.k}")
    total = len(S)
    if total == 0:
        return CategoryFractions(1.0, 0.0, 0.0)
    initial_energy = energy(Q, initial)
    better = int(np.count_nonzero(S.energies < initial_energy))
    worse = int(np.count_nonzero(S.energies > initial_energy))
    same = total - better - worse
    return CategoryFractions(same / total, better / total, worse / total)


def exact_solve(Q: Qubo) -> Tuple[BinaryVector, float]:
    """Global minimum by enumeration; ties go to the smallest big-endian integer."""
    if Q.k > EXACT_SOLVE_MAX_K:
        raise ValueError(f"exact enumeration is limited to k <= {EXACT_SOLVE_MAX_K}, got k={Q.k}")
    upper = Q.upper()
    shifts = np.arange(Q.k - 1, -1, -1, dtype=np.int64)
    chunk = 1 << min(Q.k, _ENUMERATION_CHUNK_BITS)
    best_index, best_energy = 0, math.inf
    for start in range(0, 1 << Q.k, chunk):
        indices = np.arange(start, start + chunk, dtype=np.int64)
        states = ((indices[:, np.newaxis] >> shifts) & 1).astype(np.float64)
        chunk_energies = states @ Q.linear + np.sum((states @ upper) * states, axis=1)
        position = int(np.argmin(chunk_energies))
        if chunk_energies[position] < best_energy:
            best_index, best_energy = start + position, float(chunk_energies[position])
    state = ((best_index >> shifts) & 1).astype(np.uint8)
    return state, energy(Q, state)
