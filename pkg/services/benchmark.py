"""Time-to-target benchmark: how long a classical solver, warm-started from the same
state as the reverse anneal, needs to match the reverse anneal's best energy.

QUBOs the reverse anneal did not improve get a time to target of 0 and are flagged as
excluded from plots.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Protocol, Sequence
import json
import logging
import subprocess
import time

import pandas as pd

from services.calibration import CorpusEntry
from services.cost_model import CostModel, access_time, default_reverse_cost
from solvers.annealer import SamplerConfig, reverse_sample
from solvers.qubo import Qubo, as_binary_vector, energy
from solvers.schedules import RAMP_US
from solvers.tabu import TabuResult, tabu_solve

logger = logging.getLogger(__name__)

RECORD_COLUMNS = ['qubo_id', 'initial_energy', 'reverse_best_energy', 'simulated_qpu_time_us',
                  'time_to_target_us', 'reached', 'excluded_from_plot']


class ClassicalCompetitor(Protocol):
    name: str

    def solve(self, qubo: Qubo, initial, target_energy: float, max_time_us: float) -> TabuResult:
        ...


class TabuCompetitor:
    name = 'tabu'

    def __init__(self, seed: int = 0):
        self.seed = seed

    def solve(self, qubo, initial, target_energy, max_time_us):
        return tabu_solve(qubo, initial, target_energy, max_time_us, stop_at_target=True, seed=self.seed)


class SubprocessCompetitor:
    """External solver speaking JSON over stdin/stdout.

    Input:  {"qubo": {...}, "initial": [...], "target_energy": e, "max_time_us": t}
    Output: {"state": [...], "energy": e, "time_to_target_us": t or null}
    """

    def __init__(self, command: Sequence[str], grace_seconds: float = 5.0):
        self.command = list(command)
        self.name = self.command[0] if self.command else 'subprocess'
        self.grace_seconds = grace_seconds

    def solve(self, qubo, initial, target_energy, max_time_us):
        request = {
            'qubo': qubo.to_dict(),
            'initial': as_binary_vector(initial, qubo.k).tolist(),
            'target_energy': target_energy,
            'max_time_us': max_time_us,
        }
        started = time.perf_counter_ns()
        try:
            completed = subprocess.run(
                self.command,
                input=json.dumps(request),
                capture_output=True,
                text=True,
                timeout=max_time_us / 1e6 + self.grace_seconds,
                check=True,
            )
            reply = json.loads(completed.stdout)
            state = as_binary_vector(reply['state'], qubo.k)
        except subprocess.TimeoutExpired:
            logger.warning(f"⚠️ {self.name} timed out after {max_time_us}us plus {self.grace_seconds}s grace")
            return self._unreached(qubo, initial, started)
        except subprocess.CalledProcessError as e:
            logger.warning(f"⚠️ {self.name} exited with code {e.returncode}: {(e.stderr or '').strip()[:200]}")
            return self._unreached(qubo, initial, started)
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            logger.warning(f"⚠️ {self.name} sent an unusable reply: {e}")
            return self._unreached(qubo, initial, started)
        elapsed = (time.perf_counter_ns() - started) / 1000.0
        # trust the state, not the reported energy
        found = energy(qubo, state)
        reached = reply.get('time_to_target_us')
        if reached is not None and found > target_energy:
            logger.warning(f"⚠️ {self.name} claimed the target but its state has energy {found} > {target_energy}")
            reached = None
        return TabuResult(state, found, None if reached is None else float(reached), 0, elapsed)

    @staticmethod
    def _unreached(qubo, initial, started) -> TabuResult:
        state = as_binary_vector(initial, qubo.k)
        elapsed = (time.perf_counter_ns() - started) / 1000.0
        return TabuResult(state, energy(qubo, state), None, 0, elapsed)


@dataclass(frozen=True)
class BenchmarkRecord:
    qubo_id: int
    initial_energy: float
    reverse_best_energy: float
    simulated_qpu_time_us: int
    simulated_anneal_time_us: int
    classical_time_to_target_us: Optional[float]
    classical_energy: float
    improved: bool
    timing_noisy: bool = False

    @property
    def reached(self) -> bool:
        return self.classical_time_to_target_us is not None

    @property
    def excluded_from_plot(self) -> bool:
        return not self.improved

    def to_row(self) -> Dict:
        return {
            'qubo_id': self.qubo_id,
            'initial_energy': self.initial_energy,
            'reverse_best_energy': self.reverse_best_energy,
            'simulated_qpu_time_us': self.simulated_qpu_time_us,
            'time_to_target_us': self.classical_time_to_target_us,
            'reached': self.reached,
            'excluded_from_plot': self.excluded_from_plot,
        }


@dataclass(frozen=True)
class BenchmarkSummary:
    records: tuple
    competitor: str
    total_time_to_target_us: float
    total_annealing_time_us: int
    total_qpu_access_time_us: int
    improved: int
    reached: int
    unreached: int
    timing_noisy: bool

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([record.to_row() for record in self.records], columns=RECORD_COLUMNS)

    def to_dict(self) -> Dict:
        return {
            'competitor': self.competitor,
            'qubos': len(self.records),
            'improved': self.improved,
            'reached': self.reached,
            'unreached': self.unreached,
            'total_time_to_target_us': self.total_time_to_target_us,
            'total_annealing_time_us': self.total_annealing_time_us,
            'total_qpu_access_time_us': self.total_qpu_access_time_us,
            'timing_noisy': self.timing_noisy,
        }


def run_benchmark(corpus: Sequence[CorpusEntry], r: float, t_r: float, samples: int,
                  max_time_us: float, cfg: SamplerConfig,
                  competitor: Optional[ClassicalCompetitor] = None,
                  reverse_cost: Optional[CostModel] = None,
                  parallel: bool = False, threads: int = 1) -> BenchmarkSummary:
    if not corpus:
        raise ValueError("benchmark needs at least one QUBO")
    competitor = competitor or TabuCompetitor(seed=cfg.seed)
    reverse_cost = reverse_cost or default_reverse_cost()
    sampler = cfg.with_samples(samples)
    qpu_time = access_time(reverse_cost, samples)
    anneal_time = int(round((2 * RAMP_US + t_r) * samples))
    noisy = parallel and threads > 1

    def measure(index: int) -> BenchmarkRecord:
        entry = corpus[index]
        initial_energy = energy(entry.qubo, entry.initial)
        annealed = reverse_sample(entry.qubo, entry.initial, r, t_r, sampler, stream=(index,))
        if annealed.best_energy < initial_energy:
            result = competitor.solve(entry.qubo, entry.initial, annealed.best_energy, max_time_us)
            time_to_target, classical_energy, improved = result.time_to_target_us, result.best_energy, True
            if time_to_target is None:
                logger.warning(f"⚠️ {competitor.name} did not reach the target for QUBO {index} within {max_time_us}us")
        else:
            time_to_target, classical_energy, improved = 0.0, initial_energy, False
        return BenchmarkRecord(index, initial_energy, annealed.best_energy, qpu_time, anneal_time,
                               time_to_target, classical_energy, improved, noisy)

    if noisy:
        logger.warning("⚠️ benchmarking in parallel; wall-clock timings are marked noisy")
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records: List[BenchmarkRecord] = list(pool.map(measure, range(len(corpus))))
    else:
        records = [measure(index) for index in range(len(corpus))]

    reached = [record for record in records if record.reached]
    return BenchmarkSummary(
        records=tuple(records),
        competitor=competitor.name,
        total_time_to_target_us=float(sum(record.classical_time_to_target_us for record in reached)),
        total_annealing_time_us=sum(record.simulated_anneal_time_us for record in records),
        total_qpu_access_time_us=sum(record.simulated_qpu_time_us for record in records),
        improved=sum(1 for record in records if record.improved),
        reached=len(reached),
        unreached=len(records) - len(reached),
        timing_noisy=noisy,
    )
