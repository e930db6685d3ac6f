"""Forward-only vs hybrid (forward warmup, then reverse) at matched QPU access time.

For each reverse sample count the forward count with the same per-QUBO access time is
derived from the cost model, and both variants run from the same master seed.
"""
from dataclasses import dataclass, replace
from typing import Dict, List, Sequence
import logging

import pandas as pd

from models import DenseMatrix
from services.cost_model import forward_count_for_reverse
from services.nbmf_driver import DriverConfig, run

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ['reverse_samples', 'forward_samples', 'seed', 'forward_qpu_time_us', 'hybrid_qpu_time_us',
                 'forward_residual', 'hybrid_residual', 'hybrid_wins']


@dataclass(frozen=True)
class SweepRecord:
    reverse_samples: int
    forward_samples: int
    seed: int
    forward_qpu_time_us: int
    hybrid_qpu_time_us: int
    forward_residual: float
    hybrid_residual: float

    @property
    def hybrid_wins(self) -> bool:
        return self.hybrid_residual <= self.forward_residual

    def to_row(self) -> Dict:
        row = {name: getattr(self, name) for name in SWEEP_COLUMNS if name != 'hybrid_wins'}
        row['hybrid_wins'] = self.hybrid_wins
        return row


def matched_configs(base: DriverConfig, reverse_samples: int, seed: int, rounded: bool = False):
    forward_samples = forward_count_for_reverse(reverse_samples, base.forward_cost, base.reverse_cost, rounded)
    shared = replace(base, forward_samples_per_qubo=forward_samples, reverse_samples_per_qubo=reverse_samples,
                     master_seed=seed)
    forward_only = replace(shared, forward_warmup_iterations=shared.total_iterations)
    hybrid = replace(shared, forward_warmup_iterations=min(max(1, base.forward_warmup_iterations),
                                                           shared.total_iterations))
    return forward_only, hybrid


def run_budget_sweep(A: DenseMatrix, base: DriverConfig, reverse_counts: Sequence[int],
                     seeds: Sequence[int], rounded: bool = False) -> List[SweepRecord]:
    records = []
    for reverse_samples in reverse_counts:
        for seed in seeds:
            forward_cfg, hybrid_cfg = matched_configs(base, reverse_samples, seed, rounded)
            forward_state = run(A, forward_cfg)
            hybrid_state = run(A, hybrid_cfg)
            record = SweepRecord(
                reverse_samples=reverse_samples,
                forward_samples=forward_cfg.forward_samples_per_qubo,
                seed=seed,
                forward_qpu_time_us=forward_state.cumulative_qpu_time_us,
                hybrid_qpu_time_us=hybrid_state.cumulative_qpu_time_us,
                forward_residual=forward_state.relative_residual,
                hybrid_residual=hybrid_state.relative_residual,
            )
            logger.info(
                f"budget R={reverse_samples}/F={record.forward_samples} seed={seed}: "
                f"forward={record.forward_residual:.6f} hybrid={record.hybrid_residual:.6f}"
            )
            records.append(record)
    return records


def sweep_frame(records: Sequence[SweepRecord]) -> pd.DataFrame:
    return pd.DataFrame([record.to_row() for record in records], columns=SWEEP_COLUMNS)


def summarize_sweep(records: Sequence[SweepRecord]) -> pd.DataFrame:
    """Per reverse sample count: mean QPU time, mean residuals and hybrid win fraction."""
    frame = sweep_frame(records)
    frame['hybrid_wins'] = frame['hybrid_wins'].astype(float)
    return frame.groupby(['reverse_samples', 'forward_samples'], as_index=False).agg(
        forward_qpu_time_us=('forward_qpu_time_us', 'mean'),
        hybrid_qpu_time_us=('hybrid_qpu_time_us', 'mean'),
        forward_residual=('forward_residual', 'mean'),
        hybrid_residual=('hybrid_residual', 'mean'),
        hybrid_win_fraction=('hybrid_wins', 'mean'),
    )
