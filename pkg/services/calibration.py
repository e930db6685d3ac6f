"""Reversal distance / reversal time calibration.

For every (t_r, r) grid point each corpus QUBO is reverse-annealed from its initial
state and the samples are split into same / better / worse relative to that state.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from itertools import product
from typing import Dict, List, Optional, Sequence
import logging

import numpy as np
import pandas as pd

from models import DenseMatrix
from services.nbmf_driver import DriverConfig, run, update_b
from solvers.annealer import SamplerConfig, categorize_samples, reverse_sample, stream_rng
from solvers.qubo import BinaryVector, Qubo, build_column_qubo

logger = logging.getLogger(__name__)

HARVEST_STREAM = 1
REPORT_COLUMNS = ['t_r_us', 'r', 'mean_better', 'sd_better', 'mean_same', 'sd_same', 'mean_worse', 'sd_worse']


@dataclass(frozen=True, eq=False)
class CorpusEntry:
    qubo: Qubo
    initial: BinaryVector
    column: int = -1


@dataclass(frozen=True)
class CalibrationPoint:
    t_r_us: float
    r: float
    mean_better: float
    sd_better: float
    mean_same: float
    sd_same: float
    mean_worse: float
    sd_worse: float

    def to_dict(self) -> Dict:
        return {name: getattr(self, name) for name in REPORT_COLUMNS}


@dataclass(frozen=True)
class CalibrationReport:
    points: tuple
    best_r: Dict[float, float]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([point.to_dict() for point in self.points], columns=REPORT_COLUMNS)

    def point(self, t_r_us: float, r: float) -> CalibrationPoint:
        for candidate in self.points:
            if candidate.t_r_us == t_r_us and candidate.r == r:
                return candidate
        raise KeyError(f"no calibration point for t_r={t_r_us}, r={r}")


def harvest_corpus(A: DenseMatrix, cfg: DriverConfig, size: Optional[int] = None,
                   seed: Optional[int] = None) -> List[CorpusEntry]:
    """QUBOs seen right after the forward warmup, paired with the column they start from.

    Columns are drawn uniformly without replacement; `size=None` keeps every column.
    """
    warmup = max(1, cfg.forward_warmup_iterations)
    warm_cfg = replace(cfg, total_iterations=warmup, forward_warmup_iterations=warmup)
    state = update_b(run(A, warm_cfg), A, cfg)

    columns = np.arange(A.cols)
    if size is not None and size < A.cols:
        rng = stream_rng(cfg.master_seed if seed is None else seed, (HARVEST_STREAM,))
        columns = np.sort(rng.choice(A.cols, size=size, replace=False))
    logger.info(f"harvested {len(columns)} QUBOs after {warmup} forward iteration(s)")
    return [CorpusEntry(build_column_qubo(state.B, A.values[:, j]), state.C.column(j), int(j)) for j in columns]


def calibrate(corpus: Sequence[CorpusEntry], r_grid: Sequence[float], t_r_grid: Sequence[float],
              cfg: SamplerConfig, threads: int = 1) -> CalibrationReport:
    if not corpus:
        raise ValueError("calibration needs at least one QUBO")
    if not r_grid or not t_r_grid:
        raise ValueError("calibration grids must not be empty")

    points = []
    for grid_index, (t_r, r) in enumerate(product(t_r_grid, r_grid)):
        def categorize(index):
            entry = corpus[index]
            samples = reverse_sample(entry.qubo, entry.initial, r, t_r, cfg, stream=(grid_index, index))
            return categorize_samples(entry.qubo, entry.initial, samples)

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                fractions = list(pool.map(categorize, range(len(corpus))))
        else:
            fractions = [categorize(index) for index in range(len(corpus))]

        # rows stay in corpus order, so the reductions are independent of scheduling
        table = np.array([[f.better, f.same, f.worse] for f in fractions])
        means, deviations = table.mean(axis=0), table.std(axis=0)
        points.append(CalibrationPoint(
            float(t_r), float(r),
            float(means[0]), float(deviations[0]),
            float(means[1]), float(deviations[1]),
            float(means[2]), float(deviations[2]),
        ))
        logger.debug(f"t_r={t_r} r={r}: better={means[0]:.4f} same={means[1]:.4f} worse={means[2]:.4f}")

    best_r = {}
    for t_r in t_r_grid:
        row = [point for point in points if point.t_r_us == float(t_r)]
        best_r[float(t_r)] = max(row, key=lambda point: point.mean_better).r
    return CalibrationReport(tuple(points), best_r)
