import numpy as np
import pytest

from services.calibration import REPORT_COLUMNS, CorpusEntry, calibrate, harvest_corpus
from services.nbmf_driver import DriverConfig
from solvers.annealer import SamplerConfig, exact_solve, forward_sample


@pytest.fixture
def corpus(random_qubo):
    rng = np.random.default_rng(4)
    return [CorpusEntry(random_qubo(k=6, seed=seed), rng.integers(0, 2, 6).astype(np.uint8), seed)
            for seed in range(8)]


@pytest.fixture
def sampler():
    return SamplerConfig(num_samples=20, sweeps_per_microsecond=2, seed=1)


def test_zero_reversal_keeps_every_sample_at_the_initial_state(corpus, sampler):
    report = calibrate(corpus, [0.0, 0.5], [10.0], sampler)
    point = report.point(10.0, 0.0)
    assert point.mean_same == 1.0
    assert point.mean_better == point.mean_worse == 0.0
    assert point.sd_same == point.sd_better == point.sd_worse == 0.0


def test_fractions_partition_the_samples(corpus, sampler):
    frame = calibrate(corpus, [0.25, 0.75, 1.0], [10.0, 100.0], sampler).to_frame()
    assert list(frame.columns) == REPORT_COLUMNS
    assert len(frame) == 6
    totals = frame['mean_better'] + frame['mean_same'] + frame['mean_worse']
    np.testing.assert_allclose(totals, 1.0)
    assert list(frame['t_r_us']) == [10.0, 10.0, 10.0, 100.0, 100.0, 100.0]


def test_best_r_maximizes_mean_better(corpus, sampler):
    report = calibrate(corpus, [0.0, 0.3, 0.6, 0.9], [10.0, 100.0], sampler)
    frame = report.to_frame()
    for t_r, best in report.best_r.items():
        row = frame[frame['t_r_us'] == t_r]
        assert row.loc[row['mean_better'].idxmax(), 'r'] == best


def test_calibration_is_independent_of_thread_count(corpus, sampler):
    serial = calibrate(corpus, [0.2, 0.6], [10.0], sampler, threads=1)
    threaded = calibrate(corpus, [0.2, 0.6], [10.0], sampler, threads=4)
    assert serial.points == threaded.points


def test_calibration_rejects_empty_inputs(corpus, sampler):
    with pytest.raises(ValueError):
        calibrate([], [0.5], [10.0], sampler)
    with pytest.raises(ValueError):
        calibrate(corpus, [], [10.0], sampler)


def test_missing_point_lookup_raises(corpus, sampler):
    with pytest.raises(KeyError):
        calibrate(corpus, [0.5], [10.0], sampler).point(100.0, 0.5)


def test_harvest_corpus_samples_columns_after_warmup(planted):
    A, _, _ = planted(n=12, m=15, k=4, seed=7)
    cfg = DriverConfig(k=4, total_iterations=5, forward_warmup_iterations=1, forward_samples_per_qubo=20,
                       sampler=SamplerConfig(sweeps_per_microsecond=2), master_seed=2)
    corpus = harvest_corpus(A, cfg, size=6)
    columns = [entry.column for entry in corpus]
    assert len(columns) == 6 and columns == sorted(set(columns))
    assert all(entry.qubo.k == 4 and entry.initial.shape == (4,) for entry in corpus)
    assert [entry.column for entry in harvest_corpus(A, cfg, size=6)] == columns
    assert len(harvest_corpus(A, cfg)) == 15


def test_harvested_qubo_matches_column_residual(planted):
    A, _, _ = planted(n=12, m=6, k=3, noise_sigma=0.1, seed=5)
    cfg = DriverConfig(k=3, total_iterations=1, forward_samples_per_qubo=20,
                       sampler=SamplerConfig(sweeps_per_microsecond=2))
    entry = harvest_corpus(A, cfg)[2]
    assert entry.qubo.offset == pytest.approx(float(np.sum(A.values[:, 2] ** 2)))


def test_ground_state_initial_is_never_improved(random_qubo, sampler):
    qubo = random_qubo(k=7, seed=9)
    ground, _ = exact_solve(qubo)
    report = calibrate([CorpusEntry(qubo, ground, 0)], [0.0, 0.2, 0.45, 0.8, 1.0], [10.0, 100.0], sampler)
    assert all(point.mean_better == 0.0 for point in report.points)


def test_same_fraction_shrinks_with_reversal_distance(random_qubo):
    # annealed initials sit in local minima
    corpus = []
    for seed in range(8):
        qubo = random_qubo(k=6, seed=seed)
        start = forward_sample(qubo, SamplerConfig(num_samples=20, sweeps_per_microsecond=10, seed=seed))
        corpus.append(CorpusEntry(qubo, start.best_state, seed))
    r_grid = [0.0, 0.1, 0.9]
    report = calibrate(corpus, r_grid, [10.0], SamplerConfig(num_samples=1000, sweeps_per_microsecond=2, seed=7))
    same = [report.point(10.0, r).mean_same for r in r_grid]
    assert same[0] == 1.0
    assert same[1] <= same[0]
    assert same[2] <= same[1] + 0.02
