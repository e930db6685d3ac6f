# Default run settings. A JSON config file (--config) mirrors this layout section by
# section; any key it sets overrides the value here, and explicit CLI flags override both.
TOOL_VERSION = '1.0.0'

DEFAULT_SETTINGS = {
    'input': {
        'path': None,
        'format': 'csv',
        'transpose': False,
    },
    'factorize': {
        'rank': 10,
        'iterations': 10,
        'warmup': 1,
        'mode': 'hybrid',
        'r': 0.45,
        'tr': 10.0,
        'forward_samples': 1000,
        'reverse_samples': 'auto-equal-time',
        'rounded_ratio': False,
        'init_density': 0.5,
        'resume': None,
    },
    'sampler': {
        'sweeps_per_microsecond': 10,
        'hot_temperature_scale': 1.0,
    },
    'nnls': {
        'max_iterations': 5000,
        'tolerance': 1e-8,
        'ridge': 0.0,
        'accelerated': False,
    },
    'calibrate': {
        'r_grid': [0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5,
                   0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 1.0],
        'tr_grid': [10.0, 100.0],
        'corpus_size': 100,
        'samples': 100,
    },
    'benchmark': {
        'samples': 240,
        'max_time_us': 10_000_000,
        'corpus_size': 100,
        'parallel': False,
        'competitor': None,
    },
    'sweep': {
        'reverse_counts': [7, 24, 60, 240],
        'seeds': [0, 1, 2, 3, 4],
    },
    'generate': {
        'rows': 60,
        'cols': 60,
        'rank': 8,
        'noise_sigma': 0.0,
        'density': 0.5,
        'output_format': 'binary',
    },
    'run': {
        'seed': 0,
        'threads': 1,
        'out': 'nbmf-out',
        'plots': False,
    },
}

# CLI reverse-anneal count that derives the count from the forward budget
AUTO_EQUAL_TIME = 'auto-equal-time'

ARTIFACT_NAMES = {
    'checkpoint': 'checkpoint.json',
    'history': 'history.csv',
    'calibration': 'calibration.csv',
    'benchmark': 'benchmark.csv',
    'benchmark_summary': 'benchmark_summary.json',
    'sweep': 'sweep.csv',
    'sweep_summary': 'sweep_summary.csv',
    'manifest': 'manifest.json',
}
