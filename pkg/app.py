"""Command-line front end: factorize, calibrate, benchmark, sweep and generate.

Exit codes: 0 success, 1 usage or configuration error, 2 data error, 3 runtime failure.
"""
from pathlib import Path
import argparse
import json
import logging
import shlex
import sys
import time
import traceback

from data.defaults import ARTIFACT_NAMES, AUTO_EQUAL_TIME
from forms import MODES, load_config_file, merge_settings, validate_settings
from models import ConfigValidationError, DenseMatrix, MatrixFormatError
from services.benchmark import SubprocessCompetitor, TabuCompetitor, run_benchmark
from services.budget_sweep import run_budget_sweep, summarize_sweep, sweep_frame
from services.calibration import calibrate, harvest_corpus
from services.chart_generator import render_all
from services.cost_model import equal_time_reverse_count
from services.nbmf_driver import DriverConfig, run
from solvers.annealer import SamplerConfig
from solvers.nnls import NnlsConfig
from utils.checkpoint import (atomic_write_text, checkpoint_writer, history_frame, load_checkpoint, save_checkpoint,
                              write_history_csv)
from utils.manifest import RunManifest, write_manifest
from utils.matrix_io import FORMATS, export_matrix, generate_synthetic, ingest

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_RUNTIME = 3

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'
DRIVER_SECTIONS = ('input', 'factorize', 'sampler', 'nnls', 'run')


class CliParser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; 2 is reserved for data errors here."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# Settings -> library configs

def build_driver_config(settings) -> DriverConfig:
    factorize, run_settings = settings['factorize'], settings['run']
    reverse_samples = factorize['reverse_samples']
    if reverse_samples == AUTO_EQUAL_TIME:
        reverse_samples = equal_time_reverse_count(factorize['forward_samples'], rounded=factorize['rounded_ratio'])
        logger.info(f"{factorize['forward_samples']} forward samples per QUBO -> {reverse_samples} reverse samples at equal access time")
    warmup = factorize['iterations'] if factorize['mode'] == 'forward-only' else factorize['warmup']
    try:
        return DriverConfig(
            k=factorize['rank'],
            total_iterations=factorize['iterations'],
            forward_warmup_iterations=warmup,
            r=factorize['r'],
            t_r=factorize['tr'],
            forward_samples_per_qubo=factorize['forward_samples'],
            reverse_samples_per_qubo=int(reverse_samples),
            sampler=SamplerConfig(
                sweeps_per_microsecond=settings['sampler']['sweeps_per_microsecond'],
                seed=run_settings['seed'],
                hot_temperature_scale=settings['sampler']['hot_temperature_scale'],
            ),
            nnls=NnlsConfig(
                max_iterations=settings['nnls']['max_iterations'],
                tolerance=settings['nnls']['tolerance'],
                ridge=settings['nnls']['ridge'],
                accelerated=settings['nnls']['accelerated'],
            ),
            master_seed=run_settings['seed'],
            init_density=factorize['init_density'],
            threads=run_settings['threads'],
        )
    except ValueError as e:
        raise ConfigValidationError({'factorize': [str(e)]})


def load_input(settings) -> DenseMatrix:
    source = settings['input']
    if not source['path']:
        raise ConfigValidationError({'input.path': ['An input matrix is required (--input).']})
    started = time.perf_counter()
    A = ingest(source['path'], source['format'], source['transpose'])
    logger.info(f"📥 Loaded {A.rows}x{A.cols} matrix from {source['path']} in {time.perf_counter() - started:.2f}s")
    return A


def output_dir(settings) -> Path:
    out = Path(settings['run']['out'])
    out.mkdir(parents=True, exist_ok=True)
    return out


def write_frame(frame, path):
    atomic_write_text(path, frame.to_csv(index=False))
    logger.info(f"✅ Wrote {path}")


# Commands

def cmd_factorize(settings) -> int:
    validated = validate_settings(settings, DRIVER_SECTIONS)
    out = output_dir(validated)
    checkpoint = out / ARTIFACT_NAMES['checkpoint']
    cfg = build_driver_config(validated)
    A = load_input(validated)
    manifest = RunManifest.for_input('factorize', {**validated, 'driver': cfg.to_dict()}, validated['input']['path'])

    resume_from = None
    if validated['factorize']['resume']:
        resume_from, _ = load_checkpoint(validated['factorize']['resume'])

    started = time.perf_counter()
    state = run(A, cfg, resume_from=resume_from, on_iteration=checkpoint_writer(cfg, checkpoint))
    manifest.timings['factorize_s'] = time.perf_counter() - started

    save_checkpoint(state, cfg, checkpoint)
    history = out / ARTIFACT_NAMES['history']
    write_history_csv(state, history)
    manifest.add_artifact('checkpoint', checkpoint)
    manifest.add_artifact('history', history)

    if not all(record.nnls_converged for record in state.history):
        logger.warning("⚠️ At least one B update stopped before the NNLS tolerance was met")
    if validated['run']['plots']:
        label = 'forward-only' if cfg.forward_warmup_iterations == cfg.total_iterations else 'hybrid'
        for index, path in enumerate(render_all(out, histories={label: history_frame(state)})):
            manifest.add_artifact(f'chart_{index}', path)

    write_manifest(manifest, out / ARTIFACT_NAMES['manifest'])
    logger.info(f"✅ Factorization finished: relative residual {state.relative_residual:.6f} "
                f"after {state.iteration} iterations, {state.cumulative_qpu_time_us}us simulated QPU time")
    return EXIT_OK


def cmd_calibrate(settings) -> int:
    validated = validate_settings(settings, DRIVER_SECTIONS + ('calibrate',))
    out = output_dir(validated)
    cfg = build_driver_config(validated)
    A = load_input(validated)
    options = validated['calibrate']
    manifest = RunManifest.for_input('calibrate', validated, validated['input']['path'])

    started = time.perf_counter()
    corpus = harvest_corpus(A, cfg, size=options['corpus_size'], seed=cfg.master_seed)
    report = calibrate(corpus, options['r_grid'], options['tr_grid'], cfg.sampler.with_samples(options['samples']),
                       threads=cfg.worker_count)
    manifest.timings['calibrate_s'] = time.perf_counter() - started

    path = out / ARTIFACT_NAMES['calibration']
    frame = report.to_frame()
    write_frame(frame, path)
    manifest.add_artifact('calibration', path)
    for t_r, r in report.best_r.items():
        logger.info(f"t_r={t_r:g}us: most improving reversal distance r={r:g}")

    if validated['run']['plots']:
        for index, chart in enumerate(render_all(out, calibration=frame)):
            manifest.add_artifact(f'chart_{index}', chart)
    write_manifest(manifest, out / ARTIFACT_NAMES['manifest'])
    return EXIT_OK


def cmd_benchmark(settings) -> int:
    validated = validate_settings(settings, DRIVER_SECTIONS + ('benchmark',))
    out = output_dir(validated)
    cfg = build_driver_config(validated)
    A = load_input(validated)
    options = validated['benchmark']
    manifest = RunManifest.for_input('benchmark', validated, validated['input']['path'])

    competitor = TabuCompetitor(seed=cfg.master_seed)
    if options['competitor']:
        competitor = SubprocessCompetitor(shlex.split(options['competitor']))

    started = time.perf_counter()
    corpus = harvest_corpus(A, cfg, size=options['corpus_size'], seed=cfg.master_seed)
    summary = run_benchmark(corpus, cfg.r, cfg.t_r, options['samples'], options['max_time_us'], cfg.sampler,
                            competitor=competitor, reverse_cost=cfg.reverse_cost,
                            parallel=options['parallel'], threads=cfg.worker_count)
    manifest.timings['benchmark_s'] = time.perf_counter() - started

    records_path = out / ARTIFACT_NAMES['benchmark']
    summary_path = out / ARTIFACT_NAMES['benchmark_summary']
    frame = summary.to_frame()
    write_frame(frame, records_path)
    atomic_write_text(summary_path, json.dumps(summary.to_dict(), indent=2))
    manifest.add_artifact('benchmark', records_path)
    manifest.add_artifact('benchmark_summary', summary_path)

    if summary.unreached:
        logger.warning(f"⚠️ {summary.unreached} of {summary.improved} improved QUBOs were not matched by "
                       f"{summary.competitor} within {options['max_time_us']:g}us")
    if validated['run']['plots']:
        per_qubo_anneal = summary.total_annealing_time_us / len(summary.records)
        for index, chart in enumerate(render_all(out, benchmark=frame, anneal_time_us=per_qubo_anneal)):
            manifest.add_artifact(f'chart_{index}', chart)
    write_manifest(manifest, out / ARTIFACT_NAMES['manifest'])
    logger.info(f"✅ Benchmark finished: {summary.competitor} needed {summary.total_time_to_target_us / 1e6:.3f}s "
                f"vs {summary.total_annealing_time_us / 1e6:.3f}s annealing and "
                f"{summary.total_qpu_access_time_us / 1e6:.3f}s QPU access time")
    return EXIT_OK


def cmd_sweep(settings) -> int:
    validated = validate_settings(settings, DRIVER_SECTIONS + ('sweep',))
    out = output_dir(validated)
    cfg = build_driver_config(validated)
    A = load_input(validated)
    options = validated['sweep']
    manifest = RunManifest.for_input('sweep', validated, validated['input']['path'])

    started = time.perf_counter()
    records = run_budget_sweep(A, cfg, options['reverse_counts'], options['seeds'],
                               rounded=validated['factorize']['rounded_ratio'])
    manifest.timings['sweep_s'] = time.perf_counter() - started

    sweep_path = out / ARTIFACT_NAMES['sweep']
    summary_path = out / ARTIFACT_NAMES['sweep_summary']
    summary = summarize_sweep(records)
    write_frame(sweep_frame(records), sweep_path)
    write_frame(summary, summary_path)
    manifest.add_artifact('sweep', sweep_path)
    manifest.add_artifact('sweep_summary', summary_path)

    if validated['run']['plots']:
        for index, chart in enumerate(render_all(out, sweep_summary=summary)):
            manifest.add_artifact(f'chart_{index}', chart)
    write_manifest(manifest, out / ARTIFACT_NAMES['manifest'])
    return EXIT_OK


def cmd_generate(settings) -> int:
    validated = validate_settings(settings, ('generate', 'run'))
    out = output_dir(validated)
    options = validated['generate']
    manifest = RunManifest('generate', validated)

    A, B, C = generate_synthetic(options['rows'], options['cols'], options['rank'], options['noise_sigma'],
                                 options['density'], validated['run']['seed'])
    suffix = 'bin' if options['output_format'] == 'binary' else 'csv'
    for name, matrix in (('A', A), ('B_planted', B), ('C_planted', DenseMatrix(C.as_float()))):
        path = out / f'{name}.{suffix}'
        export_matrix(matrix, path, options['output_format'])
        manifest.add_artifact(name, path)
        logger.info(f"✅ Wrote {path}")

    write_manifest(manifest, out / ARTIFACT_NAMES['manifest'])
    return EXIT_OK


COMMANDS = {
    'factorize': cmd_factorize,
    'calibrate': cmd_calibrate,
    'benchmark': cmd_benchmark,
    'sweep': cmd_sweep,
    'generate': cmd_generate,
}


# Argument parsing. Every option's dest is "<section>.<key>" of the settings it overrides,
# and defaults are None so unset flags never mask config file values.

def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='JSON settings file; flags override its values')
    common.add_argument('--seed', dest='run.seed', type=int, help='master seed')
    common.add_argument('--threads', dest='run.threads', type=int, help='worker threads, 0 = all cores')
    common.add_argument('--out', dest='run.out', help='output directory')
    common.add_argument('--plots', dest='run.plots', action='store_true', default=None, help='render PNG charts')
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument('--verbose', action='store_true')
    verbosity.add_argument('--quiet', action='store_true')
    return common


def _driver_options() -> argparse.ArgumentParser:
    driver = argparse.ArgumentParser(add_help=False)
    driver.add_argument('--input', dest='input.path', help='matrix file or PGM directory')
    driver.add_argument('--format', dest='input.format', choices=FORMATS)
    driver.add_argument('--transpose', dest='input.transpose', action='store_true', default=None,
                        help='use the transpose of the ingested matrix')
    driver.add_argument('--rank', dest='factorize.rank', type=int, help='inner dimension k')
    driver.add_argument('--iterations', dest='factorize.iterations', type=int)
    driver.add_argument('--warmup', dest='factorize.warmup', type=int, help='forward anneal iterations before reverse')
    driver.add_argument('--mode', dest='factorize.mode', choices=MODES)
    driver.add_argument('--r', dest='factorize.r', type=float, help='reversal distance')
    driver.add_argument('--tr', dest='factorize.tr', type=float, help='reversal time in microseconds')
    driver.add_argument('--forward-samples', dest='factorize.forward_samples', type=int)
    driver.add_argument('--reverse-samples', dest='factorize.reverse_samples',
                        help=f'reverse samples per QUBO or "{AUTO_EQUAL_TIME}"')
    driver.add_argument('--rounded-ratio', dest='factorize.rounded_ratio', action='store_true', default=None,
                        help='derive equal-time counts from the flat 0.24 ratio')
    driver.add_argument('--sweeps-per-us', dest='sampler.sweeps_per_microsecond', type=int)
    return driver


def build_parser() -> argparse.ArgumentParser:
    parser = CliParser(prog='nbmf', description='Nonnegative/binary matrix factorization with simulated annealing')
    subparsers = parser.add_subparsers(dest='command', required=True, parser_class=CliParser)
    common, driver = _common_options(), _driver_options()

    factorize = subparsers.add_parser('factorize', parents=[common, driver], help='run the factorization')
    factorize.add_argument('--resume', dest='factorize.resume', help='checkpoint to continue from')

    calibrate_cmd = subparsers.add_parser('calibrate', parents=[common, driver], help='reversal distance calibration')
    calibrate_cmd.add_argument('--r-grid', dest='calibrate.r_grid', type=float, nargs='+')
    calibrate_cmd.add_argument('--tr-grid', dest='calibrate.tr_grid', type=float, nargs='+')
    calibrate_cmd.add_argument('--corpus-size', dest='calibrate.corpus_size', type=int)
    calibrate_cmd.add_argument('--samples', dest='calibrate.samples', type=int, help='reverse samples per grid point')

    benchmark = subparsers.add_parser('benchmark', parents=[common, driver], help='classical time to target')
    benchmark.add_argument('--samples', dest='benchmark.samples', type=int, help='reverse samples per QUBO')
    benchmark.add_argument('--max-time-us', dest='benchmark.max_time_us', type=float)
    benchmark.add_argument('--corpus-size', dest='benchmark.corpus_size', type=int)
    benchmark.add_argument('--parallel', dest='benchmark.parallel', action='store_true', default=None)
    benchmark.add_argument('--competitor', dest='benchmark.competitor',
                           help='external solver command speaking the JSON protocol')

    sweep = subparsers.add_parser('sweep', parents=[common, driver], help='forward-only vs hybrid at matched budgets')
    sweep.add_argument('--reverse-counts', dest='sweep.reverse_counts', type=int, nargs='+')
    sweep.add_argument('--seeds', dest='sweep.seeds', type=int, nargs='+')

    generate = subparsers.add_parser('generate', parents=[common], help='planted synthetic instance')
    generate.add_argument('--rows', dest='generate.rows', type=int)
    generate.add_argument('--cols', dest='generate.cols', type=int)
    generate.add_argument('--rank', dest='generate.rank', type=int)
    generate.add_argument('--noise-sigma', dest='generate.noise_sigma', type=float)
    generate.add_argument('--density', dest='generate.density', type=float)
    generate.add_argument('--output-format', dest='generate.output_format', choices=('csv', 'binary'))
    return parser


def overrides_from(args: argparse.Namespace):
    overrides = {}
    for dest, value in vars(args).items():
        if '.' in dest and value is not None:
            section, key = dest.split('.', 1)
            overrides.setdefault(section, {})[key] = value
    return overrides


def configure_logging(args: argparse.Namespace):
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT)
    logging.getLogger().setLevel(level)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args)
    try:
        file_settings = load_config_file(args.config) if args.config else None
        settings = merge_settings(file_settings, overrides_from(args))
        return COMMANDS[args.command](settings)
    except ConfigValidationError as e:
        for name, messages in sorted(e.errors.items()):
            logger.error(f"❌ Invalid setting {name}: {'; '.join(messages)}")
        return EXIT_USAGE
    except (MatrixFormatError, FileNotFoundError) as e:
        logger.error(f"❌ Data error: {str(e)}")
        return EXIT_DATA
    except Exception as e:
        logger.error(f"❌ {args.command} failed: {str(e)}")
        logger.debug(traceback.format_exc())
        return EXIT_RUNTIME


if __name__ == '__main__':
    sys.exit(main())
