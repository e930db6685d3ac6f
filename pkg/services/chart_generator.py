import logging
from pathlib import Path
from typing import Dict, Optional, Sequence

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd
import seaborn as sns

logger = logging.getLogger(__name__)

FORWARD_COLOR = '#6C757D'
HYBRID_COLOR = '#FF6B35'


class ChartGenerator:
    def __init__(self, out_dir):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        plt.style.use('seaborn-v0_8')
        sns.set_palette("husl")

    def _save(self, fig, name: str) -> Path:
        path = self.out_dir / name
        fig.savefig(path, format='png', dpi=150, bbox_inches='tight', facecolor='white', edgecolor='none')
        plt.close(fig)
        logger.info(f"✅ Chart written to {path}")
        return path

    def create_residual_history_chart(self, histories: Dict[str, pd.DataFrame], name='residual_history.png'):
        """Relative residual per iteration, one line per run label."""
        try:
            fig, ax = plt.subplots(figsize=(10, 6))
            for label, frame in histories.items():
                color = HYBRID_COLOR if 'hybrid' in label else FORWARD_COLOR
                ax.plot(frame['iteration'], frame['relative_residual'], marker='o', linewidth=2,
                        label=label, color=color)
            ax.set_xlabel('Iteration', fontweight='bold')
            ax.set_ylabel('Relative residual ||A - BC|| / ||A||', fontweight='bold')
            ax.set_title('Factorization Quality', fontsize=14, fontweight='bold', pad=20)
            ax.grid(True, alpha=0.3)
            ax.legend()
            return self._save(fig, name)
        except Exception as e:
            logger.error(f"Error creating residual chart: {str(e)}")
            return self._create_fallback_chart("Residual Chart\nNot Available", name)

    def create_change_chart(self, history: pd.DataFrame, name='factor_change.png'):
        """% change in B and in C between consecutive iterations."""
        try:
            fig, (ax_b, ax_c) = plt.subplots(1, 2, figsize=(12, 5))
            ax_b.plot(history['iteration'], history['pct_change_b'], marker='o', color=FORWARD_COLOR)
            ax_b.set_title('% change in B', fontweight='bold')
            ax_c.plot(history['iteration'], history['pct_change_c'], marker='o', color=HYBRID_COLOR)
            ax_c.set_title('% change in C', fontweight='bold')
            for ax in (ax_b, ax_c):
                ax.set_xlabel('Iteration', fontweight='bold')
                ax.grid(True, alpha=0.3)
            plt.tight_layout()
            return self._save(fig, name)
        except Exception as e:
            logger.error(f"Error creating change chart: {str(e)}")
            return self._create_fallback_chart("Change Chart\nNot Available", name)

    def create_calibration_chart(self, report: pd.DataFrame, name='calibration.png'):
        """Stacked better / worse / same sample fractions against r, one panel per t_r."""
        try:
            t_r_values = sorted(report['t_r_us'].unique())
            fig, axes = plt.subplots(1, len(t_r_values), figsize=(6 * len(t_r_values), 5), squeeze=False)
            for ax, t_r in zip(axes[0], t_r_values):
                rows = report[report['t_r_us'] == t_r].sort_values('r')
                ax.stackplot(rows['r'], rows['mean_better'], rows['mean_worse'], rows['mean_same'],
                             labels=['better', 'worse', 'same'], colors=['#2E8B57', '#C0392B', '#2E86C1'], alpha=0.8)
                ax.set_xlim(rows['r'].min(), rows['r'].max())
                ax.set_ylim(0, 1)
                ax.set_xlabel('Reversal distance r', fontweight='bold')
                ax.set_ylabel('Fraction of samples', fontweight='bold')
                ax.set_title(f't_r = {t_r:g} us', fontweight='bold')
                ax.legend(loc='upper right')
            plt.tight_layout()
            return self._save(fig, name)
        except Exception as e:
            logger.error(f"Error creating calibration chart: {str(e)}")
            return self._create_fallback_chart("Calibration Chart\nNot Available", name)

    def create_benchmark_chart(self, records: pd.DataFrame, anneal_time_us: float, name='benchmark.png'):
        """Classical time to target per improved QUBO against the simulated anneal cost."""
        try:
            shown = records[~records['excluded_from_plot'] & records['reached']]
            if shown.empty:
                return self._create_fallback_chart("No Improved QUBOs\nTo Plot", name)
            fig, ax = plt.subplots(figsize=(10, 6))
            ax.scatter(np.arange(len(shown)), shown['time_to_target_us'], color=HYBRID_COLOR,
                       label='classical time to target')
            ax.axhline(anneal_time_us, color=FORWARD_COLOR, linestyle='--', label='annealing time per QUBO')
            ax.axhline(shown['simulated_qpu_time_us'].iloc[0], color='#2E86C1', linestyle=':',
                       label='QPU access time per QUBO')
            ax.set_yscale('log')
            ax.set_xlabel('Improved QUBO', fontweight='bold')
            ax.set_ylabel('Time (us)', fontweight='bold')
            ax.set_title('Time to Target', fontsize=14, fontweight='bold', pad=20)
            ax.grid(True, alpha=0.3)
            ax.legend()
            return self._save(fig, name)
        except Exception as e:
            logger.error(f"Error creating benchmark chart: {str(e)}")
            return self._create_fallback_chart("Benchmark Chart\nNot Available", name)

    def create_sweep_chart(self, summary: pd.DataFrame, name='budget_sweep.png'):
        """Mean final residual of both variants against their mean QPU access time."""
        try:
            fig, ax = plt.subplots(figsize=(10, 6))
            ax.plot(summary['forward_qpu_time_us'] / 1e6, summary['forward_residual'], marker='o',
                    linewidth=2, color=FORWARD_COLOR, label='forward only')
            ax.plot(summary['hybrid_qpu_time_us'] / 1e6, summary['hybrid_residual'], marker='s',
                    linewidth=2, color=HYBRID_COLOR, label='forward then reverse')
            for _, row in summary.iterrows():
                ax.annotate(f"R={int(row['reverse_samples'])}", (row['hybrid_qpu_time_us'] / 1e6, row['hybrid_residual']),
                            textcoords="offset points", xytext=(0, 10), ha='center')
            ax.set_xlabel('Simulated QPU access time (s)', fontweight='bold')
            ax.set_ylabel('Final relative residual', fontweight='bold')
            ax.set_title('Residual at Matched Budget', fontsize=14, fontweight='bold', pad=20)
            ax.grid(True, alpha=0.3)
            ax.legend()
            return self._save(fig, name)
        except Exception as e:
            logger.error(f"Error creating sweep chart: {str(e)}")
            return self._create_fallback_chart("Sweep Chart\nNot Available", name)

    def _create_fallback_chart(self, message: str, name: str, width=400, height=300):
        """Placeholder image when a chart cannot be drawn"""
        plt.close('all')
        try:
            fig, ax = plt.subplots(figsize=(width / 100, height / 100))
            ax.text(0.5, 0.5, message, ha='center', va='center',
                    transform=ax.transAxes, fontsize=12,
                    bbox=dict(boxstyle="round,pad=0.3", facecolor="lightgray"))
            ax.set_xticks([])
            ax.set_yticks([])
            return self._save(fig, name)
        except Exception as e:
            logger.warning(f"⚠️ Fallback chart {name} failed too: {str(e)}")
            return None


def render_all(out_dir, histories: Optional[Dict[str, pd.DataFrame]] = None,
               calibration: Optional[pd.DataFrame] = None,
               benchmark: Optional[pd.DataFrame] = None, anneal_time_us: float = 0.0,
               sweep_summary: Optional[pd.DataFrame] = None) -> Sequence[Path]:
    charts = ChartGenerator(out_dir)
    written = []
    if histories:
        written.append(charts.create_residual_history_chart(histories))
        for label, frame in histories.items():
            written.append(charts.create_change_chart(frame, name=f'factor_change_{label}.png'))
    if calibration is not None:
        written.append(charts.create_calibration_chart(calibration))
    if benchmark is not None:
        written.append(charts.create_benchmark_chart(benchmark, anneal_time_us))
    if sweep_summary is not None:
        written.append(charts.create_sweep_chart(sweep_summary))
    return [path for path in written if path is not None]
