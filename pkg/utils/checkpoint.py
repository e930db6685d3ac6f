import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Callable, Dict, Tuple

import pandas as pd

from models import BinaryMatrix, DenseMatrix
from services.nbmf_driver import DriverConfig, FactorizationState, IterationRecord

logger = logging.getLogger(__name__)

HISTORY_COLUMNS = ['iteration', 'relative_residual', 'pct_change_b', 'pct_change_c', 'cumulative_qpu_time_us']


def atomic_write_text(path, text: str):
    """Write to a sibling temp file, then rename over `path`."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    handle, temp_name = tempfile.mkstemp(prefix=f'.{target.name}.', dir=target.parent)
    try:
        with os.fdopen(handle, 'w', encoding='utf-8') as stream:
            stream.write(text)
            stream.flush()
            os.fsync(stream.fileno())
        os.replace(temp_name, target)
    except Exception:
        if os.path.exists(temp_name):
            os.unlink(temp_name)
        raise


def checkpoint_payload(state: FactorizationState, cfg: DriverConfig) -> Dict:
    return {
        'iteration': state.iteration,
        'k': state.C.rows,
        'B': state.B.to_dict(),
        'C': state.C.to_dict(),
        'relative_residual': state.relative_residual,
        'history': [record.to_dict() for record in state.history],
        'config': cfg.to_dict(),
        'master_seed': cfg.master_seed,
    }


def save_checkpoint(state: FactorizationState, cfg: DriverConfig, path):
    atomic_write_text(path, json.dumps(checkpoint_payload(state, cfg), indent=2, allow_nan=True))
    logger.debug(f"checkpoint for iteration {state.iteration} written to {path}")


def checkpoint_writer(cfg: DriverConfig, path) -> Callable[[FactorizationState], None]:
    """`on_iteration` hook that rewrites the checkpoint after every iteration."""
    def write(state: FactorizationState):
        save_checkpoint(state, cfg, path)
    return write


def load_checkpoint(path) -> Tuple[FactorizationState, Dict]:
    """Restore the state and the config echo written by `save_checkpoint`."""
    with open(path, 'r', encoding='utf-8') as stream:
        payload = json.load(stream)
    B = DenseMatrix.from_flat(payload['B']['rows'], payload['B']['cols'], payload['B']['values'])
    C = BinaryMatrix.from_flat(payload['C']['rows'], payload['C']['cols'], payload['C']['bits'])
    history = tuple(IterationRecord(**record) for record in payload['history'])
    if len(history) != payload['iteration']:
        raise ValueError(f"checkpoint {path} holds {len(history)} history rows for iteration {payload['iteration']}")
    state = FactorizationState(payload['iteration'], B, C, payload['relative_residual'], history)
    return state, payload.get('config', {})


def history_frame(state: FactorizationState) -> pd.DataFrame:
    frame = pd.DataFrame([record.to_dict() for record in state.history])
    if frame.empty:
        return pd.DataFrame(columns=HISTORY_COLUMNS)
    return frame[HISTORY_COLUMNS]


def write_history_csv(state: FactorizationState, path):
    atomic_write_text(path, history_frame(state).to_csv(index=False))
