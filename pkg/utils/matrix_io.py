"""Matrix ingestion, export and synthetic planted instances.

Binary layout: b"NBMF", u16 version (1), u32 rows, u32 cols, then rows*cols float64,
all little-endian, row-major.
"""
from pathlib import Path
from typing import Tuple
import io
import logging
import struct

import numpy as np
import pandas as pd
from PIL import Image, UnidentifiedImageError

from models import BinaryMatrix, DenseMatrix, MatrixFormatError

logger = logging.getLogger(__name__)

MAGIC = b'NBMF'
FORMAT_VERSION = 1
HEADER = struct.Struct('<4sHII')
FORMATS = ('csv', 'binary', 'pgm-dir')
PGM_SUFFIXES = ('.pgm',)


def read_csv_matrix(path) -> DenseMatrix:
    path = Path(path)
    payload = path.read_bytes()
    try:
        text = payload.decode('utf-8')
    except UnicodeDecodeError as e:
        line = payload.count(b'\n', 0, e.start) + 1
        raise MatrixFormatError(path, f"byte 0x{payload[e.start]:02x} on line {line} is not UTF-8 text",
                                location=f"offset {e.start}")
    try:
        frame = pd.read_csv(io.StringIO(text), header=None, dtype=str, skip_blank_lines=True)
    except pd.errors.EmptyDataError:
        raise MatrixFormatError(path, "file is empty")
    except pd.errors.ParserError as e:
        raise MatrixFormatError(path, str(e))

    numeric = frame.apply(lambda column: pd.to_numeric(column.str.strip(), errors='coerce'))
    bad = numeric.isna()
    if bad.to_numpy().any():
        row, col = map(int, np.argwhere(bad.to_numpy())[0])
        raw = frame.iat[row, col]
        detail = "missing value" if pd.isna(raw) else f"not a number: {raw!r}"
        raise MatrixFormatError(path, f"{detail} in column {col + 1}", location=f"line {row + 1}")
    values = numeric.to_numpy(dtype=np.float64)
    infinite = ~np.isfinite(values)
    if infinite.any():
        row, col = map(int, np.argwhere(infinite)[0])
        raise MatrixFormatError(path, f"non-finite value {frame.iat[row, col]!r} in column {col + 1}",
                                location=f"line {row + 1}")
    return DenseMatrix(values)


def write_csv_matrix(matrix: DenseMatrix, path):
    pd.DataFrame(matrix.values).to_csv(path, header=False, index=False, float_format='%.17g')


def read_binary_matrix(path) -> DenseMatrix:
    path = Path(path)
    payload = path.read_bytes()
    if len(payload) < HEADER.size:
        raise MatrixFormatError(path, f"truncated header ({len(payload)} of {HEADER.size} bytes)", location="offset 0")
    magic, version, rows, cols = HEADER.unpack_from(payload, 0)
    if magic != MAGIC:
        raise MatrixFormatError(path, f"bad magic {magic!r}, expected {MAGIC!r}", location="offset 0")
    if version != FORMAT_VERSION:
        raise MatrixFormatError(path, f"unsupported format version {version}", location="offset 4")
    if rows < 1 or cols < 1:
        raise MatrixFormatError(path, f"invalid dimensions {rows}x{cols}", location="offset 6")
    expected = HEADER.size + rows * cols * 8
    if len(payload) != expected:
        raise MatrixFormatError(
            path, f"expected {expected} bytes for a {rows}x{cols} matrix, found {len(payload)}",
            location=f"offset {min(len(payload), expected)}",
        )
    values = np.frombuffer(payload, dtype='<f8', count=rows * cols, offset=HEADER.size)
    infinite = np.flatnonzero(~np.isfinite(values))
    if infinite.size:
        raise MatrixFormatError(path, f"non-finite value {values[infinite[0]]}",
                                location=f"offset {HEADER.size + 8 * int(infinite[0])}")
    return DenseMatrix(values.reshape(rows, cols).astype(np.float64))


def write_binary_matrix(matrix: DenseMatrix, path):
    buffer = io.BytesIO()
    buffer.write(HEADER.pack(MAGIC, FORMAT_VERSION, matrix.rows, matrix.cols))
    buffer.write(np.ascontiguousarray(matrix.values, dtype='<f8').tobytes())
    Path(path).write_bytes(buffer.getvalue())


def _pgm_scale(image: Image.Image) -> float:
    if image.mode == 'L':
        return 255.0
    if image.mode in ('I', 'I;16', 'I;16B'):
        return 65535.0
    raise ValueError(f"unsupported PGM pixel mode {image.mode}")


def read_pgm_directory(path) -> DenseMatrix:
    """One column per P5 PGM image, flattened row-major, greyscale scaled to [0, 1].

    Files are ordered by name.
    """
    directory = Path(path)
    if not directory.is_dir():
        raise MatrixFormatError(directory, "not a directory")
    files = sorted(p for p in directory.iterdir() if p.suffix.lower() in PGM_SUFFIXES)
    if not files:
        raise MatrixFormatError(directory, "no .pgm files found")

    columns, expected_size = [], None
    for file in files:
        try:
            with Image.open(file) as image:
                if image.format != 'PPM' or image.mode not in ('L', 'I', 'I;16', 'I;16B'):
                    raise MatrixFormatError(directory, f"not a greyscale PGM ({image.format}, {image.mode})",
                                            location=file.name)
                scale = _pgm_scale(image)
                pixels = np.asarray(image, dtype=np.float64)
                size = image.size
        except (UnidentifiedImageError, OSError) as e:
            raise MatrixFormatError(directory, f"unreadable image: {e}", location=file.name)
        if expected_size is None:
            expected_size = size
        elif size != expected_size:
            raise MatrixFormatError(
                directory, f"image is {size[0]}x{size[1]} but earlier images are {expected_size[0]}x{expected_size[1]}",
                location=file.name,
            )
        columns.append(pixels.ravel() / scale)
    logger.info(f"loaded {len(files)} images of {expected_size[0]}x{expected_size[1]} pixels from {directory}")
    return DenseMatrix(np.column_stack(columns))


def ingest(path, format: str, transpose: bool = False) -> DenseMatrix:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"input not found: {path}")
    if format == 'csv':
        matrix = read_csv_matrix(path)
    elif format == 'binary':
        matrix = read_binary_matrix(path)
    elif format == 'pgm-dir':
        matrix = read_pgm_directory(path)
    else:
        raise ValueError(f"unknown input format {format!r}; expected one of {FORMATS}")
    return DenseMatrix(matrix.values.T) if transpose else matrix


def export_matrix(matrix: DenseMatrix, path, format: str):
    if format == 'csv':
        write_csv_matrix(matrix, path)
    elif format == 'binary':
        write_binary_matrix(matrix, path)
    else:
        raise ValueError(f"cannot export to {format!r}; expected csv or binary")


def generate_synthetic(n: int, m: int, k: int, noise_sigma: float = 0.0, density: float = 0.5,
                       seed: int = 0) -> Tuple[DenseMatrix, DenseMatrix, BinaryMatrix]:
    """Planted A = B* C* + noise (clipped at 0) with B* = |N(0,1)| and C* ~ Bernoulli(density)."""
    if n < 1 or m < 1 or k < 1 or k > min(n, m):
        raise ValueError(f"need 1 <= k <= min(n, m), got n={n}, m={m}, k={k}")
    if not 0 < density < 1:
        raise ValueError(f"density must be in (0, 1), got {density}")
    if noise_sigma < 0:
        raise ValueError(f"noise_sigma must be nonnegative, got {noise_sigma}")
    rng = np.random.default_rng(seed)
    basis = np.abs(rng.standard_normal((n, k)))
    mixing = (rng.random((k, m)) < density).astype(np.uint8)
    clean = basis @ mixing
    if noise_sigma > 0:
        clean = np.maximum(clean + rng.normal(0.0, noise_sigma, size=clean.shape), 0.0)
    return DenseMatrix(clean), DenseMatrix(basis), BinaryMatrix(mixing)
