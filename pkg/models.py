from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Union

import numpy as np


class NbmfError(Exception):
    """Base class for every error raised by the factorization toolkit."""


class DimensionMismatchError(NbmfError, ValueError):
    pass


class DegenerateMatrixError(NbmfError, ValueError):
    pass


class MatrixFormatError(NbmfError):
    """Malformed matrix input. `location` is a line number, byte offset or file name."""

    def __init__(self, path, detail: str, location: Optional[str] = None):
        self.path = str(path)
        self.detail = detail
        self.location = location
        where = f" ({location})" if location else ""
        super().__init__(f"{self.path}{where}: {detail}")


class ConfigValidationError(NbmfError):
    def __init__(self, errors: Dict[str, List[str]]):
        self.errors = errors
        lines = [f"{name}: {'; '.join(str(m) for m in messages)}" for name, messages in sorted(errors.items())]
        super().__init__("invalid configuration -> " + " | ".join(lines))


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class DenseMatrix:
    """Real n x m matrix stored row-major as float64 (A, B and residuals)."""

    values: np.ndarray

    def __post_init__(self):
        array = np.asarray(self.values, dtype=np.float64)
        if array.ndim != 2:
            raise DimensionMismatchError(f"expected a 2-D matrix, got {array.ndim} dimension(s)")
        if array.shape[0] < 1 or array.shape[1] < 1:
            raise DimensionMismatchError(f"matrix must be at least 1x1, got {array.shape}")
        object.__setattr__(self, 'values', _frozen(np.ascontiguousarray(array)))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[float]]) -> 'DenseMatrix':
        return cls(np.asarray(rows, dtype=np.float64))

    @classmethod
    def from_flat(cls, rows: int, cols: int, values: Sequence[float]) -> 'DenseMatrix':
        flat = np.asarray(values, dtype=np.float64)
        if flat.size != rows * cols:
            raise DimensionMismatchError(f"{flat.size} values cannot fill a {rows}x{cols} matrix")
        return cls(flat.reshape(rows, cols))

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self):
        return self.values.shape

    def column(self, j: int) -> np.ndarray:
        return self.values[:, j].copy()

    def flat(self) -> List[float]:
        return self.values.ravel().tolist()

    def to_dict(self) -> Dict:
        return {'rows': self.rows, 'cols': self.cols, 'values': self.flat()}

    def __eq__(self, other):
        if not isinstance(other, DenseMatrix):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.values, other.values)

    def __repr__(self):
        return f'<DenseMatrix {self.rows}x{self.cols}>'


@dataclass(frozen=True, eq=False)
class BinaryMatrix:
    """k x m matrix of {0,1} entries (the factor C)."""

    bits: np.ndarray

    def __post_init__(self):
        array = np.asarray(self.bits)
        if array.ndim != 2:
            raise DimensionMismatchError(f"expected a 2-D matrix, got {array.ndim} dimension(s)")
        if array.shape[0] < 1 or array.shape[1] < 1:
            raise DimensionMismatchError(f"matrix must be at least 1x1, got {array.shape}")
        if not np.isin(array, (0, 1)).all():
            raise ValueError("binary matrix entries must be 0 or 1")
        object.__setattr__(self, 'bits', _frozen(np.ascontiguousarray(array, dtype=np.uint8)))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> 'BinaryMatrix':
        return cls(np.asarray(rows))

    @classmethod
    def from_flat(cls, rows: int, cols: int, bits: Sequence[int]) -> 'BinaryMatrix':
        flat = np.asarray(bits)
        if flat.size != rows * cols:
            raise DimensionMismatchError(f"{flat.size} bits cannot fill a {rows}x{cols} matrix")
        return cls(flat.reshape(rows, cols))

    @property
    def rows(self) -> int:
        return self.bits.shape[0]

    @property
    def cols(self) -> int:
        return self.bits.shape[1]

    @property
    def shape(self):
        return self.bits.shape

    def column(self, j: int) -> np.ndarray:
        return self.bits[:, j].copy()

    def with_column(self, j: int, column: np.ndarray) -> 'BinaryMatrix':
        bits = self.bits.copy()
        bits[:, j] = column
        return BinaryMatrix(bits)

    def as_float(self) -> np.ndarray:
        return self.bits.astype(np.float64)

    def flat(self) -> List[int]:
        return self.bits.ravel().tolist()

    def to_dict(self) -> Dict:
        return {'rows': self.rows, 'cols': self.cols, 'bits': self.flat()}

    def __eq__(self, other):
        if not isinstance(other, BinaryMatrix):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.bits, other.bits)

    def __repr__(self):
        return f'<BinaryMatrix {self.rows}x{self.cols}>'


MatrixLike = Union[DenseMatrix, np.ndarray]


def frobenius_norm(M: MatrixLike) -> float:
    values = M.values if isinstance(M, DenseMatrix) else np.asarray(M, dtype=np.float64)
    return float(np.sqrt(np.sum(values * values)))


def relative_residual(A: DenseMatrix, B: DenseMatrix, C: BinaryMatrix) -> float:
    """||A - B C||_F / ||A||_F"""
    if B.rows != A.rows or C.cols != A.cols or B.cols != C.rows:
        raise DimensionMismatchError(
            f"cannot compare A {A.shape} with B {B.shape} x C {C.shape}"
        )
    norm_a = frobenius_norm(A)
    if norm_a == 0.0:
        raise DegenerateMatrixError("relative residual is undefined for an all-zero A")
    return frobenius_norm(A.values - B.values @ C.as_float()) / norm_a


def percent_change_b(B_prev: DenseMatrix, B_next: DenseMatrix) -> float:
    if B_prev.shape != B_next.shape:
        raise DimensionMismatchError(f"B changed shape: {B_prev.shape} -> {B_next.shape}")
    norm_prev = frobenius_norm(B_prev)
    if norm_prev == 0.0:
        raise DegenerateMatrixError("previous B has zero norm")
    return frobenius_norm(B_next.values - B_prev.values) / norm_prev


def hamming_distance(C_prev: BinaryMatrix, C_next: BinaryMatrix) -> int:
    if C_prev.shape != C_next.shape:
        raise DimensionMismatchError(f"C changed shape: {C_prev.shape} -> {C_next.shape}")
    return int(np.count_nonzero(C_prev.bits != C_next.bits))


def percent_change_c(C_prev: BinaryMatrix, C_next: BinaryMatrix) -> float:
    return hamming_distance(C_prev, C_next) / (C_prev.rows * C_prev.cols)
