import numpy as np
import pytest
from PIL import Image

from models import DenseMatrix, MatrixFormatError
from utils.matrix_io import (FORMAT_VERSION, HEADER, MAGIC, export_matrix, generate_synthetic, ingest,
                             read_binary_matrix, read_csv_matrix, read_pgm_directory)


def test_csv_values_survive_export(tmp_path):
    matrix = DenseMatrix.from_rows([[0.1, 2.0, 1e-17], [3.5, 0.0, 1 / 3]])
    target = tmp_path / 'a.csv'
    export_matrix(matrix, target, 'csv')
    assert ingest(target, 'csv') == matrix


def test_csv_reports_line_of_bad_value(tmp_path):
    target = tmp_path / 'a.csv'
    target.write_text("1,2,3\n4,five,6\n")
    with pytest.raises(MatrixFormatError) as error:
        read_csv_matrix(target)
    assert error.value.location == 'line 2'
    assert "'five'" in error.value.detail
    assert 'line 2' in str(error.value)


def test_csv_reports_short_row(tmp_path):
    target = tmp_path / 'a.csv'
    target.write_text("1,2,3\n4,5,6\n7,8\n")
    with pytest.raises(MatrixFormatError) as error:
        read_csv_matrix(target)
    assert error.value.location == 'line 3'
    assert 'missing value' in error.value.detail


@pytest.mark.parametrize('text, location', [("1,inf\n3,4\n", 'line 1'), ("1,2\n-inf,4\n", 'line 2')])
def test_csv_rejects_infinite_values(tmp_path, text, location):
    target = tmp_path / 'a.csv'
    target.write_text(text)
    with pytest.raises(MatrixFormatError) as error:
        read_csv_matrix(target)
    assert error.value.location == location
    assert 'non-finite' in error.value.detail


def test_csv_with_invalid_bytes_reports_offset(tmp_path):
    target = tmp_path / 'a.csv'
    target.write_bytes(b'1,2\n3,\xff4\n')
    with pytest.raises(MatrixFormatError) as error:
        read_csv_matrix(target)
    assert error.value.location == 'offset 6'
    assert 'line 2' in error.value.detail


def test_binary_rejects_non_finite_values(tmp_path):
    target = tmp_path / 'a.bin'
    values = np.array([1.0, 2.0, np.nan, 4.0], dtype='<f8')
    target.write_bytes(HEADER.pack(MAGIC, FORMAT_VERSION, 2, 2) + values.tobytes())
    with pytest.raises(MatrixFormatError) as error:
        read_binary_matrix(target)
    assert error.value.location == f'offset {HEADER.size + 16}'


def test_empty_csv_is_a_format_error(tmp_path):
    target = tmp_path / 'a.csv'
    target.write_text("")
    with pytest.raises(MatrixFormatError):
        read_csv_matrix(target)


def test_binary_layout(tmp_path):
    matrix = DenseMatrix.from_rows([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
    target = tmp_path / 'a.bin'
    export_matrix(matrix, target, 'binary')
    payload = target.read_bytes()
    assert payload[:4] == MAGIC
    assert HEADER.unpack_from(payload) == (MAGIC, FORMAT_VERSION, 2, 3)
    assert len(payload) == HEADER.size + 6 * 8
    assert np.frombuffer(payload, dtype='<f8', offset=HEADER.size)[3] == 4.0
    assert read_binary_matrix(target) == matrix


@pytest.mark.parametrize('payload, location', [
    (b'NBM', 'offset 0'),
    (HEADER.pack(b'XXXX', 1, 1, 1) + bytes(8), 'offset 0'),
    (HEADER.pack(MAGIC, 2, 1, 1) + bytes(8), 'offset 4'),
    (HEADER.pack(MAGIC, 1, 0, 3), 'offset 6'),
    (HEADER.pack(MAGIC, 1, 2, 2) + bytes(24), f'offset {HEADER.size + 24}'),
])
def test_binary_errors_carry_offsets(tmp_path, payload, location):
    target = tmp_path / 'bad.bin'
    target.write_bytes(payload)
    with pytest.raises(MatrixFormatError) as error:
        read_binary_matrix(target)
    assert error.value.location == location


def _write_pgm(path, pixels):
    Image.fromarray(np.asarray(pixels, dtype=np.uint8), mode='L').save(path)


def test_pgm_directory_columns_follow_file_names(tmp_path):
    rng = np.random.default_rng(0)
    images = {name: rng.integers(0, 256, (19, 19)) for name in ('b.pgm', 'c.pgm', 'a.pgm')}
    for name, pixels in images.items():
        _write_pgm(tmp_path / name, pixels)
    (tmp_path / 'notes.txt').write_text('ignored')

    matrix = read_pgm_directory(tmp_path)
    assert matrix.shape == (361, 3)
    for j, name in enumerate(['a.pgm', 'b.pgm', 'c.pgm']):
        np.testing.assert_allclose(matrix.column(j), images[name].ravel() / 255.0)
    assert matrix.values.max() <= 1.0


def test_pgm_directory_rejects_mixed_sizes(tmp_path):
    _write_pgm(tmp_path / 'a.pgm', np.zeros((4, 4)))
    _write_pgm(tmp_path / 'b.pgm', np.zeros((5, 4)))
    with pytest.raises(MatrixFormatError) as error:
        read_pgm_directory(tmp_path)
    assert error.value.location == 'b.pgm'


def test_pgm_directory_without_images(tmp_path):
    with pytest.raises(MatrixFormatError):
        read_pgm_directory(tmp_path)


def test_ingest_transposes_and_checks_inputs(tmp_path):
    matrix = DenseMatrix.from_rows([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
    target = tmp_path / 'a.bin'
    export_matrix(matrix, target, 'binary')
    assert ingest(target, 'binary', transpose=True).shape == (2, 3)
    with pytest.raises(FileNotFoundError) as error:
        ingest(tmp_path / 'missing.csv', 'csv')
    assert 'missing.csv' in str(error.value)
    with pytest.raises(ValueError):
        ingest(target, 'parquet')
    with pytest.raises(ValueError):
        export_matrix(matrix, tmp_path / 'x', 'pgm-dir')


def test_generate_synthetic_is_planted_and_reproducible():
    A, B, C = generate_synthetic(30, 20, 5, seed=3)
    np.testing.assert_allclose(A.values, B.values @ C.as_float())
    assert (B.values >= 0).all()
    again, _, _ = generate_synthetic(30, 20, 5, seed=3)
    assert again == A

    noisy, _, _ = generate_synthetic(30, 20, 5, noise_sigma=0.5, seed=3)
    assert (noisy.values >= 0).all()
    assert noisy != A


@pytest.mark.parametrize('kwargs', [
    dict(n=4, m=4, k=5),
    dict(n=4, m=4, k=2, density=1.0),
    dict(n=4, m=4, k=2, noise_sigma=-0.1),
])
def test_generate_synthetic_validation(kwargs):
    with pytest.raises(ValueError):
        generate_synthetic(**kwargs)
