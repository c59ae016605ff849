"""
Matrix Market reader/writer for square complex general matrices.

Supported headers:
    %%MatrixMarket matrix coordinate complex general   ("i j re im", 1-based)
    %%MatrixMarket matrix array complex general        ("re im", column-major)
"""

import logging
from pathlib import Path
from typing import Iterator, List, Literal, Tuple, Union

import numpy as np

from app.core.exceptions import MatrixMarketError, TextDecodeError
from app.utils.misc import format_float, read_text

logger = logging.getLogger(__name__)

BANNER = "%%MatrixMarket"
PathLike = Union[str, Path]


def _content_lines(lines: List[str]) -> Iterator[Tuple[int, List[str]]]:
    # (1-based line number, tokens) for every non-blank, non-comment line after the header
    for number, line in enumerate(lines[1:], start=2):
        stripped = line.strip()
        if not stripped or stripped.startswith("%"):
            continue
        yield number, stripped.split()


def _parse_header(line: str) -> str:
    parts = line.strip().split()
    if len(parts) != 5 or parts[0] != BANNER:
        raise MatrixMarketError(f"malformed header: {line.strip()!r}")
    obj, layout, field, symmetry = (p.lower() for p in parts[1:])
    if obj != "matrix":
        raise MatrixMarketError(f"unsupported object '{obj}': expected 'matrix'")
    if layout not in ("coordinate", "array"):
        raise MatrixMarketError(f"unsupported format '{layout}': expected 'coordinate' or 'array'")
    if field != "complex":
        raise MatrixMarketError(f"unsupported field '{field}': only 'complex' matrices are accepted")
    if symmetry != "general":
        raise MatrixMarketError(f"unsupported symmetry '{symmetry}': only 'general' is accepted")
    return layout


def _to_ints(tokens: List[str], number: int) -> List[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise MatrixMarketError(f"line {number}: expected integers, got {' '.join(tokens)!r}") from None


def _to_complex(re_text: str, im_text: str, number: int) -> complex:
    try:
        value = complex(float(re_text), float(im_text))
    except ValueError:
        raise MatrixMarketError(f"line {number}: cannot parse complex value '{re_text} {im_text}'") from None
    if not np.isfinite(value):
        raise MatrixMarketError(f"line {number}: non-finite value")
    return value


def read_matrix_market(path: PathLike) -> np.ndarray:
    try:
        lines = read_text(path).splitlines()
    except TextDecodeError as exc:
        raise MatrixMarketError(str(exc)) from None
    if not lines:
        raise MatrixMarketError(f"{path}: empty file")
    layout = _parse_header(lines[0])
    body = _content_lines(lines)

    try:
        number, size_tokens = next(body)
    except StopIteration:
        raise MatrixMarketError(f"{path}: missing size line") from None
    expected_size = 3 if layout == "coordinate" else 2
    if len(size_tokens) != expected_size:
        raise MatrixMarketError(f"line {number}: size line needs {expected_size} integers")
    sizes = _to_ints(size_tokens, number)
    rows, cols = sizes[0], sizes[1]
    if rows < 1 or cols < 1:
        raise MatrixMarketError(f"line {number}: dimensions must be positive, got {rows}x{cols}")
    if rows != cols:
        raise MatrixMarketError(f"matrix must be square, got {rows}x{cols}")

    matrix = np.zeros((rows, cols), dtype=complex)
    count = 0
    if layout == "coordinate":
        nnz = sizes[2]
        for number, tokens in body:
            if len(tokens) != 4:
                raise MatrixMarketError(f"line {number}: coordinate entry needs 'i j re im'")
            i, j = _to_ints(tokens[:2], number)
            if not (1 <= i <= rows and 1 <= j <= cols):
                raise MatrixMarketError(f"line {number}: index ({i}, {j}) out of range for {rows}x{cols}")
            matrix[i - 1, j - 1] = _to_complex(tokens[2], tokens[3], number)
            count += 1
        if count != nnz:
            raise MatrixMarketError(f"expected {nnz} entries, found {count}")
    else:
        flat = np.zeros(rows * cols, dtype=complex)
        for number, tokens in body:
            if len(tokens) != 2:
                raise MatrixMarketError(f"line {number}: array entry needs 're im'")
            if count >= flat.size:
                raise MatrixMarketError(f"line {number}: more than {flat.size} entries")
            flat[count] = _to_complex(tokens[0], tokens[1], number)
            count += 1
        if count != flat.size:
            raise MatrixMarketError(f"expected {flat.size} entries, found {count}")
        matrix = flat.reshape((rows, cols), order="F")

    logger.info("Read %dx%d %s matrix from %s", rows, cols, layout, path)
    return matrix


def write_matrix_market(
    path: PathLike,
    matrix: np.ndarray,
    layout: Literal["coordinate", "array"] = "array",
) -> None:
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise MatrixMarketError(f"matrix must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise MatrixMarketError("matrix has non-finite entries")
    rows, cols = m.shape

    out = [f"{BANNER} matrix {layout} complex general"]
    if layout == "coordinate":
        col_idx, row_idx = np.nonzero(m.T)  # column-major entry order
        out.append(f"{rows} {cols} {col_idx.size}")
        for j, i in zip(col_idx, row_idx):
            z = m[i, j]
            out.append(f"{i + 1} {j + 1} {format_float(z.real)} {format_float(z.imag)}")
    elif layout == "array":
        out.append(f"{rows} {cols}")
        for z in m.flatten(order="F"):
            out.append(f"{format_float(z.real)} {format_float(z.imag)}")
    else:
        raise ValueError(f"unknown layout {layout!r}")

    with open(path, "w", encoding="ascii") as file:
        file.write("\n".join(out) + "\n")
