# Vector CSV: one "re,im" pair per line, blank lines and '#' comments ignored
from pathlib import Path
from typing import Union

import numpy as np

from app.core.exceptions import TextDecodeError, VectorCSVError
from app.core.linalg import ComplexVec
from app.utils.misc import format_float, read_text

PathLike = Union[str, Path]


def parse_vector_csv(text: str) -> ComplexVec:
    entries = []
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = [p.strip() for p in stripped.split(",")]
        if len(parts) != 2:
            raise VectorCSVError(f"expected 're,im', got {stripped!r}", number)
        try:
            value = complex(float(parts[0]), float(parts[1]))
        except ValueError:
            raise VectorCSVError(f"cannot parse {stripped!r} as 're,im'", number) from None
        if not np.isfinite(value):
            raise VectorCSVError("non-finite entry", number)
        entries.append(value)
    if not entries:
        raise VectorCSVError("file contains no entries", 1)
    return ComplexVec(entries=entries)


def read_vector_csv(path: PathLike) -> ComplexVec:
    try:
        text = read_text(path)
    except TextDecodeError as exc:
        raise VectorCSVError("not valid UTF-8 text", exc.line) from None
    return parse_vector_csv(text)


def format_vector_csv(v: ComplexVec) -> str:
    return "".join(f"{format_float(z.real)},{format_float(z.imag)}\n" for z in v.entries)


def write_vector_csv(path: PathLike, v: ComplexVec) -> None:
    with open(path, "w", encoding="utf-8") as file:
        file.write(format_vector_csv(v))
