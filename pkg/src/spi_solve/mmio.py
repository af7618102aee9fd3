"""Dense Matrix Market (array format) reader and writer.

Only ``%%MatrixMarket matrix array {real|complex} general`` is supported.
Values are written with 17 significant digits so a write/read round trip is
exact. Vectors are stored as single-column matrices.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import FormatError

_HEADER = "%%MatrixMarket matrix array {field} general\n"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_matrix(path, A, comment: str | None = None) -> None:
    A = np.asarray(A)
    if A.ndim == 1:
        A = A[:, None]
    if A.ndim != 2:
        raise ValueError(f"cannot write array of shape {A.shape}")
    complex_field = np.iscomplexobj(A)
    lines = [_HEADER.format(field="complex" if complex_field else "real")]
    if comment:
        lines.extend(f"% {c}\n" for c in comment.splitlines())
    lines.append(f"{A.shape[0]} {A.shape[1]}\n")
    # array format lists entries column by column
    flat = A.ravel(order="F")
    if complex_field:
        lines.extend(f"{_fmt(z.real)} {_fmt(z.imag)}\n" for z in flat)
    else:
        lines.extend(f"{_fmt(z)}\n" for z in flat)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.writelines(lines)


def write_vector(path, v, comment: str | None = None) -> None:
    write_matrix(path, np.asarray(v).reshape(-1, 1), comment)


def read_matrix(path) -> np.ndarray:
    """Read a dense Matrix Market file into a column-major array."""
    path = os.fspath(path)
    with open(path, encoding="ascii", errors="replace") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise FormatError("empty file", path, 1)
    header = lines[0].split()
    if len(header) != 5 or header[0].lower() != "%%matrixmarket":
        raise FormatError("missing %%MatrixMarket banner", path, 1)
    obj, fmt, field, sym = (h.lower() for h in header[1:])
    if obj != "matrix" or fmt != "array":
        raise FormatError(f"only 'matrix array' is supported, got '{obj} {fmt}'", path, 1)
    if field not in ("real", "complex", "integer"):
        raise FormatError(f"unsupported field '{field}'", path, 1)
    if sym != "general":
        raise FormatError(f"unsupported symmetry '{sym}'", path, 1)

    body = [
        (no, ln) for no, ln in enumerate(lines[1:], start=2) if ln.strip() and not ln.lstrip().startswith("%")
    ]
    if not body:
        raise FormatError("missing size line", path, len(lines))
    size_no, size_line = body[0]
    try:
        rows, cols = (int(t) for t in size_line.split())
    except ValueError:
        raise FormatError(f"bad size line {size_line!r}", path, size_no) from None
    if rows < 1 or cols < 1:
        raise FormatError(f"dimensions must be positive, got {rows} x {cols}", path, size_no)

    entries = body[1:]
    expected = rows * cols
    if len(entries) != expected:
        where = entries[expected][0] if len(entries) > expected else len(lines)
        raise FormatError(f"expected {expected} entries, found {len(entries)}", path, where)

    width = 2 if field == "complex" else 1
    vals = np.empty(expected, dtype=np.complex128 if field == "complex" else np.float64)
    for k, (no, ln) in enumerate(entries):
        toks = ln.split()
        if len(toks) != width:
            raise FormatError(f"expected {width} value(s), got {len(toks)}", path, no)
        try:
            nums = [float(t) for t in toks]
        except ValueError:
            raise FormatError(f"not a number: {ln.strip()!r}", path, no) from None
        vals[k] = complex(nums[0], nums[1]) if width == 2 else nums[0]
    return vals.reshape((rows, cols), order="F")


def read_vector(path) -> np.ndarray:
    M = read_matrix(path)
    if M.shape[1] != 1:
        raise FormatError(f"expected a single-column vector, got {M.shape[0]} x {M.shape[1]}", path)
    return M[:, 0].copy()
