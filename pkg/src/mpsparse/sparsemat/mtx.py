"""Matrix Market (coordinate) reader and writer."""

from __future__ import annotations

import gzip
import io
import os

import numpy as np

from .formats import ComplexSparseMatrix, CooMatrix, CsrMatrix

FIELDS = ("real", "integer", "complex", "pattern")
SYMMETRIES = ("general", "symmetric", "skew-symmetric", "hermitian")


class MtxError(ValueError):
    """Base class for Matrix Market parse errors."""


class MtxHeaderError(MtxError):
    pass


class MtxIndexError(MtxError):
    pass


class MtxCountError(MtxError):
    pass


class NotSquareError(MtxError):
    pass


def _read_text(source) -> str:
    if isinstance(source, (str, os.PathLike)):
        path = os.fspath(source)
        opener = gzip.open if path.endswith(".gz") else open
        with opener(path, "rb") as fh:
            raw = fh.read()
    else:
        raw = source.read()
    if isinstance(raw, bytes):
        raw = raw.decode("ascii", errors="replace")
    return raw


def _parse_header(line: str) -> tuple[str, str]:
    tokens = line.strip().split()
    if len(tokens) != 5 or tokens[0].lower() != "%%matrixmarket":
        raise MtxHeaderError(f"malformed Matrix Market header: {line.strip()!r}")
    obj, fmt, fld, sym = (t.lower() for t in tokens[1:])
    if obj != "matrix":
        raise MtxHeaderError(f"unsupported object {obj!r}")
    if fmt != "coordinate":
        raise MtxHeaderError(f"unsupported format {fmt!r} (only coordinate is supported)")
    if fld == "double":
        fld = "real"
    if fld not in FIELDS:
        raise MtxHeaderError(f"unsupported field {fld!r}")
    if sym not in SYMMETRIES:
        raise MtxHeaderError(f"unsupported symmetry {sym!r}")
    if fld == "pattern" and sym == "hermitian":
        raise MtxHeaderError("pattern matrices cannot be hermitian")
    return fld, sym


def parse_mtx(source, require_square: bool = False) -> CooMatrix:
    """Read a coordinate Matrix Market file into a :class:`CooMatrix`.

    ``source`` is a path (``.gz`` allowed) or a text/binary stream.  Indices
    become 0-based, symmetric/skew/hermitian storage is expanded to general
    form and pattern entries get value 1.0.  Integer fields are read as
    binary64.
    """
    text = _read_text(source)
    head, _, body = text.partition("\n")
    fld, sym = _parse_header(head)

    lines = body.split("\n")
    pos = 0
    while pos < len(lines) and (not lines[pos].strip() or lines[pos].lstrip().startswith("%")):
        pos += 1
    if pos == len(lines):
        raise MtxHeaderError("missing size line")
    size = lines[pos].split()
    try:
        nrows, ncols, nnz = (int(t) for t in size)
    except ValueError:
        raise MtxHeaderError(f"malformed size line: {lines[pos]!r}") from None
    if min(nrows, ncols, nnz) < 0:
        raise MtxHeaderError("negative dimension in size line")
    if require_square and nrows != ncols:
        raise NotSquareError(f"matrix is {nrows}x{ncols}, a square matrix is required")

    rest = lines[pos + 1:]
    if any(ln.lstrip().startswith("%") for ln in rest):
        rest = [ln for ln in rest if not ln.lstrip().startswith("%")]
    tokens = " ".join(rest).split()
    width = {"pattern": 2, "complex": 4}.get(fld, 3)
    if len(tokens) != nnz * width:
        got = len(tokens) / width
        raise MtxCountError(f"header declares {nnz} entries, found {got:g}")

    tok = np.array(tokens, dtype=object).reshape(nnz, width) if nnz else np.empty((0, width), dtype=object)
    try:
        row = tok[:, 0].astype(np.int64) - 1
        col = tok[:, 1].astype(np.int64) - 1
    except (ValueError, TypeError):
        raise MtxIndexError("non-integer row/column index") from None
    if nnz and (row.min() < 0 or row.max() >= nrows or col.min() < 0 or col.max() >= ncols):
        bad = np.flatnonzero((row < 0) | (row >= nrows) | (col < 0) | (col >= ncols))[0]
        raise MtxIndexError(
            f"entry {bad + 1} index ({row[bad] + 1}, {col[bad] + 1}) outside {nrows}x{ncols}")

    try:
        if fld == "pattern":
            data = np.ones(nnz)
        elif fld == "complex":
            data = np.empty(nnz, dtype=np.complex128)
            data.real = tok[:, 2].astype(np.float64)
            data.imag = tok[:, 3].astype(np.float64)
        else:
            data = tok[:, 2].astype(np.float64)
    except (ValueError, TypeError):
        raise MtxError("non-numeric value in entry list") from None

    if sym != "general":
        off = row != col
        mirror = data[off]
        if sym == "skew-symmetric":
            mirror = -mirror
        elif sym == "hermitian":
            mirror = np.conj(mirror)
        row, col = np.concatenate([row, col[off]]), np.concatenate([col, row[off]])
        data = np.concatenate([data, mirror])

    return CooMatrix(nrows, ncols, row, col, data, symmetry=sym)


def _fmt(values: np.ndarray) -> list[str]:
    return ["%.17g" % v for v in values.tolist()]


def write_mtx(matrix, stream) -> None:
    """Write a binary64 matrix in coordinate/general form.

    Accepts :class:`CooMatrix`, binary64 :class:`CsrMatrix` or
    :class:`ComplexSparseMatrix`.  Values use 17 significant digits so a
    re-parse is bit-identical.  ``stream`` is a text stream or a path.
    """
    if isinstance(stream, (str, os.PathLike)):
        with open(stream, "w") as fh:
            write_mtx(matrix, fh)
        return

    if isinstance(matrix, CooMatrix):
        row, col = matrix.row, matrix.col
        complex_ = matrix.is_complex
        re = matrix.data.real if complex_ else matrix.data
        im = matrix.data.imag if complex_ else None
    elif isinstance(matrix, ComplexSparseMatrix):
        if matrix.precision.components != 1:
            raise TypeError("only binary64 matrices can be written")
        row, col = matrix.re.row_of_entries(), matrix.indices
        complex_, re, im = True, matrix.re.data, matrix.im.data
    elif isinstance(matrix, CsrMatrix):
        if matrix.precision.components != 1:
            raise TypeError("only binary64 matrices can be written")
        row, col = matrix.row_of_entries(), matrix.indices
        complex_, re, im = False, matrix.data, None
    else:
        raise TypeError(f"cannot write {type(matrix).__name__}")

    nrows, ncols = matrix.shape
    buf = io.StringIO()
    buf.write(f"%%MatrixMarket matrix coordinate {'complex' if complex_ else 'real'} general\n")
    buf.write(f"{nrows} {ncols} {len(row)}\n")
    rows = (row + 1).tolist()
    cols = (col + 1).tolist()
    if complex_:
        lines = map(" ".join, zip(map(str, rows), map(str, cols), _fmt(re), _fmt(im)))
    else:
        lines = map(" ".join, zip(map(str, rows), map(str, cols), _fmt(re)))
    for line in lines:
        buf.write(line)
        buf.write("\n")
    stream.write(buf.getvalue())
