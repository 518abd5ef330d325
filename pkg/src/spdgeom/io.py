"""Reading and writing SPD matrices.

Two on-disk formats are supported:

* dense JSON: ``{"n": <int>, "rows": [[...], ...]}``, row-major;
* Matrix Market ``coordinate real symmetric`` with 1-based indices and the
  lower triangle on disk, read back as :class:`~spdgeom.core.SparseSpd`.

Values are written with 17 significant digits so a write/read round trip
reproduces every double exactly.
"""

import json
import os

import numpy as np
import scipy.io
import scipy.sparse as sps

from .core import DenseSpd, SparseSpd, validate_spd
from .errors import ParseError

MM_HEADER = "%%MatrixMarket matrix coordinate real symmetric"


def _fmt(v):
    return f"{v:.17g}"


def read_matrix(path, tol=1e-12):
    """Read and validate a matrix file.

    The format is detected from the content: JSON objects are dense,
    files starting with ``%%MatrixMarket`` are sparse.

    Returns
    -------
    DenseSpd or SparseSpd

    Raises
    ------
    ParseError
        Unrecognized or malformed content.
    NotSymmetric, NotPositiveDefinite
        As in :func:`~spdgeom.core.validate_spd`.
    """
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    head = text.lstrip()
    if head.startswith("{"):
        return validate_spd(_parse_json(text), tol)
    if head.startswith("%%MatrixMarket"):
        return validate_spd(_parse_mm(path, head), tol)
    raise ParseError(f"{path}: unrecognized matrix format")


def _parse_json(text):
    try:
        obj = json.loads(text)
        n = obj["n"]
        rows = np.array(obj["rows"], dtype=float)
    except (ValueError, KeyError, TypeError) as exc:
        raise ParseError(f"invalid dense JSON matrix: {exc}") from None
    if not isinstance(n, int) or n < 1 or rows.shape != (n, n):
        raise ParseError(f"dense JSON: rows do not form an {n}x{n} matrix")
    return rows


def _parse_mm(path, text):
    first = text.splitlines()[0].split()
    if len(first) != 5 or [w.lower() for w in first[1:3]] != ["matrix", "coordinate"]:
        raise ParseError(f"{path}: expected a Matrix Market coordinate header")
    field, symmetry = first[3].lower(), first[4].lower()
    if field not in ("real", "integer", "double") or symmetry != "symmetric":
        raise ParseError(f"{path}: only real symmetric coordinate matrices are supported")
    try:
        m = scipy.io.mmread(path)
    except Exception as exc:  # scipy raises a mix of ValueError/OSError/RuntimeError
        raise ParseError(f"{path}: {exc}") from None
    if not sps.issparse(m):
        raise ParseError(f"{path}: not a coordinate matrix")
    return sps.csr_matrix(m, dtype=float)


def write_matrix(M, path):
    """Write ``M`` to ``path``.

    Dense operands are written as JSON, sparse ones as Matrix Market with
    the lower triangle of the stored pattern (explicit zeros included).
    """
    if isinstance(M, SparseSpd):
        text = _mm_text(M)
    else:
        a = np.asarray(M.array if isinstance(M, DenseSpd) else M, dtype=float)
        rows = ",\n  ".join("[" + ", ".join(_fmt(v) for v in row) + "]" for row in a)
        text = f'{{"n": {a.shape[0]}, "rows": [\n  {rows}\n]}}\n'
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _mm_text(M):
    n = M.n
    rows, cols = M.keys // n, M.keys % n
    lower = rows >= cols
    # column-major order of the lower triangle, as Matrix Market tools expect
    order = np.lexsort((rows[lower], cols[lower]))
    r, c, v = rows[lower][order], cols[lower][order], M.data[lower][order]
    lines = [MM_HEADER, f"{n} {n} {r.size}"]
    lines.extend(f"{i + 1} {j + 1} {_fmt(x)}" for i, j, x in zip(r, c, v))
    return "\n".join(lines) + "\n"
