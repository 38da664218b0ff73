"""Shared dense linear algebra and matrix file I/O.

Everything operates on float64 numpy arrays. Matrices are row-major
(C-contiguous); vectors are 1-D. The CMX1 binary format stores a single
matrix: magic ``CMX1``, then rows and cols as unsigned 64-bit little-endian
integers, then rows*cols IEEE-754 float64 values, little-endian, row-major.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import CmxFormatError, NonPowerOfTwoLength, NotSquare, NotSymmetric

CMX_MAGIC = b"CMX1"

_SYM_RTOL = 1e-10


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def fwht(a):
    """Unnormalized Walsh-Hadamard transform along axis 0, in place.

    Computes ``H @ a`` for the Sylvester-ordered Hadamard matrix of size
    ``a.shape[0]``, which must be a power of two. Applying the transform
    twice scales the input by ``2**q``. A float64 C-contiguous input is
    overwritten; anything else is converted first and the converted array is
    returned, so callers should always use the return value.
    """
    a = np.asarray(a)
    if a.dtype != np.float64 or not a.flags.c_contiguous:
        a = np.ascontiguousarray(a, dtype=np.float64)
    n = a.shape[0]
    if not is_power_of_two(n):
        raise NonPowerOfTwoLength(f"transform length {n} is not a power of two")
    h = 1
    while h < n:
        pairs = a.reshape((n // (2 * h), 2, h) + a.shape[1:])
        left = pairs[:, 0].copy()
        right = pairs[:, 1]
        np.add(left, right, out=pairs[:, 0])
        np.subtract(left, right, out=pairs[:, 1])
        h *= 2
    return a


def sylvester_hadamard(order: int) -> np.ndarray:
    """Dense Sylvester Hadamard matrix H with H @ H.T = order * I."""
    return fwht(np.eye(order))


def sym_eig(m, vectors: bool = False):
    """Eigenvalues of a symmetric matrix in ascending order.

    With ``vectors=True`` returns ``(eigenvalues, Q)`` where columns of Q are
    orthonormal eigenvectors and ``Q @ diag(w) @ Q.T`` reconstructs the input.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotSquare(f"expected a square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.abs(m).max()))
    if float(np.abs(m - m.T).max()) > _SYM_RTOL * scale:
        raise NotSymmetric("matrix is not symmetric within tolerance")
    if vectors:
        w, q = np.linalg.eigh(m)
        return w, q
    return np.linalg.eigvalsh(m)


def gaussian_matrix(rows: int, cols: int, stddev: float, seed) -> np.ndarray:
    """Seeded i.i.d. normal matrix; identical seeds give identical output."""
    if stddev <= 0:
        raise ValueError(f"stddev must be positive, got {stddev}")
    rng = np.random.default_rng(seed)
    return stddev * rng.standard_normal((rows, cols))


def write_cmx(path, a) -> None:
    """Write a matrix (1-D inputs become a single column) in CMX1 format."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2:
        raise CmxFormatError(f"CMX1 stores 2-D matrices, got ndim={a.ndim}")
    with open(path, "wb") as fh:
        fh.write(CMX_MAGIC)
        fh.write(struct.pack("<QQ", a.shape[0], a.shape[1]))
        fh.write(a.astype("<f8").tobytes(order="C"))


def read_cmx(path) -> np.ndarray:
    """Read a CMX1 file back into a 2-D float64 array."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 20:
        raise CmxFormatError("file too short for a CMX1 header")
    if raw[:4] != CMX_MAGIC:
        raise CmxFormatError(f"bad magic {raw[:4]!r}")
    rows, cols = struct.unpack("<QQ", raw[4:20])
    need = 20 + rows * cols * 8
    if len(raw) != need:
        raise CmxFormatError(f"expected {need} bytes for {rows}x{cols}, got {len(raw)}")
    data = np.frombuffer(raw, dtype="<f8", offset=20)
    return data.reshape(rows, cols).astype(np.float64)


def write_sidecar(path, fields: dict) -> None:
    """One-line UTF-8 ``key=value;key=value`` metadata next to a CMX file."""
    line = ";".join(f"{k}={v}" for k, v in fields.items())
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(line + "\n")


def read_sidecar(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        line = fh.readline().strip()
    fields = {}
    for item in line.split(";"):
        if not item:
            continue
        key, _, value = item.partition("=")
        fields[key] = value
    return fields
