"""Feature-file persistence shared by both modalities.

Two interchangeable encodings of an N x D feature matrix:

* CSV with a header row; each data row is the record id, the feature
  values in full precision, and the class label last.
* A flat binary: 4-byte magic ("ZVF1" visual, "ZAF1" audio), u32 row
  count, u32 dimension, then row-major little-endian float64 values.

All writes go through a temp file and an atomic rename, so interrupted
runs never leave a half-written file behind.
"""

from __future__ import annotations

import csv
import io
import os
import struct
import tempfile
from pathlib import Path
from typing import Sequence

import numpy as np

KIND_MAGIC = {"visual": b"ZVF1", "audio": b"ZAF1"}
_MAGIC_KIND = {v: k for k, v in KIND_MAGIC.items()}


def atomic_write_bytes(path: str | Path, data: bytes) -> None:
    """Write a file via temp + rename so readers never see partial data."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: str | Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def write_features_csv(
    path: str | Path,
    ids: Sequence[str],
    features: np.ndarray,
    labels: Sequence[str],
) -> None:
    """Persist (ids, N x D matrix, labels) as CSV; floats survive exactly."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise ValueError("features must be a 2-D matrix")
    n, dim = features.shape
    if len(ids) != n or len(labels) != n:
        raise ValueError(
            f"{n} feature rows but {len(ids)} ids and {len(labels)} labels"
        )
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["id"] + [f"f{i:04d}" for i in range(dim)] + ["label"])
    for rec_id, row, label in zip(ids, features, labels):
        writer.writerow([rec_id] + [repr(float(v)) for v in row] + [label])
    atomic_write_text(path, buf.getvalue())


def read_features_csv(
    path: str | Path,
) -> tuple[list[str], np.ndarray, list[str]]:
    """Inverse of write_features_csv; empty files yield a (0, D) matrix."""
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: missing CSV header") from None
        if len(header) < 2 or header[0] != "id" or header[-1] != "label":
            raise ValueError(f"{path}: expected an id,...,label header")
        dim = len(header) - 2
        ids, rows, labels = [], [], []
        for line_no, row in enumerate(reader, start=2):
            if len(row) != dim + 2:
                raise ValueError(
                    f"{path}:{line_no}: expected {dim + 2} columns, got {len(row)}"
                )
            ids.append(row[0])
            rows.append([float(v) for v in row[1:-1]])
            labels.append(row[-1])
    matrix = np.array(rows, dtype=np.float64).reshape(len(rows), dim)
    return ids, matrix, labels


def write_features_bin(path: str | Path, features: np.ndarray, kind: str) -> None:
    """Persist a feature matrix in the flat binary encoding."""
    if kind not in KIND_MAGIC:
        raise ValueError(f"kind must be one of {sorted(KIND_MAGIC)}")
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise ValueError("features must be a 2-D matrix")
    n, dim = features.shape
    payload = KIND_MAGIC[kind] + struct.pack("<II", n, dim)
    atomic_write_bytes(path, payload + features.astype("<f8").tobytes())


def read_features_bin(path: str | Path) -> tuple[np.ndarray, str]:
    data = Path(path).read_bytes()
    if len(data) < 12 or data[:4] not in _MAGIC_KIND:
        raise ValueError(f"{path}: not a feature matrix file")
    kind = _MAGIC_KIND[data[:4]]
    n, dim = struct.unpack_from("<II", data, 4)
    expected = 12 + 8 * n * dim
    if len(data) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, found {len(data)}")
    matrix = np.frombuffer(data[12:], dtype="<f8").reshape(n, dim)
    return matrix.copy(), kind
