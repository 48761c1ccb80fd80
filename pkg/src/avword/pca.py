"""Eigenspace construction by the snapshot method.

Training vectors arrive as columns of a D x N matrix with N much smaller
than D, so the eigenvectors of the D x D scatter matrix A A^T are
recovered from the small N x N Gram matrix A^T A: if v is an eigenvector
of the Gram matrix with eigenvalue lam > 0, then A v / ||A v|| is an
eigenvector of the scatter matrix with the same eigenvalue. The scatter
matrix is left unnormalized (no 1/(N-1) factor), which scales eigenvalues
but not the eigenspace.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .featio import atomic_write_bytes

MODEL_MAGIC = b"PCA1"

# Gram eigenvalues below this fraction of the largest are treated as rank
# deficiency, not signal.
RANK_TOLERANCE = 1e-10


@dataclass
class PcaModel:
    mean: np.ndarray  # (D,)
    eigenvalues: np.ndarray  # (k,) descending, eigenvalues of A A^T
    eigenvectors: np.ndarray  # (D, k), orthonormal columns
    train_projections: np.ndarray  # (k, N), training data in eigenspace
    labels: list[str]  # (N,) class label per training column

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @property
    def n_components(self) -> int:
        return self.eigenvectors.shape[1]

    @property
    def n_train(self) -> int:
        return len(self.labels)

    def project(self, x: np.ndarray) -> np.ndarray:
        """Eigenspace coordinates of one vector (D,) or a batch (D, M)."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape[0] != self.dim:
            raise ValueError(f"expected dimension {self.dim}, got {x.shape[0]}")
        if x.ndim == 1:
            return self.eigenvectors.T @ (x - self.mean)
        return self.eigenvectors.T @ (x - self.mean[:, None])

    def reconstruct(self, z: np.ndarray) -> np.ndarray:
        """Map eigenspace coordinates back to the input space."""
        z = np.asarray(z, dtype=np.float64)
        if z.shape[0] != self.n_components:
            raise ValueError(
                f"expected {self.n_components} coordinates, got {z.shape[0]}"
            )
        if z.ndim == 1:
            return self.mean + self.eigenvectors @ z
        return self.mean[:, None] + self.eigenvectors @ z


def fit(
    samples: np.ndarray, labels: Sequence[str], k: int | str = "all"
) -> PcaModel:
    """Build the eigenspace for training columns and remember their labels.

    Args:
        samples: (D, N) matrix, one training vector per column, N >= 2.
        labels: class label for each column.
        k: number of components to retain, or "all" for every component
            whose eigenvalue clears the rank threshold.

    Returns:
        Model with at most min(k, N - 1) components; the count can reach 0
        when every training vector equals the mean, in which case matching
        falls back to raw distance from the mean.
    """
    a = np.asarray(samples, dtype=np.float64)
    if a.ndim != 2 or a.shape[1] < 2:
        raise ValueError("training needs a (D, N) matrix with N >= 2")
    n = a.shape[1]
    if n != len(labels):
        raise ValueError(f"{n} sample columns but {len(labels)} labels")
    if k != "all":
        k = int(k)
        if not 0 <= k <= n - 1:
            raise ValueError(f"component count must lie in [0, {n - 1}], got {k}")
    mean = a.mean(axis=1)
    centered = a - mean[:, None]
    gram = centered.T @ centered
    gram = (gram + gram.T) / 2.0
    evals, evecs = np.linalg.eigh(gram)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    if evals.size and evals[0] > 0.0:
        keep = evals > RANK_TOLERANCE * evals[0]
    else:
        keep = np.zeros(evals.shape, dtype=bool)
    # centering makes the Gram matrix singular, so rank is at most N - 1
    limit = n - 1 if k == "all" else min(int(k), n - 1)
    keep &= np.arange(evals.size) < limit
    evals, evecs = evals[keep], evecs[:, keep]
    basis = centered @ evecs
    norms = np.linalg.norm(basis, axis=0)
    basis = basis / norms
    _fix_signs(basis)
    projections = basis.T @ centered
    return PcaModel(
        mean=mean,
        eigenvalues=evals,
        eigenvectors=basis,
        train_projections=projections,
        labels=[str(l) for l in labels],
    )


def eigenvalues_csv(model: PcaModel) -> str:
    """Eigenvalue spectrum as CSV text for inspection."""
    lines = ["component,eigenvalue"]
    for i, val in enumerate(model.eigenvalues):
        lines.append(f"{i},{float(val)!r}")
    return "\n".join(lines) + "\n"


def _fix_signs(basis: np.ndarray) -> None:
    """Flip each column so its largest-magnitude entry is positive.

    Eigenvector sign is arbitrary; pinning it makes models reproducible
    byte for byte across runs.
    """
    for j in range(basis.shape[1]):
        i = int(np.argmax(np.abs(basis[:, j])))
        if basis[i, j] < 0.0:
            basis[:, j] = -basis[:, j]


def save_model(path: str | Path, model: PcaModel) -> None:
    """Serialize a model: magic, u32 D/N/k, f64 arrays, then labels.

    Arrays are little-endian float64; eigenvectors and projections are
    stored column major. Labels follow as u32 byte length + UTF-8 each.
    The file is written atomically.
    """
    d, k, n = model.dim, model.n_components, model.n_train
    parts = [MODEL_MAGIC, struct.pack("<III", d, n, k)]
    parts.append(model.mean.astype("<f8").tobytes())
    parts.append(model.eigenvalues.astype("<f8").tobytes())
    parts.append(model.eigenvectors.astype("<f8").tobytes(order="F"))
    parts.append(model.train_projections.astype("<f8").tobytes(order="F"))
    for label in model.labels:
        raw = label.encode("utf-8")
        parts.append(struct.pack("<I", len(raw)))
        parts.append(raw)
    atomic_write_bytes(path, b"".join(parts))


def load_model(path: str | Path) -> PcaModel:
    data = Path(path).read_bytes()
    if len(data) < 16 or data[:4] != MODEL_MAGIC:
        raise ValueError(f"{path}: not an eigenspace model file")
    d, n, k = struct.unpack_from("<III", data, 4)
    off = 16

    def take(count):
        nonlocal off
        end = off + 8 * count
        if end > len(data):
            raise ValueError(f"{path}: truncated model file")
        arr = np.frombuffer(data[off:end], dtype="<f8")
        off = end
        return arr

    mean = take(d)
    eigenvalues = take(k)
    eigenvectors = take(d * k).reshape((d, k), order="F")
    projections = take(k * n).reshape((k, n), order="F")
    labels = []
    for _ in range(n):
        if off + 4 > len(data):
            raise ValueError(f"{path}: truncated label block")
        (length,) = struct.unpack_from("<I", data, off)
        off += 4
        if off + length > len(data):
            raise ValueError(f"{path}: truncated label block")
        labels.append(data[off : off + length].decode("utf-8"))
        off += length
    return PcaModel(
        mean=mean,
        eigenvalues=eigenvalues,
        eigenvectors=eigenvectors.copy(),
        train_projections=projections.copy(),
        labels=labels,
    )
