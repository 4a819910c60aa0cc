"""The linear system ``A mu = b`` linking the density to all camera readings.

Rows are ordered left block then right block; inside a block the height
index ``l`` is outer and the camera pixel ``k`` inner, so row
``side * N^2 + l * N + k``.  Unknowns use first-index-fastest flattening
``z = j * N + i`` of the image ``mu[i, j]``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import kernels
from .detection import MeasurementSet, detection_weight
from .excitation import DEFAULT_CUTOFF, side_profiles
from .grid import Grid2D
from .phantom import CoefficientMaps

DEFAULT_MAX_BYTES = 2 * 1024**3


class CapacityError(MemoryError):
    """The assembled operator would exceed the configured memory cap."""


def image_to_vector(image) -> np.ndarray:
    return np.asarray(image, dtype=float).ravel(order="F")


def vector_to_image(vec, N: int) -> np.ndarray:
    return np.asarray(vec, dtype=float).reshape((N, N), order="F")


def assemble_rhs(meas: MeasurementSet) -> np.ndarray:
    """Stack the readings into ``b`` (left then right, row by row)."""
    if meas.left.ndim != 2 or meas.left.shape[0] != meas.left.shape[1]:
        raise ValueError(f"measurement images must be square, got {meas.left.shape}")
    return np.concatenate([meas.left.ravel(), meas.right.ravel()])


def split_rhs(b, N: int, noise_level: float = 0.0) -> MeasurementSet:
    b = np.asarray(b, dtype=float)
    if b.size != 2 * N * N:
        raise ValueError(f"expected a vector of length {2 * N * N}, got {b.size}")
    return MeasurementSet(b[:N * N].reshape(N, N), b[N * N:].reshape(N, N), noise_level)


class SparseOperator:
    """Measurement operator backed by a CSR matrix.

    The transpose is converted to CSR once so both products run through the
    same row-oriented kernel.
    """

    def __init__(self, matrix):
        self.matrix = sp.csr_matrix(matrix)
        self._rmatrix = None

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def nnz(self):
        return self.matrix.nnz

    @property
    def T(self):
        if self._rmatrix is None:
            self._rmatrix = self.matrix.T.tocsr()
        return self._rmatrix

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.shape[1],):
            raise ValueError(f"expected a vector of length {self.shape[1]}, got shape {x.shape}")
        return self.matrix @ x

    def apply_adjoint(self, y):
        y = np.asarray(y, dtype=float)
        if y.shape != (self.shape[0],):
            raise ValueError(f"expected a vector of length {self.shape[0]}, got shape {y.shape}")
        return self.T @ y

    def column_sums(self):
        return np.asarray(self.matrix.sum(axis=0)).ravel()

    def row_sums(self):
        return np.asarray(self.matrix.sum(axis=1)).ravel()

    def toarray(self):
        return self.matrix.toarray()


class DenseOperator(SparseOperator):
    """Small explicit matrices (tests, toy problems)."""

    def __init__(self, matrix):
        self.matrix = np.asarray(matrix, dtype=float)
        self._rmatrix = None

    @property
    def nnz(self):
        return int(np.count_nonzero(self.matrix))

    @property
    def T(self):
        return self.matrix.T

    def column_sums(self):
        return self.matrix.sum(axis=0)

    def row_sums(self):
        return self.matrix.sum(axis=1)

    def toarray(self):
        return self.matrix.copy()


class MatrixFreeOperator:
    """Applies ``A`` and ``A^T`` by recomputing the beam fields on the fly."""

    def __init__(self, maps: CoefficientMaps, mask, grid: Grid2D, weighted: bool = True,
                 cutoff: float = DEFAULT_CUTOFF):
        self.grid = grid
        self.cutoff = cutoff
        self.weight = detection_weight(maps, grid, weighted)
        self.profiles = [side_profiles(maps, mask, grid, side) for side in ("left", "right")]
        N = grid.N
        self.shape = (2 * N * N, N * N)

    def _fields(self):
        N = self.grid.N
        for s, (sigma, att) in enumerate(self.profiles):
            for l in range(N):
                if np.any(att[l] > 0):
                    v = kernels.field_values(sigma[l], att[l], l, N, self.grid.tau_y, self.cutoff)
                    yield s, l, v * self.weight

    def apply(self, x):
        N = self.grid.N
        x = np.asarray(x, dtype=float)
        if x.shape != (N * N,):
            raise ValueError(f"expected a vector of length {N * N}, got shape {x.shape}")
        img = vector_to_image(x, N)
        out = np.zeros((2, N, N))
        for s, l, W in self._fields():
            out[s, l] = np.sum(W * img, axis=0)
        return out.ravel()

    def apply_adjoint(self, y):
        N = self.grid.N
        y = np.asarray(y, dtype=float)
        if y.shape != (2 * N * N,):
            raise ValueError(f"expected a vector of length {2 * N * N}, got shape {y.shape}")
        ys = y.reshape(2, N, N)
        img = np.zeros((N, N))
        for s, l, W in self._fields():
            img += W * ys[s, l][None, :]
        return image_to_vector(img)


def estimate_nnz(maps: CoefficientMaps, mask, grid: Grid2D, cutoff: float = DEFAULT_CUTOFF) -> int:
    """Upper bound on stored entries, from the beam band widths."""
    N = grid.N
    total = 0
    rows = np.arange(N)[:, None]
    for side in ("left", "right"):
        sigma, att = side_profiles(maps, mask, grid, side)
        nb = kernels.band_halfwidth(sigma, grid.tau_y, cutoff)
        lo = np.maximum(rows - nb, 0)
        hi = np.minimum(rows + nb + 1, N)
        total += int(np.sum(np.where(att > 0, hi - lo, 0)))
    return total


def build_system(maps: CoefficientMaps, mask, grid: Grid2D, weighted: bool = True,
                 cutoff: float = DEFAULT_CUTOFF, max_bytes: int = DEFAULT_MAX_BYTES,
                 backend: str | None = None) -> SparseOperator:
    """Assemble the ``2N^2 x N^2`` operator in CSR form.

    Raises ``CapacityError`` when the estimated storage exceeds ``max_bytes``;
    use ``MatrixFreeOperator`` in that case.
    """
    N = grid.N
    nnz = estimate_nnz(maps, mask, grid, cutoff)
    need = nnz * 16 + (2 * N * N + 1) * 8
    if need > max_bytes:
        raise CapacityError(
            f"assembled operator needs ~{need / 2**20:.0f} MiB (> {max_bytes / 2**20:.0f} MiB cap); "
            "use MatrixFreeOperator instead"
        )
    kern = kernels.backend_module(backend)
    weight = detection_weight(maps, grid, weighted)
    blocks = []
    for side in ("left", "right"):
        sigma, att = side_profiles(maps, mask, grid, side)
        data, indices, indptr = kern.assemble_side(sigma, att, weight, grid.tau_y, cutoff)
        blocks.append(sp.csr_matrix((data, indices, indptr), shape=(N * N, N * N)))
    return SparseOperator(sp.vstack(blocks, format="csr"))


@dataclass
class LinearSystem:
    """Operator, data vector and relative noise level ``||eps|| / ||b||``."""

    op: SparseOperator
    b: np.ndarray
    noise_level: float = 0.0

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=float)
        if self.b.shape != (self.op.shape[0],):
            raise ValueError(f"b has shape {self.b.shape}, operator has {self.op.shape[0]} rows")
