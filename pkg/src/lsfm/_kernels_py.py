"""Pure-numpy implementations of the hot loops.

``lsfm._kernels`` (Cython) provides the same functions; ``lsfm.kernels``
picks whichever is available.
"""
import numpy as np
from scipy.special import erfc

SQRT2 = np.sqrt(2.0)


def cell_average(dist, sigma, tau):
    """Mean of a centred Gaussian density over a cell of width ``tau``.

    ``dist`` is the distance from the Gaussian mean to the cell centre and
    ``sigma`` its standard deviation.  ``sigma == 0`` gives the discrete
    delta: ``1 / tau`` on the centre cell, zero elsewhere.
    """
    dist = np.abs(np.asarray(dist, dtype=float))
    sigma = np.asarray(sigma, dtype=float)
    half = 0.5 * tau
    with np.errstate(divide="ignore", invalid="ignore"):
        s = SQRT2 * sigma
        val = 0.5 * (erfc((dist - half) / s) - erfc((dist + half) / s)) / tau
    delta = np.where(dist < half, 1.0 / tau, 0.0)
    return np.where(sigma > 0, val, delta)


def band_halfwidth(sigma, tau, cutoff):
    """Number of rows either side of the beam axis that carry intensity."""
    return np.ceil(cutoff * np.asarray(sigma) / tau).astype(np.int64)


def field_values(sigma_row, att_row, l, N, tau, cutoff):
    """Dense ``(N, N)`` beam intensity for the excitation at row ``l``.

    ``sigma_row[k]`` is the beam width at column ``k`` and ``att_row[k]``
    the surviving fraction ``exp(-int lambda)``; columns with
    ``att_row == 0`` are not reached by the beam.
    """
    v = np.zeros((N, N))
    active = np.flatnonzero(att_row > 0)
    if active.size == 0:
        return v
    nb = band_halfwidth(sigma_row[active], tau, cutoff)
    reach = int(nb.max())
    lo, hi = max(0, l - reach), min(N, l + reach + 1)
    rows = np.arange(lo, hi)
    offs = np.abs(rows - l)
    inband = offs[:, None] <= nb[None, :]
    vals = cell_average(offs[:, None] * tau, sigma_row[active][None, :], tau)
    v[lo:hi, active] = np.where(inband, vals * att_row[active][None, :], 0.0)
    return v


def assemble_side(sigma, att, weight, tau, cutoff):
    """CSR arrays of the ``N^2 x N^2`` block for one illumination side.

    Row ``l * N + k`` holds ``v_l(i, k) * weight(i, k)`` at column
    ``k * N + i``.
    """
    N = sigma.shape[0]
    rows_out, cols_out, vals_out = [], [], []
    for l in range(N):
        if not np.any(att[l] > 0):
            continue
        W = field_values(sigma[l], att[l], l, N, tau, cutoff) * weight
        k, i = np.nonzero(W.T)
        rows_out.append(l * N + k)
        cols_out.append(k * N + i)
        vals_out.append(W[i, k])
    if rows_out:
        rows = np.concatenate(rows_out)
        indices = np.concatenate(cols_out).astype(np.int64)
        data = np.concatenate(vals_out)
    else:
        rows = np.zeros(0, dtype=np.int64)
        indices = np.zeros(0, dtype=np.int64)
        data = np.zeros(0)
    indptr = np.zeros(N * N + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=N * N), out=indptr[1:])
    return data, indices, indptr
