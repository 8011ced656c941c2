"""LDL^T factorisation and solves for symmetric positive definite band matrices.

Band matrices use symmetric lower storage: ``band[k, j] = A[j + k, j]`` for
``k = 0..bandwidth`` (the tail of each row beyond ``n - k`` is ignored). This
is the layout of :func:`scipy.linalg.solveh_banded` with ``lower=True``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .opcount import OpCounter, tally


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """Raised when a nonpositive pivot shows the input is not SPD."""


def dense_to_band(a, bandwidth: int) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    band = np.zeros((bandwidth + 1, n))
    for k in range(bandwidth + 1):
        band[k, : n - k] = np.diagonal(a, -k)
    return band


def band_to_dense(band) -> np.ndarray:
    band = np.asarray(band, dtype=float)
    n = band.shape[1]
    a = np.zeros((n, n))
    for k in range(band.shape[0]):
        d = band[k, : n - k]
        a += np.diag(d, -k)
        if k:
            a += np.diag(d, k)
    return a


@dataclass(frozen=True)
class BandLDL:
    """Factor ``A = L D L^T`` with unit-lower band ``L``.

    ``lower[k - 1, j] = L[j + k, j]``; for bandwidth 3 the rows are the
    first, second and third subdiagonals of the unit factor.
    """

    bandwidth: int
    lower: np.ndarray
    diag: np.ndarray

    @property
    def n(self) -> int:
        return self.diag.size

    def to_dense(self) -> tuple[np.ndarray, np.ndarray]:
        n = self.n
        L = np.eye(n)
        for k in range(1, self.bandwidth + 1):
            L += np.diag(self.lower[k - 1, : n - k], -k)
        return L, np.diag(self.diag)


def band_ldl_factor(band, bandwidth: int | None = None,
                    counter: OpCounter | None = None) -> BandLDL:
    """Factor an SPD band matrix given in lower storage.

    Cost is O(n * bandwidth^2). Raises NotPositiveDefiniteError on a
    nonpositive pivot.
    """
    band = np.asarray(band, dtype=float)
    if band.ndim != 2:
        raise ValueError("band storage must be two-dimensional")
    b = band.shape[0] - 1 if bandwidth is None else int(bandwidth)
    if b < 0 or b + 1 > band.shape[0]:
        raise ValueError(f"bandwidth {b} inconsistent with storage of {band.shape[0]} rows")
    n = band.shape[1]
    lower = np.zeros((max(b, 1), n))
    d = np.zeros(n)
    ops = 0
    for j in range(n):
        acc = band[0, j]
        for k in range(1, min(b, j) + 1):
            ljk = lower[k - 1, j - k]
            acc -= ljk * ljk * d[j - k]
            ops += 3
        if not acc > 0.0:
            raise NotPositiveDefiniteError(
                f"nonpositive pivot {acc:.3e} at row {j}: matrix is not positive definite")
        d[j] = acc
        for r in range(1, min(b, n - 1 - j) + 1):
            i = j + r
            acc = band[r, j]
            # shared columns c < j with both L[i, c] and L[j, c] inside the band
            for c in range(max(0, i - b), j):
                acc -= lower[i - c - 1, c] * lower[j - c - 1, c] * d[c]
                ops += 3
            lower[r - 1, j] = acc / d[j]
            ops += 1
    tally(counter, ops)
    lower.setflags(write=False)
    d.setflags(write=False)
    return BandLDL(b, lower, d)


def band_solve(factor: BandLDL, rhs, counter: OpCounter | None = None) -> np.ndarray:
    """Solve ``A x = rhs`` from an LDL^T factor.

    ``rhs`` may be a vector of length n or an (n, k) array of k right-hand
    sides, which are swept together: forward substitution with L, scaling
    by D^{-1}, back substitution with L^T. Cost O(n * bandwidth * k).
    """
    y = np.array(rhs, dtype=float)
    n, b = factor.n, factor.bandwidth
    if y.shape[0] != n:
        raise ValueError(f"rhs has length {y.shape[0]}, factor has order {n}")
    ncols = 1 if y.ndim == 1 else int(np.prod(y.shape[1:]))
    L = factor.lower
    for i in range(1, n):
        for k in range(1, min(b, i) + 1):
            y[i] -= L[k - 1, i - k] * y[i - k]
    if y.ndim == 1:
        y /= factor.diag
    else:
        y /= factor.diag.reshape((n,) + (1,) * (y.ndim - 1))
    for i in range(n - 2, -1, -1):
        for k in range(1, min(b, n - 1 - i) + 1):
            y[i] -= L[k - 1, i] * y[i + k]
    nnz = sum(n - k for k in range(1, b + 1))
    tally(counter, ncols * (4 * nnz + n))
    return y


def band_matvec(band, v, counter: OpCounter | None = None) -> np.ndarray:
    """Product of a symmetric band matrix (lower storage) with ``v``."""
    band = np.asarray(band, dtype=float)
    v = np.asarray(v, dtype=float)
    n = band.shape[1]
    shape = (n,) + (1,) * (v.ndim - 1)
    out = band[0].reshape(shape) * v
    for k in range(1, band.shape[0]):
        d = band[k, : n - k].reshape((n - k,) + shape[1:])
        out[k:] += d * v[: n - k]
        out[: n - k] += d * v[k:]
    ncols = 1 if v.ndim == 1 else int(np.prod(v.shape[1:]))
    tally(counter, ncols * (n + 4 * sum(n - k for k in range(1, band.shape[0]))))
    return out
