"""Penalised natural cubic smoothing splines with banded linear algebra.

For knots x_0 < ... < x_{M-1} with spacings h_i and smoothing weight alpha,
the fitted knot values solve

    Z f = alpha W y,    Z = alpha W + (1 - alpha) A^T Mmat A,

where A is the (M-2) x M second-difference matrix and Mmat the (M-2) x
(M-2) tridiagonal spline matrix. Z has three sub-diagonals, so every solve
costs O(M). Second derivatives come from Mmat sigma = A f with natural end
conditions, first derivatives from the tridiagonal system Q theta = B f.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .banded import BandLDL, band_ldl_factor, band_solve, band_to_dense
from .opcount import OpCounter, tally
from .types import DerivativeEstimates, Field, check_knots


def default_alpha(n_knots: int, scale: float = 1.0) -> float:
    """Smoothing weight 1 / (1 + scale * n^(-4/7)).

    With ``scale=1`` this is the unit-constant version of the rate
    alpha = O((1 + n^(-4/7))^(-1)).
    """
    if n_knots < 1:
        raise ValueError("n_knots must be positive")
    if scale < 0:
        raise ValueError("scale must be nonnegative")
    return 1.0 / (1.0 + scale * float(n_knots) ** (-4.0 / 7.0))


def _banded_matvec3(diags, v):
    """(rows x cols) matrix with entries diags[j][r] at (r, r + j) times v."""
    rows = diags[0].shape[0]
    out = np.zeros((rows,) + v.shape[1:])
    for j, d in enumerate(diags):
        out += d.reshape((rows,) + (1,) * (v.ndim - 1)) * v[j: j + rows]
    return out


@dataclass(frozen=True, eq=False)
class SplineSystem:
    """Assembled, factorised smoothing-spline system for one axis."""

    knots: np.ndarray
    alpha: float
    weights: np.ndarray
    h: np.ndarray
    a_diags: tuple          # A[r, r + j] = a_diags[j][r], j = 0, 1, 2
    m_band: np.ndarray      # Mmat in lower band storage, bandwidth 1
    z_band: np.ndarray      # Z in lower band storage, bandwidth 3
    q_band: np.ndarray      # Q in lower band storage, bandwidth 1
    b_diags: tuple          # B[r, r + j - 1] = b_diags[j][r], j = 0, 1, 2
    z_factor: BandLDL
    m_factor: BandLDL
    q_factor: BandLDL

    @property
    def size(self) -> int:
        return self.knots.size

    @cached_property
    def A(self) -> np.ndarray:
        m = self.size
        a = np.zeros((m - 2, m))
        r = np.arange(m - 2)
        for j in range(3):
            a[r, r + j] = self.a_diags[j]
        return a

    @cached_property
    def Mmat(self) -> np.ndarray:
        return band_to_dense(self.m_band)

    @cached_property
    def Z(self) -> np.ndarray:
        return band_to_dense(self.z_band)

    @cached_property
    def Q(self) -> np.ndarray:
        return band_to_dense(self.q_band)

    @cached_property
    def B(self) -> np.ndarray:
        m = self.size
        b = np.zeros((m, m))
        r = np.arange(m)
        for j, off in enumerate((-1, 0, 1)):
            c = r + off
            ok = (c >= 0) & (c < m)
            b[r[ok], c[ok]] = self.b_diags[j][ok]
        return b


def build_spline_system(axis_knots, alpha: float, weights=None,
                        counter: OpCounter | None = None) -> SplineSystem:
    """Assemble A, Mmat, Z, Q, B for the given knots and factor the SPD ones."""
    x = check_knots(axis_knots)
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    m = x.size
    w = np.ones(m) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (m,):
        raise ValueError(f"weights must have length {m}")
    if not np.all(w > 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and positive")

    h = np.diff(x)
    inv_h = 1.0 / h
    tally(counter, 2 * (m - 1))

    # A row r (interior knot r + 1): 1/h_r, -1/h_r - 1/h_{r+1}, 1/h_{r+1}
    a_diags = (inv_h[:-1], -inv_h[:-1] - inv_h[1:], inv_h[1:])
    m_band = np.zeros((2, m - 2))
    m_band[0] = (h[:-1] + h[1:]) / 3.0
    m_band[1, : m - 3] = h[1:-1] / 6.0
    tally(counter, 6 * m)

    # (A^T Mmat A)[p, q] = sum_{r, s} A[r, p] Mmat[r, s] A[s, q]; only p >= q kept
    z_band = np.zeros((4, m))
    r = np.arange(m - 2)
    for off in (-1, 0, 1):
        if off == 0:
            rr, mrs = r, m_band[0]
        elif off == 1:
            rr, mrs = r[:-1], m_band[1, : m - 3]
        else:
            rr, mrs = r[1:], m_band[1, : m - 3]
        ss = rr + off
        for ia in range(3):
            for ib in range(3):
                p = rr + ia
                q = ss + ib
                val = a_diags[ia][rr] * mrs * a_diags[ib][ss]
                keep = p >= q
                np.add.at(z_band, (p[keep] - q[keep], q[keep]), val[keep])
    tally(counter, 2 * 9 * 3 * (m - 2))
    z_band *= 1.0 - alpha
    z_band[0] += alpha * w
    tally(counter, 4 * m + 2 * m)

    # Q and B with the natural end conditions folded into rows 0 and M-1
    ih_left = np.concatenate(([0.0], inv_h))     # 1/h_{i-1}, zero for i = 0
    ih_right = np.concatenate((inv_h, [0.0]))    # 1/h_i, zero for i = M-1
    q_band = np.zeros((2, m))
    q_band[0] = 2.0 * ih_left + 2.0 * ih_right
    q_band[1, : m - 1] = inv_h
    b_diags = (-3.0 * ih_left ** 2, 3.0 * ih_left ** 2 - 3.0 * ih_right ** 2, 3.0 * ih_right ** 2)
    tally(counter, 12 * m)

    z_factor = band_ldl_factor(z_band, 3, counter)
    m_factor = band_ldl_factor(m_band, 1, counter)
    q_factor = band_ldl_factor(q_band, 1, counter)

    for arr in (x, w, h, m_band, z_band, q_band, *a_diags, *b_diags):
        arr.setflags(write=False)
    return SplineSystem(x, float(alpha), w, h, a_diags, m_band, z_band, q_band,
                        b_diags, z_factor, m_factor, q_factor)


def fit_slices(data, system: SplineSystem, counter: OpCounter | None = None):
    """Fit every column of an (M, K) array; returns (f_hat, theta_hat, sigma_hat).

    A 1-D input of length M is treated as a single slice and 1-D arrays
    are returned.
    """
    y = np.asarray(data, dtype=float)
    m = system.size
    if y.shape[0] != m:
        raise ValueError(f"slice length {y.shape[0]} does not match {m} knots")
    if not np.all(np.isfinite(y)):
        raise ValueError("slice contains non-finite entries")
    ncols = 1 if y.ndim == 1 else y.shape[1]
    wshape = (m,) + (1,) * (y.ndim - 1)

    rhs = (system.alpha * system.weights).reshape(wshape) * y
    tally(counter, 2 * m * ncols)
    f_hat = band_solve(system.z_factor, rhs, counter)

    af = _banded_matvec3(system.a_diags, f_hat)
    tally(counter, 5 * (m - 2) * ncols)
    sigma = np.zeros_like(f_hat)
    sigma[1:-1] = band_solve(system.m_factor, af, counter)

    bf = np.zeros_like(f_hat)
    bf += system.b_diags[1].reshape(wshape) * f_hat
    bf[1:] += system.b_diags[0][1:].reshape((m - 1,) + wshape[1:]) * f_hat[:-1]
    bf[:-1] += system.b_diags[2][:-1].reshape((m - 1,) + wshape[1:]) * f_hat[1:]
    tally(counter, (m + 4 * (m - 1)) * ncols)
    theta = band_solve(system.q_factor, bf, counter)
    return f_hat, theta, sigma


def fit_slice(data_slice, system: SplineSystem, counter: OpCounter | None = None):
    """Fit one length-M slice; returns (f_hat, theta_hat, sigma_hat)."""
    s = np.asarray(data_slice, dtype=float)
    if s.ndim != 1:
        raise ValueError("fit_slice expects a one-dimensional slice")
    return fit_slices(s, system, counter)


def estimate_derivatives(field: Field, alpha_x: float | None = None,
                         alpha_t: float | None = None,
                         counter: OpCounter | None = None) -> DerivativeEstimates:
    """Spline estimates of u, u_x, u_xx (along x) and u_t (along t, raw data).

    ``alpha_x``/``alpha_t`` default to :func:`default_alpha` of the axis size.
    """
    grid = field.grid
    ax = default_alpha(grid.M) if alpha_x is None else alpha_x
    at = default_alpha(grid.N) if alpha_t is None else alpha_t
    sys_x = build_spline_system(grid.x, ax, counter=counter)
    sys_t = build_spline_system(grid.t, at, counter=counter)
    u_hat, ux_hat, uxx_hat = fit_slices(field.values, sys_x, counter)
    _, ut_t, _ = fit_slices(field.values.T, sys_t, counter)
    return DerivativeEstimates(grid, u_hat, ux_hat, uxx_hat, ut_t.T)
