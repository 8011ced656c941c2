"""Local polynomial derivative estimation with an Epanechnikov kernel.

This is the comparison baseline for the spline stage. Each evaluation point
solves its own weighted least-squares problem over every knot of the slice,
so a full field costs O(M^2 N + M N^2) operations.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .opcount import OpCounter, tally
from .types import DerivativeEstimates, Field, check_knots


def epanechnikov(x):
    """K(x) = 3/4 max(0, 1 - x^2); works elementwise on arrays."""
    x = np.asarray(x, dtype=float)
    out = 0.75 * np.maximum(0.0, 1.0 - x * x)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class LocalPolyConfig:
    """Target derivative order, local fit degree (default order + 3) and bandwidth.

    ``bandwidth=None`` selects :func:`default_bandwidth` for the knots at hand.
    """

    target_order: int = 0
    fit_degree: int | None = None
    bandwidth: float | None = None

    def __post_init__(self):
        if self.target_order < 0:
            raise ValueError("target_order must be nonnegative")
        if self.fit_degree is None:
            object.__setattr__(self, "fit_degree", self.target_order + 3)
        if self.fit_degree < self.target_order:
            raise ValueError("fit_degree must be at least target_order")
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise ValueError("bandwidth must be positive")


def default_bandwidth(knots, fit_degree: int) -> float:
    """4 * max spacing * (p + 1) / 2, widened until every knot has p + 1 neighbours
    strictly inside the kernel support."""
    x = check_knots(knots)
    need = fit_degree + 1
    if x.size < need:
        raise ValueError(f"{x.size} knots cannot support a degree-{fit_degree} fit")
    bw = 4.0 * np.max(np.diff(x)) * (fit_degree + 1) / 2.0
    # distance to the need-th nearest knot, for every knot
    dist = np.sort(np.abs(x[:, None] - x[None, :]), axis=1)[:, need - 1]
    return float(max(bw, 1.0000001 * dist.max()))


def localpoly_fit_slice(values, knots, eval_points, config: LocalPolyConfig,
                        counter: OpCounter | None = None) -> np.ndarray:
    """Derivative estimates 0..p at each evaluation point.

    Returns an array of shape (len(eval_points), p + 1) whose column j is
    the j-th derivative estimate, i.e. j! times the local Taylor
    coefficient of (x_i - x)^j.
    """
    x = check_knots(knots)
    u = np.asarray(values, dtype=float)
    if u.shape != x.shape:
        raise ValueError("values and knots must have the same length")
    ev = np.atleast_1d(np.asarray(eval_points, dtype=float))
    if np.any(ev < x[0]) or np.any(ev > x[-1]):
        raise ValueError("evaluation points must lie within the knot range")
    p = config.fit_degree
    bw = config.bandwidth if config.bandwidth is not None else default_bandwidth(x, p)
    fact = np.array([factorial(j) for j in range(p + 1)], dtype=float)
    m, np1 = x.size, p + 1
    out = np.empty((ev.size, np1))
    for k, x0 in enumerate(ev):
        d = x - x0
        w = epanechnikov(d / bw) / bw
        V = d[:, None] ** np.arange(np1)
        VW = V * w[:, None]
        G = VW.T @ V
        rhs = VW.T @ u
        try:
            b = np.linalg.solve(G, rhs)
        except np.linalg.LinAlgError:
            raise np.linalg.LinAlgError(
                f"singular local design at evaluation point {k} (x={x0:g})") from None
        if not np.all(np.isfinite(b)):
            raise np.linalg.LinAlgError(f"non-finite local fit at evaluation point {k}")
        out[k] = b * fact
        # kernel (4m), powers (m*p), weighting (m*(p+1)), normal equations
        # (2 m (p+1)^2 + 2 m (p+1)), dense solve (~(p+1)^3)
        tally(counter, m * (4 + p + np1 + 2 * np1 * np1 + 2 * np1) + np1 ** 3)
    return out


def localpoly_estimate_derivatives(field: Field, bandwidth_x: float | None = None,
                                   bandwidth_t: float | None = None,
                                   counter: OpCounter | None = None) -> DerivativeEstimates:
    """Baseline counterpart of the spline estimator.

    u, u_x and u_xx come from a degree-5 fit (order 2 + 3) along x at every
    knot; u_t from a degree-4 fit along t.
    """
    g = field.grid
    U = field.values
    cx = LocalPolyConfig(target_order=2, bandwidth=bandwidth_x)
    ct = LocalPolyConfig(target_order=1, bandwidth=bandwidth_t)
    u_hat = np.empty(g.shape)
    ux = np.empty(g.shape)
    uxx = np.empty(g.shape)
    ut = np.empty(g.shape)
    for n in range(g.N):
        est = localpoly_fit_slice(U[:, n], g.x, g.x, cx, counter)
        u_hat[:, n], ux[:, n], uxx[:, n] = est[:, 0], est[:, 1], est[:, 2]
    for i in range(g.M):
        ut[i] = localpoly_fit_slice(U[i], g.t, g.t, ct, counter)[:, 1]
    return DerivativeEstimates(g, u_hat, ux, uxx, ut)
