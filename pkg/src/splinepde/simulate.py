"""Benchmark fields: transport, inviscid Burgers and viscous Burgers,
plus seeded Gaussian noise.

    transport         u_t = a u_x,                   u = amp sin(k x + a k t)
    inviscid Burgers  u_t = -1/2 u u_x,              u(x, 0) = sin(2 pi x)
    viscous Burgers   u_t = -1/2 u u_x + nu u_xx,    u(x, 0) = sin^2(4 pi x) + sin^3(2 pi x)

Both Burgers problems use u(0, t) = u(1, t) = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .types import Field, Grid1D, TermLabel

MAX_REFERENCE_STEPS = 10_000_000

KINDS = ("transport", "inviscid_burgers", "viscous_burgers")


@dataclass(frozen=True)
class NoiseSpec:
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValueError("sigma must be nonnegative")


@dataclass(frozen=True)
class PdeSpec:
    """Which benchmark to generate and its parameters."""

    kind: str = "transport"
    a: float = -2.0
    amplitude: float = 2.0
    wavenumber: float = 4.0
    nu: float = 0.1
    x_max: float = 1.0
    t_max: float = 0.1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown PDE kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "viscous_burgers" and not self.nu > 0:
            raise ValueError("nu must be positive")
        if self.kind == "inviscid_burgers" and not self.t_max * math.pi < 1.0:
            # max |f'(x)| / 2 = pi for f = sin(2 pi x): characteristics cross at t = 1/pi
            raise ValueError(f"t_max={self.t_max} reaches the shock time 1/pi")

    def true_support(self) -> list[TermLabel]:
        """Dictionary terms with nonzero coefficients in the generating PDE."""
        if self.kind == "transport":
            return [TermLabel.parse("u_x")]
        if self.kind == "inviscid_burgers":
            return [TermLabel.parse("u*u_x")]
        return [TermLabel.parse("u_xx"), TermLabel.parse("u*u_x")]

    def true_coefficients(self) -> dict:
        if self.kind == "transport":
            return {"u_x": self.a}
        if self.kind == "inviscid_burgers":
            return {"u*u_x": -0.5}
        return {"u_xx": self.nu, "u*u_x": -0.5}

    def grid(self, M: int, N: int) -> Grid1D:
        return Grid1D.uniform(M, N, self.x_max, self.t_max)


def transport_field(grid: Grid1D, a: float = -2.0, amplitude: float = 2.0,
                    wavenumber: float = 4.0) -> Field:
    X, T = np.meshgrid(grid.x, grid.t, indexing="ij")
    return Field(grid, amplitude * np.sin(wavenumber * (X + a * T)))


def _burgers_ic(x):
    return np.sin(2 * np.pi * x)


def _check_unit_domain(grid: Grid1D):
    if grid.x[0] < 0 or grid.x[-1] > 1:
        raise ValueError("Burgers fields are defined for x in [0, 1]")
    if grid.t[0] < 0:
        raise ValueError("times must be nonnegative")


def characteristic_foot(x, t, tol: float = 1e-12, max_iter: int = 200):
    """Solve x = x0 + sin(2 pi x0) t / 2 for x0 in [0, 1], elementwise.

    Newton steps are kept inside a shrinking bisection bracket, so the
    iteration converges whenever the map is increasing (t < 1/pi).
    """
    x = np.asarray(x, dtype=float)
    t = np.broadcast_to(np.asarray(t, dtype=float), x.shape)
    lo = np.zeros_like(x)
    hi = np.ones_like(x)
    x0 = x.copy()
    for _ in range(max_iter):
        g = x0 + 0.5 * np.sin(2 * np.pi * x0) * t - x
        done = np.abs(g) <= tol
        if np.all(done):
            return x0
        lo = np.where(g < 0, x0, lo)
        hi = np.where(g > 0, x0, hi)
        dg = 1.0 + np.pi * np.cos(2 * np.pi * x0) * t
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = x0 - g / dg
        ok = (dg > 0) & (newton > lo) & (newton < hi)
        x0 = np.where(done, x0, np.where(ok, newton, 0.5 * (lo + hi)))
    g = x0 + 0.5 * np.sin(2 * np.pi * x0) * t - x
    bad = np.flatnonzero(np.abs(g) > tol)
    if bad.size:
        raise ArithmeticError(f"characteristic solve did not converge at {bad.size} points")
    return x0


def inviscid_burgers_field(grid: Grid1D) -> Field:
    _check_unit_domain(grid)
    if grid.t[-1] * np.pi >= 1.0:
        raise ValueError("requested times reach the shock time 1/pi")
    X, T = np.meshgrid(grid.x, grid.t, indexing="ij")
    U = _burgers_ic(characteristic_foot(X, T))
    U[np.isclose(X, 0.0, atol=0) | np.isclose(X, 1.0, atol=0)] = 0.0
    return Field(grid, U)


def _viscous_ic(x):
    return np.sin(4 * np.pi * x) ** 2 + np.sin(2 * np.pi * x) ** 3


def viscous_burgers_reference(nu: float, cells: int, times, x_out=None):
    """Method-of-lines solution on ``cells`` uniform cells of [0, 1].

    Central differences in space, forward Euler in time with
    dt <= 0.4 dx^2 / nu. Returns an array (len(x_out), len(times)) when
    ``x_out`` is given, else the fine-grid states (cells + 1, len(times)).
    """
    times = np.asarray(times, dtype=float)
    dx = 1.0 / cells
    xf = np.linspace(0.0, 1.0, cells + 1)
    dt_max = 0.4 * dx * dx / nu
    steps_total = int(np.ceil(times[-1] / dt_max)) if times.size else 0
    if steps_total > MAX_REFERENCE_STEPS:
        raise ValueError(f"reference solve would need {steps_total} steps; request a coarser grid")
    u = _viscous_ic(xf)
    u[0] = u[-1] = 0.0
    out = np.empty((cells + 1 if x_out is None else len(x_out), times.size))
    t_now = 0.0
    for n, target in enumerate(times):
        span = target - t_now
        if span > 0:
            nst = int(np.ceil(span / dt_max))
            dt = span / nst
            c1 = 0.5 * dt / (2 * dx)
            c2 = nu * dt / (dx * dx)
            for _ in range(nst):
                um, uc, up = u[:-2], u[1:-1], u[2:]
                u[1:-1] = uc - c1 * uc * (up - um) + c2 * (up - 2 * uc + um)
            t_now = target
        out[:, n] = u if x_out is None else _restrict(xf, u, x_out)
    return out


def _restrict(xf, u, x_out):
    cells = xf.size - 1
    idx = np.rint(np.asarray(x_out) * cells).astype(int)
    if np.allclose(xf[idx], x_out, rtol=0, atol=1e-12):
        return u[idx]
    # non-nested request: four-point Lagrange interpolation of the fine state
    x_out = np.asarray(x_out, dtype=float)
    j = np.clip(np.searchsorted(xf, x_out) - 2, 0, cells - 3)
    xs = xf[j[:, None] + np.arange(4)]
    us = u[j[:, None] + np.arange(4)]
    res = np.zeros(x_out.size)
    for a in range(4):
        w = np.ones(x_out.size)
        for b in range(4):
            if b != a:
                w *= (x_out - xs[:, b]) / (xs[:, a] - xs[:, b])
        res += w * us[:, a]
    return res


def reference_cells(grid: Grid1D, refine: int = 8) -> int:
    """Smallest uniform cell count with spacing <= min knot gap / refine;
    uses a multiple of the knot denominator when the grid is uniform."""
    h_min = np.min(np.diff(grid.x))
    base = int(round(1.0 / h_min))
    if np.allclose(grid.x * base, np.rint(grid.x * base), atol=1e-9):
        return base * refine
    return int(np.ceil(refine / h_min))


def viscous_burgers_field(grid: Grid1D, nu: float = 0.1, refine: int = 8) -> Field:
    _check_unit_domain(grid)
    if not nu > 0:
        raise ValueError("nu must be positive")
    cells = reference_cells(grid, refine)
    U = viscous_burgers_reference(nu, cells, grid.t, grid.x)
    return Field(grid, U)


def simulate_field(spec: PdeSpec, grid: Grid1D) -> Field:
    if spec.kind == "transport":
        return transport_field(grid, spec.a, spec.amplitude, spec.wavenumber)
    if spec.kind == "inviscid_burgers":
        return inviscid_burgers_field(grid)
    return viscous_burgers_field(grid, spec.nu)


def add_noise(field: Field, spec: NoiseSpec) -> Field:
    """Add i.i.d. N(0, sigma^2) noise from numpy's PCG64 generator seeded with ``spec.seed``."""
    if spec.sigma == 0:
        return field
    rng = np.random.default_rng(spec.seed)
    return field.with_values(field.values + spec.sigma * rng.standard_normal(field.grid.shape))
