"""Shared data model: observation grids, fields, derivative bundles and
dictionary term labels."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

MIN_KNOTS = 4


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


def check_knots(knots, name: str = "knots") -> np.ndarray:
    """Validate a strictly increasing knot vector with at least four entries."""
    k = np.asarray(knots, dtype=float)
    if k.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if k.size < MIN_KNOTS:
        raise ValueError(f"{name} needs at least {MIN_KNOTS} entries, got {k.size}")
    if not np.all(np.isfinite(k)):
        raise ValueError(f"{name} contains non-finite values")
    h = np.diff(k)
    if np.any(h <= 0):
        i = int(np.argmax(h <= 0))
        raise ValueError(f"{name} not strictly increasing at index {i + 1}")
    span = k[-1] - k[0]
    if np.any(h < 1e-12 * span):
        i = int(np.argmax(h < 1e-12 * span))
        raise ValueError(f"{name} has near-duplicate knots at index {i}")
    return k


@dataclass(frozen=True, eq=False)
class Grid1D:
    """Observation lattice: M spatial knots ``x`` by N temporal knots ``t``."""

    x: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", _frozen(check_knots(self.x, "x")))
        object.__setattr__(self, "t", _frozen(check_knots(self.t, "t")))

    @property
    def M(self) -> int:
        return self.x.size

    @property
    def N(self) -> int:
        return self.t.size

    @property
    def shape(self) -> tuple[int, int]:
        return (self.M, self.N)

    @classmethod
    def uniform(cls, M: int, N: int, x_max: float = 1.0, t_max: float = 0.1) -> "Grid1D":
        """Equally spaced knots x_i = (i+1) x_max / M and t_n = (n+1) t_max / N."""
        x = x_max * np.arange(1, M + 1) / M
        t = t_max * np.arange(1, N + 1) / N
        return cls(x, t)

    def __eq__(self, other):
        if not isinstance(other, Grid1D):
            return NotImplemented
        return (self.shape == other.shape and np.array_equal(self.x, other.x)
                and np.array_equal(self.t, other.t))

    def __hash__(self):
        return hash((self.x.tobytes(), self.t.tobytes()))


@dataclass(frozen=True, eq=False)
class Field:
    """Samples u_i^n on a grid; ``values[i, n]`` is the value at (x_i, t_n)."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            i, n = np.argwhere(~np.isfinite(v))[0]
            raise ValueError(f"non-finite value at (i={i}, n={n})")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def with_values(self, values) -> "Field":
        return Field(self.grid, values)


@dataclass(frozen=True, eq=False)
class DerivativeEstimates:
    """Spline estimates of u, u_x, u_xx and u_t at every grid point."""

    grid: Grid1D
    u_hat: np.ndarray
    ux_hat: np.ndarray
    uxx_hat: np.ndarray
    ut_hat: np.ndarray

    def __post_init__(self):
        for name in ("u_hat", "ux_hat", "uxx_hat", "ut_hat"):
            a = np.array(getattr(self, name), dtype=float)
            if a.shape != self.grid.shape:
                raise ValueError(f"{name} shape {a.shape} does not match grid {self.grid.shape}")
            if not np.all(np.isfinite(a)):
                raise ValueError(f"{name} contains non-finite entries")
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    def derivative(self, order: int) -> np.ndarray:
        """Spatial derivative estimate of the given order (0, 1 or 2)."""
        try:
            return (self.u_hat, self.ux_hat, self.uxx_hat)[order]
        except IndexError:
            raise ValueError(f"spatial derivative order {order} not available (max 2)") from None


@dataclass(frozen=True, order=True)
class TermLabel:
    """A dictionary term: product of powers of spatial derivatives.

    ``factors`` holds (derivative order, power) pairs with strictly
    increasing orders; the empty tuple is the intercept.
    """

    factors: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        f = tuple((int(k), int(p)) for k, p in self.factors)
        orders = [k for k, _ in f]
        if any(k < 0 for k in orders):
            raise ValueError("derivative orders must be nonnegative")
        if any(b <= a for a, b in zip(orders, orders[1:])):
            raise ValueError("derivative orders must be strictly increasing")
        if any(p < 1 for _, p in f):
            raise ValueError("powers must be at least 1")
        if len(f) > 2:
            raise ValueError("at most pairwise products are supported")
        object.__setattr__(self, "factors", f)

    @property
    def degree(self) -> int:
        return sum(p for _, p in self.factors)

    @property
    def max_order(self) -> int:
        return max((k for k, _ in self.factors), default=0)

    @property
    def is_intercept(self) -> bool:
        return not self.factors

    def __str__(self) -> str:
        if not self.factors:
            return "1"
        parts = []
        for k, p in self.factors:
            s = "u" if k == 0 else "u_" + "x" * k
            parts.append(s if p == 1 else f"{s}^{p}")
        return "*".join(parts)

    @classmethod
    def parse(cls, text: str) -> "TermLabel":
        """Inverse of ``str``: ``"u*u_x"`` -> TermLabel(((0, 1), (1, 1)))."""
        text = text.strip()
        if text == "1":
            return cls()
        factors = []
        for part in text.split("*"):
            base, _, power = part.partition("^")
            if base == "u":
                k = 0
            elif base.startswith("u_") and set(base[2:]) == {"x"}:
                k = len(base) - 2
            else:
                raise ValueError(f"cannot parse term factor {part!r}")
            factors.append((k, int(power) if power else 1))
        return cls(tuple(factors))

    def evaluate(self, derivs) -> np.ndarray:
        """Evaluate on a sequence of derivative arrays indexed by order."""
        out = np.ones_like(np.asarray(derivs[0], dtype=float))
        for k, p in self.factors:
            out = out * np.asarray(derivs[k], dtype=float) ** p
        return out


def enumerate_terms(p_max: int, q_max: int) -> list[TermLabel]:
    """Canonical candidate-term ordering.

    Intercept, then pure powers grouped by derivative order, then pairwise
    products over orders k < l (k = 0 allowed) with total power <= p_max,
    in lexicographic (k, l, i, j) order.
    """
    if p_max < 1:
        raise ValueError("p_max must be >= 1")
    if q_max < 0:
        raise ValueError("q_max must be >= 0")
    terms = [TermLabel()]
    for k in range(q_max + 1):
        for i in range(1, p_max + 1):
            terms.append(TermLabel(((k, i),)))
    for k, l in combinations(range(q_max + 1), 2):
        for i in range(1, p_max + 1):
            for j in range(1, p_max + 1 - i):
                terms.append(TermLabel(((k, i), (l, j))))
    return terms
