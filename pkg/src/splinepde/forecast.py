"""Explicit Euler rollout of an identified PDE and forecast scoring."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .lasso import IdentifiedModel
from .spline import build_spline_system, default_alpha, fit_slice
from .types import Field, Grid1D, TermLabel


def model_terms(model, labels=None) -> list[tuple[TermLabel, float]]:
    """(label, raw coefficient) pairs with nonzero coefficients.

    ``model`` is an IdentifiedModel (refit coefficients win over lasso ones)
    or a mapping from label (string or TermLabel) to coefficient.
    """
    if isinstance(model, IdentifiedModel):
        labels = model.labels if labels is None else labels
        if model.refit_beta is not None:
            pairs = [(labels[j], float(b)) for j, b in zip(model.support, model.refit_beta)]
        else:
            pairs = [(labels[j], float(model.beta_raw[j])) for j in model.support]
    else:
        pairs = [(l if isinstance(l, TermLabel) else TermLabel.parse(l), float(c))
                 for l, c in dict(model).items()]
    if not pairs:
        raise ValueError("model has an empty support")
    if any(lab.max_order > 2 for lab, _ in pairs):
        raise ValueError("terms above second order cannot be evaluated")
    return pairs


def euler_forecast(initial_slice, grid: Grid1D, model, labels=None,
                   alpha_x: float | None = None) -> Field:
    """Roll u forward over ``grid.t`` from ``initial_slice`` at t_0.

    Each step re-estimates u, u_x, u_xx of the current state with the
    spline smoother and advances u <- u + dt * sum_j beta_j term_j.
    """
    u = np.array(initial_slice, dtype=float)
    if u.shape != (grid.M,):
        raise ValueError(f"initial slice must have length {grid.M}")
    if not np.all(np.isfinite(u)):
        raise ValueError("initial slice contains non-finite values")
    terms = model_terms(model, labels)
    ax = default_alpha(grid.M) if alpha_x is None else alpha_x
    system = build_spline_system(grid.x, ax)
    out = np.empty(grid.shape)
    out[:, 0] = u
    for n in range(1, grid.N):
        dt = grid.t[n] - grid.t[n - 1]
        f_hat, theta, sigma = fit_slice(u, system)
        derivs = (f_hat, theta, sigma)
        ut = np.zeros_like(u)
        for lab, c in terms:
            ut += c * lab.evaluate(derivs)
        u = u + dt * ut
        if not np.all(np.isfinite(u)):
            raise FloatingPointError(f"forecast state became non-finite at step {n} (t={grid.t[n]:g})")
        out[:, n] = u
    return Field(grid, out)


@dataclass(frozen=True, eq=False)
class ForecastResult:
    predicted: Field
    residual: Field
    rmse_per_step: np.ndarray

    def summary(self, terms=None) -> dict:
        out = {"t": [float(t) for t in self.predicted.grid.t],
               "rmse_per_step": [float(r) for r in self.rmse_per_step],
               "max_abs_residual": float(np.abs(self.residual.values).max())}
        if terms is not None:
            out["model"] = {str(l): float(c) for l, c in terms}
        return out

    def to_json(self, path, terms=None) -> None:
        with open(path, "w") as fh:
            json.dump(self.summary(terms), fh, indent=2, sort_keys=True)


def score_forecast(predicted: Field, observed: Field) -> ForecastResult:
    if predicted.grid != observed.grid:
        raise ValueError("predicted and observed fields are on different grids")
    r = observed.values - predicted.values
    rmse = np.sqrt(np.mean(r * r, axis=0))
    return ForecastResult(predicted, Field(predicted.grid, r), rmse)
