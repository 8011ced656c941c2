"""Design matrix of candidate PDE terms built from derivative estimates."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .types import DerivativeEstimates, TermLabel, enumerate_terms


@dataclass(frozen=True, eq=False)
class Dictionary:
    """Scaled design matrix ``X`` (rows ordered n*M + i), response ``y``.

    ``X[:, j] = scales[j] * X_raw[:, j]`` where X_raw holds the term values,
    so non-constant columns have root-mean-square 1. ``degenerate`` marks
    columns that are identically zero (scale 1).
    """

    labels: tuple
    X: np.ndarray
    y: np.ndarray
    scales: np.ndarray
    raw_column_norms: np.ndarray
    degenerate: np.ndarray
    X_raw: np.ndarray
    shape_MN: tuple = (0, 0)

    @property
    def K(self) -> int:
        return len(self.labels)

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    def index_of(self, label) -> int:
        if isinstance(label, str):
            label = TermLabel.parse(label)
        return self.labels.index(label)

    def indices_of(self, labels) -> list[int]:
        return sorted(self.index_of(l) for l in labels)


def _flatten(a) -> np.ndarray:
    # time-major: all spatial points of t_0, then t_1, ...
    return np.asarray(a, dtype=float).T.ravel()


def term_matrix(derivs, labels) -> np.ndarray:
    """Unscaled columns for ``labels`` evaluated on flattened derivative arrays."""
    return np.column_stack([lab.evaluate(derivs) for lab in labels])


def build_dictionary(est: DerivativeEstimates, p_max: int = 2, q_max: int = 2) -> Dictionary:
    if q_max > 2:
        raise ValueError("derivative estimates only go up to second order (q_max <= 2)")
    labels = tuple(enumerate_terms(p_max, q_max))
    derivs = [_flatten(est.u_hat), _flatten(est.ux_hat), _flatten(est.uxx_hat)]
    X_raw = term_matrix(derivs, labels)
    if not np.all(np.isfinite(X_raw)):
        raise ValueError("dictionary contains non-finite entries")
    return dictionary_from_arrays(X_raw, _flatten(est.ut_hat), labels, scale=True,
                                  shape_MN=(est.grid.M, est.grid.N))


def descale_coefficients(d: Dictionary, beta_scaled) -> np.ndarray:
    """Coefficients for the raw (unscaled) columns.

    Since X = X_raw * scales, X beta_scaled = X_raw (beta_scaled * scales).
    """
    b = np.asarray(beta_scaled, dtype=float)
    if b.shape != (d.K,):
        raise ValueError(f"expected {d.K} coefficients, got shape {b.shape}")
    return b * d.scales


def export_dictionary_csv(d: Dictionary, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([str(l) for l in d.labels] + ["u_t"])
        for row, yv in zip(d.X_raw, d.y):
            w.writerow([repr(float(v)) for v in row] + [repr(float(yv))])


def dictionary_from_arrays(X, y, labels=None, scale: bool = False,
                           shape_MN=(0, 0)) -> Dictionary:
    """Wrap a plain design matrix; columns get RMS-1 scaling only if ``scale``."""
    X_raw = np.array(X, dtype=float)
    y = np.array(y, dtype=float)
    if X_raw.ndim != 2 or y.shape != (X_raw.shape[0],):
        raise ValueError("X must be 2-D with one row per entry of y")
    K = X_raw.shape[1]
    if labels is None:
        labels = tuple(TermLabel(((0, j + 1),)) for j in range(K))
    norms = np.linalg.norm(X_raw, axis=0)
    degenerate = norms == 0.0
    scales = np.ones(K)
    if scale:
        live = ~degenerate & np.array([not l.is_intercept for l in labels])
        scales[live] = np.sqrt(X_raw.shape[0]) / norms[live]
    X = X_raw * scales
    for a in (X, y, scales, norms, degenerate, X_raw):
        a.setflags(write=False)
    return Dictionary(tuple(labels), X, y, scales, norms, degenerate, X_raw, tuple(shape_MN))
