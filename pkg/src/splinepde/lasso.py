"""Cyclic coordinate-descent lasso, solution paths, OLS refits and
support-recovery diagnostics.

The objective is F(beta) = ||y - X beta||^2 / (2 n) + lam * ||beta||_1 with
n = M N rows. X^T X and X^T y are formed once, so each sweep costs O(K^2).
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .dictionary import Dictionary, descale_coefficients

SUPPORT_EPS = 1e-6


class ConvergenceWarning(UserWarning):
    pass


def soft_threshold(x, a):
    """S(x, a) = sign(x) max(|x| - a, 0)."""
    if np.any(np.asarray(a) < 0):
        raise ValueError("threshold must be nonnegative")
    return np.sign(x) * np.maximum(np.abs(x) - a, 0.0)


@dataclass(frozen=True)
class LassoConfig:
    lam: float = 0.0
    max_sweeps: int = 1000
    tol: float = 1e-8
    warm_start: np.ndarray | None = None
    support_eps: float = SUPPORT_EPS
    polish: bool = True

    def __post_init__(self):
        if not self.lam >= 0:
            raise ValueError("lambda must be nonnegative")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be at least 1")


@dataclass
class IdentifiedModel:
    """Lasso fit at a single lambda.

    ``support`` is defined on the scaled coefficients (|beta_scaled| >
    support_eps); scaling never changes which entries are nonzero.
    """

    labels: tuple
    beta_scaled: np.ndarray
    beta_raw: np.ndarray
    support: tuple
    lam: float
    kkt_residual: float
    objective: float
    converged: bool = True
    n_sweeps: int = 0
    objective_history: list = field(default_factory=list, repr=False)
    refit_beta: np.ndarray | None = None

    @property
    def support_labels(self) -> list[str]:
        return [str(self.labels[j]) for j in self.support]

    def coefficients(self) -> dict:
        """Label -> coefficient on the raw columns, refit values if present."""
        if self.refit_beta is not None:
            return {str(self.labels[j]): float(b) for j, b in zip(self.support, self.refit_beta)}
        return {str(self.labels[j]): float(self.beta_raw[j]) for j in self.support}

    def to_dict(self) -> dict:
        out = {
            "lambda": self.lam,
            "support": self.support_labels,
            "beta_scaled": [float(b) for b in self.beta_scaled],
            "beta_raw": [float(b) for b in self.beta_raw],
            "labels": [str(l) for l in self.labels],
            "kkt_residual": self.kkt_residual,
            "objective": self.objective,
            "converged": self.converged,
            "n_sweeps": self.n_sweeps,
        }
        if self.refit_beta is not None:
            out["refit"] = self.coefficients()
        return out


class _Gram:
    """Cached X^T X, X^T y and y^T y for a dictionary."""

    def __init__(self, d: Dictionary):
        self.n = d.n_rows
        self.G = d.X.T @ d.X
        self.c = d.X.T @ d.y
        self.yy = float(d.y @ d.y)
        self.diag = np.diag(self.G).copy()

    def objective(self, beta, lam):
        quad = self.yy - 2.0 * self.c @ beta + beta @ self.G @ beta
        return 0.5 * max(quad, 0.0) / self.n + lam * np.abs(beta).sum()

    def polish(self, beta, lam):
        """Exact minimiser for the current sign pattern, or None.

        On the active set A with signs s the stationarity condition reads
        G_AA b = c_A - n lam s. Coordinates whose sign flips are dropped and
        the system re-solved; the caller must still verify the KKT residual.
        """
        A = np.flatnonzero(beta)
        sgn = np.sign(beta[A])
        while A.size:
            try:
                b = np.linalg.solve(self.G[np.ix_(A, A)], self.c[A] - self.n * lam * sgn)
            except np.linalg.LinAlgError:
                return None
            keep = np.sign(b) == sgn
            if np.all(keep):
                out = np.zeros_like(beta)
                out[A] = b
                return out
            A, sgn = A[keep], sgn[keep]
        return None

    def kkt(self, beta, lam):
        grad = (self.c - self.G @ beta) / self.n
        viol = np.where(beta == 0.0, np.maximum(np.abs(grad) - lam, 0.0),
                        np.abs(grad - lam * np.sign(beta)))
        return float(viol.max()) if viol.size else 0.0


def _gram(d: Dictionary) -> _Gram:
    # cached on the (immutable) dictionary instance
    g = d.__dict__.get("_gram")
    if g is None:
        g = _Gram(d)
        d.__dict__["_gram"] = g
    return g


def lambda_max(d: Dictionary) -> float:
    """Smallest lambda whose solution is identically zero: ||X^T y / n||_inf."""
    g = _gram(d)
    return float(np.max(np.abs(g.c))) / g.n if g.c.size else 0.0


def coordinate_descent(d: Dictionary, config: LassoConfig) -> IdentifiedModel:
    g = _gram(d)
    K, n, lam = d.K, g.n, config.lam
    beta = np.zeros(K) if config.warm_start is None else np.array(config.warm_start, dtype=float)
    if beta.shape != (K,):
        raise ValueError(f"warm start must have length {K}")
    active = g.diag > 0
    beta[~active] = 0.0
    thresh = n * lam
    history = [g.objective(beta, lam)]
    converged = False
    sweeps = 0
    kkt = g.kkt(beta, lam)
    for sweeps in range(1, config.max_sweeps + 1):
        max_change = 0.0
        for j in range(K):
            if not active[j]:
                continue
            old = beta[j]
            rho = g.c[j] - g.G[j] @ beta + g.diag[j] * old
            new = soft_threshold(rho, thresh) / g.diag[j]
            if new != old:
                beta[j] = new
                max_change = max(max_change, abs(new - old))
        obj = g.objective(beta, lam)
        # exact coordinate minimisation cannot raise F; allow for the
        # round-off of evaluating F through the Gram form
        if obj > history[-1] + 1e-11 * (g.yy / g.n + abs(history[-1])):
            raise FloatingPointError(
                f"objective increased in sweep {sweeps}: {history[-1]!r} -> {obj!r}")
        history.append(obj)
        if max_change < config.tol:
            kkt = g.kkt(beta, lam)
            if kkt <= config.tol:
                converged = True
                break
        if config.polish and sweeps >= 3:
            cand = g.polish(beta, lam)
            if cand is not None and g.kkt(cand, lam) <= config.tol:
                cobj = g.objective(cand, lam)
                if cobj <= obj + 1e-11 * (g.yy / g.n + abs(obj)):
                    beta = cand
                    history.append(min(cobj, obj))
                    converged = True
                    break
    kkt = g.kkt(beta, lam)
    if not converged:
        warnings.warn(f"coordinate descent stopped after {sweeps} sweeps "
                      f"(kkt residual {kkt:.2e})", ConvergenceWarning, stacklevel=2)
    support = tuple(int(j) for j in np.flatnonzero(np.abs(beta) > config.support_eps))
    return IdentifiedModel(d.labels, beta, descale_coefficients(d, beta), support, float(lam),
                           kkt, history[-1], converged, sweeps, history)


def lambda_grid(lmax: float, n_lambdas: int = 100, ratio: float = 1e-4) -> np.ndarray:
    if n_lambdas < 2:
        raise ValueError("n_lambdas must be at least 2")
    if not 0 < ratio < 1:
        raise ValueError("ratio must lie in (0, 1)")
    return lmax * np.geomspace(1.0, ratio, n_lambdas)


def solution_path(d: Dictionary, n_lambdas: int = 100, ratio: float = 1e-4,
                  tol: float = 1e-8, max_sweeps: int = 1000) -> list[IdentifiedModel]:
    """Warm-started fits along a geometric grid from lambda_max down."""
    path = []
    beta = None
    for lam in lambda_grid(lambda_max(d), n_lambdas, ratio):
        m = coordinate_descent(d, LassoConfig(lam=float(lam), tol=tol, max_sweeps=max_sweeps,
                                              warm_start=beta))
        path.append(m)
        beta = m.beta_scaled
    return path


def path_supports(path) -> list[tuple]:
    return [m.support for m in path]


def first_model_with_support(path, support) -> IdentifiedModel | None:
    target = tuple(sorted(support))
    for m in path:
        if m.support == target:
            return m
    return None


def refit_ols(d: Dictionary, support) -> np.ndarray:
    """Unpenalised least squares of y on the raw columns in ``support``."""
    S = sorted(int(j) for j in support)
    if not S:
        raise ValueError("support must be nonempty")
    XS = d.X_raw[:, S]
    if np.linalg.matrix_rank(XS) < len(S):
        raise np.linalg.LinAlgError(f"columns {S} are linearly dependent")
    coef, *_ = np.linalg.lstsq(XS, d.y, rcond=None)
    return coef


def with_refit(d: Dictionary, model: IdentifiedModel) -> IdentifiedModel:
    model.refit_beta = refit_ols(d, model.support) if model.support else None
    return model


@dataclass(frozen=True)
class ConditionReport:
    invertible: bool
    incoherence: float | None = None
    min_eigenvalue: float | None = None

    def to_dict(self) -> dict:
        return {"invertible": self.invertible, "incoherence": self.incoherence,
                "min_eigenvalue": self.min_eigenvalue}


def diagnose_conditions(d: Dictionary, support) -> ConditionReport:
    """Invertibility of X_S^T X_S, the incoherence ||X_Sc^T X_S (X_S^T X_S)^-1||_inf
    and the smallest eigenvalue of X_S^T X_S / n, on the scaled columns."""
    S = sorted(int(j) for j in support)
    if not S or len(S) >= d.K:
        raise ValueError("support must be nonempty and a proper subset of the columns")
    Sc = [j for j in range(d.K) if j not in S]
    XS = d.X[:, S]
    GS = XS.T @ XS
    eig = np.linalg.eigvalsh(GS)
    if eig.min() <= eig.max() * len(S) * np.finfo(float).eps * 10 or eig.max() == 0:
        return ConditionReport(False)
    W = d.X[:, Sc].T @ XS @ np.linalg.inv(GS)
    inco = float(np.abs(W).sum(axis=1).max())
    return ConditionReport(True, inco, float(eig.min() / d.n_rows))


def lambda_theory(K: int, N: int, mu: float, constant: float = 1.0, r: float = 0.1) -> float:
    """Advisory lower bound C sqrt(K) log N / (mu N^(3/7 - r)).

    The constant is not computable from data; the default C = 1 is arbitrary.
    ``mu`` is 1 - incoherence and must lie in (0, 1].
    """
    if not 0 < mu <= 1:
        raise ValueError("mu must lie in (0, 1]")
    if not 0 < r < 3 / 7:
        raise ValueError("r must lie in (0, 3/7)")
    return constant * math.sqrt(K) * math.log(N) / (mu * N ** (3.0 / 7.0 - r))


def export_path_csv(path, labels, fh_or_path) -> None:
    """One row per lambda: lambda then raw coefficients per label."""
    own = isinstance(fh_or_path, (str, bytes)) or hasattr(fh_or_path, "__fspath__")
    fh = open(fh_or_path, "w", newline="") if own else fh_or_path
    try:
        w = csv.writer(fh)
        w.writerow(["lambda"] + [str(l) for l in labels])
        for m in path:
            w.writerow([repr(m.lam)] + [repr(float(b)) for b in m.beta_raw])
    finally:
        if own:
            fh.close()
