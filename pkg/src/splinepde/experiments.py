"""End-to-end identification runs, Monte Carlo success rates and the
operation-count benchmark."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dictionary import Dictionary, build_dictionary
from .lasso import (IdentifiedModel, LassoConfig, coordinate_descent, lambda_max,
                    solution_path, with_refit)
from .localpoly import localpoly_estimate_derivatives
from .opcount import OpCounter
from .simulate import NoiseSpec, PdeSpec, add_noise, simulate_field
from .spline import default_alpha, estimate_derivatives
from .types import DerivativeEstimates, Field, Grid1D

# alpha = 1 / (1 + C n^(-4/7)) with C = max(1, NOISE_GAIN * sigma_hat^2), so the
# roughness penalty grows with the noise variance. At sigma = 1 the penalty
# (1 - alpha) / alpha is near 29 for n = 100; noiseless data get C = 1.
NOISE_GAIN = 400.0
MIN_SMOOTHING_SCALE = 1.0
_MAD_TO_SD = 0.6744897501960817     # median |Z| for a standard normal Z


def noise_level(field_: Field) -> float:
    """Robust noise standard deviation from second differences.

    For i.i.d. noise each second difference has variance 6 sigma^2; the
    median absolute value ignores the few large smooth-signal differences.
    The smaller of the x- and t-direction estimates is returned.
    """
    U = field_.values
    est = [np.median(np.abs(np.diff(U, 2, axis=ax))) / (_MAD_TO_SD * np.sqrt(6.0))
           for ax in (0, 1)]
    return float(min(est))


def smoothing_scale_for(field_: Field) -> float:
    return max(MIN_SMOOTHING_SCALE, NOISE_GAIN * noise_level(field_) ** 2)


@dataclass(frozen=True)
class IdentifyConfig:
    p_max: int = 2
    q_max: int = 2
    alpha_x: float | None = None
    alpha_t: float | None = None
    smoothing_scale: float | None = None
    n_lambdas: int = 100
    lambda_ratio: float = 1e-4
    tol: float = 1e-8
    max_sweeps: int = 1000
    lam: float | None = None
    max_terms: int = 3

    def alphas(self, field_: Field) -> tuple[float, float]:
        """Explicit alphas win; otherwise the n^(-4/7) rule with the configured
        scale, or the noise-adaptive scale when none is set."""
        g = field_.grid
        scale = self.smoothing_scale
        if scale is None and (self.alpha_x is None or self.alpha_t is None):
            scale = smoothing_scale_for(field_)
        ax = self.alpha_x if self.alpha_x is not None else default_alpha(g.M, scale)
        at = self.alpha_t if self.alpha_t is not None else default_alpha(g.N, scale)
        return ax, at


@dataclass
class IdentifyResult:
    estimates: DerivativeEstimates
    dictionary: Dictionary
    path: list
    chosen: IdentifiedModel | None
    alpha_x: float
    alpha_t: float
    recovered: bool | None = None
    extra: dict = field(default_factory=dict)


def choose_model(path, true_support=None, max_terms: int = 3) -> IdentifiedModel | None:
    """Pick one model from a path.

    With a declared support, the first (largest-lambda) model matching it.
    Otherwise, among supports of 1..max_terms terms, the one held over the
    longest run of consecutive lambdas; ties go to the sparser support, then
    to the larger lambda.
    """
    if true_support is not None:
        target = tuple(sorted(true_support))
        for m in path:
            if m.support == target:
                return m
    best, best_key = None, None
    k = 0
    while k < len(path):
        j = k
        while j + 1 < len(path) and path[j + 1].support == path[k].support:
            j += 1
        if 0 < len(path[k].support) <= max_terms:
            key = (j - k + 1, -len(path[k].support), -k)
            if best_key is None or key > best_key:
                best, best_key = path[k], key
        k = j + 1
    return best


def identify(field_: Field, config: IdentifyConfig = IdentifyConfig(), true_support=None,
             refit: bool = True) -> IdentifyResult:
    """Spline derivatives, dictionary, lasso path (or single lambda), optional refit.

    ``true_support`` is a list of TermLabels or label strings.
    """
    ax, at = config.alphas(field_)
    est = estimate_derivatives(field_, ax, at)
    d = build_dictionary(est, config.p_max, config.q_max)
    target = None if true_support is None else tuple(d.indices_of(true_support))
    if config.lam is not None:
        path = [coordinate_descent(d, LassoConfig(lam=config.lam, tol=config.tol,
                                                  max_sweeps=config.max_sweeps))]
    else:
        path = solution_path(d, config.n_lambdas, config.lambda_ratio, config.tol,
                             config.max_sweeps)
    chosen = choose_model(path, target, config.max_terms)
    if chosen is not None and refit and chosen.support:
        try:
            with_refit(d, chosen)
        except np.linalg.LinAlgError:
            chosen.refit_beta = None
    recovered = None if target is None else any(m.support == target for m in path)
    return IdentifyResult(est, d, path, chosen, ax, at, recovered,
                          {"noise_level": noise_level(field_)})


def replicate_seeds(master_seed: int, n: int) -> list[int]:
    """Independent 64-bit seeds by spawning children of the master seed."""
    children = np.random.SeedSequence(master_seed).spawn(n)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


def _replicate(args):
    clean, sigma, seed, config, truth, criterion, single_ratio = args
    noisy = add_noise(clean, NoiseSpec(sigma, seed))
    res = identify(noisy, config, truth, refit=False)
    target = tuple(res.dictionary.indices_of(truth))
    if criterion == "path":
        return bool(res.recovered)
    lam = single_ratio * lambda_max(res.dictionary)
    m = coordinate_descent(res.dictionary, LassoConfig(lam=lam, tol=config.tol,
                                                       max_sweeps=config.max_sweeps))
    return m.support == target


def monte_carlo(spec: PdeSpec, M: int, N: int, sigmas, replicates: int, seed: int = 0,
                config: IdentifyConfig = IdentifyConfig(), criterion: str = "path",
                single_ratio: float = 0.1, workers: int = 1) -> dict:
    """Success fraction per sigma.

    ``criterion="path"`` counts a replicate when some lambda on the path
    gives exactly the true support; ``"single"`` uses the model at
    ``single_ratio * lambda_max`` only.
    """
    if replicates < 1:
        raise ValueError("replicates must be at least 1")
    if criterion not in ("path", "single"):
        raise ValueError("criterion must be 'path' or 'single'")
    clean = simulate_field(spec, spec.grid(M, N))
    truth = spec.true_support()
    out = {}
    for k, sigma in enumerate(sigmas):
        seeds = replicate_seeds(seed + 1_000_003 * k, replicates)
        jobs = [(clean, float(sigma), s, config, truth, criterion, single_ratio) for s in seeds]
        if workers > 1:
            with ProcessPoolExecutor(workers) as ex:
                hits = list(ex.map(_replicate, jobs))
        else:
            hits = [_replicate(j) for j in jobs]
        out[float(sigma)] = sum(hits) / replicates
    return out


def loglog_slope(sizes, counts) -> float | None:
    """Least-squares slope of log(count) against log(size); None for one point."""
    sizes = np.asarray(sizes, dtype=float)
    counts = np.asarray(counts, dtype=float)
    if sizes.size < 2:
        return None
    return float(np.polyfit(np.log(sizes), np.log(counts), 1)[0])


def count_operations(method: str, M: int, N: int, seed: int = 0) -> int:
    """Counted arithmetic of one stage-1 run on a random M x N field."""
    rng = np.random.default_rng(seed)
    g = Grid1D.uniform(M, N)
    f = Field(g, rng.standard_normal((M, N)))
    c = OpCounter()
    if method == "spline":
        estimate_derivatives(f, counter=c)
    elif method == "localpoly":
        localpoly_estimate_derivatives(f, counter=c)
    else:
        raise ValueError(f"unknown method {method!r}")
    return c.count


def benchmark(method: str, axis: str, sizes, fixed: int = 20) -> dict:
    """Counted operations across a size sweep along ``axis`` ('M' or 'N')."""
    if axis not in ("M", "N"):
        raise ValueError("axis must be 'M' or 'N'")
    rows = []
    for s in sizes:
        M, N = (s, fixed) if axis == "M" else (fixed, s)
        rows.append((M, N, count_operations(method, M, N)))
    sweep = [r[0] if axis == "M" else r[1] for r in rows]
    return {"method": method, "axis": axis, "rows": rows,
            "slope": loglog_slope(sweep, [r[2] for r in rows])}
