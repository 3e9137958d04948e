"""Causal-effect estimators.

Gaussian regression effects, latent-scale regression coefficients, the
first-order functional effect curve

    CE(x) = beta_i * pdf(0)/pdf(z(x)) * d/du Qy(0.5) * d/dx Fi(x),

its per-equivalence-class multiset, a bootstrap spread for the curve, and two
closed-form oracles (the truncated conditional-moment series and its
normal-response special case).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .dataset import DataMatrix, TrimmedData
from .graph import Cpdag, Dag, enumerate_extensions
from .marginals import BoundaryExtensionWarning
from .normal import std_pdf, to_latent


class EstimationError(ValueError):
    pass


class SeriesDivergenceError(ArithmeticError):
    """Truncated series tail is not settling; the expansion is reported as
    non-convergent rather than silently truncated."""


def _values(data) -> np.ndarray:
    if isinstance(data, (TrimmedData, DataMatrix)):
        return data.values
    return np.asarray(data, dtype=float)


@dataclass(frozen=True)
class LatentRegression:
    """OLS fit of the response's latent scores on the cause's (plus parents')."""

    beta_i: float
    beta_parents: np.ndarray
    intercept: float
    n_used: int


@dataclass(frozen=True)
class CausalEffectCurve:
    """Sampled effect function x -> CE(target | cause = x) for one DAG."""

    cause: int
    target: int
    dag_id: int
    grid: np.ndarray
    values: np.ndarray
    sd: np.ndarray | None = None

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        if np.any(np.diff(grid) <= 0):
            raise EstimationError("curve grid must be strictly ascending")
        if len(values) != len(grid) or not np.all(np.isfinite(values)):
            raise EstimationError("curve values must be finite, one per grid point")
        if self.sd is not None:
            sd = np.asarray(self.sd, dtype=float)
            object.__setattr__(self, "sd", sd)
            if len(sd) != len(grid):
                raise EstimationError("sd vector must match the grid")


@dataclass(frozen=True)
class EffectMultiset:
    """One curve per (cause, DAG-extension) pair; zero curves stand in when
    the target is a parent of the cause in that extension."""

    m: int
    curves: dict

    def for_cause(self, cause: int) -> list:
        return [self.curves[key] for key in sorted(self.curves) if key[0] == cause]


# -- regression-based estimators ----------------------------------------------


def _ols(design: np.ndarray, response: np.ndarray) -> np.ndarray:
    coef, _, rank, _ = np.linalg.lstsq(design, response, rcond=None)
    if rank < design.shape[1]:
        raise EstimationError("rank-deficient design matrix")
    return coef


def gaussian_effect(data, g: Dag, i: int, y: int) -> float:
    """Regression coefficient of the cause in the raw-scale regression of the
    target on the cause and the cause's parents; exactly zero when the target
    is one of those parents."""
    values = _values(data)
    if i == y:
        raise EstimationError("cause and target must differ")
    pa = sorted(g.parents(i))
    if y in pa:
        return 0.0
    cols = [i] + pa
    design = np.column_stack([np.ones(len(values))] + [values[:, c] for c in cols])
    coef = _ols(design, values[:, y])
    return float(coef[1])


def latent_scores(fits, data, columns) -> np.ndarray:
    """Latent standard-normal scores z = quantile(cdf_hat(x)) column-wise."""
    values = _values(data)
    return np.column_stack(
        [to_latent(fits[c].cdf_hat(values[:, c])) for c in columns])


def latent_beta(fits, data, g: Dag, i: int, y: int) -> LatentRegression:
    """Latent-scale regression of the target's scores on the cause's scores,
    controlling for the cause's parents."""
    if i == y:
        raise EstimationError("cause and target must differ")
    pa = sorted(g.parents(i))
    if y in pa:
        raise EstimationError("target is a parent of the cause; effect is zero by rule")
    z = latent_scores(fits, data, [y, i] + pa)
    n = z.shape[0]
    if n <= len(pa) + 2:
        raise EstimationError("too few rows for the latent regression")
    design = np.column_stack([np.ones(n), z[:, 1:]])
    coef = _ols(design, z[:, 0])
    return LatentRegression(beta_i=float(coef[1]),
                            beta_parents=np.asarray(coef[2:], dtype=float),
                            intercept=float(coef[0]), n_used=n)


def _curve_values(fits, beta_i: float, i: int, y: int, grid: np.ndarray,
                  clip_to_support: bool = False) -> np.ndarray:
    fit_i = fits[i]
    x = grid
    if clip_to_support:
        lo, hi = fit_i.support
        x = np.clip(grid, lo, hi)
    u = np.asarray(fit_i.cdf_hat(x), dtype=float)
    z = to_latent(u)
    qderiv = fits[y].quantile_deriv_hat(0.5)
    dens = np.asarray(fit_i.cdf_deriv_hat(x), dtype=float)
    return beta_i * (std_pdf(0.0) / std_pdf(z)) * qderiv * dens


def effect_grid(fits, i: int, grid_size: int) -> np.ndarray:
    lo, hi = fits[i].interior
    if not lo < hi:
        raise EstimationError("empty bandwidth interior for the cause")
    return np.linspace(lo, hi, grid_size)


def nce_curve(fits, data, g: Dag, i: int, y: int, grid_size: int = 101,
              dag_id: int = 0) -> CausalEffectCurve:
    """First-order functional causal-effect estimate of column ``i`` on
    column ``y`` under DAG ``g``.

    The grid spans the bandwidth interior of the cause's trimmed range. When
    the target is a parent of the cause the curve is identically zero.
    """
    if grid_size < 11:
        raise EstimationError(f"grid_size must be at least 11, got {grid_size}")
    grid = effect_grid(fits, i, grid_size)
    if y in g.parents(i):
        return CausalEffectCurve(cause=i, target=y, dag_id=dag_id,
                                 grid=grid, values=np.zeros(grid_size))
    lr = latent_beta(fits, data, g, i, y)
    vals = _curve_values(fits, lr.beta_i, i, y, grid)
    if np.all(vals == 0.0) and lr.beta_i != 0.0:
        raise EstimationError("density estimate vanished on the whole grid")
    return CausalEffectCurve(cause=i, target=y, dag_id=dag_id, grid=grid, values=vals)


def nce_over_class(fits, data, c: Cpdag, i: int, y: int, grid_size: int = 101,
                   cap: int = 256) -> EffectMultiset:
    """One effect curve per consistent extension of the pattern."""
    dags = enumerate_extensions(c, cap=cap)
    curves = {}
    for dag_id, g in enumerate(dags):
        curves[(i, dag_id)] = nce_curve(fits, data, g, i, y,
                                        grid_size=grid_size, dag_id=dag_id)
    return EffectMultiset(m=len(dags), curves=curves)


def bootstrap_sd(fit_column, data, g: Dag, i: int, y: int, grid,
                 B: int = 100, seed: int = 0) -> np.ndarray:
    """Pointwise standard deviation of the effect curve under a row bootstrap.

    Parameters
    ----------
    fit_column : callable(values, column_index) -> marginal fit
        Refits one variable's marginal on a resampled column; injected so
        both kernel fits and known-truth marginals can be resampled.
    grid : array
        Evaluation grid, held fixed across replicates.

    Replicates with a degenerate column (zero variance) or a failed refit are
    skipped and counted; more than 10% skips is an error. Replicate r draws
    from an rng seeded by (seed, r), so results do not depend on scheduling.
    """
    if B < 20:
        raise EstimationError(f"need at least 20 bootstrap replicates, got {B}")
    values = _values(data)
    grid = np.asarray(grid, dtype=float)
    pa = sorted(g.parents(i))
    if y in pa:
        return np.zeros(len(grid))
    needed = sorted({i, y, *pa})
    n = len(values)
    base = tuple(seed) if isinstance(seed, (tuple, list)) else (seed,)
    rows = []
    skipped = 0
    for rep in range(B):
        rng = np.random.default_rng((*base, rep))
        idx = rng.integers(0, n, n)
        sample = values[idx]
        if any(np.ptp(sample[:, c]) == 0 for c in needed):
            skipped += 1
            continue
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", BoundaryExtensionWarning)
                fits_b = {c: fit_column(sample[:, c], c) for c in needed}
                lr = latent_beta(fits_b, sample, g, i, y)
                rows.append(_curve_values(fits_b, lr.beta_i, i, y, grid,
                                          clip_to_support=True))
        except (EstimationError, ValueError):
            skipped += 1
    if skipped > 0.1 * B:
        raise EstimationError(
            f"{skipped}/{B} bootstrap replicates degenerate")
    return np.std(np.asarray(rows), axis=0, ddof=1)


# -- closed-form oracles --------------------------------------------------------


@dataclass(frozen=True)
class SeriesSpec:
    """Known-truth ingredients for the conditional-moment series.

    ``sigma_latent`` is the latent correlation matrix with the response as
    its last index. ``fy_derivs(k)`` returns the k-th derivative of the
    response transform at ``z0``; ``fi_inv`` and ``fi_inv_deriv`` are the
    cause's inverse transform and its derivative.
    """

    sigma_latent: np.ndarray
    fy_derivs: object
    fi_inv: object
    fi_inv_deriv: object
    z0: float = 0.0
    k_max: int = 10

    def __post_init__(self):
        sigma = np.asarray(self.sigma_latent, dtype=float)
        object.__setattr__(self, "sigma_latent", sigma)
        if self.k_max < 1 or self.k_max > 30:
            raise ValueError("truncation order must lie in 1..30")
        try:
            np.linalg.cholesky(sigma)
        except np.linalg.LinAlgError:
            raise ValueError("latent correlation matrix must be positive definite") from None


def _double_factorial(m: int) -> float:
    out = 1.0
    while m > 1:
        out *= m
        m -= 2
    return out


def regression_ingredients(sigma: np.ndarray, i: int, pa) -> tuple[float, np.ndarray, float]:
    """(beta_i, beta_parents, rho_squared) of the response's latent regression
    on (i, parents), with the response at the last index of ``sigma``."""
    sigma = np.asarray(sigma, dtype=float)
    resp = sigma.shape[0] - 1
    idx = [i] + sorted(pa)
    sub = sigma[np.ix_(idx, idx)]
    cross = sigma[resp, idx]
    coefs = np.linalg.solve(sub, cross)
    rho_sq = float(cross @ coefs)
    return float(coefs[0]), np.asarray(coefs[1:], dtype=float), rho_sq


def series_oracle(spec: SeriesSpec, i: int, pa, x_i: float) -> float:
    """Causal effect from the truncated conditional-moment expansion.

    Sums, for k = 1..k_max, the derivative of the conditional k-th moment of
    the response's latent score, using the closed-form normal moments; parent
    contributions enter through the even moments of beta_pa' Z_pa. The chain
    rule factor (f_i^{-1})'(x_i) multiplies the total.
    """
    sigma = spec.sigma_latent
    pa = sorted(pa)
    resp = sigma.shape[0] - 1
    if i == resp or any(q == resp for q in pa):
        raise ValueError("the response index cannot appear among the regressors")
    beta_i, beta_pa, rho_sq = regression_ingredients(sigma, i, pa)
    one_minus = 1.0 - rho_sq

    if pa:
        sub_pa = sigma[np.ix_(pa, pa)]
        v = float(beta_pa @ sub_pa @ beta_pa)
    else:
        v = 0.0

    def parent_moment(m: int) -> float:
        if m == 0:
            return 1.0
        if m % 2 == 1 or v == 0.0:
            return 0.0
        return v ** (m // 2) * _double_factorial(m - 1)

    z_i = float(spec.fi_inv(x_i))
    shift = -spec.z0 + beta_i * z_i

    terms = []
    for k in range(1, spec.k_max + 1):
        fk = float(spec.fy_derivs(k))
        if fk == 0.0:
            terms.append(0.0)
            continue
        inner = 0.0
        for r in range((k - 1) // 2 + 1):
            coef_r = math.comb(k, 2 * r) * _double_factorial(2 * r - 1) * one_minus ** r
            acc = 0.0
            for s in range(1, k - 2 * r + 1):
                mom = parent_moment(k - 2 * r - s)
                if mom == 0.0:
                    continue
                acc += math.comb(k - 2 * r, s) * s * beta_i * shift ** (s - 1) * mom
            inner += coef_r * acc
        terms.append(fk / math.factorial(k) * inner)

    tail = sum(abs(t) for t in terms[-2:])
    if len(terms) >= 2 and tail > 1e-6:
        raise SeriesDivergenceError(
            f"series tail {tail:.3g} after {spec.k_max} terms exceeds 1e-6; "
            "the truncated expansion has not settled")
    return float(sum(terms) * spec.fi_inv_deriv(x_i))


def corollary_effect(sigma_y: float, beta_i: float, fi_inv_deriv_at_x: float) -> float:
    """Effect when only the response is normal: sigma * beta * (f_i^{-1})'(x)."""
    if sigma_y <= 0:
        raise ValueError(f"response scale must be positive, got {sigma_y}")
    return sigma_y * beta_i * fi_inv_deriv_at_x


# -- curve serialization --------------------------------------------------------


def write_curve(path, curve: CausalEffectCurve, delimiter: str = ",") -> None:
    """Write one curve as delimited text: dag_id, cause, target, x, effect, sd."""
    lines = [delimiter.join(("dag_id", "cause", "target", "x", "effect", "sd"))]
    for idx in range(len(curve.grid)):
        sd = f"{curve.sd[idx]:.17g}" if curve.sd is not None else ""
        lines.append(delimiter.join((
            str(curve.dag_id), str(curve.cause), str(curve.target),
            f"{curve.grid[idx]:.17g}", f"{curve.values[idx]:.17g}", sd)))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
