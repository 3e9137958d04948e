"""Ground-truth generators and numerical oracles.

Random linear structural equation models, Gaussian and copula-transformed
sampling, the two-node exponential-margin model with its quadrature oracle,
and the mean-absolute-deviation benchmark comparing the regression-constant
and functional effect estimators against known truth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr

from .dataset import DataMatrix, trim
from .effects import EstimationError, effect_grid, gaussian_effect, latent_beta, nce_curve
from .graph import Dag, enumerate_extensions
from .marginals import fit_marginal
from .normal import std_cdf, std_pdf, std_quantile
from .rpc import CiTestConfig, estimate_cpdag


class QuadratureError(ArithmeticError):
    """Refinement check failed; the quadrature value is untrusted."""


@dataclass(frozen=True)
class LinearSem:
    """Linear SEM X = A X + eps with strictly lower-triangular weights.

    A[j, i] != 0 encodes the edge i -> j (so edges always point from lower to
    higher index).
    """

    weights: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", a)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("weight matrix must be square")
        if np.any(np.triu(a) != 0):
            raise ValueError("weights must be strictly lower triangular")

    @property
    def p(self) -> int:
        return self.weights.shape[0]

    def dag(self) -> Dag:
        edges = {(i, j) for j, i in zip(*np.nonzero(self.weights))}
        return Dag(self.p, edges)

    def covariance(self) -> np.ndarray:
        """Population covariance (I - A)^{-1} (I - A)^{-T} for unit noise."""
        ident = np.eye(self.p)
        m = np.linalg.inv(ident - self.weights)
        return m @ m.T


def random_dag(p: int, s: float, seed) -> LinearSem:
    """Random lower-triangular SEM: each possible edge appears independently
    with probability ``s``, weight magnitude uniform on [0.1, 1] with a
    random sign."""
    if not 0.0 < s < 1.0:
        raise ValueError(f"edge probability must lie in (0, 1), got {s}")
    rng = np.random.default_rng(seed)
    a = np.zeros((p, p))
    for j in range(1, p):
        for i in range(j):
            if rng.random() < s:
                a[j, i] = rng.uniform(0.1, 1.0) * (1.0 if rng.random() < 0.5 else -1.0)
    return LinearSem(a)


def _column_names(p: int) -> tuple[str, ...]:
    return tuple(f"X{i + 1}" for i in range(p - 1)) + ("Y",)


def sample_gaussian(sem: LinearSem, n: int, seed) -> DataMatrix:
    """Draw n rows by forward substitution in index order with standard
    normal noise."""
    rng = np.random.default_rng(seed)
    eps = rng.standard_normal((n, sem.p))
    x = np.empty_like(eps)
    for j in range(sem.p):
        x[:, j] = x[:, :j] @ sem.weights[j, :j] + eps[:, j]
    return DataMatrix(x, _column_names(sem.p), response=_column_names(sem.p)[-1])


def npn_transform(data: DataMatrix, marginal: str = "exponential",
                  rate: float = 1.0) -> DataMatrix:
    """Push each standardized column through a target marginal's quantile
    function composed with the normal CDF; ranks are preserved exactly."""
    values = np.asarray(data.values, dtype=float)
    out = np.empty_like(values)
    for j in range(data.p):
        col = values[:, j]
        z = (col - col.mean()) / col.std(ddof=1)
        if marginal == "identity":
            out[:, j] = z
        elif marginal == "exponential":
            # F^{-1}(Phi(z)) = -log(1 - Phi(z)) / rate, via the log survival
            out[:, j] = -log_ndtr(-z) / rate
        else:
            raise ValueError(f"unknown marginal {marginal!r}")
    return DataMatrix(out, data.names, response=data.response)


def sample_exp_model(n: int, seed) -> DataMatrix:
    """Two-node model X -> Y with Exponential(1) margins and latent
    correlation 1/sqrt(2): X = Q(Phi(Z1)), Y = Q(Phi((Z1 + Z2)/sqrt(2)))."""
    rng = np.random.default_rng(seed)
    z1 = rng.standard_normal(n)
    z2 = rng.standard_normal(n)
    x = -log_ndtr(-z1)
    y = -log_ndtr(-(z1 + z2) / np.sqrt(2.0))
    return DataMatrix(np.column_stack([x, y]), ("X", "Y"), response="Y")


@dataclass(frozen=True)
class ExpCopulaModel:
    """Bivariate Gaussian copula with exponential margins."""

    rho: float
    lambda_x: float = 1.0
    lambda_y: float = 1.0

    def __post_init__(self):
        if not abs(self.rho) < 1.0:
            raise ValueError(f"dependence parameter must lie in (-1, 1), got {self.rho}")
        if self.lambda_x <= 0 or self.lambda_y <= 0:
            raise ValueError("rates must be positive")


def _composite_simpson(f, a: float, b: float, nodes: int) -> float:
    if nodes % 2 == 0:
        raise ValueError("Simpson rule needs an odd node count")
    xs = np.linspace(a, b, nodes)
    ys = f(xs)
    h = (b - a) / (nodes - 1)
    weights = np.ones(nodes)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    return float(h / 3.0 * (weights * ys).sum())


_W_LIMIT = 8.0
_BASE_NODES = 4001


def exp_conditional_mean(m: ExpCopulaModel, x: float, nodes: int = _BASE_NODES) -> float:
    """E[Y | X = x] for the exponential-margin copula, by quadrature on the
    latent scale of Y."""
    if x <= 0:
        raise ValueError(f"x must be positive, got {x}")
    v = std_quantile(float(-np.expm1(-m.lambda_x * x)))
    scale = np.sqrt(1.0 - m.rho ** 2)

    def integrand(w):
        y = -log_ndtr(-w) / m.lambda_y
        t = (w - m.rho * v) / scale
        return y * std_pdf(t) / scale

    return _composite_simpson(integrand, -_W_LIMIT, _W_LIMIT, nodes)


def _exp_effect_once(m: ExpCopulaModel, x: float, nodes: int) -> float:
    v = std_quantile(float(-np.expm1(-m.lambda_x * x)))
    scale_sq = 1.0 - m.rho ** 2
    scale = np.sqrt(scale_sq)

    def integrand(w):
        y = -log_ndtr(-w) / m.lambda_y
        t = (w - m.rho * v) / scale
        return y * (-t) * std_pdf(t)

    integral = _composite_simpson(integrand, -_W_LIMIT, _W_LIMIT, nodes)
    dv_dx = m.lambda_x * np.exp(-m.lambda_x * x) / std_pdf(v)
    return float(-m.rho / scale_sq * dv_dx * integral)


def exp_causal_effect_oracle(m: ExpCopulaModel, x: float) -> float:
    """Exact CE(Y | X = x) for the exponential-margin copula.

    The y-integral is evaluated after substituting the latent score
    w = Phi^{-1}(F(y)), which turns the integrand into a smooth, Gaussian-
    decaying function of w; composite Simpson on [-8, 8] with a doubled-mesh
    agreement check.
    """
    if x <= 0:
        raise ValueError(f"x must be positive, got {x}")
    if m.rho == 0.0:
        return 0.0
    coarse = _exp_effect_once(m, x, _BASE_NODES)
    fine = _exp_effect_once(m, x, 2 * _BASE_NODES - 1)
    denom = max(abs(fine), 1e-12)
    if abs(fine - coarse) / denom > 1e-5:
        raise QuadratureError(
            f"refinement disagreement {abs(fine - coarse) / denom:.2e} at x={x}")
    return fine


# -- benchmark ------------------------------------------------------------------


def population_effect(sem: LinearSem, i: int, y: int) -> float:
    """True Gaussian effect of i on y: zero when y is a parent of i, else the
    population regression coefficient of i in y ~ (i, parents(i))."""
    g = sem.dag()
    pa = sorted(g.parents(i))
    if y in pa:
        return 0.0
    sigma = sem.covariance()
    idx = [i] + pa
    coefs = np.linalg.solve(sigma[np.ix_(idx, idx)], sigma[idx, y])
    return float(coefs[0])


def _mad_one_rep(p, s, n, method, dag_mode, ci_alpha, alpha_trim, grid_size,
                 corr_source, cap, rep_seed):
    ss = np.random.SeedSequence(rep_seed)
    seed_dag, seed_sample = ss.spawn(2)
    sem = random_dag(p, s, seed_dag)
    data = sample_gaussian(sem, n, seed_sample)
    truth = {(i, y): population_effect(sem, i, y)
             for i in range(p) for y in range(p) if i != y}

    if dag_mode == "known":
        dags = [sem.dag()]
    else:
        trimmed = trim(data, alpha_trim)
        cfg = CiTestConfig(alpha_ci=ci_alpha)
        cpdag = estimate_cpdag(trimmed, cfg, source=corr_source)
        dags = enumerate_extensions(cpdag, cap=cap)

    devs = []
    if method == "ida":
        for g in dags:
            for (i, y), theta in truth.items():
                est = gaussian_effect(data, g, i, y)
                devs.append(abs(est - theta))
    elif method == "nce":
        trimmed = trim(data, alpha_trim)
        values = trimmed.values
        fits = [fit_marginal(values[:, j], data.n, alpha_trim) for j in range(p)]
        for g in dags:
            for (i, y), theta in truth.items():
                if y in g.parents(i):
                    devs.append(abs(0.0 - theta))
                    continue
                curve = nce_curve(fits, values, g, i, y, grid_size=grid_size)
                devs.append(float(np.mean(np.abs(curve.values - theta))))
    else:
        raise ValueError(f"unknown method {method!r}")
    return float(np.mean(devs))


def mad_experiment(p: int, s: float, n: int, reps: int, method: str,
                   dag_mode: str = "known", ci_alpha: float = 0.01,
                   seed: int = 0, alpha_trim: float = 0.05,
                   grid_size: int = 101, corr_source: str = "kendall",
                   cap: int = 256) -> dict:
    """Mean absolute deviation of estimated effects from the population
    truth, over ``reps`` independently generated SEMs.

    Per replicate: draw a random DAG and a Gaussian sample, estimate the
    effect of every ordered variable pair (under the known DAG or each
    member of the learned equivalence class), and average |estimate - truth|;
    functional estimates are averaged over their evaluation grid first.
    Failed replicates are recorded and excluded.
    """
    if reps < 2:
        raise ValueError(f"need at least 2 replicates, got {reps}")
    if dag_mode not in ("known", "learned"):
        raise ValueError(f"unknown dag_mode {dag_mode!r}")
    per_rep = []
    failures = 0
    for rep in range(reps):
        try:
            per_rep.append(_mad_one_rep(p, s, n, method, dag_mode, ci_alpha,
                                        alpha_trim, grid_size, corr_source,
                                        cap, [seed, rep]))
        except (EstimationError, ValueError, np.linalg.LinAlgError):
            failures += 1
    if not per_rep:
        raise EstimationError("all replicates failed")
    arr = np.asarray(per_rep)
    return {
        "config": {"p": p, "s": s, "n": n, "reps": reps, "method": method,
                   "dag_mode": dag_mode, "ci_alpha": ci_alpha, "seed": seed,
                   "alpha_trim": alpha_trim, "grid_size": grid_size,
                   "corr_source": corr_source},
        "reps_ok": len(per_rep),
        "reps_failed": failures,
        "mad_mean": float(arr.mean()),
        "mad_sd": float(arr.std(ddof=1)) if len(arr) > 1 else 0.0,
        "per_rep": [float(v) for v in per_rep],
    }
