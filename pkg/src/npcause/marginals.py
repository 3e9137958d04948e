"""Kernel estimators for marginal CDFs, quantile functions, and derivatives.

One fit per variable, built from the trimmed order statistics and the
variable's own two-sided trim level alpha (alpha_total / p when rows were
trimmed jointly over p variables). The smoothed CDF is

    F(x) = sum_{j>=2} (x_(j) - x_(j-1)) K_b(x - x_(j)) w_j,
    w_j  = alpha + (j-1) (1 - 2 alpha) / N,

so the weights run from alpha to 1 - alpha over the retained order
statistics regardless of how many rows other variables removed; for a
single-variable trim, w_j reduces to the plain alpha + (j-1)/n_total rank
weights. The smoothed quantile function is

    Q(u) = sum_j ((1-2*alpha)/N) K_b(u - c_j) x_(j),  c_j = alpha + j (1-2*alpha)/N.

Both are evaluated through a monotonized grid clipped into [alpha, 1-alpha]
(the only CDF values attainable inside the trimmed box); derivatives come
from the analytic kernel derivative.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .normal import std_cdf, std_pdf, std_quantile


class MarginalError(ValueError):
    """Unusable sample or evaluation outside the fitted range."""


class BoundaryExtensionWarning(UserWarning):
    """Derivative requested outside the bandwidth interior; nearest interior
    value returned instead."""


ISO_GRID_SIZE = 501


def triweight(u):
    """Triweight kernel (35/32)(1-u^2)^3 on [-1, 1].

    Symmetric, twice continuously differentiable, compact support, and its
    value and first two derivatives vanish at +-1.
    """
    u = np.asarray(u, dtype=float)
    inside = np.abs(u) <= 1.0
    w = np.where(inside, 1.0 - u * u, 0.0)
    return (35.0 / 32.0) * w * w * w


def triweight_deriv(u):
    """First derivative of the triweight kernel."""
    u = np.asarray(u, dtype=float)
    inside = np.abs(u) <= 1.0
    w = np.where(inside, 1.0 - u * u, 0.0)
    return (-105.0 / 16.0) * u * w * w


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family and the two smoothing bandwidths."""

    bandwidth_cdf: float
    bandwidth_quantile: float
    family: str = "triweight"

    def __post_init__(self):
        if self.family != "triweight":
            raise MarginalError(f"unsupported kernel family {self.family!r}")
        if not (self.bandwidth_cdf > 0 and self.bandwidth_quantile > 0):
            raise MarginalError("bandwidths must be positive")


def default_kernel(column, alpha: float,
                   bandwidth_cdf: float | None = None,
                   bandwidth_quantile: float | None = None) -> KernelSpec:
    """Rule-of-thumb bandwidths: 1.06*sd*N^(-1/5) on the data scale for the
    CDF smoother, 0.5*(1-2*alpha)*N^(-1/5) on the probability scale for the
    quantile smoother. Either may be overridden."""
    column = np.asarray(column, dtype=float)
    n_ret = len(column)
    if bandwidth_cdf is None:
        sd = float(np.std(column, ddof=1))
        bandwidth_cdf = 1.06 * sd * n_ret ** (-0.2)
    if bandwidth_quantile is None:
        bandwidth_quantile = 0.5 * (1.0 - 2.0 * alpha) * n_ret ** (-0.2)
    return KernelSpec(bandwidth_cdf=bandwidth_cdf, bandwidth_quantile=bandwidth_quantile)


@dataclass(frozen=True)
class MarginalFit:
    """Kernel-smoothed marginal for one variable on its trimmed range."""

    sorted_values: np.ndarray
    n_total: int
    alpha: float
    kernel: KernelSpec
    grid_x: np.ndarray
    grid_cdf: np.ndarray
    grid_u: np.ndarray
    grid_quantile: np.ndarray

    @property
    def n_retained(self) -> int:
        return len(self.sorted_values)

    @property
    def support(self) -> tuple[float, float]:
        """Range of the retained sample."""
        return float(self.sorted_values[0]), float(self.sorted_values[-1])

    @property
    def interior(self) -> tuple[float, float]:
        """Bandwidth interior of the support, where derivatives are reliable."""
        lo, hi = self.support
        b = self.kernel.bandwidth_cdf
        return lo + b, hi - b

    @property
    def quantile_band(self) -> tuple[float, float]:
        b = self.kernel.bandwidth_quantile
        return self.alpha + b, 1.0 - self.alpha - b

    # -- evaluation ------------------------------------------------------

    def _check_support(self, x):
        lo, hi = self.support
        if np.any(x < lo) or np.any(x > hi):
            raise MarginalError(
                f"evaluation point outside trimmed range [{lo:.6g}, {hi:.6g}]")

    def cdf_hat(self, x):
        """Smoothed CDF, monotone by construction, values in [0, 1]."""
        arr = np.asarray(x, dtype=float)
        self._check_support(arr)
        out = np.interp(arr, self.grid_x, self.grid_cdf)
        return out if out.ndim else float(out)

    def cdf_deriv_hat(self, x):
        """Density estimate: analytic derivative of the CDF smoother, clipped
        at zero. Outside the bandwidth interior the nearest interior value is
        returned with a warning."""
        arr = np.asarray(x, dtype=float)
        self._check_support(arr)
        arr = self._clamp_interior(arr, *self.interior)
        b = self.kernel.bandwidth_cdf
        xs = self.sorted_values
        gaps = np.diff(xs)
        weights = _rank_weights(len(xs), self.alpha)
        t = (np.atleast_1d(arr)[:, None] - xs[None, 1:]) / b
        raw = (gaps * weights * triweight_deriv(t)).sum(axis=1) / (b * b)
        out = np.maximum(raw, 0.0)
        return out if np.ndim(x) else float(out[0])

    def quantile_hat(self, u):
        """Smoothed quantile function on the valid probability band."""
        arr = np.asarray(u, dtype=float)
        lo, hi = self.quantile_band
        if np.any(arr < lo) or np.any(arr > hi):
            raise MarginalError(
                f"probability outside the valid band [{lo:.6g}, {hi:.6g}]")
        out = np.interp(arr, self.grid_u, self.grid_quantile)
        return out if out.ndim else float(out)

    def quantile_deriv_hat(self, u):
        """Analytic derivative of the quantile smoother, clipped at zero."""
        arr = np.asarray(u, dtype=float)
        self._check_band(arr)
        lo, hi = self.quantile_band
        arr = self._clamp_interior(arr, lo, hi)
        b = self.kernel.bandwidth_quantile
        xs = self.sorted_values
        n_ret = len(xs)
        span = 1.0 - 2.0 * self.alpha
        nodes = self.alpha + np.arange(1, n_ret + 1) * span / n_ret
        t = (np.atleast_1d(arr)[:, None] - nodes[None, :]) / b
        raw = (span / n_ret) * (triweight_deriv(t) * xs[None, :]).sum(axis=1) / (b * b)
        out = np.maximum(raw, 0.0)
        return out if np.ndim(u) else float(out[0])

    def _check_band(self, u):
        if np.any(u < self.alpha) or np.any(u > 1.0 - self.alpha):
            raise MarginalError(
                f"probability outside [{self.alpha:.6g}, {1 - self.alpha:.6g}]")

    @staticmethod
    def _clamp_interior(arr, lo, hi):
        if lo >= hi:
            raise MarginalError("bandwidth exceeds half the fitted range")
        if np.any(arr < lo) or np.any(arr > hi):
            warnings.warn(
                "derivative evaluated outside the bandwidth interior; "
                "using nearest interior value", BoundaryExtensionWarning,
                stacklevel=3)
            arr = np.clip(arr, lo, hi)
        return arr


@dataclass(frozen=True)
class GaussianMarginal:
    """Exact normal marginal, a drop-in for :class:`MarginalFit`.

    Used to feed known-truth CDFs through the effect pipeline, bypassing the
    kernel smoothers entirely.
    """

    mean: float = 0.0
    sd: float = 1.0
    lower: float = -2.5
    upper: float = 2.5

    @property
    def support(self) -> tuple[float, float]:
        return self.lower, self.upper

    @property
    def interior(self) -> tuple[float, float]:
        return self.lower, self.upper

    @property
    def quantile_band(self) -> tuple[float, float]:
        return 1e-6, 1.0 - 1e-6

    def cdf_hat(self, x):
        return std_cdf((np.asarray(x, dtype=float) - self.mean) / self.sd)

    def cdf_deriv_hat(self, x):
        return std_pdf((np.asarray(x, dtype=float) - self.mean) / self.sd) / self.sd

    def quantile_hat(self, u):
        return self.mean + self.sd * std_quantile(u)

    def quantile_deriv_hat(self, u):
        return self.sd / std_pdf(std_quantile(u))


def _rank_weights(n_ret: int, alpha: float) -> np.ndarray:
    """CDF levels alpha + (j-1)(1-2*alpha)/N attached to x_(2..N)."""
    return alpha + np.arange(1, n_ret) * (1.0 - 2.0 * alpha) / n_ret


def _raw_cdf_sum(x_eval, xs, b, alpha):
    gaps = np.diff(xs)
    weights = _rank_weights(len(xs), alpha)
    t = (x_eval[:, None] - xs[None, 1:]) / b
    return (gaps * weights * triweight(t)).sum(axis=1) / b


def _raw_quantile_sum(u_eval, xs, b, alpha):
    n_ret = len(xs)
    span = 1.0 - 2.0 * alpha
    nodes = alpha + np.arange(1, n_ret + 1) * span / n_ret
    t = (u_eval[:, None] - nodes[None, :]) / b
    return (span / n_ret) * (triweight(t) * xs[None, :]).sum(axis=1) / b


def fit_marginal(column, n_total: int, alpha: float,
                 kernel: KernelSpec | None = None,
                 grid_size: int = ISO_GRID_SIZE) -> MarginalFit:
    """Fit the kernel CDF and quantile smoothers to one trimmed column.

    Parameters
    ----------
    column : array
        Retained observations of the variable (order irrelevant).
    n_total : int
        Original sample size before trimming, kept for the record.
    alpha : float
        This variable's own two-sided trim level (alpha_total / p under
        joint row trimming).
    kernel : KernelSpec, optional
        Bandwidths and family; rule-of-thumb defaults when omitted.
    grid_size : int
        Number of nodes in the monotonizing evaluation grids.
    """
    xs = np.sort(np.asarray(column, dtype=float))
    if len(xs) < 10:
        raise MarginalError(f"need at least 10 retained points, got {len(xs)}")
    if xs[-1] - xs[0] <= 0:
        raise MarginalError("zero-variance column")
    if kernel is None:
        kernel = default_kernel(xs, alpha)

    grid_x = np.linspace(xs[0], xs[-1], grid_size)
    raw_cdf = _raw_cdf_sum(grid_x, xs, kernel.bandwidth_cdf, alpha)
    grid_cdf = np.clip(np.maximum.accumulate(raw_cdf), alpha, 1.0 - alpha)

    b_q = kernel.bandwidth_quantile
    u_lo, u_hi = alpha + b_q, 1.0 - alpha - b_q
    if u_lo >= u_hi:
        raise MarginalError("quantile bandwidth leaves no valid probability band")
    grid_u = np.linspace(u_lo, u_hi, grid_size)
    raw_q = _raw_quantile_sum(grid_u, xs, b_q, alpha)
    grid_quantile = np.maximum.accumulate(raw_q)

    return MarginalFit(sorted_values=xs, n_total=int(n_total), alpha=float(alpha),
                       kernel=kernel, grid_x=grid_x, grid_cdf=grid_cdf,
                       grid_u=grid_u, grid_quantile=grid_quantile)


def fit_trimmed_marginals(trimmed, kernels=None,
                          grid_size: int = ISO_GRID_SIZE) -> list:
    """One :func:`fit_marginal` per column of a trimmed table, each at the
    per-variable trim level alpha / p."""
    values = trimmed.values
    p = values.shape[1]
    alpha_var = trimmed.alpha / p
    return [fit_marginal(values[:, j], trimmed.data.n, alpha_var,
                         kernel=None if kernels is None else kernels[j],
                         grid_size=grid_size)
            for j in range(p)]
