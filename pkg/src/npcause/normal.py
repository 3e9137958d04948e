"""Standard normal pdf, cdf, quantile, and the latent score transform.

All functions accept scalars or numpy arrays and return the matching shape.
"""

from __future__ import annotations

import numpy as np
from scipy.special import erfc

_SQRT2 = np.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)

# Probabilities are clamped into [CLAMP_BAND, 1 - CLAMP_BAND] before the
# inverse cdf, which caps latent scores at about +-4.75 and keeps the
# 1/pdf(z) factor of the effect estimator finite.
CLAMP_BAND = 1e-6

# Rational approximation coefficients (Acklam), |relative error| < 1.15e-9
# before refinement.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425


def std_pdf(z):
    """Density of the standard normal at ``z``."""
    z = np.asarray(z, dtype=float)
    out = _INV_SQRT_2PI * np.exp(-0.5 * z * z)
    return out if out.ndim else float(out)


def std_cdf(z):
    """Distribution function of the standard normal at ``z``."""
    z = np.asarray(z, dtype=float)
    out = 0.5 * erfc(-z / _SQRT2)
    return out if out.ndim else float(out)


def _acklam(u):
    """Piecewise rational approximation to the standard normal quantile."""
    u = np.asarray(u, dtype=float)
    x = np.empty_like(u)

    lo = u < _P_LOW
    hi = u > 1.0 - _P_LOW
    mid = ~(lo | hi)

    if np.any(mid):
        q = u[mid] - 0.5
        r = q * q
        num = ((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]
        den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
        x[mid] = num * q / den
    if np.any(lo):
        q = np.sqrt(-2.0 * np.log(u[lo]))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        x[lo] = num / den
    if np.any(hi):
        q = np.sqrt(-2.0 * np.log(1.0 - u[hi]))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        x[hi] = -num / den
    return x


def std_quantile(u):
    """Inverse of :func:`std_cdf` on (0, 1).

    Rational approximation refined by one Newton step, so the round trip
    through :func:`std_cdf` is accurate to well below 1e-10.
    """
    arr = np.asarray(u, dtype=float)
    if np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise ValueError("quantile argument must lie strictly inside (0, 1)")
    x = _acklam(arr)
    x = x - (std_cdf(x) - arr) / std_pdf(x)
    return x if x.ndim else float(x)


def to_latent(u):
    """Latent standard-normal score for a (possibly overshooting) probability.

    ``u`` is clamped into [CLAMP_BAND, 1 - CLAMP_BAND] first; smoothed cdf
    values can legitimately fall outside (0, 1) near the trimmed boundary.
    """
    arr = np.asarray(u, dtype=float)
    clamped = np.clip(arr, CLAMP_BAND, 1.0 - CLAMP_BAND)
    z = std_quantile(clamped)
    return z if np.ndim(z) else float(z)
