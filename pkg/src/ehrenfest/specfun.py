"""Special functions needed by the semiclassical formulas.

* :func:`gamma_real` / :func:`log_gamma_real` -- Lanczos approximation
  (g = 7, nine coefficients).
* :func:`arg_gamma_half_plus_it` -- continuous branch of ``arg Gamma(1/2 + i t)``
  from the Stirling series, after shifting the argument with the recurrence
  ``Gamma(z) = Gamma(z + N) / prod(z + k)`` when ``|t|`` is small.
* :func:`bessel_k0` -- power series with logarithmic term for ``x <= 2``;
  for ``x > 2`` the trapezoidal rule on ``K0(x) = int_0^inf exp(-x cosh u) du``,
  which converges geometrically because the integrand is entire and decays
  doubly exponentially.

Every public function accepts scalars or arrays. ``*_with_error`` variants
return :class:`SpecFunResult` with an absolute error estimate.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import DomainError

EULER_GAMMA = 0.57721566490153286061
_EPS = np.finfo(float).eps

_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

# B_2k / (2k (2k - 1)) for the Stirling series of log Gamma
_STIRLING = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
)
_STIRLING_MIN_ABS = 20.0


class SpecFunResult(NamedTuple):
    value: float
    est_error: float


def _lanczos_sum(z):
    acc = np.full_like(z, _LANCZOS_COEF[0])
    for k, c in enumerate(_LANCZOS_COEF[1:], start=1):
        acc = acc + c / (z + k)
    return acc


def _as_positive(x, name):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError(f"{name} requires x > 0")
    return x


def _unwrap(arr, scalar):
    return float(arr) if scalar else arr


def log_gamma_real(x):
    """``log Gamma(x)`` for ``x > 0``."""
    scalar = np.ndim(x) == 0
    x = _as_positive(x, "log_gamma_real")
    small = x < 0.5
    # Gamma(x) = Gamma(x + 1) / x keeps the Lanczos argument >= 1/2
    xs = np.where(small, x + 1.0, x)
    z = xs - 1.0
    t = z + _LANCZOS_G + 0.5
    out = 0.5 * math.log(2 * math.pi) + (z + 0.5) * np.log(t) - t + np.log(_lanczos_sum(z))
    out = np.where(small, out - np.log(x), out)
    return _unwrap(out, scalar)


def gamma_real(x):
    """``Gamma(x)`` for ``x > 0``; accurate to about 1e-14 relative on ``(0, 50]``."""
    scalar = np.ndim(x) == 0
    x = _as_positive(x, "gamma_real")
    small = x < 0.5
    xs = np.where(small, x + 1.0, x)
    z = xs - 1.0
    t = z + _LANCZOS_G + 0.5
    with np.errstate(over="ignore"):
        # split the power so t**(z + 1/2) e^-t does not overflow before the product
        half = t ** (0.5 * (z + 0.5))
        out = math.sqrt(2 * math.pi) * half * (half * np.exp(-t)) * _lanczos_sum(z)
    out = np.where(small, out / x, out)
    return _unwrap(out, scalar)


def gamma_real_with_error(x: float) -> SpecFunResult:
    value = gamma_real(x)
    return SpecFunResult(value, 16 * _EPS * abs(value))


def _stirling_imag(x, t):
    """Imaginary part of the Stirling series of log Gamma(x + i t), ``|x + i t| >= 20``."""
    z = x + 1j * t
    out = (z - 0.5) * np.log(z) - z
    zinv = 1.0 / z
    zinv2 = zinv * zinv
    term = zinv
    for c in _STIRLING:
        out = out + c * term
        term = term * zinv2
    return out.imag


def arg_gamma_half_plus_it(t):
    """Continuous branch of ``arg Gamma(1/2 + i t)``, odd in ``t``, zero at ``t = 0``."""
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    a = np.abs(t)
    out = np.empty_like(a)

    big = a > _STIRLING_MIN_ABS
    if np.any(big):
        out[big] = _stirling_imag(0.5, a[big])
    if np.any(~big):
        ab = a[~big]
        shift = int(_STIRLING_MIN_ABS)
        acc = _stirling_imag(0.5 + shift, ab)
        for k in range(shift):
            acc = acc - np.arctan2(ab, k + 0.5)
        out[~big] = acc
    out = np.where(t < 0, -out, out)
    out[t == 0] = 0.0
    return float(out[0]) if scalar else out


def arg_gamma_half_plus_it_with_error(t: float) -> SpecFunResult:
    value = arg_gamma_half_plus_it(t)
    # rounding in t log|z| dominates; the truncated Stirling tail is below 1e-20
    return SpecFunResult(value, 32 * _EPS * (abs(value) + abs(t) + 1.0))


def _k0_series(x):
    y = 0.25 * x * x
    lead = np.log(0.5 * x) + EULER_GAMMA
    term = np.ones_like(x)
    i0 = np.ones_like(x)
    hsum = np.zeros_like(x)
    harmonic = 0.0
    for k in range(1, 40):
        term = term * y / (k * k)
        harmonic += 1.0 / k
        i0 = i0 + term
        hsum = hsum + term * harmonic
        if np.all(term * harmonic < 1e-18 * np.abs(hsum)):
            break
    return -lead * i0 + hsum


def _k0_trapezoid(x):
    out = np.empty_like(x)
    for i, xi in enumerate(x):
        # node spacing resolves the Gaussian core of width 1/sqrt(x)
        h = min(0.25, 0.5 / math.sqrt(xi))
        # x (cosh u - 1) = 2 x sinh(u/2)**2 reaches 45 at u_max
        u_max = 2.0 * math.asinh(math.sqrt(45.0 / (2.0 * xi)))
        u = np.arange(0.0, u_max + h, h)
        f = np.exp(-2.0 * xi * np.sinh(0.5 * u) ** 2)
        s = h * (0.5 * f[0] + f[1:].sum())
        out[i] = math.exp(-xi) * s if xi < 745.0 else 0.0
    return out


def bessel_k0(x):
    """Modified Bessel function of the second kind, order zero, for ``x > 0``."""
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(_as_positive(x, "bessel_k0"))
    out = np.empty_like(x)
    small = x <= 2.0
    if np.any(small):
        out[small] = _k0_series(x[small])
    if np.any(~small):
        out[~small] = _k0_trapezoid(x[~small])
    if scalar:
        return float(out[0])
    return out


def bessel_k0_with_error(x: float) -> SpecFunResult:
    value = bessel_k0(x)
    if x <= 2.0:
        # cancellation between the log term and the series near x = 2
        err = 8 * _EPS * (abs(value) + abs(math.log(0.5 * x) + EULER_GAMMA) * 2.3)
    else:
        err = 8 * _EPS * abs(value)
    return SpecFunResult(value, err)
