"""Semiclassical spectra and weights.

Single well ``V = q**(2 beta) / (2 beta)``: closed-form WKB energies, the
weights of the origin-centred Gaussian packet on even levels, and the
small-``hbar`` limit ``P0(nu) = 4 K0(4 pi |nu|)`` of the frequency spectrum.

Double well with ``alpha = 1, beta = 2``: the barrier-top (regularized)
quantization condition

    1 / sqrt(1 + exp(2 pi eps / hbar)) = cos(phi(eps, hbar)),
    phi = 4/(3 hbar) - (eps/hbar) ln(hbar/16) - arg Gamma(1/2 + i eps/hbar) - pi.

Writing the left side as ``cos a`` with ``a = arctan(exp(pi eps / hbar))``
splits the roots into two ladders ``phi + a = 2 pi k`` (even states) and
``phi - a = 2 pi k`` (odd states). Both phase functions are strictly
increasing in ``eps`` near the barrier top, so each ladder is enumerated by
its integer ``k`` and every root is bracketed exactly once.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from decimal import Decimal, localcontext

import numpy as np
from scipy import optimize

from .dynamics import EhrenfestPoint, Method, OverlapSet
from .errors import DomainError, InsufficientSupportError
from .model import PotentialSpec
from .spectrum import Parity
from .specfun import arg_gamma_half_plus_it, bessel_k0, gamma_real

__all__ = [
    "WkbLevel",
    "RegWkbRoot",
    "RegWkbRoots",
    "RegWkbValidityWarning",
    "wkb_delta",
    "wkb_energy",
    "wkb_level_index",
    "sigma",
    "wkb_weight",
    "wkb_levels",
    "wkb_overlap_set",
    "limit_distribution",
    "single_well_ehrenfest",
    "regwkb_phase",
    "regwkb_residual",
    "regwkb_roots",
    "regwkb_ehrenfest",
    "REGWKB_SPEC",
]

REGWKB_SPEC = PotentialSpec.double(1, 2)
# |eps| beyond this fraction of the barrier height 1/4 leaves the barrier-top regime
REGWKB_VALID_EPS = 0.1
WKB_WINDOW = 20.0

# enough digits of pi to reduce 4/(3 hbar) modulo 2 pi for hbar down to 1e-30
_PI_60 = Decimal("3.14159265358979323846264338327950288419716939937510582097494459")


def _check_beta(beta):
    if int(beta) != beta or beta < 1:
        raise DomainError(f"beta must be an integer >= 1, got {beta!r}")


def _check_hbar(hbar):
    if not hbar > 0:
        raise DomainError("hbar must be positive")


# ---------------------------------------------------------------- single well


def wkb_delta(beta: int) -> float:
    """Constant ``delta(beta)`` of the WKB energy formula; ``delta(1) == 1``."""
    _check_beta(beta)
    if beta == 1:
        return 1.0
    b = float(beta)
    num = math.sqrt(math.pi / 2) * gamma_real(0.5 * (3.0 + 1.0 / b))
    return num / (gamma_real(1.0 + 1.0 / (2 * b)) * (2 * b) ** (1.0 / (2 * b)))


def wkb_energy(beta: int, hbar: float, n):
    """WKB level ``eps_n = ((n + 1/2) hbar delta) ** (2 beta / (beta + 1))``.

    ``n`` may be an integer or an integer array.
    """
    _check_beta(beta)
    _check_hbar(hbar)
    n = np.asarray(n)
    if np.any(n < 0):
        raise DomainError("n must be non-negative")
    base = (n + 0.5) * hbar * wkb_delta(beta)
    if beta == 1:
        return float(base) if base.ndim == 0 else base
    out = base ** (2.0 * beta / (beta + 1))
    return float(out) if np.ndim(out) == 0 else out


def wkb_level_index(beta: int, hbar: float, eps):
    """Continuous inverse ``n(eps)`` of :func:`wkb_energy`."""
    _check_beta(beta)
    _check_hbar(hbar)
    eps = np.asarray(eps, dtype=float)
    out = eps ** ((beta + 1) / (2.0 * beta)) / (hbar * wkb_delta(beta)) - 0.5
    return float(out) if out.ndim == 0 else out


def sigma(beta: int, hbar: float, eps):
    """Phase ``2 sqrt(2) (2 beta)**(1/(2 beta)) eps**((beta+1)/(2 beta)) / hbar``."""
    eps = np.asarray(eps, dtype=float)
    b = float(beta)
    out = 2.0 * math.sqrt(2.0) * (2 * b) ** (1.0 / (2 * b)) * eps ** ((b + 1) / (2 * b)) / hbar
    return float(out) if out.ndim == 0 else out


def _weight_ratio(beta):
    # large-energy limit of the denominator: sqrt(pi) Gamma(1 + 1/(2b)) / Gamma((1+b)/(2b))
    b = float(beta)
    return math.sqrt(math.pi) * gamma_real(1.0 + 1.0 / (2 * b)) / gamma_real((1.0 + b) / (2 * b))


def wkb_weight(beta: int, hbar: float, eps):
    """Weight ``|c_eps|**2`` of the centred packet on the even WKB level at ``eps``.

    .. math::

        |c|^2 = \\frac{2\\sqrt{\\pi}(2\\beta)^{-1/(2\\beta)}\\hbar^{1/2}
                      \\varepsilon^{-1/(2\\beta)} e^{-2\\varepsilon/\\hbar}}
                     {R(\\beta) + \\sin\\sigma/\\sigma},
        \\qquad R(\\beta) = \\frac{\\sqrt\\pi\\,\\Gamma(1 + 1/(2\\beta))}
                                 {\\Gamma((1+\\beta)/(2\\beta))}.

    ``R`` is fixed by requiring that the even-level weights sum to one when
    ``sigma`` is large (see the decisions ledger for the comparison with
    numerically computed overlaps).

    Raises
    ------
    DomainError
        If any ``eps <= 0``.
    """
    _check_beta(beta)
    _check_hbar(hbar)
    eps = np.asarray(eps, dtype=float)
    if np.any(~(eps > 0)):
        raise DomainError("wkb_weight is defined for eps > 0")
    b = float(beta)
    s = sigma(beta, hbar, eps)
    sinc = np.sinc(np.asarray(s) / math.pi)
    num = (
        2.0 * math.sqrt(math.pi) * (2 * b) ** (-1.0 / (2 * b)) * math.sqrt(hbar)
        * eps ** (-1.0 / (2 * b)) * np.exp(-2.0 * eps / hbar)
    )
    out = num / (_weight_ratio(beta) + sinc)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class WkbLevel:
    n: int
    energy: float
    weight: float


def wkb_levels(beta: int, hbar: float, eps_max: float | None = None) -> list[WkbLevel]:
    """Even WKB levels with energies up to ``eps_max`` (default ``20 hbar``)."""
    eps_max = WKB_WINDOW * hbar if eps_max is None else eps_max
    n_top = max(0, int(math.floor(wkb_level_index(beta, hbar, eps_max))))
    ns = np.arange(0, n_top + 1, 2)
    eps = np.atleast_1d(wkb_energy(beta, hbar, ns))
    w = np.atleast_1d(wkb_weight(beta, hbar, eps))
    return [WkbLevel(int(n), float(e), float(c)) for n, e, c in zip(ns, eps, w)]


def wkb_overlap_set(beta: int, hbar: float, eps_max: float | None = None) -> OverlapSet:
    """WKB levels packaged as an :class:`OverlapSet` (odd levels carry no weight)."""
    levels = wkb_levels(beta, hbar, eps_max)
    return OverlapSet(
        hbar,
        np.array([lv.n for lv in levels]),
        np.array([lv.energy for lv in levels]),
        np.array([lv.weight for lv in levels]),
    )


def limit_distribution(nu):
    """``P0(nu) = 4 K0(4 pi |nu|)``; diverges logarithmically at ``nu = 0``."""
    nu = np.asarray(nu, dtype=float)
    if np.any(nu == 0):
        raise DomainError("P0 has a logarithmic singularity at nu = 0")
    out = 4.0 * bessel_k0(4.0 * math.pi * np.abs(nu))
    return float(out) if np.ndim(out) == 0 else out


def single_well_ehrenfest(beta: int, hbar: float) -> EhrenfestPoint:
    """``nu_E = (eps_2 - eps_0) / (2 pi hbar)`` from the WKB levels."""
    e0 = wkb_energy(beta, hbar, 0)
    e2 = wkb_energy(beta, hbar, 2)
    return EhrenfestPoint(hbar, (e2 - e0) / (2 * math.pi * hbar), Method.WKB_SINGLE_WELL, e0, e2, 0, 2)


# ------------------------------------------------------ regularized double well


class RegWkbValidityWarning(UserWarning):
    """Energies far from the barrier top, where the quantization condition is not justified."""


@dataclass(frozen=True)
class RegWkbRoot:
    energy: float
    branch_index: int
    phase_at_root: float
    parity: Parity


class RegWkbRoots(list):
    """List of roots sorted by energy with any validity warnings attached."""

    def __init__(self, roots=(), notes=()):
        super().__init__(roots)
        self.warnings = list(notes)

    def energies(self, parity: Parity | None = None) -> np.ndarray:
        return np.array([r.energy for r in self if parity is None or r.parity is parity])


def _phase_offset(hbar):
    """``(4/(3 hbar) - pi) mod 2 pi`` evaluated in extended precision."""
    with localcontext() as ctx:
        ctx.prec = 60
        two_pi = 2 * _PI_60
        c = Decimal(4) / (Decimal(3) * Decimal(hbar)) - _PI_60
        return float(c - two_pi * (c / two_pi).to_integral_value(rounding="ROUND_FLOOR"))


def _reduced_phase(eps, hbar, offset):
    t = np.asarray(eps, dtype=float) / hbar
    return offset - t * math.log(hbar / 16.0) - arg_gamma_half_plus_it(t)


def regwkb_phase(eps, hbar: float):
    """``phi(eps, hbar)`` reduced modulo ``2 pi`` in its constant part (same cosine)."""
    _check_hbar(hbar)
    return _reduced_phase(eps, hbar, _phase_offset(hbar))


def regwkb_residual(eps, hbar: float):
    """``1/sqrt(1 + exp(2 pi eps/hbar)) - cos(phi)``; zero at every quantized energy."""
    eps = np.asarray(eps, dtype=float)
    # 1/sqrt(1 + e^{2x}) written to stay finite for large x
    x = math.pi * eps / hbar
    lhs = np.where(x > 0, np.exp(-x) / np.sqrt(1.0 + np.exp(-2.0 * np.abs(x))), 1.0 / np.sqrt(1.0 + np.exp(2.0 * np.minimum(x, 0.0))))
    out = lhs - np.cos(regwkb_phase(eps, hbar))
    return float(out) if out.ndim == 0 else out


def _ladder_phase(eps, hbar, offset, sign):
    a = np.arctan(np.exp(np.minimum(math.pi * np.asarray(eps, dtype=float) / hbar, 700.0)))
    return _reduced_phase(eps, hbar, offset) + sign * a


def regwkb_roots(hbar: float, eps_min: float, eps_max: float) -> RegWkbRoots:
    """All quantized energies of the ``alpha = 1, beta = 2`` double well in ``[eps_min, eps_max]``.

    Even-ladder roots are labelled :attr:`Parity.EVEN`; ``branch_index`` is
    the ladder integer ``k``. A :class:`RegWkbValidityWarning` is issued and
    recorded on the result when the window leaves the barrier-top region.
    """
    _check_hbar(hbar)
    if not eps_max > eps_min:
        raise DomainError("empty energy window")
    notes = []
    if max(abs(eps_min), abs(eps_max)) > REGWKB_VALID_EPS:
        msg = f"window [{eps_min:g}, {eps_max:g}] extends beyond |eps| <= {REGWKB_VALID_EPS}"
        warnings.warn(msg, RegWkbValidityWarning, stacklevel=2)
        notes.append(msg)

    offset = _phase_offset(hbar)
    xtol = max(1e-13 * hbar, 1e-300)
    roots = []
    for sign, parity in ((1.0, Parity.EVEN), (-1.0, Parity.ODD)):
        g_lo = float(_ladder_phase(eps_min, hbar, offset, sign))
        g_hi = float(_ladder_phase(eps_max, hbar, offset, sign))
        if g_hi <= g_lo:
            raise DomainError("ladder phase is not increasing on this window")
        for k in range(math.ceil(g_lo / (2 * math.pi)), math.floor(g_hi / (2 * math.pi)) + 1):
            target = 2 * math.pi * k

            def f(e):
                return float(_ladder_phase(e, hbar, offset, sign)) - target

            e = optimize.brentq(f, eps_min, eps_max, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)
            roots.append(RegWkbRoot(e, k, float(regwkb_phase(e, hbar)), parity))
    roots.sort(key=lambda r: r.energy)
    return RegWkbRoots(roots, notes)


def regwkb_ehrenfest(hbar: float, half_width: float = WKB_WINDOW) -> EhrenfestPoint:
    """Smallest gap between neighbouring even roots with ``|eps| <= half_width * hbar``."""
    w = half_width * hbar
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegWkbValidityWarning)
        roots = regwkb_roots(hbar, -w, w)
    even = [r for r in roots if r.parity is Parity.EVEN]
    if len(even) < 2:
        raise InsufficientSupportError(f"{len(even)} even roots in |eps| <= {w:g}; window too narrow")
    eps = np.array([r.energy for r in even])
    i = int(np.argmin(np.diff(eps)))
    return EhrenfestPoint(
        hbar,
        (eps[i + 1] - eps[i]) / (2 * math.pi * hbar),
        Method.REG_WKB,
        float(eps[i]),
        float(eps[i + 1]),
        even[i].branch_index,
        even[i + 1].branch_index,
    )
