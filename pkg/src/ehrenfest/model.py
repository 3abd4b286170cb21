"""Rescaled polynomial Hamiltonians and their classical mechanics.

The family is ``H(p, q) = p**2/2 + A q**(2 alpha)/(2 alpha) + q**(2 beta)/(2 beta)``
with ``A = 0`` (single well) or ``A = -1`` (double well), i.e. mass and the
confining coefficient are scaled to one. Physical parameters are mapped onto
this family by :func:`rescale_physical`.

Classical quantities (turning points, enclosed phase-space area, period) are
computed on the half line ``q >= 0`` and doubled, which is legitimate because
every potential in the family is even.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from .errors import DomainError, NumericalAccuracyError

__all__ = [
    "WellKind",
    "PotentialSpec",
    "PhysicalParams",
    "rescale_physical",
    "potential_value",
    "potential_derivative",
    "turning_points",
    "action_area",
    "weyl_count",
    "classical_period",
]

QUAD_RTOL = 1e-10
# relative depth above a double-well minimum below which the harmonic area is used
_BOTTOM_SHELL = 1e-8


class WellKind(enum.Enum):
    SINGLE = "single"
    DOUBLE = "double"


@dataclass(frozen=True)
class PotentialSpec:
    """One member of the rescaled Hamiltonian family.

    ``alpha`` is ignored for single wells. ``beta == 1`` (harmonic oscillator)
    is only accepted through :meth:`harmonic_reference`, which exists for
    validation against exactly solvable results.
    """

    alpha: int
    beta: int
    well_kind: WellKind
    _reference: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.well_kind, WellKind):
            object.__setattr__(self, "well_kind", WellKind(self.well_kind))
        if int(self.alpha) != self.alpha or int(self.beta) != self.beta:
            raise DomainError("alpha and beta must be integers")
        if self.well_kind is WellKind.DOUBLE:
            if not self.beta > self.alpha >= 1:
                raise DomainError(
                    f"double well needs beta > alpha >= 1, got alpha={self.alpha}, beta={self.beta}"
                )
        else:
            lowest = 1 if self._reference else 2
            if self.beta < lowest:
                raise DomainError(f"single well needs beta >= 2, got beta={self.beta}")

    @classmethod
    def single(cls, beta: int) -> "PotentialSpec":
        return cls(1, beta, WellKind.SINGLE)

    @classmethod
    def double(cls, alpha: int, beta: int) -> "PotentialSpec":
        return cls(alpha, beta, WellKind.DOUBLE)

    @classmethod
    def harmonic_reference(cls) -> "PotentialSpec":
        """``V(q) = q**2/2``: exactly solvable reference case."""
        return cls(1, 1, WellKind.SINGLE, _reference=True)

    @property
    def is_double(self) -> bool:
        return self.well_kind is WellKind.DOUBLE

    @property
    def min_energy(self) -> float:
        """Global minimum of the potential."""
        if self.is_double:
            return -1.0 / (2 * self.alpha) + 1.0 / (2 * self.beta)
        return 0.0

    @property
    def q_min(self) -> float:
        """Position of the (right-hand) potential minimum."""
        return 1.0 if self.is_double else 0.0

    def label(self) -> str:
        if self.is_double:
            return f"double(alpha={self.alpha},beta={self.beta})"
        return f"single(beta={self.beta})"


@dataclass(frozen=True)
class PhysicalParams:
    """``H = p**2/(2m) + A q**(2 alpha)/(2 alpha) + B q**(2 beta)/(2 beta)`` in physical units."""

    mass: float = 1.0
    A: float = 0.0
    B: float = 1.0
    tau: float = 1.0

    def __post_init__(self):
        if not self.mass > 0:
            raise DomainError("mass must be positive")
        if not self.B > 0:
            raise DomainError("B must be positive")
        if not self.tau > 0:
            raise DomainError("tau must be positive")
        if self.A > 0:
            raise DomainError("A > 0 is outside the single/double-well family")


def rescale_physical(params: PhysicalParams, alpha: int, beta: int):
    """Map physical parameters onto the rescaled family.

    Returns ``(spec, energy_factor, hbar_factor)``. The factors multiply a
    physical energy and a physical Planck constant to give the rescaled ones;
    divide by them to go back.

    For ``A = 0`` the time unit ``tau`` is arbitrary and enters the factors;
    for ``A < 0`` the well geometry fixes the time unit and ``tau`` is unused.
    """
    m, A, B, tau = params.mass, params.A, params.B, params.tau
    if A > 0:
        raise DomainError("A > 0 is outside the single/double-well family")
    if A == 0:
        spec = PotentialSpec.single(beta)
        k = 1.0 / (beta - 1)
        energy_factor = m ** (-beta * k) * B**k * tau ** (2 * beta * k)
        hbar_factor = m ** (-beta * k) * B**k * tau ** ((beta + 1) * k)
    else:
        spec = PotentialSpec.double(alpha, beta)
        k = 1.0 / (beta - alpha)
        energy_factor = (-A) ** (-beta * k) * B ** (alpha * k)
        hbar_factor = m**-0.5 * (-A) ** (-(beta + 1) * k / 2) * B ** ((alpha + 1) * k / 2)
    return spec, energy_factor, hbar_factor


def potential_value(spec: PotentialSpec, q):
    """Rescaled potential ``V(q)``; accepts scalars or arrays."""
    q2 = np.square(q)
    v = q2**spec.beta / (2 * spec.beta)
    if spec.is_double:
        v = v - q2**spec.alpha / (2 * spec.alpha)
    return v


def potential_derivative(spec: PotentialSpec, q):
    q = np.asarray(q, dtype=float)
    dv = q ** (2 * spec.beta - 1)
    if spec.is_double:
        dv = dv - q ** (2 * spec.alpha - 1)
    return dv


def _check_energy(spec, eps):
    if not np.isfinite(eps):
        raise DomainError("energy must be finite")
    if eps < spec.min_energy:
        raise DomainError(f"energy {eps!r} is below the potential minimum {spec.min_energy!r}")


def _root_in_x(spec, eps, lo, hi):
    # V(sqrt(x)) - eps is monotone on [lo, hi]
    def f(x):
        return potential_value(spec, math.sqrt(x)) - eps

    return optimize.brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def _outer_root_x(spec, eps):
    # smallest x with V increasing past eps; bracket by doubling
    lo = 1.0 if spec.is_double else 0.0
    if spec.is_double and eps >= 0:
        lo = (spec.beta / spec.alpha) ** (1.0 / (spec.beta - spec.alpha))
    hi = max(2.0 * lo, 1.0)
    while potential_value(spec, math.sqrt(hi)) < eps:
        hi *= 2.0
    if potential_value(spec, math.sqrt(lo)) >= eps:
        return lo
    return _root_in_x(spec, eps, lo, hi)


def _half_turning_points(spec, eps):
    """Turning points on ``q >= 0`` as ``(inner, outer)``; ``inner`` is None without a barrier."""
    _check_energy(spec, eps)
    if spec.is_double and spec.alpha == 1 and spec.beta == 2:
        # x**2/4 - x/2 - eps = 0 with x = q**2
        s = math.sqrt(1.0 + 4.0 * eps)
        outer = math.sqrt(1.0 + s)
        if eps > 0:
            return None, outer
        inner = math.sqrt(max(-4.0 * eps / (1.0 + s), 0.0))
        return inner, outer
    if spec.is_double and eps <= 0:
        outer = math.sqrt(_outer_root_x(spec, eps))
        inner = 0.0 if eps == 0 else math.sqrt(_root_in_x(spec, eps, 0.0, 1.0))
        return inner, outer
    if not spec.is_double:
        return None, (2 * spec.beta * eps) ** (1.0 / (2 * spec.beta))
    return None, math.sqrt(_outer_root_x(spec, eps))


def turning_points(spec: PotentialSpec, eps: float) -> list[float]:
    """All real solutions of ``V(q) = eps``, sorted ascending (with multiplicity at a saddle)."""
    inner, outer = _half_turning_points(spec, eps)
    if inner is None:
        return [-outer, outer]
    return [-outer, -inner if inner else 0.0, inner, outer]


def _quad(f, a, b, what):
    val, err, *_ = integrate.quad(f, a, b, epsabs=0.0, epsrel=QUAD_RTOL, limit=400, full_output=1)
    scale = max(abs(val), np.finfo(float).tiny)
    if err > 50 * QUAD_RTOL * scale:
        raise NumericalAccuracyError(f"{what}: quadrature did not converge", achieved=err / scale)
    return val


def _segment_integral(g, a, b, left_singular, right_singular, what):
    """``int_a^b g(q) dq`` with square-root substitution at singular endpoints."""
    if b <= a:
        return 0.0
    mid = 0.5 * (a + b)
    total = 0.0
    if left_singular:
        total += _quad(lambda u: 2.0 * u * g(a + u * u), 0.0, math.sqrt(mid - a), what)
    else:
        total += _quad(g, a, mid, what)
    if right_singular:
        total += _quad(lambda u: 2.0 * u * g(b - u * u), 0.0, math.sqrt(b - mid), what)
    else:
        total += _quad(g, mid, b, what)
    return total


def _segments(spec, eps):
    """Allowed intervals on ``q >= 0`` as ``(a, b, left_singular, right_singular)``."""
    inner, outer = _half_turning_points(spec, eps)
    if inner is None:
        if spec.is_double:
            # V(0) = 0 < eps: regular at 0 but sharply curved when eps is small
            c = min(0.5 * outer, (2 * spec.alpha * eps) ** (1.0 / (2 * spec.alpha)))
            return [(0.0, c, False, False), (c, outer, False, True)]
        return [(0.0, outer, False, True)]
    return [(inner, outer, inner > 0, True)]


def _half_line_integral(spec, eps, g, what):
    return sum(
        _segment_integral(g, a, b, left, right, what) for a, b, left, right in _segments(spec, eps)
    )


def action_area(spec: PotentialSpec, eps: float) -> float:
    """Phase-space area enclosed by the energy shell ``H(p, q) = eps``."""
    _check_energy(spec, eps)
    if eps == spec.min_energy:
        return 0.0
    if spec.is_double and eps - spec.min_energy < _BOTTOM_SHELL * abs(spec.min_energy):
        # eps - V cancels catastrophically here; two harmonic wells with V'' = 2 (beta - alpha)
        omega = math.sqrt(2.0 * (spec.beta - spec.alpha))
        return 2.0 * 2.0 * math.pi * (eps - spec.min_energy) / omega

    def momentum(q):
        return math.sqrt(max(2.0 * (eps - float(potential_value(spec, q))), 0.0))

    # two signs of p, two mirror images in q
    return 4.0 * _half_line_integral(spec, eps, momentum, "action_area")


def weyl_count(spec: PotentialSpec, eps: float, hbar: float) -> float:
    """Semiclassical number of states with energy in ``[eps - hbar, eps + hbar]``."""
    if not hbar > 0:
        raise DomainError("hbar must be positive")
    lower = max(eps - hbar, spec.min_energy)
    return (action_area(spec, eps + hbar) - action_area(spec, lower)) / (2 * math.pi * hbar)


def classical_period(spec: PotentialSpec, eps: float) -> float:
    """Period of the classical orbit at energy ``eps``.

    Below the barrier of a double well the orbit stays in one well; above it,
    it encircles both. The separatrix ``eps == 0`` has no finite period.
    """
    _check_energy(spec, eps)
    if eps == spec.min_energy:
        raise DomainError("period is undefined at the bottom of the well")
    if spec.is_double and eps == 0:
        raise DomainError("separatrix energy eps = 0 has a divergent period")

    def inv_speed(q):
        return 1.0 / math.sqrt(max(2.0 * (eps - float(potential_value(spec, q))), 1e-300))

    half = _half_line_integral(spec, eps, inv_speed, "classical_period")
    # one lobe is traversed back and forth; an encircling orbit covers the mirror too
    if spec.is_double and eps < 0:
        return 2.0 * half
    return 4.0 * half
