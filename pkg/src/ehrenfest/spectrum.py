"""Selected eigenpairs of ``H = -hbar**2/2 d^2/dq^2 + V(q)`` at large quantum numbers.

The solver works on the half line ``[0, q_max]`` for one parity at a time
(``psi'(0) = 0`` or ``psi(0) = 0``) with the Numerov scheme. In the variable
``w = (1 + h**2 f / 12) psi`` the scheme is a symmetric three-term recurrence
whose sign changes count the states below a trial energy, so every level
in a window is isolated by bisection on that count and none can be skipped,
however close a tunnelling doublet is. Energies are computed on two grids
(``h`` and ``h/2``) and Richardson-extrapolated; a third grid on a sample
state guards the extrapolation.

:func:`dense_oracle` is an independent check: the three-point finite
difference Hamiltonian on the full line, diagonalised by Sturm bisection.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from . import _kernels
from .errors import DomainError, NumericalAccuracyError
from .model import PotentialSpec, action_area, potential_value, turning_points

__all__ = [
    "Parity",
    "Grid",
    "EigenState",
    "SpectralWindow",
    "eigen_index_estimate",
    "solve_eigen_window",
    "dense_oracle",
    "richardson",
    "tridiagonal_eigenvalues",
    "count_sign_changes",
]

log = logging.getLogger(__name__)

# tail action (in units of hbar) kept beyond the outer turning point: e^-36 ~ 2e-16
TAIL_ACTION = 36.0
GRID_CHECK_RTOL = 1e-10
DEFAULT_POINTS_PER_WAVELENGTH = 64.0


class Parity(enum.Enum):
    EVEN = "even"
    ODD = "odd"

    @property
    def odd(self) -> bool:
        return self is Parity.ODD


@dataclass(frozen=True)
class Grid:
    """Uniform, symmetric position grid ``q_min, q_min + h, ..., q_max``."""

    q_min: float
    q_max: float
    h: float

    @property
    def size(self) -> int:
        return int(round((self.q_max - self.q_min) / self.h)) + 1

    def points(self) -> np.ndarray:
        return np.linspace(self.q_min, self.q_max, self.size)


@dataclass
class EigenState:
    """One eigenpair; the wavefunction is stored on the half line and mirrored on demand."""

    n: int
    energy: float
    parity: Parity
    grid: Grid
    half_samples: np.ndarray | None = field(default=None, repr=False)

    @property
    def samples(self) -> np.ndarray:
        if self.half_samples is None:
            raise ValueError("wavefunction samples were not kept for this state")
        tail = self.half_samples[1:]
        mirror = -tail[::-1] if self.parity.odd else tail[::-1]
        return np.concatenate([mirror, self.half_samples])

    def positions(self) -> np.ndarray:
        return self.grid.points()

    def nodes(self) -> int:
        return count_sign_changes(self.samples)


@dataclass
class SpectralWindow:
    spec: PotentialSpec
    hbar: float
    eps_min: float
    eps_max: float
    states: list[EigenState]

    def energies(self, parity: Parity | None = None) -> np.ndarray:
        return np.array([s.energy for s in self.states if parity is None or s.parity is parity])

    def by_parity(self, parity: Parity) -> list[EigenState]:
        return [s for s in self.states if s.parity is parity]

    def __len__(self):
        return len(self.states)


def count_sign_changes(samples) -> int:
    """Sign changes of a sampled function, ignoring exact zeros."""
    s = np.sign(np.asarray(samples))
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def richardson(coarse, fine, order=4):
    """Extrapolate two results whose error scales as ``h**order`` (``fine`` at ``h/2``)."""
    f = 2.0**order
    return (f * np.asarray(fine) - np.asarray(coarse)) / (f - 1.0)


def eigen_index_estimate(spec: PotentialSpec, hbar: float, eps: float) -> int:
    """Approximate quantum number of the level at ``eps`` from the enclosed phase-space area."""
    if not hbar > 0:
        raise DomainError("hbar must be positive")
    n = action_area(spec, eps) / (2 * math.pi * hbar) - 0.5
    return max(int(round(n)), 0)


# --- grid construction -------------------------------------------------------


def _tail_extent(spec, hbar, eps):
    """Position beyond the outer turning point where the WKB tail has decayed by ``e**-TAIL_ACTION``."""
    qt = turning_points(spec, eps)[-1]

    def kappa(q):
        return math.sqrt(max(2.0 * (float(potential_value(spec, q)) - eps), 0.0))

    def decay(q):
        if q <= qt:
            return -TAIL_ACTION
        # sqrt(q - qt) behaviour at the turning point is removed by q = qt + u**2
        val, _ = integrate.quad(lambda u: 2.0 * u * kappa(qt + u * u), 0.0, math.sqrt(q - qt), epsrel=1e-8)
        return val / hbar - TAIL_ACTION

    hi = qt + max(1e-3, 0.05 * qt)
    while decay(hi) < 0:
        hi = qt + 2.0 * (hi - qt)
    return optimize.brentq(decay, qt, hi, xtol=1e-12, rtol=1e-10)


def _make_grid(spec, hbar, eps_min, eps_max, points_per_wavelength):
    q_max = _tail_extent(spec, hbar, eps_max)
    wavelength = 2 * math.pi * hbar / math.sqrt(2.0 * (eps_max - spec.min_energy))
    h = wavelength / points_per_wavelength
    # keep 12 + h**2 f >= 6 everywhere so the Numerov weights stay positive
    v_top = float(potential_value(spec, q_max)) - min(eps_min, eps_max)
    if v_top > 0:
        h = min(h, hbar * math.sqrt(3.0 / v_top))
    n = int(math.ceil(q_max / h))
    return q_max, n


class _Level:
    """Numerov eigenvalues for one parity on one half-line grid."""

    def __init__(self, spec, hbar, q_max, n, parity):
        self.q = np.linspace(0.0, q_max, n + 1)
        self.h = q_max / n
        self.v = np.ascontiguousarray(potential_value(spec, self.q), dtype=float)
        self.scale = 2.0 * self.h * self.h / (hbar * hbar)
        self.odd = parity.odd
        self._memo = {}

    def count(self, eps):
        c = self._memo.get(eps)
        if c is None:
            c = _kernels.numerov_count(self.v, self.scale, eps, self.odd)
            self._memo[eps] = c
        return c

    def bracket(self, k, lo, hi):
        """Widen ``[lo, hi]`` until ``count(lo) <= k < count(hi)``."""
        width = max(hi - lo, 1e-12)
        while self.count(lo) > k:
            lo -= width
            width *= 2
        width = max(hi - lo, 1e-12)
        while self.count(hi) <= k:
            hi += width
            width *= 2
        return lo, hi

    def levels(self, ks, lo, hi, tol):
        """Eigenvalues with indices ``ks`` (sorted); ``count(lo) <= ks[0]`` and ``count(hi) > ks[-1]``."""
        out = {}
        stack = [(lo, self.count(lo), hi, self.count(hi))]
        wanted = set(ks)
        while stack:
            a, ca, b, cb = stack.pop()
            if not any(ca <= k < cb for k in wanted):
                continue
            if b - a <= tol(a, b):
                for k in range(ca, cb):
                    if k in wanted:
                        out[k] = 0.5 * (a + b)
                continue
            m = 0.5 * (a + b)
            cm = self.count(m)
            stack.append((a, ca, m, cm))
            stack.append((m, cm, b, cb))
        return np.array([out[k] for k in ks])

    def wavefunction(self, spec, eps):
        qt = turning_points(spec, eps)[-1]
        m = min(max(int(qt / self.h), 2), self.q.size - 3)
        return _kernels.numerov_shoot(self.v, self.scale, eps, self.odd, m)


def _energy_tol(a, b):
    return 4e-16 * max(1.0, abs(a), abs(b))


def _solve_levels(level, ks, guess, spread):
    lo, hi = level.bracket(ks[0], guess[0] - spread, guess[0])
    lo2, hi2 = level.bracket(ks[-1], guess[-1], guess[-1] + spread)
    return level.levels(ks, min(lo, lo2), max(hi, hi2), _energy_tol)


def _parity_window(spec, hbar, eps_min, eps_max, parity, ppw, keep_samples, check_grid):
    q_max, n = _make_grid(spec, hbar, eps_min, eps_max, ppw)
    coarse = _Level(spec, hbar, q_max, n, parity)
    fine = _Level(spec, hbar, q_max, 2 * n, parity)

    k_lo, k_hi = coarse.count(eps_min), coarse.count(eps_max)
    # one extra level on each side: the extrapolated energy may cross a window edge
    ks = list(range(max(k_lo - 1, 0), k_hi + 1))
    lo, hi = coarse.bracket(ks[0], eps_min, eps_max)
    lo, hi = coarse.bracket(ks[-1], lo, hi)
    e_coarse = coarse.levels(ks, lo, hi, _energy_tol)
    spread = max(1e-12, 1e-3 * (np.ptp(e_coarse) if len(ks) > 1 else abs(hi - lo)))
    e_fine = _solve_levels(fine, ks, e_coarse, spread)
    energies = richardson(e_coarse, e_fine)

    if check_grid and ks:
        _check_grid(spec, hbar, q_max, n, parity, ks, e_fine, energies, spread)

    grid = Grid(-q_max, q_max, q_max / n)
    states = []
    for k, e_c, e in zip(ks, e_coarse, energies):
        if not eps_min <= e <= eps_max:
            continue
        nq = 2 * k + 1 if parity.odd else 2 * k
        half = None
        if keep_samples:
            half = _normalised_half(coarse.wavefunction(spec, e_c), coarse.h, parity)
            st = EigenState(nq, float(e), parity, grid, half)
            if st.nodes() != nq:
                raise NumericalAccuracyError(
                    f"state n={nq}: wavefunction has {st.nodes()} nodes; refine the grid"
                )
            states.append(st)
        else:
            states.append(EigenState(nq, float(e), parity, grid, None))
    return states


def _check_grid(spec, hbar, q_max, n, parity, ks, e_fine, energies, spread):
    """Compare the extrapolation on (h, h/2) with (h/2, h/4) for the middle state."""
    i = len(ks) // 2
    finest = _Level(spec, hbar, q_max, 4 * n, parity)
    e4 = _solve_levels(finest, [ks[i]], [e_fine[i]], spread)[0]
    again = richardson(e_fine[i], e4)
    diff = abs(again - energies[i])
    if diff > GRID_CHECK_RTOL * max(1.0, abs(energies[i])):
        raise NumericalAccuracyError(
            f"grid check failed for k={ks[i]}: extrapolated energy moved by {diff:.3g}",
            achieved=diff,
        )


def _normalised_half(psi, h, parity):
    psi = np.asarray(psi, dtype=float)
    full_norm = 2.0 * np.sum(psi[1:] ** 2) + psi[0] ** 2
    psi = psi / math.sqrt(full_norm * h)
    # fix the overall sign: positive just inside the outer turning region
    idx = np.flatnonzero(np.abs(psi) > 1e-3 * np.abs(psi).max())[-1]
    if psi[idx] < 0:
        psi = -psi
    return psi


def solve_eigen_window(
    spec: PotentialSpec,
    hbar: float,
    eps_min: float,
    eps_max: float,
    parity_filter: Parity | None = None,
    *,
    points_per_wavelength: float = DEFAULT_POINTS_PER_WAVELENGTH,
    keep_samples: bool = True,
    check_grid: bool = True,
    max_refinements: int = 2,
) -> SpectralWindow:
    """All eigenstates with energy in ``[eps_min, eps_max]`` (optionally of one parity).

    Parameters
    ----------
    spec : PotentialSpec
        Potential.
    hbar : float
        Rescaled Planck constant.
    eps_min, eps_max : float
        Energy window; clipped below at the potential minimum.
    parity_filter : Parity, optional
        Restrict to even or odd states; both when None.
    points_per_wavelength : float
        Coarse-grid resolution at ``eps_max``; the fine grid doubles it.
    keep_samples : bool
        Store normalised wavefunctions (needed for overlaps).
    check_grid : bool
        Verify the Richardson extrapolation on a sample state with a third
        grid. On failure the resolution is doubled up to ``max_refinements``
        times before :class:`NumericalAccuracyError` is raised.

    Returns
    -------
    SpectralWindow
        States sorted by energy; an empty window is not an error.
    """
    if not hbar > 0:
        raise DomainError("hbar must be positive")
    if not eps_min < eps_max:
        raise DomainError("eps_min must be below eps_max")
    eps_min = max(eps_min, spec.min_energy)
    if eps_max <= spec.min_energy:
        return SpectralWindow(spec, hbar, eps_min, eps_max, [])
    parities = [parity_filter] if parity_filter is not None else [Parity.EVEN, Parity.ODD]

    states = []
    for parity in parities:
        ppw = points_per_wavelength
        for attempt in range(max_refinements + 1):
            try:
                found = _parity_window(spec, hbar, eps_min, eps_max, parity, ppw, keep_samples, check_grid)
                break
            except NumericalAccuracyError as exc:
                if attempt == max_refinements:
                    raise
                log.info("refining grid after: %s", exc)
                ppw *= 2
        ns = [s.n for s in found]
        if any(b - a != 2 for a, b in zip(ns, ns[1:])):
            raise NumericalAccuracyError(f"missing {parity.value} states in window: node counts {ns}")
        states.extend(found)
    states.sort(key=lambda s: s.energy)
    return SpectralWindow(spec, hbar, eps_min, eps_max, states)


# --- independent finite-difference oracle ------------------------------------


def tridiagonal_eigenvalues(diag, off, k, tol=None):
    """The ``k`` lowest eigenvalues of a symmetric tridiagonal matrix by Sturm bisection."""
    diag = np.ascontiguousarray(diag, dtype=float)
    off = np.asarray(off, dtype=float)
    n = diag.size
    if not 0 < k <= n:
        raise DomainError(f"k must be in 1..{n}")
    off2 = np.ascontiguousarray(off * off)
    # Gershgorin bounds
    r = np.zeros(n)
    r[:-1] += np.abs(off)
    r[1:] += np.abs(off)
    lo, hi = float(np.min(diag - r)), float(np.max(diag + r))
    if tol is None:
        tol = 4 * np.finfo(float).eps * max(abs(lo), abs(hi))
    out = np.empty(k)
    # eigenvalue j lies in [lower[j], upper[j]]; every count tightens all brackets
    lower, upper = np.full(k, lo), np.full(k, hi)
    for j in range(k):
        while upper[j] - lower[j] > tol:
            m = 0.5 * (lower[j] + upper[j])
            c = _kernels.tridiag_count(diag, off2, m)
            upper[:c] = np.minimum(upper[:c], m)
            lower[c:] = np.maximum(lower[c:], m)
        out[j] = 0.5 * (lower[j] + upper[j])
    return out


def _fd_levels(spec, hbar, q_max, grid_points, k):
    q = np.linspace(-q_max, q_max, grid_points + 2)[1:-1]
    h = q[1] - q[0]
    diag = hbar * hbar / (h * h) + potential_value(spec, q)
    off = np.full(grid_points - 1, -hbar * hbar / (2 * h * h))
    return tridiagonal_eigenvalues(diag, off, k)


def dense_oracle(spec: PotentialSpec, hbar: float, q_max: float, grid_points: int, k: int, *, extrapolate=False):
    """``k`` lowest eigenvalues of the finite-difference Hamiltonian on ``[-q_max, q_max]``.

    With ``extrapolate=True`` a second grid with half the spacing is solved
    and the pair is Richardson-extrapolated (error ``O(h**2)`` -> ``O(h**4)``).
    """
    if grid_points < 200:
        raise DomainError("grid_points must be at least 200")
    if not 0 < k < grid_points:
        raise DomainError("k out of range")
    e1 = _fd_levels(spec, hbar, q_max, grid_points, k)
    if not extrapolate:
        return e1
    e2 = _fd_levels(spec, hbar, q_max, 2 * grid_points + 1, k)
    return richardson(e1, e2, order=2)
