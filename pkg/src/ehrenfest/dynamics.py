"""Initial wave packet, overlap weights, survival probability and its spectrum.

The packet is the minimum-uncertainty Gaussian of width ``sqrt(hbar)``
centred at ``(p0, q0)``. Its weights ``|c_n|**2`` on a numerically resolved
spectral window define the line spectrum ``P(nu)`` of the survival
probability, whose lowest nonzero frequency is the Ehrenfest frequency.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError, InsufficientSupportError
from .model import PotentialSpec
from .spectrum import DEFAULT_POINTS_PER_WAVELENGTH, Parity, SpectralWindow, solve_eigen_window

__all__ = [
    "WavePacket",
    "OverlapSet",
    "FrequencySpectrum",
    "Method",
    "EhrenfestPoint",
    "UnderCoverageWarning",
    "packet_value",
    "wigner_value",
    "compute_overlaps",
    "survival_probability",
    "frequency_spectrum",
    "binned_spectrum",
    "ehrenfest_frequency",
    "numeric_overlaps",
    "numeric_ehrenfest",
    "DEFAULT_WEIGHT_FLOOR",
    "ODD_WEIGHT_LIMIT",
    "MIN_CAPTURED_MASS",
]

DEFAULT_WEIGHT_FLOOR = 1e-12
ODD_WEIGHT_LIMIT = 1e-20
MIN_CAPTURED_MASS = 0.999


class UnderCoverageWarning(UserWarning):
    """The energy window misses a noticeable part of the packet's weight."""


class Method(enum.Enum):
    NUMERIC = "numeric"
    WKB_SINGLE_WELL = "wkb"
    REG_WKB = "regwkb"


@dataclass(frozen=True)
class WavePacket:
    hbar: float
    p0: float = 0.0
    q0: float = 0.0

    def __post_init__(self):
        if not self.hbar > 0:
            raise DomainError("hbar must be positive")


def packet_value(wp: WavePacket, q):
    """``<q|psi(0)>`` of the Gaussian packet."""
    q = np.asarray(q, dtype=float)
    amp = (math.pi * wp.hbar) ** -0.25 * np.exp(-((q - wp.q0) ** 2) / (2 * wp.hbar))
    if wp.p0 == 0.0:
        return amp.astype(complex)
    return amp * np.exp(1j * wp.p0 * q / wp.hbar)


def wigner_value(wp: WavePacket, p, q):
    """Wigner function of the packet: a phase-space Gaussian of variance ``hbar/2`` per axis."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return np.exp(-((p - wp.p0) ** 2) / wp.hbar - (q - wp.q0) ** 2 / wp.hbar) / (math.pi * wp.hbar)


@dataclass
class OverlapSet:
    """Energies and weights ``|c_n|**2`` sorted by energy.

    ``odd_weights`` keeps the (vanishing) weights of odd states that were
    computed and then dropped, so the parity selection rule can be audited.
    """

    hbar: float
    n: np.ndarray
    eps: np.ndarray
    weight: np.ndarray
    odd_weights: np.ndarray | None = None

    def __post_init__(self):
        order = np.argsort(self.eps, kind="stable")
        self.n = np.asarray(self.n, dtype=int)[order]
        self.eps = np.asarray(self.eps, dtype=float)[order]
        self.weight = np.asarray(self.weight, dtype=float)[order]
        if np.any(self.weight < 0):
            raise DomainError("weights must be non-negative")

    @property
    def captured_mass(self) -> float:
        return float(np.sum(self.weight))

    @property
    def entries(self) -> list[tuple[int, float, float]]:
        return [(int(a), float(b), float(c)) for a, b, c in zip(self.n, self.eps, self.weight)]

    def __len__(self):
        return self.n.size


def _simpson_overlap(state, wp):
    q = state.positions()
    psi = packet_value(wp, q)
    return integrate.simpson(np.conj(psi) * state.samples, dx=state.grid.h)


def compute_overlaps(window: SpectralWindow, wp: WavePacket) -> OverlapSet:
    """Weights ``|<psi(0)|phi_n>|**2`` for every state of the window.

    Odd states are evaluated, checked against the parity selection rule
    (which holds for a packet centred at the origin) and dropped.
    A warning is emitted when less than 0.999 of the norm is captured.
    """
    if not math.isclose(window.hbar, wp.hbar, rel_tol=1e-12):
        raise DomainError("window and packet use different hbar")
    centred = wp.p0 == 0.0 and wp.q0 == 0.0
    n, eps, weight, odd = [], [], [], []
    for st in window.states:
        c2 = float(abs(_simpson_overlap(st, wp)) ** 2)
        if st.parity is Parity.ODD and centred:
            if c2 >= ODD_WEIGHT_LIMIT:
                raise AssertionError(f"odd state n={st.n} has weight {c2:.3g}; parity rule violated")
            odd.append(c2)
            continue
        n.append(st.n)
        eps.append(st.energy)
        weight.append(c2)
    out = OverlapSet(window.hbar, np.array(n, dtype=int), np.array(eps), np.array(weight), np.array(odd))
    if out.captured_mass < MIN_CAPTURED_MASS:
        warnings.warn(
            f"captured mass {out.captured_mass:.6f} < {MIN_CAPTURED_MASS}; widen the energy window",
            UnderCoverageWarning,
            stacklevel=2,
        )
    return out


def survival_probability(os: OverlapSet, t):
    """``P(t) = |sum_n |c_n|**2 exp(-i eps_n t / hbar)|**2`` for scalar or array ``t``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("t must be non-negative")
    # a common energy shift only changes the global phase
    ref = float(np.dot(os.weight, os.eps) / max(os.captured_mass, 1e-300))
    phase = np.multiply.outer(t, (os.eps - ref) / os.hbar)
    amp = np.sum(os.weight * np.exp(-1j * phase), axis=-1)
    return np.abs(amp) ** 2


@dataclass
class FrequencySpectrum:
    """Positive-frequency lines ``(nu_nm, |c_n|**2 |c_m|**2)``; each also appears at ``-nu_nm``."""

    hbar: float
    nu: np.ndarray
    weight: np.ndarray
    zero_weight: float
    captured_mass: float

    @property
    def total_weight(self) -> float:
        """Weight of the positive half, i.e. of one sign."""
        return float(np.sum(self.weight))

    def survival_probability(self, t):
        """Cosine-sum reconstruction of ``P(t)``."""
        t = np.asarray(t, dtype=float)
        return self.zero_weight + 2.0 * np.sum(
            self.weight * np.cos(2 * math.pi * np.multiply.outer(t, self.nu)), axis=-1
        )


def frequency_spectrum(os: OverlapSet) -> FrequencySpectrum:
    """All transition lines of ``P(nu)`` with ``nu > 0``."""
    if len(os) == 0:
        raise DomainError("empty overlap set")
    i, j = np.triu_indices(len(os), k=1)
    # entries are sorted by energy, so eps[j] >= eps[i]
    nu = (os.eps[j] - os.eps[i]) / (2 * math.pi * os.hbar)
    w = os.weight[i] * os.weight[j]
    order = np.argsort(nu, kind="stable")
    return FrequencySpectrum(
        os.hbar,
        nu[order],
        w[order],
        float(np.sum(os.weight**2)),
        os.captured_mass,
    )


def binned_spectrum(fs: FrequencySpectrum, bin_width=0.01, nu_max=2.0, nu_min=0.0):
    """Histogram of the positive-frequency lines as a probability density.

    Normalised by ``captured_mass**2`` so that, with its mirror image and the
    ``nu = 0`` line, the density integrates to one. Returns bin centres and
    densities.
    """
    nbins = int(round((nu_max - nu_min) / bin_width))
    edges = nu_min + bin_width * np.arange(nbins + 1)
    hist, _ = np.histogram(fs.nu, bins=edges, weights=fs.weight)
    norm = fs.captured_mass**2 if fs.captured_mass > 0 else 1.0
    return 0.5 * (edges[1:] + edges[:-1]), hist / (bin_width * norm)


@dataclass(frozen=True)
class EhrenfestPoint:
    """Ehrenfest frequency at one ``hbar`` with the pair of levels that sets it."""

    hbar: float
    nu_E: float
    method: Method
    eps_lo: float = math.nan
    eps_hi: float = math.nan
    n_lo: int = -1
    n_hi: int = -1

    def __post_init__(self):
        if not self.nu_E > 0:
            raise DomainError("nu_E must be positive")

    @property
    def nu_E_inv(self) -> float:
        return 1.0 / self.nu_E


def ehrenfest_frequency(
    os: OverlapSet, weight_floor: float = DEFAULT_WEIGHT_FLOOR, method: Method = Method.NUMERIC
) -> EhrenfestPoint:
    """Smallest ``nu_nm > 0`` among pairs whose weights both reach ``weight_floor``."""
    keep = os.weight >= weight_floor
    if np.count_nonzero(keep) < 2:
        raise InsufficientSupportError(
            f"{np.count_nonzero(keep)} states above weight floor {weight_floor:g}; need two"
        )
    eps, n = os.eps[keep], os.n[keep]
    # sorted energies: the minimum positive difference is between neighbours
    gaps = np.diff(eps)
    pos = np.flatnonzero(gaps > 0)
    if pos.size == 0:
        raise InsufficientSupportError("all weighted levels are degenerate")
    i = pos[np.argmin(gaps[pos])]
    lo, hi = float(eps[i]), float(eps[i + 1])
    return EhrenfestPoint(os.hbar, (hi - lo) / (2 * math.pi * os.hbar), method, lo, hi, int(n[i]), int(n[i + 1]))


def _spot_check_odd(spec, hbar, centre, wp, ppw):
    """Largest odd-state weight in a narrow window around ``centre``."""
    win = solve_eigen_window(
        spec, hbar, max(centre - 2 * hbar, spec.min_energy), centre + 2 * hbar, Parity.ODD,
        points_per_wavelength=ppw, check_grid=False,
    )
    worst = 0.0
    for st in win.states:
        worst = max(worst, float(abs(_simpson_overlap(st, wp)) ** 2))
    if worst >= ODD_WEIGHT_LIMIT:
        raise AssertionError(f"odd-state weight {worst:.3g} violates the parity rule")
    return worst


def numeric_overlaps(
    spec: PotentialSpec,
    hbar: float,
    *,
    half_width: float = 20.0,
    points_per_wavelength: float = DEFAULT_POINTS_PER_WAVELENGTH,
    check_odd: bool = True,
) -> OverlapSet:
    """Weights of the centred packet on numerically computed even states.

    The energy window is ``[V_min, half_width * hbar]`` for a single well and
    ``|eps| <= half_width * hbar`` for a double well (clipped at the bottom
    of the wells). It is doubled once if less than 0.999 of the norm is
    captured. With ``check_odd`` the odd states near the weight maximum are
    solved too and their weights recorded in ``odd_weights``.

    Raises
    ------
    InsufficientSupportError
        If the widened window still misses more than 0.001 of the norm.
    """
    wp = WavePacket(hbar)
    for width in (half_width, 2 * half_width):
        lo = max(spec.min_energy, -width * hbar) if spec.is_double else spec.min_energy
        win = solve_eigen_window(
            spec, hbar, lo, width * hbar, Parity.EVEN, points_per_wavelength=points_per_wavelength
        )
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UnderCoverageWarning)
            os = compute_overlaps(win, wp)
        if os.captured_mass >= MIN_CAPTURED_MASS:
            break
    else:
        raise InsufficientSupportError(
            f"captured mass {os.captured_mass:.6f} < {MIN_CAPTURED_MASS} at hbar={hbar:g}"
        )
    if check_odd:
        centre = float(os.eps[np.argmax(os.weight)])
        os.odd_weights = np.array([_spot_check_odd(spec, hbar, centre, wp, points_per_wavelength)])
    return os


def numeric_ehrenfest(
    spec: PotentialSpec,
    hbar: float,
    weight_floor: float = DEFAULT_WEIGHT_FLOOR,
    **kwargs,
) -> EhrenfestPoint:
    """Full numeric pipeline: spectrum window, overlaps, smallest weighted gap."""
    os = numeric_overlaps(spec, hbar, **kwargs)
    pt = ehrenfest_frequency(os, weight_floor, Method.NUMERIC)
    if pt.n_hi - pt.n_lo != 2:
        raise AssertionError(f"minimising pair n={pt.n_lo},{pt.n_hi} is not adjacent in the even ladder")
    return pt
