"""Sweeps of the Ehrenfest frequency over hbar and scaling-law fits."""

from __future__ import annotations

import enum
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dynamics import DEFAULT_WEIGHT_FLOOR, EhrenfestPoint, Method, numeric_ehrenfest
from .errors import DomainError, EhrenfestError, FitError, SweepError
from .model import PotentialSpec
from .semiclassics import REGWKB_SPEC, regwkb_ehrenfest, single_well_ehrenfest

__all__ = [
    "SweepConfig",
    "ScalingModel",
    "ScalingFit",
    "ModelSelection",
    "hbar_grid",
    "run_sweep",
    "fit_scaling",
    "model_select",
    "POINTS_PER_DECADE",
]

log = logging.getLogger(__name__)

POINTS_PER_DECADE = 8
NUMERIC_MIN_HBAR = 1e-4


def hbar_grid(decade_hi: float, decade_lo: float, per_decade: int = POINTS_PER_DECADE) -> list[float]:
    """Log-spaced, strictly descending ``hbar`` values from ``10**-decade_hi`` to ``10**-decade_lo``.

    >>> hbar_grid(2, 4, 1)
    [0.01, 0.001, 0.0001]
    """
    if decade_lo <= decade_hi:
        raise DomainError("need decade_lo > decade_hi (hbar runs downwards)")
    count = int(round((decade_lo - decade_hi) * per_decade)) + 1
    return [float(10.0 ** -x) for x in np.linspace(decade_hi, decade_lo, count)]


@dataclass
class SweepConfig:
    """What to sweep and how.

    Attributes
    ----------
    spec : PotentialSpec
    hbar_values : list of float
        Positive and strictly descending.
    method : Method
    weight_floor : float
    workers : int
        Process count for independent hbar values; 1 runs serially.
    outputs : dict
        Optional output paths keyed by product name.
    """

    spec: PotentialSpec
    hbar_values: list
    method: Method = Method.NUMERIC
    weight_floor: float = DEFAULT_WEIGHT_FLOOR
    workers: int = 1
    outputs: dict = field(default_factory=dict)
    allow_small_hbar: bool = False

    def __post_init__(self):
        self.method = Method(self.method)
        hs = [float(h) for h in self.hbar_values]
        if not hs:
            raise DomainError("hbar_values is empty")
        if any(not h > 0 for h in hs):
            raise DomainError("hbar values must be positive")
        if any(b >= a for a, b in zip(hs, hs[1:])):
            raise DomainError("hbar values must be strictly descending")
        self.hbar_values = hs
        if self.method is Method.REG_WKB and self.spec != REGWKB_SPEC:
            raise DomainError("regularized WKB needs the alpha=1, beta=2 double well")
        if self.method is Method.WKB_SINGLE_WELL and self.spec.is_double:
            raise DomainError("single-well WKB needs a single-well potential")
        if self.method is Method.NUMERIC and hs[-1] < NUMERIC_MIN_HBAR and not self.allow_small_hbar:
            raise DomainError(
                f"numeric sweeps stop at hbar = {NUMERIC_MIN_HBAR:g}; set allow_small_hbar to go lower"
            )
        if not self.weight_floor > 0:
            raise DomainError("weight_floor must be positive")
        if self.workers < 1:
            raise DomainError("workers must be >= 1")
        self.outputs = {k: Path(v) for k, v in self.outputs.items()}


def _one_point(spec, hbar, method, weight_floor):
    if method is Method.WKB_SINGLE_WELL:
        return single_well_ehrenfest(spec.beta, hbar)
    if method is Method.REG_WKB:
        return regwkb_ehrenfest(hbar)
    return numeric_ehrenfest(spec, hbar, weight_floor)


def _guarded(args):
    try:
        return _one_point(*args), None
    except (EhrenfestError, ArithmeticError, ValueError, AssertionError) as exc:
        return None, f"{type(exc).__name__}: {exc}"


def run_sweep(cfg: SweepConfig, failures: dict | None = None) -> list[EhrenfestPoint]:
    """One Ehrenfest point per ``hbar`` in descending order.

    Failing ``hbar`` values are logged, stored in ``failures`` (if given) and
    skipped.

    Raises
    ------
    SweepError
        If no ``hbar`` value succeeds.
    """
    jobs = [(cfg.spec, h, cfg.method, cfg.weight_floor) for h in cfg.hbar_values]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_guarded, jobs))
    else:
        results = [_guarded(j) for j in jobs]

    points, failed = [], {}
    for (_, h, _, _), (pt, err) in zip(jobs, results):
        if pt is None:
            log.warning("hbar=%g failed: %s", h, err)
            failed[h] = err
        else:
            points.append(pt)
    if failures is not None:
        failures.update(failed)
    if not points:
        raise SweepError("every hbar value failed", failed)
    return points


class ScalingModel(enum.Enum):
    POWER_LAW = "power_law"
    LOGARITHMIC = "logarithmic"


@dataclass(frozen=True)
class ScalingFit:
    """Straight-line fit in the model's coordinates.

    Power law: ``ln(1/nu_E) = slope * ln(hbar) + intercept``.
    Logarithmic: ``1/nu_E = slope * ln(1/hbar) + intercept``.
    """

    model: ScalingModel
    slope: float
    intercept: float
    r_squared: float
    residuals: tuple

    def predict(self, hbar):
        hbar = np.asarray(hbar, dtype=float)
        if self.model is ScalingModel.POWER_LAW:
            return np.exp(self.slope * np.log(hbar) + self.intercept)
        return self.slope * np.log(1.0 / hbar) + self.intercept


def _coords(hbar, nu_inv, model):
    if model is ScalingModel.POWER_LAW:
        return np.log(hbar), np.log(nu_inv)
    return np.log(1.0 / hbar), nu_inv


def _as_arrays(points):
    if points and isinstance(points[0], EhrenfestPoint):
        return (np.array([p.hbar for p in points]), np.array([p.nu_E_inv for p in points]))
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise FitError("points must be EhrenfestPoints or (hbar, nu_E_inv) pairs")
    return arr[:, 0], arr[:, 1]


def fit_scaling(points, model: ScalingModel) -> ScalingFit:
    """Least-squares line through ``points`` in the coordinates of ``model``.

    ``points`` is a sequence of :class:`EhrenfestPoint` or ``(hbar, 1/nu_E)`` pairs.
    """
    model = ScalingModel(model)
    hbar, nu_inv = _as_arrays(points)
    if hbar.size < 4:
        raise FitError(f"need at least 4 points, got {hbar.size}")
    if np.any(hbar <= 0) or np.any(nu_inv <= 0):
        raise FitError("hbar and 1/nu_E must be positive")
    x, y = _coords(hbar, nu_inv, model)
    xc = x - x.mean()
    sxx = float(np.dot(xc, xc))
    if not sxx > 1e-24 * max(1.0, float(np.dot(x, x))):
        raise FitError("abscissae are degenerate")
    slope = float(np.dot(xc, y - y.mean()) / sxx)
    intercept = float(y.mean() - slope * x.mean())
    res = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(res**2))
    r2 = 0.0 if ss_tot == 0 else min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return ScalingFit(model, slope, intercept, r2, tuple(float(r) for r in res))


@dataclass(frozen=True)
class ModelSelection:
    power_law: ScalingFit
    logarithmic: ScalingFit
    preferred: ScalingModel

    def __iter__(self):
        return iter((self.power_law, self.logarithmic, self.preferred))


def model_select(points) -> ModelSelection:
    """Fit both laws and prefer the higher ``R**2``; ties go to the power law."""
    hbar, _ = _as_arrays(points)
    if hbar.size < 5:
        raise FitError(f"model selection needs at least 5 points, got {hbar.size}")
    if math.log10(hbar.max() / hbar.min()) < 2.0 - 1e-9:
        raise FitError("model selection needs points spanning at least two decades in hbar")
    pl = fit_scaling(points, ScalingModel.POWER_LAW)
    lg = fit_scaling(points, ScalingModel.LOGARITHMIC)
    preferred = ScalingModel.LOGARITHMIC if lg.r_squared > pl.r_squared else ScalingModel.POWER_LAW
    return ModelSelection(pl, lg, preferred)
