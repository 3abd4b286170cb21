import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from ehrenfest.dynamics import (
    EhrenfestPoint,
    Method,
    OverlapSet,
    UnderCoverageWarning,
    WavePacket,
    binned_spectrum,
    compute_overlaps,
    ehrenfest_frequency,
    frequency_spectrum,
    numeric_ehrenfest,
    numeric_overlaps,
    packet_value,
    survival_probability,
    wigner_value,
)
from ehrenfest.errors import DomainError, InsufficientSupportError
from ehrenfest.model import PotentialSpec
from ehrenfest.semiclassics import wkb_energy
from ehrenfest.spectrum import Parity, solve_eigen_window

DW = PotentialSpec.double(1, 2)


@pytest.fixture(scope="module")
def dw_overlaps():
    return numeric_overlaps(DW, 1e-3)


def _random_set(seed, size=12, hbar=1e-2):
    rng = np.random.default_rng(seed)
    w = rng.random(size)
    return OverlapSet(hbar, np.arange(size) * 2, np.sort(rng.normal(size=size)) * 0.1, 0.9 * w / w.sum())


class TestPacket:
    def test_peak(self):
        assert packet_value(WavePacket(0.01), 0.0) == pytest.approx((math.pi * 0.01) ** -0.25)

    def test_norm(self):
        wp = WavePacket(1e-3, p0=0.3, q0=-0.2)
        q = np.linspace(-1.5, 1.1, 40001)
        assert integrate.simpson(np.abs(packet_value(wp, q)) ** 2, x=q) == pytest.approx(1.0, abs=1e-10)

    def test_real_and_even(self):
        q = np.linspace(-1, 1, 101)
        v = packet_value(WavePacket(0.05), q)
        assert np.all(v.imag == 0) and np.allclose(v, v[::-1])

    def test_wigner(self):
        wp = WavePacket(0.02, 0.1, -0.3)
        assert wigner_value(wp, 0.1, -0.3) == pytest.approx(1 / (math.pi * 0.02))
        x = np.linspace(-1.5, 1.5, 1201)
        P, Q = np.meshgrid(x + 0.1, x - 0.3, indexing="ij")
        W = wigner_value(wp, P, Q)
        dx = x[1] - x[0]
        assert W.sum() * dx * dx == pytest.approx(1.0, abs=1e-10)
        assert (W * (P - 0.1) ** 2).sum() * dx * dx == pytest.approx(0.01, rel=1e-8)

    def test_rejects_bad_hbar(self):
        with pytest.raises(DomainError):
            WavePacket(0.0)


class TestOverlaps:
    def test_parity_rule(self):
        win = solve_eigen_window(DW, 1e-2, -0.05, 0.05)
        os = compute_overlaps(win, WavePacket(1e-2))
        assert np.all(os.n % 2 == 0)
        assert len(os.odd_weights) == len(win.by_parity(Parity.ODD))
        assert np.all(os.odd_weights < 1e-20)

    def test_undercoverage_warning(self):
        win = solve_eigen_window(DW, 1e-2, 0.01, 0.05, Parity.EVEN)
        with pytest.warns(UnderCoverageWarning):
            compute_overlaps(win, WavePacket(1e-2))

    def test_hbar_mismatch(self):
        win = solve_eigen_window(DW, 1e-2, -0.01, 0.01)
        with pytest.raises(DomainError):
            compute_overlaps(win, WavePacket(2e-2))

    def test_captured_and_sorted(self, dw_overlaps):
        assert MIN <= dw_overlaps.captured_mass <= 1 + 1e-8
        assert np.all(np.diff(dw_overlaps.eps) > 0)
        assert np.all(dw_overlaps.odd_weights < 1e-20)

    def test_decay_away_from_barrier(self, dw_overlaps):
        os = dw_overlaps
        x = os.eps / os.hbar
        logw = np.log(os.weight)
        # envelope slope of ln|c|^2 against eps/hbar on either side (oscillations allowed)
        right = np.polyfit(x[x > 2], logw[x > 2], 1)[0]
        left = np.polyfit(x[x < -2], logw[x < -2], 1)[0]
        assert right < -1 and left > 1
        assert os.weight[x > 5].max() < os.weight.max() * 1e-2

    def test_harmonic_ground_state_captures_everything(self):
        win = solve_eigen_window(PotentialSpec.harmonic_reference(), 1.0, 0.0, 10.0)
        os = compute_overlaps(win, WavePacket(1.0))
        assert os.weight[0] == pytest.approx(1.0, abs=1e-10)


MIN = 0.999


class TestSurvival:
    def test_initial_value(self, dw_overlaps):
        assert survival_probability(dw_overlaps, 0.0) == pytest.approx(dw_overlaps.captured_mass**2, rel=1e-12)

    def test_bounded(self, dw_overlaps):
        t = np.linspace(0, 200, 501)
        assert np.all(survival_probability(dw_overlaps, t) <= survival_probability(dw_overlaps, 0.0) + 1e-12)

    def test_harmonic_period(self):
        hbar = 0.5
        n = np.array([0, 2])
        os = OverlapSet(hbar, n, wkb_energy(1, hbar, n), np.array([0.7, 0.3]))
        t = np.linspace(0, 3, 17)
        assert np.allclose(survival_probability(os, t + math.pi), survival_probability(os, t), atol=1e-12)
        # two-level closed form
        exact = 0.49 + 0.09 + 2 * 0.21 * np.cos(2 * t)
        assert np.allclose(survival_probability(os, t), exact, atol=1e-12)

    def test_negative_time(self, dw_overlaps):
        with pytest.raises(DomainError):
            survival_probability(dw_overlaps, -1.0)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_cosine_reconstruction(self, seed):
        os = _random_set(seed)
        t = np.random.default_rng(seed).uniform(0, 50, 100)
        fs = frequency_spectrum(os)
        assert np.allclose(fs.survival_probability(t), survival_probability(os, t), atol=1e-10, rtol=0)


class TestFrequencySpectrum:
    def test_single_state(self):
        fs = frequency_spectrum(OverlapSet(1e-2, [0], [0.1], [0.4]))
        assert fs.nu.size == 0 and fs.zero_weight == pytest.approx(0.16)

    def test_two_states(self):
        fs = frequency_spectrum(OverlapSet(1e-2, [0, 2], [0.0, 0.05], [0.3, 0.6]))
        assert fs.nu.tolist() == pytest.approx([0.05 / (2 * math.pi * 1e-2)])
        assert fs.weight.tolist() == pytest.approx([0.18])

    @given(st.integers(0, 2**31 - 1))
    def test_parseval(self, seed):
        fs = frequency_spectrum(_random_set(seed))
        assert 2 * fs.total_weight + fs.zero_weight == pytest.approx(fs.captured_mass**2, abs=1e-10)

    def test_binned_density_integrates(self, dw_overlaps):
        fs = frequency_spectrum(dw_overlaps)
        nu, dens = binned_spectrum(fs, 0.01, 50.0)
        assert 2 * dens.sum() * 0.01 + fs.zero_weight / fs.captured_mass**2 == pytest.approx(1.0, abs=1e-8)

    def test_empty(self):
        with pytest.raises(DomainError):
            frequency_spectrum(OverlapSet(1e-2, [], [], []))


class TestEhrenfestFrequency:
    def test_single_well_is_lowest_pair(self):
        hbar = 1e-3
        os = numeric_overlaps(PotentialSpec.single(2), hbar, check_odd=False)
        pt = ehrenfest_frequency(os)
        assert (pt.n_lo, pt.n_hi) == (0, 2)
        assert pt.nu_E == pytest.approx((os.eps[1] - os.eps[0]) / (2 * math.pi * hbar))

    def test_floor_excludes_small_weights(self):
        os = OverlapSet(1.0, [0, 2, 4], [0.0, 1.0, 1.1], [0.5, 0.5, 1e-14])
        assert ehrenfest_frequency(os).n_hi == 2
        assert ehrenfest_frequency(os, 1e-15).n_hi == 4

    def test_insufficient(self):
        with pytest.raises(InsufficientSupportError):
            ehrenfest_frequency(OverlapSet(1.0, [0, 2], [0.0, 1.0], [0.5, 1e-13]))

    def test_floor_sensitivity(self, dw_overlaps):
        base = ehrenfest_frequency(dw_overlaps).nu_E
        for floor in (1e-11, 1e-13):
            assert ehrenfest_frequency(dw_overlaps, floor).nu_E == pytest.approx(base, rel=1e-2)

    def test_pair_near_barrier_top(self, dw_overlaps):
        pt = ehrenfest_frequency(dw_overlaps)
        fs = frequency_spectrum(dw_overlaps)
        assert pt.nu_E >= np.min(np.diff(dw_overlaps.eps)) / (2 * math.pi * 1e-3) - 1e-15
        assert fs.nu[fs.weight >= 1e-24].min() == pytest.approx(pt.nu_E)
        assert pt.n_hi - pt.n_lo == 2
        assert abs(pt.eps_lo) < 2e-3 and abs(pt.eps_hi) < 2e-3

    def test_pair_approaches_barrier_as_hbar_shrinks(self):
        pts = [numeric_ehrenfest(DW, h) for h in (1e-2, 1e-3)]
        mids = [abs(0.5 * (p.eps_lo + p.eps_hi)) for p in pts]
        assert mids[1] < mids[0]

    def test_pair_rederives_nu(self):
        pt = numeric_ehrenfest(DW, 1e-2)
        assert pt.nu_E == (pt.eps_hi - pt.eps_lo) / (2 * math.pi * pt.hbar)

    def test_point_positive(self):
        with pytest.raises(DomainError):
            EhrenfestPoint(1.0, 0.0, Method.NUMERIC)
