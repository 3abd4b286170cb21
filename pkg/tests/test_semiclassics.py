import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from ehrenfest.dynamics import Method
from ehrenfest.errors import DomainError, InsufficientSupportError
from ehrenfest.model import PotentialSpec, action_area
from ehrenfest.specfun import gamma_real
from ehrenfest.spectrum import Parity, solve_eigen_window
from ehrenfest.semiclassics import (
    RegWkbValidityWarning,
    limit_distribution,
    regwkb_ehrenfest,
    regwkb_residual,
    regwkb_roots,
    sigma,
    single_well_ehrenfest,
    wkb_delta,
    wkb_energy,
    wkb_level_index,
    wkb_levels,
    wkb_overlap_set,
    wkb_weight,
)

DW = PotentialSpec.double(1, 2)


class TestWkbLevels:
    def test_delta_harmonic(self):
        assert wkb_delta(1) == 1.0
        b = 1.0
        generic = math.sqrt(math.pi / 2) * gamma_real(0.5 * (3 + 1 / b)) / (gamma_real(1 + 1 / (2 * b)) * (2 * b) ** (1 / (2 * b)))
        assert generic == pytest.approx(1.0, rel=1e-14)

    @pytest.mark.parametrize("beta", range(1, 11))
    def test_delta_positive(self, beta):
        assert wkb_delta(beta) > 0

    @pytest.mark.parametrize("beta", [2, 3, 4])
    def test_energy_reproduces_action_quantization(self, beta):
        hbar = 1e-2
        for n in (0, 3, 10):
            eps = wkb_energy(beta, hbar, n)
            assert action_area(PotentialSpec.single(beta), eps) == pytest.approx(2 * math.pi * hbar * (n + 0.5), rel=1e-8)

    def test_harmonic_exact(self):
        n = np.arange(30)
        assert np.array_equal(wkb_energy(1, 1.0, n), n + 0.5)

    @given(st.integers(1, 6), st.floats(1e-10, 1e-1), st.integers(0, 10**6))
    def test_index_round_trip(self, beta, hbar, n):
        assert wkb_level_index(beta, hbar, wkb_energy(beta, hbar, n)) == pytest.approx(n, abs=1e-6 * max(1, n))

    @pytest.mark.parametrize("beta", [2, 3, 5])
    def test_spacing_increases(self, beta):
        gaps = np.diff(wkb_energy(beta, 1e-3, np.arange(50)))
        assert np.all(gaps > 0) and np.all(np.diff(gaps) > 0)

    def test_gap_against_numeric(self):
        hbar = 1e-2
        win = solve_eigen_window(PotentialSpec.single(2), hbar, 0.0, 0.02, Parity.EVEN)
        e = win.energies()
        wkb_gap = wkb_energy(2, hbar, 2) - wkb_energy(2, hbar, 0)
        assert (e[1] - e[0]) == pytest.approx(wkb_gap, rel=0.05)

    def test_negative_n(self):
        with pytest.raises(DomainError):
            wkb_energy(2, 1e-3, -1)


class TestWeights:
    def test_sigma_substitution(self):
        hbar = 1e-3
        assert sigma(2, hbar, hbar) == pytest.approx(4 * hbar**-0.25, rel=1e-14)

    def test_exponential_decay(self):
        hbar = 1e-3
        r = wkb_weight(2, hbar, hbar) / wkb_weight(2, hbar, 2 * hbar)
        # e**2 times the explicit eps**(-1/4) prefactor ratio; the remainder varies slowly
        assert r == pytest.approx(math.e**2 * 2**0.25, rel=0.2)

    def test_domain(self):
        with pytest.raises(DomainError):
            wkb_weight(2, 1e-3, 0.0)

    def test_normalised_at_small_hbar(self):
        # sin(sigma)/sigma dies out as hbar -> 0, leaving the normalised asymptotic weights
        assert wkb_overlap_set(2, 1e-8, 40e-8).captured_mass == pytest.approx(1.0, abs=1e-2)

    def test_against_numeric_overlaps(self, numeric_single_overlaps):
        os = numeric_single_overlaps
        w = wkb_weight(2, os.hbar, os.eps[1:20])
        # the ground state is outside the asymptotic regime; higher states agree to a few percent
        assert np.all(np.abs(w / os.weight[1:20] - 1) < 0.07)
        assert np.median(np.abs(w / os.weight[1:20] - 1)) < 0.02

    def test_levels_are_even(self):
        assert all(lv.n % 2 == 0 for lv in wkb_levels(2, 1e-4))


@pytest.fixture(scope="module")
def numeric_single_overlaps():
    from ehrenfest.dynamics import numeric_overlaps

    return numeric_overlaps(PotentialSpec.single(2), 1e-3, check_odd=False)


class TestLimitDistribution:
    def test_normalised(self):
        half = integrate.quad(limit_distribution, 0, 0.1, limit=200)[0] + integrate.quad(limit_distribution, 0.1, np.inf, limit=200)[0]
        assert 2 * half == pytest.approx(1.0, abs=1e-6)

    @given(st.floats(1e-6, 10))
    def test_even(self, nu):
        assert limit_distribution(nu) == limit_distribution(-nu)

    def test_singular_point(self):
        with pytest.raises(DomainError):
            limit_distribution(0.0)


class TestSingleWellEhrenfest:
    def test_harmonic(self):
        for hbar in (1e-1, 1e-5):
            assert single_well_ehrenfest(1, hbar).nu_E == pytest.approx(1 / math.pi, rel=1e-14)

    def test_method(self):
        assert single_well_ehrenfest(2, 1e-3).method is Method.WKB_SINGLE_WELL


class TestRegWkb:
    def test_residuals(self):
        for hbar in (1e-2, 1e-4, 1e-6):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RegWkbValidityWarning)
                roots = regwkb_roots(hbar, -20 * hbar, 20 * hbar)
            assert len(roots) > 10
            assert max(abs(regwkb_residual(r.energy, hbar)) for r in roots) < 1e-10

    @pytest.mark.parametrize("hbar", [1e-2, 5e-3])
    def test_agrees_with_numeric_near_barrier(self, hbar):
        roots = regwkb_roots(hbar, -0.05, 0.05)
        win = solve_eigen_window(DW, hbar, -0.05, 0.05)
        assert len(roots) == len(win)
        assert np.max(np.abs(roots.energies() - win.energies())) < 1e-3
        assert [r.parity for r in roots] == [s.parity for s in win.states]

    def test_fig2_pair(self):
        roots = regwkb_roots(1e-2, -0.01, 0.005)
        even = roots.energies(Parity.EVEN)
        # quoted pair -0.0054148, 0.0008148: gap 0.0062296
        assert abs(even[0] + 0.0054148) < 0.02 * 0.0062296
        assert abs(even[1] - 0.0008148) < 0.02 * 0.0062296

    def test_deep_below_barrier(self):
        hbar = 1e-3
        for r in regwkb_roots(hbar, -40 * hbar, -20 * hbar):
            assert math.cos(r.phase_at_root) == pytest.approx(1.0, abs=1e-9)

    def test_density_doubles_above_barrier(self):
        hbar = 1e-3

        def distinct(e):
            # tunnelling doublets below the barrier are degenerate at this resolution
            return 1 + int(np.count_nonzero(np.diff(e) > 1e-6 * hbar))

        below = distinct(regwkb_roots(hbar, -10 * hbar, -5 * hbar).energies())
        above = distinct(regwkb_roots(hbar, 5 * hbar, 10 * hbar).energies())
        assert above == pytest.approx(2 * below, abs=2)

    def test_validity_warning(self):
        with pytest.warns(RegWkbValidityWarning):
            roots = regwkb_roots(1e-2, -0.2, 0.2)
        assert roots.warnings

    def test_ehrenfest_against_numeric(self):
        from ehrenfest.dynamics import numeric_ehrenfest

        reg = regwkb_ehrenfest(1e-2)
        num = numeric_ehrenfest(DW, 1e-2)
        assert reg.nu_E_inv == pytest.approx(num.nu_E_inv, rel=0.1)
        assert reg.method is Method.REG_WKB

    def test_log_law_additive_shift(self):
        inv = [regwkb_ehrenfest(10.0**-k).nu_E_inv for k in range(2, 7)]
        shifts = np.diff(inv)
        assert all(s > 0 for s in shifts)
        assert np.ptp(shifts) < 0.5 * np.mean(shifts)

    def test_window_too_narrow(self):
        with pytest.raises(InsufficientSupportError):
            regwkb_ehrenfest(1e-2, half_width=0.01)
