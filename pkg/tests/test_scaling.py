import numpy as np
import pytest

from fluctlab.errors import (
    InvalidArgumentError,
    NumericalAccuracyError,
    OrderRangeError,
    UnsupportedModeError,
)
from fluctlab.models import (
    GaussianProfile,
    WeightedCorrelator,
    gaussian_state,
    powerlaw_state,
    powerlaw_two_point,
    product_ansatz_state,
    weighted_state,
)
from fluctlab.scaling import (
    ScalingConfig,
    correlator_with_error,
    exponent_sweep,
    find_critical_alpha,
    fit_loglog,
    fluctuation_correlator,
    l2_alpha_window,
    l2_vanishing_threshold,
    pair_tail_bound,
    position_space_correlator,
    qmode_correlator,
    weighted_correlator,
    weighted_gamma,
)


def bessel_factor(power, d):
    mom = powerlaw_two_point(power, d)

    def f_pos(yvars):
        acc = 0.0
        for comp in yvars:
            for c in comp:
                acc = acc + np.asarray(c) ** 2
        return (1.0 + acc) ** (-power / 2.0)

    def f_mom(qvars):
        acc = 0.0
        for comp in qvars:
            for c in comp:
                acc = acc + np.asarray(c) ** 2
        return mom(np.sqrt(acc))

    return f_pos, f_mom


class TestSpectralPath:
    def test_zero_state_gives_zero(self, profile1):
        state = gaussian_state(lambda k: np.zeros_like(np.asarray(k, dtype=float)), 1)
        cfg = ScalingConfig()
        for radius in (4.0, 64.0):
            assert fluctuation_correlator(state, profile1, cfg, 2, radius) == 0

    def test_oracle_equivalence_small_radius(self, product_state1, profile1):
        cfg = ScalingConfig()
        for order in (2, 3):
            for radius in (2.0, 8.0):
                spectral = fluctuation_correlator(product_state1, profile1, cfg, order, radius, alpha=0.5)
                oracle = position_space_correlator(product_state1, profile1, cfg, order, radius, 0.5)
                assert abs(spectral - oracle) <= 1e-6 * abs(oracle)

    def test_qmode_zero_offsets_bit_identical(self, gaussian_state1, profile1):
        cfg = ScalingConfig()
        a = fluctuation_correlator(gaussian_state1, profile1, cfg, 2, 32.0)
        b = qmode_correlator(gaussian_state1, profile1, cfg, 2, np.zeros((2, 1)), 32.0)
        assert a == b

    def test_translation_shift_leaves_limit(self, gaussian_state1, profile1):
        cfg = ScalingConfig()
        shifted = gaussian_state1.shifted(1, 0.9)
        diffs = []
        for radius in (8.0, 32.0, 128.0, 512.0):
            v0 = fluctuation_correlator(gaussian_state1, profile1, cfg, 2, radius)
            v1 = fluctuation_correlator(shifted, profile1, cfg, 2, radius)
            diffs.append(abs(v1 - v0))
        assert diffs[-1] < 1e-2 * diffs[0]
        assert diffs[-1] < 1e-4 * abs(
            fluctuation_correlator(gaussian_state1, profile1, cfg, 2, 512.0)
        )

    def test_quadrature_convergence_estimate(self, gaussian_state1, profile1):
        cfg = ScalingConfig()
        value, estimate = correlator_with_error(gaussian_state1, profile1, cfg, 2, 16.0)
        fine_cfg = ScalingConfig(quad_overrides={1: (120.0, 96, 10, 0)})
        refined = fluctuation_correlator(gaussian_state1, profile1, fine_cfg, 2, 16.0)
        assert abs(refined - value) <= estimate + 1e-14

    def test_order_guards(self, gaussian_state1, profile1, profile2):
        cfg = ScalingConfig()
        with pytest.raises(OrderRangeError):
            fluctuation_correlator(gaussian_state1, profile1, cfg, 9, 8.0)
        state2 = gaussian_state(lambda k: np.exp(-np.sum(np.asarray(k) ** 2, axis=-1)), 2)
        with pytest.raises(OrderRangeError):
            fluctuation_correlator(state2, profile2, cfg, 4, 8.0)  # (4-1)*2 = 6 > 4

    def test_tail_certificate(self, gaussian_state1, profile1):
        cfg = ScalingConfig(quad_overrides={1: (6.0, 4, 8, 0)})
        with pytest.raises(NumericalAccuracyError) as err:
            fluctuation_correlator(gaussian_state1, profile1, cfg, 2, 8.0)
        assert err.value.bound is not None
        assert err.value.bound > cfg.eps_vanish / 10.0

    def test_pair_tail_bound_decreases(self, profile1):
        assert pair_tail_bound(profile1, 30.0) > pair_tail_bound(profile1, 60.0) > pair_tail_bound(profile1, 120.0)

    def test_unnormalized_growth_exponent(self, gaussian_state1, profile1):
        cfg = ScalingConfig(exponent_band=0.1)
        rep = exponent_sweep(gaussian_state1, profile1, cfg, 2, alpha=0.0)
        assert rep.exponent == pytest.approx(1.0, abs=0.1)
        assert rep.verdict == "diverging"


class TestSweepMachinery:
    def test_fit_recovers_pure_power(self):
        r = np.geomspace(8, 512, 8)
        vals = 3.2 * r ** (-0.5)
        exponent, rms, used, dropped = fit_loglog(r, vals)
        assert exponent == pytest.approx(-0.5, abs=1e-9)
        assert used == 8 and not dropped

    def test_fit_drops_transient(self):
        r = np.geomspace(8, 512, 8)
        vals = 2.0 * r ** (-1.0)
        vals[0] *= 8.0  # strong transient at the smallest scale
        exponent, _, used, dropped = fit_loglog(r, vals)
        assert dropped and used == 7
        assert exponent == pytest.approx(-1.0, abs=1e-9)

    def test_fit_below_floor(self):
        r = np.geomspace(8, 512, 8)
        exponent, _, used, _ = fit_loglog(r, np.zeros(8))
        assert exponent is None and used == 0

    def test_r_grid_validation(self, gaussian_state1, profile1):
        with pytest.raises(InvalidArgumentError):
            ScalingConfig(r_values=(8.0, 16.0, 32.0)).validate_r_grid()
        with pytest.raises(InvalidArgumentError):
            ScalingConfig(r_values=(8.0, 9, 10, 11, 12, 13)).validate_r_grid()
        with pytest.raises(InvalidArgumentError):
            ScalingConfig(r_values=(8.0, 8.0, 16.0, 32.0, 64.0, 128.0)).validate_r_grid()

    def test_report_serialization(self, gaussian_state1, profile1):
        cfg = ScalingConfig()
        rep = exponent_sweep(gaussian_state1, profile1, cfg, 2)
        d = rep.as_dict()
        assert d["verdict"] == "finite-nonzero"
        assert len(d["values"]) == len(cfg.r_values)
        assert d["limit_value"]["re"] == pytest.approx(rep.limit_value.real)


class TestExponentWindows:
    @pytest.mark.parametrize("dim,lo,hi", [(1, 0.5, 0.75), (2, 1.0, 1.5), (4, 2.0, 3.0)])
    def test_l2_alpha_window(self, dim, lo, hi):
        w = l2_alpha_window(dim)
        assert (w.lo_open, w.hi_closed) == (lo, hi)
        assert w.contains(hi) and not w.contains(lo)

    def test_l2_vanishing_threshold_boundary(self):
        # alpha = 2n/3: order 3 sits exactly on the bound (finite), 4 vanishes
        th = l2_vanishing_threshold(3, 2.0)
        assert th.verdict(3) == "finite"
        assert th.verdict(4) == "vanishes"
        assert th.l0 == 4

    def test_l2_vanishing_threshold_maximal(self):
        th = l2_vanishing_threshold(2, 1.5)  # alpha = 3n/4
        assert th.l0 == 3
        assert all(th.verdict(l) == "vanishes" for l in (3, 4, 5))

    def test_l2_vanishing_threshold_near_half(self):
        th = l2_vanishing_threshold(1, 0.52)
        assert th.l0 > 3
        assert th.verdict(3) == "not-guaranteed-by-the-bound"
        assert th.l0 == int(np.floor(1 / 0.04)) + 1

    def test_threshold_requires_window(self):
        with pytest.raises(InvalidArgumentError):
            l2_vanishing_threshold(1, 0.4)


class TestCriticalAlpha:
    def test_bisection_matches_growth_oracle(self, profile1):
        state = powerlaw_state(0.75, 1)
        r = tuple(float(x) for x in np.geomspace(64, 8192, 8).round(8))
        cfg = ScalingConfig(r_values=r, alpha_mode="explicit", alpha=0.6)
        alpha_star = find_critical_alpha(state, profile1, cfg, 0.505, 0.75)
        # independent target: half the unnormalized position-space growth
        radii = [float(x) for x in np.geomspace(64, 8192, 8)]
        vals = [position_space_correlator(state, profile1, cfg, 2, x, alpha=0.0) for x in radii]
        growth, _, _, _ = fit_loglog(radii, vals)
        assert alpha_star == pytest.approx(growth / 2.0, abs=0.01)
        assert alpha_star == pytest.approx(1.0 - 0.75 / 2.0, abs=0.05)
        window = l2_alpha_window(1)
        assert window.lo_open < alpha_star <= window.hi_closed

    def test_bad_bracket_rejected(self, profile1):
        state = powerlaw_state(0.75, 1)
        cfg = ScalingConfig()
        with pytest.raises(InvalidArgumentError):
            find_critical_alpha(state, profile1, cfg, 0.7, 0.75)


class TestWeightedRegime:
    def test_gamma_and_bounds(self):
        gamma, bound = weighted_gamma(1, 0.0)
        assert gamma == 0.5  # recovers the canonical exponent
        gamma, bound = weighted_gamma(3, 1.0)
        assert gamma == 2.0
        # bound is l gamma - n, the marginal order-l weight exponent
        assert bound.max_alpha(3) == pytest.approx(3 * gamma - 3)
        assert bound.max_alpha(2) == pytest.approx(1.0)  # = alpha_2 itself

    def test_sufficient_vanishing_condition(self):
        _, bound = weighted_gamma(1, 0.5)
        assert bound.sufficient_vanishing(1.0, 3)  # alpha_3 <= 2 alpha_2 = 1
        assert not bound.sufficient_vanishing(1.3, 3)
        # the sufficient condition implies the general bound
        for order in (3, 4, 5):
            assert (order - 1) * 0.5 < bound.max_alpha(order)

    def test_spectral_matches_position_for_even_alpha(self, profile1):
        amp, width = 0.7, 1.1
        c_mom = amp * (2 * np.pi * width ** 2) ** 0.5

        def f_pos(yvars):
            return amp * np.exp(-np.asarray(yvars[0][0]) ** 2 / (2 * width ** 2))

        def f_mom(qvars):
            return c_mom * np.exp(-(width ** 2) * np.asarray(qvars[0][0]) ** 2 / 2)

        state = weighted_state([WeightedCorrelator(2, 2.0, f_pos, f_mom)], 1)
        gamma, _ = weighted_gamma(1, 2.0)
        cfg = ScalingConfig()
        from fluctlab.scaling import _weighted_position

        for radius in (4.0, 16.0, 64.0):
            spectral = weighted_correlator(state, profile1, cfg, 2, gamma, radius)
            oracle = _weighted_position(state, profile1, cfg, 2, gamma, radius)
            assert abs(spectral - oracle) <= 1e-4 * abs(oracle)

    def test_weighted_requires_weighted_order(self, gaussian_state1, profile1):
        cfg = ScalingConfig()
        with pytest.raises(UnsupportedModeError):
            weighted_correlator(gaussian_state1, profile1, cfg, 2, 0.75, 8.0)

    def test_noninteger_alpha_uses_position_path_only_in_1d(self, profile2):
        f_pos, f_mom = bessel_factor(2.0, 2)
        state = weighted_state([WeightedCorrelator(2, 0.5, f_pos, f_mom)], 2)
        cfg = ScalingConfig()
        with pytest.raises(UnsupportedModeError):
            weighted_correlator(state, profile2, cfg, 2, 1.25, 8.0)


class TestHigherDimension:
    def test_two_point_limit_n2(self, profile2):
        state = gaussian_state(lambda k: np.exp(-np.sum(np.asarray(k) ** 2, axis=-1) / 2.0), 2)
        cfg = ScalingConfig(eps_vanish=5e-3)
        rep = exponent_sweep(state, profile2, cfg, 2)
        assert rep.exponent == pytest.approx(0.0, abs=0.05)
        target = 1.0 * profile2.pair_overlap_integral()
        assert abs(rep.limit_value - target) <= 0.01 * abs(target)

    def test_order3_exponent_n2(self, profile2):
        g = GaussianProfile(1.0, 1.0, 2)
        state = product_ansatz_state({2: [g], 3: [g, GaussianProfile(0.9, 1.2, 2)]}, 2)
        cfg = ScalingConfig(eps_vanish=5e-3)
        rep = exponent_sweep(state, profile2, cfg, 3)
        assert rep.exponent == pytest.approx(-1.0, abs=0.1)
