"""Masking-rate distribution tests: closed forms, quadrature, sampling, calibration."""

import numpy as np
import pytest
from scipy import integrate, stats

from linglab.errors import NoRootError
from linglab.masking import (
    Dropout,
    FixedRate,
    MaskDraw,
    NoMasking,
    ParetoMaskConfig,
    PMasking,
    calibrate_shape,
    draw_mask,
    pmask_cdf,
    pmask_density,
    pmask_inverse_cdf,
    sample_rate,
    sample_rates,
    strategy_from_name,
)


class TestDensityAndCdf:
    @pytest.mark.parametrize("b", [0.5, 1.0, 3.0, 10.0])
    def test_cdf_endpoints(self, b):
        assert pmask_cdf(0.0, b) == pytest.approx(0.0, abs=1e-12)
        assert pmask_cdf(1.0, b) == pytest.approx(1.0, abs=1e-12)

    def test_cdf_closed_form_value(self):
        # (1 - 1.3^-3) / (1 - 2^-3)
        assert pmask_cdf(0.3, 3.0) == pytest.approx(0.62267, abs=1e-4)

    @pytest.mark.parametrize("b", [0.5, 1.0, 3.0, 10.0])
    def test_density_integrates_to_one(self, b):
        total, err = integrate.quad(lambda m: pmask_density(m, b), 0.0, 1.0)
        assert total == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.parametrize("b", [0.5, 3.0])
    def test_cdf_matches_quadrature(self, b):
        for m in [0.1, 0.35, 0.8]:
            total, _ = integrate.quad(lambda x: pmask_density(x, b), 0.0, m)
            assert pmask_cdf(m, b) == pytest.approx(total, abs=1e-9)

    def test_cdf_monotone(self):
        grid = np.linspace(0, 1, 200)
        vals = pmask_cdf(grid, 3.0)
        assert np.all(np.diff(vals) > 0)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            pmask_density(-0.1, 3.0)
        with pytest.raises(ValueError):
            pmask_cdf(1.1, 3.0)
        with pytest.raises(ValueError):
            pmask_density(0.5, 0.0)


class TestSampling:
    def test_inverse_cdf_endpoints(self):
        assert pmask_inverse_cdf(0.0, 3.0) == pytest.approx(0.0, abs=1e-12)
        assert pmask_inverse_cdf(1.0 - 1e-12, 3.0) == pytest.approx(1.0, abs=1e-9)

    def test_inverse_cdf_midpoint(self):
        # (1 - 0.5 * (1 - 2^-3))^(-1/3) - 1
        assert pmask_inverse_cdf(0.5, 3.0) == pytest.approx(0.2114, abs=1e-3)

    def test_inverse_is_cdf_inverse(self):
        u = np.linspace(0.01, 0.99, 50)
        m = pmask_inverse_cdf(u, 2.2)
        assert np.allclose(pmask_cdf(m, 2.2), u, atol=1e-12)

    def test_mass_below_03_at_b3(self):
        rng = np.random.default_rng(1234)
        draws = sample_rates(rng, ParetoMaskConfig(3.0), 100_000)
        frac = np.mean(draws <= 0.3)
        assert 0.61 <= frac <= 0.64

    def test_ks_statistic_small(self):
        rng = np.random.default_rng(99)
        draws = sample_rates(rng, ParetoMaskConfig(3.0), 50_000)
        result = stats.kstest(draws, lambda x: pmask_cdf(x, 3.0))
        assert result.statistic < 0.01

    def test_seed_reproducibility(self):
        a = sample_rates(np.random.default_rng(5), ParetoMaskConfig(3.0), 1000)
        b = sample_rates(np.random.default_rng(5), ParetoMaskConfig(3.0), 1000)
        assert np.array_equal(a, b)

    def test_scalar_draw_in_range(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            assert 0.0 <= sample_rate(rng, ParetoMaskConfig(0.7)) <= 1.0


class TestCalibration:
    def test_default_target(self):
        b = calibrate_shape(0.3, 0.6)
        assert 2.69 <= b <= 2.72
        mass = pmask_cdf(0.3, b)
        assert 0.6 <= mass <= 0.60001

    def test_default_shape_satisfies_paper_constraint(self):
        assert pmask_cdf(0.3, 3.0) > 0.6

    def test_unreachable_mass_with_tight_bracket(self):
        with pytest.raises(NoRootError):
            calibrate_shape(0.3, 0.999999, bracket=(1e-3, 8.0))

    def test_monotone_consistency(self):
        for rate, mass in [(0.2, 0.5), (0.4, 0.7), (0.15, 0.45)]:
            b = calibrate_shape(rate, mass)
            achieved = pmask_cdf(rate, b)
            assert mass <= achieved <= mass + 1e-5

    def test_invalid_targets(self):
        with pytest.raises(ValueError):
            calibrate_shape(0.0, 0.6)
        with pytest.raises(ValueError):
            calibrate_shape(0.3, 1.0)


class TestDrawMask:
    def test_no_masking_empty(self):
        rng = np.random.default_rng(0)
        draw = draw_mask(rng, 7, NoMasking())
        assert draw == MaskDraw(rate=0.0, masked=())

    def test_fixed_rate_zero(self):
        rng = np.random.default_rng(0)
        assert draw_mask(rng, 9, FixedRate(0.0)).masked == ()

    def test_fixed_rate_one_masks_all(self):
        rng = np.random.default_rng(0)
        assert len(draw_mask(rng, 7, FixedRate(1.0)).masked) == 7

    def test_round_half_up(self):
        rng = np.random.default_rng(0)
        assert len(draw_mask(rng, 10, FixedRate(0.34)).masked) == 3
        assert len(draw_mask(rng, 10, FixedRate(0.35)).masked) == 4

    def test_indices_unique_and_bounded(self):
        rng = np.random.default_rng(42)
        for k in [1, 3, 17, 40]:
            for strategy in [PMasking(), Dropout(0.4), FixedRate(0.6)]:
                draw = draw_mask(rng, k, strategy)
                assert len(set(draw.masked)) == len(draw.masked)
                assert all(0 <= i < k for i in draw.masked)
                assert len(draw.masked) <= k

    def test_dropout_mean_fraction(self):
        rng = np.random.default_rng(8)
        k, p, n = 40, 0.3, 20_000
        total = sum(len(draw_mask(rng, k, Dropout(p)).masked) for _ in range(n))
        assert total / (n * k) == pytest.approx(p, abs=0.01)

    def test_two_sample_reproducibility(self):
        rng = np.random.default_rng(77)
        draws_a = [draw_mask(rng, 12, PMasking()) for _ in range(50)]
        rng = np.random.default_rng(77)
        draws_b = [draw_mask(rng, 12, PMasking()) for _ in range(50)]
        assert draws_a == draws_b

    def test_zero_attributes_allowed(self):
        rng = np.random.default_rng(0)
        assert draw_mask(rng, 0, PMasking()).masked == ()

    def test_strategy_from_name(self):
        assert strategy_from_name("pmask", b=2.5) == PMasking(ParetoMaskConfig(2.5))
        assert strategy_from_name("none") == NoMasking()
        assert strategy_from_name("fixed", rate=0.2) == FixedRate(0.2)
        assert strategy_from_name("dropout", p=0.1) == Dropout(0.1)
        with pytest.raises(ValueError):
            strategy_from_name("zipf")
