"""P/E, market/asset valuation, and investor-return formulas."""

import pytest

from sensorecon.errors import DomainError, ValidationError
from sensorecon.money import Money, whole_dollars
from sensorecon.valuation import (
    appreciation_over_preipo,
    asset_valuation,
    market_valuation,
    pe_from_apr,
    preipo_apr,
    proposer_reward,
)


class TestPeFromApr:
    def test_utility_grade_apr(self):
        assert abs(pe_from_apr(0.041) - 24.39) < 0.01

    def test_identity(self):
        assert pe_from_apr(1.0) == 1.0

    def test_reciprocal(self):
        assert pe_from_apr(0.5) == 2.0

    def test_non_positive_rejected(self):
        with pytest.raises(ValidationError):
            pe_from_apr(0.0)

    def test_inverse_roundtrip(self):
        for apr in (0.01, 0.041, 0.2, 0.77, 1.5):
            assert abs(1.0 / pe_from_apr(apr) - apr) < 1e-9


class TestMarketValuation:
    def test_parking_row(self):
        assert market_valuation(Money(2375), 24.4) == Money(57950)

    def test_zero_earnings(self):
        assert market_valuation(Money(0), 24.4) == Money(0)

    def test_air_income_at_pe(self):
        # direct multiplication: $168/yr at 24.4 is $4099.20
        assert market_valuation(Money(16800), 24.4) == Money(409920)

    def test_homothetic(self):
        for cents in (2375, 16800, 999):
            single = market_valuation(Money(cents), 24.4)
            double = market_valuation(Money(2 * cents), 24.4)
            assert abs(double.cents - 2 * single.cents) <= 1


class TestAssetValuation:
    def test_sum_of_components(self):
        assert asset_valuation(Money(17900), Money(0), Money(20000)) == Money(37900)

    def test_parking_startup(self):
        assert asset_valuation(Money(3900), Money(0), Money(20000)) == Money(23900)

    def test_all_zero(self):
        assert asset_valuation(Money(0), Money(0), Money(0)) == Money(0)

    def test_negative_rejected(self):
        with pytest.raises(ValidationError):
            asset_valuation(Money(-1), Money(0), Money(0))


class TestPreipoApr:
    def test_parking_inputs_one_year(self):
        # ((24.4 * 23.75 - 239) / 239) ** 1 - 1
        apr = preipo_apr(24.4, Money(2375), Money(23900), 12)
        assert abs(apr - 0.4247) < 1e-4

    def test_break_even_doubling(self):
        # pe * P exactly doubles I -> ratio 1 -> apr 0
        apr = preipo_apr(10.0, Money(2000), Money(10000), 12)
        assert apr == pytest.approx(0.0, abs=1e-12)

    def test_half_year_annualization(self):
        apr = preipo_apr(24.4, Money(2375), Money(23900), 6)
        assert abs(apr - 1.0298) < 1e-4

    def test_twelve_months_equals_simple_ratio(self):
        pe, p, i = 24.4, Money(2375), Money(23900)
        apr = preipo_apr(pe, p, i, 12)
        assert apr == pytest.approx((pe * p.cents - i.cents) / i.cents - 1.0, abs=1e-12)

    def test_non_real_power_is_domain_error(self):
        # pe * P below I with a fractional exponent has no real value
        with pytest.raises(DomainError):
            preipo_apr(2.0, Money(100), Money(10000), 5)

    def test_invalid_pre_ipo_value(self):
        with pytest.raises(ValidationError):
            preipo_apr(24.4, Money(2375), Money(0), 12)


class TestAppreciation:
    def test_air_row(self):
        pct = appreciation_over_preipo(Money(390400), Money(49500))
        assert abs(pct - 788) <= 1

    def test_parking_row(self):
        pct = appreciation_over_preipo(Money(57950), Money(23900))
        assert abs(pct - 242) <= 1

    def test_no_appreciation_is_100(self):
        assert appreciation_over_preipo(Money(5000), Money(5000)) == 100.0

    def test_above_100_iff_value_exceeds_pre_ipo(self):
        for mv, ipo in ((100, 99), (99, 100), (1, 1000), (1000, 1)):
            pct = appreciation_over_preipo(Money(mv), Money(ipo))
            assert (pct >= 100.0) == (mv >= ipo)


class TestProposerReward:
    def test_air_esop(self):
        reward = proposer_reward(Money(390400), 0.10)
        assert reward == Money(39040)
        assert whole_dollars(reward) == 390

    def test_parking_esop(self):
        reward = proposer_reward(Money(57950), 0.20)
        assert reward == Money(11590)
        assert whole_dollars(reward) == 116

    def test_zero_fraction(self):
        assert proposer_reward(Money(999999), 0.0) == Money(0)

    def test_fraction_out_of_range(self):
        with pytest.raises(ValidationError):
            proposer_reward(Money(100), 1.5)
