import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mimome_tas import analytic as an
from mimome_tas.analytic import (
    PSI,
    SecrecyRateDistribution,
    SystemConfig,
    channel_gain_moments,
    epsilon_outage_rate,
    ergodic_secrecy_rate,
    outage_probability,
    prob_nonzero_secrecy,
    secrecy_distribution,
)
from mimome_tas.errors import DomainError
from mimome_tas.special import chi_square_upper_tail, gaussian_q, gaussian_q_inv

GRID_M = (16, 64, 128, 256)
GRID_NR = (1, 2, 4, 8)


def dist(eta, sigma):
    return SecrecyRateDistribution(eta=eta, sigma=sigma)


class TestSystemConfig:
    def test_beta_and_regime(self):
        cfg = SystemConfig(128, 8, 4, 8, 1.0, 0.1)
        assert cfg.beta_e == 1.0
        assert cfg.regime_warning
        assert not SystemConfig(128, 64, 4, 8, 1.0, 0.1).regime_warning

    @pytest.mark.parametrize("kwargs", [
        dict(M=8, L=9, N_r=1, N_e=1, rho_m=1, rho_e=1),
        dict(M=8, L=0, N_r=1, N_e=1, rho_m=1, rho_e=1),
        dict(M=8, L=2, N_r=0, N_e=1, rho_m=1, rho_e=1),
        dict(M=8, L=2, N_r=1, N_e=1, rho_m=-1, rho_e=1),
        dict(M=8, L=2, N_r=1, N_e=1, rho_m=1, rho_e=math.inf),
        dict(M=8, L=2.5, N_r=1, N_e=1, rho_m=1, rho_e=1),
    ])
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(DomainError):
            SystemConfig(**kwargs)


class TestChannelGainMoments:
    def test_full_selection(self):
        mom = channel_gain_moments(SystemConfig(128, 128, 3, 1, 1.0, 0.1))
        assert mom.u == 0.0
        assert mom.eta_t == pytest.approx(384.0, abs=1e-9)

    def test_single_antenna_closed_form(self):
        mom = channel_gain_moments(SystemConfig(128, 18, 1, 1, 1.0, 0.1))
        assert mom.u == pytest.approx(math.log(128 / 18), abs=1e-12)
        assert mom.eta_t == pytest.approx(53.31, abs=5e-3)

    @pytest.mark.parametrize("M", GRID_M)
    @pytest.mark.parametrize("N_r", GRID_NR)
    def test_fixed_point_residual_and_monotone_mean(self, M, N_r):
        previous = -math.inf
        for L in range(1, M + 1):
            mom = channel_gain_moments(SystemConfig(M, L, N_r, 1, 1.0, 0.1))
            assert abs(chi_square_upper_tail(mom.u, N_r) - L / M) < 1e-10
            assert mom.eta_t > previous
            assert mom.sigma_t_sq >= 0
            previous = mom.eta_t

    @pytest.mark.parametrize("M", GRID_M)
    def test_single_receive_antenna_exact(self, M):
        for L in range(1, M + 1):
            mom = channel_gain_moments(SystemConfig(M, L, 1, 1, 1.0, 0.1))
            assert mom.u == pytest.approx(math.log(M / L), abs=1e-10)
            assert mom.eta_t == pytest.approx(L * (1 + math.log(M / L)), rel=1e-10)
            # variance of the top-L sum of unit exponentials, continuous limit
            assert mom.sigma_t_sq == pytest.approx(L * (2 - L / M), rel=1e-8, abs=1e-8)

    @pytest.mark.parametrize("N_r", GRID_NR)
    def test_full_selection_limit(self, N_r):
        mom = channel_gain_moments(SystemConfig(128, 128, N_r, 1, 1.0, 0.1))
        assert mom.u == pytest.approx(0.0, abs=1e-12)
        assert mom.eta_t == pytest.approx(N_r * 128, rel=1e-12)


class TestSecrecyDistribution:
    def test_single_antenna_mean(self):
        d = secrecy_distribution(SystemConfig(128, 18, 1, 1, 1.0, 0.1))
        expected = math.log2((1 + 18 * (1 + math.log(128 / 18))) / (1 + 0.1 * 18))
        assert d.eta == pytest.approx(expected, abs=1e-10)
        assert d.eta == pytest.approx(4.278, abs=5e-4)

    def test_hand_computed_mean_and_variance(self):
        cfg = SystemConfig(128, 4, 4, 8, 10 ** -0.4, 0.1)
        d = secrecy_distribution(cfg)
        mom = d.moments
        K = 4 + cfg.rho_m * mom.eta_t
        C = cfg.rho_m * mom.eta_t * 4 * 3 / 4
        eta = 4 * math.log2(K / 4) - C * PSI * cfg.rho_m * mom.eta_t / (2 * K ** 2) \
            - 4 * math.log2(1 + 0.1 * 8)
        var = ((1 - C / K ** 2) * 4 * cfg.rho_m * math.sqrt(mom.sigma_t_sq) / K) ** 2 + 4 / 8
        assert d.eta == pytest.approx(eta, rel=1e-13)
        assert d.sigma == pytest.approx(PSI * math.sqrt(var), rel=1e-13)
        assert d.terms.K_t == pytest.approx(K, rel=1e-14)

    def test_psi_full_precision(self):
        assert PSI == 1 / math.log(2)

    def test_silent_eavesdropper(self):
        d = secrecy_distribution(SystemConfig(64, 4, 2, 16, 1.0, 0.0))
        assert d.terms.eaves_mean == 0.0
        assert d.terms.eaves_variance == 0.0
        assert d.eta == d.terms.main_mean

    def test_equal_dimensions_drop_eavesdropper_variance(self):
        d = secrecy_distribution(SystemConfig(128, 8, 4, 8, 1.0, 0.1))
        assert d.terms.eaves_variance == 0.0

    @pytest.mark.parametrize("M", GRID_M)
    @pytest.mark.parametrize("N_r", GRID_NR)
    def test_variance_finite_and_nonnegative(self, M, N_r):
        for L in range(1, M + 1):
            d = secrecy_distribution(SystemConfig(M, L, N_r, 2, 1.0, 0.1))
            assert d.sigma >= 0
            assert math.isfinite(d.terms.main_variance + d.terms.eaves_variance)

    @pytest.mark.parametrize("M", GRID_M)
    @pytest.mark.parametrize("N_r", (1, 2, 4))
    def test_channel_hardening(self, M, N_r):
        half = secrecy_distribution(SystemConfig(M, M // 2, N_r, 2, 1.0, 0.1))
        full = secrecy_distribution(SystemConfig(M, M, N_r, 2, 1.0, 0.1))
        assert full.terms.main_variance < half.terms.main_variance


class TestMetrics:
    def test_ergodic_values(self):
        assert ergodic_secrecy_rate(dist(5.0, 0.0)) == 5.0
        assert ergodic_secrecy_rate(dist(5.0, 1e-13)) == 5.0
        assert ergodic_secrecy_rate(dist(0.0, 1.0)) == pytest.approx(0.3989422804, abs=1e-10)
        assert ergodic_secrecy_rate(dist(-3.0, 0.0)) == 0.0

    def test_outage_values(self):
        assert outage_probability(dist(3.0, 2.0), 3.0) == pytest.approx(0.5, abs=1e-15)
        assert outage_probability(dist(10.0, 0.0), 5.0) == 0.0
        assert outage_probability(dist(4.0, 0.5), 5.0) == pytest.approx(0.97725, abs=1e-5)
        assert outage_probability(dist(4.0, 0.5), 5.0) == pytest.approx(1 - gaussian_q(2.0),
                                                                        abs=1e-15)
        with pytest.raises(DomainError):
            outage_probability(dist(1.0, 1.0), -0.5)

    def test_epsilon_outage_values(self):
        assert epsilon_outage_rate(dist(4.0, 0.5), 0.5) == 4.0
        assert epsilon_outage_rate(dist(4.0, 0.5), 0.1) == pytest.approx(3.35922, abs=1e-5)
        for eps in (0.0, 1.0, 1.2):
            with pytest.raises(DomainError):
                epsilon_outage_rate(dist(4.0, 0.5), eps)

    def test_nonzero_secrecy_values(self):
        assert prob_nonzero_secrecy(dist(0.0, 1.0)) == 0.5
        assert prob_nonzero_secrecy(dist(3.0, 0.0)) == 1.0
        assert prob_nonzero_secrecy(dist(-1.0, 1.0)) == pytest.approx(0.15866, abs=1e-5)

    @settings(max_examples=300, deadline=None)
    @given(eta=st.floats(-30, 30), sigma=st.floats(1e-6, 10))
    def test_ergodic_lower_bounds(self, eta, sigma):
        d = dist(eta, sigma)
        value = ergodic_secrecy_rate(d)
        assert value >= max(eta, 0.0) - 1e-12
        if eta > 0:
            assert value >= sigma * an.gaussian_pdf(eta / sigma) - 1e-12

    @settings(max_examples=300, deadline=None)
    @given(eta=st.floats(0.5, 30), sigma=st.floats(0.01, 5), eps=st.floats(1e-4, 0.9999))
    def test_outage_round_trip(self, eta, sigma, eps):
        d = dist(eta, sigma)
        rate = epsilon_outage_rate(d, eps)
        if rate >= 0:
            assert abs(outage_probability(d, rate) - eps) < 1e-9

    def test_epsilon_outage_increasing(self):
        d = secrecy_distribution(SystemConfig(128, 16, 2, 4, 1.0, 0.1))
        values = [epsilon_outage_rate(d, e) for e in np.linspace(0.01, 0.99, 99)]
        assert np.all(np.diff(values) > 0)

    @settings(max_examples=200, deadline=None)
    @given(eta=st.floats(-10, 10), sigma=st.floats(1e-3, 5),
           r1=st.floats(0, 20), r2=st.floats(0, 20))
    def test_outage_non_decreasing(self, eta, sigma, r1, r2):
        lo, hi = sorted((r1, r2))
        d = dist(eta, sigma)
        assert outage_probability(d, lo) <= outage_probability(d, hi)

    def test_nonzero_secrecy_is_one_minus_q(self):
        d = dist(1.3, 0.7)
        assert prob_nonzero_secrecy(d) == pytest.approx(1 - gaussian_q(1.3 / 0.7), abs=1e-15)

    def test_epsilon_outage_formula(self):
        d = dist(2.0, 0.8)
        assert epsilon_outage_rate(d, 0.05) == pytest.approx(
            0.8 * gaussian_q_inv(0.95) + 2.0, abs=1e-13)

    def test_evaluate_metric_dispatch(self):
        d = dist(2.0, 0.8)
        assert an.evaluate_metric(d, "ergodic") == ergodic_secrecy_rate(d)
        assert an.evaluate_metric(d, "nzs") == prob_nonzero_secrecy(d)
        with pytest.raises(DomainError):
            an.evaluate_metric(d, "outage")
        with pytest.raises(DomainError):
            an.evaluate_metric(d, "eps_outage")
        with pytest.raises(DomainError):
            an.evaluate_metric(d, "median")
