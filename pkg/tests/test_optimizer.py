import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mimome_tas import SystemConfig, analytic
from mimome_tas.errors import DomainError
from mimome_tas import optimizer as opt


def analytic_metric(M, L, N_r, N_e, rho_m, rho_e, kind="ergodic", eps=None):
    d = analytic.secrecy_distribution(SystemConfig(M, L, N_r, N_e, rho_m, rho_e))
    return analytic.evaluate_metric(d, kind, eps=eps)


class TestExhaustive:
    def test_single_antenna_reference(self):
        sel = opt.optimal_L_exhaustive(128, 1, 1, 1.0, 0.1)
        assert sel.L_star == 18
        assert sel.metric_value == analytic_metric(128, 18, 1, 1, 1.0, 0.1)

    def test_no_eavesdropper_uses_all(self):
        assert opt.optimal_L_exhaustive(128, 1, 1, 1.0, 0.0).L_star == 128

    @pytest.mark.parametrize("snr", [(1.0, 1.0), (1.0, 0.01), (3.16, 1.0)])
    def test_many_receive_antennas_use_all(self, snr):
        assert opt.optimal_L_exhaustive(128, 17, 1, *snr).L_star == 128

    def test_ties_go_to_smaller(self):
        sel = opt.optimal_L_exhaustive(10, 1, 1, 1.0, 0.1, metric=lambda cfg: 1.0)
        assert sel.L_star == 1

    @settings(max_examples=25, deadline=None)
    @given(scale=st.floats(1e-3, 1e3), rho_e=st.floats(0.01, 1.0))
    def test_argmax_invariant_to_scaling(self, scale, rho_e):
        def metric(cfg):
            return analytic.ergodic_secrecy_rate(analytic.secrecy_distribution(cfg))

        base = opt.optimal_L_exhaustive(64, 1, 2, 1.0, rho_e, metric=metric)
        scaled = opt.optimal_L_exhaustive(64, 1, 2, 1.0, rho_e,
                                          metric=lambda cfg: scale * metric(cfg))
        assert base.L_star == scaled.L_star

    def test_maximum_dominates(self):
        values = opt.metric_curve(64, 2, 4, 1.0, 0.1)
        sel = opt.optimal_L_exhaustive(64, 2, 4, 1.0, 0.1)
        assert np.all(values <= sel.metric_value)

    def test_guards(self):
        with pytest.raises(DomainError):
            opt.optimal_L_exhaustive(5000, 1, 1, 1.0, 0.1)
        with pytest.raises(DomainError):
            opt.optimal_L_exhaustive(16, 1, 1, 1.0, 0.1, metric_kind="nzs")


class TestSingleAntennaErgodic:
    def test_reproduces_reference(self):
        sel = opt.optimal_L_example1(1.0, 0.1, 128)
        assert sel.ell_star == pytest.approx(18.4, abs=0.05)
        assert sel.L_star == 18
        assert abs(opt.example1_equation(sel.ell_star, 1.0, 0.1, 128)) < 1e-10

    def test_vanishing_eavesdropper_saturates(self):
        sel = opt.optimal_L_example1(1.0, 1e-9, 128)
        assert sel.ell_star == pytest.approx(128, abs=1e-3)
        assert sel.L_star == 128

    def test_no_root_saturates(self):
        # the residual at ell = M is rho_e*M + rho_e/rho_m > 0, so a missing root
        # can only mean the residual is already positive at ell = 1
        sel = opt.optimal_L_example1(1.0, 10.0, 16)
        assert sel.ell_star == 1.0 and sel.L_star == 1 and sel.saturated

    def test_agrees_with_exhaustive(self):
        sel = opt.optimal_L_example1(1.0, 0.05, 256)
        ref = opt.optimal_L_exhaustive(256, 1, 1, 1.0, 0.05)
        assert abs(sel.ell_star - ref.L_star) <= 1
        assert abs(sel.L_star - ref.L_star) <= 1

    @settings(max_examples=40, deadline=None)
    @given(rho_m=st.floats(0.05, 20), rho_e=st.floats(0.005, 2), M=st.integers(4, 256))
    def test_residual_and_metric(self, rho_m, rho_e, M):
        sel = opt.optimal_L_example1(rho_m, rho_e, M)
        if not sel.saturated and 1 < sel.ell_star < M:
            assert abs(opt.example1_equation(sel.ell_star, rho_m, rho_e, M)) < 1e-10
        assert 1 <= sel.L_star <= M
        assert sel.metric_value == analytic_metric(M, sel.L_star, 1, 1, rho_m, rho_e)

    def test_domain(self):
        with pytest.raises(DomainError):
            opt.optimal_L_example1(0.0, 0.1, 16)


class TestMultiAntennaEavesdropper:
    def test_reproduces_reference(self):
        sel = opt.optimal_L_example2(1.0, 10 ** -2.5, 16, 128)
        assert sel.ell_star == pytest.approx(13.7, abs=0.1)
        assert sel.L_star == 14

    def test_stationary(self):
        rho_e = 10 ** -2.5
        sel = opt.optimal_L_example2(1.0, rho_e, 16, 128)
        rate = lambda x: opt.example2_rate(x, 1.0, rho_e, 16, 128)  # noqa: E731
        assert abs(opt.central_difference(rate, sel.ell_star)) < 1e-8

    def test_strong_eavesdropper_single_antenna(self):
        sel = opt.optimal_L_example2(1.0, 1.0, 16, 128)
        rates = [opt.example2_rate(x, 1.0, 1.0, 16, 128) for x in range(1, 129)]
        assert int(np.argmax(rates)) == 0
        assert sel.L_star == 1

    def test_agrees_with_exhaustive(self):
        sel = opt.optimal_L_example2(1.0, 10 ** -2.5, 16, 128)
        ref = opt.optimal_L_exhaustive(128, 1, 16, 1.0, 10 ** -2.5)
        assert abs(sel.L_star - ref.L_star) <= 1

    def test_envelope_matches_general_surrogate(self):
        for ell in (1.0, 3.5, 16.0, 40.2, 128.0):
            d = analytic.distribution_at(128, ell, 1, 16, 1.0, 0.01)
            assert opt.example2_mean(ell, 1.0, 0.01, 16, 128) == pytest.approx(d.eta, rel=1e-12)
            assert opt.example2_std(ell, 1.0, 0.01, 16, 128) == pytest.approx(d.sigma, rel=1e-8)


class TestEpsilonOutageOptimum:
    def test_threshold_branch(self):
        assert opt.example3_threshold(128, 0.1) == pytest.approx(26.8, abs=0.05)
        sel = opt.optimal_L_example3(10 ** 1.5, 128, 0.1)
        assert sel.L_star == 1

    def test_threshold_at_median(self):
        assert opt.example3_threshold(128, 0.5) == pytest.approx(math.log(128) - 1, abs=1e-15)

    def test_reproduces_reference(self):
        sel = opt.optimal_L_example3(10 ** -1.5, 128, 0.1)
        assert sel.ell_star == pytest.approx(22.97, abs=0.1)
        assert sel.L_star == 23

    def test_stationary(self):
        rho = 10 ** -1.5
        sel = opt.optimal_L_example3(rho, 128, 0.1)
        rate = lambda x: opt.example3_rate(x, rho, 128, 0.1)  # noqa: E731
        assert abs(opt.central_difference(rate, sel.ell_star)) < 1e-8

    def test_agrees_with_exhaustive(self):
        rho = 10 ** -1.5
        sel = opt.optimal_L_example3(rho, 128, 0.1)
        ref = opt.optimal_L_exhaustive(128, 1, 1, rho, rho, "eps_outage", 0.1)
        assert abs(sel.L_star - ref.L_star) <= 1

    def test_optimum_shrinks_with_snr(self):
        picks = [opt.optimal_L_exhaustive(128, 1, 1, 10 ** k, 10 ** k, "eps_outage", 0.1).L_star
                 for k in np.arange(-2, 1.51, 0.25)]
        assert all(a >= b for a, b in zip(picks, picks[1:]))
        assert picks[-1] == 1

    def test_domain(self):
        with pytest.raises(DomainError):
            opt.optimal_L_example3(1.0, 128, 1.0)


class TestRounding:
    def test_picks_better_neighbour(self):
        score = {3: 1.0, 4: 2.0}.get
        assert opt._round_by_metric(3.1, 10, score) == (4, 2.0)

    def test_ties_prefer_smaller(self):
        assert opt._round_by_metric(3.5, 10, lambda L: 1.0) == (3, 1.0)

    def test_central_difference(self):
        assert opt.central_difference(math.sin, 0.3) == pytest.approx(math.cos(0.3), abs=1e-9)
