import numpy as np
import pytest

from evcharge.mdp import (
    MdpConfig,
    bellman_residual,
    linear_capped,
    softplus,
    solve,
    terminal_value,
    terminal_values,
    verify_structure,
)
from evcharge.risk import RiskParams, RiskSchedule

from conftest import DESK_PM, MICRO_PM, desk_cfg, micro_cfg
from oracles import enumerate_policies_value, greedy_from_tables, risk_neutral_dp


def random_schedule(rng, horizon):
    per = tuple(RiskParams(float(rng.uniform(0, 1)), float(rng.uniform(0.05, 0.95)))
                for _ in range(horizon + 1))
    return RiskSchedule(per)


class TestConfig:
    def test_shortage_full_horizon(self):
        cfg = MdpConfig(r_max=60, x_max=60, c_f=0.5, p_ref=0.05, gamma_h=0.01,
                        horizon=16, r0=0)
        assert cfg.shortage(40) == 20  # benchmark saturates at r_max

    def test_shortage_short_horizon(self):
        cfg = MdpConfig(r_max=60, x_max=10, c_f=0.5, p_ref=0.05, gamma_h=0.01,
                        horizon=2, r0=0)
        assert cfg.shortage(5) == 15  # benchmark is 2 * 10 = 20

    def test_fast_regime_flag(self):
        assert desk_cfg(x_max=12).fast_regime
        assert not desk_cfg(x_max=3).fast_regime

    def test_validation(self):
        with pytest.raises(ValueError):
            MdpConfig(r_max=5, x_max=0, c_f=0.1, p_ref=0.05, gamma_h=0.0, horizon=2)
        with pytest.raises(ValueError):
            MdpConfig(r_max=5, x_max=5, c_f=0.1, p_ref=0.05, gamma_h=0.0,
                      horizon=2, r0=9)
        with pytest.raises(ValueError):
            MdpConfig(r_max=5, x_max=5, c_f=0.1, p_ref=0.05, gamma_h=0.0,
                      horizon=2, gamma_y_kind="quadratic")

    def test_gamma_y_kinds(self):
        assert desk_cfg().gamma_y is softplus
        capped = MdpConfig(r_max=5, x_max=5, c_f=0.1, p_ref=0.05, gamma_h=0.0,
                           horizon=2, gamma_y_kind="linear-capped", gamma_y_cap=0.5)
        g = capped.gamma_y
        assert g(-1.0) == 0.0
        assert g(0.2) == pytest.approx(0.2)
        assert g(3.0) == 0.5

    def test_lipschitz_guard(self):
        # the softplus slope bound 1 is far below exp(2 kappa)/p_ref, so the
        # guard never fires at sane parameters
        desk_cfg().check_compensation_lipschitz(DESK_PM)


class TestTerminal:
    def test_no_shortage_is_free(self):
        cfg = micro_cfg()
        beta = RiskParams(0.8, 0.9)
        assert terminal_value(cfg.r_max, 10.0, beta, cfg, MICRO_PM) == 0.0

    def test_known_value_without_market_term(self):
        # gamma_Y clipped to zero and gamma_h = 0: payment is h * p_ref exactly
        cfg = MdpConfig(r_max=60, x_max=60, c_f=0.5, p_ref=0.05, gamma_h=0.0,
                        horizon=16, r0=0, gamma_y_kind="linear-capped",
                        gamma_y_cap=0.0)
        v = terminal_value(40, 35.0, RiskParams(0.5, 0.9), cfg, MICRO_PM)
        assert v == pytest.approx(20 * 0.05, abs=1e-12)

    def test_risk_aversion_never_cheapens_compensation(self, micro_grid):
        cfg = micro_cfg()
        rn = terminal_values(cfg, RiskParams(0.0, 0.5), MICRO_PM, micro_grid)
        averse = terminal_values(cfg, RiskParams(1.0, 0.9), MICRO_PM, micro_grid)
        assert np.all(averse >= rn - 1e-12)

    def test_shape(self, micro_grid):
        cfg = micro_cfg()
        v = terminal_values(cfg, RiskParams(0.3, 0.7), MICRO_PM, micro_grid)
        assert v.shape == (cfg.r_max + 1, len(micro_grid))


class TestSolve:
    def test_risk_neutral_matches_plain_dp(self, desk_pm, desk_grid):
        cfg = desk_cfg(horizon=4)
        beta = RiskSchedule.homogeneous(0.0, 0.5, cfg.horizon)
        sol = solve(cfg, beta, desk_pm, desk_grid)
        oracle = risk_neutral_dp(cfg, desk_pm, desk_grid)
        np.testing.assert_allclose(sol.values, oracle, atol=1e-10)

    def test_micro_brute_force(self, micro_pm, micro_grid):
        cfg = micro_cfg()
        rng = np.random.default_rng(17)
        for _ in range(10):
            beta = random_schedule(rng, cfg.horizon)
            sol = solve(cfg, beta, micro_pm, micro_grid)
            for r0 in (0, 2):
                for ip0 in (0, 2, 4):
                    brute = enumerate_policies_value(cfg, beta, micro_pm,
                                                     micro_grid, r0, ip0)
                    assert sol.values[0, r0, ip0] == pytest.approx(brute, abs=1e-12)

    def test_greedy_matches_table_argmin(self, desk_pm, desk_grid):
        cfg = desk_cfg(x_max=3, horizon=5)
        rng = np.random.default_rng(23)
        beta = random_schedule(rng, cfg.horizon)
        sol = solve(cfg, beta, desk_pm, desk_grid)
        for t in range(cfg.horizon):
            for r in range(cfg.r_max + 1):
                for ip in range(0, len(desk_grid), 7):
                    want = greedy_from_tables(sol, t, r, ip)
                    got = sol.greedy_action(r, float(desk_grid.points[ip]), t)
                    assert got == want

    def test_greedy_threshold_formula(self, desk_pm, desk_grid):
        cfg = desk_cfg(x_max=4, horizon=3)
        sol = solve(cfg, RiskSchedule.homogeneous(0.6, 0.8, 3), desk_pm, desk_grid)
        for ip in (0, 5, 20, 40):
            p = float(desk_grid.points[ip])
            thr = sol.threshold_at(1, p)
            for r in range(cfg.r_max + 1):
                want = min(thr - r, cfg.x_max) if r <= thr else 0
                assert sol.greedy_action(r, p, 1) == want

    def test_no_action_at_horizon(self, desk_pm, desk_grid):
        cfg = desk_cfg(horizon=2)
        sol = solve(cfg, RiskSchedule.homogeneous(0.5, 0.9, 2), desk_pm, desk_grid)
        with pytest.raises(ValueError):
            sol.greedy_action(0, 20.0, 2)

    def test_schedule_horizon_mismatch(self, desk_pm, desk_grid):
        with pytest.raises(ValueError):
            solve(desk_cfg(horizon=4), RiskSchedule.homogeneous(0.5, 0.9, 3),
                  desk_pm, desk_grid)

    def test_bellman_residual_tiny(self, desk_pm, desk_grid):
        cfg = desk_cfg(horizon=3)
        sol = solve(cfg, RiskSchedule.homogeneous(0.7, 0.85, 3), desk_pm, desk_grid)
        assert bellman_residual(sol, desk_pm) < 1e-10

    def test_values_nondecreasing_in_risk_aversion(self, desk_pm, desk_grid):
        cfg = desk_cfg(horizon=3)
        mild = solve(cfg, RiskSchedule.homogeneous(0.2, 0.5, 3), desk_pm, desk_grid)
        harsh = solve(cfg, RiskSchedule.homogeneous(0.9, 0.95, 3), desk_pm, desk_grid)
        assert np.all(harsh.values >= mild.values - 1e-9)


class TestStructure:
    @pytest.mark.parametrize("lam,alpha", [(0.0, 0.5), (1.0, 0.95), (0.5, 0.8)])
    def test_structure_passes(self, desk_pm, desk_grid, lam, alpha):
        cfg = desk_cfg(horizon=4)
        sol = solve(cfg, RiskSchedule.homogeneous(lam, alpha, 4), desk_pm, desk_grid)
        report = verify_structure(sol)
        assert report.all_passed, str(report)

    def test_negative_control_detects_corruption(self, desk_pm, desk_grid):
        cfg = desk_cfg(horizon=3)
        sol = solve(cfg, RiskSchedule.homogeneous(0.5, 0.9, 3), desk_pm, desk_grid)
        sol.values[1, 6, 10] += 5.0  # break convexity in r at a known spot
        report = verify_structure(sol)
        assert not report.all_passed
        convex = next(c for c in report.checks if c.name == "value_convex_in_resource")
        assert not convex.passed
        assert convex.location is not None
        t, r, ip = convex.location
        assert t == 1 and ip == 10 and abs(r - 6) <= 1
