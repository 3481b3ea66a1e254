import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seqbell.hv_models import (
    AnalyzerSetting,
    PhotonHiddenState,
    StrategyTable,
    StrategyTableError,
    conditional_prob_P1,
    conditional_prob_P2,
    normalize_angle,
    pbs_traverse,
    random_strategy_table,
    response_A,
    response_B_contextual,
    sequential_outcomes,
    strategy_response,
)

PI = math.pi


def test_normalize_angle_range():
    for theta in (-5.0, -PI, 0.0, PI / 3, PI, 2 * PI, 17.3):
        r = normalize_angle(theta)
        assert 0.0 <= r < PI
        assert math.isclose(math.cos(2 * r), math.cos(2 * theta), abs_tol=1e-12)


def test_hidden_state_invariants():
    s = PhotonHiddenState(0.5, 3 * PI / 2)
    assert s.theta_pol == pytest.approx(PI / 2)
    with pytest.raises(ValueError):
        PhotonHiddenState(1.0, 0.0)
    with pytest.raises(ValueError):
        PhotonHiddenState(-0.1, 0.0)


class TestPbsTraverse:
    def test_transmitted_branch(self):
        # p = cos^2(pi/4) = 0.5, u = 0.3 < p
        out, new = pbs_traverse(PhotonHiddenState(0.3, 0.0), AnalyzerSetting(PI / 4))
        assert out == 1
        assert new.u == pytest.approx(0.6)
        assert new.theta_pol == pytest.approx(PI / 4)

    def test_reflected_branch(self):
        out, new = pbs_traverse(PhotonHiddenState(0.9, 0.0), AnalyzerSetting(PI / 4))
        assert out == -1
        assert new.u == pytest.approx(0.8)
        assert new.theta_pol == pytest.approx(3 * PI / 4)

    def test_aligned_analyzer_is_identity(self):
        for u in (0.0, 0.31, 0.9999):
            out, new = pbs_traverse(PhotonHiddenState(u, 0.0), AnalyzerSetting(0.0))
            assert out == 1
            assert new.u == u
            assert new.theta_pol == 0.0

    def test_crossed_analyzer_always_reflects(self):
        for u in (0.0, 0.5, 0.999):
            out, new = pbs_traverse(PhotonHiddenState(u, 0.0), AnalyzerSetting(PI / 2))
            assert out == -1
            assert new.u == u
            assert new.theta_pol == 0.0

    @given(
        u=st.floats(min_value=0.0, max_value=1.0, exclude_max=True),
        theta_pol=st.floats(min_value=-10.0, max_value=10.0),
        angle=st.floats(min_value=-10.0, max_value=10.0),
    )
    @settings(max_examples=300)
    def test_state_invariant_preserved(self, u, theta_pol, angle):
        out, new = pbs_traverse(PhotonHiddenState(u, theta_pol), AnalyzerSetting(angle))
        assert out in (1, -1)
        assert 0.0 <= new.u < 1.0
        assert 0.0 <= new.theta_pol < PI

    def test_deterministic(self):
        state = PhotonHiddenState(0.1234, 0.7)
        setting = AnalyzerSetting(1.1)
        assert pbs_traverse(state, setting) == pbs_traverse(state, setting)


class TestSequentialOutcomes:
    def test_repeated_aligned(self):
        a = AnalyzerSetting(0.0)
        assert sequential_outcomes(0.0, 0.2, a, a) == (1, 1)

    def test_crossed_anticorrelate(self):
        assert sequential_outcomes(0.0, 0.2, AnalyzerSetting(0.0), AnalyzerSetting(PI / 2)) == (1, -1)

    def test_hand_traced_two_steps(self):
        # p1 = cos^2(pi/8) ~ 0.8536: u = 0.6 transmits, u' = 0.6/p1 ~ 0.7029
        # p2 = cos^2(pi/4) = 0.5: u' > p2, so the second PBS reflects
        assert sequential_outcomes(0.0, 0.6, AnalyzerSetting(PI / 8), AnalyzerSetting(3 * PI / 8)) == (1, -1)

    def test_second_analyzer_repeats_first(self):
        # after collapse, repeating the same setting reproduces the outcome
        rng = np.random.default_rng(7)
        for u in rng.random(200):
            for first in (0.0, 0.3, PI / 4):
                a = AnalyzerSetting(first)
                alpha, beta = sequential_outcomes(0.1, float(u), a, a)
                assert beta == alpha


class TestResponses:
    def test_response_a_forced_branches(self):
        assert response_A(AnalyzerSetting(0.0), (0.0, 0.99)) == 1
        assert response_A(AnalyzerSetting(PI / 2), (0.0, 0.0)) == -1
        assert response_A(AnalyzerSetting(PI / 4), (0.0, 0.49)) == 1

    def test_response_b_aligned_and_crossed(self):
        a = AnalyzerSetting(0.0)
        for u in (0.0, 0.3, 0.99):
            assert response_B_contextual(AnalyzerSetting(0.0), a, (0.0, u)) == 1
        assert response_B_contextual(AnalyzerSetting(PI / 2), a, (0.0, 0.1)) == -1

    def test_response_b_depends_on_first_setting(self):
        b = AnalyzerSetting(PI / 8)
        found = False
        for u in np.linspace(0.0, 0.999, 500):
            lam = (0.0, float(u))
            if response_B_contextual(b, AnalyzerSetting(0.0), lam) != response_B_contextual(
                b, AnalyzerSetting(PI / 4), lam
            ):
                found = True
                break
        assert found


class TestConditionalProbabilities:
    def test_p1_forced_branch(self):
        assert conditional_prob_P1(1, (0.0, 0.1), AnalyzerSetting(0.0)) == 1

    def test_p1_normalization(self):
        rng = np.random.default_rng(3)
        for u in rng.random(100):
            for thA in (0.0, 0.4, PI / 2, 2.9):
                a = AnalyzerSetting(thA)
                lam = (0.15, float(u))
                total = conditional_prob_P1(1, lam, a) + conditional_prob_P1(-1, lam, a)
                assert total == 1

    def test_joint_normalization_over_grid(self):
        settings_grid = [0.0, PI / 8, PI / 4, PI / 2, 1.7]
        for u in np.linspace(0.0, 0.99, 34):
            lam = (0.2, float(u))
            for thA in settings_grid:
                for thB in settings_grid:
                    a, b = AnalyzerSetting(thA), AnalyzerSetting(thB)
                    total = sum(
                        conditional_prob_P2(beta, alpha, lam, b, a)
                        * conditional_prob_P1(alpha, lam, a)
                        for alpha in (1, -1)
                        for beta in (1, -1)
                    )
                    assert total == 1

    @given(
        u=st.floats(min_value=0.0, max_value=1.0, exclude_max=True),
        thA=st.floats(min_value=0.0, max_value=3.14),
        thB=st.floats(min_value=0.0, max_value=3.14),
        alpha=st.sampled_from([1, -1]),
        beta=st.sampled_from([1, -1]),
    )
    @settings(max_examples=300)
    def test_values_are_zero_or_one(self, u, thA, thB, alpha, beta):
        lam = (0.0, u)
        a, b = AnalyzerSetting(thA), AnalyzerSetting(thB)
        assert conditional_prob_P1(alpha, lam, a) in (0, 1)
        assert conditional_prob_P2(beta, alpha, lam, b, a) in (0, 1)

    def test_counterfactual_branch_is_total(self):
        # alpha = +1 is impossible here (p1 = 0) but P2 must still be defined
        lam = (0.0, 0.3)
        a = AnalyzerSetting(PI / 2)
        b = AnalyzerSetting(PI / 4)
        assert conditional_prob_P2(1, 1, lam, b, a) + conditional_prob_P2(-1, 1, lam, b, a) == 1


class TestStrategyTable:
    def test_lookup(self):
        table = StrategyTable.deterministic((1, -1), (1, 1))
        assert strategy_response(table, "A", 0, 0) == 1
        assert strategy_response(table, "A", 1, 0) == -1
        assert strategy_response(table, "B", 0, 0) == 1

    def test_bad_weights(self):
        with pytest.raises(StrategyTableError):
            StrategyTable((0.5, 0.6), ((1, 1), (1, 1)), ((1, 1), (1, 1)))
        with pytest.raises(StrategyTableError):
            StrategyTable((-0.5, 1.5), ((1, 1), (1, 1)), ((1, 1), (1, 1)))

    def test_non_pm_one_entry_rejected(self):
        with pytest.raises(StrategyTableError):
            StrategyTable.deterministic((1, 0), (1, 1))

    def test_out_of_range_is_error(self):
        table = StrategyTable.deterministic((1, -1), (1, 1, -1))
        # A side has 2 settings: a B-side-sized index must fail loudly
        with pytest.raises(StrategyTableError):
            strategy_response(table, "A", 2, 0)
        with pytest.raises(StrategyTableError):
            strategy_response(table, "B", 3, 0)
        with pytest.raises(StrategyTableError):
            strategy_response(table, "A", 0, 5)
        with pytest.raises(StrategyTableError):
            strategy_response(table, "C", 0, 0)

    def test_random_tables_valid(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            table = random_strategy_table(rng)
            assert 1 <= table.n_components <= 64
            assert abs(sum(table.weights) - 1.0) <= 1e-12

    def test_side_a_invariant_under_b_side_choice(self):
        # non-contextuality: the A lookup takes no B-side argument, and its
        # value is the same however the B side would be queried
        rng = np.random.default_rng(5)
        table = random_strategy_table(rng)
        for k in range(table.n_components):
            for i in range(table.n_a_settings):
                values = {
                    strategy_response(table, "A", i, k)
                    for _j in range(table.n_b_settings)
                }
                assert len(values) == 1


class TestStatisticalInvariants:
    def test_rescaled_coordinate_uniform_per_branch(self):
        from scipy import stats

        rng = np.random.default_rng(101)
        u = rng.random(10**5)
        setting = AnalyzerSetting(PI / 5)
        transmitted, reflected = [], []
        for ui in u:
            out, new = pbs_traverse(PhotonHiddenState(float(ui), 0.0), setting)
            (transmitted if out == 1 else reflected).append(new.u)
        for branch in (transmitted, reflected):
            counts, _ = np.histogram(branch, bins=20, range=(0.0, 1.0))
            assert stats.chisquare(counts).pvalue > 1e-3

    def test_malus_transmission_frequency(self):
        rng = np.random.default_rng(55)
        n = 10**5
        u = rng.random(n)
        for delta_deg in range(0, 105, 15):
            delta = math.radians(delta_deg)
            p = math.cos(delta) ** 2
            freq = np.mean(u < p)
            se = math.sqrt(p * (1 - p) / n)
            assert abs(freq - p) <= max(5 * se, 1e-12)
