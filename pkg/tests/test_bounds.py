"""Tests of the extremal Bell windows, LHV enumeration, and angle scans."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bellsim.bounds import (
    LHV_BOUND,
    TSIRELSON_BOUND,
    FidelityConstraint,
    LhvStrategy,
    enumerate_strategies,
    extremal_bell_closed_form,
    extremal_bell_numeric,
    lhv_enumerate,
    tsirelson_scan,
    werner_bell,
)
from bellsim.states import (
    BellAngles,
    MeasurementSetting,
    bell_pair_ideal,
    chsh_operator,
    fidelity,
    werner,
)


class TestClosedForm:
    def test_reference_fidelity_window(self):
        b_min, b_max = extremal_bell_closed_form(0.87)
        assert b_min == pytest.approx(2.0930, abs=5e-5)
        assert b_max == pytest.approx(2.4607, abs=5e-5)
        # the published claim, after rounding
        assert round(b_min, 2) == 2.09
        assert round(b_max, 2) == 2.46

    def test_pure_target(self):
        b_min, b_max = extremal_bell_closed_form(1.0)
        assert b_min == pytest.approx(TSIRELSON_BOUND, abs=1e-12)
        assert b_max == pytest.approx(TSIRELSON_BOUND, abs=1e-12)

    def test_three_quarters(self):
        b_min, b_max = extremal_bell_closed_form(0.75)
        assert b_min == pytest.approx(1.41421, abs=5e-6)
        assert b_max == pytest.approx(2.12132, abs=5e-6)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            extremal_bell_closed_form(1.01)
        with pytest.raises(ValueError):
            extremal_bell_closed_form(-0.2)

    def test_monotone_maximum_over_sweep(self):
        values = [extremal_bell_closed_form(f)[1] for f in np.linspace(0.0, 1.0, 50)]
        assert all(b2 >= b1 - 1e-12 for b1, b2 in zip(values, values[1:]))


class TestNumericExtremes:
    def test_matches_closed_form_at_reference_fidelity(self):
        result = extremal_bell_numeric(FidelityConstraint(0.87))
        assert result.bell_max == pytest.approx(2.4607, abs=1e-3)
        assert result.bell_min == pytest.approx(2.0930, abs=1e-3)
        assert result.converged

    def test_fully_constrained_at_unit_fidelity(self):
        result = extremal_bell_numeric(FidelityConstraint(1.0), iterations=4)
        assert result.bell_min == pytest.approx(TSIRELSON_BOUND, abs=1e-6)
        assert result.bell_max == pytest.approx(TSIRELSON_BOUND, abs=1e-6)

    @pytest.mark.parametrize("f", [0.6, 0.75, 0.87, 0.95])
    def test_brackets_closed_form(self, f):
        closed_min, closed_max = extremal_bell_closed_form(f)
        result = extremal_bell_numeric(FidelityConstraint(f), iterations=16)
        assert result.bell_min <= closed_min + 1e-3
        assert result.bell_max >= closed_max - 1e-3
        assert result.bell_max <= TSIRELSON_BOUND + 1e-9

    def test_witnesses_satisfy_constraint(self):
        constraint = FidelityConstraint(0.87)
        result = extremal_bell_numeric(constraint, iterations=8)
        target = bell_pair_ideal()
        for witness in (result.witness_min, result.witness_max):
            assert abs(fidelity(witness, target) - 0.87) < 1e-6
            eigenvalues = np.linalg.eigvalsh(witness.matrix)
            assert eigenvalues.min() > -1e-10
            assert np.trace(witness.matrix).real == pytest.approx(1.0, abs=1e-12)

    def test_abs_form_never_below_signed(self):
        result = extremal_bell_numeric(FidelityConstraint(0.8), iterations=8)
        assert result.abs_form_max >= result.bell_max - 1e-9
        assert result.abs_form_min >= result.bell_min - 1e-9

    def test_low_fidelity_flagged_but_computed(self):
        result = extremal_bell_numeric(FidelityConstraint(0.3), iterations=8)
        assert result.out_of_regime
        closed_min, closed_max = extremal_bell_closed_form(0.3)
        assert result.bell_min <= closed_min + 1e-3
        assert result.bell_min < 0.0
        assert result.bell_max == pytest.approx(closed_max, abs=1e-3)

    def test_rejects_zero_restarts(self):
        with pytest.raises(ValueError):
            extremal_bell_numeric(FidelityConstraint(0.9), iterations=0)

    def test_constraint_rejects_bad_fidelity(self):
        with pytest.raises(ValueError):
            FidelityConstraint(1.3)


class TestLhv:
    def test_maximum_is_two(self):
        best, argmax = lhv_enumerate()
        assert best == LHV_BOUND
        assert argmax

    def test_every_strategy_is_at_most_two(self):
        for strategy, value in enumerate_strategies():
            assert value <= LHV_BOUND + 1e-15
            assert value == strategy.bell_value()

    def test_sixteen_strategies(self):
        table = enumerate_strategies()
        assert len(table) == 16
        assert len({(s.a1, s.a2, s.b1, s.b2) for s, _ in table}) == 16

    def test_all_plus_strategy(self):
        assert LhvStrategy(1, 1, 1, 1).bell_value() == pytest.approx(2.0, abs=1e-15)

    def test_uniform_mixture_cancels(self):
        # mixture-level correlations: mean of a_i * b_j over all strategies
        q = {(i, j): 0.0 for i in (1, 2) for j in (1, 2)}
        for strategy, _ in enumerate_strategies():
            q[(1, 1)] += strategy.a1 * strategy.b1 / 16.0
            q[(1, 2)] += strategy.a1 * strategy.b2 / 16.0
            q[(2, 1)] += strategy.a2 * strategy.b1 / 16.0
            q[(2, 2)] += strategy.a2 * strategy.b2 / 16.0
        mixed = abs(q[(2, 2)] - q[(1, 2)]) + abs(q[(2, 1)] + q[(1, 1)])
        assert mixed == pytest.approx(0.0, abs=1e-15)

    def test_rejects_non_binary_strategy(self):
        with pytest.raises(ValueError):
            LhvStrategy(1, 1, 0, 1)

    @given(
        a1=st.sampled_from((-1, 1)),
        a2=st.sampled_from((-1, 1)),
        b1=st.sampled_from((-1, 1)),
        b2=st.sampled_from((-1, 1)),
    )
    def test_deterministic_value_is_exactly_two(self, a1, a2, b1, b2):
        # |a2 b2 - a1 b2| + |a2 b1 + a1 b1| = |b2||a2 - a1| + |b1||a2 + a1| = 2
        assert LhvStrategy(a1, a2, b1, b2).bell_value() == 2.0


class TestTsirelsonScan:
    def test_canonical_resolution_recovers_maximum(self):
        result = tsirelson_scan(64)
        assert abs(result.bell_value - TSIRELSON_BOUND) < 1e-9

    def test_coarse_grid_stays_below_ceiling(self):
        result = tsirelson_scan(8)
        assert result.bell_value <= TSIRELSON_BOUND + 1e-12

    def test_rejects_tiny_grid(self):
        with pytest.raises(ValueError):
            tsirelson_scan(7)

    def test_argmax_realizes_reported_value(self):
        result = tsirelson_scan(32)
        a1, a2, b1, b2 = result.thetas
        q = lambda x, y: math.cos(x - y)
        recomputed = abs(q(a2, b2) - q(a1, b2)) + abs(q(a2, b1) + q(a1, b1))
        assert recomputed == pytest.approx(result.bell_value, abs=1e-12)

    def test_optimal_b_family_for_fixed_a(self):
        # brute-force oracle: with a1 = 0, a2 = pi/2 fixed, the optimal
        # (b1, b2) lie in the (pi/4, 3*pi/4) family
        thetas = np.arange(65) * (math.pi / 64)
        a1, a2 = 0.0, math.pi / 2

        def partial_bell(b1, b2):
            q = lambda x, y: math.cos(x - y)
            return abs(q(a2, b2) - q(a1, b2)) + abs(q(a2, b1) + q(a1, b1))

        best = max(
            ((partial_bell(b1, b2), b1, b2) for b1 in thetas for b2 in thetas),
            key=lambda item: item[0],
        )
        value, b1, b2 = best
        assert value == pytest.approx(TSIRELSON_BOUND, abs=1e-12)
        assert {round(b1 / math.pi, 6), round(b2 / math.pi, 6)} == {0.25, 0.75}


class TestWernerBell:
    def test_pure_limit(self):
        assert werner_bell(1.0) == pytest.approx(2.82843, abs=5e-6)

    def test_reference_mixing(self):
        value = werner_bell(0.82667)
        assert value == pytest.approx(TSIRELSON_BOUND * 0.82667, abs=1e-12)
        # matrix-oracle agreement
        operator = chsh_operator(BellAngles.canonical())
        traced = float(np.real(np.trace(werner(0.82667).matrix @ operator)))
        assert value == pytest.approx(traced, abs=1e-12)

    def test_classical_threshold(self):
        assert werner_bell(2.0 ** -0.5) == pytest.approx(2.0, abs=1e-12)
        assert werner_bell(0.70711) == pytest.approx(2.0, abs=1e-4)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            werner_bell(-0.2)


class TestSettingsInteroperability:
    def test_numeric_extremes_with_custom_angles(self):
        # suboptimal angles reduce the attainable window
        angles = BellAngles(
            MeasurementSetting(0.0),
            MeasurementSetting(math.pi / 3),
            MeasurementSetting(math.pi / 4),
            MeasurementSetting(2 * math.pi / 3),
        )
        result = extremal_bell_numeric(
            FidelityConstraint(1.0, angles=angles), iterations=4
        )
        ideal = bell_pair_ideal()
        operator = chsh_operator(angles)
        from bellsim.states import densify

        expected = float(np.real(np.trace(densify(ideal).matrix @ operator)))
        assert result.bell_max == pytest.approx(expected, abs=1e-9)
        assert result.bell_max < TSIRELSON_BOUND
