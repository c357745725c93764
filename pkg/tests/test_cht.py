import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chtmoead.cht import (
    PRESETS,
    DynamicPenalty,
    MultiStagedPenalty,
    NoPenalty,
    PenaltyInput,
    SearchState,
    SelfAdaptivePenalty,
    StaticPenalty,
    ThreeStagePenalty,
    dynamic_penalty,
    make_strategy,
    multi_staged_penalty,
    no_penalty,
    penalized_fitness,
    self_adaptive_fitness,
    static_penalty,
    strategy_params,
    three_stage_penalty,
)

unit = st.floats(0.0, 1.0, allow_nan=False)
gens = st.integers(0, 500)


def inp(f, v, t=1, **kw):
    return PenaltyInput(f_agg=f, v_scaled=v, state=SearchState(t, *kw.pop("counts", (0, 0))), **kw)


def all_presets():
    return [make_strategy(name) for name in PRESETS]


class TestNoPenalty:
    def test_identity(self):
        assert no_penalty(inp(0.3, 0.9)) == 0.3

    def test_zero(self):
        assert no_penalty(inp(0.0, 0.0)) == 0.0

    @given(unit, unit, unit, gens)
    def test_ignores_violation_and_state(self, f, v1, v2, t):
        assert no_penalty(inp(f, v1, t)) == no_penalty(inp(f, v2, t + 7)) == f


class TestStatic:
    def test_low_value(self):
        assert static_penalty(inp(0.5, 0.2), beta=1.0) == pytest.approx(0.7, abs=1e-12)

    def test_high_value(self):
        assert static_penalty(inp(0.3, 0.2), beta=1000.0) == pytest.approx(200.3, abs=1e-12)

    @given(unit, st.floats(0.0, 1e6))
    def test_feasible_identity(self, f, beta):
        assert static_penalty(inp(f, 0.0), beta) == f

    def test_negative_beta(self):
        with pytest.raises(ValueError):
            StaticPenalty(-1.0)


class TestMultiStaged:
    def test_no_violation(self):
        x = inp(0.4, 0.0, raw_constraints=[-1.0, 0.0, -3.0])
        assert multi_staged_penalty(x, (0.5,), (5.0, 50.0)) == 0.4

    def test_single_level(self):
        x = inp(0.25, 1.0, raw_constraints=[2.0])
        assert multi_staged_penalty(x, (), (10.0,)) == pytest.approx(0.25 + 40.0, abs=1e-12)

    def test_level_selection(self):
        pen = MultiStagedPenalty(thresholds=(1.0,), coefficients=(3.0, 7.0))
        assert pen(inp(0.0, 1.0, raw_constraints=[0.5])) == pytest.approx(3.0 * 0.25, abs=1e-12)
        assert pen(inp(0.0, 1.0, raw_constraints=[2.0])) == pytest.approx(7.0 * 4.0, abs=1e-12)

    def test_levels_per_constraint(self):
        pen = MultiStagedPenalty(thresholds=(1.0,), coefficients=((1.0, 2.0), (10.0, 20.0)))
        out = pen(inp(0.0, 1.0, raw_constraints=[0.5, 3.0]))
        assert out == pytest.approx(1.0 * 0.25 + 20.0 * 9.0, abs=1e-12)

    def test_wrong_row_count(self):
        with pytest.raises(ValueError):
            MultiStagedPenalty(thresholds=(1.0,), coefficients=(1.0,))

    def test_wrong_row_width(self):
        pen = MultiStagedPenalty(thresholds=(), coefficients=((1.0, 2.0),))
        with pytest.raises(ValueError):
            pen(inp(0.0, 1.0, raw_constraints=[1.0, 1.0, 1.0]))

    def test_needs_raw_constraints(self):
        with pytest.raises(ValueError):
            MultiStagedPenalty()(inp(0.1, 0.5))


class TestDynamic:
    def test_arithmetic(self):
        assert dynamic_penalty(inp(0.0, 1.0, t=4), C=0.5, alpha=2.0) == pytest.approx(4.0, abs=1e-12)

    def test_t_zero(self):
        assert dynamic_penalty(inp(0.3, 0.8, t=0), C=2.0, alpha=2.0) == 0.3

    @given(unit, gens)
    def test_feasible_identity(self, f, t):
        assert DynamicPenalty()(inp(f, 0.0, t)) == f

    @pytest.mark.parametrize("C, alpha", [(0.0, 1.0), (1.0, 0.0), (-1.0, 2.0)])
    def test_nonpositive(self, C, alpha):
        with pytest.raises(ValueError):
            DynamicPenalty(C, alpha)

    @given(unit, st.floats(0.01, 1.0), gens)
    def test_nondecreasing_in_time(self, f, v, t):
        pen = DynamicPenalty()
        assert pen(inp(f, v, t + 1)) >= pen(inp(f, v, t))


class TestSelfAdaptive:
    def test_no_feasible_solutions(self):
        x = inp(0.0, 0.4, counts=(0, 10), f_agg_norm=0.9, feasible=False)
        assert self_adaptive_fitness(x) == pytest.approx(0.4, abs=1e-12)

    def test_feasible_reduces_to_normalized_aggregation(self):
        x = inp(0.0, 0.0, counts=(5, 5), f_agg_norm=0.6, feasible=True)
        assert self_adaptive_fitness(x) == pytest.approx(0.6, abs=1e-12)

    def test_unfeasible_example(self):
        x = inp(0.0, 0.4, counts=(5, 5), f_agg_norm=0.6, feasible=False)
        expected = math.sqrt(0.52) + 0.5 * 0.4 + 0.5 * 0.6
        assert self_adaptive_fitness(x) == pytest.approx(expected, abs=1e-9)
        assert self_adaptive_fitness(x) == pytest.approx(1.22111, abs=1e-5)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            self_adaptive_fitness(inp(0.0, 1.5, counts=(1, 1), f_agg_norm=0.2))

    def test_needs_normalized_aggregation(self):
        with pytest.raises(ValueError):
            self_adaptive_fitness(inp(0.2, 0.1))

    @given(unit, unit, st.integers(1, 50), st.integers(0, 50))
    def test_unfeasible_never_beats_equal_feasible(self, f, v, nf, nu):
        pen = SelfAdaptivePenalty()
        feas = pen(inp(0.0, 0.0, counts=(nf, nu), f_agg_norm=f, feasible=True))
        infeas = pen(inp(0.0, v, counts=(nf, nu), f_agg_norm=f, feasible=False))
        assert infeas >= feas - 1e-12


class TestThreeStage:
    def test_first_stage_is_exact(self):
        assert three_stage_penalty(inp(0.123456789, 0.9, t=10), p1=0.0) == 0.123456789

    def test_middle_stage(self):
        assert three_stage_penalty(inp(0.1, 0.2, t=30), p2=5.0) == pytest.approx(1.1, abs=1e-12)

    def test_boundary_uses_third(self):
        assert three_stage_penalty(inp(0.0, 1.0, t=50), p3=1000.0) == pytest.approx(1000.0, abs=1e-12)

    def test_stage_boundaries(self):
        pen = ThreeStagePenalty()
        assert [pen.stage(t) for t in (24, 25, 49, 50)] == [1, 2, 2, 3]

    @pytest.mark.parametrize("kw", [dict(t1=0), dict(t1=30, t2=30), dict(p1=5.0, p2=1.0), dict(p2=2000.0)])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            ThreeStagePenalty(**kw)

    @given(unit, unit, gens)
    def test_monotone_schedule(self, f, v, t):
        pen = ThreeStagePenalty()
        assert pen(inp(f, v, t + 1)) >= pen(inp(f, v, t))


class TestUniversal:
    # a feasible candidate implies at least one feasible incumbent count
    @given(unit, gens, st.integers(1, 20), st.integers(0, 20))
    def test_feasible_identity_all_presets(self, f, t, nf, nu):
        for pen in all_presets():
            x = inp(f, 0.0, t, counts=(nf, nu), f_agg_norm=f,
                    raw_constraints=[-1.0, 0.0], feasible=True)
            if isinstance(pen, SelfAdaptivePenalty):
                assert pen(x) == pytest.approx(f, abs=1e-12)
            else:
                assert pen(x) == no_penalty(x)

    @given(unit, unit, gens)
    def test_pure(self, f, v, t):
        for pen in all_presets():
            x = inp(f, v, t, counts=(3, 4), f_agg_norm=f, raw_constraints=[v, -0.1], feasible=v == 0)
            assert pen(x) == pen(x)

    @given(unit, unit, gens)
    def test_penalty_never_rewards_violation(self, f, v, t):
        for pen in all_presets():
            if isinstance(pen, SelfAdaptivePenalty):
                continue
            x = inp(f, v, t, raw_constraints=[v], feasible=v == 0)
            assert pen(x) >= f

    @given(st.floats(0.0, 1.0), st.floats(0.01, 1.0))
    def test_high_static_full_violation(self, f, _):
        assert make_strategy("high_static")(inp(f, 1.0)) == pytest.approx(f + 1000.0, abs=1e-9)


class TestRegistry:
    def test_presets_build(self):
        for name in PRESETS:
            pen = make_strategy(name)
            assert strategy_params(pen) == {k: v for k, v in strategy_params(pen).items()}

    def test_static_default_beta(self):
        assert make_strategy("static").beta == 1000.0

    def test_override(self):
        assert make_strategy("high_static", {"beta": 7}).beta == 7

    def test_unknown_name(self):
        with pytest.raises(ValueError, match="unknown CHT"):
            make_strategy("tabu")

    def test_unknown_param(self):
        with pytest.raises(ValueError, match="unknown parameter"):
            make_strategy("dynamic", {"gamma": 1})


class TestMatrix:
    def test_shape_and_no_penalty(self):
        tch = np.array([[0.1, 0.5, 0.3], [0.2, 0.2, 0.9]])
        v = np.array([0.0, 1.0, 0.5])
        G = np.array([[-1.0], [2.0], [1.0]])
        out = penalized_fitness(tch, v, G, v == 0, NoPenalty(), SearchState(1, 1, 2))
        np.testing.assert_array_equal(out, tch)

    def test_static_matrix(self):
        tch = np.array([[0.1, 0.5]])
        out = penalized_fitness(tch, [0.0, 1.0], [[-1.0], [1.0]], [True, False],
                                StaticPenalty(1000.0), SearchState(1))
        np.testing.assert_allclose(out, [[0.1, 1000.5]], atol=1e-12)

    def test_self_adaptive_uses_row_normalization(self):
        tch = np.array([[0.2, 0.4, 0.6]])
        out = penalized_fitness(tch, [0.0, 0.0, 0.0], [[-1.0]] * 3, [True] * 3,
                                SelfAdaptivePenalty(), SearchState(1, 3, 0))
        np.testing.assert_allclose(out, [[0.0, 0.5, 1.0]], atol=1e-12)
