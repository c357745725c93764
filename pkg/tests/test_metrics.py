import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from chtmoead.metrics import (
    AnytimeTrace,
    TraceRecord,
    feasibility_ratio,
    filter_nondominated,
    hypervolume,
    minmax_scale,
    nondominated_mask,
)
from hv_oracle import mc_hypervolume

REF2 = np.array([1.1, 1.1])


def fronts(d_min=2, d_max=4, max_points=8):
    return st.integers(d_min, d_max).flatmap(
        lambda d: arrays(
            float,
            st.tuples(st.integers(1, max_points), st.just(d)),
            elements=st.floats(0.0, 1.0, allow_nan=False, width=32),
        )
    )


class TestFilter:
    def test_dominated_point_removed(self):
        out = filter_nondominated([[0.2, 0.8], [0.5, 0.5], [0.6, 0.6]])
        np.testing.assert_array_equal(out, [[0.2, 0.8], [0.5, 0.5]])

    def test_single_point(self):
        np.testing.assert_array_equal(filter_nondominated([[0.3, 0.4]]), [[0.3, 0.4]])

    def test_duplicates_keep_first(self):
        mask = nondominated_mask([[0.5, 0.5], [0.1, 0.9], [0.5, 0.5]])
        assert mask.tolist() == [True, True, False]

    def test_empty(self):
        assert filter_nondominated(np.empty((0, 2))).shape == (0, 2)

    def test_rejects_ragged(self):
        with pytest.raises(ValueError):
            filter_nondominated(np.zeros(3))

    @given(fronts())
    def test_result_is_mutually_nondominated(self, P):
        Q = filter_nondominated(P)
        for i, a in enumerate(Q):
            for j, b in enumerate(Q):
                if i != j:
                    assert not (np.all(a <= b) and np.any(a < b))
                    assert not np.array_equal(a, b)

    @given(fronts())
    def test_every_removed_point_is_covered(self, P):
        Q = filter_nondominated(P)
        for p in P:
            assert np.any(np.all(Q <= p, axis=1))


class TestHypervolume:
    def test_single_box(self):
        assert hypervolume([[0.0, 0.0]], REF2) == pytest.approx(1.21, abs=1e-12)

    def test_two_points(self):
        # 0.9*0.3 + 0.6*0.3; the union is counted once
        assert hypervolume([[0.2, 0.8], [0.5, 0.5]], REF2) == pytest.approx(0.45, abs=1e-12)

    def test_two_points_against_monte_carlo(self):
        est, se = mc_hypervolume([[0.2, 0.8], [0.5, 0.5]], REF2, rng=7)
        assert abs(est - 0.45) < 3e-3
        assert abs(est - 0.45) < 3 * se + 1e-12

    def test_empty(self):
        assert hypervolume(np.empty((0, 2)), REF2) == 0.0

    def test_points_outside_ref_ignored(self):
        assert hypervolume([[1.2, 0.0], [0.0, 1.1]], REF2) == 0.0

    def test_ref_dimension_mismatch(self):
        with pytest.raises(ValueError):
            hypervolume([[0.1, 0.2, 0.3]], REF2)

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            hypervolume([[0.1, 0.2]], REF2, method="magic")

    def test_sweep_needs_two_objectives(self):
        with pytest.raises(ValueError):
            hypervolume([[0.1, 0.2, 0.3]], np.full(3, 1.1), method="sweep")

    def test_3d_known_value(self):
        # two unit-ish boxes overlapping in a cube of side 0.5
        P = [[0.0, 0.5, 0.5], [0.5, 0.0, 0.5]]
        ref = np.ones(3)
        expected = 2 * (1.0 * 0.5 * 0.5) - 0.5 * 0.5 * 0.5
        for m in ("auto", "slice", "wfg"):
            assert hypervolume(P, ref, method=m) == pytest.approx(expected, abs=1e-12)

    @given(fronts(2, 2, 12))
    def test_sweep_equals_slicing_in_2d(self, P):
        a = hypervolume(P, REF2, method="sweep")
        b = hypervolume(P, REF2, method="slice")
        assert abs(a - b) <= 1e-12

    @given(fronts(3, 5, 7))
    def test_wfg_equals_slicing(self, P):
        ref = np.full(P.shape[1], 1.1)
        a = hypervolume(P, ref, method="wfg")
        b = hypervolume(P, ref, method="slice")
        assert a == pytest.approx(b, rel=1e-10, abs=1e-12)

    @given(fronts(), st.data())
    def test_adding_a_point_never_decreases(self, P, data):
        ref = np.full(P.shape[1], 1.1)
        extra = data.draw(arrays(float, P.shape[1], elements=st.floats(0.0, 1.25, width=32)))
        assert hypervolume(np.vstack([P, extra]), ref) >= hypervolume(P, ref) - 1e-12

    @given(fronts(), st.randoms(use_true_random=False))
    def test_order_invariant(self, P, rnd):
        ref = np.full(P.shape[1], 1.1)
        idx = list(range(len(P)))
        rnd.shuffle(idx)
        assert hypervolume(P[idx], ref) == pytest.approx(hypervolume(P, ref), rel=1e-12, abs=1e-15)

    @given(fronts())
    def test_bounded_by_ref_box(self, P):
        ref = np.full(P.shape[1], 1.1)
        hv = hypervolume(P, ref)
        assert 0.0 <= hv <= np.prod(ref) + 1e-12


class TestFeasibilityRatio:
    def test_all_feasible(self):
        assert feasibility_ratio([0, 0, 0]) == 1.0

    def test_none_feasible(self):
        assert feasibility_ratio([1, 2]) == 0.0

    def test_three_of_four(self):
        assert feasibility_ratio([0, 0, 0.1, 0]) == 0.75

    def test_empty(self):
        with pytest.raises(ValueError):
            feasibility_ratio([])


def test_minmax_scale_degenerate_column():
    F = np.array([[2.0, 5.0], [4.0, 5.0], [6.0, 5.0]])
    out = minmax_scale(F, F.min(0), F.max(0))
    np.testing.assert_array_equal(out, [[0, 0], [0.5, 0], [1, 0]])


class TestTrace:
    def test_best_so_far(self):
        tr = AnytimeTrace()
        for g, hv in enumerate([0.1, 0.3, 0.2, 0.4]):
            tr.append(TraceRecord(g, 10 * (g + 1), hv, 1.0))
        np.testing.assert_array_equal(tr.best_so_far, [0.1, 0.3, 0.3, 0.4])
        assert tr.final.hypervolume == 0.4

    def test_generations_must_increase(self):
        tr = AnytimeTrace([TraceRecord(0, 10, 0.0, 0.0)])
        with pytest.raises(ValueError):
            tr.append(TraceRecord(0, 20, 0.0, 0.0))

    def test_evaluations_nondecreasing(self):
        tr = AnytimeTrace([TraceRecord(0, 10, 0.0, 0.0)])
        with pytest.raises(ValueError):
            tr.append(TraceRecord(1, 5, 0.0, 0.0))
