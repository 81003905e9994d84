import numpy as np
import pytest

from ivosbench.backends import (
    CopyNearestPropagator,
    DecayOraclePropagator,
    MemoryEntry,
    OracleInteraction,
    ProbMask,
    RegionGrowInteraction,
    distance_weighted_fusion,
)
from ivosbench.interactions import Click, Polarity, error_regions
from ivosbench.metrics import jaccard

from oracles import brute_erode, random_label_mask


def prob_of(labels, ids=(1,)):
    return ProbMask.from_labels(np.asarray(labels), ids)


def entry(index, labels, ids=(1,)):
    return MemoryEntry(frame_index=index, frame=None, mask=prob_of(labels, ids))


def positive(x, y, o=1, frame=0):
    return Click((x, y), o, Polarity.POSITIVE, frame)


def negative(x, y, o=1, frame=0):
    return Click((x, y), o, Polarity.NEGATIVE, frame)


class TestOracleInteraction:
    def test_positive_click_recovers_blob(self):
        gt = np.zeros((8, 8), dtype=np.int32)
        gt[2:6, 2:6] = 1
        oracle = OracleInteraction([gt])
        out = oracle(None, ProbMask.background(8, 8, [1]), [positive(3, 3)])
        assert (out.argmax_labels() == gt).all()

    def test_click_on_correct_prediction_is_noop(self):
        gt = np.zeros((4, 4), dtype=np.int32)
        gt[1:3, 1:3] = 1
        oracle = OracleInteraction([gt])
        prev = prob_of(gt)
        out = oracle(None, prev, [positive(1, 1)])
        assert (out.argmax_labels() == gt).all()

    def test_negative_click_removes_false_positive(self):
        gt = np.zeros((6, 6), dtype=np.int32)
        pred = np.zeros((6, 6), dtype=np.int32)
        pred[1:4, 1:4] = 1
        oracle = OracleInteraction([gt])
        out = oracle(None, prob_of(pred), [negative(2, 2)])
        assert not out.argmax_labels().any()

    def test_monotone_j_improvement_randomized(self):
        rng = np.random.RandomState(0)
        improved = 0
        for _ in range(1000):
            gt = random_label_mask(rng, 12, 10, [1])
            pred = random_label_mask(rng, 12, 10, [1])
            oracle = OracleInteraction([gt])
            prev = prob_of(pred)
            before = jaccard(prev.argmax_labels() == 1, gt == 1)
            fn, fp = error_regions(prev.argmax_labels(), gt, 1)
            regions = fn + fp
            if not regions:
                continue
            region = regions[rng.randint(len(regions))]
            x, y = region.pixels[rng.randint(region.area)]
            polarity = Polarity.POSITIVE if any(r is region for r in fn) else Polarity.NEGATIVE
            out = oracle(None, prev, [Click((x, y), 1, polarity, 0)])
            after = jaccard(out.argmax_labels() == 1, gt == 1)
            assert after >= before
            improved += after > before
        assert improved > 0

    def test_converges_in_component_count_rounds(self):
        rng = np.random.RandomState(1)
        for _ in range(50):
            gt = random_label_mask(rng, 14, 12, [1])
            pred = random_label_mask(rng, 14, 12, [1])
            oracle = OracleInteraction([gt])
            state = prob_of(pred)
            fn, fp = error_regions(state.argmax_labels(), gt, 1)
            budget = len(fn) + len(fp)
            for _ in range(budget):
                fn, fp = error_regions(state.argmax_labels(), gt, 1)
                if not fn and not fp:
                    break
                if fn:
                    x, y = fn[0].pixels[0]
                    state = oracle(None, state, [positive(x, y)])
                else:
                    x, y = fp[0].pixels[0]
                    state = oracle(None, state, [negative(x, y)])
            assert (state.argmax_labels() == gt).all()

    def test_click_outside_error_regions_ignored(self):
        gt = np.zeros((4, 4), dtype=np.int32)
        gt[0, 0] = 1
        oracle = OracleInteraction([gt])
        out = oracle(None, ProbMask.background(4, 4, [1]), [positive(3, 3)])
        assert not out.argmax_labels().any()


class TestRegionGrowInteraction:
    def test_flood_fill_recovers_uniform_square(self):
        frame = np.full((10, 10, 3), 200, dtype=np.uint8)
        frame[2:7, 3:8] = (30, 60, 90)
        grow = RegionGrowInteraction(color_tolerance=24 / 255)
        out = grow(frame, ProbMask.background(10, 10, [1]), [positive(5, 4)])
        expected = np.zeros((10, 10), dtype=bool)
        expected[2:7, 3:8] = True
        assert ((out.argmax_labels() == 1) == expected).all()

    def test_no_clicks_keeps_previous(self):
        frame = np.zeros((4, 4, 3), dtype=np.uint8)
        prev = prob_of(np.eye(4, dtype=np.int32))
        out = RegionGrowInteraction()(frame, prev, [])
        assert (out.argmax_labels() == prev.argmax_labels()).all()

    def test_negative_click_erases_grown_region(self):
        frame = np.full((6, 6, 3), 220, dtype=np.uint8)
        frame[1:4, 1:4] = 10
        grow = RegionGrowInteraction()
        state = grow(frame, ProbMask.background(6, 6, [1]), [positive(2, 2)])
        assert (state.argmax_labels() == 1).any()
        state = grow(frame, state, [negative(2, 2)])
        assert not state.argmax_labels().any()

    def test_requires_frame_pixels(self):
        with pytest.raises(ValueError):
            RegionGrowInteraction()(None, ProbMask.background(2, 2, [1]), [])


class TestCopyNearestPropagator:
    def test_single_memory_entry(self):
        mask = np.zeros((3, 3), dtype=np.int32)
        mask[0, 0] = 1
        out = CopyNearestPropagator()(31, None, [entry(30, mask)])
        assert (out.argmax_labels() == mask).all()

    def test_picks_nearest(self):
        near = np.zeros((2, 2), dtype=np.int32)
        near[0, 0] = 1
        far = np.zeros((2, 2), dtype=np.int32)
        far[1, 1] = 1
        out = CopyNearestPropagator()(23, None, [entry(24, near), entry(27, far), entry(30, far)])
        assert (out.argmax_labels() == near).all()

    def test_tie_goes_to_smaller_index(self):
        lo = np.zeros((2, 2), dtype=np.int32)
        lo[0, 0] = 1
        hi = np.zeros((2, 2), dtype=np.int32)
        hi[1, 1] = 1
        out = CopyNearestPropagator()(30, None, [entry(10, lo), entry(50, hi)])
        assert (out.argmax_labels() == lo).all()

    def test_rejects_empty_memory(self):
        with pytest.raises(ValueError):
            CopyNearestPropagator()(0, None, [])

    def test_returns_copy_not_alias(self):
        mask = np.zeros((2, 2), dtype=np.int32)
        mask[0, 0] = 1
        memory = [entry(0, mask)]
        out = CopyNearestPropagator()(1, None, memory)
        out.probs[1][:] = 0.0
        assert memory[0].mask.probs[1][0, 0] == 1.0


class TestDecayOraclePropagator:
    def _gt(self):
        gt = np.zeros((12, 14), dtype=np.int32)
        gt[3:9, 4:11] = 1
        return [gt.copy() for _ in range(8)]

    def test_adjacent_memory_no_erosion(self):
        gt = self._gt()
        prop = DecayOraclePropagator(gt, [1], decay=0.5)
        out = prop(3, None, [entry(2, gt[2])])
        assert (out.argmax_labels() == gt[3]).all()

    def test_distance_four_erodes_two(self):
        gt = self._gt()
        prop = DecayOraclePropagator(gt, [1], decay=0.5)
        out = prop(6, None, [entry(2, gt[2])])
        expected = brute_erode(gt[6] == 1, 2)
        assert ((out.argmax_labels() == 1) == expected).all()
        assert jaccard(out.argmax_labels() == 1, gt[6] == 1) < 1.0

    def test_zero_decay_exact_everywhere(self):
        gt = self._gt()
        prop = DecayOraclePropagator(gt, [1], decay=0.0)
        out = prop(7, None, [entry(0, gt[0])])
        assert (out.argmax_labels() == gt[7]).all()

    def test_j_non_increasing_with_distance(self):
        gt = self._gt()
        prop = DecayOraclePropagator(gt, [1], decay=1.0)
        scores = []
        for target in range(1, 6):
            out = prop(target, None, [entry(0, gt[0])])
            scores.append(jaccard(out.argmax_labels() == 1, gt[target] == 1))
        assert all(a >= b for a, b in zip(scores, scores[1:]))


class TestDistanceWeightedFusion:
    def _pair(self):
        new = ProbMask(width=2, height=1, probs={1: np.array([[1.0, 0.2]])})
        prev = ProbMask(width=2, height=1, probs={1: np.array([[0.0, 0.8]])})
        return new, prev

    def test_zero_near_distance_returns_new(self):
        new, prev = self._pair()
        out = distance_weighted_fusion(new, prev, 0, 5)
        assert (out.probs[1] == new.probs[1]).all()

    def test_zero_far_distance_returns_prev(self):
        new, prev = self._pair()
        out = distance_weighted_fusion(new, prev, 5, 0)
        assert (out.probs[1] == prev.probs[1]).all()

    def test_equal_distances_average(self):
        new, prev = self._pair()
        out = distance_weighted_fusion(new, prev, 3, 3)
        assert out.probs[1][0, 0] == pytest.approx(0.5)

    def test_convex_combination_bounds(self):
        rng = np.random.RandomState(2)
        for _ in range(200):
            a = rng.rand(4, 5)
            b = rng.rand(4, 5)
            new = ProbMask(width=5, height=4, probs={1: a})
            prev = ProbMask(width=5, height=4, probs={1: b})
            d_near, d_far = rng.randint(0, 9), rng.randint(0, 9)
            if d_near + d_far == 0:
                continue
            out = distance_weighted_fusion(new, prev, d_near, d_far)
            assert (out.probs[1] >= np.minimum(a, b) - 1e-12).all()
            assert (out.probs[1] <= np.maximum(a, b) + 1e-12).all()
            assert (out.probs[1] >= 0).all() and (out.probs[1] <= 1).all()

    def test_dimension_mismatch_rejected(self):
        new = ProbMask.background(2, 2, [1])
        prev = ProbMask.background(3, 2, [1])
        with pytest.raises(ValueError):
            distance_weighted_fusion(new, prev, 1, 1)

    def test_union_of_object_ids(self):
        new = ProbMask(width=1, height=1, probs={1: np.array([[1.0]])})
        prev = ProbMask(width=1, height=1, probs={2: np.array([[1.0]])})
        out = distance_weighted_fusion(new, prev, 1, 1)
        assert out.object_ids == [1, 2]


class TestProbMask:
    def test_outputs_stay_in_unit_interval(self):
        rng = np.random.RandomState(3)
        for _ in range(200):
            gt = random_label_mask(rng, 8, 8, [1, 2])
            prob = ProbMask.from_labels(gt, [1, 2])
            assert all((g >= 0).all() and (g <= 1).all() for g in prob.probs.values())
            labels = prob.argmax_labels()
            assert (labels == gt).all()

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            ProbMask(width=2, height=2, probs={1: np.zeros((3, 3))})

    def test_get_missing_object_is_zero(self):
        prob = ProbMask.background(2, 2, [1])
        assert not prob.get(9).any()
