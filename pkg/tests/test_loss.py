"""Dynamic loss tests: schedules, both loss terms, and the weighted total."""

import math

import numpy as np
import pytest
from conftest import max_rel_err, numeric_grad

from dynaseg.errors import ContractViolationError, DegenerateInputError
from dynaseg.loss import (
    DEFAULT_MU,
    LossBreakdown,
    WeightSchedule,
    continuity_loss,
    schedule_weight,
    similarity_loss,
    total_loss,
)
from dynaseg.model import assign_labels


class TestScheduleWeight:
    def test_scf_example(self):
        assert schedule_weight(WeightSchedule("scf", 50.0), 100) == 0.5

    def test_fsf_example(self):
        w = schedule_weight(WeightSchedule("fsf", 15.0), 100)
        assert abs(w - 100.0 / 15.0) < 1e-15

    def test_fixed_ignores_cluster_count(self):
        schedule = WeightSchedule("fixed", 5.0)
        assert {schedule_weight(schedule, q) for q in (1, 7, 100)} == {5.0}

    def test_monotonicity_laws(self):
        scf = [schedule_weight(WeightSchedule("scf", 50.0), q) for q in range(1, 101)]
        fsf = [schedule_weight(WeightSchedule("fsf", 15.0), q) for q in range(1, 101)]
        fixed = [schedule_weight(WeightSchedule("fixed", 5.0), q) for q in range(1, 101)]
        assert all(a > b for a, b in zip(scf, scf[1:]))
        assert all(a < b for a, b in zip(fsf, fsf[1:]))
        assert len(set(fixed)) == 1

    def test_invalid_cluster_count_rejected(self):
        with pytest.raises(ContractViolationError):
            schedule_weight(WeightSchedule("scf", 50.0), 0)

    def test_invalid_schedule_rejected(self):
        with pytest.raises(ContractViolationError):
            WeightSchedule("linear", 5.0)
        with pytest.raises(ContractViolationError):
            WeightSchedule("fixed", 0.0)

    def test_recommended_defaults(self):
        assert WeightSchedule.of("fixed").mu == 5.0
        assert WeightSchedule.of("fsf").mu == 15.0
        assert WeightSchedule.of("scf").mu == 50.0
        assert WeightSchedule.of("scf", 12.5).mu == 12.5
        assert DEFAULT_MU == {"fixed": 5.0, "fsf": 15.0, "scf": 50.0}


class TestContinuityLoss:
    def test_constant_map_is_zero(self):
        loss, grad = continuity_loss(np.full((3, 4, 4), 2.5))
        assert loss == 0.0
        assert not grad.any()

    def test_single_pair(self):
        loss, _ = continuity_loss(np.array([[[1.0, 4.0]]]))
        assert loss == 3.0

    def test_checkerboard_two_by_two(self):
        loss, _ = continuity_loss(np.array([[[0.0, 1.0], [1.0, 0.0]]]))
        assert loss == 1.0

    def test_enumerated_oracle(self):
        rng = np.random.default_rng(20)
        response = rng.uniform(-1, 1, size=(2, 3, 4))
        loss, _ = continuity_loss(response)
        total, n_terms = 0.0, 0
        q, h, w = response.shape
        for c in range(q):
            for y in range(h):
                for x in range(w):
                    if y + 1 < h:
                        total += abs(response[c, y + 1, x] - response[c, y, x])
                        n_terms += 1
                    if x + 1 < w:
                        total += abs(response[c, y, x + 1] - response[c, y, x])
                        n_terms += 1
        assert n_terms == q * ((h - 1) * w + h * (w - 1))
        assert abs(loss - total / n_terms) < 1e-12

    def test_nonnegative_and_zero_only_when_constant(self):
        rng = np.random.default_rng(21)
        for _ in range(10):
            response = rng.uniform(-1, 1, size=(2, 3, 3))
            loss, _ = continuity_loss(response)
            assert loss > 0.0

    def test_grad_matches_finite_differences(self):
        rng = np.random.default_rng(22)
        response = rng.uniform(-1, 1, size=(3, 4, 5))

        def f():
            return continuity_loss(response)[0]

        _, grad = continuity_loss(response)
        assert max_rel_err(grad, numeric_grad(f, response)) < 1e-4

    def test_single_pixel_rejected(self):
        with pytest.raises(DegenerateInputError):
            continuity_loss(np.zeros((2, 1, 1)))

    def test_single_row_accepted(self):
        loss, _ = continuity_loss(np.array([[[0.0, 1.0, 3.0]]]))
        assert loss == 1.5


class TestSimilarityLoss:
    def test_uniform_response_is_log_q(self):
        response = np.zeros((100, 3, 3))
        loss, _ = similarity_loss(response, np.zeros((3, 3), dtype=np.int64))
        assert abs(loss - math.log(100)) < 1e-9

    def test_matches_scalar_cross_entropy_case(self):
        logits = np.array([1.0, 0.0]).reshape(2, 1, 1)
        loss, _ = similarity_loss(logits, np.zeros((1, 1), dtype=np.int64))
        assert abs(loss - math.log(1 + math.exp(-1))) < 1e-12

    def test_argmax_labels_minimize_loss(self):
        rng = np.random.default_rng(23)
        response = rng.normal(size=(4, 3, 3))
        own_labels = assign_labels(response)
        own_loss, _ = similarity_loss(response, own_labels)
        for _ in range(20):
            other = rng.integers(0, 4, size=(3, 3))
            other_loss, _ = similarity_loss(response, other)
            assert own_loss <= other_loss + 1e-12


class TestTotalLoss:
    def test_vanishing_mu_leaves_similarity_only(self):
        rng = np.random.default_rng(24)
        response = rng.normal(size=(3, 4, 4))
        labels = assign_labels(response)
        schedule = WeightSchedule("fixed", 5e-324)  # smallest positive float
        breakdown, _ = total_loss(response, labels, schedule, 3)
        assert breakdown.total == breakdown.similarity

    def test_constant_response_total_equals_similarity(self):
        response = np.ones((4, 3, 3))
        labels = assign_labels(response)
        for kind in ("fixed", "fsf", "scf"):
            breakdown, _ = total_loss(response, labels, WeightSchedule.of(kind), 1)
            assert breakdown.continuity == 0.0
            assert breakdown.total == breakdown.similarity

    def test_scf_weight_doubles_when_clusters_halve(self):
        rng = np.random.default_rng(25)
        response = rng.normal(size=(4, 4, 4))
        labels = assign_labels(response)
        schedule = WeightSchedule("scf", 50.0)
        b100, _ = total_loss(response, labels, schedule, 100)
        b50, _ = total_loss(response, labels, schedule, 50)
        assert b100.effective_weight == 0.5
        assert b50.effective_weight == 1.0
        assert b100.similarity == b50.similarity
        assert b100.continuity == b50.continuity

    def test_breakdown_identity(self):
        rng = np.random.default_rng(26)
        for kind in ("fixed", "fsf", "scf"):
            response = rng.normal(size=(5, 4, 4))
            labels = assign_labels(response)
            breakdown, _ = total_loss(response, labels, WeightSchedule.of(kind), 7)
            recomposed = breakdown.similarity + breakdown.effective_weight * breakdown.continuity
            assert abs(breakdown.total - recomposed) <= 1e-12 * abs(breakdown.total)

    def test_grad_matches_finite_differences(self):
        rng = np.random.default_rng(27)
        response = rng.uniform(-1, 1, size=(4, 4, 4))
        labels = rng.integers(0, 4, size=(4, 4))
        schedule = WeightSchedule("fsf", 15.0)

        def f():
            return total_loss(response, labels, schedule, 4)[0].total

        _, grad = total_loss(response, labels, schedule, 4)
        assert max_rel_err(grad, numeric_grad(f, response)) < 1e-4

    def test_breakdown_is_a_plain_record(self):
        breakdown = LossBreakdown(total=1.0, similarity=0.6,
                                  continuity=0.2, effective_weight=2.0)
        assert breakdown.total == breakdown.similarity + \
            breakdown.effective_weight * breakdown.continuity
