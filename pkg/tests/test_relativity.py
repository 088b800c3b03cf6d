import math

import numpy as np
import pytest

from Relata.constants import C
from Relata.exceptions import InvalidInputError, InvalidVelocityError
from Relata.experiment import Flag
from Relata.physics.feasibility import max_delay
from Relata.physics.relativity import (
    ExperimentClass,
    FrameVelocity,
    ImpactClass,
    ImpactContext,
    SpacetimeEvent,
    classify_experiment,
    classify_experiment_arrays,
    classify_impact,
    is_spacelike,
    threshold_velocity,
    time_difference_in_frame,
)

B, A, D = ImpactClass.BEFORE, ImpactClass.NON_BEFORE, ImpactClass.DISTINGUISHABLE
REST = FrameVelocity.at_rest()


def ctx(t, x, v=0.0, flag=Flag.U):
    return ImpactContext(SpacetimeEvent(t, x), FrameVelocity(v), flag)


def boost_oracle(event, v):
    """Full four-vector boost of one event; used only to cross-check the difference form."""
    gamma = 1.0 / math.sqrt(1.0 - (v / C) ** 2)
    return gamma * (event.t - v * event.x / C ** 2)


class TestFrameVelocity:
    def test_gamma_is_one_at_rest(self):
        assert REST.gamma == 1.0

    def test_gamma_above_one_when_moving(self):
        assert FrameVelocity(1e8).gamma > 1.0

    @pytest.mark.parametrize("v", [C, -C, 3e8])
    def test_rejects_luminal_velocity(self, v):
        with pytest.raises(InvalidVelocityError, match="299792458"):
            FrameVelocity(v)

    def test_rejects_nan(self):
        with pytest.raises(InvalidInputError):
            FrameVelocity(float("nan"))


class TestTimeDifferenceInFrame:
    def test_rest_frame_keeps_lab_ordering(self):
        assert time_difference_in_frame(SpacetimeEvent(0, 0), SpacetimeEvent(1e-9, 0), REST) == pytest.approx(-1e-9)

    def test_positive_when_first_event_is_later(self):
        assert time_difference_in_frame(SpacetimeEvent(5e-12, 0), SpacetimeEvent(0, 0), REST) == pytest.approx(5e-12)

    def test_moving_frame(self):
        e_i, e_j = SpacetimeEvent(0.0, -2000.0), SpacetimeEvent(4e-12, 2000.0)
        frame = FrameVelocity(100.0)
        result = time_difference_in_frame(e_i, e_j, frame)
        assert result == pytest.approx(4.506e-13, rel=1e-3)
        assert time_difference_in_frame(e_j, e_i, frame) == pytest.approx(-4.506e-13, rel=1e-3)

    def test_matches_full_boost(self):
        e_i, e_j = SpacetimeEvent(1e-5, -2000.0), SpacetimeEvent(1e-5 + 4e-12, 2000.0)
        v = 1e6
        expected = boost_oracle(e_i, v) - boost_oracle(e_j, v)
        assert time_difference_in_frame(e_i, e_j, FrameVelocity(v)) == pytest.approx(expected, rel=1e-6)

    def test_antisymmetric(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            t1, t2 = rng.normal(0, 1e-9, 2)
            x1, x2 = rng.normal(0, 1e3, 2)
            frame = FrameVelocity(float(rng.uniform(-1e5, 1e5)))
            e1, e2 = SpacetimeEvent(t1, x1), SpacetimeEvent(t2, x2)
            assert time_difference_in_frame(e1, e2, frame) == -time_difference_in_frame(e2, e1, frame)

    def test_rejects_non_finite_event(self):
        with pytest.raises(InvalidInputError):
            SpacetimeEvent(float("inf"), 0.0)


class TestClassifyImpact:
    def test_distinguishable_partner_makes_before(self):
        assert classify_impact(ctx(1.0, 0.0), ctx(0.0, 0.0, flag=Flag.D)) is B

    def test_own_d_flag_is_distinguishable(self):
        assert classify_impact(ctx(0.0, 0.0, flag=Flag.D), ctx(1.0, 0.0)) is D

    def test_rest_frame_sees_lab_ordering(self):
        assert classify_impact(ctx(0.0, -2000.0), ctx(4e-12, 2000.0, v=100.0)) is B

    def test_moving_frame_reverses_ordering(self):
        assert classify_impact(ctx(4e-12, 2000.0, v=100.0), ctx(0.0, -2000.0)) is B

    def test_partner_d_ignores_times(self):
        me = ctx(0.0, 0.0)
        for t in (-1.0, 0.0, 1.0):
            assert classify_impact(me, ctx(t, 5.0, flag=Flag.D)) is B

    def test_tolerance_widens_non_before(self):
        me, other = ctx(0.0, 0.0), ctx(1e-15, 0.0)
        assert classify_impact(me, other, tie_tolerance=0.0) is B
        assert classify_impact(me, other, tie_tolerance=1e-14) is A

    def test_rejects_negative_tolerance(self):
        with pytest.raises(InvalidInputError):
            classify_impact(ctx(0.0, 0.0), ctx(1.0, 0.0), tie_tolerance=-1.0)


class TestClassifyExperiment:
    def test_shared_rest_frame(self):
        assert classify_experiment(ctx(0.0, -1.0), ctx(1e-9, 1.0)) == (B, A)

    def test_exact_tie_is_non_before_on_both_sides(self):
        assert classify_experiment(ctx(1e-9, -1.0), ctx(1e-9, 1.0)) == (A, A)

    def test_before_before(self):
        assert classify_experiment(ctx(0.0, -2000.0), ctx(4e-12, 2000.0, v=100.0)) == (B, B)

    def test_equality_at_bound_is_non_before(self):
        V, L = 100.0, 4000.0
        delta = max_delay(V, L)
        first, second = classify_experiment(ctx(0.0, -L / 2), ctx(delta, L / 2, v=V))
        assert first is B
        assert second is A

    def test_shared_frame_never_before_before(self):
        rng = np.random.default_rng(11)
        for _ in range(500):
            v = float(rng.uniform(-1e7, 1e7))
            t1, t2 = rng.normal(0, 1e-8, 2)
            x1, x2 = rng.normal(0, 1e3, 2)
            assert classify_experiment(ctx(t1, x1, v), ctx(t2, x2, v)) != (B, B)

    def test_translation_invariance(self):
        first, second = ctx(0.0, -2000.0), ctx(4e-12, 2000.0, v=100.0)
        expected = classify_experiment(first, second)
        for dt, dx in ((1e-6, 0.0), (0.0, 1234.5), (-3e-7, -50.0)):
            moved = (
                ImpactContext(first.event.shifted(dt, dx), first.frame),
                ImpactContext(second.event.shifted(dt, dx), second.frame),
            )
            assert classify_experiment(*moved) == expected

    def test_threshold_flips_once(self):
        dt, dx = 4e-12, 4000.0
        threshold = threshold_velocity(dt, dx)
        assert threshold == pytest.approx(89.88, rel=1e-3)
        velocities = np.linspace(50.0, 150.0, 201)
        classes = [classify_impact(ctx(dt, dx / 2, v=float(v)), ctx(0.0, -dx / 2)) for v in velocities]
        flips = sum(1 for a, b in zip(classes, classes[1:]) if a is not b)
        assert flips == 1
        assert all((c is B) == (v > threshold) for c, v in zip(classes, velocities))


class TestExperimentClass:
    def test_str_and_key(self):
        assert str(ExperimentClass(B, A)) == "(Before, NonBefore)"
        assert ExperimentClass(B, A).key == "Before,NonBefore"

    def test_code_round_trip(self):
        for code in range(9):
            assert ExperimentClass.from_code(code).code == code

    def test_before_nonbefore_either_order(self):
        assert ExperimentClass(B, A).is_before_nonbefore
        assert ExperimentClass(A, B).is_before_nonbefore
        assert not ExperimentClass(B, B).is_before_nonbefore

    def test_labels(self):
        assert [c.label for c in ImpactClass] == ["b", "a", "d"]


def test_vectorized_matches_scalar():
    rng = np.random.default_rng(5)
    t1 = rng.normal(2000 / C, 5e-12, 1000)
    t2 = rng.normal(2000 / C, 5e-12, 1000)
    first, second = classify_experiment_arrays(t1, -2000.0, 0.0, Flag.U, t2, 2000.0, 100.0, Flag.U)
    for i in range(len(t1)):
        expected = classify_experiment(ctx(t1[i], -2000.0), ctx(t2[i], 2000.0, v=100.0))
        assert (first[i], second[i]) == tuple(expected)


def test_vectorized_distinguishable_flags():
    t = np.zeros(3)
    first, second = classify_experiment_arrays(t, -1.0, 0.0, Flag.D, t, 1.0, 0.0, Flag.U)
    assert first.tolist() == [D] * 3
    assert second.tolist() == [B] * 3


def test_spacelike():
    assert is_spacelike(SpacetimeEvent(0.0, -2000.0), SpacetimeEvent(4e-12, 2000.0))
    assert not is_spacelike(SpacetimeEvent(0.0, 0.0), SpacetimeEvent(1.0, 1.0))
