import math

import numpy as np
import pytest

from Relata.exceptions import InvalidStateError, UnsupportedConfigurationError
from Relata.experiment import AngleSettings, Flag, NonBeforePolicy
from Relata.physics.correlations import (
    JointDistribution,
    ad_joint_distribution,
    apply_wave_plates,
    bell_state,
    correlation,
    local_joint_distribution,
    mixture_joint_distribution,
    oracle_joint_distribution,
    qm_joint_distribution,
    qm_model_distribution,
)
from Relata.physics.relativity import ExperimentClass, ImpactClass

B, A, D = ImpactClass.BEFORE, ImpactClass.NON_BEFORE, ImpactClass.DISTINGUISHABLE
QUARTER = math.pi / 4
GRID = np.linspace(0.0, math.pi, 181, endpoint=False)


def angles(alpha, beta):
    return AngleSettings(alpha, beta)


def assert_distribution(dist, expected, abs_tol=1e-12):
    assert dist.as_array() == pytest.approx(np.asarray(expected, dtype=float), abs=abs_tol)


class TestBellState:
    def test_normalized(self):
        state = bell_state()
        assert np.vdot(state, state).real == pytest.approx(1.0, abs=1e-12)

    def test_amplitudes(self):
        state = bell_state()
        assert state[1] == 0
        assert state[2] == 0
        assert state[3].real == pytest.approx(-1 / math.sqrt(2))


class TestWavePlates:
    def test_identity_rotation(self):
        np.testing.assert_allclose(apply_wave_plates(bell_state(), angles(0.0, 0.0)), bell_state(), atol=1e-12)

    def test_quarter_turn_on_both_sides_flips_global_sign(self):
        rotated = apply_wave_plates(bell_state(), angles(math.pi / 2, math.pi / 2))
        np.testing.assert_allclose(rotated, -bell_state(), atol=1e-12)

    def test_half_turn_negates_side_one(self):
        state = np.array([0.5, 0.5, 0.5, 0.5], dtype=complex)
        np.testing.assert_allclose(apply_wave_plates(state, angles(math.pi, 0.0)), -state, atol=1e-12)

    def test_rejects_unnormalized_state(self):
        with pytest.raises(InvalidStateError):
            oracle_joint_distribution(np.array([1, 1, 0, 0], dtype=complex), angles(0.0, 0.0))


class TestOracle:
    def test_zero_angles_perfect_correlation(self):
        assert_distribution(oracle_joint_distribution(bell_state(), angles(0.0, 0.0)), [0.5, 0, 0, 0.5])

    def test_pi_over_eight_each_is_uniform(self):
        dist = oracle_joint_distribution(bell_state(), angles(math.pi / 8, math.pi / 8))
        assert_distribution(dist, [0.25] * 4)
        assert correlation(dist) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("alpha", [0.1, 0.7, 1.3, 2.9])
    def test_opposite_angles_perfect_correlation(self, alpha):
        dist = oracle_joint_distribution(bell_state(), angles(alpha, -alpha))
        assert dist[(1, 1)] == pytest.approx(0.5, abs=1e-12)
        assert dist[(-1, -1)] == pytest.approx(0.5, abs=1e-12)


class TestClosedForms:
    def test_qm_opposite_quarter_turns(self):
        dist = qm_joint_distribution(angles(QUARTER, -QUARTER))
        assert correlation(dist) == 1.0
        assert_distribution(dist, [0.5, 0, 0, 0.5])

    def test_qm_orthogonal(self):
        assert_distribution(qm_joint_distribution(angles(QUARTER, 0.0)), [0.25] * 4)

    def test_qm_anticorrelated(self):
        dist = qm_joint_distribution(angles(math.pi / 2, 0.0))
        assert correlation(dist) == pytest.approx(-1.0, abs=1e-12)
        assert_distribution(dist, [0, 0.5, 0.5, 0])

    def test_local_opposite_quarter_turns_is_uniform(self):
        dist = local_joint_distribution(angles(QUARTER, -QUARTER))
        assert_distribution(dist, [0.25] * 4)

    def test_local_zero_angles(self):
        assert correlation(local_joint_distribution(angles(0.0, 0.0))) == 1.0

    def test_local_pi_over_eight(self):
        dist = local_joint_distribution(angles(math.pi / 8, math.pi / 8))
        assert correlation(dist) == pytest.approx(0.5, abs=1e-12)

    def test_qm_matches_state_vector_oracle_on_grid(self):
        state = bell_state()
        for alpha in GRID:
            for beta in GRID[::10]:
                settings = angles(float(alpha), float(beta))
                assert_distribution(qm_joint_distribution(settings),
                                    oracle_joint_distribution(state, settings).as_array())

    def test_local_matches_mixture_oracle_on_grid(self):
        for alpha in GRID:
            for beta in GRID[::10]:
                settings = angles(float(alpha), float(beta))
                assert_distribution(local_joint_distribution(settings),
                                    mixture_joint_distribution(settings).as_array())

    def test_correlation_closed_forms_on_grid(self):
        for alpha in GRID[::5]:
            for beta in GRID[::5]:
                settings = angles(float(alpha), float(beta))
                assert correlation(qm_joint_distribution(settings)) == pytest.approx(
                    math.cos(2 * (alpha + beta)), abs=1e-12)
                assert correlation(local_joint_distribution(settings)) == pytest.approx(
                    math.cos(2 * alpha) * math.cos(2 * beta), abs=1e-12)

    @pytest.mark.parametrize("build", [qm_joint_distribution, local_joint_distribution])
    def test_marginals_are_one_half(self, build):
        for alpha in GRID[::7]:
            for beta in GRID[::7]:
                side1, side2 = build(angles(float(alpha), float(beta))).marginals()
                assert side1 == pytest.approx(0.5, abs=1e-12)
                assert side2 == pytest.approx(0.5, abs=1e-12)

    @pytest.mark.parametrize("build", [qm_joint_distribution, local_joint_distribution])
    def test_symmetries(self, build):
        for alpha, beta in ((0.3, 1.1), (2.0, -0.4), (-1.2, 0.9)):
            base = build(angles(alpha, beta)).as_array()
            swapped = build(angles(alpha, beta).swapped()).as_array()
            # swapping sides exchanges the +- and -+ entries
            assert swapped[[0, 2, 1, 3]] == pytest.approx(base, abs=1e-12)
            assert build(angles(alpha + math.pi, beta)).as_array() == pytest.approx(base, abs=1e-12)

    def test_cumulative_ends_at_one(self):
        cumulative = qm_joint_distribution(angles(0.37, 1.21)).cumulative()
        assert cumulative[-1] == 1.0
        assert np.all(np.diff(cumulative) >= 0)


class TestModelSelection:
    def test_qm_uses_local_form_for_distinguishable_impacts(self):
        settings = angles(QUARTER, -QUARTER)
        assert qm_model_distribution((Flag.U, Flag.U), settings) == qm_joint_distribution(settings)
        assert qm_model_distribution((Flag.U, Flag.D), settings) == local_joint_distribution(settings)

    def test_before_nonbefore_is_entangled(self):
        dist = ad_joint_distribution(ExperimentClass(B, A), angles(QUARTER, -QUARTER))
        assert correlation(dist) == 1.0

    def test_before_before_is_uniform(self):
        dist = ad_joint_distribution(ExperimentClass(B, B), angles(QUARTER, -QUARTER))
        assert_distribution(dist, [0.25] * 4)

    def test_distinguishable_uses_local_form(self):
        settings = angles(0.3, 0.8)
        assert ad_joint_distribution(ExperimentClass(D, B), settings) == local_joint_distribution(settings)

    def test_reduces_to_qm_for_every_before_nonbefore_class(self):
        for alpha in GRID[::9]:
            settings = angles(float(alpha), 0.4)
            for cls in (ExperimentClass(B, A), ExperimentClass(A, B)):
                assert ad_joint_distribution(cls, settings) == qm_joint_distribution(settings)

    def test_nonbefore_nonbefore_errors_by_default(self):
        with pytest.raises(UnsupportedConfigurationError, match="NonBefore, NonBefore"):
            ad_joint_distribution(ExperimentClass(A, A), angles(0.0, 0.0))

    @pytest.mark.parametrize("policy, build", [
        (NonBeforePolicy.TREAT_AS_QM, qm_joint_distribution),
        (NonBeforePolicy.TREAT_AS_LOCAL, local_joint_distribution),
    ])
    def test_nonbefore_nonbefore_policies(self, policy, build):
        settings = angles(0.2, 0.5)
        assert ad_joint_distribution(ExperimentClass(A, A), settings, policy) == build(settings)


def test_joint_distribution_indexing():
    dist = JointDistribution(0.1, 0.2, 0.3, 0.4)
    assert dist[(1, -1)] == pytest.approx(0.2)
    assert dist.as_dict() == {"++": 0.1, "+-": 0.2, "-+": 0.3, "--": 0.4}
    assert list(dist) == [0.1, 0.2, 0.3, 0.4]
