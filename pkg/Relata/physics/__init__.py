from .relativity import (
    ExperimentClass,
    FrameVelocity,
    ImpactClass,
    ImpactContext,
    SpacetimeEvent,
    classify_experiment,
    classify_impact,
    time_difference_in_frame,
)
from .correlations import (
    JointDistribution,
    ad_joint_distribution,
    bell_state,
    local_joint_distribution,
    oracle_joint_distribution,
    qm_joint_distribution,
)
from .statistics import ChshResult, ChshSettings, CorrelationEstimate, chsh, estimate_correlation
from .feasibility import FeasibilityQuery, max_delay, required_velocity, sweep

__all__ = [
    'ExperimentClass', 'FrameVelocity', 'ImpactClass', 'ImpactContext', 'SpacetimeEvent',
    'classify_experiment', 'classify_impact', 'time_difference_in_frame',
    'JointDistribution', 'ad_joint_distribution', 'bell_state', 'local_joint_distribution',
    'oracle_joint_distribution', 'qm_joint_distribution',
    'ChshResult', 'ChshSettings', 'CorrelationEstimate', 'chsh', 'estimate_correlation',
    'FeasibilityQuery', 'max_delay', 'required_velocity', 'sweep',
]
