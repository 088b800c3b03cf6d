from .config import config_to_dict, parse_config
from .rng import TrialStream
from .trial_runner import SimulationResult, TrialRunner, build_impact_contexts, run_trials
from .scan import AngleGrid, run_scan


__all__ = ['parse_config', 'config_to_dict', 'TrialStream', 'TrialRunner', 'SimulationResult',
           'build_impact_contexts', 'run_trials', 'AngleGrid', 'run_scan']
