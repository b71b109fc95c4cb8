"""Grid-world maximum-entropy IRL for trajectory interpolation and generation."""

from .grid import ACTIONS, GridSpec, State, Trajectory, discretize, project_trajectory, successor
from .planner import BackupOperator, GaussianKernel, Policy, ValueArtifacts, backward_pass, convolve_v, make_policy
from .reward import FeatureMap, Theta, dist_p, state_reward, transition_reward
from .visitation import VisitationField, forward_pass
from .training import TrainConfig, TrainingSet, TrainReport, train
from .generate import GapQuery, GeneratedPath, interpolate_gap, rollout_deterministic, rollout_stochastic
from .metrics import evaluate_interpolations, mhd
from .experiment import MethodVariant, method_variant

__version__ = "0.1.0"

__all__ = [
    "ACTIONS",
    "BackupOperator",
    "FeatureMap",
    "GapQuery",
    "GaussianKernel",
    "GeneratedPath",
    "GridSpec",
    "MethodVariant",
    "Policy",
    "State",
    "Theta",
    "TrainConfig",
    "TrainReport",
    "TrainingSet",
    "Trajectory",
    "ValueArtifacts",
    "VisitationField",
    "backward_pass",
    "convolve_v",
    "discretize",
    "dist_p",
    "evaluate_interpolations",
    "forward_pass",
    "interpolate_gap",
    "make_policy",
    "method_variant",
    "mhd",
    "project_trajectory",
    "rollout_deterministic",
    "rollout_stochastic",
    "state_reward",
    "successor",
    "train",
    "transition_reward",
]
