"""Frame-based scheduling of deadline-constrained traffic over interfering wireless links."""

from .channel import ChannelGuard, ChannelKind, ChannelModel, ChannelRealization, sample_channel
from .errors import CapacityError, InputError, VisibilityError
from .policy import (expected_utility, greedy_colocated_step, greedy_policy, greedy_schedule,
                     optimal_policy_value, policy_schedule, verify_greedy)
from .scheduling import (SchedulerConfig, deficit_update, delivered_count, max_weight_schedule_known,
                         max_weight_schedule_perframe, served_count, validate_schedule)
from .sim import ExperimentConfig, Metrics, run_frame, run_simulation, sweep_epsilon
from .static import StaticProblem, solve_static, subgradient_step
from .topology import InterferenceGraph, enumerate_activations, is_independent
from .traffic import ArrivalModel, CountDistribution, FrameArrivals, WindowSpec, generate_frame, thin

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
