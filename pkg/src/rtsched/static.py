"""Static benchmark: dual subgradient iteration over exact arrival/channel supports.

Each step solves one max-weight problem per support point with the known
channel scheduler, averages the service over the supports, and moves the
scaled multipliers like a queue fed by the required rates ``lambda_l (1 - p_l)``.
The primal estimate is the average of the per-step service over the last
half of the run.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelKind, ChannelModel
from .errors import CapacityError, InputError
from .scheduling import DEFAULT_SEARCH_NODE_LIMIT, SchedulerConfig, max_weight_schedule_known
from .topology import InterferenceGraph
from .traffic import ArrivalModel, FrameArrivals

log = logging.getLogger(__name__)

DEFAULT_SOLVE_LIMIT = 4096
DEFAULT_ITERATIONS = 10_000
INFEASIBLE_SLOPE = 1e-3


@dataclass(eq=False)
class StaticProblem:
    graph: InterferenceGraph
    arrivals: list[tuple[FrameArrivals, float]]
    channels: list[tuple[np.ndarray, float]]
    cfg: SchedulerConfig
    solve_limit: int = DEFAULT_SOLVE_LIMIT
    node_limit: int = DEFAULT_SEARCH_NODE_LIMIT

    def __post_init__(self):
        for name, sup in (("arrival", self.arrivals), ("channel", self.channels)):
            total = sum(p for _, p in sup)
            if abs(total - 1.0) > 1e-9:
                raise InputError(f"{name} support probabilities sum to {total}, not 1")
        self.channels = [(np.asarray(c, dtype=np.int64), p) for c, p in self.channels]
        self._required = self.arrival_means * (1.0 - self.cfg.p)

    @classmethod
    def from_models(cls, graph: InterferenceGraph, arrivals: ArrivalModel, channel: ChannelModel,
                    cfg: SchedulerConfig, **kw) -> "StaticProblem":
        if channel.kind is not ChannelKind.KNOWN:
            raise InputError("the static benchmark is defined for the known-channel model")
        return cls(graph, arrivals.support(), channel.support(), cfg, **kw)

    @property
    def link_count(self) -> int:
        return self.graph.link_count

    @property
    def arrival_means(self) -> np.ndarray:
        return sum(p * a.totals() for a, p in self.arrivals)

    @property
    def required(self) -> np.ndarray:
        """Minimum service rates ``lambda_l (1 - p_l)``."""
        return self._required


@dataclass
class DualIterate:
    dhat: np.ndarray
    mu: np.ndarray = None
    k: int = 0


def subgradient_step(problem: StaticProblem, it: DualIterate) -> DualIterate:
    n_solves = len(problem.arrivals) * len(problem.channels)
    if n_solves > problem.solve_limit:
        raise CapacityError(f"{n_solves} max-weight solves per step exceeds limit {problem.solve_limit}")
    mu = np.zeros(problem.link_count)
    for a, pa in problem.arrivals:
        if a.is_empty():
            continue
        for c, pc in problem.channels:
            s = max_weight_schedule_known(a, c, it.dhat, problem.cfg, problem.graph, problem.node_limit)
            mu += pa * pc * s.sum(axis=1)
    dhat = np.maximum(it.dhat + problem.required - mu, 0.0)
    return DualIterate(dhat, mu, it.k + 1)


@dataclass
class StaticSolution:
    mu: np.ndarray
    objective: float
    dhat_trajectory: np.ndarray
    mu_trajectory: np.ndarray
    likely_infeasible: bool
    drift_slope: float
    metadata: dict = field(default_factory=dict)


def solve_static(problem: StaticProblem, iterations: int = DEFAULT_ITERATIONS,
                 average_from: int | None = None) -> StaticSolution:
    """Run ``iterations`` subgradient steps from zero multipliers.

    ``average_from`` is the first step included in the primal average
    (default: second half). Instances whose largest multiplier keeps a
    positive linear trend over the second half are flagged as likely
    infeasible.
    """
    if iterations < 1:
        raise InputError("iterations must be at least 1")
    L = problem.link_count
    start = iterations // 2 if average_from is None else average_from
    dhats = np.zeros((iterations + 1, L))
    mus = np.zeros((iterations, L))
    it = DualIterate(np.zeros(L))
    for k in range(iterations):
        it = subgradient_step(problem, it)
        dhats[k + 1] = it.dhat
        mus[k] = it.mu
    mu_bar = mus[start:].mean(axis=0)
    tail = dhats[max(iterations // 2, 1):].max(axis=1)
    slope = float(np.polyfit(np.arange(len(tail)), tail, 1)[0]) if len(tail) > 2 else 0.0
    infeasible = slope > INFEASIBLE_SLOPE
    if infeasible:
        log.warning("multipliers still growing (slope %.3g/step): instance is likely infeasible", slope)
    return StaticSolution(
        mu=mu_bar,
        objective=float(problem.cfg.w @ mu_bar),
        dhat_trajectory=dhats,
        mu_trajectory=mus,
        likely_infeasible=infeasible,
        drift_slope=slope,
        metadata={"averaging": f"primal average over steps {start}..{iterations - 1}",
                  "epsilon": problem.cfg.epsilon, "iterations": iterations},
    )
