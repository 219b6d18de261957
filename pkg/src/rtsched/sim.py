"""Frame-by-frame simulation of the online deficit-counter schedulers."""

from __future__ import annotations

import csv
import dataclasses
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channel import ChannelGuard, ChannelKind, ChannelModel, sample_channel
from .errors import InputError
from .policy import DEFAULT_DP_STATE_LIMIT, greedy_schedule, optimal_policy_value, policy_schedule
from .scheduling import (DEFAULT_SEARCH_NODE_LIMIT, SchedulerConfig, deficit_update, delivered_count,
                         max_weight_schedule_known, max_weight_schedule_perframe, served_count)
from .static import StaticProblem, solve_static
from .topology import InterferenceGraph
from .traffic import ArrivalModel, FrameArrivals, generate_frame, thin_all

log = logging.getLogger(__name__)

POLICIES = ("auto", "max_weight", "per_slot_dp", "greedy_colocated")
N_BATCHES = 20


@dataclass
class ExperimentConfig:
    graph: InterferenceGraph
    arrivals: ArrivalModel
    channel: ChannelModel
    scheduler: SchedulerConfig
    policy: str = "auto"
    frames: int = 100_000
    seed: int = 0
    perframe_deficit: str = "attempts"
    search_node_limit: int = DEFAULT_SEARCH_NODE_LIMIT
    dp_state_limit: int = DEFAULT_DP_STATE_LIMIT
    trajectory_stride: int = 100
    out_dir: str | None = None
    name: str = "experiment"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        n = self.graph.link_count
        if not (self.arrivals.link_count == self.channel.link_count == self.scheduler.link_count == n):
            raise InputError("graph, arrivals, channel and scheduler weights must cover the same links")
        if self.policy not in POLICIES:
            raise InputError(f"unknown scheduler {self.policy!r}; choose from {POLICIES}")
        if self.perframe_deficit not in ("attempts", "successes"):
            raise InputError("perframe_deficit must be 'attempts' or 'successes'")
        kind = self.channel.kind
        if self.policy == "max_weight" and kind is ChannelKind.PER_SLOT:
            raise InputError("per-slot feedback needs scheduler 'per_slot_dp' or 'greedy_colocated'")
        if self.policy in ("per_slot_dp", "greedy_colocated") and kind is not ChannelKind.PER_SLOT:
            raise InputError(f"scheduler {self.policy!r} needs a per-slot feedback channel")
        if self.policy == "greedy_colocated":
            if not self.graph.is_colocated:
                raise InputError("greedy_colocated needs a colocated (complete) interference graph")
            T = self.arrivals.frame_length
            if any(len(s) != 1 or s[0].slot != 0 or s[0].deadline != T - 1 for s in self.arrivals.links):
                raise InputError("greedy_colocated needs frame-start arrivals with deadline T")
        if self.frames < 0:
            raise InputError("frames must be nonnegative")

    @property
    def resolved_policy(self) -> str:
        if self.policy != "auto":
            return self.policy
        return "per_slot_dp" if self.channel.kind is ChannelKind.PER_SLOT else "max_weight"

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


@dataclass
class SimState:
    deficits: np.ndarray
    frame: int
    rng_arrivals: np.random.Generator
    rng_channel: np.random.Generator
    rng_thinning: np.random.Generator

    @classmethod
    def initial(cls, config: ExperimentConfig) -> "SimState":
        # Separate substreams keep traffic identical across scheduler choices.
        ss = np.random.SeedSequence(config.seed)
        ra, rc, rt = (np.random.default_rng(s) for s in ss.spawn(3))
        return cls(np.zeros(config.graph.link_count), 0, ra, rc, rt)


@dataclass
class FrameRecord:
    frame: int
    arrivals: FrameArrivals
    schedule: np.ndarray
    arrived: np.ndarray
    thinned: np.ndarray
    served: np.ndarray
    delivered: np.ndarray
    deficits: np.ndarray


def decide(config: ExperimentConfig, a: FrameArrivals, guard: ChannelGuard, d: np.ndarray) -> np.ndarray:
    """Scheduler decision for one frame; the channel is seen only through ``guard``."""
    g, sc = config.graph, config.scheduler
    kind = config.channel.kind
    if kind is ChannelKind.KNOWN:
        return max_weight_schedule_known(a, guard.rates(), d, sc, g, config.search_node_limit)
    cbar = config.channel.mean_rates()
    if kind is ChannelKind.PER_FRAME:
        return max_weight_schedule_perframe(a, d, sc, cbar, g, config.search_node_limit)
    if config.resolved_policy == "greedy_colocated":
        return greedy_schedule(a, d, sc, cbar, guard, g)
    table = optimal_policy_value(a, d, sc, cbar, g, config.dp_state_limit)
    return policy_schedule(table, a, guard, g)


def run_frame(state: SimState, config: ExperimentConfig) -> tuple[SimState, FrameRecord]:
    """Arrivals, channel, decision, service, thinning, deficit update: one frame."""
    T = config.arrivals.frame_length
    a = generate_frame(config.arrivals, state.rng_arrivals)
    c = sample_channel(config.channel, T, state.rng_channel)
    arrived = a.totals()
    if a.is_empty():
        s = np.zeros((config.graph.link_count, T), dtype=np.int64)
    else:
        s = decide(config, a, ChannelGuard(c), state.deficits)
    served = served_count(s, c, config.channel.kind, config.perframe_deficit)
    delivered = delivered_count(s, c)
    thinned = thin_all(arrived, config.scheduler.p, state.rng_thinning)
    state.deficits = deficit_update(state.deficits, thinned, served)
    state.frame += 1
    return state, FrameRecord(state.frame, a, s, arrived, thinned, served, delivered, state.deficits)


def _batch_stderr(x: np.ndarray, n_batches: int = N_BATCHES) -> float:
    """Standard error of the mean of a correlated series by batch means."""
    if len(x) < 2 * n_batches:
        return float(np.std(x) / np.sqrt(max(len(x), 1))) if len(x) else 0.0
    batches = np.array_split(x, n_batches)
    means = np.array([b.mean() for b in batches])
    return float(means.std(ddof=1) / np.sqrt(n_batches))


def drift_slope(series: np.ndarray) -> float:
    """Least-squares slope of a series per sample (0 for fewer than 3 points)."""
    if len(series) < 3:
        return 0.0
    return float(np.polyfit(np.arange(len(series)), series, 1)[0])


@dataclass
class Metrics:
    """Per-link and global statistics of one run of ``frames`` frames.

    Steady-state quantities (``steady_*``, ``objective_stderr``) use the
    second half of the run.
    """

    frames: int
    w: np.ndarray
    arrivals: np.ndarray
    delivered: np.ndarray
    served: np.ndarray
    thinned: np.ndarray
    avg_deficit: np.ndarray
    steady_deficit: np.ndarray
    steady_service: np.ndarray
    objective_stderr: float
    service_stderr: np.ndarray
    deficit_slope: float
    trajectory_frames: np.ndarray
    deficit_trajectory: np.ndarray
    lyapunov: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def link_count(self) -> int:
        return len(self.w)

    @property
    def avg_service(self) -> np.ndarray:
        return self.delivered / self.frames if self.frames else np.zeros(self.link_count)

    @property
    def drop_probability(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            drop = 1.0 - self.delivered / self.arrivals
        return np.where(self.arrivals > 0, drop, 0.0)

    @property
    def objective(self) -> float:
        return float(self.w @ self.avg_service)

    @property
    def steady_objective(self) -> float:
        return float(self.w @ self.steady_service)

    @property
    def steady_deficit_sum(self) -> float:
        return float(self.steady_deficit.sum())

    def summary_rows(self) -> list[dict]:
        rows = []
        for l in range(self.link_count):
            rows.append({
                "link": l + 1,
                "arrivals": int(self.arrivals[l]),
                "delivered": int(self.delivered[l]),
                "deficit_credit": int(self.served[l]),
                "avg_service": float(self.avg_service[l]),
                "drop_probability": float(self.drop_probability[l]),
                "avg_deficit": float(self.avg_deficit[l]),
                "steady_deficit": float(self.steady_deficit[l]),
            })
        return rows

    def summary_text(self) -> str:
        lines = [f"{self.meta.get('name', 'run')}: {self.frames} frames, "
                 f"channel={self.meta.get('channel')}, scheduler={self.meta.get('policy')}",
                 f"objective {self.objective:.6f} (steady {self.steady_objective:.6f} "
                 f"+/- {self.objective_stderr:.2g}), steady total deficit {self.steady_deficit_sum:.4f}"]
        for r in self.summary_rows():
            lines.append(f"  link {r['link']:>2}: service {r['avg_service']:.4f}  "
                         f"drop {r['drop_probability']:.4f}  deficit {r['avg_deficit']:.3f}")
        return "\n".join(lines)

    def write(self, out_dir: str | Path, stem: str = "run") -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        rows = self.summary_rows()
        with open(out / f"{stem}_links.csv", "w", newline="") as fh:
            wr = csv.DictWriter(fh, fieldnames=list(rows[0]) if rows else ["link"])
            wr.writeheader()
            wr.writerows(rows)
        with open(out / f"{stem}_trajectory.csv", "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["frame"] + [f"d{l + 1}" for l in range(self.link_count)] + ["lyapunov"])
            for k, d, v in zip(self.trajectory_frames, self.deficit_trajectory, self.lyapunov):
                wr.writerow([int(k)] + [f"{x:.6g}" for x in d] + [f"{v:.6g}"])
        (out / f"{stem}_summary.txt").write_text(self.summary_text() + "\n")


def run_simulation(config: ExperimentConfig) -> Metrics:
    """Run ``config.frames`` frames from zero deficits; same config and seed, same Metrics."""
    L, K = config.graph.link_count, config.frames
    state = SimState.initial(config)
    deficits = np.zeros((K, L))
    delivered = np.zeros((K, L), dtype=np.int64)
    arrived = np.zeros(L, dtype=np.int64)
    served = np.zeros(L, dtype=np.int64)
    thinned = np.zeros(L, dtype=np.int64)
    for k in range(K):
        state, rec = run_frame(state, config)
        deficits[k] = rec.deficits
        delivered[k] = rec.delivered
        arrived += rec.arrived
        served += rec.served
        thinned += rec.thinned
    half = K // 2
    tail_deliv = delivered[half:]
    w = config.scheduler.w
    stride = max(1, config.trajectory_stride)
    idx = np.arange(stride - 1, K, stride)
    traj = deficits[idx]
    total_def = deficits[half:].sum(axis=1)
    return Metrics(
        frames=K,
        w=w.copy(),
        arrivals=arrived,
        delivered=delivered.sum(axis=0),
        served=served,
        thinned=thinned,
        avg_deficit=deficits.mean(axis=0) if K else np.zeros(L),
        steady_deficit=deficits[half:].mean(axis=0) if K else np.zeros(L),
        steady_service=tail_deliv.mean(axis=0) if K else np.zeros(L),
        objective_stderr=_batch_stderr(tail_deliv @ w),
        service_stderr=np.array([_batch_stderr(tail_deliv[:, l]) for l in range(L)]),
        deficit_slope=drift_slope(total_def),
        trajectory_frames=idx + 1,
        deficit_trajectory=traj,
        lyapunov=0.5 * (traj ** 2).sum(axis=1),
        meta={"name": config.name, "channel": config.channel.kind.value,
              "policy": config.resolved_policy, "perframe_deficit": config.perframe_deficit,
              "seed": config.seed, "epsilon": config.scheduler.epsilon},
    )


def static_benchmark(config: ExperimentConfig, epsilon: float = 0.1, iterations: int = 10_000):
    """Solve the static problem for a known-channel config (independent of the online epsilon)."""
    sc = config.scheduler
    cfg = SchedulerConfig(sc.w, epsilon, sc.p)
    problem = StaticProblem.from_models(config.graph, config.arrivals, config.channel, cfg,
                                        node_limit=config.search_node_limit)
    return solve_static(problem, iterations)


@dataclass
class SweepRow:
    epsilon: float
    steady_deficit_sum: float
    objective: float
    objective_stderr: float
    static_objective: float

    @property
    def gap(self) -> float:
        return self.static_objective - self.objective


def sweep_epsilon(config: ExperimentConfig, epsilons, static_objective: float | None = None) -> list[SweepRow]:
    """Simulate each epsilon with common random numbers and compare with the static optimum."""
    if static_objective is None:
        static_objective = static_benchmark(config).objective
    rows = []
    for eps in epsilons:
        sc = config.scheduler
        m = run_simulation(config.replace(scheduler=SchedulerConfig(sc.w, eps, sc.p)))
        rows.append(SweepRow(float(eps), m.steady_deficit_sum, m.steady_objective,
                             m.objective_stderr, static_objective))
        log.info("epsilon=%g: total deficit %.3f, objective %.5f, gap %.5f",
                 eps, rows[-1].steady_deficit_sum, rows[-1].objective, rows[-1].gap)
    return rows
