"""Per-slot feedback scheduling: exact DP policy, greedy colocated policy, utility recursion."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Optional

import numpy as np

from .channel import ChannelGuard, ChannelKind, ChannelRealization
from .errors import CapacityError, InputError
from .scheduling import VALUE_TOL, FramePlan, SchedulerConfig, _check_dims
from .topology import InterferenceGraph
from .traffic import FrameArrivals

DEFAULT_DP_STATE_LIMIT = 10**6

State = tuple[int, tuple[int, ...]]


def _outcomes(act: tuple[int, ...], cbar: tuple[float, ...], L: int):
    """(probability, success-vector) pairs for independent attempts on ``act``."""
    out = [(1.0, [0] * L)]
    for l in act:
        q = cbar[l]
        nxt = []
        for p, vec in out:
            if q > 0:
                hit = vec.copy()
                hit[l] = 1
                nxt.append((p * q, hit))
            if q < 1:
                nxt.append((p * (1.0 - q), vec))
        out = nxt
    return out


@dataclass
class PolicyTable:
    """Optimal values and actions for every state reached while solving.

    ``table[(t, remaining)] = (value, activation)``. ``value`` is the
    expected weighted service from slot ``t`` to the end of the frame.
    """

    graph: InterferenceGraph
    plan: FramePlan
    weights: tuple[float, ...]
    cbar: tuple[float, ...]
    table: dict[State, tuple[float, tuple[int, ...]]] = field(default_factory=dict)
    solver: Optional[Callable[[int, tuple[int, ...]], float]] = field(default=None, repr=False)

    @property
    def initial_state(self) -> State:
        return (0, self.plan.initial())

    @property
    def value(self) -> float:
        return self.table[self.initial_state][0]

    def action(self, t: int, remaining: tuple[int, ...]) -> tuple[int, ...]:
        key = (t, tuple(remaining))
        if key not in self.table and self.solver is not None:
            # only reachable through a zero-probability outcome (cbar of 0 or 1)
            self.solver(*key)
        return self.table[key][1]

    def expected_service(self) -> np.ndarray:
        """Expected successes per link under the tabulated policy, ``mu_l(rho, a)``."""
        L, T = len(self.weights), self.plan.frame_length
        memo: dict[State, np.ndarray] = {}

        def mu(t, rem):
            key = (t, rem)
            if key in memo:
                return memo[key]
            act = self.table[key][1]
            out = np.zeros(L)
            for l in act:
                out[l] += self.cbar[l]
            if t + 1 < T:
                for p, succ in _outcomes(act, self.cbar, L):
                    out += p * mu(t + 1, self.plan.advance(t, rem, succ))
            memo[key] = out
            return out

        return mu(*self.initial_state)


def _solve(g: InterferenceGraph, plan: FramePlan, weights: tuple[float, ...],
           cbar: tuple[float, ...], state_limit: int) -> PolicyTable:
    L, T = len(weights), plan.frame_length
    base = 0
    for l in range(L):
        if weights[l] > 0:
            base |= 1 << l
    pt = PolicyTable(g, plan, weights, cbar)
    table = pt.table

    def V(t: int, rem: tuple[int, ...]) -> float:
        key = (t, rem)
        hit = table.get(key)
        if hit is not None:
            return hit[0]
        if len(table) >= state_limit:
            raise CapacityError(f"per-slot DP exceeded state limit {state_limit}")
        cand = 0
        for l in range(L):
            if rem[l] > 0 and base >> l & 1:
                cand |= 1 << l
        best_v, best_a = -np.inf, ()
        for act in g.maximal_within(cand):
            v = sum(weights[l] for l in act)
            if t + 1 < T:
                for p, succ in _outcomes(act, cbar, L):
                    v += p * V(t + 1, plan.advance(t, rem, succ))
            if v > best_v + VALUE_TOL * max(1.0, abs(v)):
                best_v, best_a = v, act
        table[key] = (best_v, best_a)
        return best_v

    pt.solver = V
    V(*pt.initial_state)
    return pt


@lru_cache(maxsize=1 << 14)
def _cached_solve(g, windows, T, weights, cbar, state_limit):
    return _solve(g, FramePlan.of(FrameArrivals(T, windows)), weights, cbar, state_limit)


def optimal_policy_value(a: FrameArrivals, d, cfg: SchedulerConfig, cbar, g: InterferenceGraph,
                         state_limit: int = DEFAULT_DP_STATE_LIMIT) -> PolicyTable:
    """Solve ``max_rho sum_l (w_l/eps + d_l) mu_l(rho, a)`` by backward induction.

    The state is the slot and, per link, the packets still deliverable in
    the window active at that slot; with slot-independent Bernoulli channels
    this is a sufficient statistic for the feedback history. The returned
    table is shared between identical calls and must be treated as read-only.
    """
    cbar = np.asarray(cbar, dtype=float)
    if np.any((cbar < 0) | (cbar > 1)):
        raise InputError("mean channel rates must lie in [0, 1]")
    _check_dims(a, g, cfg)
    weights = cfg.priorities(d) * cbar
    return _cached_solve(g, a.windows, a.frame_length, tuple(weights.tolist()),
                         tuple(cbar.tolist()), state_limit)


def _as_guard(c: ChannelRealization | ChannelGuard) -> ChannelGuard:
    guard = c if isinstance(c, ChannelGuard) else ChannelGuard(c)
    if guard.realization.kind is not ChannelKind.PER_SLOT:
        raise InputError("per-slot policies need a per-slot channel realization")
    return guard


def policy_schedule(table: PolicyTable, a: FrameArrivals,
                    c: ChannelRealization | ChannelGuard, g: InterferenceGraph) -> np.ndarray:
    """Run the tabulated policy on one frame, learning each outcome only via ACKs."""
    guard = _as_guard(c)
    plan = table.plan
    L, T = a.link_count, a.frame_length
    s = np.zeros((L, T), dtype=np.int64)
    rem = plan.initial()
    for t in range(T):
        act = table.action(t, rem)
        acks = guard.transmit(act)
        succ = [0] * L
        for l in act:
            s[l, t] = 1
            succ[l] = acks[l]
        if t + 1 < T:
            rem = plan.advance(t, rem, succ)
    return s


def greedy_colocated_step(backlogged: Iterable[int], d, cfg: SchedulerConfig, cbar) -> Optional[int]:
    """Backlogged link with the largest ``(w_l/eps + d_l) cbar_l``; ties go to the smallest index."""
    score = cfg.priorities(d) * np.asarray(cbar, dtype=float)
    best = None
    for l in sorted(backlogged):
        if best is None or score[l] > score[best]:
            best = l
    return best


def greedy_schedule(a: FrameArrivals, d, cfg: SchedulerConfig, cbar,
                    c: ChannelRealization | ChannelGuard, g: InterferenceGraph) -> np.ndarray:
    """Greedy colocated policy over frame-start arrivals: one attempt per slot, retry on failure."""
    if not g.is_colocated:
        raise InputError("the greedy policy is defined for colocated networks only")
    for ws in a.windows:
        if ws and (len(ws) > 1 or ws[0].slot != 0 or ws[0].deadline != a.frame_length - 1):
            raise InputError("the greedy policy needs frame-start arrivals with deadline T")
    guard = _as_guard(c)
    L, T = a.link_count, a.frame_length
    left = a.totals().tolist()
    s = np.zeros((L, T), dtype=np.int64)
    for t in range(T):
        link = greedy_colocated_step([l for l in range(L) if left[l] > 0], d, cfg, cbar)
        acks = guard.transmit(() if link is None else (link,))
        if link is not None:
            s[link, t] = 1
            left[link] -= acks[link]
    return s


Policy = Callable[[frozenset, int], Optional[int]]


def greedy_policy(priorities, cbar) -> Policy:
    """The greedy rule as a ``(backlogged, slots_left) -> link`` callable."""
    score = np.asarray(priorities, dtype=float) * np.asarray(cbar, dtype=float)

    def choose(backlogged: frozenset, slots_left: int) -> Optional[int]:
        best = None
        for l in sorted(backlogged):
            if best is None or score[l] > score[best]:
                best = l
        return best

    return choose


def expected_utility(policy: Policy, backlogged: Iterable[int], slots: int, priorities, cbar) -> float:
    """Expected utility ``U(backlogged, slots)`` of a colocated single-packet policy.

    ``U(B, 0) = 0``; when the policy picks ``l`` in ``B`` with ``j`` slots
    left, ``U(B, j) = pi_l c_l + (1 - c_l) U(B, j-1) + c_l U(B - {l}, j-1)``.
    """
    if slots < 0:
        raise InputError("slots remaining must be nonnegative")
    pi = np.asarray(priorities, dtype=float)
    cbar = np.asarray(cbar, dtype=float)

    @lru_cache(maxsize=None)
    def U(B: frozenset, j: int) -> float:
        if j == 0 or not B:
            return 0.0
        l = policy(B, j)
        if l is None:
            return U(B, j - 1)
        if l not in B:
            raise InputError(f"policy chose link {l}, which has no packet left")
        q = cbar[l]
        return pi[l] * q + (1.0 - q) * U(B, j - 1) + q * U(B - {l}, j - 1)

    return U(frozenset(backlogged), slots)


@dataclass
class GreedyCheck:
    links: int
    slots: int
    priorities: np.ndarray
    cbar: np.ndarray
    greedy: float
    optimal: float

    @property
    def error(self) -> float:
        return abs(self.greedy - self.optimal)


def verify_greedy(instances: int = 500, seed: int = 0, max_links: int = 4, max_slots: int = 4,
                  epsilon: float = 1.0) -> list[GreedyCheck]:
    """Compare the greedy utility with the exact DP on random colocated single-packet frames.

    ``w`` and ``d`` are drawn from U[0, 10] and ``cbar`` from U[0.1, 1].
    """
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(instances):
        L = int(rng.integers(1, max_links + 1))
        T = int(rng.integers(1, max_slots + 1))
        w = rng.uniform(0, 10, L)
        d = rng.uniform(0, 10, L)
        cbar = rng.uniform(0.1, 1.0, L)
        cfg = SchedulerConfig(w, epsilon, np.full(L, 0.1))
        g = InterferenceGraph.colocated(L)
        a = FrameArrivals.from_lists(T, [[(0, 1, T - 1)]] * L)
        opt = optimal_policy_value(a, d, cfg, cbar, g).value
        pri = cfg.priorities(d)
        greedy = expected_utility(greedy_policy(pri, cbar), range(L), T, pri, cbar)
        out.append(GreedyCheck(L, T, pri, cbar, greedy, opt))
    return out
