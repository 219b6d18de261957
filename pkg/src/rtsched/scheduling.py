"""Schedules, deficit counters and the exact max-weight frame schedulers.

A schedule is an ``(L, T)`` integer array ``s[l, t]`` of packets sent by link
``l`` in slot ``t``. Both frame schedulers maximise ``sum_l weight_l * sum_t s[l, t]``
over feasible schedules by depth-first search over slots, memoised on
``(slot, remaining-in-active-window)``. At each slot the search only tries
maximal activations of the links that still have something to send and a
positive weight, and each active link sends as much as its window and rate
allow. Because the objective is linear with nonnegative per-link weights,
some maximiser always has this form.

Tie-breaking among maximisers is deterministic: links with zero weight stay
idle, and between activations with equal value the lexicographically first
(in the order returned by :func:`rtsched.topology.enumerate_activations`) wins,
so packets go out in the earliest slot that is optimal.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .channel import ChannelKind, ChannelRealization
from .errors import CapacityError, InputError
from .topology import InterferenceGraph, is_independent
from .traffic import FrameArrivals

DEFAULT_SEARCH_NODE_LIMIT = 10**7
VALUE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SchedulerConfig:
    """Fair-allocation weights ``w``, step parameter ``epsilon`` and loss tolerances ``p``."""

    w: np.ndarray
    epsilon: float
    p: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        p = np.asarray(self.p, dtype=float)
        if w.shape != p.shape or w.ndim != 1:
            raise InputError("w and p must be vectors of equal length")
        if not self.epsilon > 0:
            raise InputError(f"epsilon must be positive, got {self.epsilon}")
        if np.any(w < 0) or np.any((p < 0) | (p > 1)):
            raise InputError("need w >= 0 and 0 <= p <= 1")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "epsilon", float(self.epsilon))

    @classmethod
    def uniform(cls, n: int, w: float = 0.0, epsilon: float = 0.1, p: float = 0.1) -> "SchedulerConfig":
        return cls(np.full(n, float(w)), epsilon, np.full(n, float(p)))

    @property
    def link_count(self) -> int:
        return len(self.w)

    def priorities(self, d) -> np.ndarray:
        """``w_l / epsilon + d_l`` for each link."""
        return self.w / self.epsilon + np.asarray(d, dtype=float)


@dataclass(frozen=True)
class FramePlan:
    """Window bookkeeping for a frame, shared by the search and the DP.

    ``start[l][t]`` is the packet count of the window of link ``l`` opening
    at slot ``t`` (``t`` may equal ``T``; always 0 there). ``cont[l][t]`` says
    the window active at ``t`` is still open at ``t + 1``.
    """

    frame_length: int
    start: tuple[tuple[int, ...], ...]
    cont: tuple[tuple[bool, ...], ...]

    @classmethod
    def of(cls, a: FrameArrivals) -> "FramePlan":
        T = a.frame_length
        start, cont = [], []
        for ws in a.windows:
            st = [0] * (T + 1)
            co = [False] * T
            for w in ws:
                st[w.slot] = w.count
                for t in range(w.slot, w.deadline):
                    co[t] = True
            start.append(tuple(st))
            cont.append(tuple(co))
        return cls(T, tuple(start), tuple(cont))

    def initial(self) -> tuple[int, ...]:
        return tuple(st[0] for st in self.start)

    def advance(self, t: int, rem: Sequence[int], sent: Sequence[int]) -> tuple[int, ...]:
        """Remaining counts at slot ``t + 1`` after ``sent`` went out at ``t``."""
        return tuple(r - s if co[t] else st[t + 1]
                     for r, s, co, st in zip(rem, sent, self.cont, self.start))


def _exact_search(g: InterferenceGraph, plan: FramePlan, weights: tuple[float, ...],
                  caps: tuple[int, ...], node_limit: int) -> tuple[np.ndarray, float]:
    L, T = len(weights), plan.frame_length
    base = 0
    for l in range(L):
        if weights[l] > 0 and caps[l] > 0:
            base |= 1 << l
    memo: dict = {}
    nodes = 0

    def best(t: int, rem: tuple[int, ...]) -> float:
        nonlocal nodes
        key = (t, rem)
        hit = memo.get(key)
        if hit is not None:
            return hit[0]
        nodes += 1
        if nodes > node_limit:
            raise CapacityError(f"max-weight search exceeded node limit {node_limit}")
        cand = 0
        for l in range(L):
            if rem[l] > 0 and base >> l & 1:
                cand |= 1 << l
        best_v, best_sent = -np.inf, None
        for act in g.maximal_within(cand):
            sent = [0] * L
            gain = 0.0
            for l in act:
                k = min(caps[l], rem[l])
                sent[l] = k
                gain += weights[l] * k
            v = gain + best(t + 1, plan.advance(t, rem, sent)) if t + 1 < T else gain
            if v > best_v + VALUE_TOL * max(1.0, abs(v)):
                best_v, best_sent = v, sent
        memo[key] = (best_v, best_sent)
        return best_v

    rem = plan.initial()
    value = best(0, rem)
    s = np.zeros((L, T), dtype=np.int64)
    for t in range(T):
        sent = memo[(t, rem)][1]
        s[:, t] = sent
        if t + 1 < T:
            rem = plan.advance(t, rem, sent)
    return s, float(value)


@lru_cache(maxsize=1 << 16)
def _cached_search(g, windows, T, weights, caps, node_limit):
    plan = FramePlan.of(FrameArrivals(T, windows))
    s, v = _exact_search(g, plan, weights, caps, node_limit)
    s.setflags(write=False)
    return s, v


def max_weight_schedule_known(a: FrameArrivals, c: ChannelRealization | np.ndarray, d,
                              cfg: SchedulerConfig, g: InterferenceGraph,
                              node_limit: int = DEFAULT_SEARCH_NODE_LIMIT) -> np.ndarray:
    """Maximise ``sum_l (w_l/eps + d_l) sum_t s[l, t]`` subject to ``s[l, t] <= c_l``.

    ``c`` is either a known-channel realization or the rate vector itself.
    """
    rates = c.rates if isinstance(c, ChannelRealization) else np.asarray(c)
    _check_dims(a, g, cfg)
    pi = cfg.priorities(d)
    caps = tuple(int(x) for x in rates)
    if any(x < 0 for x in caps):
        raise InputError("channel rates must be nonnegative")
    return _cached_search(g, a.windows, a.frame_length, tuple(pi.tolist()), caps, node_limit)[0]


def max_weight_schedule_perframe(a: FrameArrivals, d, cfg: SchedulerConfig, cbar,
                                 g: InterferenceGraph,
                                 node_limit: int = DEFAULT_SEARCH_NODE_LIMIT) -> np.ndarray:
    """Maximise ``sum_l (w_l/eps + d_l) cbar_l sum_t s[l, t]`` with at most one packet per slot."""
    cbar = np.asarray(cbar, dtype=float)
    if np.any((cbar < 0) | (cbar > 1)):
        raise InputError("mean channel rates must lie in [0, 1]")
    _check_dims(a, g, cfg)
    weights = cfg.priorities(d) * cbar
    caps = (1,) * g.link_count
    return _cached_search(g, a.windows, a.frame_length, tuple(weights.tolist()), caps, node_limit)[0]


def _check_dims(a: FrameArrivals, g: InterferenceGraph, cfg: SchedulerConfig) -> None:
    if not (a.link_count == g.link_count == cfg.link_count):
        raise InputError(f"link counts disagree: arrivals {a.link_count}, graph {g.link_count}, "
                         f"config {cfg.link_count}")


def schedule_objective(s: np.ndarray, weights) -> float:
    return float(np.dot(np.asarray(weights, dtype=float), s.sum(axis=1)))


def validate_schedule(s: np.ndarray, a: FrameArrivals, c: ChannelRealization | None,
                      g: InterferenceGraph) -> bool:
    """Check window caps, zero-outside-windows, rate caps and per-slot independence.

    ``c=None`` means an unknown channel seen from the scheduler's side (at
    most one packet per slot, window cap on attempts). For a per-slot
    realization the window cap applies to successes ``c[l, t] * s[l, t]``.
    """
    s = np.asarray(s)
    L, T = a.link_count, a.frame_length
    if s.shape != (L, T) or g.link_count != L:
        raise InputError(f"schedule shape {s.shape} does not match ({L}, {T})")
    if c is not None and c.outcomes.shape != (L, T):
        raise InputError("channel realization dimensions do not match the schedule")
    if np.any(s < 0) or np.any(s != np.round(s)):
        return False
    kind = None if c is None else c.kind
    if kind is ChannelKind.KNOWN:
        if np.any(s > c.outcomes):
            return False
    elif np.any(s > 1):
        return False
    counted = s * c.outcomes if kind is ChannelKind.PER_SLOT else s
    for l, ws in enumerate(a.windows):
        inside = np.zeros(T, dtype=bool)
        for w in ws:
            inside[w.slot:w.deadline + 1] = True
            if counted[l, w.slot:w.deadline + 1].sum() > w.count:
                return False
        if np.any(s[l, ~inside] != 0):
            return False
    for t in range(T):
        if not is_independent(np.nonzero(s[:, t])[0].tolist(), g):
            return False
    return True


def served_count(s: np.ndarray, c: ChannelRealization, kind: ChannelKind | str | None = None,
                 perframe_deficit: str = "attempts") -> np.ndarray:
    """Per-link service ``I*_l`` credited to the deficit counters.

    Known channel: packets sent. Per-frame feedback: attempts (or successes
    with ``perframe_deficit="successes"``). Per-slot feedback: successes.
    """
    kind = ChannelKind(kind) if kind is not None else c.kind
    if kind is ChannelKind.KNOWN:
        return s.sum(axis=1)
    if kind is ChannelKind.PER_FRAME:
        if perframe_deficit == "attempts":
            return s.sum(axis=1)
        if perframe_deficit != "successes":
            raise InputError(f"perframe_deficit must be 'attempts' or 'successes', got {perframe_deficit!r}")
    return (s * c.outcomes).sum(axis=1)


def delivered_count(s: np.ndarray, c: ChannelRealization) -> np.ndarray:
    """Packets actually delivered per link, whatever the deficit accounting."""
    if c.kind is ChannelKind.KNOWN:
        return s.sum(axis=1)
    return (s * c.outcomes).sum(axis=1)


def deficit_update(d, thinned, served) -> np.ndarray:
    """``max(d + thinned - served, 0)`` componentwise."""
    thinned = np.asarray(thinned)
    served = np.asarray(served)
    if np.any(thinned < 0) or np.any(served < 0):
        raise InputError("thinned arrivals and service must be nonnegative")
    return np.maximum(np.asarray(d, dtype=float) + thinned - served, 0.0)
