"""Brute-force reference computations for tiny instances.

These deliberately share no search logic with the schedulers: they
enumerate every schedule, every history, or every vertex outright.
"""

from __future__ import annotations

import itertools
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from .channel import ChannelKind, ChannelRealization
from .scheduling import validate_schedule
from .topology import InterferenceGraph, is_independent
from .traffic import FrameArrivals


def all_independent_sets(g: InterferenceGraph) -> list[tuple[int, ...]]:
    n = g.link_count
    return [sub for r in range(n + 1) for sub in itertools.combinations(range(n), r)
            if is_independent(sub, g)]


def brute_force_maximal_sets(g: InterferenceGraph) -> list[tuple[int, ...]]:
    ind = [set(s) for s in all_independent_sets(g)]
    return sorted(tuple(sorted(s)) for s in ind if not any(s < o for o in ind))


def all_feasible_schedules_naive(a: FrameArrivals, caps: Sequence[int], g: InterferenceGraph):
    """Every schedule with ``0 <= s[l, t] <= caps[l]`` that passes validation."""
    L, T = a.link_count, a.frame_length
    c = ChannelRealization.constant(ChannelKind.KNOWN, caps, T)
    ranges = [range(int(caps[l]) + 1) for l in range(L) for _ in range(T)]
    for flat in itertools.product(*ranges):
        s = np.array(flat, dtype=np.int64).reshape(L, T)
        if validate_schedule(s, a, c, g):
            yield s


def all_feasible_schedules(a: FrameArrivals, caps: Sequence[int], g: InterferenceGraph):
    """Same set as :func:`all_feasible_schedules_naive`, pruning partial schedules early.

    Cells are filled slot by slot; a value is skipped as soon as it breaks a
    window budget or conflicts with a link already active in that slot.
    """
    L, T = a.link_count, a.frame_length
    budget = np.zeros((L, T), dtype=np.int64)  # packets of the window covering (l, t), 0 if none
    window_id = np.full((L, T), -1)
    for l, ws in enumerate(a.windows):
        for k, w in enumerate(ws):
            budget[l, w.slot:w.deadline + 1] = w.count
            window_id[l, w.slot:w.deadline + 1] = k
    s = np.zeros((L, T), dtype=np.int64)
    used = {}

    def fill(cell):
        if cell == L * T:
            yield s.copy()
            return
        t, l = divmod(cell, L)
        top = min(int(caps[l]), int(budget[l, t])) if window_id[l, t] >= 0 else 0
        key = (l, int(window_id[l, t]))
        for v in range(top + 1):
            if v and (used.get(key, 0) + v > budget[l, t]
                      or any(s[m, t] and g.conflict(l, m) for m in range(l))):
                continue
            s[l, t] = v
            used[key] = used.get(key, 0) + v
            yield from fill(cell + 1)
            used[key] -= v
            s[l, t] = 0

    yield from fill(0)


def brute_force_max(a: FrameArrivals, weights, caps, g: InterferenceGraph) -> float:
    w = np.asarray(weights, dtype=float)
    return max(float(w @ s.sum(axis=1)) for s in all_feasible_schedules(a, caps, g))


def brute_force_policy_value(a: FrameArrivals, weights, cbar, g: InterferenceGraph) -> float:
    """Best expected weighted successes over every adaptive policy.

    Searches the full history tree: at each slot any independent set of
    links (including the empty set) may be attempted, each attempt succeeds
    independently with probability ``cbar_l``, and successes are capped by
    the packets of the window that is open.
    """
    L, T = a.link_count, a.frame_length
    w = np.asarray(weights, dtype=float)
    cbar = np.asarray(cbar, dtype=float)
    actions = all_independent_sets(g)

    def open_window(l, t):
        for win in a.windows[l]:
            if win.slot <= t <= win.deadline:
                return win
        return None

    def left(l, t, history):
        win = open_window(l, t)
        if win is None:
            return 0
        done = sum(succ[l] for slot, succ in history if win.slot <= slot < t)
        return win.count - done

    def value(t, history):
        if t == T:
            return 0.0
        best = 0.0
        for act in actions:
            if any(left(l, t, history) <= 0 for l in act):
                continue
            total = 0.0
            for bits in itertools.product((0, 1), repeat=len(act)):
                prob = 1.0
                succ = [0] * L
                for l, b in zip(act, bits):
                    prob *= cbar[l] if b else 1.0 - cbar[l]
                    succ[l] = b
                if prob == 0.0:
                    continue
                gain = sum(w[l] * succ[l] for l in act)
                total += prob * (gain + value(t + 1, history + ((t, tuple(succ)),)))
            best = max(best, total)
        return best

    return value(0, ())


def served_vectors(a: FrameArrivals, caps, g: InterferenceGraph) -> np.ndarray:
    """Distinct per-link service totals over all feasible schedules."""
    return np.unique(np.array([s.sum(axis=1) for s in all_feasible_schedules(a, caps, g)]), axis=0)


def lp_static_optimum(graph: InterferenceGraph, arrivals, channels, w, required) -> float | None:
    """Optimum of ``max w . mu`` over the capacity region subject to ``mu >= required``.

    Each support point's region is the convex hull of its enumerated
    service vectors; the mixture weights are found by a linear program.
    Returns ``None`` if the constraints cannot be met.
    """
    blocks = []
    for a, pa in arrivals:
        for c, pc in channels:
            blocks.append((pa * pc, served_vectors(a, c, graph)))
    n = sum(len(v) for _, v in blocks)
    L = graph.link_count
    M = np.zeros((L, n))
    A_eq = np.zeros((len(blocks), n))
    j = 0
    for b, (prob, verts) in enumerate(blocks):
        M[:, j:j + len(verts)] = prob * verts.T
        A_eq[b, j:j + len(verts)] = 1.0
        j += len(verts)
    res = linprog(-(np.asarray(w, dtype=float) @ M), A_ub=-M, b_ub=-np.asarray(required, dtype=float),
                  A_eq=A_eq, b_eq=np.ones(len(blocks)), bounds=(0, None), method="highs")
    if res.status != 0:
        return None
    return float(-res.fun)
