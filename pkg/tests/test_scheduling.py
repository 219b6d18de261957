import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import frames, graphs, random_frame, random_graph
from rtsched.channel import ChannelKind, ChannelRealization
from rtsched.errors import CapacityError, InputError
from rtsched.oracles import brute_force_max
from rtsched.scheduling import (SchedulerConfig, deficit_update, delivered_count, max_weight_schedule_known,
                                max_weight_schedule_perframe, schedule_objective, served_count,
                                validate_schedule)
from rtsched.topology import InterferenceGraph
from rtsched.traffic import FrameArrivals


def cfg_for(pi):
    """Config whose priorities at zero deficit equal ``pi`` (epsilon = 1)."""
    return SchedulerConfig(np.asarray(pi, dtype=float), 1.0, np.full(len(pi), 0.1))


def test_empty_schedule_is_feasible():
    g = InterferenceGraph.path(3)
    a = FrameArrivals.from_lists(2, [[(0, 1, 1)], [], [(1, 2, 1)]])
    for c in (None, ChannelRealization.constant("known", [0, 0, 0], 2)):
        assert validate_schedule(np.zeros((3, 2), dtype=int), a, c, g)


def test_window_cap_violation():
    a = FrameArrivals.from_lists(3, [[(0, 1, 2)]])
    g = InterferenceGraph.edgeless(1)
    assert not validate_schedule(np.array([[1, 1, 0]]), a, None, g)


def test_conflicting_links_same_slot():
    a = FrameArrivals.from_lists(1, [[(0, 1, 0)], [(0, 1, 0)]])
    assert not validate_schedule(np.array([[1], [1]]), a, None, InterferenceGraph.colocated(2))


def test_outside_window_and_rate_cap():
    a = FrameArrivals.from_lists(3, [[(1, 2, 2)]])
    g = InterferenceGraph.edgeless(1)
    c = ChannelRealization.constant("known", [1], 3)
    assert not validate_schedule(np.array([[1, 0, 0]]), a, c, g)
    assert not validate_schedule(np.array([[0, 2, 0]]), a, c, g)
    assert validate_schedule(np.array([[0, 2, 0]]), a, ChannelRealization.constant("known", [2], 3), g)


def test_per_slot_window_cap_counts_successes():
    a = FrameArrivals.from_lists(3, [[(0, 1, 2)]])
    g = InterferenceGraph.edgeless(1)
    assert validate_schedule(np.array([[1, 1, 0]]), a, ChannelRealization.per_slot([[0, 1, 1]]), g)
    assert not validate_schedule(np.array([[1, 1, 0]]), a, ChannelRealization.per_slot([[1, 1, 1]]), g)


def test_single_window_goes_to_first_slot():
    a = FrameArrivals.from_lists(3, [[(0, 1, 2)]])
    s = max_weight_schedule_known(a, [1], [0.0], cfg_for([6.0]), InterferenceGraph.edgeless(1))
    assert s.tolist() == [[1, 0, 0]]
    assert schedule_objective(s, [6.0]) == 6.0


def test_colocated_pair_larger_priority_wins():
    a = FrameArrivals.from_lists(1, [[(0, 1, 0)], [(0, 1, 0)]])
    s = max_weight_schedule_known(a, [1, 1], [0, 0], cfg_for([5.0, 7.0]), InterferenceGraph.colocated(2))
    assert s.tolist() == [[0], [1]]


def test_path_prefers_outer_pair():
    a = FrameArrivals.from_lists(1, [[(0, 1, 0)]] * 3)
    s = max_weight_schedule_known(a, [1, 1, 1], [0] * 3, cfg_for([4.0, 5.0, 4.0]), InterferenceGraph.path(3))
    assert s[:, 0].tolist() == [1, 0, 1]
    assert schedule_objective(s, [4, 5, 4]) == 8


def test_perframe_uses_expected_weights():
    a = FrameArrivals.from_lists(1, [[(0, 1, 0)], [(0, 1, 0)]])
    s = max_weight_schedule_perframe(a, [0, 0], cfg_for([10.0, 6.0]), [0.5, 0.9], InterferenceGraph.colocated(2))
    assert s.tolist() == [[0], [1]]


def test_zero_priorities_give_empty_schedule():
    a = FrameArrivals.from_lists(2, [[(0, 2, 1)], [(0, 1, 1)]])
    g = InterferenceGraph.edgeless(2)
    cfg = SchedulerConfig.uniform(2, w=0.0)
    assert not max_weight_schedule_known(a, [2, 2], [0, 0], cfg, g).any()
    assert not max_weight_schedule_perframe(a, [0, 0], cfg, [0.5, 0.5], g).any()


def test_dimension_and_rate_errors():
    a = FrameArrivals.from_lists(1, [[(0, 1, 0)]])
    with pytest.raises(InputError):
        max_weight_schedule_known(a, [1], [0], SchedulerConfig.uniform(2), InterferenceGraph.edgeless(1))
    with pytest.raises(InputError):
        max_weight_schedule_perframe(a, [0], SchedulerConfig.uniform(1), [1.5], InterferenceGraph.edgeless(1))
    with pytest.raises(InputError):
        SchedulerConfig.uniform(1, epsilon=0.0)


def test_search_budget():
    rng = np.random.default_rng(0)
    g = InterferenceGraph.edgeless(6)
    a = random_frame(rng, 6, 4)
    with pytest.raises(CapacityError):
        max_weight_schedule_known(a, [2] * 6, np.arange(6.0), cfg_for([1.0] * 6), g, node_limit=3)


@given(st.data())
def test_known_matches_brute_force(data):
    g = data.draw(graphs(max_links=3))
    a = data.draw(frames(g.link_count, max_slots=2))
    caps = data.draw(st.lists(st.integers(0, 2), min_size=g.link_count, max_size=g.link_count))
    pi = data.draw(st.lists(st.integers(0, 9), min_size=g.link_count, max_size=g.link_count))
    s = max_weight_schedule_known(a, caps, [0] * g.link_count, cfg_for(pi), g)
    c = ChannelRealization.constant("known", caps, a.frame_length)
    assert validate_schedule(s, a, c, g)
    assert schedule_objective(s, pi) == brute_force_max(a, pi, caps, g)


@given(st.data())
def test_perframe_matches_brute_force(data):
    g = data.draw(graphs(max_links=3))
    n = g.link_count
    a = data.draw(frames(n, max_slots=3))
    pi = data.draw(st.lists(st.integers(0, 9), min_size=n, max_size=n))
    cbar = data.draw(st.lists(st.sampled_from([0.25, 0.5, 0.75, 1.0]), min_size=n, max_size=n))
    s = max_weight_schedule_perframe(a, [0] * n, cfg_for(pi), cbar, g)
    weights = np.array(pi) * np.array(cbar)
    assert validate_schedule(s, a, None, g)
    assert schedule_objective(s, weights) == pytest.approx(brute_force_max(a, weights, [1] * n, g), abs=1e-12)


@given(st.data(), st.sampled_from([0.5, 2.0, 3.0, 10.0]))
def test_positive_scaling_keeps_schedule(data, k):
    g = data.draw(graphs(max_links=4))
    n = g.link_count
    a = data.draw(frames(n, max_slots=3))
    pi = np.array(data.draw(st.lists(st.integers(0, 9), min_size=n, max_size=n)), dtype=float)
    caps = data.draw(st.lists(st.integers(0, 2), min_size=n, max_size=n))
    s1 = max_weight_schedule_known(a, caps, [0] * n, cfg_for(pi), g)
    s2 = max_weight_schedule_known(a, caps, [0] * n, cfg_for(k * pi), g)
    assert np.array_equal(s1, s2)


def test_fuzz_schedules_always_valid():
    rng = np.random.default_rng(11)
    for _ in range(2000):
        n, T = int(rng.integers(1, 7)), int(rng.integers(1, 5))
        g = random_graph(rng, n)
        a = random_frame(rng, n, T, max_count=3)
        cfg = SchedulerConfig(rng.uniform(0, 5, n).round(1), 0.5, np.full(n, 0.1))
        d = rng.integers(0, 10, n).astype(float)
        caps = rng.integers(0, 3, n)
        c = ChannelRealization.constant("known", caps, T)
        assert validate_schedule(max_weight_schedule_known(a, c, d, cfg, g), a, c, g)
        s = max_weight_schedule_perframe(a, d, cfg, rng.uniform(0, 1, n), g)
        assert validate_schedule(s, a, None, g)


@pytest.mark.parametrize("d, thinned, served, expected", [(2, 1, 3, 0), (0, 2, 0, 2), (5.0, 1, 2, 4.0)])
def test_deficit_update_examples(d, thinned, served, expected):
    assert deficit_update([d], [thinned], [served])[0] == expected


@given(st.lists(st.tuples(st.floats(0, 50), st.integers(0, 5), st.integers(0, 5), st.integers(0, 3)),
                min_size=1, max_size=5))
def test_deficit_update_sign_and_monotonicity(rows):
    d, a, s, bump = map(np.array, zip(*rows))
    base = deficit_update(d, a, s)
    assert np.all(base >= 0)
    assert np.all(deficit_update(d, a + bump, s) >= base)
    assert np.all(deficit_update(d, a, s + bump) <= base)


def test_served_count_per_model():
    s = np.array([[1, 1, 1]])
    assert served_count(np.array([[2, 0, 0]]), ChannelRealization.constant("known", [2], 3))[0] == 2
    assert served_count(s, ChannelRealization.per_slot([[1, 0, 1]]))[0] == 2
    pf = ChannelRealization.constant("per_frame", [0], 3)
    assert served_count(s, pf)[0] == 3
    assert served_count(s, pf, perframe_deficit="successes")[0] == 0
    assert delivered_count(s, pf)[0] == 0
    with pytest.raises(InputError):
        served_count(s, pf, perframe_deficit="both")


@given(st.data())
def test_pruned_enumeration_matches_naive(data):
    from rtsched.oracles import all_feasible_schedules, all_feasible_schedules_naive

    g = data.draw(graphs(max_links=3))
    a = data.draw(frames(g.link_count, max_slots=2))
    caps = data.draw(st.lists(st.integers(0, 2), min_size=g.link_count, max_size=g.link_count))
    fast = sorted(s.tobytes() for s in all_feasible_schedules(a, caps, g))
    slow = sorted(s.tobytes() for s in all_feasible_schedules_naive(a, caps, g))
    assert fast == slow
