import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rtsched.errors import InputError
from rtsched.traffic import (ArrivalModel, CountDistribution, FrameArrivals, Window, WindowSpec,
                             generate_frame, thin, thin_all)


def test_bernoulli_frame_start_heads_and_tails():
    model = ArrivalModel.frame_start(3, [CountDistribution.bernoulli(0.6)])
    rng = np.random.default_rng(0)
    seen = set()
    for _ in range(200):
        a = generate_frame(model, rng)
        seen.add(a.windows[0])
    assert seen == {(), (Window(0, 1, 2),)}


def test_degenerate_zero_arrivals():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        model = ArrivalModel.frame_start(3, [CountDistribution.constant(0)] * 2)
    a = generate_frame(model, np.random.default_rng(1))
    assert a.windows == ((), ()) and a.is_empty()


def test_single_packet_model():
    model = ArrivalModel.single_packet(4, 3)
    rng = np.random.default_rng(2)
    for _ in range(20):
        assert generate_frame(model, rng).windows == ((Window(0, 1, 3),),) * 3


def test_missing_zero_or_one_warns():
    with pytest.warns(UserWarning):
        ArrivalModel.frame_start(2, [CountDistribution.constant(2)])


def test_overlapping_or_out_of_frame_windows_rejected():
    d = CountDistribution.bernoulli(0.5)
    with pytest.raises(InputError):
        ArrivalModel(3, ((WindowSpec(0, d, 1), WindowSpec(1, d, 2)),))
    with pytest.raises(InputError):
        ArrivalModel(3, ((WindowSpec(1, d, 3),),))
    with pytest.raises(InputError):
        FrameArrivals.from_lists(3, [[(0, 1, 1), (1, 1, 2)]])
    with pytest.raises(InputError):
        FrameArrivals.from_lists(3, [[(0, 0, 1)]])


def test_count_distribution_validation_and_moments():
    d = CountDistribution.from_mapping({0: 0.5, 1: 0.3, 2: 0.2})
    assert d.mean == pytest.approx(0.7)
    assert d.variance == pytest.approx(0.3 + 0.8 - 0.49)
    with pytest.raises(InputError):
        CountDistribution.from_mapping({0: 0.5, 1: 0.3})
    with pytest.raises(InputError):
        CountDistribution.from_mapping({-1: 1.0})


@pytest.mark.parametrize("a, p, expected", [(5, 0.0, 5), (5, 1.0, 0), (0, 0.3, 0)])
def test_thin_certain_cases(a, p, expected):
    assert thin(a, p, np.random.default_rng(0)) == expected


def test_thin_mean():
    rng = np.random.default_rng(3)
    draws = [thin(4, 0.1, rng) for _ in range(200_000)]
    # Binomial(4, 0.9): sd of the mean is 0.6/sqrt(2e5) ~ 0.0013
    assert abs(np.mean(draws) - 3.6) < 0.01


def test_thin_all_matches_binomial_mean():
    rng = np.random.default_rng(4)
    counts = np.array([4, 0, 2])
    p = np.array([0.1, 0.5, 0.75])
    tot = sum(thin_all(counts, p, rng) for _ in range(50_000)) / 50_000
    assert np.allclose(tot, counts * (1 - p), atol=0.02)


def test_thin_rejects_bad_tolerance():
    with pytest.raises(InputError):
        thin(3, 1.5, np.random.default_rng(0))


@st.composite
def window_models(draw):
    T = draw(st.integers(1, 5))
    links = []
    for _ in range(draw(st.integers(1, 3))):
        specs, t = [], 0
        while t < T:
            deadline = draw(st.integers(t, T - 1))
            probs = draw(st.lists(st.floats(0.05, 1.0), min_size=2, max_size=3))
            dist = CountDistribution(tuple(range(len(probs))), tuple(np.array(probs) / sum(probs)))
            specs.append(WindowSpec(t, dist, deadline))
            t = deadline + 1 + draw(st.integers(0, 1))
        links.append(tuple(specs))
    return ArrivalModel(T, tuple(links))


@given(window_models(), st.integers(0, 2**32 - 1))
def test_generated_windows_are_ordered_and_disjoint(model, seed):
    rng = np.random.default_rng(seed)
    for _ in range(5):
        a = generate_frame(model, rng)
        a.validate()
        for ws in a.windows:
            for w1, w2 in zip(ws, ws[1:]):
                assert w1.deadline < w2.slot


def test_sample_mean_within_five_sigma():
    dists = [CountDistribution.bernoulli(0.6), CountDistribution.from_mapping({0: 0.2, 1: 0.3, 3: 0.5})]
    model = ArrivalModel.frame_start(3, dists)
    rng = np.random.default_rng(5)
    K = 100_000
    tot = np.zeros(2)
    for _ in range(K):
        tot += generate_frame(model, rng).totals()
    sigma = np.sqrt(model.variances())
    assert np.all(np.abs(tot / K - model.means()) <= 5 * sigma / np.sqrt(K))


def test_support_enumeration_sums_to_one():
    d = CountDistribution.from_mapping({0: 0.5, 2: 0.5})
    model = ArrivalModel(2, ((WindowSpec(0, d, 0), WindowSpec(1, CountDistribution.bernoulli(0.3), 1)),
                             (WindowSpec(0, CountDistribution.bernoulli(0.5), 1),)))
    sup = model.support()
    assert len(sup) == 8
    assert sum(p for _, p in sup) == pytest.approx(1.0)
    mean = sum(p * a.totals() for a, p in sup)
    assert np.allclose(mean, model.means())
