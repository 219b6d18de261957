import itertools

import pytest
from hypothesis import given

from conftest import graphs
from rtsched.errors import CapacityError, InputError
from rtsched.oracles import all_independent_sets, brute_force_maximal_sets
from rtsched.topology import TEN_LINK_EDGES, InterferenceGraph, enumerate_activations, is_independent


def test_empty_set_is_independent():
    for g in (InterferenceGraph.colocated(3), InterferenceGraph.path(4), InterferenceGraph.edgeless(1)):
        assert is_independent([], g)


def test_colocated_pair_not_independent():
    assert not is_independent([0, 1], InterferenceGraph.colocated(3))


def test_path_endpoints_independent():
    assert is_independent([0, 2], InterferenceGraph.path(4))
    assert not is_independent([1, 2], InterferenceGraph.path(4))


def test_is_independent_rejects_unknown_link():
    with pytest.raises(InputError):
        is_independent([5], InterferenceGraph.path(3))


@pytest.mark.parametrize("g, expected", [
    (InterferenceGraph.colocated(3), ((0,), (1,), (2,))),
    (InterferenceGraph.edgeless(3), ((0, 1, 2),)),
    (InterferenceGraph.path(3), ((0, 2), (1,))),
])
def test_small_activation_sets(g, expected):
    assert enumerate_activations(g) == expected


def test_enumeration_limit():
    with pytest.raises(CapacityError):
        enumerate_activations(InterferenceGraph.edgeless(21))
    assert enumerate_activations(InterferenceGraph.edgeless(21), limit=25) == (tuple(range(21)),)


def test_graph_validation():
    with pytest.raises(InputError):
        InterferenceGraph(2, frozenset({(0, 0)}))
    with pytest.raises(InputError):
        InterferenceGraph(2, frozenset({(0, 2)}))
    with pytest.raises(InputError):
        InterferenceGraph(0, frozenset())
    assert InterferenceGraph(3, frozenset({(2, 1)})) == InterferenceGraph(3, frozenset({(1, 2)}))


def test_ten_link_graph_documented_properties():
    g = InterferenceGraph.ten_link()
    assert g.link_count == 10 and len(g.conflicts) == len(TEN_LINK_EDGES) == 15
    assert {j for j in range(10) if g.conflict(0, j)} == {1, 3, 6}
    assert all(bin(g.neighbor_mask(l)).count("1") == 3 for l in range(10))
    acts = enumerate_activations(g)
    assert acts == tuple(brute_force_maximal_sets(g))
    # three slots suffice to give every link its own conflict-free slot
    colourings = (c for c in itertools.product(range(3), repeat=10)
                  if all(c[i] != c[j] for i, j in g.conflicts))
    assert next(colourings, None) is not None


@given(graphs(max_links=8))
def test_activations_are_maximal_and_complete(g):
    acts = enumerate_activations(g)
    assert list(acts) == brute_force_maximal_sets(g)
    assert len(set(acts)) == len(acts)
    indep = [set(s) for s in all_independent_sets(g)]
    for a in acts:
        assert is_independent(a, g)
        assert not any(set(a) < s for s in indep)


@given(graphs(max_links=8))
def test_maximal_within_restricts_to_candidates(g):
    n = g.link_count
    mask = (1 << n) - 1 & 0b10110101
    for act in g.maximal_within(mask):
        assert all(mask >> l & 1 for l in act)
        assert is_independent(act, g)
        rest = [l for l in range(n) if mask >> l & 1 and l not in act]
        assert all(not is_independent(act + (l,), g) for l in rest)


def test_colocated_gives_singletons():
    for n in range(1, 9):
        assert enumerate_activations(InterferenceGraph.colocated(n)) == tuple((i,) for i in range(n))
