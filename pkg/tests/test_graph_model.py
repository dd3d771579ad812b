import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hopcolor.graph_model import (
    GridSpec,
    Topology,
    TopologyFormatError,
    UnknownNodeError,
    build_grid,
    disk_offsets,
    exact_range,
    k_hop_neighbors,
    neighborhood_up_to,
)

from conftest import random_graph


def center(spec):
    return (spec.height // 2) * spec.width + spec.width // 2


def test_grid_10x10_interior_has_four_neighbors():
    t = build_grid(GridSpec(10, 10, 1))
    assert t.n == 100
    for y in range(1, 9):
        for x in range(1, 9):
            assert len(t.neighbors(y * 10 + x)) == 4


def test_singleton_grid():
    t = build_grid(GridSpec(1, 1, 1))
    assert t.n == 1 and t.num_edges == 0
    assert k_hop_neighbors(t, 0, 1) == set()
    assert k_hop_neighbors(t, 0, 5) == set()


def test_range_two_center_degree():
    spec = GridSpec(7, 7, 2)
    assert len(build_grid(spec).neighbors(center(spec))) == 12


@pytest.mark.parametrize(
    "R,counts",
    [(1, (4, 8, 12)), (1.5, (8, 16, 24)), (2, (12, 28, 44))],
)
def test_interior_hop_counts(R, counts):
    spec = GridSpec(13, 13, R)
    t = build_grid(spec)
    u = center(spec)
    assert tuple(len(k_hop_neighbors(t, u, k)) for k in (1, 2, 3)) == counts
    assert len(neighborhood_up_to(t, u, 3)) == sum(counts)


def test_two_node_leaf_neighborhood():
    t = Topology([0, 1], [(0, 1)])
    assert neighborhood_up_to(t, 1, 3) == {0}


def test_boundary_range_is_exact():
    # 1.5 squared is exactly 2.25, so (1, 1) at distance sqrt(2) is in and (2, 1) at sqrt(5) is out
    assert exact_range(1.5) * exact_range(1.5) == exact_range("2.25")
    offs = {tuple(o) for o in disk_offsets(1.5).tolist()}
    assert (1, 1) in offs and (2, 1) not in offs and (0, 0) not in offs
    offs = {tuple(o) for o in disk_offsets(2.5).tolist()}
    assert (2, 1) in offs and (2, 2) not in offs  # 5 <= 6.25 < 8


@pytest.mark.parametrize("bad", [dict(width=0, height=3, range=1), dict(width=3, height=3, range=0.5)])
def test_gridspec_rejects(bad):
    with pytest.raises(ValueError):
        GridSpec(**bad)


def test_unknown_node_and_bad_k():
    t = build_grid(GridSpec(3, 3, 1))
    with pytest.raises(UnknownNodeError):
        k_hop_neighbors(t, 99, 1)
    with pytest.raises(ValueError):
        k_hop_neighbors(t, 0, 0)


def test_topology_rejects_self_loop_and_unknown_endpoint():
    with pytest.raises(ValueError):
        Topology([0, 1], [(0, 0)])
    with pytest.raises((ValueError, KeyError)):
        Topology([0, 1], [(0, 2)])


def test_text_round_trip_with_coordinates():
    t = build_grid(GridSpec(4, 3, 1.5))
    back = Topology.from_text(t.to_text())
    assert back.edges() == t.edges()
    assert [back.coord_of(u) for u in back.ids] == [t.coord_of(u) for u in t.ids]


@pytest.mark.parametrize(
    "text,line",
    [
        ("nodes 2 edges 1\n0\n1\n0 5\n", 4),
        ("nodes x edges 1\n", 1),
        ("nodes 2 edges 0\n0\n0\n", 3),
    ],
)
def test_text_errors_carry_line(text, line):
    with pytest.raises(TopologyFormatError) as e:
        Topology.from_text(text)
    assert e.value.line == line


@given(st.integers(1, 9), st.integers(1, 9), st.sampled_from([1, 1.5, 2, 2.5, 3]))
def test_grid_edges_match_unit_disk(w, h, R):
    t = build_grid(GridSpec(w, h, R))
    xy = np.array([t.coord_of(u) for u in t.ids])
    d2 = ((xy[:, None, :] - xy[None, :, :]) ** 2).sum(-1)
    expected = (d2 > 0) & (d2 <= R * R + 1e-9)
    adj = np.zeros((t.n, t.n), dtype=bool)
    for u, v in t.edges():
        adj[u, v] = adj[v, u] = True
    assert (adj == expected).all()
    assert (adj == adj.T).all()


@given(st.integers(0, 2**32 - 1), st.integers(2, 14), st.floats(0.1, 0.6))
def test_k_hop_sets_partition_component(seed, n, p):
    t = random_graph(np.random.default_rng(seed), n, p)
    for u in t.ids:
        u = int(u)
        dist = t.hop_distances(u)
        component = {int(a) for a, d in zip(t.ids, dist) if d >= 0}
        seen = {u}
        for k in range(1, n):
            layer = k_hop_neighbors(t, u, k)
            assert not (layer & seen)
            seen |= layer
        assert seen == component


@pytest.mark.parametrize("R", [1.5, 2, 2.5, 3])
def test_euclidean_reach(R):
    """Grid points within (R - sqrt(2)) * h are at most h hops apart."""
    spec = GridSpec(12, 12, R)
    t = build_grid(spec)
    xy = np.array([t.coord_of(u) for u in t.ids], dtype=float)
    D = t.all_pairs_hops()
    d = np.sqrt(((xy[:, None, :] - xy[None, :, :]) ** 2).sum(-1))
    for h in (1, 2, 3, 4):
        close = d <= (R - math.sqrt(2)) * h
        assert (D[close] <= h).all()
