import numpy as np
import pytest

from hopcolor.graph_model import GridSpec, Topology, build_grid
from hopcolor.priority import STRATEGIES, MissingCoordinatesError, assign
from hopcolor.serena_sim import priority_ranks, run_serena
from hopcolor.validity import check_h_hop


def run(strategy, W, R, seed=None, **kw):
    spec = GridSpec(W, W, R)
    t = build_grid(spec)
    a = assign(strategy, t, spec, seed=seed, **kw)
    r = run_serena(t, **a.serena_kwargs(t))
    assert check_h_hop(t, r.coloring, 3).valid
    return r


def test_line_10x10():
    assert run("line", 10, 1).num_colors == 8


def test_diagonal_10x10_range_two_is_valid():
    # the exact count depends on within-diagonal tie order; see the acceptance suite
    assert run("diagonal", 10, 2).num_colors >= 25


@pytest.mark.parametrize("strategy", STRATEGIES)
def test_strict_total_order(strategy):
    spec = GridSpec(7, 5, 1.5)
    t = build_grid(spec)
    a = assign(strategy, t, spec, seed=3)
    ranks = priority_ranks(a.prio_array(t), a.address_array(t) if a.addresses else t.ids)
    assert sorted(ranks.tolist()) == list(range(t.n))


@pytest.mark.parametrize("strategy", STRATEGIES)
def test_deterministic(strategy):
    spec = GridSpec(6, 6, 2)
    t = build_grid(spec)
    assert assign(strategy, t, spec, seed=9) == assign(strategy, t, spec, seed=9)


def test_scan_orders():
    spec = GridSpec(3, 2, 1)
    t = build_grid(spec)
    line = assign("line", t, spec).values
    assert sorted(line, key=lambda u: -line[u]) == [0, 1, 2, 3, 4, 5]
    col = assign("column", t, spec).values
    assert sorted(col, key=lambda u: -col[u]) == [0, 3, 1, 4, 2, 5]
    diag = assign("diagonal", t, spec).values
    assert sorted(diag, key=lambda u: -diag[u]) == [0, 3, 1, 4, 2, 5]
    rev = assign("line", t, spec, descending=True).values
    assert sorted(rev, key=lambda u: -rev[u]) == [5, 4, 3, 2, 1, 0]


def test_origin_and_center():
    spec = GridSpec(5, 5, 1)
    t = build_grid(spec)
    o = assign("origin", t, spec).values
    assert max(o, key=o.get) == 0
    c = assign("center", t, spec).values
    assert max(c, key=c.get) == 12


def test_vector_ranks_couples():
    spec = GridSpec(8, 8, 1)
    t = build_grid(spec)
    a = assign("vector", t, spec)
    pair = a.pair
    keys = {u: pair.couple(t.coord_of(u)) for u in a.values}
    top = max(a.values, key=a.values.get)
    assert keys[top] == max(keys.values())


def test_random_needs_seed_and_shuffles_addresses():
    spec = GridSpec(5, 5, 1)
    t = build_grid(spec)
    with pytest.raises(ValueError):
        assign("random", t, spec)
    a = assign("random", t, spec, seed=1)
    b = assign("random", t, spec, seed=2)
    assert a.values == b.values and a.addresses != b.addresses
    assert sorted(a.addresses.values()) == list(range(25))


def test_grid_strategy_needs_coordinates():
    t = Topology([0, 1], [(0, 1)])
    with pytest.raises(MissingCoordinatesError):
        assign("line", t)
    assign("random", t, seed=0)


def test_dump_format():
    spec = GridSpec(2, 1, 1)
    t = build_grid(spec)
    assert assign("line", t, spec).to_text() == "# strategy line\n0 1\n1 0\n"
