import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hopcolor.graph_model import GridSpec, build_grid
from hopcolor.validity import check_h_hop, chromatic_number_bruteforce
from hopcolor.vector_method import (
    NoFeasiblePairError,
    PairMismatchError,
    PatternColoring,
    VectorPair,
    admissible,
    bounds,
    couple_of,
    fixture_patterns,
    grid_hop_distance,
    min_admissible_determinant,
    near_points,
    solve_vectors,
    tile_grid,
)

RANGES = [1, 1.5, 2, 2.5, 3, 3.5, 4, 4.5, 5, 5.5, 6, 6.5, 7]
DETS = {
    2: [5, 9, 13, 23, 33, 39, 53, 75, 94, 105, 124, 150, 166],
    3: [8, 16, 25, 45, 68, 80, 112, 157, 198, 224, 269, 323, 352],
}


def test_hop_distance_examples():
    assert grid_hop_distance(1, (1, 0)) == 1
    assert grid_hop_distance(1, (2, 2)) == 4
    assert grid_hop_distance(2, (2, 0)) == 1


def test_hop_distance_window_error():
    with pytest.raises(ValueError):
        grid_hop_distance(1, (10, 0), window=5)


@pytest.mark.parametrize("R", [1, 1.5, 2, 3.5])
def test_hop_distance_matches_finite_grid(R):
    spec = GridSpec(31, 31, R)
    t = build_grid(spec)
    c = 15 * 31 + 15
    dist = t.hop_distances(c)
    for u in range(0, t.n, 7):
        x, y = u % 31 - 15, u // 31 - 15
        if max(abs(x), abs(y)) <= 8:
            assert grid_hop_distance(R, (x, y)) == dist[u]


def test_hop_distance_stable_under_wider_window():
    for R in (1, 1.5, 2.5):
        for p in [(5, 3), (-7, 2), (0, 9)]:
            assert grid_hop_distance(R, p) == grid_hop_distance(R, p, window=40)


def test_near_points_counts():
    assert len(near_points(1, 3)) == 24
    assert len(near_points(1.5, 3)) == 48
    assert len(near_points(2, 3)) == 84


def test_solve_examples():
    p = solve_vectors(1, 3)
    assert p.det == 8
    assert solve_vectors(2, 3).det == 25
    assert solve_vectors(1, 2).det == 5


@pytest.mark.parametrize("h", [2, 3])
def test_solver_agrees_with_direct_lattice_enumeration(h):
    for R, det in zip(RANGES, DETS[h]):
        pair = solve_vectors(R, h)
        d, basis = min_admissible_determinant(R, h)
        assert pair.det == d == det
        assert admissible(pair, R, h) and admissible(basis, R, h)


def test_annulus_heuristic_never_beats_full_search():
    for h in (2, 3):
        for R in RANGES:
            full = solve_vectors(R, h).det
            try:
                assert solve_vectors(R, h, search="annulus").det >= full
            except NoFeasiblePairError:
                pass


def test_solver_tie_break_is_lexicographic():
    p = solve_vectors(1, 3)
    assert (p.det, p.v1, p.v2) == (8, (-3, 1), (-1, 3))


def test_couple_examples():
    pair = VectorPair((2, 2), (-2, 2))
    assert couple_of((0, 0), pair) == (0, 0)
    assert couple_of(pair.v1, pair) == (0, 0)
    assert couple_of((1, 0), pair) == (2, 2)


def test_vector_pair_validation():
    with pytest.raises(ValueError):
        VectorPair((1, 1), (2, 2))
    with pytest.raises(ValueError):
        VectorPair((1, -1), (2, 2))


@given(st.integers(-40, 40), st.integers(-40, 40), st.sampled_from([1, 1.5, 2, 3]))
def test_translation_periodicity(x, y, R):
    pair = solve_vectors(R, 3)
    pat = PatternColoring.canonical(pair)
    (x1, y1), (x2, y2) = pair.v1, pair.v2
    c = pat.color_at(x, y)
    assert c == pat.color_at(x + x1, y + y1) == pat.color_at(x + x2, y + y2)


@pytest.mark.parametrize("R,h", [(R, h) for h in (2, 3) for R in RANGES[:7]])
def test_tiling_sound_and_exact(R, h):
    pair = solve_vectors(R, h)
    side = 2 * max(map(abs, (*pair.v1, *pair.v2))) + 2
    spec = GridSpec(side, side, R)
    c = tile_grid(spec, pair, h)
    assert check_h_hop(build_grid(spec), c, h).valid
    assert c.num_colors == pair.det


def test_tiling_examples():
    for R, size, colors in [(1, 10, 8), (2, 50, 25)]:
        spec = GridSpec(size, size, R)
        c = tile_grid(spec, solve_vectors(R, 3))
        assert c.num_colors == colors and check_h_hop(build_grid(spec), c, 3).valid
    spec = GridSpec(2, 2, 2)
    c = tile_grid(spec, solve_vectors(2, 3))
    assert c.num_colors == 4 and check_h_hop(build_grid(spec), c, 3).valid


def test_tiling_rejects_mismatched_pair():
    with pytest.raises(PairMismatchError):
        tile_grid(GridSpec(10, 10, 2), solve_vectors(1, 3))


def test_canonical_numbering_is_first_occurrence():
    pat = PatternColoring.canonical(VectorPair((4, 0), (0, 4)))
    assert pat.color_at(0, 0) == 0 and pat.color_at(1, 0) == 1 and pat.color_at(0, 1) == 4


def test_small_grid_periodic_matches_oracle():
    spec = GridSpec(4, 4, 1)
    c = tile_grid(spec, solve_vectors(1, 3))
    assert c.num_colors == chromatic_number_bruteforce(build_grid(spec), 3)


def test_bounds_examples():
    b = bounds(2, 3, 25)
    assert b.lower == pytest.approx(2.67456, abs=1e-4)
    assert b.upper == pytest.approx(54.4906, abs=1e-4)
    assert b.within
    assert bounds(7, 3, 352).within
    assert bounds(1, 3).lower == 0.0
    with pytest.raises(ValueError):
        bounds(2, 0)


@pytest.mark.parametrize("h", [2, 3])
def test_bounds_sandwich(h):
    for R, det in zip(RANGES, DETS[h]):
        assert bounds(R, h, det).within


def test_bound_formula_values():
    k = math.sqrt(3) / 2
    assert bounds(3, 2).upper == pytest.approx(k * 4 * 9 + 12 + 8 * math.sqrt(2))
    assert bounds(3, 2).lower == pytest.approx(k * 4 * (3 - math.sqrt(2)) ** 2)


@pytest.mark.parametrize("R,colors", [(1, 8), (1.5, 16), (2, 25)])
def test_fixtures(R, colors):
    pat = dict(fixture_patterns())[R]
    spec = GridSpec(20, 20, R)
    c = tile_grid(spec, pat)
    assert c.num_colors == colors and check_h_hop(build_grid(spec), c, 3).valid


FIGURE_ROWS = {
    # rows of the printed neighborhood colorings, (y, first x, colors)
    1: [(1, -2, [4, 7, 2, 6, 4]), (0, -3, [5, 8, 3, 1, 5, 8, 3]), (-1, -2, [2, 6, 4, 7, 2]), (3, 0, [4]), (-3, 0, [2])],
    1.5: [(3, -3, [9, 16, 7, 8, 9, 16, 7]), (0, -3, [2, 15, 6, 1, 2, 15, 6]), (-3, -3, [3, 14, 5, 4, 3, 14, 5])],
    2: [(0, -6, [7, 16, 20, 23, 12, 4, 1, 2, 8, 17, 14, 22, 11]), (6, 0, [13]), (-6, 0, [9]), (1, -5, [8, 17, 14, 22, 11, 3, 9, 18, 25, 6, 15])],
}


@pytest.mark.parametrize("R", [1, 1.5, 2])
def test_fixtures_reproduce_printed_neighborhoods(R):
    pat = dict(fixture_patterns())[R]
    for y, x0, cols in FIGURE_ROWS[R]:
        assert [pat.color_at(x0 + k, y) + 1 for k in range(len(cols))] == cols
