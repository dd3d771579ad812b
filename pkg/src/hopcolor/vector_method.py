"""Periodic h-hop colorings of the infinite grid from two generator vectors.

Two integer vectors v1, v2 span a lattice L.  Coloring a point by its coset
of L gives a periodic coloring with ``det = |x1*y2 - x2*y1|`` colors, and it
is a valid h-hop coloring exactly when no point within h hops of the origin
lies on L.  The search below minimizes ``det`` under that condition.

Coset labels are the *couples* ``(c1, c2)`` with
``c1 = (x*y1 - y*x1) mod det`` and ``c2 = (x*y2 - y*x2) mod det``.
Two points share a couple iff their difference lies on L.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping

import numpy as np

from ._backend import kernels
from .graph_model import GridSpec, disk_offsets, exact_range
from .validity import Coloring

__all__ = [
    "BoundsReport",
    "NoFeasiblePairError",
    "PairMismatchError",
    "PatternColoring",
    "VectorPair",
    "admissible",
    "bounds",
    "couple_of",
    "fixture_patterns",
    "grid_hop_distance",
    "min_admissible_determinant",
    "near_points",
    "solve_vectors",
    "tile_grid",
]

BOUND_SLACK = 1e-9


class NoFeasiblePairError(RuntimeError):
    """No admissible pair among the candidate endpoints."""


class PairMismatchError(ValueError):
    """The pair does not give a valid coloring for the requested range and h."""


@dataclass(frozen=True)
class VectorPair:
    v1: tuple[int, int]
    v2: tuple[int, int]
    det: int = field(init=False)

    def __post_init__(self):
        v1 = (int(self.v1[0]), int(self.v1[1]))
        v2 = (int(self.v2[0]), int(self.v2[1]))
        object.__setattr__(self, "v1", v1)
        object.__setattr__(self, "v2", v2)
        if v1[1] < 0 or v2[1] < 0:
            raise ValueError(f"generator vectors must have y >= 0, got {v1}, {v2}")
        d = abs(v1[0] * v2[1] - v2[0] * v1[1])
        if d == 0:
            raise ValueError(f"vectors {v1} and {v2} are collinear")
        object.__setattr__(self, "det", d)

    def couple(self, p) -> tuple[int, int]:
        return couple_of(p, self)

    def contains(self, p) -> bool:
        """True when ``p`` is a lattice point."""
        return self.couple(p) == (0, 0)

    def couples(self, xs, ys) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized couples for coordinate arrays."""
        xs = np.asarray(xs, dtype=np.int64)
        ys = np.asarray(ys, dtype=np.int64)
        (x1, y1), (x2, y2) = self.v1, self.v2
        return (xs * y1 - ys * x1) % self.det, (xs * y2 - ys * x2) % self.det


def couple_of(p, pair: VectorPair) -> tuple[int, int]:
    x, y = int(p[0]), int(p[1])
    (x1, y1), (x2, y2) = pair.v1, pair.v2
    d = pair.det
    # Python's % is non-negative, so negative cross products land in [0, d)
    return (x * y1 - y * x1) % d, (x * y2 - y * x2) % d


# hop structure of the infinite grid


def _margin(R: Fraction) -> int:
    return 2 * math.ceil(R) + 2


@lru_cache(maxsize=32)
def _hop_field(R: Fraction, radius: int) -> np.ndarray:
    """Hop distance from the origin to every point of the square window.

    Indexed ``[y + radius, x + radius]``; unreachable points hold -1.  BFS
    is confined to the window, so only points well inside it are exact.
    """
    size = 2 * radius + 1
    dist = np.full((size, size), -1, dtype=np.int32)
    dist[radius, radius] = 0
    frontier = np.zeros((size, size), dtype=bool)
    frontier[radius, radius] = True
    offsets = disk_offsets(R)
    k = 0
    while frontier.any():
        k += 1
        reach = np.zeros_like(frontier)
        for dx, dy in offsets:
            dx, dy = int(dx), int(dy)
            src = frontier[max(0, -dy) : size - max(0, dy), max(0, -dx) : size - max(0, dx)]
            reach[max(0, dy) : size - max(0, -dy), max(0, dx) : size - max(0, -dx)] |= src
        reach &= dist < 0
        dist[reach] = k
        frontier = reach
    dist.setflags(write=False)
    return dist


def grid_hop_distance(R, p, window: int | None = None) -> int:
    """Minimum hop count from (0, 0) to ``p`` on the infinite unit-disk grid.

    ``window`` is the half-width of the square searched; by default it is
    ``max(|x|, |y|)`` plus a margin of ``2*ceil(R) + 2``.
    """
    r = exact_range(R)
    if r < 1:
        raise ValueError("range must be >= 1")
    x, y = int(p[0]), int(p[1])
    reach = max(abs(x), abs(y))
    if window is None:
        window = reach + _margin(r)
    if reach > window:
        raise ValueError(f"point {(x, y)} lies outside the window of half-width {window}")
    return int(_hop_field(r, int(window))[y + window, x + window])


@lru_cache(maxsize=64)
def _near(R: Fraction, h: int) -> np.ndarray:
    rad = math.ceil(h * R)
    w = rad + _margin(R)
    field_ = _hop_field(R, w)
    ys, xs = np.nonzero((field_ >= 1) & (field_ <= h))
    pts = np.stack([xs - w, ys - w], axis=1).astype(np.int64)
    order = np.lexsort((pts[:, 0], pts[:, 1]))
    out = pts[order]
    out.setflags(write=False)
    return out


def _check_rh(R, h) -> Fraction:
    r = exact_range(R)
    if r < 1:
        raise ValueError(f"range must be >= 1, got {R!r}")
    if int(h) != h or h < 1:
        raise ValueError(f"h must be a positive integer, got {h!r}")
    return r


def near_points(R, h: int) -> np.ndarray:
    """Points at hop distance 1..h from the origin, shape (k, 2), sorted by (y, x)."""
    return _near(_check_rh(R, h), int(h))


def admissible(pair: VectorPair, R, h: int) -> bool:
    """True when coloring by ``pair``'s cosets is a valid h-hop coloring."""
    near = near_points(R, h)
    c1, c2 = pair.couples(near[:, 0], near[:, 1])
    return not bool(((c1 == 0) & (c2 == 0)).any())


# determinant minimization


def _candidates(R: Fraction, h: int, radius: int, near: np.ndarray, annulus: bool):
    xs, ys = np.meshgrid(np.arange(-radius, radius + 1), np.arange(0, radius + 1))
    xs, ys = xs.ravel(), ys.ravel()
    n2 = xs * xs + ys * ys
    keep = ((ys > 0) | (xs > 0)) & (n2 <= radius * radius)
    if annulus:
        hr2 = (h * R) ** 2
        lo = h * (float(R) - math.sqrt(2))
        keep &= np.array([Fraction(int(v)) <= hr2 for v in n2]) & (np.sqrt(n2) > lo + BOUND_SLACK)
    span = int(np.abs(near).max()) if len(near) else 0
    lut = np.zeros((2 * span + 1, 2 * span + 1), dtype=bool)
    if len(near):
        lut[near[:, 1] + span, near[:, 0] + span] = True
    inside = (np.abs(xs) <= span) & (np.abs(ys) <= span)
    is_near = np.zeros(len(xs), dtype=bool)
    is_near[inside] = lut[ys[inside] + span, xs[inside] + span]
    keep &= ~is_near
    xs, ys = xs[keep], ys[keep]
    order = np.lexsort((ys, xs))  # (x, y) ascending
    return xs[order].astype(np.int64), ys[order].astype(np.int64)


def _search(cx, cy, near, bound) -> tuple[int, VectorPair | None]:
    d, i, j = kernels.lattice_search(cx, cy, near[:, 0], near[:, 1], int(bound))
    if i < 0:
        return 0, None
    return int(d), VectorPair((int(cx[i]), int(cy[i])), (int(cx[j]), int(cy[j])))


def solve_vectors(R, h: int = 3, search: str = "full") -> VectorPair:
    """Generator pair of minimal determinant giving a valid h-hop coloring.

    Candidate endpoints are lattice points in the upper half-plane that are
    more than h hops from the origin.  The first pass uses the disk of
    radius ``ceil(h*R)``.  Every lattice has a reduced basis whose longer
    vector is at most ``2*det / (sqrt(3) * m)`` long, with ``m`` the
    shortest far point, so the disk is widened to that radius and the
    search repeated until it is large enough for the determinant found.
    Ties go to the smallest ``(det, x1, y1, x2, y2)``.

    ``search="annulus"`` only considers endpoints with
    ``h*(R - sqrt(2)) < |p| <= h*R`` and skips the widening.  It is a
    faster heuristic and can miss the optimum (for instance R=1, h=2).
    """
    r = _check_rh(R, h)
    h = int(h)
    if search not in ("full", "annulus"):
        raise ValueError(f"unknown search {search!r}")
    near = _near(r, h)
    radius = math.ceil(h * r)
    if search == "annulus":
        cx, cy = _candidates(r, h, radius, near, annulus=True)
        d, pair = _search(cx, cy, near, np.iinfo(np.int64).max)
        if pair is None:
            raise NoFeasiblePairError(f"no admissible pair in the annulus for R={R}, h={h}")
        return pair

    pair = None
    # the disk of radius ceil(h*R) can be too small (R=1, h=2 needs norm sqrt(5))
    for radius in range(radius, 4 * radius + 4):
        cx, cy = _candidates(r, h, radius, near, annulus=False)
        d, pair = _search(cx, cy, near, np.iinfo(np.int64).max)
        if pair is not None:
            break
    if pair is None:
        raise NoFeasiblePairError(f"no admissible pair within radius {radius} for R={R}, h={h}")
    shortest = math.sqrt(float((cx * cx + cy * cy).min()))
    while True:
        need = math.ceil(2 * d / (math.sqrt(3) * shortest) + BOUND_SLACK)
        if need <= radius:
            return pair
        radius = need
        cx, cy = _candidates(r, h, radius, near, annulus=False)
        d, pair = _search(cx, cy, near, d + 1)


def min_admissible_determinant(R, h: int = 3) -> tuple[int, VectorPair]:
    """Smallest admissible determinant by enumerating lattices directly.

    Every integer lattice of determinant ``d`` has exactly one basis
    ``(a, 0), (b, c)`` with ``a*c = d`` and ``0 <= b < a``.  Lattices are
    tried in order of increasing ``d``, starting from the size of the
    ``floor(h/2)``-hop ball: all of its points are pairwise within h hops,
    so they need distinct colors.  This shares nothing with
    :func:`solve_vectors` beyond the set of near points.
    """
    r = _check_rh(R, h)
    near = _near(r, int(h))
    nx, ny = near[:, 0], near[:, 1]
    half = int(h) // 2
    hops = _hop_field(r, math.ceil(half * r) + _margin(r))
    d = int(((hops >= 0) & (hops <= half)).sum())
    while True:
        for a in range(1, d + 1):
            if d % a:
                continue
            c = d // a
            on_rows = ny % c == 0
            qx, qy = nx[on_rows], ny[on_rows] // c
            for b in range(a):
                if not ((qx - b * qy) % a == 0).any():
                    return d, VectorPair((a, 0), (b, c))
        d += 1


# tiling


@dataclass(frozen=True)
class PatternColoring:
    """Coloring of the plane by couple: point -> color_of_couple[couple(point)]."""

    pair: VectorPair
    color_of_couple: Mapping[tuple[int, int], int]

    def __post_init__(self):
        d = self.pair.det
        if len(self.color_of_couple) != d:
            raise ValueError(f"expected {d} couples, got {len(self.color_of_couple)}")
        if sorted(self.color_of_couple.values()) != list(range(d)):
            raise ValueError(f"colors must be a permutation of 0..{d - 1}")
        for c1, c2 in self.color_of_couple:
            if not (0 <= c1 < d and 0 <= c2 < d):
                raise ValueError(f"couple {(c1, c2)} out of range for det {d}")

    @classmethod
    def canonical(cls, pair: VectorPair) -> "PatternColoring":
        """Colors numbered by first occurrence, scanning the fundamental
        parallelogram ``{s*v1 + t*v2 : 0 <= s, t < 1}`` row by row."""
        (x1, y1), (x2, y2) = pair.v1, pair.v2
        corners = [(0, 0), (x1, y1), (x2, y2), (x1 + x2, y1 + y2)]
        xmin, xmax = min(p[0] for p in corners), max(p[0] for p in corners)
        ymin, ymax = min(p[1] for p in corners), max(p[1] for p in corners)
        D = x1 * y2 - y1 * x2
        sign = 1 if D > 0 else -1
        D *= sign
        mapping: dict[tuple[int, int], int] = {}
        for y in range(ymin, ymax + 1):
            for x in range(xmin, xmax + 1):
                # p = s*v1 + t*v2 solved in integers: s*D, t*D
                s = sign * (x * y2 - y * x2)
                t = sign * (x1 * y - y1 * x)
                if 0 <= s < D and 0 <= t < D:
                    key = pair.couple((x, y))
                    if key not in mapping:
                        mapping[key] = len(mapping)
        return cls(pair, mapping)

    def lookup_table(self) -> np.ndarray:
        d = self.pair.det
        table = np.full((d, d), -1, dtype=np.int64)
        for (c1, c2), col in self.color_of_couple.items():
            table[c1, c2] = col
        return table

    def color_at(self, x: int, y: int) -> int:
        return self.color_of_couple[self.pair.couple((x, y))]

    def colors(self, xs, ys) -> np.ndarray:
        c1, c2 = self.pair.couples(xs, ys)
        return self.lookup_table()[c1, c2]


def tile_grid(spec: GridSpec, pair: VectorPair | PatternColoring, h: int = 3) -> Coloring:
    """Color the grid of ``spec`` periodically; node ``y*width + x`` sits at (x, y).

    A bare pair uses the canonical couple numbering.  Raises
    :class:`PairMismatchError` when the pair is not admissible for
    ``spec.range`` and ``h``.
    """
    pattern = pair if isinstance(pair, PatternColoring) else PatternColoring.canonical(pair)
    if not admissible(pattern.pair, spec.range, h):
        raise PairMismatchError(
            f"pair {pattern.pair.v1}, {pattern.pair.v2} does not give a valid {h}-hop coloring at range {spec.range}"
        )
    ys, xs = np.divmod(np.arange(spec.size, dtype=np.int64), spec.width)
    colors = pattern.colors(xs, ys)
    return Coloring({int(i): int(c) for i, c in enumerate(colors)})


# color-count bounds


@dataclass(frozen=True)
class BoundsReport:
    range: float
    h: int
    lower: float
    upper: float
    achieved: int | None = None

    @property
    def within(self) -> bool | None:
        if self.achieved is None:
            return None
        return self.lower - BOUND_SLACK <= self.achieved <= self.upper + BOUND_SLACK


def bounds(R, h: int, achieved: int | None = None) -> BoundsReport:
    """Hexagonal-packing lower bound and near-hexagonal-lattice upper bound
    on the number of colors of an optimal periodic h-hop coloring."""
    if int(h) != h or h < 1:
        raise ValueError(f"h must be a positive integer, got {h!r}")
    if achieved is not None and achieved < 1:
        raise ValueError("achieved color count must be >= 1")
    R = float(R)
    k = math.sqrt(3) / 2
    lower = k * h * h * (R - math.sqrt(2)) ** 2 if R > math.sqrt(2) else 0.0
    upper = k * h * h * R * R + 2 * h * R + (2 + h * R) * math.sqrt(2)
    return BoundsReport(R, int(h), lower, upper, achieved)


# proven patterns, colors written 1-based as rows (y, first x, colors...)

_FIXTURE_ROWS = {
    1: (((2, 2), (4, 0)), [(1, -1, [7, 2, 6, 4]), (0, -1, [3, 1, 5, 8])]),
    1.5: (
        ((4, 0), (0, 4)),
        [
            (2, -2, [10, 11, 12, 13]),
            (1, -2, [14, 5, 4, 3]),
            (0, -2, [15, 6, 1, 2]),
            (-1, -2, [16, 7, 8, 9]),
        ],
    ),
    2: (
        ((4, 3), (-3, 4)),
        [
            (3, 0, [20]),
            (2, -1, [21, 10, 19]),
            (1, -2, [22, 11, 3, 9, 18]),
            (0, -3, [23, 12, 4, 1, 2, 8, 17]),
            (-1, -2, [24, 13, 5, 7, 16]),
            (-2, -1, [25, 6, 15]),
            (-3, 0, [14]),
        ],
    ),
}


def fixture_patterns() -> list[tuple[float, PatternColoring]]:
    """The hand-proven optimal 3-hop patterns for R = 1, 1.5 and 2, 0-based."""
    out = []
    for R, ((v1, v2), rows) in _FIXTURE_ROWS.items():
        pair = VectorPair(v1, v2)
        mapping: dict[tuple[int, int], int] = {}
        for y, x0, cols in rows:
            for k, col in enumerate(cols):
                key = pair.couple((x0 + k, y))
                if key in mapping:
                    raise AssertionError(f"fixture R={R}: couple {key} repeated")
                mapping[key] = col - 1
        out.append((R, PatternColoring(pair, mapping)))
    return out
