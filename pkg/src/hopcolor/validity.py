"""h-hop coloring validity and an exact chromatic-number oracle."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from ._backend import kernels
from .graph_model import Topology, TopologyFormatError

__all__ = [
    "Coloring",
    "ColoringFormatError",
    "InstanceTooLargeError",
    "PartialColoringError",
    "ValidityReport",
    "Violation",
    "check_h_hop",
    "chromatic_number_bruteforce",
    "greedy_color",
    "power_graph",
]


class PartialColoringError(ValueError):
    """The coloring does not cover every node of the topology."""


class InstanceTooLargeError(ValueError):
    """The exact oracle refuses instances above its node limit."""


class ColoringFormatError(TopologyFormatError):
    pass


def _check_h(h: int) -> None:
    if int(h) != h or h < 1:
        raise ValueError(f"h must be a positive integer, got {h!r}")


@dataclass(frozen=True)
class Coloring:
    """Node address -> color (0-based).  Rendered 1-based by ``display``."""

    assignment: Mapping[int, int]

    @classmethod
    def from_array(cls, t: Topology, colors) -> "Coloring":
        colors = np.asarray(colors)
        if len(colors) != t.n:
            raise PartialColoringError(f"expected {t.n} colors, got {len(colors)}")
        return cls({int(a): int(c) for a, c in zip(t.ids, colors)})

    def to_array(self, t: Topology) -> np.ndarray:
        """Colors in index order; raises if any node of ``t`` is missing."""
        missing = [int(a) for a in t.ids if int(a) not in self.assignment]
        if missing:
            raise PartialColoringError(f"{len(missing)} uncolored node(s), first {missing[0]}")
        return np.array([self.assignment[int(a)] for a in t.ids], dtype=np.int64)

    @property
    def num_colors(self) -> int:
        return len(set(self.assignment.values()))

    def __getitem__(self, u: int) -> int:
        return self.assignment[u]

    def __len__(self) -> int:
        return len(self.assignment)

    def display(self, u: int) -> int:
        return self.assignment[u] + 1

    def to_text(self) -> str:
        lines = [f"colors {self.num_colors}"]
        lines.extend(f"{u} {self.assignment[u]}" for u in sorted(self.assignment))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Coloring":
        rows = [(k + 1, ln.split()) for k, ln in enumerate(text.splitlines())]
        rows = [(k, p) for k, p in rows if p and not p[0].startswith("#")]
        if not rows or len(rows[0][1]) != 2 or rows[0][1][0] != "colors":
            raise ColoringFormatError("expected header 'colors K'", rows[0][0] if rows else 1)
        out: dict[int, int] = {}
        for k, parts in rows[1:]:
            if len(parts) != 2:
                raise ColoringFormatError("expected 'id color'", k)
            try:
                u, c = int(parts[0]), int(parts[1])
            except ValueError:
                raise ColoringFormatError("id and color must be integers", k) from None
            if c < 0:
                raise ColoringFormatError("colors are natural integers", k)
            if u in out:
                raise ColoringFormatError(f"node {u} colored twice", k)
            out[u] = c
        declared = int(rows[0][1][1])
        col = cls(out)
        if declared != col.num_colors:
            raise ColoringFormatError(f"header declares {declared} colors, found {col.num_colors}", rows[0][0])
        return col


@dataclass(frozen=True)
class Violation:
    u: int
    v: int
    hops: int
    color: int


@dataclass(frozen=True)
class ValidityReport:
    h: int
    violations: list[Violation] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.valid


def check_h_hop(t: Topology, c: Coloring | np.ndarray, h: int) -> ValidityReport:
    """Every pair at hop distance 1..h sharing a color, ordered by (u, v)."""
    _check_h(h)
    colors = c.to_array(t) if isinstance(c, Coloring) else np.asarray(c)
    if len(colors) != t.n:
        raise PartialColoringError(f"expected {t.n} colors, got {len(colors)}")
    ptr, flat, dist = t.ball(h)
    rows = np.repeat(np.arange(t.n), np.diff(ptr))
    clash = (colors[rows] == colors[flat]) & (rows < flat)
    out = [
        Violation(int(t.ids[i]), int(t.ids[j]), int(d), int(colors[i]))
        for i, j, d in zip(rows[clash], flat[clash], dist[clash])
    ]
    return ValidityReport(h, out)


def power_graph(t: Topology, h: int) -> Topology:
    """Same nodes; edge iff hop distance in 1..h."""
    _check_h(h)
    ptr, flat, _ = t.ball(h)
    rows = np.repeat(np.arange(t.n), np.diff(ptr))
    keep = rows < flat
    return Topology._from_index_pairs(t.ids, rows[keep], flat[keep], coords=t.coords, spec=t.spec)


def greedy_color(t: Topology, h: int, order=None) -> np.ndarray:
    """First-fit h-hop coloring in ``order`` (node indices); index order by default."""
    _check_h(h)
    ptr, flat, _ = t.ball(h)
    colors = np.full(t.n, -1, dtype=np.int64)
    for i in range(t.n) if order is None else order:
        used = set(colors[flat[ptr[i] : ptr[i + 1]]].tolist())
        c = 0
        while c in used:
            c += 1
        colors[i] = c
    return colors


def chromatic_number_bruteforce(t: Topology, h: int, limit: int = 16, return_coloring: bool = False):
    """Exact minimum number of colors of a valid h-hop coloring.

    Backtracks over nodes in address order with colors tried ascending, the
    first node fixed to color 0, pruning at the incumbent.  A greedy coloring
    seeds the incumbent and the largest clique found greedily is a lower
    bound for early exit.
    """
    _check_h(h)
    if t.n > limit:
        raise InstanceTooLargeError(f"{t.n} nodes exceeds oracle limit {limit}")
    if t.n == 0:
        return (0, np.zeros(0, np.int64)) if return_coloring else 0
    ptr, flat, _ = t.ball(h)
    upper = greedy_color(t, h)
    lower = _greedy_clique(ptr, flat, t.n)
    k, colors = kernels.exact_color(ptr, flat, lower, upper)
    if return_coloring:
        return int(k), np.asarray(colors, dtype=np.int64)
    return int(k)


def _greedy_clique(ptr, flat, n) -> int:
    best = 1
    adj = [set(flat[ptr[i] : ptr[i + 1]].tolist()) for i in range(n)]
    for s in range(n):
        clique = [s]
        for v in sorted(adj[s], key=lambda v: -len(adj[v])):
            if all(v in adj[u] for u in clique):
                clique.append(v)
        best = max(best, len(clique))
    return best
