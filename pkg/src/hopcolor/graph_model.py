"""Topologies, unit-disk grid generation and k-hop neighborhoods.

A :class:`Topology` stores nodes by address with an immutable CSR adjacency
over node indices.  Index ``i`` is the i-th address in ascending order, so
address order and index order agree everywhere in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from ._backend import kernels

__all__ = [
    "GridSpec",
    "Topology",
    "TopologyFormatError",
    "UnknownNodeError",
    "build_grid",
    "disk_offsets",
    "k_hop_neighbors",
    "neighborhood_up_to",
    "exact_range",
]


class UnknownNodeError(KeyError):
    """Raised when an address is not part of the topology."""


class TopologyFormatError(ValueError):
    """Malformed topology text; ``line`` is 1-based."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


def exact_range(R) -> Fraction:
    """Range as an exact rational.

    Floats go through ``str`` so that ``1.5`` becomes exactly 3/2 rather than
    its binary approximation.
    """
    if isinstance(R, Fraction):
        return R
    if isinstance(R, int):
        return Fraction(R)
    return Fraction(str(R))


def disk_offsets(R) -> np.ndarray:
    """Integer offsets (dx, dy) with 0 < dx² + dy² ≤ R², shape (k, 2).

    Sorted by (dy, dx) for reproducibility.
    """
    r = exact_range(R)
    r2 = r * r
    span = math.floor(r)
    out = [
        (dx, dy)
        for dy in range(-span, span + 1)
        for dx in range(-span, span + 1)
        if 0 < dx * dx + dy * dy and dx * dx + dy * dy <= r2
    ]
    return np.array(out, dtype=np.int64).reshape(-1, 2)


@dataclass(frozen=True)
class GridSpec:
    """Rectangular grid with unit step and transmission range ``range``."""

    width: int
    height: int
    range: float

    def __post_init__(self):
        if int(self.width) != self.width or self.width < 1:
            raise ValueError(f"width must be a positive integer, got {self.width!r}")
        if int(self.height) != self.height or self.height < 1:
            raise ValueError(f"height must be a positive integer, got {self.height!r}")
        if not (exact_range(self.range) >= 1):
            raise ValueError(f"range must be >= 1, got {self.range!r}")

    @property
    def size(self) -> int:
        return self.width * self.height


class Topology:
    """Undirected simple graph over integer addresses, optionally with coordinates.

    Instances are treated as immutable.  ``indptr``/``indices`` form a CSR
    adjacency over node indices with sorted rows.
    """

    def __init__(
        self,
        ids: Sequence[int],
        edges: Iterable[tuple[int, int]],
        coords: np.ndarray | None = None,
        spec: GridSpec | None = None,
    ):
        ids_arr = np.asarray(list(ids), dtype=np.int64)
        order = np.argsort(ids_arr, kind="stable")
        ids_arr = ids_arr[order]
        if len(ids_arr) and (ids_arr[0] < 0):
            raise ValueError("addresses must be natural integers")
        if len(np.unique(ids_arr)) != len(ids_arr):
            raise ValueError("duplicate node address")
        self.ids = ids_arr
        self._index = {int(a): i for i, a in enumerate(ids_arr)}
        if coords is not None:
            coords = np.asarray(coords, dtype=np.int64).reshape(-1, 2)[order]
            if len(coords) != len(ids_arr):
                raise ValueError("coords length does not match node count")
        self.coords = coords
        self.spec = spec

        pairs = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if len(pairs):
            src = np.array([self.index_of(int(u)) for u in pairs[:, 0]], dtype=np.int64)
            dst = np.array([self.index_of(int(v)) for v in pairs[:, 1]], dtype=np.int64)
        else:
            src = dst = np.zeros(0, dtype=np.int64)
        self._set_adjacency(src, dst)

    @classmethod
    def _from_index_pairs(cls, ids, src, dst, coords=None, spec=None) -> "Topology":
        # fast path for generated graphs: ids already sorted, pairs are indices
        t = cls.__new__(cls)
        t.ids = np.asarray(ids, dtype=np.int64)
        t._index = {int(a): i for i, a in enumerate(t.ids)}
        t.coords = None if coords is None else np.asarray(coords, dtype=np.int64)
        t.spec = spec
        t._set_adjacency(np.asarray(src, dtype=np.int64), np.asarray(dst, dtype=np.int64))
        return t

    def _set_adjacency(self, src: np.ndarray, dst: np.ndarray) -> None:
        if np.any(src == dst):
            bad = int(self.ids[src[src == dst][0]])
            raise ValueError(f"self-loop on node {bad}")
        n = len(self.ids)
        a = np.concatenate([src, dst])
        b = np.concatenate([dst, src])
        key = np.unique(a * max(n, 1) + b)
        a = key // max(n, 1)
        b = key % max(n, 1)
        self.indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(a, minlength=n), out=self.indptr[1:])
        self.indices = b.astype(np.int32)
        self.indptr.flags.writeable = False
        self.indices.flags.writeable = False

    # basic queries

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def num_edges(self) -> int:
        return len(self.indices) // 2

    def __len__(self) -> int:
        return self.n

    def __contains__(self, u) -> bool:
        return int(u) in self._index

    def index_of(self, u: int) -> int:
        try:
            return self._index[int(u)]
        except KeyError:
            raise UnknownNodeError(u) from None

    def neighbor_indices(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i] : self.indptr[i + 1]]

    def neighbors(self, u: int) -> set[int]:
        return {int(self.ids[j]) for j in self.neighbor_indices(self.index_of(u))}

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def has_edge(self, u: int, v: int) -> bool:
        i, j = self.index_of(u), self.index_of(v)
        row = self.neighbor_indices(i)
        k = np.searchsorted(row, j)
        return bool(k < len(row) and row[k] == j)

    def edges(self) -> list[tuple[int, int]]:
        """Edges as address pairs (u < v), sorted."""
        out = []
        for i in range(self.n):
            for j in self.neighbor_indices(i):
                if i < j:
                    out.append((int(self.ids[i]), int(self.ids[j])))
        return out

    def coord_of(self, u: int) -> tuple[int, int] | None:
        if self.coords is None:
            return None
        x, y = self.coords[self.index_of(u)]
        return int(x), int(y)

    # hop structure

    def hop_distances(self, u: int, limit: int = -1) -> np.ndarray:
        """Hop distance from ``u`` to every index; -1 when unreachable or beyond ``limit``."""
        return kernels.bfs_dist(self.indptr, self.indices, self.index_of(u), int(limit))

    def ball(self, h: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """CSR ``(indptr, indices, dist)`` of all pairs at hop distance 1..h."""
        cache = self.__dict__.setdefault("_balls", {})
        if h not in cache:
            ptr, flat, dist = kernels.ball_csr(self.indptr, self.indices, int(h))
            for arr in (ptr, flat, dist):
                arr.flags.writeable = False
            cache[h] = (ptr, flat, dist)
        return cache[h]

    def all_pairs_hops(self) -> np.ndarray:
        """Dense (n, n) hop-distance matrix, -1 for unreachable.  Small graphs only."""
        return np.stack([kernels.bfs_dist(self.indptr, self.indices, i, -1) for i in range(self.n)]) if self.n else np.zeros((0, 0), np.int32)

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        return bool(np.all(kernels.bfs_dist(self.indptr, self.indices, 0, -1) >= 0))

    # text interchange

    def to_text(self) -> str:
        lines = [f"nodes {self.n} edges {self.num_edges}"]
        for i, a in enumerate(self.ids):
            if self.coords is not None:
                x, y = self.coords[i]
                lines.append(f"{a} {x} {y}")
            else:
                lines.append(f"{a}")
        lines.extend(f"{u} {v}" for u, v in self.edges())
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Topology":
        rows = [(k + 1, ln.split()) for k, ln in enumerate(text.splitlines())]
        rows = [(k, parts) for k, parts in rows if parts and not parts[0].startswith("#")]
        if not rows:
            raise TopologyFormatError("empty input", 1)
        k, head = rows[0]
        if len(head) != 4 or head[0] != "nodes" or head[2] != "edges":
            raise TopologyFormatError("expected header 'nodes N edges M'", k)
        try:
            n, m = int(head[1]), int(head[3])
        except ValueError:
            raise TopologyFormatError("node/edge counts must be integers", k) from None
        if len(rows) - 1 != n + m:
            last = rows[-1][0] if len(rows) > 1 else k
            raise TopologyFormatError(f"expected {n} node lines and {m} edge lines, found {len(rows) - 1} lines", last)
        ids, coords, edges = [], [], []
        with_coords = None
        for k, parts in rows[1 : n + 1]:
            if len(parts) not in (1, 3):
                raise TopologyFormatError("node line must be 'id' or 'id x y'", k)
            if with_coords is None:
                with_coords = len(parts) == 3
            elif with_coords != (len(parts) == 3):
                raise TopologyFormatError("mixed node lines with and without coordinates", k)
            try:
                vals = [int(p) for p in parts]
            except ValueError:
                raise TopologyFormatError("node fields must be integers", k) from None
            if vals[0] in ids:
                raise TopologyFormatError(f"duplicate node {vals[0]}", k)
            ids.append(vals[0])
            if with_coords:
                coords.append(vals[1:])
        known = set(ids)
        for k, parts in rows[n + 1 :]:
            if len(parts) != 2:
                raise TopologyFormatError("edge line must be 'id id'", k)
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise TopologyFormatError("edge endpoints must be integers", k) from None
            if u not in known or v not in known:
                raise TopologyFormatError(f"edge references unknown node ({u}, {v})", k)
            if u == v:
                raise TopologyFormatError(f"self-loop on node {u}", k)
            edges.append((u, v))
        return cls(ids, edges, coords=np.array(coords) if with_coords else None)

    def __repr__(self) -> str:
        return f"Topology(n={self.n}, edges={self.num_edges})"


def build_grid(spec: GridSpec) -> Topology:
    """Unit-disk grid: node ``y*width + x`` at (x, y), edge iff 0 < d ≤ range."""
    W, H = spec.width, spec.height
    ys, xs = np.divmod(np.arange(W * H, dtype=np.int64), W)
    coords = np.stack([xs, ys], axis=1)
    src_parts, dst_parts = [], []
    for dx, dy in disk_offsets(spec.range):
        if (dy, dx) <= (0, 0):
            continue  # each undirected edge once
        ok = (xs + dx >= 0) & (xs + dx < W) & (ys + dy < H) & (ys + dy >= 0)
        s = np.nonzero(ok)[0]
        src_parts.append(s)
        dst_parts.append(s + dy * W + dx)
    src = np.concatenate(src_parts) if src_parts else np.zeros(0, np.int64)
    dst = np.concatenate(dst_parts) if dst_parts else np.zeros(0, np.int64)
    return Topology._from_index_pairs(np.arange(W * H), src, dst, coords=coords, spec=spec)


def _check_hops(k: int, name: str) -> None:
    if int(k) != k or k < 1:
        raise ValueError(f"{name} must be a positive integer, got {k!r}")


def k_hop_neighbors(t: Topology, u: int, k: int) -> set[int]:
    """Nodes at minimum hop distance exactly ``k`` from ``u``."""
    _check_hops(k, "k")
    dist = t.hop_distances(u, limit=k)
    return {int(a) for a in t.ids[dist == k]}


def neighborhood_up_to(t: Topology, u: int, h: int) -> set[int]:
    """Nodes at hop distance 1..h from ``u``."""
    _check_hops(h, "h")
    dist = t.hop_distances(u, limit=h)
    return {int(a) for a in t.ids[dist >= 1]}
