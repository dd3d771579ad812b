"""Priority assignments for grid experiments.

Every strategy produces integer prio values where a larger value means a
higher priority, the convention of :class:`hopcolor.serena_sim.Priority`.
Scan-based strategies give the highest priority to the node scanned first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .graph_model import GridSpec, Topology
from .serena_sim import compute_prio_all
from .vector_method import VectorPair, solve_vectors

__all__ = ["STRATEGIES", "PriorityAssignment", "MissingCoordinatesError", "assign"]

STRATEGIES = ("random", "line", "column", "diagonal", "origin", "center", "vector")


class MissingCoordinatesError(ValueError):
    """A grid strategy was asked for a topology without coordinates."""


@dataclass(frozen=True)
class PriorityAssignment:
    strategy: str
    values: Mapping[int, int]
    addresses: Mapping[int, int] = field(default_factory=dict)
    seed: int | None = None
    pair: VectorPair | None = None

    def prio_array(self, t: Topology) -> np.ndarray:
        return np.array([self.values[int(a)] for a in t.ids], dtype=np.int64)

    def address_array(self, t: Topology) -> np.ndarray | None:
        """Protocol addresses in index order, or None when they are the node ids."""
        if not self.addresses:
            return None
        return np.array([self.addresses[int(a)] for a in t.ids], dtype=np.int64)

    def serena_kwargs(self, t: Topology) -> dict:
        return {"prio": self.prio_array(t), "addresses": self.address_array(t)}

    def to_text(self) -> str:
        head = f"# strategy {self.strategy}" + (f" seed {self.seed}" if self.seed is not None else "")
        lines = [head]
        for u in sorted(self.values):
            if self.addresses:
                lines.append(f"{u} {self.values[u]} {self.addresses[u]}")
            else:
                lines.append(f"{u} {self.values[u]}")
        return "\n".join(lines) + "\n"


def _from_order(keys: tuple, n: int) -> np.ndarray:
    """prio in which the first node of the lexicographic order gets n-1."""
    order = np.lexsort(keys[::-1])  # lexsort wants the primary key last
    prio = np.empty(n, dtype=np.int64)
    prio[order] = np.arange(n - 1, -1, -1)
    return prio


def _vector_keys(xs, ys, pair: VectorPair) -> np.ndarray:
    c1, c2 = pair.couples(xs, ys)
    return c1 * pair.det + c2


def assign(
    strategy: str,
    t: Topology,
    spec: GridSpec | None = None,
    seed: int | None = None,
    descending: bool = False,
    prio_variant: str = "sumdeg",
    pair: VectorPair | None = None,
) -> PriorityAssignment:
    """Priority values for ``strategy`` on ``t``.

    ``line`` scans rows (y then x), ``column`` scans columns, ``diagonal``
    orders by ``(x + y, x)``, ``origin`` by squared distance to (0, 0) and
    ``center`` by squared distance to the grid center, ties by address.
    ``vector`` ranks couples of the optimal 3-hop pair lexicographically
    and gives the largest couple the highest priority.  ``random`` keeps
    the protocol's own prio and shuffles the tie-break addresses with
    ``seed``.  ``descending`` reverses every grid order.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {', '.join(STRATEGIES)}")
    ids = np.asarray(t.ids, dtype=np.int64)
    n = t.n

    if strategy == "random":
        if seed is None:
            raise ValueError("random strategy requires a seed")
        rng = np.random.default_rng(seed)
        shuffled = rng.permutation(ids)
        values = compute_prio_all(t, prio_variant)
        return PriorityAssignment(
            "random",
            {int(a): int(v) for a, v in zip(ids, values)},
            {int(a): int(s) for a, s in zip(ids, shuffled)},
            seed=seed,
        )

    if t.coords is None:
        raise MissingCoordinatesError(f"strategy {strategy!r} needs grid coordinates")
    spec = spec if spec is not None else t.spec
    xs = np.asarray(t.coords[:, 0], dtype=np.int64)
    ys = np.asarray(t.coords[:, 1], dtype=np.int64)

    chosen = None
    if strategy == "line":
        keys = (ys, xs)
    elif strategy == "column":
        keys = (xs, ys)
    elif strategy == "diagonal":
        keys = (xs + ys, xs)
    elif strategy == "origin":
        keys = (xs * xs + ys * ys, ids)
    elif strategy == "center":
        if spec is None:
            raise ValueError("center strategy needs the grid spec")
        # doubled coordinates keep the center integral
        cx, cy = 2 * xs - (spec.width - 1), 2 * ys - (spec.height - 1)
        keys = (cx * cx + cy * cy, ids)
    else:
        if pair is None:
            if spec is None:
                raise ValueError("vector strategy needs the grid spec or a pair")
            pair = solve_vectors(spec.range, 3)
        chosen = pair
        # the largest couple comes first in the scan
        keys = (-_vector_keys(xs, ys, pair), ids)

    prio = _from_order(keys, n)
    if descending:
        prio = n - 1 - prio
    return PriorityAssignment(strategy, {int(a): int(p) for a, p in zip(ids, prio)}, pair=chosen)
