"""Reduction from 1-hop coloring of G to h-hop coloring of a larger graph G'.

The original nodes keep their addresses and lose their original edges.
Added nodes form layers U_1, U_2, ...:

* odd h, h' = (h-1)/2: U_1..U_h' are copies of V chained v - u_1 - ... - u_h',
  U_h' copies the edges of G, and one extra node u0 joins all of U_h';
* even h, h' = h/2: U_1..U_{h'-1} are copies of V chained the same way
  and U_h' has one node per edge of G, joined to both endpoint copies in
  U_{h'-1} (or to the endpoints themselves when h = 2); U_h' is a clique.

Adjacent nodes of G end up exactly h hops apart, non-adjacent ones at
least h+1, and every added node lies within h hops of every node of G',
so an optimal h-hop coloring of G' spends exactly ``m = |V' \\ V|`` colors
on added nodes and an optimal 1-hop coloring of G on the rest.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph_model import Topology
from .validity import check_h_hop, chromatic_number_bruteforce, InstanceTooLargeError

__all__ = [
    "AddedNode",
    "EquivalenceReport",
    "LemmaReport",
    "ReducedGraph",
    "equivalence_check",
    "provenance_text",
    "transform",
    "verify_lemmas",
]

CONJUNCTION = "u0"


@dataclass(frozen=True)
class AddedNode:
    id: int
    set_index: int  # i for U_i, 0 for the conjunction node
    source: str  # original address, "u-v" for an edge node, or "u0"


@dataclass(frozen=True)
class ReducedGraph:
    g: Topology
    gprime: Topology
    h: int
    original_nodes: frozenset[int]
    added_nodes: tuple[AddedNode, ...]

    @property
    def m(self) -> int:
        return len(self.added_nodes)

    @property
    def h_prime(self) -> int:
        return (self.h - 1) // 2 if self.h % 2 else self.h // 2

    def closed_form_m(self) -> int:
        """Added-node count as stated by the lemma: h'n + 1 (odd), h'n - 1 (even)."""
        n = self.g.n
        return self.h_prime * n + 1 if self.h % 2 else self.h_prime * n - 1

    def construction_m(self) -> int:
        """Added-node count implied by the layer definitions."""
        n, e = self.g.n, self.g.num_edges
        return self.h_prime * n + 1 if self.h % 2 else (self.h_prime - 1) * n + e


def transform(g: Topology, h: int) -> ReducedGraph:
    """Build G' for ``h >= 2``.

    Added addresses start above the largest original address and follow
    layer order, then source order (node address, or edge (u, v) with u < v).
    Even h needs every node to have an edge, since an isolated node has no
    path to the edge layer.
    """
    if int(h) != h or h < 2:
        raise ValueError(f"h must be an integer >= 2, got {h!r}")
    h = int(h)
    if g.n < 2:
        raise ValueError("the reduction needs at least 2 nodes")
    ids = [int(a) for a in g.ids]
    edges = g.edges()
    if h % 2 == 0 and (g.degrees == 0).any():
        lonely = [ids[i] for i in np.nonzero(g.degrees == 0)[0]]
        raise ValueError(f"even h requires every node to have an edge; isolated: {lonely[:5]}")

    next_id = max(ids) + 1
    added: list[AddedNode] = []
    new_edges: list[tuple[int, int]] = []

    def add(set_index: int, source: str) -> int:
        nonlocal next_id
        added.append(AddedNode(next_id, set_index, source))
        next_id += 1
        return next_id - 1

    copies = (h - 1) // 2 if h % 2 else h // 2 - 1
    layer = {v: v for v in ids}  # U_0 is V itself
    for i in range(1, copies + 1):
        nxt = {v: add(i, str(v)) for v in ids}
        new_edges.extend((layer[v], nxt[v]) for v in ids)  # E1 for i = 1, E2 after
        layer = nxt

    if h % 2:
        new_edges.extend((layer[u], layer[v]) for u, v in edges)  # E3
        u0 = add(0, CONJUNCTION)
        new_edges.extend((layer[v], u0) for v in ids)  # E4
    else:
        top = copies + 1
        enodes = []
        for u, v in edges:
            e = add(top, f"{u}-{v}")
            new_edges.append((layer[u], e))  # E4
            new_edges.append((layer[v], e))
            enodes.append(e)
        # E5: clique on the edge layer (E3 is contained in it)
        new_edges.extend((a, b) for k, a in enumerate(enodes) for b in enodes[k + 1 :])

    all_ids = ids + [a.id for a in added]
    gprime = Topology(all_ids, new_edges)
    return ReducedGraph(g, gprime, h, frozenset(ids), tuple(added))


def provenance_text(r: ReducedGraph) -> str:
    """Sidecar with one ``added_id set_index source`` line per added node."""
    lines = [f"# h {r.h} m {r.m}"]
    lines.extend(f"{a.id} {a.set_index} {a.source}" for a in r.added_nodes)
    return "\n".join(lines) + "\n"


@dataclass
class LemmaReport:
    h: int
    m: int
    closed_form_m: int
    construction_m: int
    added_pairwise_ok: bool  # added nodes pairwise within h-1 hops
    mixed_ok: bool  # every (original, added) pair within h hops
    c1: bool
    c2: bool
    c3: bool
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    @property
    def closed_form_matches(self) -> bool:
        return self.m == self.closed_form_m

    def summary(self) -> str:
        f = lambda b: "ok" if b else "FAIL"  # noqa: E731
        return (
            f"m={self.m} C1={f(self.c1)} C2={f(self.c2)} C3={f(self.c3)} "
            f"lemma_m={self.closed_form_m} ({'match' if self.closed_form_matches else 'differs'})"
        )


def verify_lemmas(r: ReducedGraph, max_failures: int = 20) -> LemmaReport:
    """Check the distance constraints on G' by all-pairs BFS."""
    h = r.h
    gp = r.gprime
    D = gp.all_pairs_hops()
    inf = np.iinfo(D.dtype).max if np.issubdtype(D.dtype, np.integer) else np.inf
    D = np.where(D < 0, inf, D)
    idx_orig = np.array([gp.index_of(v) for v in sorted(r.original_nodes)], dtype=np.int64)
    idx_add = np.array([gp.index_of(a.id) for a in r.added_nodes], dtype=np.int64)
    failures: list[str] = []

    def note(msg: str) -> None:
        if len(failures) < max_failures:
            failures.append(msg)

    aa = D[np.ix_(idx_add, idx_add)]
    np.fill_diagonal(aa, 0)
    bad = np.argwhere(aa > h - 1)
    added_ok = len(bad) == 0
    for i, j in bad[:max_failures]:
        if i < j:
            note(f"added {gp.ids[idx_add[i]]},{gp.ids[idx_add[j]]} at {aa[i, j]} > h-1")

    oa = D[np.ix_(idx_orig, idx_add)]
    bad = np.argwhere(oa > h)
    mixed_ok = len(bad) == 0
    for i, j in bad[:max_failures]:
        note(f"original {gp.ids[idx_orig[i]]} to added {gp.ids[idx_add[j]]} at {oa[i, j]} > h")

    G = r.g.all_pairs_hops()
    g_index = {int(a): k for k, a in enumerate(r.g.ids)}
    c1 = c2 = True
    orig_sorted = sorted(r.original_nodes)
    for a in range(len(orig_sorted)):
        for b in range(a + 1, len(orig_sorted)):
            u, v = orig_sorted[a], orig_sorted[b]
            dg = G[g_index[u], g_index[v]]
            dp = D[gp.index_of(u), gp.index_of(v)]
            if dg == 1 and dp > h:
                c1 = False
                note(f"C1: {u},{v} adjacent in G but {dp} hops in G'")
            if dg == 2 and dp < h + 1:
                c2 = False
                note(f"C2: {u},{v} 2 hops in G but {dp} hops in G'")
    c3 = bool((aa <= h).all()) and mixed_ok
    return LemmaReport(
        h=h,
        m=r.m,
        closed_form_m=r.closed_form_m(),
        construction_m=r.construction_m(),
        added_pairwise_ok=added_ok,
        mixed_ok=mixed_ok,
        c1=c1,
        c2=c2,
        c3=c3,
        failures=failures,
    )


@dataclass
class EquivalenceReport:
    h: int
    k: int  # 1-hop chromatic number of G
    k_prime: int  # h-hop chromatic number of G'
    m: int
    lifted_colors: int
    lifted_valid: bool

    @property
    def holds(self) -> bool:
        return self.k_prime == self.k + self.m and self.lifted_valid and self.lifted_colors == self.k + self.m


def equivalence_check(g: Topology, h: int, limit: int = 8) -> EquivalenceReport:
    """Compare chi_1(G) + m with chi_h(G') using the exact oracle.

    Also lifts an optimal coloring of G to G' by giving every added node a
    fresh color and checks that the result is a valid h-hop coloring.
    """
    if g.n > limit:
        raise InstanceTooLargeError(f"{g.n} nodes exceeds limit {limit}")
    r = transform(g, h)
    k, base = chromatic_number_bruteforce(g, 1, limit=limit, return_coloring=True)
    k_prime = chromatic_number_bruteforce(r.gprime, h, limit=r.gprime.n)
    lifted = np.empty(r.gprime.n, dtype=np.int64)
    for i, a in enumerate(g.ids):
        lifted[r.gprime.index_of(int(a))] = base[i]
    for j, a in enumerate(r.added_nodes):
        lifted[r.gprime.index_of(a.id)] = k + j
    valid = check_h_hop(r.gprime, lifted, h).valid
    return EquivalenceReport(h, int(k), int(k_prime), r.m, len(set(lifted.tolist())), valid)
