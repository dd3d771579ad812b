"""Synchronous simulation of the SERENA 3-hop coloring protocol.

Two engines produce identical results:

* ``"kernel"`` runs the whole protocol in the compiled (or pure Python)
  kernel over node ranks; it is the fast path used by experiments.
* ``"objects"`` runs one :class:`NodeState` per node exchanging real
  :class:`ColorMessage` objects, optionally through the binary codec.  It is
  the readable reference and exercises :func:`local_update` and the rules.

Round timing.  Before round 1 every node runs three silent exchanges so the
priority lists reach their fixed point for the all-uncolored network.  In
round ``r`` each node sends a message describing its state at the end of
round ``r-1``, updates from the messages it received, then colors if rule R1
allows.  A node that colors in round ``r`` therefore announces its color in
round ``r+1``.  The reported round count is the round in which the last node
colors.

Colored-node filtering.  A node discards priorities of nodes it knows to be
colored: itself, colored 1-hop neighbors, and any entry that disappeared
from a neighbor's ``max2_prio1`` since that neighbor's previous message.  A
top-2 list over uncolored neighbors loses an entry only when that entry
colors, so the disappearance is proof of coloring one hop further away.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field, replace
from functools import total_ordering
from typing import Iterable, Mapping, Sequence

import numpy as np

from ._backend import kernels
from .graph_model import Topology
from .validity import Coloring

__all__ = [
    "ColorMessage",
    "DecodeError",
    "EncodeError",
    "NodeState",
    "NonTerminationError",
    "Priority",
    "ProtocolViolationError",
    "SerenaResult",
    "compute_prio",
    "compute_prio_all",
    "decode",
    "encode",
    "initial_state",
    "local_update",
    "make_message",
    "priority_ranks",
    "rule_r1",
    "rule_r2",
    "property1_violations",
    "run_naive",
    "run_serena",
]

MSG_COLOR = 0x01
UNCOLORED = 0xFF
MAX_WIRE_COLOR = 254
INIT_EXCHANGES = 3
SETTLE_LIMIT = 16


class ProtocolViolationError(RuntimeError):
    """A node received a message from a node that is not a 1-hop neighbor."""


class NonTerminationError(RuntimeError):
    """``max_rounds`` elapsed before every node colored."""

    def __init__(self, rounds: int, trace: list, uncolored: list[int]):
        self.rounds = rounds
        self.trace = trace
        self.uncolored = uncolored
        super().__init__(f"{len(uncolored)} node(s) still uncolored after {rounds} rounds")


@total_ordering
@dataclass(frozen=True)
class Priority:
    """(prio, address).  ``a > b`` means a outranks b: higher prio, then lower address."""

    prio: int
    address: int

    @property
    def sort_key(self) -> tuple[int, int]:
        """Ascending sort puts the highest priority first."""
        return (-self.prio, self.address)

    def outranks(self, other: "Priority") -> bool:
        return self.sort_key < other.sort_key

    def __lt__(self, other: "Priority") -> bool:
        return other.outranks(self)


# priorities


def compute_prio(t: Topology, u: int, variant: str = "sumdeg") -> int:
    """Native SERENA priority of ``u``.

    ``sumdeg``: sum of the degrees of u's 1-hop neighbors.
    ``card2hop``: number of nodes within 2 hops of u (u excluded).
    """
    i = t.index_of(u)
    if variant == "sumdeg":
        return int(t.degrees[t.neighbor_indices(i)].sum())
    if variant == "card2hop":
        ptr, _, _ = t.ball(2)
        return int(ptr[i + 1] - ptr[i])
    raise ValueError(f"unknown prio variant {variant!r}")


def compute_prio_all(t: Topology, variant: str = "sumdeg") -> np.ndarray:
    """``compute_prio`` for every node, in index order."""
    if variant == "sumdeg":
        deg = t.degrees
        rows = np.repeat(np.arange(t.n), deg)
        return np.bincount(rows, weights=deg[t.indices], minlength=t.n).astype(np.int64)
    if variant == "card2hop":
        return np.diff(t.ball(2)[0]).astype(np.int64)
    raise ValueError(f"unknown prio variant {variant!r}")


def priority_ranks(prio: np.ndarray, addresses: np.ndarray) -> np.ndarray:
    """Rank of each node in the priority order, 0 = highest."""
    order = np.lexsort((addresses, -np.asarray(prio, dtype=np.int64)))
    rank = np.empty(len(order), dtype=np.int32)
    rank[order] = np.arange(len(order), dtype=np.int32)
    return rank


# messages and codec


@dataclass(frozen=True)
class ColorMessage:
    """The per-round broadcast.  Bitmaps are integers with bit i for color i."""

    originator: int
    color: int | None
    prio: int
    max2_prio1: tuple[Priority, ...] = ()
    max2_prio2: tuple[Priority, ...] = ()
    bitmap1: int = 0
    bitmap2: int = 0
    type: int = MSG_COLOR


class EncodeError(ValueError):
    pass


class DecodeError(ValueError):
    """Malformed octets; ``field`` names the field being read."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


def _bitmap_octets(bits: int) -> bytes:
    # LSB-first: color i lives in octet i // 8, bit i % 8
    n = (bits.bit_length() + 7) // 8
    return bits.to_bytes(n, "little")


def encode(m: ColorMessage) -> bytes:
    """Serialize a message.  All multi-octet integers are big-endian.

    Layout::

        type            1 octet
        originator      2 octets
        color           1 octet   (0xFF = uncolored)
        prio            2 octets
        size_max2_prio1 1 octet   (0..2), then per entry prio:2 address:2
        size_max2_prio2 1 octet   (0..2), then per entry prio:2 address:2
        size_bitmap1    1 octet   (octet count), then the bitmap octets
        size_bitmap2    1 octet   (octet count), then the bitmap octets

    Bitmaps are written with the fewest octets that hold their highest set
    bit, so an empty bitmap has size 0.
    """

    def u(fieldname, value, width):
        if not 0 <= value < 1 << (8 * width):
            raise EncodeError(f"{fieldname}={value} does not fit in {width} octet(s)")
        return value.to_bytes(width, "big")

    if m.color is not None and not 0 <= m.color <= MAX_WIRE_COLOR:
        raise EncodeError(f"color={m.color} outside 0..{MAX_WIRE_COLOR}")
    out = bytearray()
    out += u("type", m.type, 1)
    out += u("originator", m.originator, 2)
    out += u("color", UNCOLORED if m.color is None else m.color, 1)
    out += u("prio", m.prio, 2)
    for name, entries in (("max2_prio1", m.max2_prio1), ("max2_prio2", m.max2_prio2)):
        if len(entries) > 2:
            raise EncodeError(f"{name} holds {len(entries)} entries, at most 2")
        out += u("size_" + name, len(entries), 1)
        for p in entries:
            out += u(name, p.prio, 2) + u(name, p.address, 2)
    for name, bits in (("bitmap1", m.bitmap1), ("bitmap2", m.bitmap2)):
        if bits < 0:
            raise EncodeError(f"{name} must be non-negative")
        octets = _bitmap_octets(bits)
        out += u("size_" + name, len(octets), 1)
        out += octets
    return bytes(out)


def decode(data: bytes) -> ColorMessage:
    """Inverse of :func:`encode`; rejects truncation, bad sizes and trailing octets."""
    pos = 0

    def take(fieldname, width):
        nonlocal pos
        if pos + width > len(data):
            raise DecodeError(fieldname, f"truncated at octet {pos}, need {width} more")
        chunk = data[pos : pos + width]
        pos += width
        return chunk

    mtype = take("type", 1)[0]
    if mtype != MSG_COLOR:
        raise DecodeError("type", f"unknown message type 0x{mtype:02x}")
    originator = struct.unpack(">H", take("originator", 2))[0]
    raw_color = take("color", 1)[0]
    prio = struct.unpack(">H", take("prio", 2))[0]
    lists = []
    for name in ("max2_prio1", "max2_prio2"):
        size = take("size_" + name, 1)[0]
        if size > 2:
            raise DecodeError("size_" + name, f"{size} entries, at most 2")
        entries = []
        for _ in range(size):
            p, a = struct.unpack(">HH", take(name, 4))
            entries.append(Priority(p, a))
        lists.append(tuple(entries))
    maps = []
    for name in ("bitmap1", "bitmap2"):
        size = take("size_" + name, 1)[0]
        octets = take(name, size)
        if size and octets[-1] == 0:
            raise DecodeError("size_" + name, "bitmap has a trailing zero octet")
        maps.append(int.from_bytes(octets, "little"))
    if pos != len(data):
        raise DecodeError("trailer", f"{len(data) - pos} unexpected trailing octet(s)")
    return ColorMessage(
        originator=originator,
        color=None if raw_color == UNCOLORED else raw_color,
        prio=prio,
        max2_prio1=lists[0],
        max2_prio2=lists[1],
        bitmap1=maps[0],
        bitmap2=maps[1],
        type=mtype,
    )


# per-node state and rules


@dataclass(frozen=True)
class NodeState:
    me: int
    priority: Priority
    neighbors: frozenset[int]
    color: int | None = None
    neighbor_cache: Mapping[int, ColorMessage] = field(default_factory=dict)
    previous_cache: Mapping[int, ColorMessage] = field(default_factory=dict)
    max2_prio1: tuple[Priority, ...] = ()
    max2_prio2: tuple[Priority, ...] = ()
    max_prio3: Priority | None = None
    bitmap1: int = 0
    bitmap2: int = 0
    bitmap3: int = 0
    round: int = 0
    terminated: bool = False
    guarded: bool = True

    @property
    def forbidden(self) -> int:
        return self.bitmap1 | self.bitmap2 | self.bitmap3

    @property
    def lists_empty(self) -> bool:
        return not self.max2_prio1 and not self.max2_prio2 and self.max_prio3 is None


def initial_state(
    me: int, priority: Priority, neighbors: Iterable[int], round: int = 0, guarded: bool = True
) -> NodeState:
    return NodeState(me=me, priority=priority, neighbors=frozenset(neighbors), round=round, guarded=guarded)


def make_message(s: NodeState) -> ColorMessage:
    return ColorMessage(
        originator=s.me,
        color=s.color,
        prio=s.priority.prio,
        max2_prio1=s.max2_prio1,
        max2_prio2=s.max2_prio2,
        bitmap1=s.bitmap1,
        bitmap2=s.bitmap2,
    )


def _top(entries: Iterable[Priority], k: int) -> tuple[Priority, ...]:
    return tuple(sorted(set(entries), key=lambda p: p.sort_key)[:k])


def _certain_top2(lists, known, guarded) -> tuple[Priority, ...]:
    """Top-2 of the union of received top-2 lists, minus known-colored nodes.

    A full list may have truncated nodes that rank below its lower entry.
    When guarded, the result keeps only entries that rank at or above the
    best such truncation point, and is padded with the truncating list's
    own entries so that it stays full.
    """
    visible = _top((p for lst in lists for p in lst if p not in known), 2)
    if not guarded:
        return visible
    full = [lst for lst in lists if len(lst) == 2]
    if not full:
        return visible
    cut = min(full, key=lambda lst: (lst[1].sort_key, lst[0].sort_key))
    tau = cut[1]
    if len(visible) == 2 and not tau.outranks(visible[1]):
        return visible
    if visible and visible[0].outranks(tau):
        return (visible[0], tau)
    return cut


def _certain_top1(lists, known, guarded) -> Priority | None:
    cands = [lst[0] for lst in lists if lst and lst[0] not in known]
    for lst in lists:
        if len(lst) == 2 and (guarded or lst[1] not in known):
            # a full list's lower entry bounds what it truncated
            cands.append(lst[1])
    return min(cands, key=lambda p: p.sort_key) if cands else None


def local_update(s: NodeState, inbox: Iterable[ColorMessage]) -> NodeState:
    """Recompute lists and bitmaps from this round's messages.

    Neighbors that sent nothing this round are represented by their cached
    message from an earlier round.
    """
    cache = dict(s.neighbor_cache)
    prev = {x: m for x, m in cache.items()}
    for m in inbox:
        if m.originator not in s.neighbors:
            raise ProtocolViolationError(f"node {s.me} received a message from non-neighbor {m.originator}")
        prev[m.originator] = cache.get(m.originator, ColorMessage(m.originator, None, m.prio))
        cache[m.originator] = m

    known: set[Priority] = set()
    if s.color is not None:
        known.add(s.priority)
    uncolored_nbrs = []
    b1 = b2 = b3 = 0
    for x, m in cache.items():
        me_x = Priority(m.prio, x)
        if m.color is not None:
            known.add(me_x)
            b1 |= 1 << m.color
        else:
            uncolored_nbrs.append(me_x)
        known.update(set(prev[x].max2_prio1) - set(m.max2_prio1))
        b2 |= m.bitmap1
        b3 |= m.bitmap2
    m1 = _top(uncolored_nbrs, 2)
    m2 = _certain_top2([m.max2_prio1 for m in cache.values()], known, s.guarded)
    m3 = _certain_top1([m.max2_prio2 for m in cache.values()], known, s.guarded)
    return replace(
        s,
        neighbor_cache=cache,
        previous_cache=prev,
        max2_prio1=m1,
        max2_prio2=m2,
        max_prio3=m3,
        bitmap1=b1,
        bitmap2=b2,
        bitmap3=b3,
        round=s.round + 1,
    )


def rule_r1(s: NodeState) -> bool:
    """True iff no tracked uncolored priority outranks this node's own."""
    tracked = list(s.max2_prio1) + list(s.max2_prio2)
    if s.max_prio3 is not None:
        tracked.append(s.max_prio3)
    return not any(p.outranks(s.priority) for p in tracked)


def rule_r2(s: NodeState) -> int:
    """Smallest color absent from the three bitmaps."""
    forbidden = s.forbidden
    c = 0
    while (forbidden >> c) & 1:
        c += 1
    return c


# whole-network runs


@dataclass
class SerenaResult:
    coloring: Coloring
    rounds: int
    trace: list[list[tuple[int, int]]]
    round_of: dict[int, int]
    quiescent_round: int
    colors: np.ndarray  # index order

    @property
    def num_colors(self) -> int:
        return self.coloring.num_colors


def _resolve_prio(t: Topology, prio) -> np.ndarray:
    if isinstance(prio, str):
        return compute_prio_all(t, prio)
    if isinstance(prio, Mapping):
        return np.array([int(prio[int(a)]) for a in t.ids], dtype=np.int64)
    arr = np.asarray(prio, dtype=np.int64)
    if arr.shape != (t.n,):
        raise ValueError(f"priority array must have shape ({t.n},)")
    return arr


def _trace_from(colored_at: np.ndarray, colors: np.ndarray, addresses: np.ndarray, rounds: int):
    trace: list[list[tuple[int, int]]] = [[] for _ in range(rounds)]
    order = np.argsort(addresses, kind="stable")
    for i in order:
        r = int(colored_at[i])
        if r >= 1:
            trace[r - 1].append((int(addresses[i]), int(colors[i])))
    return trace


def run_serena(
    t: Topology,
    prio="sumdeg",
    max_rounds: int = 100_000,
    addresses: Sequence[int] | None = None,
    engine: str = "kernel",
    wire: bool = False,
    guarded: bool = True,
) -> SerenaResult:
    """Run SERENA to completion.

    ``prio`` is a variant name (``"sumdeg"``/``"card2hop"``), a mapping from
    node address to prio, or an array in index order.  ``addresses`` overrides
    the tie-break address of each node (index order); by default the
    topology's own addresses are used.  With ``wire=True`` the objects engine
    sends every message through :func:`encode`/:func:`decode`.

    ``guarded=False`` applies the colored-node filtering literally: a node
    drops every entry it knows to be colored even when that empties a full
    top-2 list.  This can let a node color before a higher-priority node
    hidden by the truncation, so the result may be invalid; it exists for
    comparison only.
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be positive")
    values = _resolve_prio(t, prio)
    addr = t.ids if addresses is None else np.asarray(addresses, dtype=np.int64)
    if len(addr) != t.n or len(np.unique(addr)) != t.n:
        raise ValueError("addresses must be unique, one per node")
    if engine == "kernel":
        rank = priority_ranks(values, addr)
        # a color never exceeds the size of the 3-hop ball
        ball3 = int(np.diff(t.ball(3)[0]).max()) if t.n else 0
        nwords = (ball3 + 64) // 64
        colors, colored_at, rounds, quiescent, status = kernels.serena_rounds(
            t.indptr, t.indices, rank, int(max_rounds), nwords, int(guarded)
        )
        colors = np.asarray(colors, dtype=np.int64)
        colored_at = np.asarray(colored_at)
        last = int(colored_at.max()) if t.n else 0
        if status:
            trace = _trace_from(colored_at, colors, t.ids, max(last, int(max_rounds)))
            raise NonTerminationError(int(max_rounds), trace, [int(a) for a in t.ids[colors < 0]])
    elif engine == "objects":
        colors, colored_at, rounds, quiescent = _run_objects(t, values, addr, max_rounds, wire, guarded)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    trace = _trace_from(colored_at, colors, t.ids, rounds)
    return SerenaResult(
        coloring=Coloring.from_array(t, colors),
        rounds=int(rounds),
        trace=trace,
        round_of={int(a): int(r) for a, r in zip(t.ids, colored_at)},
        quiescent_round=int(quiescent),
        colors=colors,
    )


def _run_objects(t: Topology, values, addr, max_rounds, wire, guarded):
    n = t.n
    # protocol-level addresses may differ from topology addresses
    states = [
        initial_state(
            int(addr[i]),
            Priority(int(values[i]), int(addr[i])),
            (int(addr[j]) for j in t.neighbor_indices(i)),
            round=-INIT_EXCHANGES,
            guarded=guarded,
        )
        for i in range(n)
    ]
    nbrs = [t.neighbor_indices(i) for i in range(n)]

    def exchange():
        outgoing = [None] * n
        for i, s in enumerate(states):
            if s.terminated:
                continue
            m = make_message(s)
            outgoing[i] = decode(encode(m)) if wire else m
            if s.color is not None and s.lists_empty:
                states[i] = replace(s, terminated=True)
        for i, s in enumerate(states):
            if s.terminated:
                continue
            inbox = [outgoing[j] for j in nbrs[i] if outgoing[j] is not None]
            states[i] = local_update(s, inbox)

    for _ in range(INIT_EXCHANGES):
        exchange()

    colored_at = np.zeros(n, dtype=np.int64)
    remaining = n
    rounds = 0
    r = 0
    while remaining:
        if r >= max_rounds:
            colors = np.array([-1 if s.color is None else s.color for s in states])
            trace = _trace_from(colored_at, colors, t.ids, max_rounds)
            raise NonTerminationError(max_rounds, trace, [int(t.ids[i]) for i in range(n) if states[i].color is None])
        r += 1
        exchange()
        newly = [i for i, s in enumerate(states) if s.color is None and rule_r1(s)]
        for i in newly:
            states[i] = replace(states[i], color=rule_r2(states[i]))
            colored_at[i] = r
        remaining -= len(newly)
        if newly:
            rounds = r
    settle = r + SETTLE_LIMIT
    while r < settle and not all(s.terminated for s in states):
        r += 1
        exchange()
    colors = np.array([s.color for s in states], dtype=np.int64)
    return colors, colored_at, rounds, r


# unoptimized reference protocol


def run_naive(
    t: Topology,
    prio="sumdeg",
    max_rounds: int = 100_000,
    addresses: Sequence[int] | None = None,
) -> SerenaResult:
    """Reference protocol where every message carries full neighborhood lists.

    Each node sends its own priority and color plus those of all its 1-hop
    and 2-hop neighbors, so after round ``r`` a node knows the state of a
    node ``d`` hops away as of round ``r - d``.  A node colors once every
    higher-priority node within 3 hops is known to be colored, taking the
    smallest color not used within 3 hops.  Timing follows the optimized
    protocol: a color chosen in round ``r`` is first sent in round ``r+1``.
    """
    import scipy.sparse as sp

    values = _resolve_prio(t, prio)
    addr = t.ids if addresses is None else np.asarray(addresses, dtype=np.int64)
    n = t.n
    rank = priority_ranks(values, addr)
    ptr, flat, dist = t.ball(3)
    rows = np.repeat(np.arange(n), np.diff(ptr))
    adj = sp.csr_matrix((np.ones(len(t.indices), dtype=np.int8), t.indices, t.indptr), shape=(n, n))
    # relayable knowledge: a node forwards what it knows about nodes within 2 hops
    near2 = sp.csr_matrix(
        (np.ones(int((dist <= 2).sum()) + n, dtype=np.int8),
         (np.concatenate([rows[dist <= 2], np.arange(n)]), np.concatenate([flat[dist <= 2], np.arange(n)]))),
        shape=(n, n),
    )
    near3 = sp.csr_matrix((np.ones(len(flat), dtype=np.int8), flat, ptr), shape=(n, n))
    higher = rank[flat] < rank[rows]
    blockers = sp.csr_matrix((np.ones(int(higher.sum()), dtype=np.int8), (rows[higher], flat[higher])), shape=(n, n))
    need = np.asarray(blockers.sum(axis=1)).ravel()

    colors = np.full(n, -1, dtype=np.int64)
    colored_at = np.zeros(n, dtype=np.int64)
    known = sp.csr_matrix((n, n), dtype=np.int8)  # known[v, u]: v knows u's color
    r = rounds = 0
    while (colors < 0).any():
        if r >= max_rounds:
            raise NonTerminationError(
                max_rounds, _trace_from(colored_at, colors, t.ids, max_rounds), [int(a) for a in t.ids[colors < 0]]
            )
        r += 1
        relayed = adj @ known.multiply(near2)
        known = ((known + relayed.multiply(near3)) > 0).astype(np.int8)
        have = np.asarray(known.multiply(blockers).sum(axis=1)).ravel()
        newly = np.nonzero((colors < 0) & (have == need))[0]
        for v in newly:
            seen = known[v].indices
            used = set(colors[seen].tolist())
            c = 0
            while c in used:
                c += 1
            colors[v] = c
            colored_at[v] = r
        if len(newly):
            rounds = r
            known = (known + sp.csr_matrix((np.ones(len(newly), np.int8), (newly, newly)), shape=(n, n))).astype(np.int8)
    trace = _trace_from(colored_at, colors, t.ids, rounds)
    return SerenaResult(
        coloring=Coloring.from_array(t, colors),
        rounds=int(rounds),
        trace=trace,
        round_of={int(a): int(x) for a, x in zip(t.ids, colored_at)},
        quiescent_round=int(rounds),
        colors=colors,
    )


@dataclass(frozen=True)
class TimingViolation:
    node: int
    expected: int
    actual: int


def property1_violations(t: Topology, result: SerenaResult, prio="sumdeg", addresses=None) -> list[TimingViolation]:
    """Nodes that did not color exactly when the last blocker's news arrived.

    For every node v the expected round is ``max(1, t_u + hops(u, v))`` over
    the higher-priority nodes u within 3 hops, using the observed rounds
    ``t_u``.  News of a coloring travels one hop per round, so no protocol
    can do better, and the reference flooding protocol achieves it.
    """
    values = _resolve_prio(t, prio)
    addr = t.ids if addresses is None else np.asarray(addresses, dtype=np.int64)
    rank = priority_ranks(values, addr)
    ptr, flat, dist = t.ball(3)
    at = np.array([result.round_of[int(a)] for a in t.ids], dtype=np.int64)
    rows = np.repeat(np.arange(t.n), np.diff(ptr))
    higher = rank[flat] < rank[rows]
    expected = np.ones(t.n, dtype=np.int64)
    np.maximum.at(expected, rows[higher], at[flat[higher]] + dist[higher])
    bad = np.nonzero(expected != at)[0]
    return [TimingViolation(int(t.ids[i]), int(expected[i]), int(at[i])) for i in bad]
