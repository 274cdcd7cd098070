"""B-partitions, zone graphs and their colorings.

A B-partition splits the vertex set into zones; the non-exit part of every
zone is spanned by a rooted tree of depth at most B. A zone is self-sufficient
when it carries an :class:`ObliviousPlan`: a fixed schedule per start vertex
that evacuates any subset of occupied start vertices within B steps without
leaving the zone and without any communication.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable

from .graph import Graph, RootedTree, exit_avoiding_bfs


@dataclass(frozen=True)
class ObliviousPlan:
    """``schedules[v]`` lists the positions (end of step 0, 1, ...) of an agent
    starting at ``v``; the last entry is the exit it leaves through."""

    schedules: dict[int, tuple[int, ...]]

    @property
    def length(self) -> int:
        return max((len(s) - 1 for s in self.schedules.values()), default=0)

    def position(self, start: int, t: int) -> int | None:
        s = self.schedules[start]
        return s[t] if t < len(s) else None


@dataclass(frozen=True)
class Zone:
    id: int
    vertices: frozenset[int]
    center: int | None
    trees: tuple[RootedTree, ...]
    self_sufficient: bool
    plan: ObliviousPlan | None = None
    kind: str = "zone"

    @property
    def tree(self) -> RootedTree | None:
        return self.trees[0] if self.trees else None


@dataclass
class BPartition:
    B: int
    zones: list[Zone]
    zone_of: dict[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.zone_of:
            for z in self.zones:
                for v in z.vertices:
                    self.zone_of[v] = z.id


@dataclass
class ZoneGraph:
    adj: list[tuple[int, ...]]

    @property
    def n(self) -> int:
        return len(self.adj)

    @property
    def max_degree(self) -> int:
        return max((len(a) for a in self.adj), default=0)

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u, ns in enumerate(self.adj) for v in ns if u < v]


@dataclass
class Coloring:
    color: list[int]
    d: int

    def classes(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.d)]
        for z, c in enumerate(self.color):
            out[c - 1].append(z)
        return out


Provider = Callable[[Graph, frozenset, int], BPartition]


def zones_close(z1: Zone, z2: Zone, B: int, g: Graph, exits: frozenset[int]) -> bool:
    """Whether some vertices of the two zones are within exit-avoiding distance 2B."""
    reach = exit_avoiding_bfs(g, exits, sorted(z1.vertices), limit=2 * B)
    return any(v in reach for v in z2.vertices)


def build_zone_graph(p: BPartition, g: Graph, exits: frozenset[int]) -> ZoneGraph:
    """Edges join close pairs of zones that are both not self-sufficient."""
    nbrs: list[set[int]] = [set() for _ in p.zones]
    for z in p.zones:
        if z.self_sufficient:
            continue
        reach = exit_avoiding_bfs(g, exits, sorted(z.vertices), limit=2 * p.B)
        for v in reach:
            other = p.zones[p.zone_of[v]]
            if other.id != z.id and not other.self_sufficient:
                nbrs[z.id].add(other.id)
                nbrs[other.id].add(z.id)
    return ZoneGraph([tuple(sorted(s)) for s in nbrs])


def greedy_coloring(zg: ZoneGraph) -> Coloring:
    """First-fit coloring in ascending zone id order; colors start at 1."""
    color = [0] * zg.n
    for z in range(zg.n):
        used = {color[u] for u in zg.adj[z] if color[u]}
        c = 1
        while c in used:
            c += 1
        color[z] = c
    return Coloring(color, max(color, default=0))


# -- validation --------------------------------------------------------------

@dataclass
class PartitionReport:
    ok: bool
    message: str = "ok"
    zone: int | None = None

    def __bool__(self) -> bool:
        return self.ok


def check_plan(plan: ObliviousPlan, zone: Zone, g: Graph, exits: frozenset[int],
               starts) -> str | None:
    """Replay ``plan`` from ``starts``; returns the first problem or None."""
    starts = sorted(starts)
    horizon = max((len(plan.schedules[s]) - 1 for s in starts), default=0)
    for s in starts:
        route = plan.schedules[s]
        if route[0] != s:
            return f"schedule of {g.label(s)} does not start there"
        if route[-1] not in exits:
            return f"schedule of {g.label(s)} does not end at an exit"
        for a, b in zip(route, route[1:]):
            if a != b and not g.adjacent(a, b):
                return f"schedule of {g.label(s)} jumps {g.label(a)} -> {g.label(b)}"
        if any(v in exits for v in route[:-1]):
            return f"schedule of {g.label(s)} passes through an exit"
        if any(v not in zone.vertices for v in route):
            return f"schedule of {g.label(s)} leaves the zone"
    for t in range(1, horizon + 1):
        seen: set[int] = set()
        for s in starts:
            v = plan.position(s, t)
            if v is None:
                continue
            if v in seen:
                return f"collision at {g.label(v)} in step {t}"
            seen.add(v)
    return None


def validate_partition(p: BPartition, g: Graph, exits: frozenset[int],
                       subsets: int = 32, seed: int = 0) -> PartitionReport:
    """Check the disjoint cover, the depth-B spanning trees and the
    self-sufficiency certificates (all-occupied plus random subsets)."""
    owner: dict[int, int] = {}
    for z in p.zones:
        for v in z.vertices:
            if v in owner:
                return PartitionReport(False, f"cover: {g.label(v)} lies in two zones", z.id)
            owner[v] = z.id
    if len(owner) != len(g):
        missing = next(v for v in range(len(g)) if v not in owner)
        return PartitionReport(False, f"cover: {g.label(missing)} is in no zone")
    rng = random.Random(seed)
    for z in p.zones:
        inner = frozenset(v for v in z.vertices if v not in exits)
        covered: set[int] = set()
        for tree in z.trees:
            tv = tree.vertices
            if covered & tv:
                return PartitionReport(False, "spanning tree: trees overlap", z.id)
            covered |= tv
            for v, u in tree.parent.items():
                if not g.adjacent(u, v) or tree.depth[v] != tree.depth[u] + 1:
                    return PartitionReport(False, "spanning tree: not a tree of G", z.id)
            if tree.height > p.B:
                return PartitionReport(
                    False, f"spanning tree: tree depth {tree.height} exceeds B={p.B}", z.id)
        if covered != inner:
            return PartitionReport(False, "spanning tree: trees do not span the zone", z.id)
        if inner and (z.center is None or z.center != z.trees[0].root):
            return PartitionReport(False, "zone center is not the tree root", z.id)
        if not z.self_sufficient:
            if len(z.trees) != 1 and inner:
                return PartitionReport(False, "spanning tree: zone is not connected", z.id)
            continue
        if z.plan is None or set(z.plan.schedules) != set(inner):
            return PartitionReport(False, "self-sufficient zone lacks a complete plan", z.id)
        if z.plan.length > p.B:
            return PartitionReport(False, f"internal plan longer than B={p.B}", z.id)
        ordered = sorted(inner)
        trials = [ordered] + [
            [v for v in ordered if rng.random() < 0.5] for _ in range(subsets)
        ]
        for starts in trials:
            problem = check_plan(z.plan, z, g, exits, starts)
            if problem:
                return PartitionReport(False, f"internal plan: {problem}", z.id)
    return PartitionReport(True)


# -- generic provider ----------------------------------------------------------

def singleton_partition(g: Graph, exits: frozenset[int], B: int) -> BPartition:
    """Fallback partition for arbitrary graphs: one zone per non-exit vertex.

    Scanning vertices by id, a vertex adjacent to a still unclaimed exit takes
    the smallest such exit into its zone and becomes self-sufficient (one step
    suffices). Unclaimed exits become zones of their own."""
    claimed: set[int] = set()
    groups: list[tuple[int, ...]] = []
    for v in range(len(g)):
        if v in exits:
            continue
        x = next((u for u in g.adj[v] if u in exits and u not in claimed), None)
        if x is not None:
            claimed.add(x)
            groups.append((v, x))
        else:
            groups.append((v,))
    groups += [(x,) for x in sorted(exits - claimed)]
    groups.sort(key=min)
    zones = []
    for zid, verts in enumerate(groups):
        v = verts[0]
        if v in exits:
            zones.append(Zone(zid, frozenset(verts), None, (), True, ObliviousPlan({}), "exit"))
            continue
        tree = RootedTree(v, {}, {v: 0})
        if len(verts) == 2:
            plan = ObliviousPlan({v: (v, verts[1])})
            zones.append(Zone(zid, frozenset(verts), v, (tree,), True, plan, "singleton"))
        else:
            zones.append(Zone(zid, frozenset(verts), v, (tree,), False, None, "singleton"))
    return BPartition(B, zones)
