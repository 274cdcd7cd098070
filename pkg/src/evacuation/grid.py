"""B-partitions of square grids.

The grid is tiled by B-areas of side B/2. An area without a monotone path has
an exit in every row, and each row becomes a self-sufficient zone. Otherwise a
monotone path P and the column runs through it form the single zone that is
not self-sufficient, and every remaining exit-free column run becomes a
self-sufficient segment evacuating through an exit it claims exclusively.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .graph import Graph, RootedTree, grid_id, grid_size, tree_from_edges
from .zoning import BPartition, ObliviousPlan, Zone


class PartitionInvariantError(RuntimeError):
    """A construction produced a zone violating its guarantees."""


@dataclass(frozen=True)
class BArea:
    corner: tuple[int, int]
    i0: int
    j0: int
    width: int
    height: int
    n: int

    def vid(self, li: int, lj: int) -> int:
        """Global id of local vertex (li, lj), both 1-based."""
        return grid_id(self.n, self.i0 + li - 1, self.j0 + lj - 1)

    @property
    def vertices(self) -> list[int]:
        return [self.vid(li, lj) for lj in range(1, self.height + 1)
                for li in range(1, self.width + 1)]

    def column(self, li: int) -> list[int]:
        return [self.vid(li, lj) for lj in range(1, self.height + 1)]

    def row(self, lj: int) -> list[int]:
        return [self.vid(li, lj) for li in range(1, self.width + 1)]


def b_areas(n: int, B: int) -> list[BArea]:
    """Areas { aB/2 < i <= (a+1)B/2, bB/2 < j <= (b+1)B/2 }, truncated at the
    grid border, in row-major order of their corners."""
    if B < 2 or B % 2:
        raise ValueError("B must be an even integer >= 2")
    side = B // 2
    count = -(-n // side)
    out = []
    for b in range(count):
        for a in range(count):
            i0, j0 = a * side + 1, b * side + 1
            out.append(BArea((a, b), i0, j0, min(side, n - i0 + 1), min(side, n - j0 + 1), n))
    return out


def find_monotone_path(area: BArea, exits: frozenset[int]) -> list[int] | None:
    """Exit-free path from column 1 to the last column of the area whose steps
    increase either the column or the row index; None if there is none.

    Among start rows the smallest works; each step goes right when possible."""
    w, h = area.width, area.height
    good = [[False] * (h + 2) for _ in range(w + 2)]
    for li in range(w, 0, -1):
        for lj in range(h, 0, -1):
            if area.vid(li, lj) in exits:
                continue
            good[li][lj] = li == w or good[li + 1][lj] or good[li][lj + 1]
    start = next((lj for lj in range(1, h + 1) if good[1][lj]), None)
    if start is None:
        return None
    li, lj = 1, start
    path = [area.vid(li, lj)]
    while li < w:
        if good[li + 1][lj]:
            li += 1
        else:
            lj += 1
        path.append(area.vid(li, lj))
    return path


def _funnel(exit_vertex: int, arms: list[list[int]]) -> dict[int, tuple[int, ...]]:
    """Fixed schedules sending every arm vertex into ``exit_vertex``.

    Arms are lines ordered by distance from the exit. Exit slots are handed out
    round-robin over the arms; a vertex at distance r with slot s waits until
    step s - r and then walks straight in, so agents on one arm keep their order
    and never meet, and each slot admits one agent."""
    slot_of: dict[int, int] = {}
    slot = 1
    depth = 0
    while any(depth < len(arm) for arm in arms):
        for arm in arms:
            if depth < len(arm):
                slot_of[arm[depth]] = slot
                slot += 1
        depth += 1
    out = {}
    for arm in arms:
        for r, v in enumerate(arm, start=1):
            s = slot_of[v]
            route = []
            for t in range(s + 1):
                d = min(r, s - t)
                route.append(arm[d - 1] if d else exit_vertex)
            out[v] = tuple(route)
    return out


def row_internal_plan(line: list[int], exits: frozenset[int]) -> ObliviousPlan:
    """Plan for a zone laid out as a line with at least one exit: every vertex
    walks to its nearest exit on the line (ties go to the lower coordinate),
    and each exit alternates between its lower and upper side."""
    exit_pos = [p for p, v in enumerate(line) if v in exits]
    if not exit_pos:
        raise PartitionInvariantError("line zone without an exit")
    arms: dict[int, tuple[list[int], list[int]]] = {p: ([], []) for p in exit_pos}
    for p, v in enumerate(line):
        if v in exits:
            continue
        target = min(exit_pos, key=lambda q: (abs(q - p), q))
        lower, upper = arms[target]
        (lower if p < target else upper).append(p)
    schedules: dict[int, tuple[int, ...]] = {}
    for q, (lower, upper) in arms.items():
        lo = [line[p] for p in sorted(lower, reverse=True)]
        hi = [line[p] for p in sorted(upper)]
        schedules.update(_funnel(line[q], [lo, hi]))
    return ObliviousPlan(schedules)


def _runs(vertices: list[int], exits: frozenset[int]) -> list[list[int]]:
    """Maximal exit-free runs of consecutive vertices of a line."""
    runs, cur = [], []
    for v in vertices:
        if v in exits:
            if cur:
                runs.append(cur)
            cur = []
        else:
            cur.append(v)
    if cur:
        runs.append(cur)
    return runs


def _path_tree(run: list[int], root: int) -> RootedTree:
    return tree_from_edges(root, run, zip(run, run[1:]))


def partition_area_rows(area: BArea, exits: frozenset[int], B: int) -> list[Zone]:
    """One self-sufficient zone per row of an area without monotone paths."""
    zones = []
    for lj in range(1, area.height + 1):
        line = area.row(lj)
        if not any(v in exits for v in line):
            raise PartitionInvariantError(f"row {lj} of area {area.corner} has no exit")
        plan = row_internal_plan(line, exits)
        trees = []
        for run in _runs(line, exits):
            first = line.index(run[0])
            root = run[0] if first > 0 and line[first - 1] in exits else run[-1]
            trees.append(_path_tree(run, root))
        center = trees[0].root if trees else None
        zones.append(Zone(-1, frozenset(line), center, tuple(trees), True, plan, "row"))
    return zones


def partition_area_with_path(area: BArea, path: list[int], exits: frozenset[int], B: int) -> list[Zone]:
    """The zone Z of column runs through ``path`` plus self-sufficient column
    segments; exits left unclaimed become zones of their own."""
    on_path = set(path)
    z_vertices: list[int] = []
    edges = set(zip(path, path[1:]))
    segments: list[tuple[list[int], int]] = []
    for li in range(1, area.width + 1):
        col = area.column(li)
        runs = _runs(col, exits)
        main = next(r for r in runs if on_path.intersection(r))
        z_vertices += main
        edges.update(zip(main, main[1:]))
        top = col.index(main[0])
        for run in runs:
            if run is main:
                continue
            pos = col.index(run[0])
            if pos < top:
                claimed = col[col.index(run[-1]) + 1]
            else:
                claimed = col[pos - 1]
            segments.append((run, claimed))
    edges = {(min(u, v), max(u, v)) for u, v in edges if u != v}
    root = path[len(path) // 2]
    tree = tree_from_edges(root, z_vertices, edges)
    if tree.height > B:
        raise PartitionInvariantError(
            f"zone of area {area.corner} has depth {tree.height} > B={B}")
    zones = [Zone(-1, frozenset(z_vertices), root, (tree,), False, None, "path")]
    claimed_exits = set()
    for run, x in segments:
        if x in claimed_exits:
            raise PartitionInvariantError("exit claimed by two segments")
        claimed_exits.add(x)
        line = [x, *run] if x < run[0] else [*run, x]
        seg_root = run[0] if x < run[0] else run[-1]
        zones.append(Zone(-1, frozenset(line), seg_root, (_path_tree(run, seg_root),),
                          True, row_internal_plan(line, exits), "segment"))
    for x in area.vertices:
        if x in exits and x not in claimed_exits:
            zones.append(Zone(-1, frozenset([x]), None, (), True, ObliviousPlan({}), "exit"))
    return zones


def grid_partition(g: Graph, exits: frozenset[int], B: int) -> BPartition:
    """B-partition of an n x n grid assembled area by area."""
    n = grid_size(g)
    exits = frozenset(exits)
    zones: list[Zone] = []
    for area in b_areas(n, B):
        path = find_monotone_path(area, exits)
        if path is None:
            part = partition_area_rows(area, exits, B)
        else:
            part = partition_area_with_path(area, path, exits, B)
        for z in part:
            zones.append(dataclasses.replace(z, id=len(zones)))
    return BPartition(B, zones)


def area_of_zone(p: BPartition, n: int) -> list[tuple[int, int]]:
    """Corner (a, b) of the area containing each zone."""
    side = p.B // 2
    out = []
    for z in p.zones:
        v = min(z.vertices)
        i, j = v % n + 1, v // n + 1
        out.append(((i - 1) // side, (j - 1) // side))
    return out
