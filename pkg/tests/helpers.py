"""Small graph builders and independent reference implementations."""

from __future__ import annotations

import itertools
from collections import deque

from evacuation.graph import Graph, build_grid, grid_id
from evacuation.instance import make_instance


def path_graph(n: int) -> Graph:
    labels = [f"v{i}" for i in range(1, n + 1)]
    return Graph.from_edges(labels, [(i, i + 1) for i in range(n - 1)])


def star_graph(leaves: int) -> Graph:
    labels = ["c"] + [f"l{i}" for i in range(1, leaves + 1)]
    return Graph.from_edges(labels, [(0, i) for i in range(1, leaves + 1)])


def p3_instance():
    """Path v1-v2-v3, exit v3, agents at v1 and v2."""
    return make_instance(path_graph(3), {2}, {0, 1})


def grid_instance(n: int, exits, homes):
    g = build_grid(n)
    return make_instance(g, {grid_id(n, *x) for x in exits}, {grid_id(n, *h) for h in homes})


def naive_distance(g: Graph, exits, u: int, v: int):
    """Exit-avoiding distance by enumerating simple paths (tiny graphs only)."""
    if u == v:
        return 0
    best = None
    queue = deque([(u, (u,))])
    while queue:
        x, path = queue.popleft()
        for w in g.adj[x]:
            if w in path:
                continue
            if w == v:
                d = len(path)
                best = d if best is None else min(best, d)
                continue
            if w in exits:
                continue
            queue.append((w, path + (w,)))
    return best


def monotone_paths_brute(width: int, height: int, blocked: set[tuple[int, int]]) -> bool:
    """Whether an exit-free monotone path crosses a width x height area, by
    enumerating every sequence of right/down moves from every start row."""
    for start in range(1, height + 1):
        for downs in range(0, height - start + 1):
            for order in itertools.combinations(range(width - 1 + downs), downs):
                i, j = 1, start
                cells = [(i, j)]
                for step in range(width - 1 + downs):
                    if step in order:
                        j += 1
                    else:
                        i += 1
                    cells.append((i, j))
                if not blocked.intersection(cells):
                    return True
    return False


def is_connected_group(g: Graph, vertices) -> bool:
    """Group test from the definition: the union of the closed neighborhoods
    of the occupied vertices, where two occupied vertices are linked when
    their closed neighborhoods meet."""
    vs = list(vertices)
    if len(vs) <= 1:
        return True
    nb = {v: set(g.closed_neighborhood(v)) for v in vs}
    seen = {vs[0]}
    stack = [vs[0]]
    while stack:
        u = stack.pop()
        for w in vs:
            if w not in seen and nb[u] & nb[w]:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(vs)
