"""Graph representation, generators and exit-avoiding distances."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

UNREACHABLE = None


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple undirected graph with dense integer ids and unique string labels.

    Adjacency lists are stored sorted by vertex id so that every traversal is
    deterministic.
    """

    labels: tuple[str, ...]
    adj: tuple[tuple[int, ...], ...]
    coords: tuple[tuple[int, int], ...] | None = None
    _index: dict[str, int] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.labels) != len(self.adj):
            raise ValueError("labels and adjacency differ in length")
        index = {lab: v for v, lab in enumerate(self.labels)}
        if len(index) != len(self.labels):
            raise ValueError("vertex labels must be unique")
        for v, nbrs in enumerate(self.adj):
            for u in nbrs:
                if u == v:
                    raise ValueError(f"self-loop at {self.labels[v]}")
                if v not in self.adj[u]:
                    raise ValueError("adjacency is not symmetric")
            if len(set(nbrs)) != len(nbrs):
                raise ValueError(f"parallel edge at {self.labels[v]}")
        self._index.update(index)

    @classmethod
    def from_edges(
        cls,
        labels: Sequence[str],
        edges: Iterable[tuple[int, int]],
        coords: Sequence[tuple[int, int]] | None = None,
    ) -> "Graph":
        nbrs: list[set[int]] = [set() for _ in labels]
        for u, v in edges:
            if u == v:
                raise ValueError("self-loops are not allowed")
            nbrs[u].add(v)
            nbrs[v].add(u)
        return cls(
            tuple(labels),
            tuple(tuple(sorted(s)) for s in nbrs),
            tuple(coords) if coords is not None else None,
        )

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def n_vertices(self) -> int:
        return len(self.labels)

    @property
    def n_edges(self) -> int:
        return sum(len(a) for a in self.adj) // 2

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u, nbrs in enumerate(self.adj) for v in nbrs if u < v]

    def vertex(self, label: str) -> int:
        return self._index[label]

    def has_label(self, label: str) -> bool:
        return label in self._index

    def label(self, v: int) -> str:
        return self.labels[v]

    def adjacent(self, u: int, v: int) -> bool:
        return v in self.adj[u]

    def closed_neighborhood(self, v: int) -> tuple[int, ...]:
        return (v, *self.adj[v])

    @property
    def is_grid(self) -> bool:
        return self.coords is not None


@dataclass(frozen=True)
class RootedTree:
    """Rooted tree over a vertex subset, stored as parent pointers and depths."""

    root: int
    parent: dict[int, int]
    depth: dict[int, int]

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset(self.depth)

    @property
    def height(self) -> int:
        return max(self.depth.values())

    def path_to_root(self, v: int) -> list[int]:
        path = [v]
        while path[-1] != self.root:
            path.append(self.parent[path[-1]])
        return path


def grid_label(i: int, j: int) -> str:
    return f"{i},{j}"


def grid_id(n: int, i: int, j: int) -> int:
    """Dense id of grid vertex (i, j); ids run along rows (i varies fastest)."""
    return (j - 1) * n + (i - 1)


def build_grid(n: int) -> Graph:
    """The n x n grid; vertex (i, j) is column i, row j, both 1-based."""
    if n < 1:
        raise ValueError("grid size must be positive")
    labels, coords, edges = [], [], []
    for j in range(1, n + 1):
        for i in range(1, n + 1):
            labels.append(grid_label(i, j))
            coords.append((i, j))
            v = grid_id(n, i, j)
            if i < n:
                edges.append((v, v + 1))
            if j < n:
                edges.append((v, v + n))
    return Graph.from_edges(labels, edges, coords)


def grid_size(g: Graph) -> int:
    """Side length of a grid built by :func:`build_grid`."""
    if g.coords is None:
        raise ValueError("graph is not a grid")
    n = max(i for i, _ in g.coords)
    if n * n != len(g) or g.n_edges != 2 * n * (n - 1):
        raise ValueError("graph is not a square grid")
    return n


def build_star_chain(k: int, n: int, s: int) -> tuple[Graph, frozenset[int]]:
    """k+1 stars with n leaves each; corresponding leaves of consecutive stars
    are joined by a path of length s-1. Returns the graph and the set of star
    centers, which serve as exits."""
    if k < 0 or n < 1 or s < 2:
        raise ValueError("need k >= 0, n >= 1, s >= 2")
    labels: list[str] = []
    edges: list[tuple[int, int]] = []

    def add(label: str) -> int:
        labels.append(label)
        return len(labels) - 1

    leaf: dict[tuple[int, int], int] = {}
    centers = []
    for j in range(k + 1):
        c = add(f"v0^{j}")
        centers.append(c)
        for i in range(1, n + 1):
            leaf[i, j] = add(f"v{i}^{j}")
            edges.append((c, leaf[i, j]))
    for j in range(1, k + 1):
        for i in range(1, n + 1):
            prev = leaf[i, j - 1]
            for m in range(1, s - 1):
                cur = add(f"p{i}^{j}.{m}")
                edges.append((prev, cur))
                prev = cur
            edges.append((prev, leaf[i, j]))
    return Graph.from_edges(labels, edges), frozenset(centers)


def exit_avoiding_bfs(
    g: Graph, exits: Iterable[int] | frozenset[int], sources: Iterable[int], limit: int | None = None
) -> dict[int, int]:
    """Multi-source BFS whose paths never pass *through* an exit.

    Sources and reached vertices may be exits, but exits are never expanded
    (a source exit is expanded, being the path's endpoint)."""
    exits = exits if isinstance(exits, (set, frozenset)) else frozenset(exits)
    dist: dict[int, int] = {}
    queue: deque[int] = deque()
    for s in sources:
        if s not in dist:
            dist[s] = 0
            queue.append(s)
    while queue:
        u = queue.popleft()
        du = dist[u]
        if du > 0 and u in exits:
            continue
        if limit is not None and du >= limit:
            continue
        for w in g.adj[u]:
            if w not in dist:
                dist[w] = du + 1
                queue.append(w)
    return dist


def exit_avoiding_distance(g: Graph, exits: Iterable[int], u: int, v: int) -> int | None:
    """Length of a shortest u-v path with no exit among its interior vertices,
    or ``None`` when no such path exists."""
    if u == v:
        return 0
    return exit_avoiding_bfs(g, frozenset(exits), [u]).get(v, UNREACHABLE)


def distances_to_exits(g: Graph, exits: frozenset[int]) -> dict[int, int]:
    """For each vertex, the exit-avoiding distance to its nearest exit."""
    return exit_avoiding_bfs(g, exits, sorted(exits))


def bfs_tree(g: Graph, root: int, forbidden: Iterable[int] = ()) -> RootedTree:
    """Breadth-first spanning tree of the component of ``g - forbidden``
    containing ``root``; neighbours are explored in ascending id order."""
    forbidden = frozenset(forbidden)
    if root in forbidden:
        raise ValueError("root is forbidden")
    return _bfs_tree(g.adj, root, lambda w: w not in forbidden)


def bfs_tree_within(g: Graph, root: int, allowed: frozenset[int]) -> RootedTree:
    """BFS tree of the component of ``g[allowed]`` containing ``root``."""
    if root not in allowed:
        raise ValueError("root is not an allowed vertex")
    return _bfs_tree(g.adj, root, allowed.__contains__)


def _bfs_tree(adj, root, ok) -> RootedTree:
    parent: dict[int, int] = {}
    depth = {root: 0}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if w not in depth and ok(w):
                depth[w] = depth[u] + 1
                parent[w] = u
                queue.append(w)
    return RootedTree(root, parent, depth)


def tree_from_edges(root: int, vertices: Iterable[int], edges: Iterable[tuple[int, int]]) -> RootedTree:
    """Root a tree given by an explicit edge list; raises if it is not a
    spanning tree of ``vertices``."""
    vertices = frozenset(vertices)
    nbrs: dict[int, list[int]] = {v: [] for v in vertices}
    n_edges = 0
    for u, v in edges:
        nbrs[u].append(v)
        nbrs[v].append(u)
        n_edges += 1
    if n_edges != len(vertices) - 1:
        raise ValueError("edge set is not a tree")
    adj = {v: sorted(ns) for v, ns in nbrs.items()}
    tree = _bfs_tree(adj, root, vertices.__contains__)
    if len(tree.depth) != len(vertices):
        raise ValueError("edge set does not span the vertex set")
    return tree
