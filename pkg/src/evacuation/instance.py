"""Evacuation instances: the graph, its exits and the agents' homebases."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Any

from .graph import Graph, build_grid, build_star_chain, grid_id, grid_size


class InstanceError(ValueError):
    """Malformed instance or invalid generator parameters."""


@dataclass(frozen=True, eq=False)
class Instance:
    graph: Graph
    exits: frozenset[int]
    homebases: tuple[int, ...]
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(set(self.homebases)) != len(self.homebases):
            raise InstanceError("homebases must be distinct")
        if any(h in self.exits for h in self.homebases):
            raise InstanceError("a homebase coincides with an exit")
        nv = len(self.graph)
        if any(not 0 <= v < nv for v in (*self.exits, *self.homebases)):
            raise InstanceError("vertex out of range")

    @property
    def k(self) -> int:
        return len(self.homebases)

    def with_homebases(self, homebases) -> "Instance":
        return Instance(self.graph, self.exits, tuple(sorted(homebases)), dict(self.metadata))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.graph.labels == other.graph.labels
            and self.graph.adj == other.graph.adj
            and self.exits == other.exits
            and self.homebases == other.homebases
            and self.metadata == other.metadata
        )

    __hash__ = None  # type: ignore[assignment]


def make_instance(g: Graph, exits, homebases, metadata=None) -> Instance:
    """Build an instance; agents are numbered by ascending homebase id."""
    return Instance(g, frozenset(exits), tuple(sorted(homebases)), dict(metadata or {}))


def to_dict(inst: Instance) -> dict[str, Any]:
    g = inst.graph
    lab = g.labels
    d: dict[str, Any] = {}
    try:
        n = grid_size(g)
    except ValueError:
        n = None
    if n is not None and g.labels == build_grid(n).labels:
        d["kind"] = "grid"
        d["n"] = n
    else:
        d["kind"] = "graph"
        d["vertices"] = list(lab)
        d["edges"] = [[lab[u], lab[v]] for u, v in g.edges()]
    d["exits"] = [lab[x] for x in sorted(inst.exits)]
    d["homebases"] = [lab[h] for h in inst.homebases]
    d["metadata"] = inst.metadata
    return d


def from_dict(d: dict[str, Any]) -> Instance:
    try:
        kind = d["kind"]
        if kind == "grid":
            g = build_grid(int(d["n"]))
        elif kind == "graph":
            labels = [str(x) for x in d["vertices"]]
            index = {lab: i for i, lab in enumerate(labels)}
            g = Graph.from_edges(labels, [(index[a], index[b]) for a, b in d["edges"]])
        else:
            raise InstanceError(f"unknown instance kind {kind!r}")
        exits = [g.vertex(x) for x in d["exits"]]
        homebases = [g.vertex(h) for h in d["homebases"]]
    except (KeyError, TypeError) as exc:
        raise InstanceError(f"malformed instance: {exc}") from exc
    return make_instance(g, exits, homebases, d.get("metadata", {}))


def dumps(inst: Instance) -> str:
    return json.dumps(to_dict(inst), indent=1) + "\n"


def loads(text: str) -> Instance:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"not a valid instance file: {exc}") from exc
    return from_dict(d)


def load(path) -> Instance:
    with open(path) as fh:
        return loads(fh.read())


def save(inst: Instance, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(inst))


EXIT_MODES = ("random", "border", "rows")


def grid_exits(n: int, count: int, mode: str, rng: random.Random, B: int = 8) -> list[int]:
    """Exit placement for grids.

    ``rows`` puts one exit in every row of every B-area (B defaults to 8), on
    the area's diagonal, so no area admits a monotone path; ``count`` and the
    generator are unused in that mode."""
    cells = [(i, j) for j in range(1, n + 1) for i in range(1, n + 1)]
    if mode == "random":
        chosen = rng.sample(cells, count)
    elif mode == "border":
        border = [(i, j) for (i, j) in cells if i in (1, n) or j in (1, n)]
        if count > len(border):
            raise InstanceError("more exits than border vertices")
        chosen = rng.sample(border, count)
    elif mode == "rows":
        side = max(1, B // 2)
        chosen = []
        for j in range(1, n + 1):
            for a in range(0, n, side):
                width = min(side, n - a)
                chosen.append((a + 1 + (j - 1) % side % width, j))
    else:
        raise InstanceError(f"unknown exit mode {mode!r}")
    return sorted(grid_id(n, i, j) for i, j in chosen)


def gen_grid(n: int, exits: int, agents: int, seed: int, exit_mode: str = "random") -> Instance:
    if n < 1:
        raise InstanceError("n must be positive")
    if exit_mode != "rows" and not 1 <= exits <= n * n:
        raise InstanceError("exit count out of range")
    rng = random.Random(seed)
    g = build_grid(n)
    x = frozenset(grid_exits(n, exits, exit_mode, rng))
    free = [v for v in range(len(g)) if v not in x]
    if agents > len(free):
        raise InstanceError("more agents than non-exit vertices")
    h = rng.sample(free, agents)
    meta = {"generator": "grid", "n": n, "exits": exits, "agents": agents,
            "exit_mode": exit_mode, "seed": seed}
    return make_instance(g, x, h, meta)


def gen_star_chain(k: int, n: int, s: int, agents: int | None = None, seed: int = 0) -> Instance:
    """Star-chain instance; by default every leaf of the first star holds an agent."""
    g, x = build_star_chain(k, n, s)
    if agents is None:
        h = [g.vertex(f"v{i}^0") for i in range(1, n + 1)]
    else:
        free = [v for v in range(len(g)) if v not in x]
        if agents > len(free):
            raise InstanceError("more agents than non-exit vertices")
        h = random.Random(seed).sample(free, agents)
    meta = {"generator": "star-chain", "k": k, "n": n, "s": s, "seed": seed}
    return make_instance(g, x, h, meta)
