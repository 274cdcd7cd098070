"""Centralized optimum via time-expanded maximum flow.

Node ``(v, t)`` of the layered network stands for "an agent is at v at the end
of step t". Every layer node is split into an in/out pair joined by a unit arc,
so at most one agent occupies a vertex per step and at most one agent leaves
through a given exit per step. Exit nodes feed only the sink, so agents cannot
walk through exits. Opposite moves along one edge in the same step are
permitted: they are swaps, which the model allows.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow

from .engine import Trace
from .graph import Graph, distances_to_exits, exit_avoiding_bfs
from .instance import Instance

SOURCE, SINK = 0, 1


class Infeasible(Exception):
    """Some agent cannot reach any exit."""


class TooLarge(Exception):
    """Instance exceeds the brute-force state-space guard."""


@dataclass
class FlowNetwork:
    horizon: int
    n_nodes: int
    tails: list[int]
    heads: list[int]
    caps: list[int]
    node_in: dict[tuple[int, int], int]
    node_out: dict[tuple[int, int], int]
    starts: tuple[int, ...]

    @property
    def n_arcs(self) -> int:
        return len(self.tails)

    def layer_nodes(self) -> set[tuple[int, int]]:
        return set(self.node_in)


@dataclass
class Strategy:
    """Routes ``paths[i]`` = (loc_0, ..., loc_{s_i}) aligned with ``starts``;
    each route ends at its first exit."""

    starts: tuple[int, ...]
    paths: tuple[tuple[int, ...], ...]

    @property
    def evacuation_steps(self) -> tuple[int, ...]:
        return tuple(len(p) - 1 for p in self.paths)

    @property
    def length(self) -> int:
        return max(self.evacuation_steps, default=0)

    def position(self, i: int, t: int) -> int | None:
        """Location of route ``i`` at the end of step ``t`` (None once evacuated)."""
        p = self.paths[i]
        return p[t] if t < len(p) else None


@dataclass
class OptResult:
    opt: int
    witness: Strategy


def build_time_expanded(
    g: Graph,
    exits: frozenset[int],
    starts,
    horizon: int,
    dist_to_exit: dict[int, int] | None = None,
    prune: bool = True,
) -> FlowNetwork:
    """Layered network for agents starting at ``starts`` with ``horizon`` steps.

    Layer nodes that cannot be reached from a start in time, or cannot reach an
    exit before the horizon, are pruned unless ``prune`` is false; they carry
    no flow in any case."""
    starts = tuple(starts)
    if dist_to_exit is None:
        dist_to_exit = distances_to_exits(g, exits)
    d_start = exit_avoiding_bfs(g, exits, starts, limit=horizon if prune else None)
    T = horizon
    node_in: dict[tuple[int, int], int] = {}
    node_out: dict[tuple[int, int], int] = {}
    tails: list[int] = []
    heads: list[int] = []
    n = 2
    for t in range(T + 1):
        for v in sorted(d_start):
            if prune and d_start[v] > t:
                continue
            if v in exits:
                if t == 0:
                    continue
            elif prune:
                de = dist_to_exit.get(v)
                if de is None or de > T - t:
                    continue
            node_in[v, t] = n
            node_out[v, t] = n + 1
            tails.append(n)
            heads.append(n + 1)
            n += 2
    for h in starts:
        if (h, 0) in node_in:
            tails.append(SOURCE)
            heads.append(node_in[h, 0])
    for (v, t), out in node_out.items():
        if v in exits:
            tails.append(out)
            heads.append(SINK)
            continue
        for w in (v, *g.adj[v]):
            nxt = node_in.get((w, t + 1))
            if nxt is not None:
                tails.append(out)
                heads.append(nxt)
    return FlowNetwork(T, n, tails, heads, [1] * len(tails), node_in, node_out, starts)


def max_flow(net: FlowNetwork) -> tuple[int, dict[int, int]]:
    """Integral maximum flow; returns the value and the successor of every node
    that carries a unit of flow (unit node capacities make it unique)."""
    if net.n_arcs == 0:
        return 0, {}
    m = csr_matrix(
        (np.asarray(net.caps, dtype=np.int32), (np.asarray(net.tails), np.asarray(net.heads))),
        shape=(net.n_nodes, net.n_nodes),
    )
    res = maximum_flow(m, SOURCE, SINK, method="dinic")
    flow = res.flow.tocoo()
    succ: dict[int, int] = {}
    positive = flow.data > 0
    for u, v in zip(flow.row[positive].tolist(), flow.col[positive].tolist()):
        if u != SOURCE:
            succ[u] = v
    return int(res.flow_value), succ


def _decompose(net: FlowNetwork, succ: dict[int, int]) -> Strategy:
    vertex_of = {node: v for (v, _t), node in net.node_in.items()}
    paths = []
    for h in net.starts:
        node = net.node_in[h, 0]
        path = [h]
        while True:
            node = succ[succ[node]]  # in -> out -> next in (or sink)
            if node == SINK:
                break
            path.append(vertex_of[node])
        paths.append(tuple(path))
    return Strategy(net.starts, tuple(paths))


def _solve(g, exits, starts, horizon, dist_to_exit) -> Strategy | None:
    net = build_time_expanded(g, exits, starts, horizon, dist_to_exit)
    value, succ = max_flow(net)
    if value < len(starts):
        return None
    return _decompose(net, succ)


def _check_reachable(starts, dist_to_exit) -> int:
    lower = 0
    for h in starts:
        d = dist_to_exit.get(h)
        if d is None:
            raise Infeasible(f"vertex {h} has no reachable exit")
        lower = max(lower, d)
    return lower


def compute_opt(inst: Instance) -> OptResult:
    """Minimum evacuation length and a witness strategy achieving it.

    The horizon is doubled until feasible, then binary-searched."""
    return _optimum(inst.graph, inst.exits, inst.homebases)


def _optimum(g: Graph, exits: frozenset[int], starts, cap: int | None = None) -> OptResult | None:
    starts = tuple(starts)
    if not starts:
        return OptResult(0, Strategy((), ()))
    dist_to_exit = distances_to_exits(g, exits)
    lower = _check_reachable(starts, dist_to_exit)
    limit = cap if cap is not None else lower + len(starts) * len(g) + 1
    # Doubling phase.
    hi = max(1, lower)
    best = None
    lo = lower - 1
    while True:
        probe = min(hi, limit)
        best = _solve(g, exits, starts, probe, dist_to_exit)
        if best is not None:
            hi = probe
            break
        lo = probe
        if probe >= limit:
            if cap is not None:
                return None
            raise Infeasible("no evacuation within the search limit")
        hi *= 2
    # Binary search on (lo, hi]; hi feasible.
    while hi - lo > 1:
        mid = (lo + hi) // 2
        sol = _solve(g, exits, starts, mid, dist_to_exit)
        if sol is None:
            lo = mid
        else:
            hi, best = mid, sol
    return OptResult(hi, best)


def exclusive_strategy(g: Graph, exits: frozenset[int], positions, horizon: int) -> Strategy | None:
    """Shortest strategy evacuating agents at ``positions`` (with every exit to
    themselves) within ``horizon`` steps, or None if there is none."""
    positions = tuple(positions)
    if not positions:
        return Strategy((), ())
    if horizon <= 0:
        return None
    try:
        res = _optimum(g, exits, positions, cap=horizon)
    except Infeasible:
        return None
    return None if res is None else res.witness


def strategy_to_trace(strategy: Strategy) -> Trace:
    """Per-step movers; agent ``i`` follows ``strategy.paths[i]``."""
    steps = []
    for t in range(1, strategy.length + 1):
        moves = {}
        for i, p in enumerate(strategy.paths):
            if t < len(p) and p[t] != p[t - 1]:
                moves[i] = p[t]
        steps.append(moves)
    return Trace(steps)


def brute_force_opt(inst: Instance, max_vertices: int = 10, max_agents: int = 3) -> int:
    """Minimum evacuation length by BFS over joint configurations.

    Agents are interchangeable, so a configuration is the set of occupied
    vertices. Every combination of simultaneous stay/move actions with pairwise
    distinct end vertices is a transition; occupants of exits are removed."""
    g, exits = inst.graph, inst.exits
    if len(g) > max_vertices or inst.k > max_agents:
        raise TooLarge(f"|V|={len(g)}, k={inst.k} exceeds the brute-force guard")
    start = tuple(sorted(inst.homebases))
    seen = {start: 0}
    queue = deque([start])
    while queue:
        state = queue.popleft()
        if not state:
            return seen[state]
        options = [(v, *g.adj[v]) for v in state]
        for ends in itertools.product(*options):
            if len(set(ends)) != len(ends):
                continue
            nxt = tuple(sorted(v for v in ends if v not in exits))
            if nxt not in seen:
                seen[nxt] = seen[state] + 1
                queue.append(nxt)
    raise Infeasible("no configuration sequence empties the graph")
