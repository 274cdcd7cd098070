"""The distributed evacuation strategy: epochs of doubling B, phases per color
class of the zone graph, grouping, exclusive strategies and backtracking.

Everything here is simulated centrally, but each zone's plan is computed by
:func:`plan_zone` from an :class:`AgentKnowledge` record only, i.e. from what
the agents of one zone know after grouping: the graph, the exits, B, their
zone and their own positions.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field

from .engine import Trace, WorldState, apply_in_place, communication_groups, reverse_moves
from .graph import Graph, distances_to_exits
from .instance import Instance
from .offline import Infeasible, Strategy, exclusive_strategy
from .zoning import BPartition, Coloring, Provider, Zone, build_zone_graph, greedy_coloring

log = logging.getLogger(__name__)

MAX_STEPS = 2**40


@dataclass(frozen=True)
class AgentKnowledge:
    graph: Graph
    exits: frozenset[int]
    B: int
    zone: Zone
    positions: tuple[int, ...]


@dataclass(frozen=True)
class ZonePlan:
    """Moves of one zone in a phase. For a self-sufficient zone ``routes`` are
    the internal routes of the occupied starts. Otherwise ``grouping`` holds
    per-step moves (index into ``positions`` -> target), ``grouped`` the
    positions afterwards and ``exclusive`` the strategy run from there."""

    zone_id: int
    positions: tuple[int, ...]
    routes: tuple[tuple[int, ...], ...] = ()
    grouping: tuple[tuple[tuple[int, int], ...], ...] = ()
    grouped: tuple[int, ...] = ()
    exclusive: Strategy | None = None

    def fingerprint(self) -> bytes:
        ex = None if self.exclusive is None else self.exclusive.paths
        return repr((self.zone_id, self.positions, self.routes, self.grouping,
                     self.grouped, ex)).encode()


def group_agents(g: Graph, zone: Zone, positions, B: int) -> list[dict[int, int]]:
    """Grouping moves for agents at ``positions`` (indices into that sequence).

    Each step, agents advance one tree edge towards the zone center when the
    parent vertex will be free; agents are decided in order of depth, then
    vertex id, so a parent vertex being vacated in the same step counts as free
    and the smaller vertex id wins a contested parent. The schedule stops as
    soon as the agents form a group, after at most B steps."""
    tree = zone.tree
    pos = list(positions)
    schedule: list[dict[int, int]] = []
    if tree is None or not pos:
        return schedule
    for _ in range(B):
        if len(communication_groups(g, dict(enumerate(pos)))) <= 1:
            break
        order = sorted(range(len(pos)), key=lambda i: (tree.depth[pos[i]], pos[i]))
        taken: set[int] = set()
        moves: dict[int, int] = {}
        for i in order:
            u = pos[i]
            p = tree.parent.get(u)
            if p is None or p in taken:
                taken.add(u)
            else:
                moves[i] = p
                taken.add(p)
        if not moves:
            break
        # A mover's parent may still hold an agent that decided to stay later
        # in the order only if that agent is deeper, which cannot happen.
        for i, p in moves.items():
            pos[i] = p
        schedule.append(moves)
    return schedule


def plan_zone(k: AgentKnowledge) -> ZonePlan:
    """The plan the agents of one zone compute for a phase."""
    z = k.zone
    if z.self_sufficient:
        routes = tuple(z.plan.schedules[v] for v in k.positions)
        return ZonePlan(z.id, k.positions, routes=routes)
    schedule = group_agents(k.graph, z, k.positions, k.B)
    pos = list(k.positions)
    for moves in schedule:
        for i, p in moves.items():
            pos[i] = p
    grouped = tuple(pos)
    strategy = exclusive_strategy(k.graph, k.exits, grouped, 2 * k.B)
    grouping = tuple(tuple(sorted(m.items())) for m in schedule)
    return ZonePlan(z.id, k.positions, grouping=grouping, grouped=grouped, exclusive=strategy)


def backtrack_prefix(history: list[dict[int, tuple[int, int]]], evacuated) -> list[dict[int, int]]:
    """Reverse schedule for a forward window: every agent not in ``evacuated``
    retraces its recorded moves, last step first."""
    gone = set(evacuated)
    live = {a for step in history for a in step} - gone
    return reverse_moves(history, live)


def zone_knowledge(g: Graph, exits: frozenset[int], p: BPartition, zid: int,
                   positions: dict[int, int], homebase: dict[int, int]) -> AgentKnowledge:
    """What the agents whose homebase lies in zone ``zid`` know at the start of
    a phase, given the live positions of all agents."""
    mine = sorted(v for a, v in positions.items() if p.zone_of[homebase[a]] == zid)
    return AgentKnowledge(g, exits, p.B, p.zones[zid], tuple(mine))


def knowledge_guard(g: Graph, exits: frozenset[int], p: BPartition, zid: int,
                    before: tuple[dict[int, int], dict[int, int]],
                    after: tuple[dict[int, int], dict[int, int]]) -> bool:
    """True when zone ``zid`` computes byte-identical plans in two worlds, each
    given as (positions, homebase) maps, that differ only outside the zone."""
    a = plan_zone(zone_knowledge(g, exits, p, zid, *before))
    b = plan_zone(zone_knowledge(g, exits, p, zid, *after))
    return a.fingerprint() == b.fingerprint()


@dataclass
class PhaseRecord:
    color: int
    zones: list[int]
    evacuated: int
    failed: list[int] = field(default_factory=list)
    aborted: list[int] = field(default_factory=list)
    pushes: int = 0


@dataclass
class EpochRecord:
    index: int
    B: int
    d: int
    n_zones: int
    max_degree: int
    steps: int
    evacuated: int
    phases: list[PhaseRecord] = field(default_factory=list)
    at_homebase: bool = True


@dataclass
class EvacuationResult:
    trace: Trace
    epochs: list[EpochRecord]
    k: int

    @property
    def length(self) -> int:
        return len(self.trace.steps)

    @property
    def budget(self) -> int:
        """Steps the executed epochs may take: 6 * sum of d_j * B_j."""
        return sum(6 * e.d * e.B for e in self.epochs)


class Simulation:
    """Mutable world plus the recorded step sequence."""

    def __init__(self, inst: Instance):
        self.inst = inst
        self.g = inst.graph
        self.exits = inst.exits
        self.world = WorldState.initial(inst)
        self.steps: list[dict[int, int]] = []
        self.homebase = dict(enumerate(inst.homebases))

    def step(self, moves: dict[int, int], history: list | None = None) -> list[int]:
        pos = self.world.positions
        if history is not None:
            history.append({a: (pos[a], v) for a, v in moves.items()})
        gone = apply_in_place(self.g, self.exits, self.world, moves)
        self.steps.append(moves)
        return gone

    def idle(self, count: int) -> None:
        self.world.step += count
        self.steps.extend({} for _ in range(count))


def _push_path(g: Graph, exits, start: int, claimed: set[int], idle_at: dict[int, int],
               pushed: set[int]) -> list[int] | None:
    """Shortest chain start=w0, w1, ..., wq along which the idle bodies at
    w0..w_{q-1} each shift one vertex forward; wq must be free at step end.
    An unclaimed exit may end the chain, evacuating the last body pushed."""
    prev = {start: start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for w in g.adj[u]:
            if w in prev or w in claimed:
                continue
            prev[w] = u
            body = idle_at.get(w)
            if w in exits or body is None or body in pushed:
                path = [w]
                while path[-1] != start:
                    path.append(prev[path[-1]])
                return path[::-1]
            queue.append(w)
    return None


def single_phase(run: Simulation, p: BPartition, active: list[int], color: int = 0) -> tuple[PhaseRecord, list]:
    """Forward window of 3B steps for the zones in ``active``; returns the
    phase record and the per-step move history used for backtracking."""
    B = p.B
    g, exits = run.g, run.exits
    pos = run.world.positions
    members: dict[int, list[int]] = {}
    for a in sorted(pos):
        zid = p.zone_of[run.homebase[a]]
        members.setdefault(zid, []).append(a)
    zones = [z for z in active if members.get(z)]
    record = PhaseRecord(color, zones, 0)
    history: list[dict[int, tuple[int, int]]] = []
    if not zones:
        run.idle(3 * B)
        history.extend({} for _ in range(3 * B))
        return record, history

    plans: dict[int, ZonePlan] = {}
    agents_of: dict[int, list[int]] = {}
    for zid in zones:
        agents_of[zid] = sorted(members[zid], key=lambda a: pos[a])
        plans[zid] = plan_zone(zone_knowledge(g, exits, p, zid, pos, run.homebase))

    # Steps t .. t+B-1: internal strategies and grouping.
    for t in range(1, B + 1):
        moves: dict[int, int] = {}
        for zid in zones:
            plan, agents = plans[zid], agents_of[zid]
            if plan.routes:
                for a, route in zip(agents, plan.routes):
                    if t < len(route) and route[t] != route[t - 1]:
                        moves[a] = route[t]
            elif t <= len(plan.grouping):
                for i, target in plan.grouping[t - 1]:
                    moves[agents[i]] = target
        gone = run.step(moves, history)
        record.evacuated += len(gone)

    # Steps t+B .. t+3B-1: exclusive strategies.
    route_of: dict[int, tuple[int, ...]] = {}
    zone_of_agent: dict[int, int] = {}
    running: set[int] = set()
    for zid in zones:
        plan = plans[zid]
        if p.zones[zid].self_sufficient:
            continue
        agents = agents_of[zid]
        assert tuple(pos[a] for a in agents) == plan.grouped, "grouping diverged from plan"
        if plan.exclusive is None:
            record.failed.append(zid)
            continue
        running.add(zid)
        for a, path in zip(agents, plan.exclusive.paths):
            route_of[a] = path
            zone_of_agent[a] = zid

    for t in range(1, 2 * B + 1):
        while True:
            targets = {a: route_of[a][t] for a in sorted(route_of)
                       if a in pos and zone_of_agent[a] in running}
            ends: dict[int, int] = {}
            losers: set[int] = set()
            for a in sorted(targets, key=lambda a: (zone_of_agent[a], a)):
                e = targets[a]
                owner = ends.get(e)
                if owner is not None and zone_of_agent[owner] != zone_of_agent[a]:
                    losers.add(zone_of_agent[a])
                ends.setdefault(e, a)
            if losers:
                running -= losers
                record.aborted += sorted(losers)
                continue
            idle_at = {v: a for a, v in pos.items() if a not in targets}
            claimed = set(ends)
            pushed: set[int] = set()
            idle_moves: dict[int, int] = {}
            blocked = None
            for y in sorted(v for v in ends if v in idle_at):
                if idle_at[y] in pushed:
                    continue
                chain = _push_path(g, exits, y, claimed, idle_at, pushed)
                if chain is None:
                    blocked = zone_of_agent[ends[y]]
                    break
                for u, w in zip(chain, chain[1:]):
                    body = idle_at[u]
                    idle_moves[body] = w
                    pushed.add(body)
                    claimed.add(w)
            if blocked is not None:
                running.discard(blocked)
                record.aborted.append(blocked)
                continue
            break
        moves = {a: v for a, v in targets.items() if v != pos[a]}
        moves.update(idle_moves)
        record.pushes += len(idle_moves)
        gone = run.step(moves, history)
        record.evacuated += len(gone)
    return record, history


def one_attempt(run: Simulation, p: BPartition, index: int = 0) -> EpochRecord:
    """All phases for one B-partition: 6 d B steps in total."""
    g, exits = run.g, run.exits
    zg = build_zone_graph(p, g, exits)
    coloring: Coloring = greedy_coloring(zg)
    rec = EpochRecord(index, p.B, coloring.d, len(p.zones), zg.max_degree, 6 * coloring.d * p.B, 0)
    for color, zone_ids in enumerate(coloring.classes(), start=1):
        if not run.world.positions:
            break
        phase, history = single_phase(run, p, zone_ids, color)
        for moves in backtrack_prefix(history, run.world.evacuated):
            run.step(moves)
        rec.phases.append(phase)
        rec.evacuated += phase.evacuated
    rec.at_homebase = all(run.homebase[a] == v for a, v in run.world.positions.items())
    return rec


def grid_provider(g: Graph, exits: frozenset[int], B: int) -> BPartition:
    from .grid import grid_partition

    return grid_partition(g, exits, B)


def generic_provider(g: Graph, exits: frozenset[int], B: int) -> BPartition:
    from .zoning import singleton_partition

    return singleton_partition(g, exits, B)


PROVIDERS: dict[str, Provider] = {"grid": grid_provider, "generic": generic_provider}


def evacuate(inst: Instance, provider: Provider = generic_provider, start_B: int = 2,
             max_steps: int = MAX_STEPS) -> EvacuationResult:
    """Run epochs with B = start_B, 2 start_B, ... until every agent has left."""
    if start_B < 1:
        raise ValueError("start_B must be positive")
    dist = distances_to_exits(inst.graph, inst.exits)
    stuck = [h for h in inst.homebases if h not in dist]
    if stuck:
        raise Infeasible(f"no exit reachable from {inst.graph.label(stuck[0])}")
    run = Simulation(inst)
    epochs: list[EpochRecord] = []
    B = start_B
    consumed = 0
    while run.world.positions:
        if consumed > max_steps:
            raise RuntimeError("step cap exceeded; the partition provider is likely broken")
        p = provider(inst.graph, inst.exits, B)
        before = len(run.steps)
        rec = one_attempt(run, p, len(epochs) + 1)
        epochs.append(rec)
        consumed += rec.steps
        log.debug("epoch %d: B=%d d=%d evacuated=%d live=%d", rec.index, B, rec.d,
                  rec.evacuated, len(run.world.positions))
        if run.world.positions:
            run.idle(before + rec.steps - len(run.steps))
        B *= 2
    last = max(run.world.evacuated.values(), default=0)
    return EvacuationResult(Trace(run.steps[:last]), epochs, inst.k)
