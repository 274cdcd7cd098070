"""Synchronous execution of agent moves, trace validation and metrics.

Agents are numbered ``0..k-1`` by ascending homebase id. In each step every
live agent either stays or moves to a neighbour; end positions must be
pairwise distinct (so swaps and longer rotations are legal), and agents ending
a step on an exit are removed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .graph import Graph
from .instance import Instance


class MoveError(Exception):
    """An illegal step; ``kind`` is ``IllegalMove`` or ``Collision``."""

    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


class IllegalMove(MoveError):
    def __init__(self, message: str):
        super().__init__("IllegalMove", message)


class Collision(MoveError):
    def __init__(self, message: str):
        super().__init__("Collision", message)


StepMoves = Mapping[int, int]
"""Movers of one step: agent -> target vertex. Absent live agents stay."""


@dataclass
class WorldState:
    step: int
    positions: dict[int, int]
    evacuated: dict[int, int] = field(default_factory=dict)

    @classmethod
    def initial(cls, inst: Instance) -> "WorldState":
        return cls(0, {a: h for a, h in enumerate(inst.homebases)})

    def copy(self) -> "WorldState":
        return WorldState(self.step, dict(self.positions), dict(self.evacuated))

    @property
    def live(self) -> int:
        return len(self.positions)

    def occupancy(self) -> dict[int, int]:
        return {v: a for a, v in self.positions.items()}


def check_step(g: Graph, positions: Mapping[int, int], moves: StepMoves) -> None:
    """Raise :class:`MoveError` unless ``moves`` is a legal step from ``positions``."""
    if not moves:
        return
    for a, target in moves.items():
        if a not in positions:
            raise IllegalMove(f"agent {a} is not in the graph")
        if target != positions[a] and not g.adjacent(positions[a], target):
            raise IllegalMove(
                f"agent {a} cannot move {g.label(positions[a])} -> {g.label(target)}"
            )
    taken: dict[int, int] = {}
    for a, v in positions.items():
        end = moves.get(a, v)
        other = taken.get(end)
        if other is not None:
            raise Collision(f"agents {other} and {a} both end at {g.label(end)}")
        taken[end] = a


def apply_in_place(g: Graph, exits: frozenset[int], w: WorldState, moves: StepMoves) -> list[int]:
    """Apply one step to ``w``; returns the agents evacuated in this step."""
    check_step(g, w.positions, moves)
    w.step += 1
    gone = []
    for a, target in moves.items():
        w.positions[a] = target
    for a, target in moves.items():
        if target in exits:
            gone.append(a)
    for a in sorted(gone):
        del w.positions[a]
        w.evacuated[a] = w.step
    return sorted(gone)


def apply_step(g: Graph, exits: frozenset[int], w: WorldState, moves: StepMoves) -> WorldState:
    """Functional form of :func:`apply_in_place`."""
    nxt = w.copy()
    apply_in_place(g, exits, nxt, moves)
    return nxt


@dataclass
class Trace:
    """Per-step movers of an evacuation; ``claimed`` holds the evacuations a
    trace file asserted, which the validator checks against the replay."""

    steps: list[dict[int, int]]
    claimed: list[frozenset[int]] | None = None

    def __len__(self) -> int:
        return len(self.steps)


@dataclass
class TraceReport:
    valid: bool
    length: int | None
    evacuation_steps: dict[int, int]
    live: list[int] = field(default_factory=list)
    violation: str | None = None
    violation_step: int | None = None

    def summary(self) -> str:
        if self.valid:
            return f"valid, length {self.length}"
        where = f" at step {self.violation_step}" if self.violation_step is not None else ""
        return f"invalid: {self.violation}{where}"


def validate_trace(inst: Instance, trace: Trace) -> TraceReport:
    """Replay ``trace`` from the homebases and report the first violation."""
    g, exits = inst.graph, inst.exits
    w = WorldState.initial(inst)
    for idx, moves in enumerate(trace.steps, start=1):
        try:
            gone = apply_in_place(g, exits, w, moves)
        except MoveError as exc:
            return TraceReport(False, None, dict(w.evacuated), sorted(w.positions),
                               f"{exc.kind}: {exc}", idx)
        if trace.claimed is not None and frozenset(gone) != trace.claimed[idx - 1]:
            return TraceReport(False, None, dict(w.evacuated), sorted(w.positions),
                               "EvacuationMismatch: recorded evacuations differ from replay", idx)
    if w.positions:
        return TraceReport(False, None, dict(w.evacuated), sorted(w.positions),
                           f"Incomplete: {len(w.positions)} agents never evacuated", None)
    length = max(w.evacuated.values(), default=0)
    return TraceReport(True, length, dict(w.evacuated))


def trace_positions(inst: Instance, trace: Trace) -> list[dict[int, int]]:
    """Positions of live agents after each step (index 0 = homebases)."""
    w = WorldState.initial(inst)
    out = [dict(w.positions)]
    for moves in trace.steps:
        apply_in_place(inst.graph, inst.exits, w, moves)
        out.append(dict(w.positions))
    return out


def reverse_moves(history: list[dict[int, tuple[int, int]]], live: Iterable[int]) -> list[dict[int, int]]:
    """Time reversal of recorded moves (agent -> (from, to)) restricted to
    ``live`` agents; the last step is undone first."""
    live = set(live)
    return [
        {a: src for a, (src, _dst) in step.items() if a in live}
        for step in reversed(history)
    ]


def communication_groups(g: Graph, positions: Mapping[int, int]) -> list[list[int]]:
    """Maximal sets of agents that can exchange messages in one step: agents at
    distance at most two are linked, and links chain transitively."""
    owner: dict[int, list[int]] = {}
    for a, v in positions.items():
        for u in g.closed_neighborhood(v):
            owner.setdefault(u, []).append(a)
    parent = {a: a for a in positions}

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for agents in owner.values():
        r = find(agents[0])
        for b in agents[1:]:
            rb = find(b)
            if rb != r:
                parent[rb] = r
    groups: dict[int, list[int]] = {}
    for a in sorted(positions):
        groups.setdefault(find(a), []).append(a)
    return sorted(groups.values())


def is_group(g: Graph, positions: Mapping[int, int]) -> bool:
    return len(communication_groups(g, positions)) <= 1


def competitive_ratio(length: int, opt: int) -> Fraction:
    if opt <= 0:
        raise ZeroDivisionError("OPT must be positive")
    return Fraction(length, opt)


# -- trace files -------------------------------------------------------------

class TraceFormatError(ValueError):
    pass


def format_trace(inst: Instance, trace: Trace) -> str:
    """One line per step: the step index, ``agent:label`` for each mover and
    ``!agent`` for each agent evacuated in that step. The header records the
    number of steps so truncated files are detected."""
    g = inst.graph
    w = WorldState.initial(inst)
    lines = [f"# trace steps={len(trace.steps)} agents={inst.k}"]
    replay_ok = True
    for idx, moves in enumerate(trace.steps, start=1):
        gone: list[int] = []
        if replay_ok:
            try:
                gone = apply_in_place(g, inst.exits, w, moves)
            except MoveError:
                replay_ok = False
        parts = [str(idx)]
        parts += [f"{a}:{g.label(v)}" for a, v in sorted(moves.items())]
        parts += [f"!{a}" for a in gone]
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def parse_trace(inst: Instance, text: str) -> Trace:
    g = inst.graph
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# trace "):
        raise TraceFormatError("missing trace header")
    try:
        header = dict(kv.split("=", 1) for kv in lines[0][len("# trace "):].split())
        n_steps = int(header["steps"])
    except (KeyError, ValueError) as exc:
        raise TraceFormatError(f"bad trace header: {lines[0]!r}") from exc
    body = lines[1:]
    if len(body) != n_steps:
        raise TraceFormatError(f"expected {n_steps} step lines, found {len(body)}")
    steps, claimed = [], []
    for expect, line in enumerate(body, start=1):
        tokens = line.split()
        if not tokens or tokens[0] != str(expect):
            raise TraceFormatError(f"step line {expect} is malformed: {line!r}")
        moves: dict[int, int] = {}
        gone = set()
        for tok in tokens[1:]:
            try:
                if tok.startswith("!"):
                    gone.add(int(tok[1:]))
                else:
                    agent, label = tok.split(":", 1)
                    moves[int(agent)] = g.vertex(label)
            except (ValueError, KeyError) as exc:
                raise TraceFormatError(f"bad token {tok!r} in step {expect}") from exc
        steps.append(moves)
        claimed.append(frozenset(gone))
    return Trace(steps, claimed)
