"""Invariants checked on generated inputs."""

import random

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from evacuation.engine import (Collision, MoveError, WorldState, apply_in_place, is_group,
                               reverse_moves, validate_trace)
from evacuation.framework import Simulation, evacuate, generic_provider, grid_provider, group_agents, one_attempt
from evacuation.graph import Graph, bfs_tree, build_grid, exit_avoiding_distance
from evacuation.grid import grid_partition
from evacuation.instance import dumps, gen_grid, loads, make_instance
from evacuation.offline import brute_force_opt, compute_opt, strategy_to_trace
from evacuation.zoning import Zone, validate_partition

from helpers import is_connected_group, naive_distance

SETTINGS = settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@st.composite
def small_instances(draw, max_vertices=7, max_agents=3):
    nv = draw(st.integers(2, max_vertices))
    parents = [draw(st.integers(0, i - 1)) for i in range(1, nv)]
    edges = {(p, i) for i, p in enumerate(parents, start=1)}
    extra = draw(st.lists(st.tuples(st.integers(0, nv - 1), st.integers(0, nv - 1)), max_size=4))
    edges |= {(min(a, b), max(a, b)) for a, b in extra if a != b}
    g = Graph.from_edges([f"u{i}" for i in range(nv)], edges)
    exits = draw(st.sets(st.integers(0, nv - 1), min_size=1, max_size=2))
    free = [v for v in range(nv) if v not in exits]
    homes = draw(st.sets(st.sampled_from(free), max_size=min(max_agents, len(free)))) if free else set()
    return make_instance(g, exits, homes)


@SETTINGS
@given(small_instances())
def test_opt_matches_brute_force(inst):
    res = compute_opt(inst)
    assert res.opt == brute_force_opt(inst)
    report = validate_trace(inst, strategy_to_trace(res.witness))
    assert report.valid and report.length == res.opt


@SETTINGS
@given(small_instances(), st.integers(0, 10**6))
def test_random_steps_keep_positions_injective_and_reverse(inst, seed):
    rng = random.Random(seed)
    g, exits = inst.graph, inst.exits
    w = WorldState.initial(inst)
    history = []
    for _ in range(6):
        moves = {a: rng.choice((v, *g.adj[v])) for a, v in w.positions.items()}
        moves = {a: v for a, v in moves.items() if v != w.positions[a]}
        before = dict(w.positions)
        try:
            apply_in_place(g, exits, w, moves)
        except MoveError:
            assert w.positions == before
            continue
        assert len(set(w.positions.values())) == len(w.positions)
        assert not set(w.positions.values()) & exits
        history.append({a: (before[a], v) for a, v in moves.items()})
    live = list(w.positions)
    for back in reverse_moves(history, live):
        apply_in_place(g, exits, w, back)
    assert all(w.positions[a] == inst.homebases[a] for a in live)


@SETTINGS
@given(small_instances(max_vertices=6))
def test_distance_matches_enumeration(inst):
    g, exits = inst.graph, inst.exits
    for u in range(len(g)):
        for v in range(len(g)):
            d = exit_avoiding_distance(g, exits, u, v)
            assert d == naive_distance(g, exits, u, v)
            assert d == exit_avoiding_distance(g, exits, v, u)


@SETTINGS
@given(st.integers(1, 9), st.sampled_from([2, 4, 6, 8]), st.integers(0, 10**6))
def test_grid_partition_is_valid(n, B, seed):
    rng = random.Random(seed)
    g = build_grid(n)
    exits = frozenset(rng.sample(range(n * n), rng.randint(0, n * n // 3)))
    report = validate_partition(grid_partition(g, exits, B), g, exits, subsets=8, seed=seed)
    assert report.ok, report.message


@SETTINGS
@given(st.integers(2, 7), st.integers(0, 10**6))
def test_grouping_forms_group_within_depth(n, seed):
    rng = random.Random(seed)
    g = build_grid(n)
    root = rng.randrange(n * n)
    tree = bfs_tree(g, root)
    B = tree.height
    zone = Zone(0, frozenset(range(n * n)), root, (tree,), False)
    positions = rng.sample(range(n * n), rng.randint(1, n * n))
    schedule = group_agents(g, zone, positions, max(B, 1))
    assert len(schedule) <= max(B, 1)
    pos = list(positions)
    for moves in schedule:
        ends = [moves.get(i, v) for i, v in enumerate(pos)]
        assert len(set(ends)) == len(ends)
        for i, v in moves.items():
            assert g.adjacent(pos[i], v)
        pos = ends
    assert is_connected_group(g, pos)
    assert is_group(g, dict(enumerate(pos)))


@SETTINGS
@given(st.integers(2, 8), st.integers(1, 4), st.integers(0, 10**4), st.sampled_from(["grid", "generic"]))
def test_framework_trace_valid_and_within_budget(n, exits, seed, provider):
    exits = min(exits, n * n - 1)
    k = max(1, (n * n - exits) // 3)
    inst = gen_grid(n, exits, k, seed)
    prov = grid_provider if provider == "grid" else generic_provider
    res = evacuate(inst, prov)
    report = validate_trace(inst, res.trace)
    assert report.valid, report.summary()
    assert res.length <= res.budget
    assert all(e.at_homebase for e in res.epochs[:-1])


@SETTINGS
@given(st.integers(2, 8), st.integers(0, 10**4))
def test_failed_attempt_restores_homebases(n, seed):
    inst = gen_grid(n, 1, max(1, n * n // 4), seed)
    sim = Simulation(inst)
    one_attempt(sim, grid_provider(inst.graph, inst.exits, 2))
    for a, v in sim.world.positions.items():
        assert v == inst.homebases[a]


@SETTINGS
@given(st.integers(1, 8), st.integers(0, 10**4), st.sampled_from(["random", "border", "rows"]))
def test_instance_round_trip(n, seed, mode):
    try:
        inst = gen_grid(n, 1, 1 if n > 1 else 0, seed, mode)
    except ValueError:
        return
    assert loads(dumps(inst)) == inst
