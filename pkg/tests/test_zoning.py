import dataclasses

from evacuation.graph import RootedTree, bfs_tree, build_grid
from evacuation.zoning import (BPartition, ObliviousPlan, Zone, ZoneGraph, build_zone_graph,
                               greedy_coloring, singleton_partition, validate_partition,
                               zones_close)

from helpers import path_graph


def single(zid, v, ss=False):
    plan = ObliviousPlan({}) if ss else None
    return Zone(zid, frozenset({v}), v, (RootedTree(v, {}, {v: 0}),), ss, plan)


def test_zones_close_boundary():
    g = path_graph(10)
    B = 2
    a, b, c = single(0, 0), single(1, 4), single(2, 5)
    assert zones_close(a, b, B, g, frozenset())
    assert not zones_close(a, c, B, g, frozenset())
    assert zones_close(a, a, B, g, frozenset())


def test_closeness_ignores_paths_through_exits():
    g = path_graph(3)
    assert not zones_close(single(0, 0), single(1, 2), 2, g, frozenset({1}))


def zone_graph_of(g, zones, B=2, exits=frozenset()):
    return build_zone_graph(BPartition(B, zones), g, exits)


def test_zone_graph_examples():
    g = path_graph(2)
    assert zone_graph_of(g, [single(0, 0), single(1, 1)]).edges() == [(0, 1)]
    assert zone_graph_of(g, [single(0, 0, ss=True), single(1, 1)]).edges() == []
    assert zone_graph_of(g, [single(0, 0, ss=True), single(1, 1, ss=True)]).edges() == []


def test_greedy_coloring_examples():
    assert greedy_coloring(ZoneGraph([(), ()])).color == [1, 1]
    c = greedy_coloring(ZoneGraph([(1,), (0,)]))
    assert (c.color, c.d) == ([1, 2], 2)
    tri = greedy_coloring(ZoneGraph([(1, 2), (0, 2), (0, 1)]))
    assert tri.d == 3 and tri.classes() == [[0], [1], [2]]


def test_singletons_pass_validation():
    g = build_grid(4)
    exits = frozenset({0, 15})
    for B in (1, 2, 5):
        p = singleton_partition(g, exits, B)
        assert validate_partition(p, g, exits).ok


def test_singleton_partition_claims_adjacent_exits():
    g = path_graph(4)
    p = singleton_partition(g, frozenset({3}), 2)
    z = p.zones[p.zone_of[2]]
    assert z.self_sufficient and z.vertices == {2, 3}
    assert z.plan.schedules == {2: (2, 3)}
    assert not p.zones[p.zone_of[0]].self_sufficient


def test_overlap_fails_condition_i():
    g = path_graph(2)
    zones = [single(0, 0), Zone(1, frozenset({0, 1}), 1, (RootedTree(1, {}, {1: 0}),), False)]
    report = validate_partition(BPartition(2, zones, {0: 0, 1: 1}), g, frozenset())
    assert not report.ok and report.message.startswith("cover")


def test_deep_tree_fails_condition_ii():
    g = path_graph(4)
    B = 2
    tree = bfs_tree(g, 0)
    zone = Zone(0, frozenset(range(4)), 0, (tree,), False)
    report = validate_partition(BPartition(B, [zone]), g, frozenset())
    assert not report.ok and report.message.startswith("spanning tree")
    assert validate_partition(BPartition(3, [zone]), g, frozenset()).ok


def test_colliding_plan_is_rejected():
    g = path_graph(3)
    tree = bfs_tree(g, 1, forbidden={2})
    bad = ObliviousPlan({0: (0, 1, 2), 1: (1, 1, 2)})
    zone = Zone(0, frozenset(range(3)), 1, (tree,), True, bad)
    report = validate_partition(BPartition(2, [zone]), g, frozenset({2}))
    assert not report.ok and "collision" in report.message
    good = dataclasses.replace(zone, plan=ObliviousPlan({0: (0, 0, 1, 2), 1: (1, 2)}))
    assert validate_partition(BPartition(3, [good]), g, frozenset({2})).ok
