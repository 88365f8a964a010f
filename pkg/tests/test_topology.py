import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fkdyn.topology import (Graph, GraphValidationError, TreeSpec, bfs_ball, build_tree,
                            edges_between, from_text, generate_random_regular,
                            induced_subgraph, random_tree, random_unicyclic, subtree,
                            to_text, tree_excess)

from conftest import complete, cycle


def test_graph_rejects_loops_and_duplicates():
    with pytest.raises(GraphValidationError):
        Graph(2, [(0, 0)])
    with pytest.raises(GraphValidationError):
        Graph(2, [(0, 1), (1, 0)])
    with pytest.raises(GraphValidationError):
        Graph(2, [(0, 2)])


def test_rooted_depths_are_bfs_distances():
    g = cycle(6).with_root(0)
    assert list(g.depth) == [0, 1, 2, 3, 2, 1]
    for u, v in g.edges:
        assert abs(g.depth[u] - g.depth[v]) <= 1


def test_dary_counts():
    g = build_tree(TreeSpec("d-ary", 3, 2))
    assert (g.n, g.m, g.degree(g.root)) == (7, 6, 2)
    assert g.is_tree()
    assert set(g.depth[g.leaves()]) == {2}


def test_regular_counts():
    g = build_tree(TreeSpec("regular", 3, 2))
    assert (g.n, g.m, g.degree(g.root)) == (10, 9, 3)


@pytest.mark.parametrize("delta,h", [(3, 4), (4, 3), (5, 2)])
def test_dary_degree_profile(delta, h):
    g = build_tree(TreeSpec("d-ary", delta, h))
    ch = [len(c) for c in g.children_lists()]
    internal = g.depth < h
    assert all(c == delta - 1 for c in np.asarray(ch)[internal])
    assert all(c == 0 for c in np.asarray(ch)[~internal])


def test_unicyclic_excess_one():
    # leaves 3 and 4 share the grandparent 0 through vertex 1
    g = build_tree(TreeSpec("unicyclic", 3, 2, root_children=2, defect=(3, 4)))
    assert tree_excess(g) == 1
    assert g.m == g.n


def test_almost_i_defect_has_one_child_fewer():
    g = build_tree(TreeSpec("almost-i", 4, 3, defect=2))
    assert len(g.children(2)) == 2
    assert len(g.children(1)) == 3
    assert g.degree(g.root) == 4


def test_almost_ii_delta3_root_has_one_child():
    g = build_tree(TreeSpec("almost-ii", 3, 3))
    assert g.degree(g.root) == 1
    assert g.is_tree()


@pytest.mark.parametrize("spec", [
    TreeSpec("d-ary", 2, 3),
    TreeSpec("d-ary", 3, 0),
    TreeSpec("weird", 3, 2),
    TreeSpec("unicyclic", 3, 2),
    TreeSpec("unicyclic", 3, 2, defect=(0, 1)),
    TreeSpec("unicyclic", 3, 2, defect=(3, 99)),
    TreeSpec("almost-i", 3, 2),
    TreeSpec("almost-i", 3, 2, defect=5),
])
def test_build_tree_rejects_bad_specs(spec):
    with pytest.raises(GraphValidationError):
        build_tree(spec)


def test_random_regular_k4():
    g = generate_random_regular(4, 3, seed=0)
    key = {tuple(sorted(map(int, e))) for e in g.edges}
    assert key == {tuple(sorted(map(int, e))) for e in complete(4).edges}


def test_random_regular_deterministic():
    a = generate_random_regular(10, 3, seed=7)
    b = generate_random_regular(10, 3, seed=7)
    assert np.array_equal(a.edges, b.edges)


def test_random_regular_parity():
    with pytest.raises(GraphValidationError):
        generate_random_regular(5, 3, seed=0)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(4, 60).filter(lambda n: n % 2 == 0), seed=st.integers(0, 10 ** 6))
def test_random_regular_is_simple_and_regular(n, seed):
    g = generate_random_regular(n, 3, seed=seed)
    assert np.all(g.degrees() == 3)
    assert len({tuple(sorted(map(int, e))) for e in g.edges}) == g.m


@pytest.mark.parametrize("n", [10, 20])
def test_small_rrg_balls_mostly_treelike(n):
    # the formula gives radius 0 at these sizes; balls need radius >= 1
    r = max(1, int(np.floor(0.2 * np.log2(n))))
    ok = total = 0
    for seed in range(100):
        g = generate_random_regular(n, 3, seed=seed)
        for e in range(g.m):
            ok += bfs_ball(g, e, r).tree_excess <= 1
            total += 1
    assert ok / total >= 0.9


def test_ball_on_cycle():
    b = bfs_ball(cycle(5), 2, 2)
    assert b.subgraph.n == 5 and b.tree_excess == 1
    assert b.center == 2


def test_ball_whole_tree():
    g = build_tree(TreeSpec("d-ary", 3, 3))
    b = bfs_ball(g, 0, 3)
    # the center is the root endpoint 0 of edge 0
    assert b.subgraph.n == g.n and b.tree_excess == 0
    assert set(b.boundary) == set(g.leaves())


def test_ball_k4_excess():
    b = bfs_ball(complete(4), 0, 1)
    assert b.subgraph.m == 6 and b.tree_excess == 3


def test_ball_center_is_smaller_endpoint():
    g = Graph(3, [(2, 1), (1, 0)])
    assert bfs_ball(g, 0, 1).center == 1


def test_ball_boundary_and_monotone():
    g = generate_random_regular(40, 3, seed=3)
    for e in range(0, g.m, 7):
        b1, b2 = bfs_ball(g, e, 1), bfs_ball(g, e, 2)
        assert set(b1.vertices) <= set(b2.vertices)
        depth = g.with_root(b2.center).depth
        assert all(depth[v] == 2 for v in b2.boundary)
        assert set(b2.boundary) == {int(v) for v in b2.vertices if depth[v] == 2}


def test_ball_bad_args():
    with pytest.raises(GraphValidationError):
        bfs_ball(cycle(5), 9, 1)
    with pytest.raises(GraphValidationError):
        bfs_ball(cycle(5), 0, 0)


def test_subtree_cases():
    g = build_tree(TreeSpec("d-ary", 3, 3))
    sub, vmap, _ = subtree(g, g.root)
    assert sub.n == g.n and sub.m == g.m
    leaf = g.leaves()[0]
    sub, _, _ = subtree(g, leaf)
    assert (sub.n, sub.m) == (1, 0)
    u = build_tree(TreeSpec("unicyclic", 3, 3, root_children=2, defect=(7, 8)))
    sub, vmap, _ = subtree(u, 1)
    assert tree_excess(sub) == 1 and vmap[0] == 1


def test_induced_subgraph_maps():
    g = cycle(6)
    sub, vmap, emap = induced_subgraph(g, [3, 4, 5])
    assert sub.m == 2
    for j, (a, b) in enumerate(sub.edges):
        assert {int(vmap[a]), int(vmap[b])} == set(map(int, g.edges[emap[j]]))
    assert list(edges_between(g, [0, 1, 2])) == [0, 1]


def test_text_round_trip():
    g = generate_random_regular(12, 3, seed=1)
    h = from_text(to_text(g))
    assert np.array_equal(g.edges, h.edges)
    assert to_text(h) == to_text(g)
    with pytest.raises(GraphValidationError):
        from_text("3 2\n0 1\n")


def test_random_instances(rng):
    t = random_tree(9, rng)
    assert t.is_tree() and t.root == 0
    u = random_unicyclic(7, rng)
    assert tree_excess(u) == 1 and u.m == u.n
