import numpy as np
import pytest

from fkdyn.boundary import BoundaryCondition, BoundaryError, induced_bc, make_bc, sample_theta_q_wired
from fkdyn.dynamics import (ENUM_CAP, block_heat_bath, exact_tree_sampler,
                            scan_block_dynamics, tree_blocks)
from fkdyn.oracle import CapacityError, RCParams, measure_table
from fkdyn.topology import Graph, GraphValidationError, TreeSpec, build_tree, random_unicyclic

from conftest import chi2_pvalue, complete, config_codes, cycle, single_edge


def binary(h):
    return build_tree(TreeSpec("d-ary", 3, h))


# -- exact tree sampler ------------------------------------------------------

def test_tree_sampler_p_zero():
    T = binary(3)
    out = exact_tree_sampler(T, make_bc(T.leaves(), "wired"), RCParams(0.0, 3.0), seed=0, size=50)
    assert not out.any()


def test_tree_sampler_single_edge(half_two):
    out = exact_tree_sampler(single_edge(root=0), None, half_two, seed=1, size=100_000)
    assert abs(out.mean() - 1 / 3) <= 0.01


def test_tree_sampler_wired_cherry(half_two):
    T = binary(1)
    out = exact_tree_sampler(T, make_bc(T.leaves(), "wired"), half_two, seed=2, size=100_000)
    assert abs(out.all(axis=1).mean() - 0.2) <= 0.01


def test_tree_sampler_shapes_and_errors(half_two):
    T = binary(2)
    assert exact_tree_sampler(T, None, half_two, seed=0).shape == (T.m,)
    assert exact_tree_sampler(T, None, half_two, seed=0, size=3).shape == (3, T.m)
    with pytest.raises(GraphValidationError):
        exact_tree_sampler(cycle(3).with_root(0), None, half_two)
    lv = T.leaves()
    with pytest.raises(BoundaryError):
        exact_tree_sampler(T, BoundaryCondition(lv, [lv[:2], lv[2:]]), half_two)


@pytest.mark.parametrize("kind", ["wired", "theta", "root"])
def test_tree_sampler_chi_square(kind):
    T = binary(2)
    lv = T.leaves()
    bc = {"wired": make_bc(lv, "wired"),
          "theta": sample_theta_q_wired(lv, 0.5, seed=4),
          "root": BoundaryCondition(lv, [lv[:2]], root_wired=True)}[kind]
    pr = RCParams(0.6, 3.0)
    out = exact_tree_sampler(T, bc, pr, seed=5, size=100_000)
    assert chi2_pvalue(config_codes(out), measure_table(T, bc, pr).prob) > 1e-4


# -- block heat bath ---------------------------------------------------------

def test_block_whole_tree_matches_tree_sampler():
    T = binary(3)
    bc = make_bc(T.leaves(), "wired")
    pr = RCParams(0.7, 2.5)
    u = np.random.default_rng(0).random((4000, 2 * T.n))
    blk = block_heat_bath(T, bc, pr, np.arange(T.m), np.zeros(T.m, bool), uniforms=u)
    assert chi2_pvalue(config_codes(blk), measure_table(T, bc, pr).prob) > 1e-4


def test_block_single_edge_threshold():
    G = cycle(4)
    pr = RCParams(0.5, 2.0)
    open_rest = np.ones(4, bool)
    closed_rest = np.zeros(4, bool)
    a = block_heat_bath(G, None, pr, [0], open_rest, seed=1, size=40_000)
    b = block_heat_bath(G, None, pr, [0], closed_rest, seed=2, size=40_000)
    assert abs(a.mean() - pr.p) < 0.01
    assert abs(b.mean() - pr.p_hat) < 0.01


def test_bottom_block_matches_enumeration():
    T = build_tree(TreeSpec("d-ary", 3, 4))  # 30 edges
    pr = RCParams(0.85, 3.0)
    bc = make_bc(T.leaves(), "wired")
    B0, B1, _ = tree_blocks(T, 0.25)
    # freeze the top so the resampled part has at most 14 edges
    rng = np.random.default_rng(3)
    top = rng.random(T.m) < 0.7
    sub_root = T.children(T.children(0)[0])[0]
    desc = [sub_root]
    for v in desc:
        desc += T.children(v)
    B = np.array(sorted(e for e in B1 if max(T.edges[e]) in set(desc[1:])))
    assert 0 < B.size <= 14
    out = block_heat_bath(T, bc, pr, B, top, seed=6, size=100_000)
    # exact conditional law: enumerate B with the frozen rest as a boundary
    vs = sorted({int(v) for e in B for v in T.edges[e]})
    idx = {v: i for i, v in enumerate(vs)}
    sub = Graph(len(vs), [(idx[int(a)], idx[int(b)]) for a, b in T.edges[B]])
    bnd = [v for v in vs if v == sub_root or v in set(T.leaves())]
    mask = np.ones(T.m, bool)
    mask[B] = False
    ind = induced_bc(T, B, bnd, top[mask], bc)
    sub_bc = BoundaryCondition([idx[v] for v in bnd], [[idx[v] for v in b] for b in ind.blocks])
    probs = measure_table(sub, sub_bc, pr).prob
    assert chi2_pvalue(config_codes(out), probs) > 1e-4


def test_block_invariance_one_step():
    G = random_unicyclic(7, np.random.default_rng(5))
    bc = make_bc(G.leaves() or [0], "wired")
    pr = RCParams(0.6, 3.0)
    t = measure_table(G, bc, pr)
    rng = np.random.default_rng(8)
    start = rng.choice(t.prob.size, size=30_000, p=t.prob)
    B = np.arange(0, G.m, 2)
    after = []
    for code, k in zip(*np.unique(start, return_counts=True)):
        c = ((code >> np.arange(G.m)) & 1).astype(bool)
        after.append(block_heat_bath(G, bc, pr, B, c, seed=int(code), size=int(k),
                                     return_full=True))
    after = np.concatenate(after)
    assert chi2_pvalue(config_codes(after), t.prob) > 1e-4


def test_block_capacity_error():
    G = complete(7)  # 21 edges with cycles
    with pytest.raises(CapacityError):
        block_heat_bath(G, None, RCParams(0.5, 2.0), np.arange(G.m), np.zeros(G.m, bool), seed=0)
    assert ENUM_CAP == 18


def test_block_ids_checked():
    with pytest.raises(ValueError):
        block_heat_bath(cycle(3), None, RCParams(0.5, 2.0), [5], np.zeros(3, bool))


# -- block scan --------------------------------------------------------------

def test_tree_blocks_cover_and_overlap():
    T = binary(8)
    B0, B1, (h0, h1, h2) = tree_blocks(T, 0.25)
    assert (h0, h1, h2) == (2, 4, 2)
    assert np.union1d(B0, B1).size == T.m
    low = np.maximum(T.depth[T.edges[:, 0]], T.depth[T.edges[:, 1]])
    assert set(np.unique(low[np.intersect1d(B0, B1)])) == {3, 4, 5, 6}


def test_scan_with_full_blocks_agrees_immediately():
    T = binary(3)
    E = np.arange(T.m)
    s = scan_block_dynamics(T, make_bc(T.leaves(), "wired"), RCParams(0.85, 3.0), [E, E], 1, 0)
    assert s.first_agreement is True


def test_scan_block_cover_required():
    T = binary(3)
    with pytest.raises(ValueError):
        scan_block_dynamics(T, None, RCParams(0.5, 2.0), [[0], [1]], 1, 0)


def test_scan_free_product_law():
    T = binary(3)
    pr = RCParams(0.4, 3.0)
    low = np.maximum(T.depth[T.edges[:, 0]], T.depth[T.edges[:, 1]])
    B0, B1 = np.flatnonzero(low <= 2), np.flatnonzero(low > 2)
    runs = 2000
    hits = sum(scan_block_dynamics(T, None, pr, [B0, B1], 1, seed=s, shared=False).agree_B0[0]
               for s in range(runs))
    ph = pr.p_hat
    pred = (ph ** 2 + (1 - ph) ** 2) ** B0.size
    se = np.sqrt(pred * (1 - pred) / runs)
    assert abs(hits / runs - pred) <= 4 * se


def test_scan_wired_agreement_frequency():
    T = binary(4)
    B0, B1, _ = tree_blocks(T, 0.25)
    bc = make_bc(T.leaves(), "wired")
    pr = RCParams(0.85, 3.0)
    agree = [scan_block_dynamics(T, bc, pr, [B0, B1], 1, seed=s).agree_B0[0] for s in range(200)]
    assert np.mean(agree) >= 0.9
