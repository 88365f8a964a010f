import numpy as np
import pytest

import fkdyn.dynamics.coupling as coupling
from fkdyn.boundary import BoundaryCondition, make_bc
from fkdyn.dynamics import (CensorPhase, CensorSchedule, ChainSpec, ChainState,
                            CoupledSystem, OrderViolation, RandomStream, coupled_run,
                            coupling_time_profile, glauber_step, is_cut_edge,
                            update_threshold)
from fkdyn.dynamics.coupling import sample_trajectory
from fkdyn.oracle import RCParams, mask_to_config, measure_table
from fkdyn.topology import Graph, TreeSpec, build_tree, random_tree, random_unicyclic

from conftest import chi2_pvalue, complete, cycle, path, single_edge


def wired_binary(h):
    T = build_tree(TreeSpec("d-ary", 3, h))
    return T, make_bc(T.leaves(), "wired")


# -- single steps ------------------------------------------------------------

def test_tree_edge_threshold_is_p_hat(rng):
    T = random_tree(8, rng)
    pr = RCParams(0.6, 3.0)
    for _ in range(10):
        st = ChainState(T, None, pr, rng.random(T.m) < 0.5)
        for e in range(T.m):
            assert update_threshold(st, e) == pr.p_hat


def test_wired_block_edge_threshold_is_p():
    G = single_edge()
    pr = RCParams(0.6, 3.0)
    st = ChainState.all_closed(G, make_bc([0, 1], "wired"), pr)
    assert update_threshold(st, 0) == pr.p


def test_triangle_threshold():
    G = cycle(3)
    pr = RCParams(0.6, 3.0)
    st = ChainState(G, None, pr, [False, True, True])
    assert update_threshold(st, 0) == pr.p
    st = ChainState(G, None, pr, [False, True, False])
    assert update_threshold(st, 0) == pr.p_hat


def test_glauber_step_updates_one_edge():
    G = cycle(4)
    pr = RCParams(0.6, 3.0)
    st = ChainState.all_open(G, None, pr)
    new = glauber_step(st, 2, 0.99)
    assert list(new.config) == [True, True, False, True]
    assert new.step_count == 1 and st.config.all()
    assert glauber_step(st, 2, 0.0).config[2]
    with pytest.raises(ValueError):
        glauber_step(st, 4, 0.5)
    with pytest.raises(ValueError):
        glauber_step(st, 0, 1.0)
    with pytest.raises(ValueError):
        ChainState(G, None, pr, [True])


def _small_instances():
    rng = np.random.default_rng(99)
    out = [(cycle(4), None), (complete(4), make_bc([0, 3], "wired")),
           (path(5), BoundaryCondition([0, 5], [], root_wired=False))]
    for _ in range(3):
        G = random_unicyclic(int(rng.integers(4, 8)), rng)
        out.append((G, make_bc(G.leaves() or [G.n - 1], "wired", root_wired=True)))
    return out


@pytest.mark.parametrize("inst", _small_instances())
def test_cut_rule_matches_conditional_law(inst):
    G, bc = inst
    assert G.m <= 8
    pr = RCParams(0.37, 2.6)
    t = measure_table(G, bc, pr)
    for mask in range(1 << G.m):
        cfg = mask_to_config(mask, G.m)
        st = ChainState(G, bc, pr, cfg)
        for e in range(G.m):
            on, off = t.logw[mask | (1 << e)], t.logw[mask & ~(1 << e)]
            exact = 1.0 / (1.0 + np.exp(off - on))
            assert abs(update_threshold(st, e) - exact) <= 1e-12


def test_is_cut_edge_uses_wirings():
    G = path(2)
    bc = make_bc([0, 2], "wired")
    assert not is_cut_edge(G, bc, [True, True], 0)
    assert is_cut_edge(G, None, [True, True], 0)


# -- coupled runs ------------------------------------------------------------

def test_equal_start_couples_at_zero():
    G = path(3)
    pr = RCParams(0.5, 2.0)
    sysm = CoupledSystem(G, None, pr, [ChainSpec(np.ones(3, bool)), ChainSpec(np.ones(3, bool))])
    assert sysm.coupled_at == 0
    run = coupled_run(Graph(2, []), None, pr, 0, 10)
    assert run.coupled_at == 0


def test_single_edge_couples_at_first_update():
    pr = RCParams(0.5, 2.0)
    for seed in range(20):
        assert coupled_run(single_edge(), None, pr, seed, 100).coupled_at == 1


def test_coupled_run_is_deterministic():
    T, bc = wired_binary(6)
    pr = RCParams(0.85, 3.0)
    a = coupled_run(T, bc, pr, 1, 10 ** 7)
    b = coupled_run(T, bc, pr, 1, 10 ** 7)
    assert a.coupled_at is not None and a.coupled_at == b.coupled_at
    assert np.array_equal(a.top.config, b.top.config)


@pytest.mark.parametrize("h", [3, 5])
def test_tree_and_general_paths_agree(h):
    T, bc = wired_binary(h)
    pr = RCParams(0.8, 3.0)
    extras = [ChainSpec(np.zeros(T.m, bool), pr.p_hat, "bern"),
              ChainSpec(np.ones(T.m, bool), 1.0, "frozen")]
    fast = coupled_run(T, bc, pr, 4, 5000, extra_chains=extras, stop_on_couple=False)
    slow = coupled_run(T, bc, pr, 4, 5000, extra_chains=extras, stop_on_couple=False,
                       force_general=True)
    assert fast.coupled_at == slow.coupled_at
    for x, y in zip([fast.top, fast.bottom] + fast.extras, [slow.top, slow.bottom] + slow.extras):
        assert np.array_equal(x.config, y.config)


def test_order_audit_passes_with_extra_chains():
    G = random_unicyclic(12, np.random.default_rng(3))
    pr = RCParams(0.7, 4.0)
    extras = [ChainSpec(np.zeros(G.m, bool), pr.p_hat, "bern"),
              ChainSpec(np.ones(G.m, bool), 1.0, "frozen")]
    run = coupled_run(G, make_bc(G.leaves() or [0], "wired"), pr, 2, 20000,
                      extra_chains=extras, stop_on_couple=False)
    assert run.violations == 0 and run.audited_steps == 20000
    assert np.all(run.extras[0].config <= run.bottom.config)
    assert np.all(run.top.config <= run.extras[1].config)


def test_order_audit_detects_violation(monkeypatch):
    monkeypatch.setattr(coupling, "_dominated", lambda *a: True)
    G = path(3)
    pr = RCParams(0.5, 2.0)
    chains = [ChainSpec(np.zeros(3, bool), 1.0), ChainSpec(np.ones(3, bool), 0.0)]
    sysm = CoupledSystem(G, None, pr, chains)
    with pytest.raises(OrderViolation):
        sysm.run(RandomStream(0), 10)


def test_censor_schedule_restricts_updates():
    G = cycle(6)
    pr = RCParams(0.5, 2.0)
    sched = CensorSchedule([CensorPhase(200, np.array([1, 4]), True),
                            CensorPhase(50, np.array([0]))])
    run = coupled_run(G, None, pr, 5, 0, schedule=sched)
    assert run.steps == 250
    untouched = [2, 3, 5]
    assert run.top.config[untouched].all() and not run.bottom.config[untouched].any()
    assert [ph["steps"] for ph in run.phases] == [200, 250]


def test_censor_schedule_validation():
    with pytest.raises(ValueError):
        CensorPhase(0)
    with pytest.raises(ValueError):
        coupled_run(cycle(3), None, RCParams(0.5, 2), 0, 0,
                    schedule=CensorSchedule([CensorPhase(5, np.array([7]))]))
    with pytest.raises(ValueError):
        coupled_run(cycle(3), None, RCParams(0.5, 0.5), 0, 10)


def test_snapshot_restore_round_trip():
    T, bc = wired_binary(3)
    pr = RCParams(0.8, 3.0)
    sysm = CoupledSystem(T, bc, pr, [ChainSpec(np.ones(T.m, bool)), ChainSpec(np.zeros(T.m, bool))])
    stream = RandomStream(1)
    sysm.run(stream, 30)
    snap = sysm.snapshot()
    X = sysm.X.copy()
    sysm.run(stream, 500)
    sysm.restore(snap)
    assert np.array_equal(sysm.X, X) and sysm.steps == 30


def test_random_stream_is_reproducible():
    a = RandomStream(3, key=1, chunk=8)
    b = RandomStream(3, key=1, chunk=8)
    e1, u1 = a.take(5)
    e2, u2 = b.take(20)
    assert np.array_equal(e1, e2[:5]) and np.array_equal(u1, u2[:5])
    assert not np.array_equal(RandomStream(3, key=2).take(4)[0], e2[:4])


def test_coupling_time_profile_single_edge_and_determinism():
    pr = RCParams(0.85, 3.0)
    spec = TreeSpec("d-ary", 3, 3)
    rows = coupling_time_profile([spec, TreeSpec("d-ary", 3, 4)], pr, "wired", 5, seed=8)
    again = coupling_time_profile([spec, TreeSpec("d-ary", 3, 4)], pr, "wired", 5, seed=8)
    assert rows == again
    assert all(r["censored"] == 0 for r in rows)
    # coupling on a single free edge happens at its first update
    for seed in range(5):
        assert coupled_run(single_edge(), None, pr, seed, 10).coupled_at == 1


# -- stationarity ------------------------------------------------------------

@pytest.mark.parametrize("inst", [(cycle(4), None), (path(3), make_bc([0, 3], "wired"))])
def test_glauber_stationary_law(inst):
    G, bc = inst
    pr = RCParams(0.55, 2.5)
    codes = sample_trajectory(G, bc, pr, seed=17, steps=400_000, thin=20)[50:]
    probs = measure_table(G, bc, pr).prob
    assert chi2_pvalue(codes, probs) > 1e-4
