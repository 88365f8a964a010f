import csv

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fkdyn.percolation import (bernoulli_percolation, component_stats, default_cutoff,
                               giant_fraction_prediction, rrg_boundary_profile,
                               survival_probability, write_profile_csv)
from fkdyn.topology import generate_random_regular

from conftest import cycle


@pytest.fixture(scope="module")
def rrg():
    return generate_random_regular(600, 3, seed=4)


def test_p_hat_zero_all_singletons(rrg):
    cfg, stats = bernoulli_percolation(rrg, 0.0, seed=1)
    assert not cfg.any()
    assert stats.sizes.size == rrg.n and stats.second_largest == 1
    assert stats.giant_id is None and stats.giant_fraction == 0.0


def test_p_hat_one_single_component(rrg):
    _, stats = bernoulli_percolation(rrg, 1.0, seed=1)
    assert list(stats.sizes) == [rrg.n]
    assert stats.giant_fraction == 1.0 and stats.second_largest == 0


def test_sizes_partition_vertices(rrg):
    for s in range(5):
        _, stats = bernoulli_percolation(rrg, 0.6, seed=s)
        assert stats.sizes.sum() == rrg.n
        assert np.all(np.diff(stats.sizes) <= 0)
        assert np.array_equal(np.sort(np.bincount(stats.labels))[::-1], stats.sizes)


def test_percolation_validates_and_is_deterministic(rrg):
    with pytest.raises(ValueError):
        bernoulli_percolation(rrg, 1.5)
    a, _ = bernoulli_percolation(rrg, 0.5, seed=9)
    b, _ = bernoulli_percolation(rrg, 0.5, seed=9)
    assert np.array_equal(a, b)


def test_giant_needs_unique_big_component():
    G = cycle(10)
    cfg = np.ones(10, bool)
    cfg[[0, 5]] = False  # two paths of 5
    st2 = component_stats(G, cfg, size_cutoff=4)
    assert st2.giant_id is None
    assert component_stats(G, cfg, size_cutoff=6).giant_id is None
    cfg[5] = True
    st1 = component_stats(G, cfg, size_cutoff=4)
    assert st1.giant_fraction == 1.0
    assert default_cutoff(100) == pytest.approx(20 * np.log(100))


def test_survival_examples():
    assert survival_probability(2, 0.5) == 0.0
    assert survival_probability(4, 0.25) == 0.0
    assert survival_probability(3, 1.0) == 1.0
    assert survival_probability(2, 0.75) == pytest.approx(8 / 9, abs=1e-12)
    with pytest.raises(ValueError):
        survival_probability(1, 0.5)
    with pytest.raises(ValueError):
        survival_probability(2, -0.1)


@settings(max_examples=100, deadline=None)
@given(d=st.integers(2, 8), p=st.floats(0.0, 1.0))
def test_survival_solves_fixed_point_equation(d, p):
    phi = survival_probability(d, p)
    rho = 1 - phi
    assert 0 <= phi <= 1
    assert (1 - p + p * rho) ** d == pytest.approx(rho, abs=1e-10)
    if d * p > 1.0 + 1e-6 and p < 1:
        assert phi > 0


def test_survival_matches_iteration():
    for d, p in [(2, 0.6), (3, 0.5), (5, 0.3)]:
        rho = 0.0
        for _ in range(20000):
            rho = (1 - p + p * rho) ** d
        assert survival_probability(d, p) == pytest.approx(1 - rho, abs=1e-8)


def test_giant_fraction_prediction_value():
    phi = survival_probability(2, 0.75)
    assert giant_fraction_prediction(3, 0.75) == pytest.approx(1 - (1 - 0.75 * phi) ** 3)


def test_profile_empty_config_is_free(rrg):
    prof = rrg_boundary_profile(rrg, np.zeros(rrg.m, bool), 2, centers=range(10))
    for pr in prof:
        assert pr.bc.is_free and pr.wired_count == 0 and pr.u_count == 0
        assert pr.singleton_count == len(pr.bc.boundary)
        assert pr.bc.c1 == ()


def test_profile_full_config_is_wired(rrg):
    prof = rrg_boundary_profile(rrg, np.ones(rrg.m, bool), 2, centers=range(10))
    for pr in prof:
        assert pr.bc.is_wired and pr.bc.is_single_component
        assert pr.wired_count == len(pr.bc.boundary) and pr.u_count == 0
        assert pr.bc.c1 == tuple(sorted(pr.bc.boundary))


def test_profile_counts_add_up_and_csv(rrg, tmp_path):
    cfg, _ = bernoulli_percolation(rrg, 0.75, seed=2)
    prof = rrg_boundary_profile(rrg, cfg, 2, centers=range(0, rrg.m, 40))
    for pr in prof:
        assert pr.wired_count + pr.u_count + pr.singleton_count == len(pr.bc.boundary)
        assert pr.bc.provenance["kind"] == "ball"
    path = tmp_path / "balls.csv"
    write_profile_csv(prof, path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["center", "wired_count", "u_count", "singleton_count", "excess"]
    assert len(rows) == len(prof) + 1
