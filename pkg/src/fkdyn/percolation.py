"""Bernoulli edge percolation, branching survival and ball boundary profiles.

Component statistics use scipy's sparse connected-components routine.  A
component counts as "giant" when it is the unique one larger than
``size_cutoff``, by default ``20 log n``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .boundary import BoundaryCondition, induced_bc
from .topology import Graph, bfs_ball

__all__ = [
    "ComponentStats",
    "component_stats",
    "bernoulli_percolation",
    "survival_probability",
    "giant_fraction_prediction",
    "default_cutoff",
    "BallProfile",
    "rrg_boundary_profile",
    "write_profile_csv",
]


def default_cutoff(n: int) -> float:
    return 20.0 * np.log(n)


@dataclass(frozen=True)
class ComponentStats:
    """Component sizes of an edge configuration.

    Attributes
    ----------
    sizes : ndarray
        Component sizes in decreasing order.
    giant_id : int or None
        Label of the giant component, if there is exactly one component
        above the cutoff.
    giant_fraction : float
        Giant size over ``n`` (0 without a giant).
    second_largest : int
        Second entry of ``sizes`` (0 for a single component).
    labels : ndarray
        Component label per vertex.
    """

    sizes: np.ndarray
    giant_id: Optional[int]
    giant_fraction: float
    second_largest: int
    labels: np.ndarray

    def as_dict(self) -> dict:
        return {"n_components": int(self.sizes.size), "largest": int(self.sizes[0]),
                "giant_fraction": self.giant_fraction, "second_largest": self.second_largest}


def _labels(G: Graph, config) -> np.ndarray:
    used = np.flatnonzero(np.asarray(config, dtype=bool))
    adj = coo_matrix((np.ones(used.size), (G.edges[used, 0], G.edges[used, 1])),
                     shape=(G.n, G.n))
    return connected_components(adj, directed=False)[1]


def component_stats(G: Graph, config, size_cutoff: Optional[float] = None) -> ComponentStats:
    """Component statistics of the open subgraph ``config``."""
    cut = default_cutoff(G.n) if size_cutoff is None else float(size_cutoff)
    lab = _labels(G, config)
    counts = np.bincount(lab)
    order = np.argsort(-counts, kind="stable")
    sizes = counts[order]
    big = np.flatnonzero(counts > cut)
    giant = int(big[0]) if big.size == 1 else None
    frac = counts[giant] / G.n if giant is not None else 0.0
    second = int(sizes[1]) if sizes.size > 1 else 0
    return ComponentStats(sizes, giant, float(frac), second, lab)


def bernoulli_percolation(G: Graph, p_hat: float, seed=None, size_cutoff=None):
    """Open each edge independently with probability ``p_hat``.

    Returns
    -------
    config : ndarray of bool
    stats : ComponentStats
    """
    if not 0.0 <= p_hat <= 1.0:
        raise ValueError("p_hat must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    config = rng.random(G.m) < p_hat
    return config, component_stats(G, config, size_cutoff)


def survival_probability(d: int, p_hat: float) -> float:
    """Survival probability of a Galton-Watson process with Bin(d, p_hat) offspring.

    The extinction probability is the smallest root in ``[0, 1]`` of
    ``rho = (1 - p_hat + p_hat rho)^d``.
    """
    if d < 2:
        raise ValueError("d must be at least 2")
    if not 0.0 <= p_hat <= 1.0:
        raise ValueError("p_hat must lie in [0, 1]")
    if d * p_hat <= 1.0:
        return 0.0
    if p_hat == 1.0:
        return 1.0

    def h(r):
        return (1.0 - p_hat + p_hat * r) ** d - r

    # h is convex with h(0) > 0 and its minimum below zero where h' = 0
    x_min = ((1.0 / (d * p_hat)) ** (1.0 / (d - 1)) - 1.0 + p_hat) / p_hat
    rho = brentq(h, 0.0, x_min, xtol=1e-15, rtol=1e-15)
    return 1.0 - rho


def giant_fraction_prediction(delta: int, p_hat: float) -> float:
    """Local-tree prediction ``1 - (1 - p_hat phi)^delta`` with ``phi`` for ``d = delta - 1``."""
    phi = survival_probability(delta - 1, p_hat)
    return 1.0 - (1.0 - p_hat * phi) ** delta


@dataclass(frozen=True)
class BallProfile:
    """Boundary classification of one ball around an edge."""

    edge: int
    center: int
    wired_count: int
    u_count: int
    singleton_count: int
    excess: int
    bc: BoundaryCondition

    def row(self) -> dict:
        return {"center": self.center, "wired_count": self.wired_count,
                "u_count": self.u_count, "singleton_count": self.singleton_count,
                "excess": self.excess}


def rrg_boundary_profile(G: Graph, A, r: int, size_cutoff: Optional[float] = None,
                         centers: Optional[Iterable[int]] = None) -> list[BallProfile]:
    """Classify the boundary of each ball by the outside components of ``A``.

    For each edge ``e`` in ``centers`` (all edges by default) the ball of
    radius ``r`` is frozen out and the configuration outside it induces a
    boundary condition.  Boundary vertices whose outside component exceeds
    ``size_cutoff`` form the wired class; those in smaller non-singleton
    components are the candidates for the arbitrary set ``U``; the rest are
    singletons.  The emitted condition takes the wired class as its
    distinguished class (no class when it is empty).
    """
    A = np.asarray(A, dtype=bool)
    cut = default_cutoff(G.n) if size_cutoff is None else float(size_cutoff)
    centers = range(G.m) if centers is None else centers
    out = []
    for e in centers:
        ball = bfs_ball(G, int(e), r)
        inside = np.zeros(G.m, dtype=bool)
        inside[ball.edge_ids] = True
        bnd = list(ball.boundary)
        bc, lab = induced_bc(G, ball.edge_ids, bnd, A[~inside], return_labels=True)
        counts = np.bincount(lab)
        wired = [v for v in bnd if counts[lab[v]] > cut]
        k = {b: len(blk) for blk in bc.blocks for b in blk}
        u = [v for v in bnd if counts[lab[v]] <= cut and k[v] > 1]
        single = len(bnd) - len(wired) - len(u)
        # the class of the largest outside component among the big ones
        c1 = []
        if wired:
            top = max({int(lab[v]) for v in wired}, key=lambda L: (counts[L], -L))
            c1 = [v for v in bnd if lab[v] == top]
        bc = BoundaryCondition(bnd, bc.blocks, c1=c1,
                               provenance={"kind": "ball", "edge": int(e), "radius": r,
                                           "U": sorted(u)})
        out.append(BallProfile(int(e), ball.center, len(wired), len(u), single,
                               ball.tree_excess, bc))
    return out


def write_profile_csv(profiles: Sequence[BallProfile], path) -> None:
    """CSV with columns ``center, wired_count, u_count, singleton_count, excess``."""
    cols = ["center", "wired_count", "u_count", "singleton_count", "excess"]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for pr in profiles:
            w.writerow(pr.row())
