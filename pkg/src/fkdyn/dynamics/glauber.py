"""Single-edge heat-bath Glauber update with the cut-edge rule."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from ..boundary import BoundaryCondition
from ..oracle import RCParams
from ..topology import Graph

__all__ = ["ChainState", "is_cut_edge", "update_threshold", "glauber_step"]


@dataclass(frozen=True, eq=False)
class ChainState:
    """Configuration of one random-cluster chain.

    Parameters
    ----------
    graph, bc, params
        The instance being sampled.
    config : ndarray of bool
        Open/closed state per edge id.
    step_count : int
        Number of updates applied so far.
    stream_id : int
        Identifier of the randomness stream driving the chain.
    """

    graph: Graph
    bc: Optional[BoundaryCondition]
    params: RCParams
    config: np.ndarray
    step_count: int = 0
    stream_id: int = 0

    def __post_init__(self):
        cfg = np.asarray(self.config, dtype=bool)
        if cfg.shape != (self.graph.m,):
            raise ValueError(f"configuration has shape {cfg.shape}, expected ({self.graph.m},)")
        object.__setattr__(self, "config", cfg)

    @classmethod
    def all_open(cls, graph, bc, params, **kw):
        return cls(graph, bc, params, np.ones(graph.m, dtype=bool), **kw)

    @classmethod
    def all_closed(cls, graph, bc, params, **kw):
        return cls(graph, bc, params, np.zeros(graph.m, dtype=bool), **kw)


def is_cut_edge(G: Graph, bc: Optional[BoundaryCondition], config, e: int) -> bool:
    """True when the endpoints of ``e`` are disconnected in ``config`` minus ``e``.

    Boundary wirings count as open connections.
    """
    cfg = np.asarray(config, dtype=bool).copy()
    cfg[e] = False
    used = np.flatnonzero(cfg)
    rows = list(G.edges[used, 0])
    cols = list(G.edges[used, 1])
    if bc is not None:
        for grp in bc.groups(G.root):
            rows += [grp[0]] * (len(grp) - 1)
            cols += list(grp[1:])
    adj = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(G.n, G.n))
    _, lab = connected_components(adj, directed=False)
    a, b = G.edges[e]
    return bool(lab[a] != lab[b])


def update_threshold(state: ChainState, e: int) -> float:
    """Probability that edge ``e`` is set open by a heat-bath update."""
    cut = is_cut_edge(state.graph, state.bc, state.config, e)
    return state.params.p_hat if cut else state.params.p


def glauber_step(state: ChainState, e: int, u: float) -> ChainState:
    """Resample edge ``e`` with uniform ``u``; returns a new state."""
    if not 0 <= e < state.graph.m:
        raise ValueError(f"edge id {e} out of range")
    if not 0.0 <= u < 1.0:
        raise ValueError("u must lie in [0, 1)")
    cfg = state.config.copy()
    cfg[e] = u < update_threshold(state, e)
    return replace(state, config=cfg, step_count=state.step_count + 1)
