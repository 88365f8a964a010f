"""Exhaustive-enumeration ground truth for the random-cluster measure.

Every configuration ``A`` of a small graph is a bitmask over edge ids.  Its
weight is ``p^|A| (1-p)^(m-|A|) q^c(A, xi)`` where ``c`` counts components
after merging the wirings of the boundary condition ``xi``.  Weights are
kept in log space throughout.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numba as nb
import numpy as np
from scipy import sparse
from scipy.sparse.linalg import eigsh
from scipy.special import logsumexp

from .boundary import BoundaryCondition, BoundaryError, wiring_labels
from .topology import Graph

__all__ = [
    "RCParams",
    "MeasureTable",
    "CapacityError",
    "ConsistencyError",
    "component_count",
    "measure_table",
    "partition_function",
    "event_probability",
    "edge_open",
    "z_split_root",
    "message_from_oracle",
    "edge_marginals",
    "tv_restricted",
    "glauber_matrix",
    "check_detailed_balance",
    "spectral_gap_exact",
    "conditional_open_probability",
    "free_bc",
]

MAX_EDGES = 24
MAX_EDGES_GAP = 16


class CapacityError(RuntimeError):
    """Instance exceeds the enumeration guard."""


class ConsistencyError(RuntimeError):
    """An internal numerical identity failed."""


@dataclass(frozen=True)
class RCParams:
    """Random-cluster parameters ``(p, q)``.

    ``p`` may sit at the endpoints 0 or 1 for degenerate checks.
    """

    p: float
    q: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p = {self.p} outside [0, 1]")
        if not self.q > 0:
            raise ValueError(f"q = {self.q} must be positive")

    @property
    def p_hat(self) -> float:
        """Acceptance probability at a cut edge, ``p / (q(1-p) + p)``."""
        return self.p / (self.q * (1.0 - self.p) + self.p)

    def p_s(self, delta: int) -> float:
        return self.q / (delta + self.q - 2.0)


def free_bc() -> BoundaryCondition:
    return BoundaryCondition((), ())


# --------------------------------------------------------------------------
# numba kernels


@nb.njit(cache=True, inline="always")
def _find(par, x):
    while par[x] != x:
        par[x] = par[par[x]]
        x = par[x]
    return x


@nb.njit(cache=True)
def _enumerate(n, eu, ev, base, qv, qt):
    """Components per configuration and whether ``qv`` joins ``qt``."""
    m = eu.shape[0]
    total = 1 << m
    ncomp = np.empty(total, dtype=np.int32)
    joined = np.zeros(total, dtype=np.bool_)
    base_c = 0
    for v in range(n):
        if base[v] == v:
            base_c += 1
    par = np.empty(n, dtype=np.int64)
    for mask in range(total):
        for v in range(n):
            par[v] = base[v]
        c = base_c
        for i in range(m):
            if (mask >> i) & 1:
                a = _find(par, eu[i])
                b = _find(par, ev[i])
                if a != b:
                    par[a] = b
                    c -= 1
        ncomp[mask] = c
        if qv >= 0 and qt >= 0:
            joined[mask] = _find(par, qv) == _find(par, qt)
    return ncomp, joined


@nb.njit(cache=True)
def _cut_table(n, eu, ev, base):
    """``cut[mask, e]`` is True when ``e`` is a cut edge of ``mask``."""
    m = eu.shape[0]
    total = 1 << m
    cut = np.empty((total, m), dtype=np.bool_)
    par = np.empty(n, dtype=np.int64)
    for mask in range(total):
        for e in range(m):
            for v in range(n):
                par[v] = base[v]
            for i in range(m):
                if i != e and (mask >> i) & 1:
                    a = _find(par, eu[i])
                    b = _find(par, ev[i])
                    if a != b:
                        par[a] = b
            cut[mask, e] = _find(par, eu[e]) != _find(par, ev[e])
    return cut


def _base(G: Graph, xi: Optional[BoundaryCondition]) -> np.ndarray:
    if xi is None:
        return np.arange(G.n, dtype=np.int64)
    for v in xi.boundary:
        if not 0 <= v < G.n:
            raise BoundaryError(f"boundary vertex {v} not in graph")
    return wiring_labels(G.n, xi.groups(G.root))


def _guard(G: Graph, cap=MAX_EDGES):
    if G.m > cap:
        raise CapacityError(f"{G.m} edges exceeds the enumeration cap of {cap}")


def component_count(G: Graph, xi: Optional[BoundaryCondition], A) -> int:
    """Components of ``(V, A)`` after merging the wirings of ``xi``."""
    A = np.asarray(A, dtype=bool)
    if A.shape != (G.m,):
        raise ValueError(f"configuration length {A.shape} does not match {G.m} edges")
    par = _base(G, xi).copy()
    c = int(np.sum(par == np.arange(G.n)))
    for i in np.flatnonzero(A):
        a, b = _find(par, G.edges[i, 0]), _find(par, G.edges[i, 1])
        if a != b:
            par[a] = b
            c -= 1
    return c


def mask_to_config(mask: int, m: int) -> np.ndarray:
    return ((int(mask) >> np.arange(m)) & 1).astype(bool)


def config_to_mask(A) -> int:
    return int(sum(1 << int(i) for i in np.flatnonzero(np.asarray(A, dtype=bool))))


# --------------------------------------------------------------------------
# measure tables


def _log(x):
    with np.errstate(divide="ignore"):
        return np.log(x)


@dataclass(frozen=True, eq=False)
class MeasureTable:
    """Log-weights and probabilities indexed by configuration bitmask."""

    m: int
    ncomp: np.ndarray
    nopen: np.ndarray
    logw: np.ndarray
    logz: float
    joined: Optional[np.ndarray] = None

    @property
    def prob(self) -> np.ndarray:
        return np.exp(self.logw - self.logz)

    def bits(self) -> np.ndarray:
        masks = np.arange(1 << self.m, dtype=np.int64)
        return ((masks[:, None] >> np.arange(self.m)) & 1).astype(bool)


def _popcount(m: int) -> np.ndarray:
    masks = np.arange(1 << m, dtype=np.int64)
    cnt = np.zeros_like(masks)
    for i in range(m):
        cnt += (masks >> i) & 1
    return cnt


def measure_table(G: Graph, xi: Optional[BoundaryCondition], params: RCParams,
                  query: Optional[int] = None, cap=MAX_EDGES) -> MeasureTable:
    """Enumerate all ``2^m`` configurations.

    With ``query`` set, the table also records whether that vertex is
    connected to ``C1`` of ``xi`` (requires a single-component ``xi``).
    """
    _guard(G, cap)
    base = _base(G, xi)
    qv, qt = -1, -1
    if query is not None:
        pin = xi.pinned(G.root) if xi is not None else ()
        qv = int(query)
        qt = int(pin[0]) if pin else -1
    eu = np.ascontiguousarray(G.edges[:, 0])
    ev = np.ascontiguousarray(G.edges[:, 1])
    ncomp, joined = _enumerate(G.n, eu, ev, base, qv, qt)
    k = _popcount(G.m)
    p, q = params.p, params.q
    lp, l1p = _log(p), _log(1.0 - p)
    with np.errstate(invalid="ignore"):
        logw = np.where(k > 0, k * lp, 0.0) + np.where(G.m - k > 0, (G.m - k) * l1p, 0.0)
    logw = logw + ncomp * np.log(q)
    logz = float(logsumexp(logw))
    return MeasureTable(G.m, ncomp, k, logw, logz, joined if query is not None else None)


def partition_function(G: Graph, xi: Optional[BoundaryCondition], params: RCParams) -> float:
    """``log Z`` of the random-cluster measure with boundary ``xi``."""
    return measure_table(G, xi, params).logz


def edge_open(e: int) -> Callable:
    """Event predicate ``e in A`` on an array of bitmasks."""
    return lambda masks: ((masks >> e) & 1).astype(bool)


def event_probability(G: Graph, xi, params: RCParams, event: Callable) -> float:
    """Probability of ``event``, a vectorized predicate over bitmask arrays."""
    t = measure_table(G, xi, params)
    ok = np.asarray(event(np.arange(1 << G.m, dtype=np.int64)), dtype=bool)
    if not ok.any():
        return 0.0
    return float(np.exp(logsumexp(t.logw[ok]) - t.logz))


def edge_marginals(G: Graph, xi, params: RCParams) -> np.ndarray:
    t = measure_table(G, xi, params)
    pr = t.prob
    masks = np.arange(1 << G.m, dtype=np.int64)
    return np.array([pr[((masks >> e) & 1) == 1].sum() for e in range(G.m)])


def z_split_root(T: Graph, xi: BoundaryCondition, params: RCParams, v: int):
    """``(log Z0, log Z1)`` split by whether ``v`` connects to ``C1``.

    When ``C1`` is empty nothing can connect and ``log Z1 = -inf``.
    """
    if not xi.is_single_component:
        raise BoundaryError("z_split_root needs a single-component condition")
    t = measure_table(T, xi, params, query=v)
    j = t.joined
    lz1 = float(logsumexp(t.logw[j])) if j.any() else -np.inf
    lz0 = float(logsumexp(t.logw[~j])) if (~j).any() else -np.inf
    return lz0, lz1


def message_from_oracle(T: Graph, xi: BoundaryCondition, params: RCParams, v: int) -> float:
    """``q Z1/Z0 + 1`` at ``v``; ``inf`` when ``Z0 = 0``."""
    lz0, lz1 = z_split_root(T, xi, params, v)
    if lz0 == -np.inf:
        return np.inf
    return params.q * np.exp(lz1 - lz0) + 1.0


def tv_restricted(G: Graph, xi1, xi2, params: RCParams, edges) -> float:
    """Total-variation distance between the two marginals on ``edges``."""
    edges = np.asarray(list(edges), dtype=np.int64)
    if edges.size == 0:
        return 0.0
    p1 = measure_table(G, xi1, params).prob
    p2 = measure_table(G, xi2, params).prob
    masks = np.arange(1 << G.m, dtype=np.int64)
    key = np.zeros_like(masks)
    for j, e in enumerate(edges):
        key |= ((masks >> e) & 1) << j
    k = 1 << len(edges)
    m1 = np.bincount(key, weights=p1, minlength=k)
    m2 = np.bincount(key, weights=p2, minlength=k)
    return 0.5 * float(np.abs(m1 - m2).sum())


# --------------------------------------------------------------------------
# Glauber transition matrix


def cut_table(G: Graph, xi) -> np.ndarray:
    eu = np.ascontiguousarray(G.edges[:, 0])
    ev = np.ascontiguousarray(G.edges[:, 1])
    return _cut_table(G.n, eu, ev, _base(G, xi))


def glauber_matrix(G: Graph, xi, params: RCParams, cap=MAX_EDGES_GAP):
    """Sparse transition matrix of single-edge heat-bath Glauber dynamics.

    An edge is chosen uniformly; it is set open with probability ``p_hat``
    when it is a cut edge of the current configuration (wirings included)
    and with probability ``p`` otherwise.
    """
    _guard(G, cap)
    m = G.m
    total = 1 << m
    cut = cut_table(G, xi)
    thr = np.where(cut, params.p_hat, params.p)
    masks = np.arange(total, dtype=np.int64)
    rows, cols, vals = [], [], []
    for e in range(m):
        bit = 1 << e
        rows += [masks, masks]
        cols += [masks | bit, masks & ~bit]
        vals += [thr[:, e] / m, (1.0 - thr[:, e]) / m]
    P = sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(total, total))
    P.sum_duplicates()
    return P


def check_detailed_balance(G: Graph, xi, params: RCParams, tol=1e-10) -> float:
    """Largest ``|pi(x)P(x,y) - pi(y)P(y,x)|``; raises above ``tol``."""
    pi = measure_table(G, xi, params, cap=MAX_EDGES_GAP).prob
    P = glauber_matrix(G, xi, params).tocoo()
    flow = pi[P.row] * P.data
    F = sparse.csr_matrix((flow, (P.row, P.col)), shape=P.shape)
    worst = float(abs(F - F.T).max()) if F.nnz else 0.0
    if worst > tol:
        raise ConsistencyError(f"detailed balance violated by {worst:.3e}")
    return worst


def spectral_gap_exact(G: Graph, xi, params: RCParams) -> float:
    """``1 - lambda_2`` of the Glauber transition matrix.

    Reversibility is verified first.  The matrix is symmetrized with the
    stationary distribution; small instances use a dense eigensolver.
    """
    _guard(G, MAX_EDGES_GAP)
    check_detailed_balance(G, xi, params)
    pi = measure_table(G, xi, params, cap=MAX_EDGES_GAP).prob
    P = glauber_matrix(G, xi, params)
    if G.m == 0:
        return 1.0
    s = np.sqrt(pi)
    D = sparse.diags(s)
    Dinv = sparse.diags(1.0 / s)
    S = D @ P @ Dinv
    S = 0.5 * (S + S.T)
    if P.shape[0] <= 2048:
        ev = np.linalg.eigvalsh(S.toarray())
        lam2 = ev[-2]
    else:
        ev = eigsh(S, k=2, which="LA", return_eigenvectors=False, tol=1e-12)
        lam2 = np.sort(ev)[0]
    return float(1.0 - lam2)


def conditional_open_probability(G: Graph, xi, params: RCParams, A, e: int) -> float:
    """Exact ``mu(e in A | A restricted to E minus e)``."""
    A = np.asarray(A, dtype=bool).copy()
    A[e] = True
    c1 = component_count(G, xi, A)
    A[e] = False
    c0 = component_count(G, xi, A)
    p, q = params.p, params.q
    w1 = p * q ** c1
    w0 = (1.0 - p) * q ** c0
    return w1 / (w1 + w0)
