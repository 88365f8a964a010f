"""Compiled inner loop for coupled single-edge heat-bath dynamics.

All chains consume one shared stream of ``(edge draw, uniform)`` pairs.
A Glauber chain opens the drawn edge iff ``u < p_hat`` when the edge is a
cut edge of its current configuration and iff ``u < p`` otherwise; a
threshold chain opens it iff ``u < thr``.

Two connectivity back ends are provided.  On a rooted tree whose wirings
form a single class, each vertex keeps ``cnt[x]``: one if ``x`` is wired
into that class plus the number of open child edges leading to a child that
reaches the class from below.  A cut query then walks towards the root and
an update walks up while the reachability flag flips.  Everything else uses
a bidirectional breadth-first search over open edges plus virtual wiring
edges.
"""
from __future__ import annotations

import numba as nb
import numpy as np

MODE_GLAUBER = 0
MODE_THRESHOLD = 1


@nb.njit(cache=True)
def tree_counts(X, pinned, order, parent, pedge):
    """Initial ``cnt`` for one configuration; ``order`` lists vertices deepest first."""
    n = pinned.shape[0]
    cnt = np.zeros(n, dtype=np.int32)
    for v in range(n):
        if pinned[v]:
            cnt[v] = 1
    for v in order:
        pe = pedge[v]
        if pe >= 0 and X[pe] and cnt[v] > 0:
            cnt[parent[v]] += 1
    return cnt


@nb.njit(cache=True, inline="always")
def _tree_reaches_up(a, sub, X, cnt, parent, pedge):
    # is ``a`` joined to the wired class once a contribution ``sub`` is removed?
    x = a
    while True:
        if cnt[x] - sub > 0:
            return True
        pe = pedge[x]
        if pe < 0 or X[pe] == 0:
            return False
        sub = 1 if cnt[x] > 0 else 0
        x = parent[x]


@nb.njit(cache=True, inline="always")
def _tree_is_cut(e, X, cnt, up, dn, parent, pedge):
    w = dn[e]
    if cnt[w] <= 0:
        return True
    sub = 1 if X[e] else 0
    return not _tree_reaches_up(up[e], sub, X, cnt, parent, pedge)


@nb.njit(cache=True, inline="always")
def _tree_set(e, val, X, cnt, up, dn, parent, pedge):
    old = X[e]
    if old == val:
        return
    X[e] = val
    if cnt[dn[e]] <= 0:
        return
    delta = 1 if val else -1
    x = up[e]
    while True:
        before = cnt[x] > 0
        cnt[x] += delta
        if (cnt[x] > 0) == before:
            return
        pe = pedge[x]
        if pe < 0 or X[pe] == 0:
            return
        x = parent[x]


@nb.njit(cache=True)
def _bfs_connected(a, b, skip, X, indptr, nbr, nbe, markA, markB, qA, qB, stamp):
    """Bidirectional search for an open path from ``a`` to ``b`` avoiding edge ``skip``.

    Virtual wiring edges carry id ``-1`` and are always open.
    """
    if a == b:
        return True
    markA[a] = stamp
    markB[b] = stamp
    qA[0] = a
    qB[0] = b
    ha, ta, hb, tb = 0, 1, 0, 1
    while ha < ta and hb < tb:
        if ta - ha <= tb - hb:
            x = qA[ha]
            ha += 1
            for k in range(indptr[x], indptr[x + 1]):
                eid = nbe[k]
                if eid == skip or (eid >= 0 and X[eid] == 0):
                    continue
                y = nbr[k]
                if markB[y] == stamp:
                    return True
                if markA[y] != stamp:
                    markA[y] = stamp
                    qA[ta] = y
                    ta += 1
        else:
            x = qB[hb]
            hb += 1
            for k in range(indptr[x], indptr[x + 1]):
                eid = nbe[k]
                if eid == skip or (eid >= 0 and X[eid] == 0):
                    continue
                y = nbr[k]
                if markA[y] == stamp:
                    return True
                if markB[y] != stamp:
                    markB[y] = stamp
                    qB[tb] = y
                    tb += 1
    return False


@nb.njit(cache=True)
def run_chunk(X, cnt, tree_mode, mode, thr, ue, uu, pool, allowed,
              eu, ev, up, dn, parent, pedge,
              indptr, nbr, nbe, markA, markB, qA, qB, stamp,
              p, phat, pairs, ndiff, step0, stop_on_couple,
              rec_every, rec_out, rec_pos, code):
    """Advance all chains through one chunk of the shared stream.

    Returns ``(steps, coupled_at, violations, ndiff, stamp, rec_pos, code)``.
    ``coupled_at`` is the global step index at which chains 0 and 1 first
    became equal, or -1.
    """
    C = X.shape[0]
    K = ue.shape[0]
    npool = pool.shape[0]
    coupled_at = -1
    violations = 0
    track = C >= 2
    steps = 0
    for k in range(K):
        steps = k + 1
        e = pool[min(int(ue[k] * npool), npool - 1)]
        if allowed[e]:
            u = uu[k]
            before = track and X[0, e] != X[1, e]
            for c in range(C):
                if mode[c] == MODE_THRESHOLD:
                    val = 1 if u < thr[c] else 0
                else:
                    if tree_mode:
                        cut = _tree_is_cut(e, X[c], cnt[c], up, dn, parent, pedge)
                    else:
                        stamp += 1
                        cut = not _bfs_connected(eu[e], ev[e], e, X[c], indptr, nbr, nbe,
                                                 markA, markB, qA, qB, stamp)
                    val = 1 if u < (phat if cut else p) else 0
                if c == 0 and rec_every > 0 and X[0, e] != val:
                    code ^= np.int64(1) << e
                if tree_mode and mode[c] == MODE_GLAUBER:
                    _tree_set(e, val, X[c], cnt[c], up, dn, parent, pedge)
                else:
                    X[c, e] = val
            if track:
                after = X[0, e] != X[1, e]
                if before and not after:
                    ndiff -= 1
                elif after and not before:
                    ndiff += 1
            for i in range(pairs.shape[0]):
                if X[pairs[i, 0], e] > X[pairs[i, 1], e]:
                    violations += 1
        if rec_every > 0 and (step0 + k + 1) % rec_every == 0:
            rec_out[rec_pos] = code
            rec_pos += 1
        if track and ndiff == 0 and coupled_at < 0:
            coupled_at = step0 + k + 1
            if stop_on_couple:
                break
    return steps, coupled_at, violations, ndiff, stamp, rec_pos, code
