"""Exact samplers: the two-pass tree sampler and block heat-bath updates.

Vertex pairs ``(Z0, Z1)`` below follow the convention that the
distinguished class is never counted as a component; ``Z0`` includes the
factor ``q`` of the vertex's own component.  Seen from its parent, a child
``w`` splits into

* ``a_w = (1-p)(Z0_w + Z1_w) + p Z0_w / q``, weight of the edge not linking
  the parent to the class through ``w``;
* ``b_w = p Z1_w``, weight of an open edge to a child that reaches the class.

An unpinned vertex has ``Z0 = q prod a`` and ``Z1 = prod(a+b) - prod a``;
a pinned one has ``Z0 = 0`` and ``Z1 = prod(a+b)``.  Pairs are normalised
to sum to one since only ratios matter.

Randomness is laid out per vertex so that copies driven by the same
uniforms stay aligned: column ``v`` decides the edge above ``v`` together
with the status of ``v``'s subtree, and column ``n + v`` decides a class
status keyed by vertex ``v``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..boundary import BoundaryCondition, BoundaryError, induced_bc, wiring_labels
from ..oracle import CapacityError, RCParams, measure_table
from ..topology import Graph, GraphValidationError

__all__ = [
    "exact_tree_sampler",
    "block_heat_bath",
    "tree_blocks",
    "scan_block_dynamics",
    "ScanSummary",
    "ENUM_CAP",
]

ENUM_CAP = 18


# --------------------------------------------------------------------------
# tree sampler


def _check_tree(T: Graph):
    if T.root is None:
        raise GraphValidationError("the tree sampler needs a rooted tree")
    if not T.is_tree():
        raise GraphValidationError("the tree sampler needs a connected acyclic graph")


def _upward(T: Graph, pinned: np.ndarray, p: float, q: float):
    n = T.n
    z0 = np.zeros(n)
    z1 = np.zeros(n)
    a = np.zeros(n)
    b = np.zeros(n)
    ch = T.children_lists()
    for v in np.argsort(-T.depth, kind="stable"):
        kids = ch[v]
        if pinned[v]:
            z0[v], z1[v] = 0.0, 1.0
        elif not kids:
            z0[v], z1[v] = 1.0, 0.0
        else:
            lr = float(np.sum(np.log1p(b[kids] / a[kids])))
            A = np.exp(-lr)
            z0[v], z1[v] = q * A, -np.expm1(-lr)
            s = z0[v] + z1[v]
            z0[v] /= s
            z1[v] /= s
        a[v] = (1.0 - p) * (z0[v] + z1[v]) + p * z0[v] / q
        b[v] = p * z1[v]
    return z0, z1, a, b


def _downward(T: Graph, pinned, p, q, z0, z1, a, b, U, root_status=None):
    """Top-down sampling; returns ``(config (S, m), status (S, n))``."""
    S = U.shape[0]
    n, m = T.n, T.m
    ch = T.children_lists()
    pedge = T.parent_edge
    cfg = np.zeros((S, m), dtype=bool)
    status = np.zeros((S, n), dtype=bool)
    r = T.root
    if pinned[r]:
        status[:, r] = True
    elif root_status is not None:
        status[:, r] = np.asarray(root_status, dtype=bool)
    else:
        status[:, r] = U[:, r] < z1[r]
    for u in np.argsort(T.depth, kind="stable"):
        kids = ch[u]
        if not kids:
            continue
        su = status[:, u]
        # rho[i]: share of configurations of children i.. with at least one b
        lr = np.log1p(b[kids] / a[kids])
        tail = np.concatenate([np.cumsum(lr[::-1])[::-1], [0.0]])
        rho = -np.expm1(-tail)
        sat = np.full(S, bool(pinned[u])) | ~su
        for i, w in enumerate(kids):
            opts = np.array([b[w], p * z0[w] / q, (1.0 - p) * z1[w], (1.0 - p) * z0[w]])
            wt = np.broadcast_to(opts, (S, 4)).copy()
            # not connected: no option may link u to the class
            wt[~su, 0] = 0.0
            need = su & ~sat
            wt[need, 1:] *= rho[i + 1]
            cum = np.cumsum(wt, axis=1)
            x = U[:, w] * cum[:, -1]
            choice = (x[:, None] >= cum[:, :3]).sum(axis=1)
            e = pedge[w]
            cfg[:, e] = choice <= 1
            status[:, w] = (choice == 0) | (choice == 2)
            sat |= choice == 0
    return cfg, status


def _rng_uniforms(seed, shape):
    return np.random.default_rng(seed).random(shape)


def exact_tree_sampler(T: Graph, xi: Optional[BoundaryCondition], params: RCParams,
                       seed=None, size: Optional[int] = None, uniforms=None):
    """Exact samples from the random-cluster measure on a rooted tree.

    An upward pass computes the ``(Z0, Z1)`` split at every vertex; a
    downward pass samples the root's connection status and then, vertex by
    vertex, the state of each child edge jointly with the child's status.

    Parameters
    ----------
    T : Graph
        Rooted tree.
    xi : BoundaryCondition or None
        Single-component condition; root wiring pins the root.
    params : RCParams
    seed : int, optional
    size : int, optional
        Number of samples; ``None`` returns one configuration.
    uniforms : ndarray, optional
        ``(size, n)`` uniforms replacing the seeded generator.

    Returns
    -------
    ndarray of bool
        Shape ``(size, m)`` or ``(m,)``.
    """
    _check_tree(T)
    if xi is not None and not xi.is_single_component:
        raise BoundaryError("the tree sampler needs a single-component condition")
    if params.p >= 1.0:
        return np.ones((size or 1, T.m), dtype=bool) if size else np.ones(T.m, dtype=bool)
    pinned = np.zeros(T.n, dtype=bool)
    if xi is not None:
        pinned[list(xi.pinned(T.root))] = True
    S = 1 if size is None else int(size)
    U = _rng_uniforms(seed, (S, T.n)) if uniforms is None else np.atleast_2d(uniforms)
    ups = _upward(T, pinned, params.p, params.q)
    cfg, _ = _downward(T, pinned, params.p, params.q, *ups, U)
    return cfg[0] if size is None else cfg


# --------------------------------------------------------------------------
# block heat bath


def _labels(G: Graph, xi, B_mask, outside_full):
    groups = xi.groups(G.root) if xi is not None else []
    open_out = np.flatnonzero(~B_mask & outside_full)
    par = wiring_labels(G.n, groups)
    # union outside edges
    lab = par.copy()

    def find(x):
        while lab[x] != x:
            lab[x] = lab[lab[x]]
            x = lab[x]
        return x

    for v in range(G.n):
        lab[v] = find(int(lab[v]))
    for e in open_out:
        a, b = find(int(G.edges[e, 0])), find(int(G.edges[e, 1]))
        if a != b:
            lab[max(a, b)] = min(a, b)
    return np.array([find(v) for v in range(G.n)], dtype=np.int64)


def _components(n, edges):
    lab = np.arange(n)

    def find(x):
        while lab[x] != x:
            lab[x] = lab[lab[x]]
            x = lab[x]
        return x

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            lab[ra] = rb
    return np.array([find(v) for v in range(n)])


def _rooted_tree(G: Graph, eids, root):
    verts = sorted({int(v) for e in eids for v in G.edges[e]})
    index = {v: i for i, v in enumerate(verts)}
    sub = Graph(len(verts), [(index[int(G.edges[e, 0])], index[int(G.edges[e, 1])]) for e in eids],
                root=index[int(root)])
    return sub, np.asarray(verts), index


def _sample_tree_piece(G, eids, root, special_lab, lab, params, Ucols, root_status=None,
                       return_parts=False):
    sub, verts, index = _rooted_tree(G, eids, root)
    pinned = np.asarray([lab[v] == special_lab for v in verts])
    U = Ucols[:, verts]
    # sub-tree edges keep the order of ``eids``
    ups = _upward(sub, pinned, params.p, params.q)
    if return_parts:
        return sub, verts, pinned, ups, U
    cfg, _ = _downward(sub, pinned, params.p, params.q, *ups, U, root_status)
    return cfg


def _plan(G, eids_by_comp, lab, special_candidates):
    """Pick a special class making the super-component tree-decomposable.

    Returns ``(special_label, star_label or None)`` or ``None``.
    """
    for sp in special_candidates:
        touches = {}
        ok = True
        for ci, eids in enumerate(eids_by_comp):
            verts = {int(v) for e in eids for v in G.edges[e]}
            seen = {}
            for v in verts:
                L = int(lab[v])
                if L == sp:
                    continue
                seen[L] = seen.get(L, 0) + 1
            for L, k in seen.items():
                if k > 1:
                    ok = False
                touches.setdefault(L, []).append(ci)
            if not ok:
                break
        if not ok:
            continue
        linking = [L for L, cs in touches.items() if len(cs) > 1]
        if len(linking) <= 1:
            return sp, (linking[0] if linking else None)
    return None


def block_heat_bath(G: Graph, xi: Optional[BoundaryCondition], params: RCParams, B,
                    outside, seed=None, uniforms=None, return_full: bool = False,
                    size: Optional[int] = None):
    """Exact resample of the block ``B`` given the configuration outside it.

    The block's forest is split into super-components, groups of block
    trees linked through classes of the induced wiring (outside open edges
    plus boundary wirings).  A class is chosen as the uncounted reference
    and treated as pinned.  A lone tree then goes to the tree sampler; trees
    sharing one further class ``K`` at their roots first draw whether ``K``
    reaches the reference class and then sample each tree given its root
    status.  Anything else (including cycles inside the block) is
    enumerated exactly when it has at most ``ENUM_CAP`` edges.

    Parameters
    ----------
    B : array_like of int
        Edge ids of the block.
    outside : array_like of bool
        States of the remaining edges in increasing id order, or a full
        length-``m`` configuration (entries on ``B`` are ignored).
    uniforms : ndarray, optional
        ``(2n,)`` or ``(size, 2n)`` uniforms: columns ``0..n-1`` per vertex,
        ``n..2n-1`` per class representative.
    size : int, optional
        Number of independent samples sharing the same outside.

    Returns
    -------
    ndarray of bool
        New states of ``B`` in increasing edge-id order, or the full
        configuration when ``return_full``; a leading axis of length
        ``size`` is added when ``size`` is given.
    """
    B = np.unique(np.asarray(B, dtype=np.int64))
    if B.size and (B.min() < 0 or B.max() >= G.m):
        raise ValueError("block edge ids out of range")
    B_mask = np.zeros(G.m, dtype=bool)
    B_mask[B] = True
    outside = np.asarray(outside, dtype=bool)
    base = np.zeros(G.m, dtype=bool)
    if outside.shape[0] == G.m:
        base[~B_mask] = outside[~B_mask]
    elif outside.shape[0] == G.m - B.size:
        base[~B_mask] = outside
    else:
        raise ValueError("outside configuration has the wrong length")
    S = 1 if size is None else int(size)
    U = _rng_uniforms(seed, (S, 2 * G.n)) if uniforms is None else np.atleast_2d(uniforms)
    S = U.shape[0]
    full = np.tile(base, (S, 1))

    lab = _labels(G, xi, B_mask, base)
    pin = xi.pinned(G.root) if xi is not None else ()
    ref_lab = int(lab[pin[0]]) if pin else None

    comp = _components(G.n, [tuple(G.edges[e]) for e in B])
    trees = {}
    for e in B:
        trees.setdefault(int(comp[G.edges[e, 0]]), []).append(int(e))
    trees = list(trees.values())
    # super-components: trees linked by shared labels
    link = list(range(len(trees)))

    def find(x):
        while link[x] != x:
            link[x] = link[link[x]]
            x = link[x]
        return x

    owner = {}
    for ti, eids in enumerate(trees):
        for v in {int(v) for e in eids for v in G.edges[e]}:
            L = int(lab[v])
            if L in owner:
                ra, rb = find(owner[L]), find(ti)
                if ra != rb:
                    link[ra] = rb
            else:
                owner[L] = ti
    supers = {}
    for ti in range(len(trees)):
        supers.setdefault(find(ti), []).append(ti)

    for members in supers.values():
        sub_trees = [trees[i] for i in members]
        eids_all = [e for t in sub_trees for e in t]
        acyclic = all(len(t) == len({int(v) for e in t for v in G.edges[e]}) - 1 for t in sub_trees)
        plan = None
        if acyclic:
            labs = sorted({int(lab[v]) for e in eids_all for v in G.edges[e]})
            cands = ([ref_lab] if ref_lab in labs else []) + [L for L in labs if L != ref_lab]
            plan = _plan(G, sub_trees, lab, cands)
        if plan is None:
            if len(eids_all) > ENUM_CAP:
                raise CapacityError(
                    f"block component with {len(eids_all)} edges is neither tree-decomposable "
                    f"nor within the enumeration cap of {ENUM_CAP}")
            full[:, eids_all] = _enumerate_piece(G, eids_all, lab, params, U)
            continue
        sp, K = plan
        star = []
        for t in sub_trees:
            verts = {int(v) for e in t for v in G.edges[e]}
            kv = [v for v in verts if K is not None and lab[v] == K]
            if kv:
                star.append((t, kv[0]))
            else:
                root = min(verts, key=lambda v: (G.depth[v] if G.depth is not None else 0, v))
                cfg = _sample_tree_piece(G, t, root, sp, lab, params, U)
                full[:, t] = cfg
        if star:
            _sample_star(G, star, sp, lab, params, U, full)
    out = full if return_full else full[:, B]
    return out if (size is not None or np.ndim(uniforms) == 2) else out[0]


def _sample_star(G, star, sp, lab, params, U, full):
    """Trees whose roots share one class ``K``: draw K's status, then each tree."""
    p, q = params.p, params.q
    parts = [_sample_tree_piece(G, t, r, sp, lab, params, U, return_parts=True) for t, r in star]
    z0 = np.array([pt[3][0][pt[0].root] for pt in parts])
    z1 = np.array([pt[3][1][pt[0].root] for pt in parts])
    # per-tree weights for root status 0 / 1 once merged into K
    w0 = z0 / q
    w1 = z1
    lr = np.log1p(w1 / w0) if np.all(w0 > 0) else None
    S_rows = U.shape[0]
    rep = min(r for _, r in star)
    if lr is None:
        s_K = np.ones(S_rows, dtype=bool)
        tail = None
    else:
        tot = lr.sum()
        # P(S=0) / P(S=1) = q prod w0 / (prod(w0+w1) - prod w0)
        p1 = -np.expm1(-tot) / (-np.expm1(-tot) + q * np.exp(-tot))
        s_K = U[:, G.n + rep] < p1
        tail = np.concatenate([np.cumsum(lr[::-1])[::-1], [0.0]])
    sat = ~s_K
    for i, ((t, r), pt) in enumerate(zip(star, parts)):
        sub, verts, pinned, ups, Ut = pt
        if tail is None:
            ti = np.ones(S_rows, dtype=bool)
        else:
            rho = -np.expm1(-tail[i + 1])
            a_w = np.where(sat, w0[i], w0[i] * rho)
            b_w = np.where(s_K, w1[i], 0.0)
            ti = U[:, r] * (a_w + b_w) < b_w
        sat |= ti
        cfg, _ = _downward(sub, pinned, p, q, *ups, Ut, root_status=ti)
        full[:, t] = cfg


def _enumerate_piece(G, eids, lab, params, U):
    verts = sorted({int(v) for e in eids for v in G.edges[e]})
    index = {v: i for i, v in enumerate(verts)}
    sub = Graph(len(verts), [(index[int(G.edges[e, 0])], index[int(G.edges[e, 1])]) for e in eids])
    by = {}
    for v in verts:
        by.setdefault(int(lab[v]), []).append(index[v])
    bc = BoundaryCondition(range(len(verts)), list(by.values()))
    pr = measure_table(sub, bc, params).prob
    cum = np.cumsum(pr)
    x = U[:, verts[0]] * cum[-1]
    mask = np.minimum(np.searchsorted(cum, x, side="right"), len(cum) - 1).astype(np.int64)
    return ((mask[:, None] >> np.arange(len(eids))) & 1).astype(bool)


# --------------------------------------------------------------------------
# two-block scan


def tree_blocks(G: Graph, delta: float = 0.25):
    """Top block ``B0`` and bottom block ``B1`` of a rooted tree of height ``h``.

    With ``h0 = h2 = floor(delta h)`` and ``h1 = h - h0 - h2``, ``B0`` holds
    the edges whose lower endpoint has depth ``<= h0 + h1`` and ``B1`` those
    whose lower endpoint has depth ``> h0``.
    """
    if G.root is None:
        raise GraphValidationError("blocks need a rooted tree")
    h = int(G.depth.max())
    h0 = int(np.floor(delta * h))
    h1 = h - 2 * h0
    low = np.maximum(G.depth[G.edges[:, 0]], G.depth[G.edges[:, 1]])
    B0 = np.flatnonzero(low <= h0 + h1)
    B1 = np.flatnonzero(low > h0)
    return B0, B1, (h0, h1, h0)


@dataclass
class ScanSummary:
    """Per-step record of a coupled two-block scan."""

    steps: list = field(default_factory=list)
    agree_B0: list = field(default_factory=list)
    final_top: Optional[np.ndarray] = None
    final_bottom: Optional[np.ndarray] = None

    @property
    def first_agreement(self) -> Optional[bool]:
        return self.agree_B0[0] if self.agree_B0 else None


def _boundary_of(G, block):
    mask = np.zeros(G.m, dtype=bool)
    mask[block] = True
    inside = np.zeros(G.n, dtype=bool)
    inside[G.edges[block].ravel()] = True
    outside = np.zeros(G.n, dtype=bool)
    outside[G.edges[~mask].ravel()] = True
    return np.flatnonzero(inside & outside)


def scan_block_dynamics(G: Graph, xi, params: RCParams, blocks, sweeps: int, seed,
                        shared: bool = True) -> ScanSummary:
    """Alternate exact updates of ``blocks[1]`` and ``blocks[0]`` on two copies.

    The copies start all open and all closed.  Step ``t = 1, 2, ...``
    updates ``blocks[t mod 2]``.  After each update of ``blocks[1]`` the
    conditions induced on the boundary of ``blocks[0]`` are recorded; after
    each update of ``blocks[0]`` the record notes whether the copies agree
    on it.  ``shared=False`` drives the copies with independent uniforms.
    """
    B0, B1 = (np.asarray(b, dtype=np.int64) for b in blocks)
    cover = np.zeros(G.m, dtype=bool)
    cover[B0] = True
    cover[B1] = True
    if not cover.all():
        raise ValueError("blocks must cover every edge")
    rng = np.random.default_rng(seed)
    top = np.ones(G.m, dtype=bool)
    bot = np.zeros(G.m, dtype=bool)
    bnd0 = _boundary_of(G, B0)
    summary = ScanSummary()
    for t in range(1, 2 * sweeps + 1):
        blk = B1 if t % 2 == 1 else B0
        u1 = rng.random(2 * G.n)
        u2 = u1 if shared else rng.random(2 * G.n)
        top = block_heat_bath(G, xi, params, blk, top, uniforms=u1, return_full=True)
        bot = block_heat_bath(G, xi, params, blk, bot, uniforms=u2, return_full=True)
        rec = {"t": t, "block": int(t % 2)}
        if t % 2 == 1 and len(bnd0):
            mt = np.ones(G.m, dtype=bool)
            mt[B0] = False
            bt = induced_bc(G, B0, bnd0, top[mt], xi)
            bb = induced_bc(G, B0, bnd0, bot[mt], xi)
            rec["bc_equal"] = bt.blocks == bb.blocks
            rec["bc_top"] = [list(b) for b in bt.nonsingleton]
            rec["bc_bottom"] = [list(b) for b in bb.nonsingleton]
        if t % 2 == 0 or B0.size == G.m:
            agree = bool(np.array_equal(top[B0], bot[B0]))
            rec["agree_B0"] = agree
            summary.agree_B0.append(agree)
        summary.steps.append(rec)
    summary.final_top, summary.final_bottom = top, bot
    return summary
