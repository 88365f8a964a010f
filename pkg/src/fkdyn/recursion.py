"""Tree message recursions and the fixed-point analysis of ``g = Phi^d``.

A message at a vertex ``u`` is ``f(u) = q Z1/Z0 + 1`` where ``Z1`` (``Z0``)
collects the configurations of the subtree of ``u`` in which ``u`` is (is
not) connected to the distinguished boundary class ``C1``.  Messages live in
``[1, inf]``; the value ``inf`` marks vertices pinned into ``C1`` and is
collapsed to the finite ``Phi(inf) = 1/(1-p)`` at the first application of
``Phi``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numba as nb
import numpy as np
from scipy.optimize import brentq

from .boundary import BoundaryCondition, BoundaryError, make_bc
from .oracle import CapacityError, RCParams
from .topology import Graph, GraphValidationError, TreeSpec, build_tree

__all__ = [
    "phi",
    "g_and_derivative",
    "thresholds",
    "sup_excess",
    "fixed_points",
    "FixedPointReport",
    "ClassificationError",
    "NumericError",
    "propagate_messages",
    "connect_prob",
    "connect_prob_gap_bound",
    "GadgetInput",
    "cycle_gadget_message",
    "unicyclic_messages",
    "wsm_gap",
    "wsm_decay_profile",
    "propagate_batch",
    "pinned_mask",
    "sharper_bound_check",
]

DEDUP = 1e-10
NEAR = 1e-7
MAX_GADGET = 20


class ClassificationError(RuntimeError):
    """Computed fixed-point count disagrees with the regime."""


class NumericError(RuntimeError):
    """A root search failed to bracket or converge."""


# --------------------------------------------------------------------------
# Phi and g


def phi(x, params: RCParams):
    """Message map ``Phi(x) = (x + c) / ((1-p) x + p + c)``, ``c = (q-1)(1-p)``.

    Accepts scalars or arrays; ``inf`` maps to ``1/(1-p)``.
    """
    p, q = params.p, params.q
    x = np.asarray(x, dtype=float)
    if np.any(x < 1.0 - 1e-12):
        raise ValueError("messages must be >= 1")
    c = (q - 1.0) * (1.0 - p)
    fin = np.isfinite(x)
    xs = np.where(fin, x, 1.0)
    out = np.where(fin, (xs + c) / ((1.0 - p) * xs + p + c), 1.0 / (1.0 - p))
    return out if out.ndim else float(out)


def _dphi(y, p, q):
    c = (q - 1.0) * (1.0 - p)
    den = (1.0 - p) * y + p + c
    return p * (1.0 + c) / (den * den)


def g_and_derivative(y, params: RCParams, d: int):
    """``g(y) = Phi(y)^d`` and its derivative.

    ``g'(y) = d p (1 + c) Phi(y)^(d-1) / ((1-p) y + p + c)^2``.
    """
    y = np.asarray(y, dtype=float)
    if np.any(y < 1.0 - 1e-12):
        raise ValueError("g is defined on [1, inf)")
    f = np.asarray(phi(y, params))
    g = f ** d
    dg = d * f ** (d - 1) * _dphi(y, params.p, params.q)
    if g.ndim == 0:
        return float(g), float(dg)
    return g, dg


def _h(y, p, q, d):
    c = (q - 1.0) * (1.0 - p)
    f = (y + c) / ((1.0 - p) * y + p + c)
    return f ** d - y


def _dg(y, p, q, d):
    c = (q - 1.0) * (1.0 - p)
    den = (1.0 - p) * y + p + c
    f = (y + c) / den
    return d * f ** (d - 1) * p * (1.0 + c) / (den * den)


def inflection_point(p, q, d) -> float:
    """``y0`` where ``g''`` changes sign (positive before, negative after)."""
    c = (q - 1.0) * (1.0 - p)
    return (d - 1) * p * (1.0 + c) / (2.0 * (1.0 - p)) - c


def _bisect(fn, lo, hi, flo=None, tol=1e-13, maxit=400):
    """Plain bisection on a sign change of ``fn`` in ``[lo, hi]``."""
    flo = fn(lo) if flo is None else flo
    fhi = fn(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise NumericError(f"no sign change on [{lo}, {hi}]: {flo}, {fhi}")
    for _ in range(maxit):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol * max(1.0, abs(mid)) or mid in (lo, hi):
            return mid
        fm = fn(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    raise NumericError(f"bisection did not converge on [{lo}, {hi}]")


def _critical_points(p, q, d):
    """Points where ``g' = 1`` on ``(1, inf)``.

    ``g'`` increases on ``[1, y0]`` and decreases after, so there are at
    most two.  Returns ``(a1, a2)`` with ``None`` for absent points.
    """
    y0 = max(inflection_point(p, q, d), 1.0)
    top = _dg(y0, p, q, d)
    if top <= 1.0:
        return None, None
    one = lambda y: _dg(y, p, q, d) - 1.0
    a1 = None
    if _dg(1.0, p, q, d) < 1.0:
        a1 = _bisect(one, 1.0, y0)
    hi = max(2.0 * y0, 2.0)
    while _dg(hi, p, q, d) >= 1.0:
        hi *= 2.0
        if hi > 1e300:
            raise NumericError("could not bracket the g' = 1 crossing")
    a2 = _bisect(one, y0, hi)
    return a1, a2


def sup_excess(p, q, d) -> float:
    """``sup_{y > 1} (g(y) - y)``; zero when ``g`` never climbs above ``y``."""
    if p <= 0.0:
        return 0.0
    _, a2 = _critical_points(p, q, d)
    if a2 is None:
        return 0.0
    return max(0.0, _h(a2, p, q, d))


def _p_u(q, d, tol=1e-9):
    p_s = q / (d + q - 1.0)
    if q <= 2.0:
        return p_s
    lo, hi = 1e-9, p_s
    if sup_excess(hi - 1e-15, q, d) <= 0.0:
        return p_s
    for _ in range(200):
        if hi - lo <= tol * 1e-3:
            break
        mid = 0.5 * (lo + hi)
        if sup_excess(mid, q, d) > 0.0:
            hi = mid
        else:
            lo = mid
    else:
        raise NumericError(f"p_u bisection did not converge for q={q}, d={d}")
    return 0.5 * (lo + hi)


def thresholds(q: float, delta: int):
    """``(p_s, p_u, p_hat)`` for branching ``d = delta - 1``.

    ``p_s = q / (delta + q - 2)`` in closed form.  ``p_u`` is the supremum of
    ``p`` with ``sup_{y>1}(g(y) - y) <= 0``, found by bisection; it equals
    ``p_s`` when ``q <= 2``.  The third entry maps ``p`` to ``p_hat``.
    """
    if not q > 1.0:
        raise ValueError("thresholds need q > 1")
    if delta < 3:
        raise ValueError("thresholds need delta >= 3")
    d = delta - 1
    p_s = q / (delta + q - 2.0)
    p_u = _p_u(q, d)
    p_hat = lambda p: p / (q * (1.0 - p) + p)
    return p_s, p_u, p_hat


# --------------------------------------------------------------------------
# fixed points


REGIMES = ("below-p_u", "between", "above-p_s", "at-p_u", "at-p_s", "q<=2-critical")


@dataclass
class FixedPointReport:
    """Fixed points of ``g`` on ``[1, inf)`` and the regime they imply."""

    p: float
    q: float
    d: int
    fixed_points: list
    regime: str
    y_star: Optional[float]
    beta_star: Optional[float]
    p_s: float
    p_u: float
    p_hat: float

    @property
    def count(self) -> int:
        return len(self.fixed_points)

    def as_dict(self) -> dict:
        return asdict(self)


_EXPECTED = {"below-p_u": 1, "between": 3, "above-p_s": 2, "at-p_u": 2,
             "at-p_s": 2, "q<=2-critical": 1}


def _dedup(xs):
    out = []
    for x in sorted(xs):
        if not out or abs(x - out[-1]) > DEDUP * max(1.0, x):
            out.append(x)
    return out


def fixed_points(params: RCParams, d: int, p_u: Optional[float] = None) -> FixedPointReport:
    """All fixed points of ``g`` in ``[1, (1-p)^-d]`` with regime labels.

    ``h = g - y`` is split at the points where ``g' = 1`` into at most three
    monotone pieces, each bisected for a sign change.  Parameters within
    ``1e-7`` of ``p_u`` or ``p_s`` are labelled with the boundary regimes.
    ``y_star`` is the largest fixed point above 1, polished by Newton steps;
    ``beta_star = g'(y_star)``.
    """
    p, q = params.p, params.q
    if not q > 1.0:
        raise ValueError("fixed_points needs q > 1")
    if not 0.0 < p < 1.0:
        raise ValueError("fixed_points needs p in (0, 1)")
    p_s = q / (d + q - 1.0)
    if p_u is None:
        p_u = _p_u(q, d)
    Y = (1.0 - p) ** (-d)
    h = lambda y: _h(y, p, q, d)

    if abs(p - p_s) <= NEAR:
        regime = "at-p_s" if q > 2.0 else "q<=2-critical"
    elif q > 2.0 and abs(p - p_u) <= NEAR:
        regime = "at-p_u"
    elif p < p_u:
        regime = "below-p_u"
    elif p < p_s:
        regime = "between"
    else:
        regime = "above-p_s"

    a1, a2 = _critical_points(p, q, d)
    roots = [1.0]
    if regime == "at-p_u":
        if a2 is not None:
            roots.append(a2)
    elif regime == "at-p_s":
        # h'(1) = 0 here; the only other root lies past the maximum of h
        if a2 is not None and h(a2) > 0:
            roots.append(_bisect(h, a2, Y))
    elif regime != "q<=2-critical" and a2 is not None:
        knots = [1.0] + [a for a in (a1, a2) if a is not None] + [Y]
        for lo, hi in zip(knots[:-1], knots[1:]):
            if hi <= lo:
                continue
            flo, fhi = h(lo), h(hi)
            if lo == 1.0:
                # step off the trivial root to read the sign of the segment
                probe = lo + 1e-9 * (hi - lo)
                flo = h(probe)
                lo = probe
            if (flo > 0) != (fhi > 0) and flo != 0 and fhi != 0:
                roots.append(_bisect(h, lo, hi, flo))
    roots = _dedup(roots)

    y_star = beta = None
    if len(roots) > 1:
        y_star = _polish(roots[-1], p, q, d)
        roots[-1] = y_star
        beta = float(_dg(y_star, p, q, d))

    if len(roots) != _EXPECTED[regime]:
        raise ClassificationError(
            f"p={p}, q={q}, d={d}: regime {regime} expects {_EXPECTED[regime]} "
            f"fixed points, found {roots}")
    return FixedPointReport(p, q, d, roots, regime, y_star, beta, p_s, p_u,
                            params.p_hat)


def _polish(y, p, q, d, tol=1e-12):
    for _ in range(50):
        step = _h(y, p, q, d) / (_dg(y, p, q, d) - 1.0)
        y_new = y - step
        if not np.isfinite(y_new) or y_new <= 1.0:
            return y
        if abs(y_new - y) <= tol * max(1.0, y):
            return y_new
        y = y_new
    return y


# --------------------------------------------------------------------------
# messages on trees


def _tree_levels(T: Graph):
    """Per-depth (vertices sorted by parent, group starts, unique parents)."""
    cached = T.__dict__.get("_levels")
    if cached is not None:
        return cached
    if T.root is None:
        raise GraphValidationError("message passing needs a rooted tree")
    if not T.is_acyclic() or np.any(T.depth < 0):
        raise GraphValidationError("message passing needs a connected acyclic graph")
    levels = []
    H = int(T.depth.max())
    for k in range(H, 0, -1):
        vs = np.flatnonzero(T.depth == k)
        par = T.parent[vs]
        order = np.argsort(par, kind="stable")
        vs, par = vs[order], par[order]
        starts = np.flatnonzero(np.r_[True, par[1:] != par[:-1]])
        levels.append((vs, starts, par[starts]))
    object.__setattr__(T, "_levels", levels)
    return levels


def _log_phi(f, p, q):
    c = (q - 1.0) * (1.0 - p)
    fin = np.isfinite(f)
    fs = np.where(fin, f, 1.0)
    return np.where(fin, np.log((fs + c) / ((1.0 - p) * fs + p + c)), -math.log1p(-p))


def propagate_batch(T: Graph, pinned: np.ndarray, params: RCParams) -> np.ndarray:
    """Messages for a batch of pinning patterns.

    ``pinned`` has shape ``(R, n)`` (or ``(n,)``); vertices marked True are in
    ``C1`` and carry the message ``inf``.  Returns messages of the same shape.
    """
    pin = np.atleast_2d(np.asarray(pinned, dtype=bool))
    logf = np.zeros(pin.shape, dtype=float)
    for vs, starts, parents in _tree_levels(T):
        f = np.where(pin[:, vs], np.inf, np.exp(logf[:, vs]))
        contrib = _log_phi(f, params.p, params.q)
        logf[:, parents] += np.add.reduceat(contrib, starts, axis=1)
    out = np.where(pin, np.inf, np.exp(logf))
    return out if np.ndim(pinned) == 2 else out[0]


def pinned_mask(G: Graph, xi: BoundaryCondition) -> np.ndarray:
    mask = np.zeros(G.n, dtype=bool)
    mask[list(xi.pinned(G.root))] = True
    return mask


def propagate_messages(T: Graph, xi: BoundaryCondition, params: RCParams) -> np.ndarray:
    """Upward pass ``f(u) = prod_children Phi(f(w))``.

    Vertices of ``C1`` (and the root under root wiring, and the auxiliary
    wired vertex) receive ``inf``.  Returns the message of every vertex,
    each computed on the subtree below it.
    """
    if not xi.is_single_component:
        raise BoundaryError("message passing needs a single-component condition")
    return propagate_batch(T, pinned_mask(T, xi), params)


def connect_prob(f, q):
    """Probability ``(f - 1)/(f + q - 1)`` that a subtree root joins ``C1``."""
    f = np.asarray(f, dtype=float)
    fin = np.isfinite(f)
    fs = np.where(fin, f, 1.0)
    out = np.where(fin, (fs - 1.0) / (fs + q - 1.0), 1.0)
    return out if out.ndim else float(out)


def connect_prob_gap_bound(f1, f2, q):
    """Upper bound ``q|f1 - f2| / ((f1+q-1)(f2+q-1))`` on the probability gap.

    For finite messages the bound holds with equality.
    """
    return q * abs(f1 - f2) / ((f1 + q - 1.0) * (f2 + q - 1.0))


def wsm_gap(T: Graph, xi: BoundaryCondition, params: RCParams, v: Optional[int] = None) -> float:
    """``|P_wired(v ~ C1) - P_xi(v ~ C1)|`` on the subtree of ``v``.

    Both probabilities come from exact message propagation.
    """
    v = T.root if v is None else v
    wired = BoundaryCondition(xi.boundary, [xi.boundary], xi.root_wired, xi.aux_wired)
    f_w = propagate_messages(T, wired, params)[v]
    f_x = propagate_messages(T, xi, params)[v]
    return abs(connect_prob(f_w, params.q) - connect_prob(f_x, params.q))


def wsm_decay_profile(d: int, params: RCParams, theta: float, depths, replicas: int,
                      seed: int = 0):
    """Root gap between wired and theta-wired leaves on complete d-ary trees.

    Replica ``r`` at depth ``h`` wires each leaf independently with
    probability ``theta`` using seed ``(seed, h, r)``.  The mean gap per
    depth is fitted by ``log gap = a + h log(rate)``.

    Returns
    -------
    rows : list of dict
        ``{depth, mean_gap, min_gap, max_gap}`` per depth.
    rate : float
        Fitted per-level decay factor.
    """
    rows = []
    for h in depths:
        T = build_tree(TreeSpec("d-ary", d + 1, int(h)))
        leaves = np.asarray(T.leaves())
        pin = np.zeros((replicas + 1, T.n), dtype=bool)
        pin[0, leaves] = True
        for r in range(replicas):
            rng = np.random.default_rng(np.random.SeedSequence([seed, int(h), r]))
            pin[r + 1, leaves] = rng.random(leaves.size) < theta
        f = propagate_batch(T, pin, params)[:, T.root]
        pr = connect_prob(f, params.q)
        gaps = np.abs(pr[0] - pr[1:])
        rows.append({"depth": int(h), "mean_gap": float(gaps.mean()),
                     "min_gap": float(gaps.min()), "max_gap": float(gaps.max())})
    x = np.array([r["depth"] for r in rows], dtype=float)
    y = np.log([r["mean_gap"] for r in rows])
    slope = np.polyfit(x, y, 1)[0]
    return rows, float(np.exp(slope))


# --------------------------------------------------------------------------
# cycle gadget


@dataclass
class GadgetInput:
    """Inputs to the cycle update at the top vertex ``w`` of a cycle.

    The cycle is ``w, w_1, ..., w_l, w`` (``l + 1`` edges).  ``R[i]`` is the
    ratio ``Z1/Z0`` of the structure hanging below ``w_{i+1}`` off the cycle
    (``inf`` when that vertex is pinned into ``C1``), and ``T`` holds the
    messages of ``w``'s off-cycle children.
    """

    l: int
    R: Sequence[float]
    T: Sequence[float]
    params: RCParams

    def __post_init__(self):
        if len(self.R) != self.l:
            raise ValueError(f"need {self.l} ratios, got {len(self.R)}")
        if any(r < 0 for r in self.R):
            raise ValueError("ratios must be nonnegative")
        if any(t < 1.0 - 1e-12 for t in self.T):
            raise ValueError("messages must be >= 1")


@nb.njit(cache=True)
def _gadget_psi(r0, r1, p, q):
    """Return ``(psi0, psi1)`` summed over the ``2^(l+1)`` cycle-edge states.

    Vertex 0 is ``w``; cycle edge ``j`` joins ``j`` and ``(j+1) mod (l+1)``.
    Each cycle vertex ``i >= 1`` weighs ``r1[i]`` when joined to ``C1``
    through its hanging structure and ``r0[i]/q`` otherwise; every cycle
    component not in ``C1`` except ``w``'s own contributes one factor ``q``.
    """
    l = r0.shape[0]
    k = l + 1
    psi0 = 0.0
    psi1 = 0.0
    lab = np.empty(k, dtype=np.int64)
    prod_all = np.empty(k, dtype=np.float64)
    prod_zero = np.empty(k, dtype=np.float64)
    for mask in range(1 << k):
        nopen = 0
        for j in range(k):
            nopen += (mask >> j) & 1
        w = p ** nopen * (1.0 - p) ** (k - nopen)
        # arc labels: vertex i and i+1 share a label iff edge i is open
        for i in range(k):
            lab[i] = i
        for j in range(k - 1):
            if (mask >> j) & 1:
                lab[j + 1] = lab[j]
        if (mask >> (k - 1)) & 1:
            # closing edge joins the last arc to w's arc
            old = lab[k - 1]
            for i in range(k):
                if lab[i] == old:
                    lab[i] = lab[0]
        for i in range(k):
            prod_all[i] = 1.0
            prod_zero[i] = 1.0
        for i in range(1, k):
            a = lab[i]
            prod_all[a] *= r1[i - 1] + r0[i - 1] / q
            prod_zero[a] *= r0[i - 1] / q
        rest = 1.0
        w0 = lab[0]
        for a in range(k):
            if a == w0:
                continue
            has = False
            for i in range(1, k):
                if lab[i] == a:
                    has = True
                    break
            if has:
                rest *= prod_all[a] - prod_zero[a] + q * prod_zero[a]
        psi0 += w * rest * prod_zero[w0]
        psi1 += w * rest * (prod_all[w0] - prod_zero[w0])
    return psi0, psi1


def _ratio_pair(R):
    R = np.asarray(R, dtype=float)
    inf = ~np.isfinite(R)
    Rs = np.where(inf, 0.0, R)
    r0 = np.where(inf, 0.0, 1.0 / (1.0 + Rs))
    r1 = np.where(inf, 1.0, Rs / (1.0 + Rs))
    return r0, r1


def gadget_factor(R, params: RCParams) -> float:
    """``L = 1 + psi1/psi0`` for the cycle with hanging ratios ``R``."""
    if len(R) > MAX_GADGET:
        raise CapacityError(f"cycle length {len(R) + 1} exceeds {MAX_GADGET + 1} edges")
    r0, r1 = _ratio_pair(R)
    psi0, psi1 = _gadget_psi(r0, r1, float(params.p), float(params.q))
    if psi0 == 0.0:
        return np.inf
    return 1.0 + psi1 / psi0


def cycle_gadget_message(inp: GadgetInput) -> float:
    """Message ``f(w) = L(R) * prod Phi(T)`` at the top vertex of a cycle."""
    L = gadget_factor(inp.R, inp.params)
    rest = float(np.prod(phi(np.asarray(inp.T, dtype=float), inp.params))) if len(inp.T) else 1.0
    return L * rest


def unicyclic_messages(G: Graph, xi: BoundaryCondition, params: RCParams,
                       extra_edge: Optional[int] = None) -> np.ndarray:
    """Messages on a rooted graph with exactly one cycle.

    The spanning tree is ``G`` minus ``extra_edge`` (default: the unique
    edge outside the BFS tree).  The cycle's top vertex gets its message
    from the gadget; vertices strictly inside the cycle carry the message of
    their off-cycle hanging structure only.  Acyclic inputs fall back to
    :func:`propagate_messages`.
    """
    if not xi.is_single_component:
        raise BoundaryError("message passing needs a single-component condition")
    if G.root is None:
        raise GraphValidationError("message passing needs a rooted graph")
    if G.is_acyclic():
        return propagate_messages(G, xi, params)
    if G.m != G.n:
        raise GraphValidationError("graph must be connected with exactly one cycle")
    if extra_edge is None:
        extra_edge = int(np.flatnonzero(~G.tree_edge_mask())[0])
    keep = np.ones(G.m, dtype=bool)
    keep[extra_edge] = False
    T = Graph(G.n, G.edges[keep], root=G.root)
    u, x = (int(v) for v in G.edges[extra_edge])
    # cycle: path u -> top <- x
    anc_u = [u]
    while T.parent[anc_u[-1]] >= 0:
        anc_u.append(int(T.parent[anc_u[-1]]))
    pos = {v: i for i, v in enumerate(anc_u)}
    path_x = [x]
    while path_x[-1] not in pos:
        path_x.append(int(T.parent[path_x[-1]]))
    top = path_x[-1]
    down_u = anc_u[:pos[top]]          # u ... child of top (bottom-up)
    down_x = path_x[:-1]               # x ... child of top (bottom-up)
    cycle = list(reversed(down_u)) + down_x   # w_1 .. w_l, from top via u side
    on_cycle = set(cycle)

    pin = pinned_mask(G, xi)
    f = np.ones(G.n)
    ch = T.children_lists()
    order = np.argsort(-T.depth, kind="stable")
    for v in order:
        v = int(v)
        if v == top:
            T_msgs = [f[c] for c in ch[v] if c not in on_cycle]
            R = [(f[c] - 1.0) / params.q if np.isfinite(f[c]) else np.inf for c in cycle]
            f[v] = np.inf if pin[v] else cycle_gadget_message(
                GadgetInput(len(cycle), R, T_msgs, params))
            continue
        kids = [c for c in ch[v] if not (v in on_cycle and c in on_cycle)]
        if pin[v]:
            f[v] = np.inf
        else:
            f[v] = float(np.prod(phi(np.asarray([f[c] for c in kids]), params))) if kids else 1.0
    return f


# --------------------------------------------------------------------------
# sharper decay bound


@dataclass
class SharperBoundReport:
    d: int
    q: float
    a: float
    p_s: float
    y_star: float
    beta_star: float
    beta_closed_form: float
    bound: float
    r_P: float
    r_Q: float
    holds: bool
    roots_ordered: bool
    r_Q_matches_y_star: bool

    def as_dict(self) -> dict:
        return asdict(self)


def _aux(d, q):
    A = lambda y: (1.0 - y) + d * (y + q - 1.0)
    B = lambda y: (d - 1.0) * (q - 1.0) + (d + q - 1.0) * y
    return A, B


def _root_above_one(fn, lo=1.0 + 1e-12):
    flo = fn(lo)
    hi = 2.0 * lo
    while (fn(hi) > 0) == (flo > 0):
        hi *= 2.0
        if hi > 1e200:
            raise NumericError("could not bracket a root on (1, inf)")
    return brentq(fn, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)


def sharper_bound_check(d: int, q: float, a: float = 1.0) -> SharperBoundReport:
    """Check ``g'(y*) < d^-a`` at ``p = p_s`` and locate the roots of P and Q.

    ``A(y) = (1-y) + d(y+q-1)``, ``B(y) = (d-1)(q-1) + (d+q-1)y``,
    ``P(y) = d^(a+2) q^2 y - y^(1/d) A(y)^2`` and ``Q(y) = B(y)^d - y A(y)^d``.
    At ``p_s`` the map reduces to ``Phi = B/A`` so the nontrivial fixed point
    is the root ``r_Q`` of ``Q`` on ``(1, inf)``, and
    ``g'(y*) = d^2 q^2 y*^((d-1)/d) / A(y*)^2``; the bound holds exactly when
    ``P(y*) < 0``, i.e. ``r_P < r_Q``.  Roots use log forms for stability.
    """
    if d < 2 or not q > 2.0 or a < 1:
        raise ValueError("need d >= 2, q > 2, a >= 1")
    p_s = q / (d + q - 1.0)
    A, B = _aux(d, q)
    logQ = lambda y: d * math.log(B(y)) - math.log(y) - d * math.log(A(y))
    logP = lambda y: ((a + 2) * math.log(d) + 2 * math.log(q) + math.log(y)
                      - math.log(y) / d - 2 * math.log(A(y)))
    # Q vanishes at 1 and is positive just above it; start past the
    # inflection point where log Q is safely positive
    r_Q = _root_above_one(logQ, lo=max(inflection_point(p_s, q, d), 1.0 + 1e-6))
    r_P = _root_above_one(logP)
    rep = fixed_points(RCParams(p_s, q), d, p_u=_p_u(q, d))
    y_star, beta = rep.y_star, rep.beta_star
    closed = d * d * q * q * y_star ** ((d - 1.0) / d) / A(y_star) ** 2
    bound = float(d) ** (-a)
    return SharperBoundReport(
        d, q, a, p_s, y_star, beta, closed, bound, r_P, r_Q,
        holds=bool(beta < bound),
        roots_ordered=bool(r_P < r_Q),
        r_Q_matches_y_star=bool(abs(r_Q - y_star) <= 1e-8 * max(1.0, y_star)))
