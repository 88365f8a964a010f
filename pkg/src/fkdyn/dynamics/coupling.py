"""Grand monotone coupling, censoring schedules and coupling times."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..boundary import BoundaryCondition
from ..oracle import RCParams
from ..topology import Graph, TreeSpec, build_tree
from . import engine
from .glauber import ChainState

__all__ = [
    "RandomStream",
    "CensorPhase",
    "CensorSchedule",
    "ChainSpec",
    "CoupledSystem",
    "CouplingRun",
    "OrderViolation",
    "coupled_run",
    "coupling_time_profile",
    "sample_trajectory",
]

CHUNK = 1 << 16


class OrderViolation(RuntimeError):
    """A monotone pair of chains lost its coordinatewise order."""


class RandomStream:
    """Counter-based stream of ``(edge draw, uniform)`` pairs.

    Built on Philox so that a role (``key``) and a seed identify the stream
    exactly; chunks are produced in a fixed size so consumers that stop
    early leave the remainder reproducible.
    """

    def __init__(self, seed, key: int = 0, chunk: int = CHUNK):
        ss = np.random.SeedSequence([int(seed), int(key)])
        self._gen = np.random.Generator(np.random.Philox(ss))
        self.chunk = chunk
        self._buf_e = np.empty(0)
        self._buf_u = np.empty(0)

    def take(self, k: int):
        """Next ``k`` pairs as two float arrays in ``[0, 1)``."""
        while self._buf_e.shape[0] < k:
            blk = self._gen.random((2, self.chunk))
            self._buf_e = np.concatenate([self._buf_e, blk[0]])
            self._buf_u = np.concatenate([self._buf_u, blk[1]])
        e, u = self._buf_e[:k], self._buf_u[:k]
        self._buf_e, self._buf_u = self._buf_e[k:], self._buf_u[k:]
        return e, u

    def uniforms(self, shape):
        return self._gen.random(shape)


@dataclass
class CensorPhase:
    """``duration`` steps during which only ``allowed`` edges update.

    With ``draw_from_allowed`` the edge of each step is drawn uniformly from
    ``allowed``; otherwise it is drawn from all edges and updates outside
    ``allowed`` are skipped.
    """

    duration: int
    allowed: Optional[np.ndarray] = None
    draw_from_allowed: bool = False

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError("phase durations must be positive")


@dataclass
class CensorSchedule:
    phases: list = field(default_factory=list)

    @property
    def total(self) -> int:
        return sum(ph.duration for ph in self.phases)

    def validate(self, m: int):
        for ph in self.phases:
            if ph.allowed is not None:
                a = np.asarray(ph.allowed, dtype=np.int64)
                if a.size and (a.min() < 0 or a.max() >= m):
                    raise ValueError("censored edge ids out of range")


@dataclass
class ChainSpec:
    """An extra chain: its start and its update rule.

    ``threshold=None`` gives a Glauber chain; a number gives a chain that
    opens the drawn edge iff the shared uniform falls below it.
    """

    initial: np.ndarray
    threshold: Optional[float] = None
    name: str = ""


def _dominated(ti, tj, p, phat):
    """Whether rule ``i`` never opens an edge that rule ``j`` closes."""
    if ti is None and tj is None:
        return True
    if ti is None:
        return tj >= p
    if tj is None:
        return ti <= phat
    return ti <= tj


class CoupledSystem:
    """Several chains on one instance sharing a randomness stream."""

    def __init__(self, G: Graph, bc: Optional[BoundaryCondition], params: RCParams,
                 chains: Sequence[ChainSpec], audit: bool = True,
                 force_general: bool = False):
        self.G, self.bc, self.params = G, bc, params
        m, n = G.m, G.n
        self.X = np.ascontiguousarray(
            np.stack([np.asarray(c.initial, dtype=np.uint8) for c in chains]))
        self.mode = np.array([engine.MODE_GLAUBER if c.threshold is None
                              else engine.MODE_THRESHOLD for c in chains], dtype=np.int64)
        self.thr = np.array([0.0 if c.threshold is None else c.threshold for c in chains])
        self.names = [c.name or f"chain{i}" for i, c in enumerate(chains)]
        pairs = []
        if audit:
            for i, ci in enumerate(chains):
                for j, cj in enumerate(chains):
                    if i != j and np.all(self.X[i] <= self.X[j]) and _dominated(
                            ci.threshold, cj.threshold, params.p, params.p_hat):
                        pairs.append((i, j))
        self.pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)

        groups = bc.groups(G.root) if bc is not None else []
        self.tree_mode = (not force_general and G.root is not None and G.is_tree()
                          and len(groups) <= 1)
        self.eu = np.ascontiguousarray(G.edges[:, 0])
        self.ev = np.ascontiguousarray(G.edges[:, 1])
        if self.tree_mode:
            par = G.parent
            child = np.where(par[self.eu] == self.ev, self.eu, self.ev)
            self.dn = np.ascontiguousarray(child)
            self.up = np.ascontiguousarray(par[child])
            self.parent = np.ascontiguousarray(par)
            self.pedge = np.ascontiguousarray(G.parent_edge)
            pinned = np.zeros(n, dtype=np.bool_)
            if groups:
                pinned[list(groups[0])] = True
            self.pinned = pinned
            self.order = np.ascontiguousarray(np.argsort(-G.depth, kind="stable"))
            self.cnt = np.stack([engine.tree_counts(x, pinned, self.order, self.parent, self.pedge)
                                 for x in self.X])
        else:
            self.up = self.dn = self.parent = self.pedge = np.zeros(1, dtype=np.int64)
            self.cnt = np.zeros((self.X.shape[0], 1), dtype=np.int32)
        # adjacency with virtual wiring edges (id -1)
        src = list(self.eu) + list(self.ev)
        dst = list(self.ev) + list(self.eu)
        eid = list(range(m)) + list(range(m))
        for grp in groups:
            for v in grp[1:]:
                src += [grp[0], v]
                dst += [v, grp[0]]
                eid += [-1, -1]
        src, dst, eid = map(lambda a: np.asarray(a, dtype=np.int64), (src, dst, eid))
        order = np.argsort(src, kind="stable")
        self.nbr = np.ascontiguousarray(dst[order])
        self.nbe = np.ascontiguousarray(eid[order])
        self.indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=self.indptr[1:])
        self.markA = np.zeros(n, dtype=np.int64)
        self.markB = np.zeros(n, dtype=np.int64)
        self.qA = np.zeros(n, dtype=np.int64)
        self.qB = np.zeros(n, dtype=np.int64)
        self.stamp = 0
        self.steps = 0
        self.violations = 0
        self.audited_steps = 0
        self.ndiff = int(np.sum(self.X[0] != self.X[1])) if len(self.X) >= 2 else -1
        self.coupled_at = 0 if self.ndiff == 0 else None

    def config(self, i: int) -> np.ndarray:
        return self.X[i].astype(bool)

    def snapshot(self):
        """Copy of the mutable chain state, for :meth:`restore`."""
        return (self.X.copy(), self.cnt.copy(), self.ndiff, self.coupled_at, self.steps,
                self.violations, self.audited_steps)

    def restore(self, snap):
        X, cnt, self.ndiff, self.coupled_at, self.steps, self.violations, self.audited_steps = snap
        self.X[...] = X
        self.cnt[...] = cnt

    def run(self, stream: RandomStream, steps: int, allowed=None, draw_from_allowed=False,
            stop_on_couple=False, record_every: int = 0):
        """Advance every chain by ``steps`` draws of the shared stream.

        Returns the recorded chain-0 states (bitmask codes) when
        ``record_every`` is positive.
        """
        m = self.G.m
        allowed_mask = np.ones(m, dtype=np.uint8)
        pool = np.arange(m, dtype=np.int64)
        if allowed is not None:
            ids = np.asarray(allowed, dtype=np.int64)
            allowed_mask[:] = 0
            allowed_mask[ids] = 1
            if draw_from_allowed:
                pool = np.sort(ids)
        if record_every and m > 62:
            raise ValueError("state recording needs at most 62 edges")
        code = int(sum(1 << i for i in np.flatnonzero(self.X[0]))) if record_every else 0
        rec = np.zeros(steps // record_every + 1 if record_every else 1, dtype=np.int64)
        rec_pos = 0
        done = 0
        while done < steps:
            k = min(stream.chunk, steps - done)
            ue, uu = stream.take(k)
            out = engine.run_chunk(
                self.X, self.cnt, self.tree_mode, self.mode, self.thr, ue, uu, pool,
                allowed_mask, self.eu, self.ev, self.up, self.dn, self.parent, self.pedge,
                self.indptr, self.nbr, self.nbe, self.markA, self.markB, self.qA, self.qB,
                self.stamp, float(self.params.p), float(self.params.p_hat), self.pairs,
                self.ndiff, self.steps, stop_on_couple and self.coupled_at is None,
                record_every, rec, rec_pos, code)
            used, c_at, viol, self.ndiff, self.stamp, rec_pos, code = out
            self.steps += used
            done += used
            self.audited_steps += used if len(self.pairs) else 0
            self.violations += viol
            if viol:
                raise OrderViolation(
                    f"{viol} order violations by step {self.steps}")
            if c_at >= 0 and self.coupled_at is None:
                self.coupled_at = int(c_at)
                if stop_on_couple:
                    break
        return rec[:rec_pos] if record_every else None


@dataclass
class CouplingRun:
    """Outcome of a coupled run of top (all open) and bottom (empty) chains."""

    top: ChainState
    bottom: ChainState
    extras: list
    coupled_at: Optional[int]
    steps: int
    violations: int
    audited_steps: int
    phases: list = field(default_factory=list)


def coupled_run(G: Graph, bc: Optional[BoundaryCondition], params: RCParams, seed,
                max_steps: int, schedule: Optional[CensorSchedule] = None,
                extra_chains: Sequence[ChainSpec] = (), stop_on_couple: bool = True,
                audit: bool = True, force_general: bool = False) -> CouplingRun:
    """Run top/bottom chains (plus extras) on one shared stream.

    Without a schedule the run lasts up to ``max_steps`` and stops at the
    first step where top and bottom coincide (if ``stop_on_couple``).  With
    a schedule the phases run in order, each censored to its allowed edges.
    Every update is audited for order preservation between every pair of
    initially ordered chains whose rules are ordered.
    """
    if params.q < 1:
        raise ValueError("the monotone coupling needs q >= 1")
    m = G.m
    chains = [ChainSpec(np.ones(m, dtype=bool), None, "top"),
              ChainSpec(np.zeros(m, dtype=bool), None, "bottom")] + list(extra_chains)
    sysm = CoupledSystem(G, bc, params, chains, audit=audit, force_general=force_general)
    stream = RandomStream(seed)
    phase_log = []
    if schedule is None:
        if sysm.coupled_at is None or not stop_on_couple:
            sysm.run(stream, max_steps, stop_on_couple=stop_on_couple)
    else:
        schedule.validate(m)
        for ph in schedule.phases:
            sysm.run(stream, ph.duration, ph.allowed, ph.draw_from_allowed,
                     stop_on_couple=False)
            phase_log.append({"duration": ph.duration, "steps": sysm.steps,
                              "ndiff": sysm.ndiff})
    states = [ChainState(G, bc, params, sysm.config(i), sysm.steps, i)
              for i in range(len(chains))]
    return CouplingRun(states[0], states[1], states[2:], sysm.coupled_at, sysm.steps,
                       sysm.violations, sysm.audited_steps, phase_log)


def sample_trajectory(G: Graph, bc, params: RCParams, seed, steps: int, thin: int,
                      initial=None) -> np.ndarray:
    """Bitmask codes of a single Glauber chain recorded every ``thin`` steps."""
    init = np.zeros(G.m, dtype=bool) if initial is None else np.asarray(initial, dtype=bool)
    sysm = CoupledSystem(G, bc, params, [ChainSpec(init)], audit=False)
    return sysm.run(RandomStream(seed, key=7), steps, record_every=thin)


def _bc_for(G: Graph, kind: str):
    from ..boundary import make_bc
    return make_bc(G.leaves(), kind)


def coupling_time_profile(family: Sequence[TreeSpec], params: RCParams, bc_kind: str,
                          replicas: int, seed: int, max_steps: int = 10 ** 8):
    """Median coupling time of top/bottom chains for each tree in ``family``.

    Returns a list of row dicts ``{height, n, m, median, times, censored}``.
    Replica ``r`` of size index ``i`` uses seed ``(seed, i, r)``, so rows do
    not depend on evaluation order.
    """
    rows = []
    for i, spec in enumerate(family):
        G = build_tree(spec)
        bc = _bc_for(G, bc_kind)
        times = []
        censored = 0
        for r in range(replicas):
            sub = int(np.random.SeedSequence([seed, i, r]).generate_state(1)[0])
            run = coupled_run(G, bc, params, sub, max_steps, audit=False)
            if run.coupled_at is None:
                censored += 1
                times.append(np.inf)
            else:
                times.append(run.coupled_at)
        rows.append({"height": spec.height, "n": G.n, "m": G.m,
                     "median": float(np.median(times)), "times": times,
                     "censored": censored})
    return rows
