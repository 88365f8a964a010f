"""Boundary conditions as partitions of a boundary vertex set.

A boundary condition lists the boundary vertices and partitions them into
blocks; vertices sharing a block are pre-connected when components are
counted.  Two optional decorations join a vertex to the distinguished class
``C1``: the root wiring (``root_wired``) and an auxiliary vertex
(``aux_wired``).  Both are interpreted by downstream code as membership of
that vertex in ``C1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .topology import Graph

__all__ = [
    "BoundaryCondition",
    "BoundaryError",
    "make_bc",
    "sample_theta_q_wired",
    "induced_bc",
    "restrict_bc",
    "is_coarser",
    "wiring_labels",
]


class BoundaryError(ValueError):
    """Raised for malformed or mismatched boundary conditions."""


def _normalize(blocks, boundary):
    seen = {}
    out = []
    for b in blocks:
        blk = tuple(sorted(int(v) for v in b))
        if not blk:
            continue
        for v in blk:
            if v in seen:
                raise BoundaryError(f"vertex {v} appears in two blocks")
            seen[v] = True
        out.append(blk)
    bset = set(boundary)
    extra = set(seen) - bset
    if extra:
        raise BoundaryError(f"block vertices {sorted(extra)} are not boundary vertices")
    for v in boundary:
        if v not in seen:
            out.append((v,))
    return tuple(sorted(out))


@dataclass(frozen=True)
class BoundaryCondition:
    """Partition of ``boundary`` into ``blocks``.

    Parameters
    ----------
    boundary : sequence of int
        The boundary vertex list, kept in the given order.
    blocks : iterable of iterables
        Disjoint vertex sets; boundary vertices not listed become singletons.
    root_wired : bool
        Wire the graph root into ``C1``.
    aux_wired : int, optional
        A further vertex wired into ``C1``.
    c1 : sequence of int, optional
        Explicit choice of the distinguished class: one of the blocks, or
        an empty sequence for "no class" (nothing is wired).  ``None``
        applies the default rule of :attr:`c1`.
    provenance : dict, optional
        Free-form record of how the condition was produced (for instance
        ``{"kind": "theta_q_wired", "theta": 0.3, "Q": 0}``).
    """

    boundary: tuple
    blocks: tuple
    root_wired: bool = False
    aux_wired: Optional[int] = None
    c1_choice: Optional[tuple] = None
    provenance: dict = field(default_factory=dict, compare=False, hash=False)

    def __init__(self, boundary, blocks=(), root_wired=False, aux_wired=None,
                 provenance=None, c1=None):
        bnd = tuple(int(v) for v in boundary)
        if len(set(bnd)) != len(bnd):
            raise BoundaryError("boundary vertices must be distinct")
        object.__setattr__(self, "boundary", bnd)
        object.__setattr__(self, "blocks", _normalize(blocks, bnd))
        object.__setattr__(self, "root_wired", bool(root_wired))
        object.__setattr__(self, "aux_wired", None if aux_wired is None else int(aux_wired))
        object.__setattr__(self, "provenance", dict(provenance or {}))
        choice = None
        if c1 is not None:
            choice = tuple(sorted(int(v) for v in c1))
            if choice and choice not in self.blocks:
                raise BoundaryError(f"c1 choice {choice} is not a block")
        object.__setattr__(self, "c1_choice", choice)

    # -- classification -------------------------------------------------
    @property
    def nonsingleton(self) -> list[tuple]:
        return [b for b in self.blocks if len(b) > 1]

    @property
    def is_free(self) -> bool:
        return not self.nonsingleton

    @property
    def is_wired(self) -> bool:
        return len(self.blocks) <= 1

    @property
    def is_single_component(self) -> bool:
        return len(self.nonsingleton) <= 1

    @property
    def c1(self) -> tuple:
        """The distinguished class.

        An explicit ``c1`` choice wins.  Otherwise: the unique non-singleton
        block when there is one, else the singleton of the lowest-id
        boundary vertex.  For conditions with
        several non-singleton blocks the largest block is returned (ties go
        to the block with the smallest vertex); that choice only matters to
        samplers, which treat the class as a bookkeeping constant.
        """
        if self.c1_choice is not None:
            return self.c1_choice
        ns = self.nonsingleton
        if len(ns) == 1:
            return ns[0]
        if ns:
            return max(ns, key=lambda b: (len(b), -b[0]))
        if not self.boundary:
            return ()
        return (min(self.boundary),)

    def pinned(self, root: Optional[int] = None) -> tuple:
        """Vertices forced into ``C1``, including the root/aux decorations."""
        out = set(self.c1)
        if self.root_wired:
            if root is None:
                raise BoundaryError("root wiring needs the graph root")
            out.add(int(root))
        if self.aux_wired is not None:
            out.add(self.aux_wired)
        return tuple(sorted(out))

    def groups(self, root: Optional[int] = None) -> list[tuple]:
        """Vertex groups that are merged before counting components."""
        c1 = self.c1
        out = [b for b in self.blocks if b != c1 and len(b) > 1]
        pin = self.pinned(root)
        if len(pin) > 1:
            out.append(pin)
        return out

    # -- text form --------------------------------------------------------
    def to_text(self) -> str:
        aux = "-" if self.aux_wired is None else str(self.aux_wired)
        head = (f"boundary={','.join(map(str, self.boundary))} "
                f"root_wired={int(self.root_wired)} aux_wired={aux}")
        if self.c1_choice is not None:
            head += f" c1={','.join(map(str, self.c1_choice)) or '-'}"
        return "\n".join([head] + [" ".join(map(str, b)) for b in self.blocks]) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "BoundaryCondition":
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        if not lines:
            raise BoundaryError("empty boundary text")
        kv = dict(tok.split("=", 1) for tok in lines[0].split())
        try:
            bnd = [int(v) for v in kv["boundary"].split(",") if v]
            rw = bool(int(kv.get("root_wired", "0")))
            aux = kv.get("aux_wired", "-")
            c1 = kv.get("c1")
            if c1 is not None:
                c1 = [] if c1 == "-" else [int(v) for v in c1.split(",")]
        except (KeyError, ValueError) as exc:
            raise BoundaryError(f"bad header line: {lines[0]!r}") from exc
        blocks = [[int(v) for v in ln.split()] for ln in lines[1:]]
        return cls(bnd, blocks, rw, None if aux == "-" else int(aux), c1=c1)

    def as_dict(self) -> dict:
        return {
            "boundary": list(self.boundary),
            "blocks": [list(b) for b in self.blocks],
            "root_wired": self.root_wired,
            "aux_wired": self.aux_wired,
            "c1": None if self.c1_choice is None else list(self.c1_choice),
        }


def make_bc(boundary: Sequence[int], kind: str = "free", root_wired=False) -> BoundaryCondition:
    """Free (all singletons) or wired (one block) condition on ``boundary``."""
    if len(boundary) == 0:
        raise BoundaryError("boundary must be nonempty")
    if kind == "free":
        return BoundaryCondition(boundary, (), root_wired, provenance={"kind": "free"})
    if kind == "wired":
        return BoundaryCondition(boundary, [boundary], root_wired, provenance={"kind": "wired"})
    raise BoundaryError(f"unknown boundary kind {kind!r}")


def sample_theta_q_wired(boundary, theta, Q=0, U=(), arbitrary_blocks=(), seed=None,
                         root_wired=False) -> BoundaryCondition:
    """Random condition where each vertex outside ``U`` is wired w.p. ``theta``.

    The vertices of ``U`` (at most ``Q`` of them) carry ``arbitrary_blocks``
    verbatim; the remaining vertices independently join one common wired
    block with probability ``theta``.  The sampled wired set is recorded
    as the distinguished class even when it has fewer than two vertices,
    so a draw with no wired vertex has no class at all.
    """
    if not 0.0 <= theta <= 1.0:
        raise BoundaryError("theta must lie in [0, 1]")
    U = [int(v) for v in U]
    if len(U) > Q:
        raise BoundaryError(f"|U| = {len(U)} exceeds Q = {Q}")
    bset = set(int(v) for v in boundary)
    if not set(U) <= bset:
        raise BoundaryError("U must be a subset of the boundary")
    covered = [int(v) for b in arbitrary_blocks for v in b]
    if not set(covered) <= set(U):
        raise BoundaryError("arbitrary blocks must only use vertices of U")
    rest = np.array([v for v in boundary if v not in set(U)], dtype=np.int64)
    rng = np.random.default_rng(seed)
    mask = rng.random(len(rest)) < theta
    blocks = [tuple(rest[mask])] + [tuple(b) for b in arbitrary_blocks]
    prov = {"kind": "theta_q_wired", "theta": float(theta), "Q": int(Q), "U": sorted(U)}
    return BoundaryCondition(boundary, blocks, root_wired, provenance=prov,
                             c1=tuple(rest[mask]))


def wiring_labels(n: int, groups: Iterable[Sequence[int]]) -> np.ndarray:
    """Union-find representative per vertex after merging ``groups``."""
    lab = np.arange(n, dtype=np.int64)
    for grp in groups:
        grp = [int(v) for v in grp]
        if not grp:
            continue
        rep = min(lab[v] for v in grp)
        olds = {int(lab[v]) for v in grp}
        for o in olds:
            lab[lab == o] = rep
    return lab


def induced_bc(G: Graph, block_edges, boundary: Sequence[int], outside_config,
               outer_bc: Optional[BoundaryCondition] = None, return_labels: bool = False):
    """Condition on ``boundary`` induced by the configuration outside a block.

    Parameters
    ----------
    G : Graph
        Ambient graph.
    block_edges : array_like of int
        Edge ids of the block ``B``.
    boundary : sequence of int
        Boundary vertices of ``B`` in ``G``'s labels.
    outside_config : array_like of bool
        States of the edges ``E(G) \\ B`` in increasing edge-id order.
    outer_bc : BoundaryCondition, optional
        Condition on ``G`` itself, whose wirings are merged first.
    return_labels : bool
        Also return the component label of every vertex of ``G``.
    """
    inside = np.zeros(G.m, dtype=bool)
    inside[np.asarray(block_edges, dtype=np.int64)] = True
    out_ids = np.flatnonzero(~inside)
    cfg = np.asarray(outside_config, dtype=bool).ravel()
    if cfg.shape[0] != out_ids.shape[0]:
        raise BoundaryError(
            f"outside configuration has {cfg.shape[0]} entries, expected {out_ids.shape[0]}")
    used = out_ids[cfg]
    rows = list(G.edges[used, 0])
    cols = list(G.edges[used, 1])
    if outer_bc is not None:
        for grp in outer_bc.groups(G.root):
            rows += [grp[0]] * (len(grp) - 1)
            cols += list(grp[1:])
    adj = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(G.n, G.n))
    _, lab = connected_components(adj, directed=False)
    by = {}
    for v in boundary:
        by.setdefault(int(lab[v]), []).append(int(v))
    bc = BoundaryCondition(boundary, list(by.values()), provenance={"kind": "induced"})
    return (bc, lab) if return_labels else bc


def restrict_bc(xi: BoundaryCondition, sub_boundary: Sequence[int]) -> BoundaryCondition:
    """Intersect every block with ``sub_boundary``."""
    sub = [int(v) for v in sub_boundary]
    if not set(sub) <= set(xi.boundary):
        raise BoundaryError("sub-boundary is not contained in the boundary")
    s = set(sub)
    blocks = [[v for v in b if v in s] for b in xi.blocks]
    c1 = None if xi.c1_choice is None else [v for v in xi.c1_choice if v in s]
    return BoundaryCondition(sub, blocks, provenance={"kind": "restricted"}, c1=c1)


def is_coarser(xi: BoundaryCondition, xi2: BoundaryCondition) -> bool:
    """True iff every block of ``xi2`` lies inside a block of ``xi``."""
    if set(xi.boundary) != set(xi2.boundary):
        raise BoundaryError("conditions live on different boundary sets")
    where = {v: i for i, b in enumerate(xi.blocks) for v in b}
    return all(len({where[v] for v in b}) == 1 for b in xi2.blocks)
