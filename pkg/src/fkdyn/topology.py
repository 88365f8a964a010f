"""Graph families used throughout the package.

Complete d-ary and Delta-regular trees, the almost-regular tree variants,
unicyclic graphs built from a tree plus one extra edge, configuration-model
random regular graphs, BFS balls and descendant subtrees.

Vertices are integers ``0..n-1``.  Edges carry stable integer ids equal to
their position in ``Graph.edges``.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

__all__ = [
    "Graph",
    "TreeSpec",
    "Ball",
    "GraphValidationError",
    "GenerationError",
    "build_tree",
    "generate_random_regular",
    "bfs_ball",
    "subtree",
    "induced_subgraph",
    "tree_excess",
    "to_text",
    "from_text",
    "random_tree",
    "random_unicyclic",
]

RETRY_CAP = 1000


class GraphValidationError(ValueError):
    """Raised for malformed graph specifications or bad ids."""


class GenerationError(RuntimeError):
    """Raised when the random graph generator exhausts its retry budget."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph with indexed edges.

    Parameters
    ----------
    n : int
        Number of vertices.
    edges : array_like, shape (m, 2)
        Edge list; row ``i`` is edge id ``i``.
    root : int, optional
        Distinguished vertex.  When given, BFS depths and a BFS parent tree
        are computed (ties broken by edge id).
    """

    n: int
    edges: np.ndarray
    root: Optional[int] = None
    depth: Optional[np.ndarray] = field(default=None, repr=False)
    parent: Optional[np.ndarray] = field(default=None, repr=False)
    parent_edge: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if self.n < 1:
            raise GraphValidationError("graph needs at least one vertex")
        if e.size and (e.min() < 0 or e.max() >= self.n):
            raise GraphValidationError("edge endpoint out of range")
        if np.any(e[:, 0] == e[:, 1]):
            raise GraphValidationError("self-loops are not allowed")
        key = np.sort(e, axis=1)
        if len(np.unique(key, axis=0)) != len(key):
            raise GraphValidationError("duplicate edges are not allowed")
        object.__setattr__(self, "edges", _frozen(e.copy()))
        if self.root is not None:
            if not 0 <= self.root < self.n:
                raise GraphValidationError(f"root {self.root} out of range")
            depth, par, pedge = _bfs_tree(self.n, e, self.root)
            object.__setattr__(self, "depth", _frozen(depth))
            object.__setattr__(self, "parent", _frozen(par))
            object.__setattr__(self, "parent_edge", _frozen(pedge))

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def incident(self) -> list[list[int]]:
        """Per-vertex incident edge ids, in increasing id order."""
        cached = self.__dict__.get("_incident")
        if cached is None:
            cached = [[] for _ in range(self.n)]
            for i, (u, v) in enumerate(self.edges):
                cached[u].append(i)
                cached[v].append(i)
            object.__setattr__(self, "_incident", cached)
        return cached

    def neighbors(self, v: int) -> list[int]:
        return [int(self.other(e, v)) for e in self.incident[v]]

    def other(self, e: int, v: int) -> int:
        a, b = self.edges[e]
        return int(b if a == v else a)

    def degree(self, v: int) -> int:
        return len(self.incident[v])

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n)

    def children(self, v: int) -> list[int]:
        """BFS-tree children of ``v`` (requires a root)."""
        self._need_root()
        return [int(c) for c in self.children_lists()[v]]

    def children_lists(self) -> list[list[int]]:
        cached = self.__dict__.get("_children")
        if cached is None:
            self._need_root()
            cached = [[] for _ in range(self.n)]
            for v in np.argsort(self.depth, kind="stable"):
                if self.parent[v] >= 0:
                    cached[self.parent[v]].append(int(v))
            object.__setattr__(self, "_children", cached)
        return cached

    def tree_edge_mask(self) -> np.ndarray:
        """Boolean mask of the edges used by the BFS tree."""
        self._need_root()
        mask = np.zeros(self.m, dtype=bool)
        pe = self.parent_edge[self.parent_edge >= 0]
        mask[pe] = True
        return mask

    def is_tree(self) -> bool:
        return self.m == self.n - 1 and _n_components(self.n, self.edges) == 1

    def is_acyclic(self) -> bool:
        return self.m == self.n - _n_components(self.n, self.edges)

    def leaves(self) -> list[int]:
        """Non-root vertices without BFS children."""
        self._need_root()
        ch = self.children_lists()
        return [v for v in range(self.n) if not ch[v] and v != self.root]

    def edge_id(self, u: int, v: int) -> int:
        for e in self.incident[u]:
            if self.other(e, u) == v:
                return e
        raise GraphValidationError(f"no edge between {u} and {v}")

    def with_root(self, root: int) -> "Graph":
        return Graph(self.n, self.edges, root=root)

    def _need_root(self):
        if self.root is None:
            raise GraphValidationError("operation requires a rooted graph")


def _bfs_tree(n, edges, root):
    adj = [[] for _ in range(n)]
    for i, (u, v) in enumerate(edges):
        adj[u].append((i, v))
        adj[v].append((i, u))
    depth = np.full(n, -1, dtype=np.int64)
    parent = np.full(n, -1, dtype=np.int64)
    pedge = np.full(n, -1, dtype=np.int64)
    depth[root] = 0
    queue = deque([root])
    while queue:
        x = queue.popleft()
        for i, y in adj[x]:
            if depth[y] < 0:
                depth[y] = depth[x] + 1
                parent[y] = x
                pedge[y] = i
                queue.append(y)
    return depth, parent, pedge


def _n_components(n, edges):
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    comps = n
    for u, v in edges:
        ru, rv = find(int(u)), find(int(v))
        if ru != rv:
            parent[ru] = rv
            comps -= 1
    return comps


def tree_excess(g: Graph) -> int:
    """``|E| - |V| + #components``; zero exactly for forests."""
    return g.m - g.n + _n_components(g.n, g.edges)


# --------------------------------------------------------------------------
# trees

TREE_KINDS = ("d-ary", "regular", "almost-i", "almost-ii", "unicyclic")


@dataclass(frozen=True)
class TreeSpec:
    """Description of a tree-like graph of a given height.

    ``kind`` is one of ``"d-ary"``, ``"regular"`` (Delta-regular, root has
    Delta children), ``"almost-i"``, ``"almost-ii"`` or ``"unicyclic"``.

    ``root_children`` overrides the root branching for ``almost-i`` and
    ``unicyclic`` (Delta or Delta-1; default Delta).  ``defect`` is the
    vertex id (BFS numbering) of the unique non-root vertex with Delta-2
    children for ``almost-i``, and the ``(u, w)`` pair of the extra edge for
    ``unicyclic``.
    """

    kind: str
    delta: int
    height: int
    root_children: Optional[int] = None
    defect: object = None

    @property
    def d(self) -> int:
        return self.delta - 1


def _grow(branching_of, height):
    """BFS-numbered tree where ``branching_of(v, depth)`` gives child counts."""
    edges = []
    frontier = [0]
    n = 1
    for depth in range(height):
        nxt = []
        for v in frontier:
            for _ in range(branching_of(v, depth)):
                edges.append((v, n))
                nxt.append(n)
                n += 1
        frontier = nxt
    return n, edges


def build_tree(spec: TreeSpec) -> Graph:
    """Build the rooted graph described by ``spec`` (root is vertex 0)."""
    if spec.kind not in TREE_KINDS:
        raise GraphValidationError(f"unknown tree kind {spec.kind!r}")
    if spec.delta < 3:
        raise GraphValidationError("Delta must be at least 3")
    if spec.height < 1:
        raise GraphValidationError("height must be at least 1")
    d = spec.d
    h = spec.height

    if spec.kind == "d-ary":
        n, edges = _grow(lambda v, k: d, h)
    elif spec.kind == "regular":
        n, edges = _grow(lambda v, k: spec.delta if v == 0 else d, h)
    elif spec.kind == "almost-ii":
        # root degree Delta-2; for Delta=3 the root has a single child
        n, edges = _grow(lambda v, k: spec.delta - 2 if v == 0 else d, h)
    else:
        rc = spec.delta if spec.root_children is None else spec.root_children
        if rc not in (spec.delta, spec.delta - 1):
            raise GraphValidationError("root_children must be Delta or Delta-1")
        if spec.kind == "almost-i":
            if spec.defect is None:
                raise GraphValidationError("almost-i needs a defect vertex")
            dv = int(spec.defect)
            if dv == 0:
                raise GraphValidationError("defect vertex must not be the root")

            def br(v, k):
                if v == 0:
                    return rc
                return d - 1 if v == dv else d

            n, edges = _grow(br, h)
            depth = Graph(n, edges, root=0).depth
            if dv >= n or depth[dv] >= h:
                raise GraphValidationError(
                    f"defect vertex {dv} is not an internal vertex")
        else:
            n, edges = _grow(lambda v, k: rc if v == 0 else d, h)
            if spec.defect is None or len(spec.defect) != 2:
                raise GraphValidationError("unicyclic needs an extra edge (u, w)")
            u, w = (int(x) for x in spec.defect)
            if not (0 <= u < n and 0 <= w < n) or u == w:
                raise GraphValidationError(f"extra edge {spec.defect} has bad endpoints")
            if (min(u, w), max(u, w)) in {(min(a, b), max(a, b)) for a, b in edges}:
                raise GraphValidationError("extra edge duplicates a tree edge")
            edges = edges + [(u, w)]
    return Graph(n, edges, root=0)


# --------------------------------------------------------------------------
# random regular graphs


def generate_random_regular(n: int, delta: int, seed=None) -> Graph:
    """Uniform simple ``delta``-regular graph via the configuration model.

    The whole half-edge matching is resampled whenever it produces a loop or
    a multi-edge, up to ``RETRY_CAP`` attempts.
    """
    if (n * delta) % 2:
        raise GraphValidationError(f"n*Delta = {n * delta} is odd")
    if not n > delta:
        raise GraphValidationError("need n > Delta")
    rng = np.random.default_rng(seed)
    stubs = np.repeat(np.arange(n, dtype=np.int64), delta)
    for _ in range(RETRY_CAP):
        pairs = rng.permutation(stubs).reshape(-1, 2)
        if np.any(pairs[:, 0] == pairs[:, 1]):
            continue
        pairs.sort(axis=1)
        if len(np.unique(pairs[:, 0] * n + pairs[:, 1])) != len(pairs):
            continue
        return Graph(n, pairs)
    raise GenerationError(f"no simple matching after {RETRY_CAP} attempts")


# --------------------------------------------------------------------------
# balls and subgraphs


def induced_subgraph(g: Graph, vertices: Sequence[int], root: Optional[int] = None):
    """Induced subgraph on ``vertices``.

    Returns ``(sub, vmap, emap)`` where ``vmap[i]`` / ``emap[j]`` give the
    original ids of new vertex ``i`` / new edge ``j``.  New vertex ids follow
    the order of ``vertices``; new edge ids follow original edge order.
    """
    vmap = np.asarray(list(vertices), dtype=np.int64)
    index = np.full(g.n, -1, dtype=np.int64)
    index[vmap] = np.arange(vmap.size)
    ends = index[g.edges]
    emap = np.flatnonzero((ends >= 0).all(axis=1))
    new_root = None if root is None else int(index[int(root)])
    sub = Graph(len(vmap), ends[emap], root=new_root)
    return sub, vmap, emap


@dataclass(frozen=True, eq=False)
class Ball:
    """BFS ball; ``subgraph`` is relabelled with the center as vertex 0."""

    subgraph: Graph
    center: int
    radius: int
    boundary: tuple
    tree_excess: int
    vertices: np.ndarray
    edge_ids: np.ndarray


def bfs_ball(g: Graph, e: int, r: int) -> Ball:
    """Induced ball of radius ``r`` around the smaller endpoint of edge ``e``."""
    if not 0 <= e < g.m:
        raise GraphValidationError(f"edge id {e} out of range")
    if r < 1:
        raise GraphValidationError("radius must be at least 1")
    center = int(min(g.edges[e]))
    dist = {center: 0}
    order = [center]
    queue = deque([center])
    while queue:
        x = queue.popleft()
        if dist[x] == r:
            continue
        for y in g.neighbors(x):
            if y not in dist:
                dist[y] = dist[x] + 1
                order.append(y)
                queue.append(y)
    sub, vmap, emap = induced_subgraph(g, order, root=center)
    boundary = tuple(v for v in order if dist[v] == r)
    return Ball(sub, center, r, boundary, tree_excess(sub), vmap, emap)


def subtree(g: Graph, v: int):
    """Descendant subgraph of ``v`` in the BFS tree, rooted at ``v``.

    Non-tree edges with both endpoints below ``v`` are kept.  Returns
    ``(sub, vmap, emap)`` as :func:`induced_subgraph`.
    """
    g._need_root()
    if not 0 <= v < g.n:
        raise GraphValidationError(f"vertex {v} out of range")
    ch = g.children_lists()
    order = [v]
    i = 0
    while i < len(order):
        order.extend(ch[order[i]])
        i += 1
    return induced_subgraph(g, order, root=v)


# --------------------------------------------------------------------------
# text serialization


def to_text(g: Graph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines += [f"{u} {v}" for u, v in g.edges]
    return "\n".join(lines) + "\n"


def from_text(text: str, root: Optional[int] = None) -> Graph:
    rows = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
    if not rows or len(rows[0]) != 2:
        raise GraphValidationError("missing 'n m' header")
    n, m = int(rows[0][0]), int(rows[0][1])
    if len(rows) - 1 != m:
        raise GraphValidationError(f"header says {m} edges, found {len(rows) - 1}")
    edges = [(int(a), int(b)) for a, b in rows[1:]]
    return Graph(n, np.asarray(edges, dtype=np.int64).reshape(-1, 2), root=root)


def edges_between(g: Graph, vertices: Iterable[int]) -> np.ndarray:
    """Ids of edges with both endpoints in ``vertices``."""
    s = np.zeros(g.n, dtype=bool)
    s[list(vertices)] = True
    return np.flatnonzero(s[g.edges[:, 0]] & s[g.edges[:, 1]])


# --------------------------------------------------------------------------
# small random instances


def random_tree(n: int, rng, root: int = 0) -> Graph:
    """Uniform random recursive tree: vertex ``i`` attaches to a uniform earlier vertex."""
    edges = [(int(rng.integers(0, i)), i) for i in range(1, n)]
    return Graph(n, np.asarray(edges, dtype=np.int64).reshape(-1, 2), root=root)


def random_unicyclic(n: int, rng, root: int = 0) -> Graph:
    """Random tree plus one extra edge closing a cycle."""
    T = random_tree(n, rng, root)
    have = {tuple(sorted(map(int, e))) for e in T.edges}
    cand = [(a, b) for a in range(n) for b in range(a + 1, n) if (a, b) not in have]
    a, b = cand[int(rng.integers(len(cand)))]
    return Graph(n, np.vstack([T.edges, [[a, b]]]), root=root)
