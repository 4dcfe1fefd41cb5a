"""Graph families, Cartesian products, and canonical target placement.

Every builder produces a simple, connected, undirected graph with a
deterministic node numbering, so repeated builds are bit-identical and
downstream eigensolves are reproducible.  Families:

* ``complete``   -- N = n, all pairs adjacent.
* ``chain``      -- one-dimensional lattice of L sites (ring when periodic).
* ``torus``      -- d-dimensional hypercubic lattice, L sites per axis,
                    periodic by default.
* ``dsg``        -- triangle-based fractal built by gluing three copies of
                    the previous generation at their corner nodes; N = 3^g.
* ``tfractal``   -- tree fractal built by splitting every edge at its
                    midpoint and hanging a new branch off the midpoint;
                    N = 3^g + 1, numbered breadth-first from the branching
                    center.
* ``cayleytree`` -- rooted tree, three branches at the root, two children
                    per interior node, g shells; N = 3*2^g - 2.
* ``product``    -- Cartesian product of two member graphs; node (i, j) of
                    factors with sizes (Na, Nb) is numbered i*Nb + j.
"""
from __future__ import annotations

import json
import warnings
from collections import deque
from dataclasses import dataclass
from enum import Enum
from math import log

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from .errors import DEFAULT_DENSE_GUARD, ConfigError, DenseSizeWarning

NodeId = int


class Family(str, Enum):
    COMPLETE = "complete"
    CHAIN = "chain"
    TORUS = "torus"
    DSG = "dsg"
    TFRACTAL = "tfractal"
    CAYLEY_TREE = "cayleytree"
    PRODUCT = "product"


_GENERATIONAL = (Family.DSG, Family.TFRACTAL, Family.CAYLEY_TREE)
_LATTICE = (Family.CHAIN, Family.TORUS)


@dataclass(frozen=True)
class GraphSpec:
    """Declarative description of one graph.

    Only the parameters relevant to the family may be set:
    ``n`` for complete, ``g`` for dsg/tfractal/cayleytree, ``L`` (and ``d``
    for torus) for lattices, ``factors`` for products.  ``periodic``
    applies to lattices only and defaults to wrapped boundaries; pass
    ``periodic=False`` for open ones.
    """

    family: Family
    n: int | None = None
    g: int | None = None
    L: int | None = None
    d: int | None = None
    periodic: bool = True
    factors: tuple["GraphSpec", ...] | None = None

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, "family", Family(self.family))
        except ValueError as exc:
            raise ConfigError(f"unknown graph family: {self.family!r}") from exc
        if self.factors is not None:
            object.__setattr__(self, "factors", tuple(self.factors))
        self._validate()

    def _validate(self) -> None:
        fam = self.family

        def require(cond: bool, msg: str) -> None:
            if not cond:
                raise ConfigError(f"{fam.value}: {msg}")

        def forbid(names: tuple[str, ...]) -> None:
            for name in names:
                if getattr(self, name) is not None:
                    raise ConfigError(
                        f"{fam.value}: parameter {name!r} is not accepted"
                    )

        if fam is Family.COMPLETE:
            require(isinstance(self.n, int) and self.n >= 2, "needs integer n >= 2")
            forbid(("g", "L", "d", "factors"))
        elif fam is Family.CHAIN:
            require(isinstance(self.L, int) and self.L >= 2, "needs integer L >= 2")
            require(self.d in (None, 1), "d must be 1 (or omitted)")
            forbid(("n", "g", "factors"))
        elif fam is Family.TORUS:
            require(isinstance(self.L, int) and self.L >= 2, "needs integer L >= 2")
            require(isinstance(self.d, int) and self.d >= 1, "needs integer d >= 1")
            forbid(("n", "g", "factors"))
        elif fam in _GENERATIONAL:
            require(isinstance(self.g, int) and self.g >= 1, "needs integer g >= 1")
            forbid(("n", "L", "d", "factors"))
        elif fam is Family.PRODUCT:
            require(
                self.factors is not None and len(self.factors) == 2,
                "needs exactly two factors",
            )
            forbid(("n", "g", "L", "d"))
            for f in self.factors:  # type: ignore[union-attr]
                if not isinstance(f, GraphSpec):
                    raise ConfigError("product factors must be GraphSpec instances")

    # -- derived attributes -------------------------------------------------

    @property
    def node_count(self) -> int:
        fam = self.family
        if fam is Family.COMPLETE:
            return self.n  # type: ignore[return-value]
        if fam is Family.CHAIN:
            return self.L  # type: ignore[return-value]
        if fam is Family.TORUS:
            return self.L**self.d  # type: ignore[operator]
        if fam is Family.DSG:
            return 3**self.g  # type: ignore[operator]
        if fam is Family.TFRACTAL:
            return 3**self.g + 1  # type: ignore[operator]
        if fam is Family.CAYLEY_TREE:
            return 3 * 2**self.g - 2  # type: ignore[operator]
        a, b = self.factors  # type: ignore[misc]
        return a.node_count * b.node_count

    @property
    def spectral_dimension(self) -> float | None:
        """Spectral dimension of the family, or None where undefined
        (complete graphs, Cayley trees).  Products add the factors'."""
        fam = self.family
        if fam is Family.CHAIN:
            return 1.0
        if fam is Family.TORUS:
            return float(self.d)  # type: ignore[arg-type]
        if fam is Family.DSG:
            return 2.0 * log(3.0) / log(5.0)
        if fam is Family.TFRACTAL:
            return 2.0 * log(3.0) / log(6.0)
        if fam is Family.PRODUCT:
            dims = [f.spectral_dimension for f in self.factors]  # type: ignore[union-attr]
            if any(v is None for v in dims):
                return None
            return float(sum(dims))  # type: ignore[arg-type]
        return None

    @property
    def fractal_dimension(self) -> float | None:
        fam = self.family
        if fam is Family.CHAIN:
            return 1.0
        if fam is Family.TORUS:
            return float(self.d)  # type: ignore[arg-type]
        if fam in (Family.DSG, Family.TFRACTAL):
            return log(3.0) / log(2.0)
        if fam is Family.PRODUCT:
            dims = [f.fractal_dimension for f in self.factors]  # type: ignore[union-attr]
            if any(v is None for v in dims):
                return None
            return float(sum(dims))  # type: ignore[arg-type]
        return None

    @property
    def label(self) -> str:
        """Short filesystem-safe identifier, e.g. ``dsg_g4`` or
        ``torus_d2_L8``."""
        fam = self.family
        if fam is Family.COMPLETE:
            return f"complete_n{self.n}"
        if fam is Family.CHAIN:
            suffix = "" if self.periodic else "_open"
            return f"chain_L{self.L}{suffix}"
        if fam is Family.TORUS:
            suffix = "" if self.periodic else "_open"
            return f"torus_d{self.d}_L{self.L}{suffix}"
        if fam in _GENERATIONAL:
            return f"{fam.value}_g{self.g}"
        a, b = self.factors  # type: ignore[misc]
        return f"product__{a.label}__{b.label}"

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        out: dict = {"family": self.family.value}
        if self.family is Family.COMPLETE:
            out["n"] = self.n
        elif self.family is Family.CHAIN:
            out["L"] = self.L
            out["periodic"] = self.periodic
        elif self.family is Family.TORUS:
            out["L"] = self.L
            out["d"] = self.d
            out["periodic"] = self.periodic
        elif self.family in _GENERATIONAL:
            out["g"] = self.g
        else:
            out["factors"] = [f.to_dict() for f in self.factors]  # type: ignore[union-attr]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "GraphSpec":
        if not isinstance(data, dict):
            raise ConfigError("graph spec must be a JSON object")
        allowed = {"family", "n", "g", "L", "d", "periodic", "factors"}
        unknown = set(data) - allowed
        if unknown:
            raise ConfigError(f"unknown graph spec keys: {sorted(unknown)}")
        if "family" not in data:
            raise ConfigError("graph spec needs a 'family' key")
        kwargs = dict(data)
        factors = kwargs.pop("factors", None)
        if factors is not None:
            if not isinstance(factors, (list, tuple)):
                raise ConfigError("'factors' must be an array")
            kwargs["factors"] = tuple(cls.from_dict(f) for f in factors)
        return cls(**kwargs)

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_json(cls, text: str) -> "GraphSpec":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid graph spec JSON: {exc}") from exc
        return cls.from_dict(data)

    def build(self) -> "Graph":
        return build(self)


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable simple undirected graph stored as a CSR adjacency matrix."""

    n: int
    adjacency: sp.csr_matrix

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        """Build and validate a graph from an iterable of (u, v) pairs.

        Rejects self-loops, duplicate edges, out-of-range endpoints, and
        disconnected results: every produced graph is safe to hand to the
        spectral machinery without re-checking.
        """
        if n < 1:
            raise ConfigError("graph needs at least one node")
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                         dtype=np.int64)
        if arr.size == 0:
            arr = arr.reshape(0, 2)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ConfigError("edges must be (u, v) pairs")
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise ConfigError("edge endpoint out of range")
        if np.any(arr[:, 0] == arr[:, 1]):
            raise ConfigError("self-loops are not allowed")
        lo = np.minimum(arr[:, 0], arr[:, 1])
        hi = np.maximum(arr[:, 0], arr[:, 1])
        order = np.lexsort((hi, lo))
        lo, hi = lo[order], hi[order]
        if lo.size > 1 and np.any((lo[1:] == lo[:-1]) & (hi[1:] == hi[:-1])):
            raise ConfigError("duplicate edges are not allowed")
        rows = np.concatenate([lo, hi])
        cols = np.concatenate([hi, lo])
        data = np.ones(rows.size, dtype=np.float64)
        adj = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
        ncomp = csgraph.connected_components(adj, directed=False, return_labels=False)
        if ncomp != 1:
            raise ConfigError(f"graph is disconnected ({ncomp} components)")
        return cls(n=n, adjacency=adj)

    # -- structure ----------------------------------------------------------

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.adjacency.indptr).astype(np.int64)

    @property
    def edge_count(self) -> int:
        return int(self.adjacency.nnz // 2)

    def edge_array(self) -> np.ndarray:
        """Edges as an (E, 2) int array with u < v, sorted lexicographically."""
        coo = sp.triu(self.adjacency, k=1).tocoo()
        pairs = np.column_stack([coo.row, coo.col]).astype(np.int64)
        order = np.lexsort((pairs[:, 1], pairs[:, 0]))
        return pairs[order]

    def neighbors(self, node: NodeId) -> np.ndarray:
        a = self.adjacency
        return a.indices[a.indptr[node]:a.indptr[node + 1]].astype(np.int64)

    def bfs_distances(self, source: NodeId) -> np.ndarray:
        dist = csgraph.shortest_path(self.adjacency, method="BF", unweighted=True,
                                     indices=source)
        return dist.astype(np.int64)

    # -- operators ----------------------------------------------------------

    def laplacian(self) -> np.ndarray:
        """Dense combinatorial Laplacian L = Z - A (float64)."""
        dense = self.adjacency.toarray()
        lap = -dense
        np.fill_diagonal(lap, self.degrees.astype(np.float64))
        return lap

    def laplacian_sparse(self) -> sp.csr_matrix:
        return (sp.diags(self.degrees.astype(np.float64)) - self.adjacency).tocsr()

    # -- export -------------------------------------------------------------

    def to_edge_list(self) -> str:
        """Plain text export: a ``# N=<n>`` header then one ``u v`` line per
        edge with u < v, sorted."""
        lines = [f"# N={self.n}"]
        lines.extend(f"{u} {v}" for u, v in self.edge_array())
        return "\n".join(lines) + "\n"

    @classmethod
    def from_edge_list(cls, text: str) -> "Graph":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("# N="):
            raise ConfigError("edge list must start with a '# N=<n>' header")
        try:
            n = int(lines[0][4:])
        except ValueError as exc:
            raise ConfigError("invalid node count in edge list header") from exc
        edges = []
        for ln in lines[1:]:
            parts = ln.split()
            if len(parts) != 2:
                raise ConfigError(f"malformed edge line: {ln!r}")
            edges.append((int(parts[0]), int(parts[1])))
        return cls.from_edges(n, edges)


# -- builders ----------------------------------------------------------------


def _complete_edges(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def _lattice_edges(L: int, d: int, periodic: bool) -> list[tuple[int, int]]:
    shape = (L,) * d
    idx = np.arange(L**d).reshape(shape)
    pairs: set[tuple[int, int]] = set()
    for axis in range(d):
        nxt = np.roll(idx, -1, axis=axis)
        if periodic:
            a, b = idx.ravel(), nxt.ravel()
        else:
            sl = [slice(None)] * d
            sl[axis] = slice(0, L - 1)
            a, b = idx[tuple(sl)].ravel(), nxt[tuple(sl)].ravel()
        for u, v in zip(a.tolist(), b.tolist()):
            if u != v:
                pairs.add((min(u, v), max(u, v)))
    return sorted(pairs)


def _dsg_edges(g: int) -> tuple[int, list[tuple[int, int]], tuple[int, int, int]]:
    """Corner-glued recursive construction.

    Generation 1 is a triangle.  Each later generation places three copies
    of the previous one at node offsets (0, n, 2n) and joins them with one
    edge between corner nodes of adjacent copies, leaving exactly three
    outer corners of degree 2.
    """
    edges: list[tuple[int, int]] = [(0, 1), (0, 2), (1, 2)]
    corners = (0, 1, 2)
    n = 3
    for _ in range(1, g):
        prev = edges
        c0, c1, c2 = corners
        edges = []
        for copy in range(3):
            off = copy * n
            edges.extend((u + off, v + off) for u, v in prev)
        a_off, b_off, c_off = 0, n, 2 * n
        edges.append((a_off + c1, b_off + c0))
        edges.append((a_off + c2, c_off + c0))
        edges.append((b_off + c2, c_off + c1))
        corners = (a_off + c0, b_off + c1, c_off + c2)
        n *= 3
    return n, edges, corners


def _bfs_renumber(n: int, edges: list[tuple[int, int]], root: int
                  ) -> list[tuple[int, int]]:
    """Relabel nodes in breadth-first order from ``root``; within a shell,
    neighbors are visited in ascending old-index order."""
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    for lst in adj:
        lst.sort()
    new_id = np.full(n, -1, dtype=np.int64)
    new_id[root] = 0
    queue = deque([root])
    count = 1
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if new_id[v] < 0:
                new_id[v] = count
                count += 1
                queue.append(v)
    if count != n:
        raise ConfigError("cannot renumber a disconnected edge set")
    return [(int(new_id[u]), int(new_id[v])) for u, v in edges]


def _tfractal_edges(g: int) -> tuple[int, list[tuple[int, int]]]:
    """Edge-splitting construction, renumbered so the branching center is 0.

    Start from a single edge; at every step replace each edge (u, v) by a
    midpoint path u-m-v and hang a fresh branch node off m.  The midpoint
    of the very first split is the center of the finished tree.
    """
    edges: list[tuple[int, int]] = [(0, 1)]
    n = 2
    center = -1
    for step in range(g):
        grown: list[tuple[int, int]] = []
        for u, v in edges:
            mid, branch = n, n + 1
            n += 2
            grown.extend([(u, mid), (mid, v), (mid, branch)])
            if step == 0:
                center = mid
        edges = grown
    return n, _bfs_renumber(n, edges, center)


def _cayley_tree_edges(g: int) -> tuple[int, list[tuple[int, int]]]:
    edges: list[tuple[int, int]] = []
    frontier = [0]
    next_id = 1
    for shell in range(1, g + 1):
        width = 3 if shell == 1 else 2
        grown: list[int] = []
        for parent in frontier:
            for _ in range(width):
                edges.append((parent, next_id))
                grown.append(next_id)
                next_id += 1
        frontier = grown
    return next_id, edges


def build(spec: GraphSpec) -> Graph:
    """Materialize a spec into a validated :class:`Graph`."""
    fam = spec.family
    if fam is Family.COMPLETE:
        return Graph.from_edges(spec.n, _complete_edges(spec.n))  # type: ignore[arg-type]
    if fam is Family.CHAIN:
        return Graph.from_edges(spec.L, _lattice_edges(spec.L, 1, spec.periodic))  # type: ignore[arg-type]
    if fam is Family.TORUS:
        return Graph.from_edges(spec.L**spec.d,  # type: ignore[operator]
                                _lattice_edges(spec.L, spec.d, spec.periodic))
    if fam is Family.DSG:
        n, edges, _ = _dsg_edges(spec.g)  # type: ignore[arg-type]
        return Graph.from_edges(n, edges)
    if fam is Family.TFRACTAL:
        n, edges = _tfractal_edges(spec.g)  # type: ignore[arg-type]
        return Graph.from_edges(n, edges)
    if fam is Family.CAYLEY_TREE:
        n, edges = _cayley_tree_edges(spec.g)  # type: ignore[arg-type]
        return Graph.from_edges(n, edges)
    a, b = spec.factors  # type: ignore[misc]
    return cartesian_product(build(a), build(b))


def cartesian_product(a: Graph, b: Graph,
                      dense_guard: int = DEFAULT_DENSE_GUARD) -> Graph:
    """Cartesian product with node (i, j) -> i * b.n + j.

    Degrees add across factors and the product Laplacian spectrum is the
    pairwise-sum composition of the factor spectra.  Oversized products are
    built anyway but flagged, since only dense solves are barred at that
    size, not the graph itself.
    """
    n = a.n * b.n
    if n > dense_guard:
        warnings.warn(
            f"product has {n} nodes, above the dense guard {dense_guard}; "
            f"dense eigensolves on it will be refused",
            DenseSizeWarning,
            stacklevel=2,
        )
    ea = a.edge_array()
    eb = b.edge_array()
    j = np.arange(b.n, dtype=np.int64)
    i = np.arange(a.n, dtype=np.int64)
    ua = (ea[:, 0][:, None] * b.n + j[None, :]).ravel()
    va = (ea[:, 1][:, None] * b.n + j[None, :]).ravel()
    ub = (i[:, None] * b.n + eb[:, 0][None, :]).ravel()
    vb = (i[:, None] * b.n + eb[:, 1][None, :]).ravel()
    edges = np.column_stack([np.concatenate([ua, ub]), np.concatenate([va, vb])])
    return Graph.from_edges(n, edges)


# -- target placement ---------------------------------------------------------


def default_target(spec: GraphSpec) -> NodeId:
    """Canonical search target for a family.

    Lattices and complete graphs use node 0 (all nodes equivalent on a
    torus).  Fractal/tree families use a peripheral node: the apex corner
    for dsg, the lowest-index deepest leaf for tfractal, the first leaf of
    the outer shell for cayleytree.  Products pair the first factor's
    target with node 0 of the second factor.
    """
    fam = spec.family
    if fam in (Family.COMPLETE, Family.CHAIN, Family.TORUS):
        return 0
    if fam is Family.DSG:
        # The apex corner persists as node 0 through every generation.
        return 0
    if fam is Family.TFRACTAL:
        graph = build(spec)
        dist = graph.bfs_distances(0)
        deepest = int(dist.max())
        assert deepest == 2 ** (spec.g - 1)  # type: ignore[operator]
        return int(np.nonzero(dist == deepest)[0][0])
    if fam is Family.CAYLEY_TREE:
        graph = build(spec)
        leaves = np.nonzero(graph.degrees == 1)[0]
        return int(leaves[0])
    a, b = spec.factors  # type: ignore[misc]
    return default_target(a) * b.node_count + 0


def near_center_target(spec: GraphSpec) -> NodeId:
    """Alternative central placement for the tree families: the
    lowest-index neighbor of the central node (tfractal) or of the root
    (cayleytree).  Used to compare against peripheral targets."""
    if spec.family in (Family.TFRACTAL, Family.CAYLEY_TREE):
        graph = build(spec)
        return int(graph.neighbors(0).min())
    raise ConfigError(
        f"{spec.family.value}: no distinct central placement is defined"
    )


def product_interior_target(spec: GraphSpec) -> NodeId:
    """Product target on a minimally connected interior site of the first
    factor (its lowest-index degree-3 node) paired with node 0 of the
    second factor.  With a dsg first factor and a d-dimensional periodic
    lattice second factor this site has degree 3 + 2d."""
    if spec.family is not Family.PRODUCT:
        raise ConfigError("interior product targets require a product spec")
    a, b = spec.factors  # type: ignore[misc]
    graph = build(a)
    candidates = np.nonzero(graph.degrees == 3)[0]
    if candidates.size == 0:
        raise ConfigError(
            f"first factor {a.label} has no degree-3 node to place the target on"
        )
    return int(candidates[0]) * b.node_count
