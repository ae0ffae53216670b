"""Causal lattice graphs: build, reach, and shortest null-weighted paths.

A box of the spacetime is discretized into a uniform lattice.  For every
stencil offset whose displacement is future causal at the segment midpoint a
directed edge is emitted, weighted by the time-function gap |dtau| and by
the Lorentzian segment length.  Undirected Dijkstra over these weights gives
an upper estimate of the null distance; directed closure gives J+/J-.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .errors import (
    CyclicGraph,
    Disconnected,
    EmptyGrid,
    ExcisionSwallowsBox,
    GridTooLarge,
    NodeNotInGrid,
)
from .spacetime import NULL_TOL, Spacetime

MAX_NODES = 20_000_000


@dataclass(frozen=True)
class StencilSpec:
    """Lattice offsets with max-norm <= radius (zero offset excluded).

    ``include_null_exact`` keeps offsets that are exactly null in flat
    coordinates (t-step equals Euclidean space-step, e.g. (1,1,0,0)); setting
    it False filters them out, leaving a strictly timelike candidate set.
    """

    radius: int = 2
    include_null_exact: bool = True

    def __post_init__(self):
        if self.radius < 1:
            raise ValueError("stencil radius must be >= 1")

    def offsets(self, dim: int) -> np.ndarray:
        """Candidate offsets, one representative per +-pair, in lexicographic order."""
        out = []
        for o in itertools.product(range(-self.radius, self.radius + 1), repeat=dim):
            if all(c == 0 for c in o):
                continue
            # keep the lexicographically positive representative of {o, -o}
            lead = next(c for c in o if c != 0)
            if lead < 0:
                continue
            if not self.include_null_exact:
                if o[0] * o[0] == sum(c * c for c in o[1:]):
                    continue
            out.append(o)
        return np.array(sorted(out), dtype=np.int64)

    def max_offset_norm(self) -> float:
        return self.radius  # per-axis bound; Euclidean length adds sqrt(dim)


@dataclass(frozen=True)
class GridParams:
    """Box + resolution + stencil, the reusable discretization recipe."""

    box: tuple  # ((lo0, hi0), (lo1, hi1), ...)
    h: float
    stencil: StencilSpec = field(default_factory=StencilSpec)

    def lo(self) -> np.ndarray:
        return np.array([b[0] for b in self.box], dtype=float)

    def hi(self) -> np.ndarray:
        return np.array([b[1] for b in self.box], dtype=float)


class ReachSense:
    FUTURE = "future"
    PAST = "past"


@dataclass(frozen=True, eq=False)
class ReachSet:
    origin: int
    members: np.ndarray  # boolean mask over grid nodes
    sense: str

    def __contains__(self, node: int) -> bool:
        return bool(self.members[node])

    def count(self) -> int:
        return int(self.members.sum())


class CausalGrid:
    """Immutable lattice with directed future-causal edges.

    Construction is the only mutating phase; afterwards concurrent queries
    are safe (each query owns its scratch arrays inside the kernels).
    """

    def __init__(self, st, tau, params: GridParams, coords, ids_full, shape,
                 edge_u, edge_v, edge_w, edge_len, tau_values, offsets_used):
        self.st = st
        self.tau = tau
        self.params = params
        self.h = params.h
        self.stencil = params.stencil
        self.lo = params.lo()
        self.shape = shape
        self.coords = coords
        self._ids_full = ids_full
        self.edge_u = edge_u
        self.edge_v = edge_v
        self.edge_w = edge_w
        self.edge_len = edge_len
        self.tau_values = tau_values
        self.offsets_used = offsets_used
        self.n_nodes = coords.shape[0]
        self.n_edges = edge_u.shape[0]
        # worst-case factor by which axis-null zigzags overestimate spacelike
        # separation (L1 corner direction)
        self.spacelike_overestimate_max = math.sqrt(max(1, st.dim - 1))
        self._csr_out = None
        self._csr_in = None
        self._csr_undir = None

    # -- CSR caches ---------------------------------------------------------

    @staticmethod
    def _to_csr(n, u, v, w):
        order = np.argsort(u, kind="stable")
        us, vs, ws = u[order], v[order], w[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, us + 1, 1)
        np.cumsum(indptr, out=indptr)
        return (indptr, vs.astype(np.int64), ws), order

    def csr_out(self):
        if self._csr_out is None:
            self._csr_out, self._out_order = self._to_csr(
                self.n_nodes, self.edge_u, self.edge_v, self.edge_w)
        return self._csr_out

    def out_edge_values(self, per_edge: np.ndarray) -> np.ndarray:
        """Reorder a per-edge array to match the csr_out() edge layout."""
        self.csr_out()
        return per_edge[self._out_order]

    def csr_in(self):
        if self._csr_in is None:
            self._csr_in, _ = self._to_csr(self.n_nodes, self.edge_v, self.edge_u, self.edge_w)
        return self._csr_in

    def csr_undirected(self):
        if self._csr_undir is None:
            u = np.concatenate([self.edge_u, self.edge_v])
            v = np.concatenate([self.edge_v, self.edge_u])
            w = np.concatenate([self.edge_w, self.edge_w])
            self._csr_undir, _ = self._to_csr(self.n_nodes, u, v, w)
        return self._csr_undir

    # -- node lookup --------------------------------------------------------

    def node_of(self, coords) -> int:
        c = np.asarray(coords, dtype=float)
        k = np.rint((c - self.lo) / self.h).astype(np.int64)
        if np.any(k < 0) or np.any(k >= self.shape):
            raise NodeNotInGrid(f"{c.tolist()} is outside the grid box")
        snapped = self.lo + k * self.h
        if np.abs(snapped - c).max() > 1e-6 * self.h:
            raise NodeNotInGrid(f"{c.tolist()} does not lie on the lattice")
        node = int(self._ids_full[tuple(k)])
        if node < 0:
            raise NodeNotInGrid(f"lattice point {c.tolist()} was removed from the domain")
        return node

    def node_of_nearest(self, coords) -> int:
        """Snap arbitrary coordinates to the nearest kept lattice node."""
        c = np.asarray(coords, dtype=float)
        k = np.rint((c - self.lo) / self.h).astype(np.int64)
        if np.any(k < 0) or np.any(k >= self.shape):
            raise NodeNotInGrid(f"{c.tolist()} is outside the grid box")
        node = int(self._ids_full[tuple(k)])
        if node < 0:
            raise NodeNotInGrid(f"nearest lattice point to {c.tolist()} was removed")
        return node

    def coords_of(self, node: int) -> np.ndarray:
        return self.coords[node]

    def topological_order(self) -> np.ndarray:
        t = self.coords[:, 0]
        if self.n_edges and np.any(t[self.edge_v] <= t[self.edge_u]):
            raise CyclicGraph("a directed edge fails to increase coordinate 0")
        return np.argsort(t, kind="stable")

    def in_degrees(self) -> np.ndarray:
        deg = np.zeros(self.n_nodes, dtype=np.int64)
        if self.n_edges:
            np.add.at(deg, self.edge_v, 1)
        return deg


def build_grid(st: Spacetime, tau, box, h: float,
               stencil: Optional[StencilSpec] = None) -> CausalGrid:
    """Discretize ``box`` of ``st`` with spacing ``h``.

    Nodes within h/2 of an excision are dropped, as are edges whose straight
    segment passes within h/2 of one; causality of each candidate edge is
    decided by the metric at the segment midpoint.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    stencil = stencil or StencilSpec()
    params = GridParams(tuple((float(a), float(b)) for a, b in box), float(h), stencil)
    lo, hi = params.lo(), params.hi()
    dim = st.dim
    if lo.shape[0] != dim:
        raise ValueError(f"box dimension {lo.shape[0]} != spacetime dimension {dim}")
    shape = np.floor((hi - lo) / h + 1e-9).astype(np.int64) + 1
    total = int(np.prod(shape))
    if total > MAX_NODES:
        raise GridTooLarge(f"lattice would hold {total} nodes (limit {MAX_NODES})")
    if total == 0:
        raise EmptyGrid("box has no lattice points at this spacing")

    grids = np.meshgrid(*[lo[a] + h * np.arange(shape[a]) for a in range(dim)],
                        indexing="ij")
    coords_full = np.stack([g.ravel() for g in grids], axis=1)
    keep = st.domain_batch(coords_full)
    n_domain = int(keep.sum())
    if n_domain == 0:
        raise EmptyGrid("no lattice point satisfies the domain predicate")
    for exc in st.excisions:
        keep &= exc.distance(coords_full) >= 0.5 * h
    if not np.any(keep):
        raise ExcisionSwallowsBox("thickened excisions removed every node")

    ids_full = np.full(total, -1, dtype=np.int64)
    ids_full[keep] = np.arange(int(keep.sum()))
    ids_full = ids_full.reshape(tuple(shape))
    coords = coords_full[keep]
    tau_values = _tau_batch(tau, coords)

    offsets = stencil.offsets(dim)
    eu, ev, ew, el = [], [], [], []
    for o in offsets:
        src_sl = tuple(slice(max(0, -int(o[a])), shape[a] - max(0, int(o[a])))
                       for a in range(dim))
        dst_sl = tuple(slice(max(0, int(o[a])), shape[a] - max(0, -int(o[a])))
                       for a in range(dim))
        a_ids = ids_full[src_sl].ravel()
        b_ids = ids_full[dst_sl].ravel()
        mask = (a_ids >= 0) & (b_ids >= 0)
        if not np.any(mask):
            continue
        a_ids = a_ids[mask]
        b_ids = b_ids[mask]
        delta = o.astype(float) * h
        mid = coords[a_ids] + 0.5 * delta
        g = st.metric_batch(mid)
        q = np.einsum("mij,i,j->m", g, delta, delta)
        scale = np.abs(g).reshape(g.shape[0], -1).max(axis=1)
        causal = q <= NULL_TOL * scale * float(delta @ delta)
        if not np.any(causal):
            continue
        a_ids, b_ids = a_ids[causal], b_ids[causal]
        g = g[causal]
        q = q[causal]
        mid = mid[causal]
        tvec = st.orientation_batch(mid)
        s = np.einsum("mij,mi,j->m", g, tvec, delta)
        # orient each edge so its displacement is future causal
        u = np.where(s < 0, a_ids, b_ids)
        v = np.where(s < 0, b_ids, a_ids)
        if st.excisions:
            ca, cb = coords[a_ids], coords[b_ids]
            clear = np.ones(a_ids.shape[0], dtype=bool)
            for exc in st.excisions:
                clear &= exc.segment_distance(ca, cb) >= 0.5 * h
            if not np.any(clear):
                continue
            u, v, q = u[clear], v[clear], q[clear]
        eu.append(u)
        ev.append(v)
        ew.append(np.abs(tau_values[v] - tau_values[u]))
        el.append(np.sqrt(np.abs(q)))

    if eu:
        edge_u = np.concatenate(eu)
        edge_v = np.concatenate(ev)
        edge_w = np.concatenate(ew)
        edge_len = np.concatenate(el)
    else:
        edge_u = np.empty(0, dtype=np.int64)
        edge_v = np.empty(0, dtype=np.int64)
        edge_w = np.empty(0, dtype=float)
        edge_len = np.empty(0, dtype=float)

    return CausalGrid(st, tau, params, coords, ids_full, shape,
                      edge_u, edge_v, edge_w, edge_len, tau_values, offsets)


def _tau_batch(tau, coords: np.ndarray) -> np.ndarray:
    batch = getattr(tau, "batch", None)
    if batch is not None:
        return np.asarray(batch(coords), dtype=float)
    return np.array([tau(c) for c in coords], dtype=float)


def reach(grid: CausalGrid, node: int, sense: str = ReachSense.FUTURE) -> ReachSet:
    """Directed causal closure J+(node) (or J- for sense='past')."""
    if not 0 <= node < grid.n_nodes:
        raise NodeNotInGrid(f"node {node} not in grid")
    if sense == ReachSense.FUTURE:
        indptr, nbr, _ = grid.csr_out()
    elif sense == ReachSense.PAST:
        indptr, nbr, _ = grid.csr_in()
    else:
        raise ValueError(f"unknown sense {sense!r}")
    members = _kernels.bfs_reach(indptr, nbr, node)
    return ReachSet(origin=node, members=members, sense=sense)


def shortest_null_path(grid: CausalGrid, p_node: int, q_node: int):
    """Dijkstra over the undirected |dtau|-weighted support graph.

    Returns (estimate, path) where path is the node-id witness chain from
    p to q.  The estimate always dominates |tau(q) - tau(p)| and upper-bounds
    the continuum null distance up to discretization error.
    """
    for node in (p_node, q_node):
        if not 0 <= node < grid.n_nodes:
            raise NodeNotInGrid(f"node {node} not in grid")
    if p_node == q_node:
        return 0.0, [p_node]
    # canonical source: makes estimate(p,q) == estimate(q,p) bit-exact
    src, tgt = (p_node, q_node) if p_node < q_node else (q_node, p_node)
    indptr, nbr, wt = grid.csr_undirected()
    dist, pred = _kernels.dijkstra(indptr, nbr, wt, src, tgt)
    if not np.isfinite(dist[tgt]):
        raise Disconnected(f"nodes {p_node} and {q_node} are not connected")
    path = [tgt]
    while path[-1] != src:
        path.append(int(pred[path[-1]]))
    path.reverse()
    if src != p_node:
        path.reverse()
    return float(dist[tgt]), path


def null_distances_from(grid: CausalGrid, node: int) -> np.ndarray:
    """Single-source variant of shortest_null_path (full sweep)."""
    indptr, nbr, wt = grid.csr_undirected()
    dist, _ = _kernels.dijkstra(indptr, nbr, wt, node, -1)
    return dist


def refine_schedule(st: Spacetime, tau, p, q, h_list: Sequence[float], box,
                    stencil: Optional[StencilSpec] = None) -> dict:
    """Null-distance estimates across a decreasing spacing schedule.

    Reports the per-h estimates, whether they decrease monotonically, and a
    linear-in-h Richardson extrapolation from the finest two levels.
    """
    h_list = list(h_list)
    if any(b >= a for a, b in zip(h_list, h_list[1:])):
        raise ValueError("h_list must be strictly decreasing")
    estimates = []
    for h in h_list:
        grid = build_grid(st, tau, box, h, stencil)
        est, _ = shortest_null_path(grid, grid.node_of(p), grid.node_of(q))
        estimates.append(est)
    extrapolated = estimates[-1]
    if len(h_list) >= 2 and h_list[-2] != h_list[-1]:
        h0, h1 = h_list[-2], h_list[-1]
        e0, e1 = estimates[-2], estimates[-1]
        extrapolated = (e1 * h0 - e0 * h1) / (h0 - h1)
    mono = all(b <= a + 1e-12 for a, b in zip(estimates, estimates[1:]))
    return {
        "h": h_list,
        "estimates": estimates,
        "monotone_nonincreasing": mono,
        "extrapolated": extrapolated,
    }
