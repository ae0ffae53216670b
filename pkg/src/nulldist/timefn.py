"""Time functions: evaluation, numeric cosmological time, anti-Lipschitz checks.

A TimeFunction is a scalar field with declared claims (generalized,
anti-Lipschitz, proper, cosmological).  Claims are declarations, not
inferences: properness in particular cannot be decided from samples, so it
is carried as metadata and only heuristically spot-checked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import _kernels
from .errors import NoCausalPairs
from .grid import CausalGrid, ReachSense, reach
from .spacetime import Spacetime, as_event


@dataclass(frozen=True)
class TimeClaims:
    generalized: bool = True
    anti_lipschitz: bool = False
    proper: bool = False
    cosmological: bool = False


@dataclass(frozen=True, eq=False)
class TimeFunction:
    """Scalar evaluator with claim flags and the supremum of its range."""

    fn: Callable[[np.ndarray], float]
    claims: TimeClaims
    name: str = "tau"
    range_sup: float = math.inf
    batch: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __call__(self, coords) -> float:
        if hasattr(coords, "coords"):
            coords = coords.coords
        return float(self.fn(np.asarray(coords, dtype=float)))

    def eval(self, p) -> float:
        return self(as_event(p).coords)


def coordinate_time(st: Spacetime) -> TimeFunction:
    """tau(p) = coordinate 0 of p, with claims set per spacetime.

    Coordinate time is the cosmological time of the upper-half, missing-ray
    and warped examples; it is proper only on upper-half-type boxes (the
    missing-ray domain has noncompact level sets near the removed ray).
    """
    claims_by_name = {
        "minkowski": TimeClaims(True, True, False, False),
        "upper_half_minkowski": TimeClaims(True, True, True, True),
        "missing_ray": TimeClaims(True, True, False, True),
        "warped_product": TimeClaims(True, True, True, True),
    }
    if st.name == "conformal":
        factor = st.params.get("factor")
        cosmo = factor == 1.0
        claims = TimeClaims(True, True, False, cosmo)
    else:
        claims = claims_by_name.get(st.name, TimeClaims(True, False, False, False))
    return TimeFunction(
        fn=lambda c: c[0], batch=lambda pts: pts[:, 0].copy(),
        claims=claims, name="t",
    )


def cubed_time(st: Spacetime) -> TimeFunction:
    """tau(p) = t^3; strictly increasing but not anti-Lipschitz across t=0."""
    return TimeFunction(
        fn=lambda c: c[0] ** 3, batch=lambda pts: pts[:, 0] ** 3,
        claims=TimeClaims(generalized=True, anti_lipschitz=False,
                          proper=False, cosmological=False),
        name="t^3",
    )


def affine_time(st: Spacetime, scale: float = 1.0, offset: float = 0.0) -> TimeFunction:
    """tau(p) = scale*t + offset (scale > 0)."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    cosmo = scale == 1.0 and offset == 0.0 and st.name in (
        "upper_half_minkowski", "missing_ray", "warped_product")
    return TimeFunction(
        fn=lambda c: scale * c[0] + offset,
        batch=lambda pts: scale * pts[:, 0] + offset,
        claims=TimeClaims(True, True, False, cosmo),
        name=f"{scale:g}*t+{offset:g}",
    )


# ---------------------------------------------------------------------------
# numeric cosmological time
# ---------------------------------------------------------------------------

def _boundary_base(grid: CausalGrid, node_coords: np.ndarray) -> float:
    """Lorentzian length from the past domain boundary to a source node.

    Bisects the domain predicate down the orientation line below the node;
    if the domain never ends within a generous horizon the box face acts as
    the clamp.  The length integral uses a fixed-step midpoint rule.
    """
    st = grid.st
    lo_t = grid.params.lo()[0]
    extent_t = grid.params.hi()[0] - lo_t
    t_node = node_coords[0]
    t_low = lo_t - 2.0 * max(extent_t, grid.h)

    def inside(t):
        c = node_coords.copy()
        c[0] = t
        return st.domain_contains(c)

    if inside(t_low):
        t_bound = lo_t  # unbounded past within the horizon: clamp at the box
    else:
        a, b = t_low, t_node
        for _ in range(80):
            m = 0.5 * (a + b)
            if inside(m):
                b = m
            else:
                a = m
        t_bound = b
    if t_bound >= t_node:
        return 0.0
    nstep = 64
    ts = np.linspace(t_bound, t_node, nstep + 1)
    mids = 0.5 * (ts[:-1] + ts[1:])
    pts = np.repeat(node_coords[None, :], nstep, axis=0)
    pts[:, 0] = mids
    g = st.metric_batch(pts)
    speed = np.sqrt(np.abs(g[:, 0, 0]))
    return float(np.sum(speed) * (t_node - t_bound) / nstep)


def cosmological_time_numeric(grid: CausalGrid) -> np.ndarray:
    """Longest Lorentzian path to each node over the directed lattice.

    Source nodes (no incoming edge) are seeded with the exact length of the
    vertical segment down to the past domain boundary, which removes the
    O(h) deficit of a bare lattice supremum.  Raises CyclicGraph if an edge
    fails to advance coordinate 0.
    """
    order = grid.topological_order()
    base = np.full(grid.n_nodes, -np.inf)
    sources = np.flatnonzero(grid.in_degrees() == 0)
    for s in sources:
        base[s] = _boundary_base(grid, grid.coords[s].copy())
    indptr, nbr, _ = grid.csr_out()
    # edge traversal needs Lorentzian lengths, not |dtau| weights
    lengths = grid.out_edge_values(grid.edge_len)
    return _kernels.longest_path_values(order, indptr, nbr, lengths, base)


# ---------------------------------------------------------------------------
# anti-Lipschitz and regularity reports
# ---------------------------------------------------------------------------

@dataclass
class AntiLipschitzReport:
    region: tuple
    lambda_best: float
    violations: list
    pairs_tested: int
    worst_pair: Optional[tuple] = None


def check_anti_lipschitz(grid: CausalGrid, tau: TimeFunction, region,
                         n_sources: int = 64, seed: int = 0) -> AntiLipschitzReport:
    """Best constant lambda with tau(q) - tau(q') >= lambda * |q - q'| over
    directed pairs inside ``region``.

    d_U is the coordinate Euclidean distance; the condition only pins lambda
    up to rescaling, so the report carries the best constant rather than a
    boolean.  Every reachable pair from each sampled source is scored, which
    guarantees the extremal (null-chain) pairs are seen.
    """
    region = tuple((float(a), float(b)) for a, b in region)
    lo = np.array([r[0] for r in region])
    hi = np.array([r[1] for r in region])
    inside = np.all((grid.coords >= lo - 1e-12) & (grid.coords <= hi + 1e-12), axis=1)
    candidates = np.flatnonzero(inside)
    if candidates.size == 0:
        raise NoCausalPairs("region contains no grid nodes")
    rng = np.random.default_rng(seed)
    n_pick = min(n_sources, candidates.size)
    sources = candidates[rng.permutation(candidates.size)[:n_pick]]
    tau_vals = _tau_on(grid, tau)

    best = math.inf
    worst_pair = None
    pairs = 0
    violations = []
    for s in sources:
        members = reach(grid, int(s), ReachSense.FUTURE).members & inside
        members[s] = False
        idx = np.flatnonzero(members)
        if idx.size == 0:
            continue
        gaps = tau_vals[idx] - tau_vals[s]
        dists = np.linalg.norm(grid.coords[idx] - grid.coords[s], axis=1)
        ratios = gaps / dists
        pairs += idx.size
        k = int(np.argmin(ratios))
        if ratios[k] < best:
            best = float(ratios[k])
            worst_pair = (grid.coords[s].tolist(), grid.coords[idx[k]].tolist(),
                          float(gaps[k]), float(dists[k]))
        bad = np.flatnonzero(ratios <= 1e-12)
        for b in bad[:16]:
            violations.append((grid.coords[s].tolist(), grid.coords[idx[b]].tolist(),
                               float(gaps[b]), float(dists[b])))
    if pairs == 0:
        raise NoCausalPairs("no directed pairs inside the region at this spacing")
    return AntiLipschitzReport(
        region=region, lambda_best=max(0.0, best),
        violations=violations, pairs_tested=pairs, worst_pair=worst_pair,
    )


@dataclass
class RegularityReport:
    ok: bool
    eps_reg: float
    worst_source_tau: float
    n_sources: int
    all_finite: bool


def check_regularity(grid: CausalGrid, tau: TimeFunction) -> RegularityReport:
    """Numeric surrogate for regularity: tau finite everywhere and close to 0
    at the final node of every maximal past-directed chain.

    Sources of the directed grid (no incoming edge) are exactly those final
    nodes; each must satisfy |tau| <= eps_reg = 2h * max stencil Euclidean
    length, so a box reaching the past domain boundary passes while shifted
    or unbounded time functions fail.
    """
    tau_vals = _tau_on(grid, tau)
    all_finite = bool(np.all(np.isfinite(tau_vals)))
    offs = grid.offsets_used
    max_len = float(np.sqrt((offs.astype(float) ** 2).sum(axis=1).max())) if offs.size else 1.0
    eps_reg = 2.0 * grid.h * max_len
    sources = np.flatnonzero(grid.in_degrees() == 0)
    worst = float(np.abs(tau_vals[sources]).max()) if sources.size else 0.0
    ok = all_finite and worst <= eps_reg
    return RegularityReport(ok=ok, eps_reg=eps_reg, worst_source_tau=worst,
                            n_sources=int(sources.size), all_finite=all_finite)


def _tau_on(grid: CausalGrid, tau: TimeFunction) -> np.ndarray:
    if tau is grid.tau:
        return grid.tau_values
    if tau.batch is not None:
        return np.asarray(tau.batch(grid.coords), dtype=float)
    return np.array([tau(c) for c in grid.coords], dtype=float)
