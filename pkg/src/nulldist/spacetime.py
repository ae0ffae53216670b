"""Analytic spacetimes: metric evaluation, causal classification, built-in examples.

Conventions (fixed once for the whole package):

* metric signature is (-, +, ..., +) and the speed of light is 1;
* a vector v is *causal* iff g(v, v) <= 0, timelike iff strictly negative;
* coordinate 0 is the time coordinate of every built-in chart and the
  future orientation field is the coordinate vector d/dx0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .errors import (
    NonPositiveConformalFactor,
    NotCausal,
    OutOfDomain,
    UnknownName,
    ZeroVector,
)

NULL_TOL = 1e-9  # relative tolerance for the null classification band


# ---------------------------------------------------------------------------
# basic value types
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Event:
    """A point of the spacetime in chart coordinates."""

    coords: np.ndarray
    chart_id: int = 0

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        if c.ndim != 1 or not np.all(np.isfinite(c)):
            raise ValueError("event coordinates must be a finite 1-d vector")
        object.__setattr__(self, "coords", c)

    @property
    def dim(self) -> int:
        return self.coords.shape[0]


def as_event(p, chart_id: int = 0) -> Event:
    return p if isinstance(p, Event) else Event(np.asarray(p, dtype=float), chart_id)


@dataclass(frozen=True, eq=False)
class TangentVector:
    """A vector attached to a base event."""

    base: Event
    components: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.components, dtype=float)
        if v.shape != self.base.coords.shape:
            raise ValueError("tangent components must match the base dimension")
        object.__setattr__(self, "components", v)


@dataclass(frozen=True, eq=False)
class MetricForm:
    """Symmetric bilinear form: Lorentzian (-, +, ..., +) for spacetime
    metrics (see signature_ok), positive-definite for derived Riemannian
    ones."""

    entries: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.entries, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError("metric entries must be square")
        scale = max(1.0, float(np.abs(g).max()))
        if np.abs(g - g.T).max() > 1e-12 * scale:
            raise ValueError("metric entries must be symmetric within 1e-12")
        object.__setattr__(self, "entries", g)

    def signature_ok(self) -> bool:
        ev = np.linalg.eigvalsh(self.entries)
        return ev[0] < 0 and np.all(ev[1:] > 0)

    def apply(self, u, v) -> float:
        uu = u.components if isinstance(u, TangentVector) else np.asarray(u, float)
        vv = v.components if isinstance(v, TangentVector) else np.asarray(v, float)
        return float(uu @ self.entries @ vv)


class CausalKind(Enum):
    TIMELIKE = "timelike"
    NULL = "null"
    SPACELIKE = "spacelike"


class TimeSense(Enum):
    FUTURE = "future"
    PAST = "past"
    NONE = "none"


@dataclass(frozen=True)
class CausalCharacter:
    kind: CausalKind
    time_sense: TimeSense


# ---------------------------------------------------------------------------
# excision primitives
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class HalfLine:
    """The ray {origin + s * direction : s >= 0}, removed from the domain."""

    origin: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        o = np.asarray(self.origin, dtype=float)
        d = np.asarray(self.direction, dtype=float)
        d = d / np.linalg.norm(d)
        object.__setattr__(self, "origin", o)
        object.__setattr__(self, "direction", d)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        """Exact membership test for an (m, d) batch of points."""
        rel = pts - self.origin
        s = rel @ self.direction
        perp = rel - np.outer(s, self.direction)
        return (s >= 0.0) & np.all(perp == 0.0, axis=1)

    def distance(self, pts: np.ndarray) -> np.ndarray:
        rel = pts - self.origin
        s = np.maximum(rel @ self.direction, 0.0)
        foot = self.origin + s[:, None] * self.direction
        return np.linalg.norm(pts - foot, axis=1)

    def segment_distance(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Minimum distance from segments a->b (row-wise) to the ray.

        Minimizes the convex quadratic |a + s(b-a) - origin - u*dir|^2 over
        s in [0,1], u >= 0 by checking the interior critical point and every
        boundary edge of the feasible set.
        """
        ab = b - a
        ao = a - self.origin
        d = self.direction
        aa = np.einsum("ij,ij->i", ab, ab)
        ad = ab @ d
        # interior stationary point of the 2x2 system
        det = aa - ad * ad
        rhs1 = -np.einsum("ij,ij->i", ao, ab)
        rhs2 = ao @ d
        safe = det > 1e-14 * np.maximum(aa, 1e-300)
        with np.errstate(divide="ignore", invalid="ignore"):
            s_int = np.where(safe, (rhs1 + ad * rhs2) / np.where(safe, det, 1.0), -1.0)
            u_int = rhs2 + ad * np.where(safe, s_int, 0.0)

        def seg_point_dist(pts):
            return self.distance(pts)

        best = np.minimum(seg_point_dist(a), seg_point_dist(b))
        # u = 0 edge: distance from segment to the ray origin
        with np.errstate(divide="ignore", invalid="ignore"):
            s0 = np.clip(np.where(aa > 0, rhs1 / np.where(aa > 0, aa, 1.0), 0.0), 0.0, 1.0)
        p0 = a + s0[:, None] * ab
        best = np.minimum(best, np.linalg.norm(p0 - self.origin, axis=1))
        # interior candidate where feasible
        ok = safe & (s_int >= 0.0) & (s_int <= 1.0) & (u_int >= 0.0)
        if np.any(ok):
            pi = a[ok] + s_int[ok, None] * ab[ok]
            qi = self.origin + u_int[ok, None] * d
            di = np.linalg.norm(pi - qi, axis=1)
            best[ok] = np.minimum(best[ok], di)
        return best


@dataclass(frozen=True, eq=False)
class BallExcision:
    """Closed coordinate ball removed from the domain."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))

    def contains(self, pts: np.ndarray) -> np.ndarray:
        return np.linalg.norm(pts - self.center, axis=1) <= self.radius

    def distance(self, pts: np.ndarray) -> np.ndarray:
        return np.maximum(np.linalg.norm(pts - self.center, axis=1) - self.radius, 0.0)

    def segment_distance(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        ab = b - a
        aa = np.einsum("ij,ij->i", ab, ab)
        t = np.einsum("ij,ij->i", self.center - a, ab)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.clip(np.where(aa > 0, t / np.where(aa > 0, aa, 1.0), 0.0), 0.0, 1.0)
        foot = a + t[:, None] * ab
        return np.maximum(np.linalg.norm(foot - self.center, axis=1) - self.radius, 0.0)


# ---------------------------------------------------------------------------
# the spacetime object
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Spacetime:
    """A region of a Lorentzian manifold given by analytic callables.

    ``metric_batch`` maps an (m, dim) coordinate array to (m, dim, dim)
    metric matrices; ``domain_batch`` to a boolean mask.  Values are
    immutable after construction and safe to share between workers.
    """

    dim: int
    name: str
    metric_batch: Callable[[np.ndarray], np.ndarray]
    domain_batch: Callable[[np.ndarray], np.ndarray]
    excisions: tuple = ()
    params: dict = field(default_factory=dict)
    metric_deriv: Optional[Callable[[np.ndarray], np.ndarray]] = None
    cosmological_time_analytic: Optional[Callable[[np.ndarray], np.ndarray]] = None
    deriv_step: float = 1e-5

    def metric_at(self, coords: np.ndarray) -> np.ndarray:
        return self.metric_batch(np.asarray(coords, float)[None, :])[0]

    def domain_contains(self, coords: np.ndarray) -> bool:
        return bool(self.domain_batch(np.asarray(coords, float)[None, :])[0])

    def orientation_batch(self, coords: np.ndarray) -> np.ndarray:
        """Future timelike field; d/dx0 for every built-in chart."""
        out = np.zeros_like(coords)
        out[:, 0] = 1.0
        return out

    def orientation(self, p) -> TangentVector:
        p = as_event(p)
        return TangentVector(p, self.orientation_batch(p.coords[None, :])[0])

    def metric_derivatives(self, coords: np.ndarray) -> np.ndarray:
        """d g_{ij} / d x^a as an array indexed [a, i, j].

        Central finite differences unless the spacetime ships a closed form.
        """
        if self.metric_deriv is not None:
            return self.metric_deriv(np.asarray(coords, float))
        c = np.asarray(coords, float)
        h = self.deriv_step * max(1.0, float(np.abs(c).max()))
        pts = np.repeat(c[None, :], 2 * self.dim, axis=0)
        for a in range(self.dim):
            pts[2 * a, a] += h
            pts[2 * a + 1, a] -= h
        g = self.metric_batch(pts)
        return (g[0::2] - g[1::2]) / (2.0 * h)


def metric_eval(st: Spacetime, p) -> MetricForm:
    """Metric at an event; raises OutOfDomain off the region or in an excision."""
    p = as_event(p)
    if p.dim != st.dim:
        raise ValueError(f"event dimension {p.dim} != spacetime dimension {st.dim}")
    if not st.domain_contains(p.coords):
        raise OutOfDomain(f"event {p.coords.tolist()} is outside {st.name}")
    return MetricForm(st.metric_at(p.coords))


def causal_character(g_p: MetricForm, T_p: TangentVector, v: TangentVector,
                     tol: float = NULL_TOL) -> CausalCharacter:
    """Classify v against the cone of g_p, time-oriented by T_p.

    The null band is relative: |g(v,v)| <= tol * scale(g) * |v|^2 with scale
    the largest metric entry, so classification is exactly conformally
    invariant.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    vv = np.asarray(v.components, float)
    if np.all(np.abs(vv) < tol):
        raise ZeroVector("all components below tolerance")
    g = g_p.entries
    scale = float(np.abs(g).max())
    q = float(vv @ g @ vv)
    band = tol * scale * float(vv @ vv)
    if abs(q) <= band:
        kind = CausalKind.NULL
    elif q < 0:
        kind = CausalKind.TIMELIKE
    else:
        return CausalCharacter(CausalKind.SPACELIKE, TimeSense.NONE)
    s = float(np.asarray(T_p.components, float) @ g @ vv)
    sense = TimeSense.FUTURE if s < 0 else (TimeSense.PAST if s > 0 else TimeSense.NONE)
    return CausalCharacter(kind, sense)


def reverse_cs_gap(g_p: MetricForm, u: TangentVector, v: TangentVector,
                   tol: float = NULL_TOL) -> float:
    """|g(u,v)| - |u|_g |v|_g, nonnegative (up to tol) for causal pairs."""
    g = g_p.entries
    scale = float(np.abs(g).max())
    for w in (u, v):
        ww = np.asarray(w.components, float)
        q = float(ww @ g @ ww)
        if q > tol * scale * float(ww @ ww):
            raise NotCausal("reverse Cauchy-Schwarz needs causal vectors")
    uu = np.asarray(u.components, float)
    vv = np.asarray(v.components, float)
    nu = math.sqrt(abs(float(uu @ g @ uu)))
    nv = math.sqrt(abs(float(vv @ g @ vv)))
    return abs(float(uu @ g @ vv)) - nu * nv


# ---------------------------------------------------------------------------
# built-in spacetimes
# ---------------------------------------------------------------------------

def _flat_metric_batch(dim):
    eta = np.eye(dim)
    eta[0, 0] = -1.0

    def batch(pts):
        return np.broadcast_to(eta, (pts.shape[0], dim, dim)).copy()

    return batch


def _zeros_deriv(dim):
    def deriv(coords):
        return np.zeros((dim, dim, dim))

    return deriv


def _all_domain(pts):
    return np.ones(pts.shape[0], dtype=bool)


def _make_minkowski(dim):
    return Spacetime(
        dim=dim, name="minkowski",
        metric_batch=_flat_metric_batch(dim),
        domain_batch=_all_domain,
        metric_deriv=_zeros_deriv(dim),
        params={"dim": dim},
    )


def _make_upper_half(dim):
    def domain(pts):
        return pts[:, 0] > 0.0

    return Spacetime(
        dim=dim, name="upper_half_minkowski",
        metric_batch=_flat_metric_batch(dim),
        domain_batch=domain,
        metric_deriv=_zeros_deriv(dim),
        cosmological_time_analytic=lambda pts: pts[:, 0].copy(),
        params={"dim": dim},
    )


def _make_missing_ray(dim):
    origin = np.zeros(dim)
    origin[0] = 2.0
    direction = np.zeros(dim)
    direction[0] = 1.0
    ray = HalfLine(origin, direction)

    def domain(pts):
        return (pts[:, 0] > 0.0) & ~ray.contains(pts)

    return Spacetime(
        dim=dim, name="missing_ray",
        metric_batch=_flat_metric_batch(dim),
        domain_batch=domain,
        excisions=(ray,),
        metric_deriv=_zeros_deriv(dim),
        cosmological_time_analytic=lambda pts: pts[:, 0].copy(),
        params={"dim": dim},
    )


def _make_warped(dim, slope, offset):
    # metric -dt^2 + f(t)^2 (dx^2 + ...) with f(t) = slope*t + offset
    def f(t):
        return slope * t + offset

    def metric(pts):
        m = pts.shape[0]
        g = np.zeros((m, dim, dim))
        g[:, 0, 0] = -1.0
        f2 = f(pts[:, 0]) ** 2
        for i in range(1, dim):
            g[:, i, i] = f2
        return g

    def deriv(coords):
        out = np.zeros((dim, dim, dim))
        df2 = 2.0 * f(coords[0]) * slope
        for i in range(1, dim):
            out[0, i, i] = df2
        return out

    def domain(pts):
        return f(pts[:, 0]) > 0.0

    analytic = (lambda pts: pts[:, 0].copy()) if (slope == 1.0 and offset == 0.0) else None
    return Spacetime(
        dim=dim, name="warped_product",
        metric_batch=metric, domain_batch=domain, metric_deriv=deriv,
        cosmological_time_analytic=analytic,
        params={"dim": dim, "slope": slope, "offset": offset},
    )


def _make_conformal(base: Spacetime, factor):
    if callable(factor):
        phi = factor
        const = None
    else:
        const = float(factor)
        if const <= 0.0:
            raise NonPositiveConformalFactor(f"factor must be > 0, got {const}")
        phi = lambda pts: np.full(pts.shape[0], const)

    def metric(pts):
        g = base.metric_batch(pts)
        return g * (phi(pts) ** 2)[:, None, None]

    deriv = None
    if const is not None and base.metric_deriv is not None:
        base_deriv = base.metric_deriv
        deriv = lambda coords: const * const * base_deriv(coords)

    analytic = None
    if const is not None and base.cosmological_time_analytic is not None:
        base_tau = base.cosmological_time_analytic
        analytic = lambda pts: const * base_tau(pts)

    return Spacetime(
        dim=base.dim, name="conformal",
        metric_batch=metric, domain_batch=base.domain_batch,
        excisions=base.excisions, metric_deriv=deriv,
        cosmological_time_analytic=analytic,
        params={"base": base.params | {"name": base.name},
                "factor": const if const is not None else "callable"},
    )


def builtin(name: str, **params) -> Spacetime:
    """Construct a built-in spacetime by name.

    Names: minkowski, upper_half_minkowski, missing_ray, warped_product
    (f(t) = slope*t + offset), conformal (base= spacetime or name, factor=
    positive constant or callable on coordinate batches).
    """
    dim = int(params.pop("dim", 4))
    if name == "minkowski":
        return _make_minkowski(dim)
    if name == "upper_half_minkowski":
        return _make_upper_half(dim)
    if name == "missing_ray":
        return _make_missing_ray(dim)
    if name == "warped_product":
        slope = float(params.pop("slope", 1.0))
        offset = float(params.pop("offset", 0.0))
        return _make_warped(dim, slope, offset)
    if name == "conformal":
        base = params.pop("base")
        if isinstance(base, str):
            base = builtin(base, dim=dim)
        elif isinstance(base, dict):
            base = builtin(base.pop("name"), **base)
        return _make_conformal(base, params.pop("factor"))
    raise UnknownName(f"unknown spacetime {name!r}")
