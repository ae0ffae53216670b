"""Null coordinate charts by geodesic shooting.

A chart is anchored to a unit-speed timelike geodesic with a parallel
orthonormal frame; events are reached by null geodesics fired from the axis.
The chart time of an event is the optical function omega, whose level sets
are null cones; its gradient in the derived Riemannian metric g_R is bounded
below 2, which is what makes omega a usable causal indicator.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .errors import (
    LeftDomain,
    NoConvergence,
    NullDistError,
    OnAxisDegenerate,
    StepTooLarge,
)
from .grid import CausalGrid, reach
from .spacetime import MetricForm, Spacetime, TimeSense, as_event

NULL_DRIFT_TOL = 1e-6  # relative bound on |g(u,u)| along null shots


def christoffels(st: Spacetime, coords: np.ndarray) -> np.ndarray:
    """Connection coefficients Gamma^k_{ij} from metric derivatives."""
    g = st.metric_at(coords)
    dg = st.metric_derivatives(coords)
    ginv = np.linalg.inv(g)
    # dg_sym[l,i,j] = d_i g_{lj} + d_j g_{li} - d_l g_{ij}
    dg_sym = np.einsum("ilj->lij", dg) + np.einsum("jli->lij", dg) - dg
    return 0.5 * np.einsum("kl,lij->kij", ginv, dg_sym)


def _geodesic_rhs(st: Spacetime, x: np.ndarray, u: np.ndarray):
    gamma = christoffels(st, x)
    return u, -np.einsum("kij,i,j->k", gamma, u, u)


def _rk4_step(st: Spacetime, x, u, dt):
    k1x, k1u = _geodesic_rhs(st, x, u)
    k2x, k2u = _geodesic_rhs(st, x + 0.5 * dt * k1x, u + 0.5 * dt * k1u)
    k3x, k3u = _geodesic_rhs(st, x + 0.5 * dt * k2x, u + 0.5 * dt * k2u)
    k4x, k4u = _geodesic_rhs(st, x + dt * k3x, u + dt * k3u)
    nx = x + dt / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x)
    nu = u + dt / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u)
    return nx, nu


def _shoot_state(st: Spacetime, x0: np.ndarray, u0: np.ndarray, s: float,
                 step: float, monitor_null: bool):
    """Integrate the geodesic equation; returns final (x, u)."""
    if step <= 0:
        raise ValueError("step must be positive")
    n = max(1, int(math.ceil(abs(s) / step)))
    dt = s / n
    x, u = x0.astype(float).copy(), u0.astype(float).copy()
    for i in range(n):
        x, u = _rk4_step(st, x, u, dt)
        if not st.domain_contains(x):
            raise LeftDomain((i + 1) * dt)
        if monitor_null:
            g = st.metric_at(x)
            q = abs(float(u @ g @ u))
            if q > NULL_DRIFT_TOL * float(u @ u):
                raise StepTooLarge(
                    f"null constraint drift {q:.2e} after step {i + 1}; reduce step")
    return x, u


def geodesic_shoot(st: Spacetime, p, v, s: float, step: float = 0.05):
    """Exponential-map point exp_p(s*v) by fourth-order Runge-Kutta.

    Null initial data is detected automatically and the |g(u,u)| constraint
    is monitored along the trajectory.
    """
    p = as_event(p)
    vv = np.asarray(v.components if hasattr(v, "components") else v, dtype=float)
    g = st.metric_at(p.coords)
    q0 = abs(float(vv @ g @ vv))
    monitor = q0 <= NULL_DRIFT_TOL * float(vv @ vv)
    x, _ = _shoot_state(st, p.coords, vv, s, step, monitor)
    return as_event(x)


# ---------------------------------------------------------------------------
# chart construction
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class OpticalValue:
    """Chart time (omega), radial coordinate, and the unit radial direction,
    which is undefined on the axis."""

    omega: float
    lam: float
    direction: Optional[np.ndarray]
    residual: float = 0.0


class NullChart:
    """Null coordinate chart along a timelike geodesic through p.

    Axis states are stored densely and interpolated with cubic Hermite, so
    flat charts are exact; the frame is parallel-transported alongside the
    axis integration and its orthonormality drift is recorded.
    """

    def __init__(self, st, center, sense, eps, e0, frame0, ts, pos, vel,
                 frame, frame_dot, shoot_step):
        self.st = st
        self.center = center
        self.sense = sense
        self.eps = eps
        self.e0 = e0
        self.frame0 = frame0
        self.ts = ts
        self.pos = pos
        self.vel = vel
        self.frame = frame
        self.frame_dot = frame_dot
        self.shoot_step = shoot_step
        self.n_space = frame0.shape[0]
        self.speed_drift = 0.0
        self.frame_drift = 0.0
        self.domain_radius = eps

    def state(self, t: float):
        """(position, velocity, frame) on the axis at parameter t."""
        ts = self.ts
        if t <= ts[0]:
            return self.pos[0], self.vel[0], self.frame[0]
        if t >= ts[-1]:
            return self.pos[-1], self.vel[-1], self.frame[-1]
        j = int(np.searchsorted(ts, t, side="right") - 1)
        j = min(j, ts.shape[0] - 2)
        h = ts[j + 1] - ts[j]
        s = (t - ts[j]) / h
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        # velocity doubles as the position derivative; frame_dot as the frame's
        pos = (h00 * self.pos[j] + h10 * h * self.vel[j]
               + h01 * self.pos[j + 1] + h11 * h * self.vel[j + 1])
        vel = self.vel[j] + s * (self.vel[j + 1] - self.vel[j])
        frame = (h00 * self.frame[j] + h10 * h * self.frame_dot[j]
                 + h01 * self.frame[j + 1] + h11 * h * self.frame_dot[j + 1])
        return pos, vel, frame


def _gram_schmidt_frame(st: Spacetime, p: np.ndarray, e0: np.ndarray) -> np.ndarray:
    g = st.metric_at(p)
    dim = st.dim
    frame = []
    for axis in range(dim):
        w = np.zeros(dim)
        w[axis] = 1.0
        w = w - (float(w @ g @ e0) / float(e0 @ g @ e0)) * e0
        for e in frame:
            w = w - float(w @ g @ e) * e
        norm2 = float(w @ g @ w)
        if norm2 < 1e-12:
            continue
        frame.append(w / math.sqrt(norm2))
        if len(frame) == dim - 1:
            break
    if len(frame) != dim - 1:
        raise NullDistError("could not build a spacelike frame at the chart center")
    return np.array(frame)


def build_chart(st: Spacetime, p, sense=TimeSense.FUTURE, eps: float = 0.2,
                n_frame: Optional[int] = None, n_steps: int = 128,
                shoot_step: float = 0.25, probe: bool = True) -> NullChart:
    """Integrate the chart axis and its parallel frame through p.

    For sense=Past the axis runs along the past-directed unit velocity, so
    chart time increases toward the past.  ``domain_radius`` is set to the
    largest probed radius at which forward/inverse round trips succeed.
    """
    p = as_event(p)
    coords = p.coords
    if not st.domain_contains(coords):
        raise LeftDomain(0.0)
    g = st.metric_at(coords)
    T = st.orientation_batch(coords[None, :])[0]
    e0 = T / math.sqrt(abs(float(T @ g @ T)))
    if sense == TimeSense.PAST:
        e0 = -e0
    frame0 = _gram_schmidt_frame(st, coords, e0)
    if n_frame is not None:
        frame0 = frame0[:n_frame]
    n_sp = frame0.shape[0]

    def transport(sign):
        dt = sign * eps / n_steps
        x = coords.copy()
        u = e0.copy()
        E = frame0.copy()
        out = [(0.0, x.copy(), u.copy(), E.copy())]
        for i in range(n_steps):
            # augmented RK4: geodesic + parallel transport of each frame leg
            def rhs(xx, uu, EE):
                gamma = christoffels(st, xx)
                du = -np.einsum("kij,i,j->k", gamma, uu, uu)
                dE = -np.einsum("kij,i,nj->nk", gamma, uu, EE)
                return uu, du, dE

            k1 = rhs(x, u, E)
            k2 = rhs(x + 0.5 * dt * k1[0], u + 0.5 * dt * k1[1], E + 0.5 * dt * k1[2])
            k3 = rhs(x + 0.5 * dt * k2[0], u + 0.5 * dt * k2[1], E + 0.5 * dt * k2[2])
            k4 = rhs(x + dt * k3[0], u + dt * k3[1], E + dt * k3[2])
            x = x + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            u = u + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
            E = E + dt / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
            if not st.domain_contains(x):
                raise LeftDomain((i + 1) * dt)
            out.append(((i + 1) * dt, x.copy(), u.copy(), E.copy()))
        return out

    back = transport(-1.0)
    fwd = transport(1.0)
    samples = list(reversed(back[1:])) + fwd
    ts = np.array([s[0] for s in samples])
    pos = np.array([s[1] for s in samples])
    vel = np.array([s[2] for s in samples])
    frame = np.array([s[3] for s in samples])
    frame_dot = np.empty_like(frame)
    speed_drift = 0.0
    frame_drift = 0.0
    for k in range(ts.shape[0]):
        gamma = christoffels(st, pos[k])
        frame_dot[k] = -np.einsum("kij,i,nj->nk", gamma, vel[k], frame[k])
        gk = st.metric_at(pos[k])
        speed_drift = max(speed_drift, abs(float(vel[k] @ gk @ vel[k]) + 1.0))
        gram = frame[k] @ gk @ frame[k].T
        frame_drift = max(frame_drift, float(np.abs(gram - np.eye(n_sp)).max()),
                          float(np.abs(frame[k] @ gk @ vel[k]).max()))

    chart = NullChart(st, coords, sense, eps, e0, frame0, ts, pos, vel,
                      frame, frame_dot, shoot_step)
    chart.speed_drift = speed_drift
    chart.frame_drift = frame_drift
    if probe:
        chart.domain_radius = _probe_domain_radius(chart)
    return chart


def _probe_domain_radius(chart: NullChart) -> float:
    dim = chart.st.dim
    rng = np.random.default_rng(1234)
    dirs = rng.normal(size=(8, dim))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    for frac in (0.7, 0.5, 0.35, 0.25, 0.15, 0.08):
        r = frac * chart.eps
        ok = True
        for u in dirs:
            q = chart.center + r * u
            if not chart.st.domain_contains(q):
                ok = False
                break
            try:
                val = chart_inverse(chart, q, tol=1e-8, _radius=chart.eps)
            except (NoConvergence, LeftDomain, StepTooLarge):
                ok = False
                break
            if val.residual > 1e-7 * max(1.0, float(np.abs(q).max())):
                ok = False
                break
        if ok:
            return r
    return 0.05 * chart.eps


def chart_forward(chart: NullChart, t: float, x) -> np.ndarray:
    """Event reached by the null geodesic fired from axis time t with
    transverse chart coordinates x."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    pos, vel, frame = chart.state(float(t))
    lam = float(np.linalg.norm(x))
    if lam == 0.0:
        return pos.copy()
    v = x @ frame + lam * vel
    out, _ = _shoot_state(chart.st, pos, v, 1.0, chart.shoot_step, monitor_null=True)
    return out


def _flat_seed(chart: NullChart, q: np.ndarray):
    g = chart.st.metric_at(chart.center)
    delta = q - chart.center
    a0 = -float(delta @ g @ chart.e0)
    a = np.array([float(delta @ g @ e) for e in chart.frame0])
    lam = float(np.linalg.norm(a))
    return a0 - lam, a


def _coarse_seeds(chart: NullChart, radius: float):
    n = chart.n_space
    ts = np.linspace(-0.9 * chart.eps, 0.9 * chart.eps, 8)
    dirs = []
    for axis in range(n):
        for sgn in (1.0, -1.0):
            e = np.zeros(n)
            e[axis] = sgn
            dirs.append(e)
    if n > 1:
        for corner in itertools.product((1.0, -1.0), repeat=n):
            v = np.array(corner)
            dirs.append(v / np.linalg.norm(v))
    lams = np.linspace(0.1 * radius, 0.95 * radius, 8)
    for t in ts:
        for d in dirs:
            for lam in lams:
                yield t, lam * d


def chart_inverse(chart: NullChart, q, tol: float = 1e-10,
                  seed: Optional[tuple] = None, _radius: Optional[float] = None) -> OpticalValue:
    """Damped Newton inversion of chart_forward at the event q.

    The closed-form flat-frame seed is tried first, then a deterministic
    coarse multistart.  On-axis events (radial part below tolerance) return
    omega by projection onto the axis with direction undefined.
    """
    q = as_event(q).coords
    radius = chart.domain_radius if _radius is None else _radius
    scale = max(1.0, float(np.abs(q).max()))
    axis_tol = 1e-7 * max(1.0, chart.eps)

    t0, x0 = _flat_seed(chart, q)
    if seed is None and np.linalg.norm(x0) < axis_tol:
        val = _axis_projection(chart, q, tol)
        if val is not None:
            return val

    candidates = [(t0, np.asarray(x0, dtype=float))]
    if seed is not None:
        candidates.append((float(seed[0]), np.asarray(seed[1], dtype=float)))
        candidates.sort(key=lambda s: float(
            np.linalg.norm(_forward_safe(chart, s[0], s[1]) - q)))
    result = None
    for t_s, x_s in candidates:
        result = _newton(chart, q, t_s, x_s, tol, scale)
        if result is not None:
            break
    if result is None:
        seeds = sorted(
            _coarse_seeds(chart, radius),
            key=lambda s: float(np.linalg.norm(_forward_safe(chart, s[0], s[1]) - q)),
        )
        for t_s, x_s in seeds[:24]:
            result = _newton(chart, q, t_s, x_s, tol, scale)
            if result is not None:
                break
    if result is None:
        raise NoConvergence(f"chart inversion failed at {q.tolist()}")
    t, x, res = result
    lam = float(np.linalg.norm(x))
    if lam < axis_tol:
        return OpticalValue(omega=float(t), lam=lam, direction=None, residual=res)
    return OpticalValue(omega=float(t), lam=lam, direction=x / lam, residual=res)


def _forward_safe(chart, t, x):
    try:
        return chart_forward(chart, t, x)
    except (LeftDomain, StepTooLarge):
        return np.full(chart.st.dim, np.inf)


def _newton(chart, q, t, x, tol, scale, max_iter=60):
    y = np.concatenate([[t], np.atleast_1d(x)])
    dim = chart.st.dim

    def F(yy):
        return _forward_safe(chart, yy[0], yy[1:]) - q

    f = F(y)
    if not np.all(np.isfinite(f)):
        return None
    fn = float(np.linalg.norm(f))
    for _ in range(max_iter):
        if fn <= tol * scale:
            return y[0], y[1:], fn
        J = np.empty((dim, dim))
        hstep = 1e-6 * max(1.0, float(np.abs(y).max()))
        for a in range(dim):
            yp = y.copy()
            ym = y.copy()
            yp[a] += hstep
            ym[a] -= hstep
            fp, fm = F(yp), F(ym)
            if not (np.all(np.isfinite(fp)) and np.all(np.isfinite(fm))):
                return None
            J[:, a] = (fp - fm) / (2 * hstep)
        try:
            step = np.linalg.solve(J, -f)
        except np.linalg.LinAlgError:
            return None
        lam = 1.0
        success = False
        for _ in range(25):
            y_new = y + lam * step
            f_new = F(y_new)
            if np.all(np.isfinite(f_new)):
                fn_new = float(np.linalg.norm(f_new))
                if fn_new < fn * (1 - 1e-4) or fn_new <= tol * scale:
                    y, f, fn = y_new, f_new, fn_new
                    success = True
                    break
            lam *= 0.5
        if not success:
            return None
    if fn <= tol * scale:
        return y[0], y[1:], fn
    return None


def _axis_projection(chart: NullChart, q: np.ndarray, tol: float):
    """Nearest axis point in squared coordinate distance; used for on-axis q."""
    d2 = np.sum((chart.pos - q) ** 2, axis=1)
    j = int(np.argmin(d2))
    a = chart.ts[max(0, j - 1)]
    b = chart.ts[min(chart.ts.shape[0] - 1, j + 1)]
    for _ in range(60):
        m1 = a + (b - a) / 3
        m2 = b - (b - a) / 3
        p1, _, _ = chart.state(m1)
        p2, _, _ = chart.state(m2)
        if float(np.sum((p1 - q) ** 2)) < float(np.sum((p2 - q) ** 2)):
            b = m2
        else:
            a = m1
    t = 0.5 * (a + b)
    pos, _, _ = chart.state(t)
    res = float(np.linalg.norm(pos - q))
    if res <= max(tol, 1e-8) * max(1.0, float(np.abs(q).max())):
        return OpticalValue(omega=float(t), lam=0.0, direction=None, residual=res)
    return None


def omega(chart: NullChart, q) -> float:
    return chart_inverse(chart, q).omega


# ---------------------------------------------------------------------------
# the Riemannian comparison metric and the Lipschitz bound
# ---------------------------------------------------------------------------

def _chart_time_field(chart: NullChart, q: np.ndarray, val: OpticalValue,
                      fd_frac: float = 1e-4) -> np.ndarray:
    """The d/dt coordinate field X at q (axis velocity on the axis)."""
    axis_band = 1e-5 * max(1.0, chart.eps)
    if val.lam <= axis_band:
        _, vel, _ = chart.state(val.omega)
        return vel
    delta = fd_frac * chart.eps
    x = val.lam * val.direction
    fp = chart_forward(chart, val.omega + delta, x)
    fm = chart_forward(chart, val.omega - delta, x)
    return (fp - fm) / (2 * delta)


def g_R_eval(chart: NullChart, q, val: Optional[OpticalValue] = None) -> MetricForm:
    """Riemannian metric 2|g(X,X)|^{-1} g(X,.)g(X,.) + g at q."""
    q = as_event(q).coords
    if val is None:
        val = chart_inverse(chart, q)
    X = _chart_time_field(chart, q, val)
    g = chart.st.metric_at(q)
    gX = g @ X
    qXX = abs(float(X @ gX))
    if qXX < 1e-12:
        raise NullDistError("chart time field degenerated (g(X,X) ~ 0)")
    entries = (2.0 / qXX) * np.outer(gX, gX) + g
    return MetricForm(0.5 * (entries + entries.T))


def grad_norm_omega(chart: NullChart, q, fd_step: Optional[float] = None,
                    strict: bool = True) -> float:
    """|grad omega| in the g_R metric at an off-axis event.

    Computed from central differences of the inverted chart time, with the
    index raised by g_R; the chart construction guarantees the value stays
    below 2 wherever |g(X,X)| > 1/2.
    """
    q = as_event(q).coords
    val = chart_inverse(chart, q)
    axis_band = 1e-5 * max(1.0, chart.eps)
    if val.lam <= axis_band:
        raise OnAxisDegenerate("omega is not differentiable on the chart axis")
    h = fd_step if fd_step is not None else 1e-5 * max(1.0, float(np.abs(q).max()))
    dim = chart.st.dim
    grad = np.empty(dim)
    warm = (val.omega, val.lam * val.direction)
    for a in range(dim):
        qp = q.copy()
        qm = q.copy()
        qp[a] += h
        qm[a] -= h
        wp = chart_inverse(chart, qp, seed=warm).omega
        wm = chart_inverse(chart, qm, seed=warm).omega
        grad[a] = (wp - wm) / (2 * h)
    gR = g_R_eval(chart, q, val).entries
    norm = math.sqrt(float(grad @ np.linalg.solve(gR, grad)))
    if strict and norm >= 2.0:
        raise NullDistError(f"optical gradient bound violated: {norm:.6f} >= 2")
    return norm


def lipschitz_estimate(chart: NullChart, n_pairs: int = 1000, seed: int = 0,
                       lattice_n: int = 7, box_frac: float = 0.9) -> float:
    """Largest observed |d omega| / d_{g_R} over lattice node pairs.

    d_{g_R} is the shortest-path distance on a fine lattice with g_R edge
    lengths; since lattice paths only overestimate the true Riemannian
    distance, the returned ratio is a safe lower envelope of the true
    supremum and must stay below 2.
    """
    dim = chart.st.dim
    half = box_frac * chart.domain_radius / math.sqrt(dim)
    axes = [chart.center[a] + np.linspace(-half, half, lattice_n) for a in range(dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    nodes = np.stack([m.ravel() for m in mesh], axis=1)
    n_nodes = nodes.shape[0]
    omegas = np.empty(n_nodes)
    gr = np.empty((n_nodes, dim, dim))
    warm = None
    for i in range(n_nodes):
        # raster-adjacent nodes are close, so the previous solution seeds well
        try:
            val = chart_inverse(chart, nodes[i], seed=warm)
        except NoConvergence:
            val = chart_inverse(chart, nodes[i])
        omegas[i] = val.omega
        gr[i] = g_R_eval(chart, nodes[i], val).entries
        if val.direction is not None:
            warm = (val.omega, val.lam * val.direction)

    # undirected lattice edges, one per +- offset pair, max-norm radius 1
    shape = (lattice_n,) * dim
    ids = np.arange(n_nodes).reshape(shape)
    us, vs = [], []
    for o in itertools.product((-1, 0, 1), repeat=dim):
        if all(c == 0 for c in o):
            continue
        lead = next(c for c in o if c != 0)
        if lead < 0:
            continue
        src = ids[tuple(slice(max(0, -c), lattice_n - max(0, c)) for c in o)].ravel()
        dst = ids[tuple(slice(max(0, c), lattice_n - max(0, -c)) for c in o)].ravel()
        us.append(src)
        vs.append(dst)
    u = np.concatenate(us)
    v = np.concatenate(vs)
    delta = nodes[v] - nodes[u]
    gmid = 0.5 * (gr[u] + gr[v])
    w = np.sqrt(np.einsum("mi,mij,mj->m", delta, gmid, delta))

    uu = np.concatenate([u, v])
    vv = np.concatenate([v, u])
    ww = np.concatenate([w, w])
    order = np.argsort(uu, kind="stable")
    indptr = np.zeros(n_nodes + 1, dtype=np.int64)
    np.add.at(indptr, uu + 1, 1)
    np.cumsum(indptr, out=indptr)
    nbr = vv[order].astype(np.int64)
    wts = ww[order]

    rng = np.random.default_rng(seed)
    n_sources = max(2, min(n_nodes, int(math.ceil(n_pairs / max(1, n_nodes - 1)))))
    sources = list(rng.permutation(n_nodes)[:n_sources])
    # radial-axis nodes (all transverse coordinates at the center) see the
    # gradient-aligned direction where the supremum is attained
    mid = lattice_n // 2
    axis_idx = np.full(dim, mid)
    for k in (1, lattice_n - 2, lattice_n - 1):
        axis_idx_k = axis_idx.copy()
        axis_idx_k[1] = k
        sources.append(int(ids[tuple(axis_idx_k)]))
    best = 0.0
    for s in sources:
        dist, _ = _kernels.dijkstra(indptr, nbr, wts, int(s), -1)
        mask = (dist > 0) & np.isfinite(dist)
        if not np.any(mask):
            continue
        ratios = np.abs(omegas[mask] - omegas[s]) / dist[mask]
        best = max(best, float(ratios.max()))
    return best


# ---------------------------------------------------------------------------
# omega as a causal indicator against the grid oracle
# ---------------------------------------------------------------------------

@dataclass
class MonotonicityReport:
    n_causal_pairs: int
    max_violation: float
    n_omega_positive: int
    n_confirmable: int
    n_confirmed: int

    @property
    def ok(self) -> bool:
        return self.max_violation <= 1e-6 and self.n_confirmed == self.n_confirmable


def omega_monotonicity_check(chart: NullChart, grid: CausalGrid,
                             n_samples: int = 200, seed: int = 0,
                             delta: Optional[float] = None) -> MonotonicityReport:
    """omega is monotone along causal pairs, and omega >= delta implies grid
    membership in J+ of the chart center.

    Grid reach confirms membership only for samples whose spatial L1 slack
    clears the stencil's angular defect (always true in 1+1), so those are
    the confirmable ones.
    """
    rng = np.random.default_rng(seed)
    p_node = grid.node_of(chart.center)
    delta = 2.0 * grid.h if delta is None else delta
    reach_p = reach(grid, p_node).members

    # restrict sampling to nodes where the chart inverts
    mask = np.linalg.norm(grid.coords - chart.center, axis=1) <= 0.95 * chart.domain_radius
    pool = np.flatnonzero(mask)
    if pool.size == 0:
        raise NullDistError("no grid nodes inside the chart domain")
    omega_cache: dict = {}

    def om(node):
        if node not in omega_cache:
            omega_cache[node] = chart_inverse(chart, grid.coords[node]).omega
        return omega_cache[node]

    max_viol = 0.0
    n_pairs = 0
    sources = pool[rng.integers(0, pool.size, size=min(32, pool.size))]
    for s in sources:
        members = reach(grid, int(s)).members & mask
        members[s] = False
        idx = np.flatnonzero(members)
        if idx.size == 0:
            continue
        picks = idx[rng.integers(0, idx.size, size=min(8, idx.size))]
        for t_node in picks:
            n_pairs += 1
            max_viol = max(max_viol, om(int(s)) - om(int(t_node)))
            if n_pairs >= n_samples:
                break
        if n_pairs >= n_samples:
            break

    n_pos = 0
    n_confirmable = 0
    n_confirmed = 0
    p_coords = grid.coords[p_node]
    samples = pool[rng.integers(0, pool.size, size=min(n_samples, pool.size))]
    for node in samples:
        w = om(int(node))
        if w < delta:
            continue
        n_pos += 1
        gap = grid.coords[node] - p_coords
        l1 = float(np.abs(gap[1:]).sum())
        if l1 <= gap[0] + 1e-9:  # inside the guaranteed lattice cone
            n_confirmable += 1
            if reach_p[node]:
                n_confirmed += 1
    return MonotonicityReport(n_causal_pairs=n_pairs, max_violation=max(0.0, max_viol),
                              n_omega_positive=n_pos, n_confirmable=n_confirmable,
                              n_confirmed=n_confirmed)
