"""Command-line front end.

Subcommands: nulldist, causal, cosmo-time, check-antilip, optical, ball,
encode-test, isometry, paper-suite.  All outputs are deterministic for fixed
inputs and flags (floats serialized at 12 significant digits, fixed
tie-breaking); wall-clock fields are excluded from that guarantee.

Exit codes: 0 success, 1 failed assertion in paper-suite, 2 parse errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time

import numpy as np

from . import __version__
from .curves import (
    EncodesVerdict,
    ball_boundary_sample,
    encodes_causality_test,
    null_distance_result,
)
from .errors import NullDistError, SceneError
from .grid import GridParams, build_grid, reach, shortest_null_path
from .isometry import (
    PointMap,
    assess_conformal,
    check_preserving,
    dilation_map,
    identity_map,
    rotation_map,
    table_map,
    translation_map,
)
from .optical import build_chart, chart_inverse, grad_norm_omega
from .scene import Scene
from .spacetime import TimeSense
from .timefn import check_anti_lipschitz, check_regularity, cosmological_time_numeric


def _round12(obj):
    """12 significant digits on every float, recursively."""
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return obj
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round12(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return _round12(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def _emit_json(data: dict, out_path):
    text = json.dumps(_round12(data), sort_keys=True, indent=2) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_csv(header, rows, out_path):
    def fmt(x):
        return f"{x:.12g}" if isinstance(x, (float, np.floating)) else x

    if out_path:
        fh = open(out_path, "w", newline="", encoding="utf-8")
    else:
        fh = sys.stdout
    try:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(x) for x in row])
    finally:
        if out_path:
            fh.close()


def _parse_point(text: str) -> np.ndarray:
    return np.array([float(x) for x in text.split(",")], dtype=float)


def _load_scene(path: str) -> Scene:
    return Scene.from_file(path)


def _grid_from_args(scene: Scene, args):
    st = scene.spacetime()
    tau = scene.time_function(st)
    params = scene.grid_params(h=getattr(args, "h", None),
                               stencil_radius=getattr(args, "stencil_radius", None))
    grid = build_grid(st, tau, params.box, params.h, params.stencil)
    return st, tau, params, grid


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------

def _cmd_nulldist(args) -> int:
    scene = _load_scene(args.scene)
    _, _, params, grid = _grid_from_args(scene, args)
    p = grid.node_of(_parse_point(args.p))
    q = grid.node_of(_parse_point(args.q))
    t0 = time.perf_counter()
    res = null_distance_result(grid, p, q)
    wall_ms = 1000.0 * (time.perf_counter() - t0)
    out = {
        "estimate": res.estimate,
        "lower_bound": res.lower_bound,
        "path_len": res.witness.n_segments + 1,
        "h": params.h,
        "stencil_radius": params.stencil.radius,
        "spacelike_overestimate_max": grid.spacelike_overestimate_max,
        "wall_ms": wall_ms,
    }
    _emit_json(out, args.out)
    if args.path_csv:
        dim = grid.st.dim
        header = [f"x{a}" for a in range(dim)]
        _emit_csv(header, [list(v) for v in res.witness.vertices], args.path_csv)
    return 0


def _cmd_causal(args) -> int:
    scene = _load_scene(args.scene)
    _, _, _, grid = _grid_from_args(scene, args)
    p = grid.node_of(_parse_point(args.p))
    q = grid.node_of(_parse_point(args.q))
    reachable = q in reach(grid, p)
    _emit_json({"reachable": bool(reachable)}, args.out)
    return 0


def _cmd_cosmo_time(args) -> int:
    scene = _load_scene(args.scene)
    st, tau, params, grid = _grid_from_args(scene, args)
    values = cosmological_time_numeric(grid)
    analytic = st.cosmological_time_analytic
    ana = analytic(grid.coords) if analytic is not None else None
    dim = st.dim
    header = [f"x{a}" for a in range(dim)] + ["tau_numeric", "tau_analytic_if_known", "abs_err"]
    rows = []
    for i in range(grid.n_nodes):
        row = list(grid.coords[i]) + [float(values[i])]
        if ana is not None:
            row += [float(ana[i]), abs(float(values[i]) - float(ana[i]))]
        else:
            row += ["", ""]
        rows.append(row)
    _emit_csv(header, rows, args.out)
    return 0


def _cmd_check_antilip(args) -> int:
    scene = _load_scene(args.scene)
    _, tau, params, grid = _grid_from_args(scene, args)
    region = params.box if args.region is None else tuple(
        tuple(float(x) for x in pair.split(",")) for pair in args.region.split(";"))
    report = check_anti_lipschitz(grid, tau, region, n_sources=args.n_sources,
                                  seed=args.seed)
    reg = check_regularity(grid, tau)
    _emit_json({
        "lambda_best": report.lambda_best,
        "pairs_tested": report.pairs_tested,
        "violations": report.violations,
        "worst_pair": report.worst_pair,
        "regular": reg.ok,
        "eps_reg": reg.eps_reg,
        "seed": args.seed,
    }, args.out)
    return 0


def _cmd_optical(args) -> int:
    scene = _load_scene(args.scene)
    st = scene.spacetime()
    center = _parse_point(args.center)
    sense = TimeSense.FUTURE if args.sense == "future" else TimeSense.PAST
    chart = build_chart(st, center, sense, eps=args.eps)
    with open(args.queries, "r", encoding="utf-8") as fh:
        queries = json.load(fh)
    dim = st.dim
    header = [f"x{a}" for a in range(dim)] + ["omega", "lambda", "grad_norm"]
    rows = []
    for q in queries:
        qc = np.asarray(q, dtype=float)
        val = chart_inverse(chart, qc)
        try:
            gn = grad_norm_omega(chart, qc)
        except NullDistError:
            gn = float("nan")
        rows.append(list(qc) + [val.omega, val.lam, gn])
    _emit_csv(header, rows, args.out)
    return 0


def _cmd_ball(args) -> int:
    scene = _load_scene(args.scene)
    st, tau, params, grid = _grid_from_args(scene, args)
    center = _parse_point(args.center)
    rows = ball_boundary_sample(st, tau, center, args.radius, args.n_dirs,
                                params, grid=grid)
    dim = st.dim
    header = [f"dir{a}" for a in range(dim)] + [f"x{a}" for a in range(dim)]
    _emit_csv(header, [list(r) for r in rows], args.out)
    return 0


def _cmd_encode_test(args) -> int:
    scene = _load_scene(args.scene)
    st, tau, params, grid = _grid_from_args(scene, args)
    with open(args.pairs, "r", encoding="utf-8") as fh:
        pairs = json.load(fh)
    verdicts = []
    for p, q in pairs:
        rep = encodes_causality_test(st, tau, np.asarray(p, float),
                                     np.asarray(q, float), params, grid=grid)
        verdicts.append({
            "p": list(map(float, p)),
            "q": list(map(float, q)),
            "verdict": rep.verdict.value,
            "estimate": rep.result.estimate,
            "lower_bound": rep.result.lower_bound,
            "reachable": rep.reachable,
            "tol_eq": rep.tol_eq,
            "properness_claimed": rep.properness_claimed,
        })
    _emit_json({"verdicts": verdicts}, args.out)
    return 0


def _parse_map(spec: str, dim: int) -> PointMap:
    if spec == "identity":
        return identity_map()
    if spec.startswith("translate:"):
        return translation_map(_parse_point(spec.split(":", 1)[1]))
    if spec.startswith("dilate:"):
        return dilation_map(float(spec.split(":", 1)[1]))
    if spec.startswith("rotate:"):
        i, j, theta = spec.split(":", 1)[1].split(",")
        return rotation_map(int(i), int(j), float(theta))
    if spec.startswith("table:"):
        path = spec.split(":", 1)[1]
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        return table_map(data[:, :dim], data[:, dim:])
    raise SceneError(f"unknown map spec {spec!r}")


def _cmd_isometry(args) -> int:
    scene1 = _load_scene(args.scene1)
    scene2 = _load_scene(args.scene2)
    st1 = scene1.spacetime()
    st2 = scene2.spacetime()
    tau1 = scene1.time_function(st1)
    tau2 = scene2.time_function(st2)
    params1 = scene1.grid_params()
    params2 = scene2.grid_params()
    grid1 = build_grid(st1, tau1, params1.box, params1.h, params1.stencil)
    grid2 = build_grid(st2, tau2, params2.box, params2.h, params2.stencil)
    pmap = _parse_map(args.map, st1.dim)
    pres = check_preserving(pmap, grid1, grid2, tau1, tau2,
                            n_pairs=args.n_pairs, tol=args.tol, seed=args.seed)
    out = {
        "d_hat_dev": pres.max_dhat_dev,
        "tau_dev": pres.max_tau_dev,
        "preserving": pres.passed,
        "seed": args.seed,
    }
    if pmap.closed_form:
        report = assess_conformal(pmap, st1, st2, tau1, params1.box, params1.h,
                                  seed=args.seed)
        phis = [s[1] for s in report.phi_samples]
        out.update({
            "phi_mean": float(np.mean(phis)),
            "vol_n": report.vol_n,
            "vol_nm1": report.vol_nm1,
            "verdict": report.verdict.value,
            "dimension_ok": report.dimension_ok,
            "note": report.note,
        })
    else:
        out.update({"phi_mean": None, "vol_n": None, "vol_nm1": None,
                    "verdict": None, "note": "table map: conformal factor skipped"})
    _emit_json(out, args.out)
    return 0


# ---------------------------------------------------------------------------
# preset suite
# ---------------------------------------------------------------------------

def _preset_spacelike_pair(h: float):
    """Equal-time Minkowski pair at unit spatial separation: d-hat = 1."""
    from .spacetime import builtin
    from .timefn import coordinate_time

    st = builtin("minkowski", dim=2)
    tau = coordinate_time(st)
    grid = build_grid(st, tau, [(-0.3, 0.3), (-0.2, 1.2)], h)
    est, _ = shortest_null_path(grid, grid.node_of([0.0, 0.0]), grid.node_of([0.0, 1.0]))
    ok = abs(est - 1.0) <= 0.05
    return ok, f"estimate {est:.6g} (target 1 within 5%)"


def _preset_cubed_time():
    """tau = t^3 collapses equal-time distances; witnesses match 2j(D/2j)^3."""
    from .curves import PiecewiseCausalCurve, SegmentSense, null_length
    from .spacetime import builtin
    from .timefn import cubed_time

    st = builtin("minkowski", dim=2)
    tau = cubed_time(st)
    D = 1.0
    for j in (1, 2, 4):
        verts = [[0.0, 0.0]]
        senses = []
        for i in range(1, 2 * j + 1):
            t = D / (2 * j) if i % 2 == 1 else 0.0
            verts.append([t, i * D / (2 * j)])
            senses.append(SegmentSense.FUTURE if i % 2 == 1 else SegmentSense.PAST)
        beta = PiecewiseCausalCurve(st, verts, tuple(senses))
        expect = (2 * j) * (D / (2 * j)) ** 3
        got = null_length(beta, tau)
        if abs(got - expect) > 1e-12:
            return False, f"witness j={j}: {got:.3e} != {expect:.3e}"
    grid = build_grid(st, tau, [(-0.04, 0.08), (-0.1, 1.1)], 0.01)
    est, _ = shortest_null_path(grid, grid.node_of([0.0, 0.0]), grid.node_of([0.0, 1.0]))
    ok = est <= 0.05
    return ok, f"witnesses exact; grid estimate {est:.3e} <= 0.05 at h=0.01"


def _preset_missing_ray():
    """Equality at the |dtau| floor without reachability (h = 0.25 aligned).

    The lattice cannot sidestep the removed ray for less than one past step,
    so the defensible discrete bound is 2 <= estimate <= 2 + 2h.
    """
    from .spacetime import builtin
    from .timefn import coordinate_time

    st = builtin("missing_ray", dim=4)
    tau = coordinate_time(st)
    h = 0.25
    params = GridParams(box=((0.5, 3.5), (-1.5, 1.5), (-1.5, 1.5), (-1.5, 1.5)), h=h)
    rep = encodes_causality_test(st, tau, [1.0, -1.0, 0.0, 0.0], [3.0, 1.0, 0.0, 0.0], params)
    est = rep.result.estimate
    ok = (rep.verdict is EncodesVerdict.VIOLATION_MISSING_CAUSAL
          and not rep.reachable and 2.0 - 1e-9 <= est <= 2.0 + 2 * h + 1e-9)
    return ok, f"verdict {rep.verdict.value}, estimate {est:.6g} in [2, 2+2h]"


def _preset_conformal_invariance(h: float):
    """Identical edges, weights, and estimates under g and 4g with tau fixed."""
    from .spacetime import builtin
    from .timefn import coordinate_time

    st1 = builtin("minkowski", dim=2)
    st2 = builtin("conformal", base="minkowski", dim=2, factor=2.0)
    box = [(-0.3, 0.3), (-0.2, 1.2)]
    tau1 = coordinate_time(st1)
    tau2 = coordinate_time(st2)
    g1 = build_grid(st1, tau1, box, h)
    g2 = build_grid(st2, tau2, box, h)
    same_edges = (np.array_equal(g1.edge_u, g2.edge_u)
                  and np.array_equal(g1.edge_v, g2.edge_v)
                  and np.array_equal(g1.edge_w, g2.edge_w))
    e1, _ = shortest_null_path(g1, g1.node_of([0, 0]), g1.node_of([0, 1]))
    e2, _ = shortest_null_path(g2, g2.node_of([0, 0]), g2.node_of([0, 1]))
    ok = same_edges and e1 == e2
    return ok, f"edge sets equal: {same_edges}, estimates {e1:.6g} == {e2:.6g}"


def _preset_ball(h: float):
    """The unit null-distance ball in 1+1 is the causal cylinder."""
    from .spacetime import builtin
    from .timefn import coordinate_time

    st = builtin("minkowski", dim=2)
    tau = coordinate_time(st)
    params = GridParams(box=((-1.3, 1.3), (-1.3, 1.3)), h=h)
    rows = ball_boundary_sample(st, tau, [0.0, 0.0], 1.0, 8, params)
    ok = True
    details = []
    for row in rows:
        u, b = row[:2], row[2:]
        if abs(u[0]) >= abs(u[1]):  # causal-side ray: boundary at the tau level set
            ok &= abs(abs(b[0]) - 1.0) <= 2 * h
        else:  # spacelike-side ray: boundary at unit spatial distance
            ok &= abs(abs(b[1]) - 1.0) <= 2 * h
    return bool(ok), "cylinder top/side within 2h of the unit levels"


def _cmd_paper_suite(args) -> int:
    h = args.h
    presets = [
        ("spacelike-pair", lambda: _preset_spacelike_pair(h)),
        ("cubed-time-degeneracy", _preset_cubed_time),
        ("missing-ray", _preset_missing_ray),
        ("conformal-invariance", lambda: _preset_conformal_invariance(h)),
        ("ball-cylinder", lambda: _preset_ball(h)),
    ]
    failures = 0
    lines = []
    for name, fn in presets:
        t0 = time.perf_counter()
        try:
            ok, detail = fn()
        except NullDistError as exc:
            ok, detail = False, f"error: {exc}"
        dt = time.perf_counter() - t0
        failures += 0 if ok else 1
        lines.append((name, ok, detail, dt))
    width = max(len(name) for name, *_ in lines)
    for name, ok, detail, dt in lines:
        status = "PASS" if ok else "FAIL"
        print(f"{name:<{width}}  {status}  {detail}  [{dt:.2f}s]")
    print(f"{failures} failed / {len(lines)} presets")
    return 1 if failures else 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_grid_flags(sp):
    sp.add_argument("--h", type=float, default=None, help="override lattice spacing")
    sp.add_argument("--stencil-radius", type=int, default=None, dest="stencil_radius")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="nulldist",
        description="Null-distance geometry on discretized Lorentzian spacetimes.",
        epilog=("paper-suite presets: spacelike-pair (unit equal-time distance), "
                "cubed-time-degeneracy (collapsing zigzags under tau=t^3), "
                "missing-ray (equality without causality behind an excised ray; "
                "fixed aligned h=0.25), conformal-invariance (g vs 4g), "
                "ball-cylinder (unit ball boundary)."))
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("--threads", type=int, default=1,
                    help="parallelism cap (recorded; orchestration is single-threaded)")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("nulldist", help="null distance between two lattice events")
    sp.add_argument("scene")
    sp.add_argument("--p", required=True, help="comma-separated coordinates")
    sp.add_argument("--q", required=True)
    _add_grid_flags(sp)
    sp.add_argument("--out", default=None)
    sp.add_argument("--path-csv", default=None, dest="path_csv")
    sp.set_defaults(fn=_cmd_nulldist)

    sp = sub.add_parser("causal", help="directed reachability q in J+(p)")
    sp.add_argument("scene")
    sp.add_argument("--p", required=True)
    sp.add_argument("--q", required=True)
    _add_grid_flags(sp)
    sp.add_argument("--out", default=None)
    sp.set_defaults(fn=_cmd_causal)

    sp = sub.add_parser("cosmo-time", help="numeric cosmological time per node (CSV)")
    sp.add_argument("scene")
    _add_grid_flags(sp)
    sp.add_argument("--out", default=None)
    sp.set_defaults(fn=_cmd_cosmo_time)

    sp = sub.add_parser("check-antilip", help="best anti-Lipschitz constant in a region")
    sp.add_argument("scene")
    sp.add_argument("--region", default=None,
                    help="semicolon-separated lo,hi pairs; defaults to the grid box")
    sp.add_argument("--n-sources", type=int, default=64, dest="n_sources")
    sp.add_argument("--seed", type=int, default=0)
    _add_grid_flags(sp)
    sp.add_argument("--out", default=None)
    sp.set_defaults(fn=_cmd_check_antilip)

    sp = sub.add_parser("optical", help="optical function values at query points (CSV)")
    sp.add_argument("scene")
    sp.add_argument("--center", required=True)
    sp.add_argument("--sense", choices=["future", "past"], default="future")
    sp.add_argument("--eps", type=float, default=0.5, help="chart half-width")
    sp.add_argument("--queries", required=True, help="JSON file with a list of points")
    sp.add_argument("--out", default=None)
    sp.set_defaults(fn=_cmd_optical)

    sp = sub.add_parser("ball", help="null-distance ball boundary along rays (CSV)")
    sp.add_argument("scene")
    sp.add_argument("--center", required=True)
    sp.add_argument("--radius", type=float, required=True)
    sp.add_argument("--n-dirs", type=int, default=8, dest="n_dirs")
    _add_grid_flags(sp)
    sp.add_argument("--out", default=None)
    sp.set_defaults(fn=_cmd_ball)

    sp = sub.add_parser("encode-test", help="causality-encoding verdicts for a pair file")
    sp.add_argument("scene")
    sp.add_argument("--pairs", required=True, help="JSON file with [[p, q], ...]")
    _add_grid_flags(sp)
    sp.add_argument("--out", default=None)
    sp.set_defaults(fn=_cmd_encode_test)

    sp = sub.add_parser("isometry", help="distance/time preservation + conformal factor")
    sp.add_argument("scene1")
    sp.add_argument("scene2")
    sp.add_argument("--map", default="identity",
                    help="identity | translate:a,b,.. | dilate:s | rotate:i,j,theta | table:file.csv")
    sp.add_argument("--n-pairs", type=int, default=100, dest="n_pairs")
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=None)
    sp.set_defaults(fn=_cmd_isometry)

    sp = sub.add_parser("paper-suite", help="run the bundled example presets")
    sp.add_argument("--h", type=float, default=0.05,
                    help="lattice spacing for the slab presets (missing-ray keeps its aligned 0.25)")
    sp.set_defaults(fn=_cmd_paper_suite)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except SceneError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NullDistError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
