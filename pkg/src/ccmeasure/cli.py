"""Command-line driver.

Exit codes: 0 success (verdict pass), 1 verdict fail, 2 input or solver error
(including usage errors).
"""
from __future__ import annotations

import csv
import functools
import io
import json
import math
import sys

import click
import numpy as np

from . import curves as cv
from . import derivative as dv
from . import measures as ms
from . import rectifiability as rc
from . import spaces as sp
from .config import load_config, parse_schedule, parse_subsets
from .control import SolverConfig
from .errors import CCMeasureError, InputError

SCHEMA = 1
TREE = {
    "space": ["dist"],
    "curve": ["meas", "degree", "mc1k"],
    "measure": ["length", "complexity", "entropy", "hausdorff", "density"],
    "verify": ["main-theorem"],
    "rect": ["check"],
}


class VerdictFail(Exception):
    pass


def num(x):
    """17 significant digits; inf/nan spelled out."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else num(x)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def emit(ctx, header, rows, summary):
    """Print a table, then write CSV/JSON when requested."""
    opts = ctx.find_root().obj
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([num(v) if isinstance(v, (float, np.floating)) else v for v in row])
    text = buf.getvalue()
    if opts["csv"]:
        with open(opts["csv"], "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
    if not opts["quiet"]:
        click.echo(text, nl=False)
    if opts["json"]:
        summary = {"schema": SCHEMA, "command": ctx.command_path.split(" ", 1)[-1],
                   "seed": opts["seed"], **summary}
        with open(opts["json"], "w", encoding="utf-8", newline="\n") as fh:
            json.dump(_jsonable(summary), fh, indent=2, sort_keys=True)
            fh.write("\n")


def guarded(fn):
    """Map library errors to exit 2 and verdict failures to exit 1."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except VerdictFail as exc:
            click.echo(f"verdict: FAIL {exc}", err=True)
            sys.exit(1)
        except (CCMeasureError, ValueError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)

    return wrapper


# --- option groups ---------------------------------------------------------


def space_options(fn):
    fn = click.option("--space", "space_name", default="heisenberg", show_default=True,
                      help="euclidean:N, heisenberg or engel")(fn)
    fn = click.option("--nodes", type=int, default=32, show_default=True,
                      help="Engel solver control nodes")(fn)
    fn = click.option("--restarts", type=int, default=8, show_default=True,
                      help="Engel solver restarts")(fn)
    return fn


def curve_options(fn):
    opts = [
        click.option("--curve", "curve_name", default="vertical", show_default=True,
                     help="vertical, horizontal, tilted, segment, engel_z, engel_w, "
                          "weierstrass, custom or polyline"),
        click.option("--a", type=float, default=None, help="domain start"),
        click.option("--b", type=float, default=None, help="domain end"),
        click.option("--v", default=None, help="segment direction, comma-separated"),
        click.option("--alpha", type=float, default=0.2, show_default=True),
        click.option("--beta", type=float, default=5.2, show_default=True),
        click.option("--phi", default="t", show_default=True, help="Weierstrass w component"),
        click.option("--components", default=None, help="custom components separated by ';'"),
        click.option("--polyline", "polyline_path", default=None,
                     help="CSV file with columns t,x1,...,xn"),
        click.option("--modulus", type=float, default=None, help="declared polyline modulus"),
    ]
    for o in reversed(opts):
        fn = o(fn)
    return space_options(fn)


def _floats(text, name):
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise InputError(f"{name}: expected comma-separated numbers") from None


def build_space(ctx, space_name, nodes, restarts):
    seed = ctx.find_root().obj["seed"]
    cfg = SolverConfig(nodes=nodes, restarts=restarts, seed=seed)
    return sp.space_from_name(space_name, cfg)


def build_curve(space, curve_name, a=None, b=None, v=None, alpha=0.2, beta=5.2, phi="t",
                components=None, polyline_path=None, modulus=None, **_):
    dom = {}
    if a is not None:
        dom["a"] = a
    if b is not None:
        dom["b"] = b
    name = curve_name
    kind = space.kind
    if name == "vertical":
        curve = cv.heisenberg_vertical(**dom)
    elif name == "horizontal":
        curve = cv.heisenberg_horizontal(**dom)
    elif name == "tilted":
        curve = cv.custom_coordinate_curve("heisenberg", ["t", "0", "t"], dom.get("a", -1.0),
                                           dom.get("b", 1.0), name="heisenberg_tilted")
    elif name == "segment":
        vec = _floats(v, "--v") if v else [1.0] + [0.0] * (space.dimension - 1)
        curve = cv.euclidean_segment(vec, **dom)
    elif name == "engel_z":
        curve = cv.engel_z_axis(**dom)
    elif name == "engel_w":
        curve = cv.engel_w_axis(**dom)
    elif name == "weierstrass":
        curve = cv.engel_weierstrass(cv.WeierstrassParams(alpha, beta), phi, **dom)
    elif name == "custom":
        if not components:
            raise InputError("--components is required for a custom curve")
        curve = cv.custom_coordinate_curve(kind, components.split(";"), dom.get("a", 0.0),
                                           dom.get("b", 1.0))
    elif name == "polyline":
        if not polyline_path:
            raise InputError("--polyline is required for a polyline curve")
        try:
            data = np.loadtxt(polyline_path, delimiter=",", ndmin=2)
        except (OSError, ValueError) as exc:
            raise InputError(f"cannot read polyline {polyline_path}: {exc}") from None
        curve = cv.polyline(kind, data[:, 0], data[:, 1:], modulus)
        if not cv.check_polyline_modulus(space, curve):
            raise InputError("polyline samples violate the declared modulus")
    else:
        raise InputError(f"unknown curve {name!r}")
    if curve.space_kind != kind or curve.dimension != space.dimension:
        raise InputError(f"curve {curve.name!r} does not live in {space}")
    return curve


def _space_curve(ctx, kw):
    space = build_space(ctx, kw.pop("space_name"), kw.pop("nodes"), kw.pop("restarts"))
    curve_kw = {k: kw.pop(k) for k in list(kw) if k in (
        "curve_name", "a", "b", "v", "alpha", "beta", "phi", "components",
        "polyline_path", "modulus")}
    return space, build_curve(space, **curve_kw), curve_kw


def _ladder(text):
    if not text:
        return None
    vals = _floats(text, "--ladder")
    if len(vals) != 3:
        raise InputError("--ladder takes s0,ratio,count")
    return dv.ScaleLadder(vals[0], vals[1], int(vals[2]))


# --- root ------------------------------------------------------------------


def _default_map(cfg):
    """Click ``default_map`` from a config. Keys are option names (``grid``,
    ``dp-grid``); shared sections may hold keys other commands use, but a
    command's own section may not."""
    known = {f"{g} {s}" for g, subs in TREE.items() for s in subs}
    for name in cfg.commands:
        if name not in known:
            raise InputError(f"unknown command section [{name}]")
    out = {}
    for group, subs in TREE.items():
        out[group] = {}
        for sub in subs:
            cmd = main.commands[group].commands[sub]
            names = {o.lstrip("-").replace("-", "_"): p.name
                     for p in cmd.params for o in getattr(p, "opts", [])}
            extra = set(cfg.commands.get(f"{group} {sub}", {})) - set(names)
            if extra:
                raise InputError(f"[{group} {sub}]: unknown keys {sorted(extra)}")
            out[group][sub] = {names[k]: v for k, v in cfg.defaults_for(f"{group} {sub}").items()
                               if k in names}
    return out


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--config", "config_path", default=None, help="INI experiment config")
@click.option("--seed", type=int, default=0, show_default=True,
              help="seed for all sampling (rectifiability samples, solver restarts)")
@click.option("--csv", "csv_path", default=None, help="write CSV here")
@click.option("--json", "json_path", default=None, help="write JSON summary here")
@click.option("--quiet", is_flag=True, help="do not echo CSV to stdout")
@click.pass_context
def main(ctx, config_path, seed, csv_path, json_path, quiet):
    """Dimensioned measures of curves in Carnot groups."""
    cfg = None
    if config_path:
        try:
            cfg = load_config(config_path)
            ctx.default_map = _default_map(cfg)
        except InputError as exc:
            raise click.UsageError(str(exc)) from None
        out = cfg.output
        csv_path = csv_path or out.get("csv")
        json_path = json_path or out.get("json")
    ctx.obj = {"seed": seed, "csv": csv_path, "json": json_path, "quiet": quiet,
               "config": cfg}


@main.group()
def space():
    """Distances in the model spaces."""


@main.group()
def curve():
    """Metric derivatives and degree checks."""


@main.group()
def measure():
    """Lengths, complexities, covers and densities."""


@main.group()
def verify():
    """Four-way measure agreement."""


@main.group()
def rect():
    """Rectifiable sets."""


# --- space -----------------------------------------------------------------


@space.command("dist")
@space_options
@click.option("--p", "p", required=True, help="point, comma-separated")
@click.option("--q", "q", required=True, help="point, comma-separated")
@click.pass_context
@guarded
def space_dist(ctx, space_name, nodes, restarts, p, q):
    """Distance between two points."""
    S = build_space(ctx, space_name, nodes, restarts)
    res = sp.distance(S, _floats(p, "--p"), _floats(q, "--q"))
    emit(ctx, ["value", "kind", "gap"], [[res.value, res.kind, res.gap_estimate]],
         {"space": str(S), "p": p, "q": q, "value": res.value, "kind": res.kind,
          "gaps": {"distance": res.gap_estimate}, "solver_stats": res.solver_stats or {}})


# --- curve -----------------------------------------------------------------


@curve.command("meas")
@curve_options
@click.option("--k", type=float, required=True)
@click.option("--t", "times", default="0.5", show_default=True, help="times, comma-separated")
@click.option("--ladder", default=None, help="s0,ratio,count")
@click.option("--rel-tol", type=float, default=0.01, show_default=True)
@click.pass_context
@guarded
def curve_meas(ctx, k, times, ladder, rel_tol, **kw):
    """meas^k estimates at the given times."""
    S, C, ckw = _space_curve(ctx, kw)
    L = _ladder(ladder)
    ests = [dv.meas_k_estimate(S, C, t, k, L, rel_tol) for t in _floats(times, "--t")]
    rows = [[e.t, e.value, e.limit, str(e.converged).lower(), e.spread, e.gap] for e in ests]
    emit(ctx, ["t", "value", "limit", "converged", "spread", "gap"], rows,
         {"space": str(S), "curve": ckw, "k": k, "tolerances": {"rel_tol": rel_tol},
          "results": [{"t": e.t, "value": e.value, "limit": e.limit, "converged": e.converged,
                       "spread": e.spread, "tail_slope": e.tail_slope} for e in ests],
          "gaps": {"max": max(e.gap for e in ests)}})


@curve.command("degree")
@curve_options
@click.option("--t", "times", default="0.5", show_default=True)
@click.option("--ladder", default=None, help="s0,ratio,count")
@click.pass_context
@guarded
def curve_degree(ctx, times, ladder, **kw):
    """Log-log slope estimate of the local degree."""
    S, C, ckw = _space_curve(ctx, kw)
    L = _ladder(ladder)
    rows = []
    for t in _floats(times, "--t"):
        k_hat, resid = dv.degree_estimate(S, C, t, L)
        rows.append([t, k_hat, resid])
    emit(ctx, ["t", "k_hat", "residual"], rows,
         {"space": str(S), "curve": ckw, "results": [dict(zip(("t", "k_hat", "residual"), r))
                                                     for r in rows]})


@curve.command("mc1k")
@curve_options
@click.option("--k", type=float, required=True)
@click.option("--grid", "grid_n", type=int, default=64, show_default=True)
@click.option("--rel-tol", type=float, default=0.01, show_default=True)
@click.option("--jump-tol", type=float, default=0.05, show_default=True)
@click.option("--ladder", default=None, help="s0,ratio,count")
@click.pass_context
@guarded
def curve_mc1k(ctx, k, grid_n, rel_tol, jump_tol, ladder, **kw):
    """Grid check of the m-C1_k property."""
    S, C, ckw = _space_curve(ctx, kw)
    rep = dv.mc1k_check(S, C, k, np.linspace(C.a, C.b, grid_n), rel_tol, jump_tol, _ladder(ladder))
    rows = [[t, v, str(e.converged).lower(), e.gap]
            for t, v, e in zip(rep.times, rep.profile, rep.estimates)]
    emit(ctx, ["t", "meas", "converged", "gap"], rows,
         {"space": str(S), "curve": ckw, "k": k, "verdict": rep.passed,
          "max_jump": rep.max_jump, "failed_times": rep.failed_times,
          "tolerances": {"rel_tol": rel_tol, "jump_tol": jump_tol},
          "gaps": {"max": max(e.gap for e in rep.estimates)}})
    if not rep.passed:
        raise VerdictFail(f"m-C1_k check failed at {len(rep.failed_times)} times")


# --- measure ---------------------------------------------------------------


@measure.command("length")
@curve_options
@click.option("--k", type=float, required=True)
@click.option("--grid", "grid_n", type=int, default=65, show_default=True)
@click.option("--method", type=click.Choice(["estimate", "analytic"]), default="estimate",
              show_default=True)
@click.pass_context
@guarded
def measure_length(ctx, k, grid_n, method, **kw):
    """k-length by trapezoid over the meas^k profile."""
    S, C, ckw = _space_curve(ctx, kw)
    res = ms.length_k(S, C, k, np.linspace(C.a, C.b, grid_n), method)
    emit(ctx, ["length", "error_estimate"], [[res.value, res.error_estimate]],
         {"space": str(S), "curve": ckw, "k": k, "value": res.value,
          "tolerances": {"error_estimate": res.error_estimate}, "method": method})


@measure.command("complexity")
@curve_options
@click.option("--k", type=float, required=True)
@click.option("--eps", default="0.2,0.1,0.05", show_default=True)
@click.option("--dp-grid", type=int, default=0, show_default=True,
              help="also run the grid oracle (0 = skip)")
@click.pass_context
@guarded
def measure_complexity(ctx, k, eps, dp_grid, **kw):
    """Greedy epsilon-chains (optionally with the grid oracle)."""
    S, C, ckw = _space_curve(ctx, kw)
    rows, res = [], []
    for e in parse_schedule(eps, "--eps"):
        cert = ms.interpolation_complexity(S, C, e)
        dp = (ms.interpolation_complexity_bruteforce(S, C, e, dp_grid, extra_times=cert.times)
              if dp_grid else "")
        rows.append([e, cert.count, e**k * cert.count, dp, cert.gap])
        res.append({"eps": e, "count": cert.count, "scaled": e**k * cert.count,
                    "dp_count": dp if dp_grid else None,
                    "max_step_distance": float(cert.step_distances.max())})
    emit(ctx, ["eps", "count", "scaled", "dp_count", "gap"], rows,
         {"space": str(S), "curve": ckw, "k": k, "results": res,
          "gaps": {"max": max(r[4] for r in rows)}})


@measure.command("entropy")
@curve_options
@click.option("--k", type=float, default=1.0, show_default=True)
@click.option("--eps", default="0.2,0.1,0.05", show_default=True)
@click.pass_context
@guarded
def measure_entropy(ctx, k, eps, **kw):
    """Greedy epsilon-nets with centers on the curve."""
    S, C, ckw = _space_curve(ctx, kw)
    rows = []
    for e in parse_schedule(eps, "--eps"):
        net = ms.metric_entropy(S, C, e)
        rows.append([e, net.count, e**k * net.count, sp.resolution_floor(S) / 10])
    emit(ctx, ["eps", "count", "scaled", "gap"], rows,
         {"space": str(S), "curve": ckw, "k": k,
          "results": [dict(zip(("eps", "count", "scaled"), r[:3])) for r in rows]})


@measure.command("hausdorff")
@curve_options
@click.option("--k", type=float, required=True)
@click.option("--eps", default="0.2,0.1,0.05", show_default=True)
@click.pass_context
@guarded
def measure_hausdorff(ctx, k, eps, **kw):
    """Arc covers and ball covers on a shared partition."""
    S, C, ckw = _space_curve(ctx, kw)
    rows = []
    for e in parse_schedule(eps, "--eps"):
        h = ms.hausdorff_upper(S, C, k, e)
        s = ms.spherical_upper(S, C, k, e, np.array([h.pieces[0][0]] + [p[1] for p in h.pieces]))
        rows.append([e, h.cost, s.matched_hausdorff_cost, s.cost, s.ambient_cost, len(s.pieces),
                     max(h.gap, s.gap)])
    emit(ctx, ["eps", "hausdorff_cost", "matched_hausdorff_cost", "spherical_cost",
               "ambient_ball_cost", "pieces", "gap"], rows,
         {"space": str(S), "curve": ckw, "k": k, "diameters": "sampled",
          "results": [dict(zip(("eps", "hausdorff_cost", "matched_hausdorff_cost",
                                "spherical_cost", "ambient_ball_cost", "pieces"), r[:6]))
                      for r in rows]})


@measure.command("density")
@curve_options
@click.option("--k", type=float, required=True)
@click.option("--t", "center", type=float, default=0.5, show_default=True)
@click.option("--radii", default="0.2,0.1,0.05", show_default=True)
@click.option("--method", type=click.Choice(["estimate", "analytic"]), default="estimate",
              show_default=True)
@click.pass_context
@guarded
def measure_density(ctx, k, center, radii, method, **kw):
    """Density ratios H^k(C cap B) / (2 r^k) around one curve point."""
    S, C, ckw = _space_curve(ctx, kw)
    prof = ms.density_profile(S, C, k, center, parse_schedule(radii, "--radii"), method)
    gap = sp.resolution_floor(S) / 10
    rows = [[r, x, prof.side, gap] for r, x in zip(prof.radii, prof.ratios)]
    emit(ctx, ["r", "ratio", "side", "gap"], rows,
         {"space": str(S), "curve": ckw, "k": k, "center_time": center, "side": prof.side,
          "ratios": prof.ratios, "radii": prof.radii,
          "preimages": [[p.lo, p.hi] for p in prof.preimages], "gaps": {"distance": gap}})


# --- verify ----------------------------------------------------------------


@verify.command("main-theorem")
@curve_options
@click.option("--k", type=float, required=True)
@click.option("--eps", default="0.16,0.08,0.04,0.02,0.01", show_default=True)
@click.option("--cover-eps", default=None, help="cover schedule (default: --eps)")
@click.option("--rel-tol", type=float, default=0.05, show_default=True)
@click.option("--grid", "grid_n", type=int, default=65, show_default=True)
@click.option("--method", type=click.Choice(["estimate", "analytic"]), default="estimate",
              show_default=True)
@click.pass_context
@guarded
def verify_main(ctx, k, eps, cover_eps, rel_tol, grid_n, method, **kw):
    """Length, Hausdorff, spherical and complexity limits must agree."""
    S, C, ckw = _space_curve(ctx, kw)
    cfg = ms.TheoremConfig(tuple(parse_schedule(eps, "--eps")),
                           tuple(parse_schedule(cover_eps, "--cover-eps")) if cover_eps else None,
                           grid_n, rel_tol, method)
    rep = ms.verify_main_theorem(S, C, k, cfg)
    spreads = rep.tolerances["spreads"]
    rows = [[name, value, rel_tol * abs(value) + spreads[name]]
            for name, value in rep.quantities().items()]
    emit(ctx, ["quantity", "value", "tolerance"], rows,
         {"space": str(S), "curve": ckw, "k": k, "values": rep.quantities(),
          "verdict": rep.verdict, "failures": rep.failures, "tolerances": rep.tolerances,
          "schedule": rep.schedule, "gaps": {"relative": rep.tolerances["gap_rel"]}})
    if not rep.verdict:
        raise VerdictFail("; ".join(rep.failures))


# --- rect ------------------------------------------------------------------


def _pieces_from_config(ctx, space_obj):
    cfg = ctx.find_root().obj["config"]
    if cfg is None or not cfg.pieces:
        raise InputError("--set config needs [piece.N] sections in --config")
    pieces, subsets = [], []
    for sec in cfg.pieces:
        kw = dict(sec)
        name = kw.pop("curve")
        subs = kw.pop("subsets", None)
        for key in ("a", "b", "alpha", "beta", "modulus"):
            if key in kw:
                kw[key] = float(kw[key])
        kw = {("polyline_path" if k == "polyline" else k): v for k, v in kw.items()}
        c = build_curve(space_obj, name, **kw)
        pieces.append(c)
        subsets.append(parse_subsets(subs) if subs else [(c.a, c.b)])
    return pieces, subsets


@rect.command("check")
@space_options
@click.option("--set", "set_name", type=click.Choice(["crossing", "config"]), default="crossing",
              show_default=True)
@click.option("--k", type=float, default=2.0, show_default=True)
@click.option("--samples", type=int, default=32, show_default=True, help="samples per piece")
@click.option("--radii", default="0.1,0.05,0.02,0.01", show_default=True)
@click.option("--tol", type=float, default=0.05, show_default=True)
@click.option("--margin", type=float, default=0.05, show_default=True)
@click.pass_context
@guarded
def rect_check(ctx, space_name, nodes, restarts, set_name, k, samples, radii, tol, margin):
    """Empirical density bounds on a finite union of curves."""
    S = build_space(ctx, space_name, nodes, restarts)
    if set_name == "crossing":
        if S.kind != "heisenberg":
            raise InputError("the crossing set lives in the Heisenberg group")
        rset = rc.crossing_segments()
    else:
        pieces, subsets = _pieces_from_config(ctx, S)
        rset = rc.RectifiableSet(k, pieces, subsets)
    seed = ctx.find_root().obj["seed"]
    rep = rc.density_bounds_check(S, rset, samples, parse_schedule(radii, "--radii"), tol,
                                  margin, seed)
    fails = {n for n, _ in rep.failures}
    rows = [[i, t, lo, hi, "false" if n in fails else "true"]
            for n, ((i, t, _), lo, hi) in enumerate(zip(rep.sample_points, rep.lower, rep.upper))]
    emit(ctx, ["piece", "t", "lower", "upper", "pass"], rows,
         {"space": str(S), "set": set_name, "k": rset.k, "verdict": rep.verdict,
          "radii": rep.radii, "failures": rep.failures,
          "tolerances": {"tol": tol, "bounds": [2 * (1 - tol), 2**rset.k * (1 + tol)],
                         "margin": margin}})
    if not rep.verdict:
        raise VerdictFail(f"{len(rep.failures)} samples outside the density bounds")


def run(argv=None) -> int:
    """Entry point returning the exit code."""
    try:
        main.main(args=argv, prog_name="ccmeasure", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return 2
    except click.Abort:
        return 2
    except SystemExit as exc:
        return int(exc.code or 0)
    return 0


if __name__ == "__main__":
    sys.exit(run())
