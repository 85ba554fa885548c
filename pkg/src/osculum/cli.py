"""Command line front end: JSON manifest in, JSON report out.

Exit codes: 0 success, 2 when a declared ground truth is missed or the
methods disagree, 1 on errors.
"""

from __future__ import annotations

import argparse
import json
import math
import platform
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .contact import (
    Distribution2in3,
    SurfacePatch,
    angle_order_along,
    contact_order_estimate,
    geiges_check,
    random_tangent_quadratics,
)
from .curves import find_witness_direction, minimax_tangency, NoWitness
from .expr import evaluate, parse_expr
from .grassmann import chart_coordinate_count, closed_form_lift, lifts_equal, max_equal_lift, recursive_lift
from .jet import AtLeast
from .manifolds import AdaptedPair, NoCommonTangent, ParamPatch, adapt_to_graphs, graph_pair
from .separation import (
    BranchSampler,
    NoSeparation,
    UnsupportedShape,
    catalog,
    default_scales,
    estimate_graph_exponent,
    estimate_separation_exponent,
    leading_exponent_graph,
    order_vs_exponent,
)
from .taylor import DEFAULT_K_MAX, order_from_graphs

JOB_KINDS = ("tangency", "minimax", "grassmann", "sep-exp", "contact", "catalog", "compare")
EXPONENT_TOL = 0.05


class ManifestError(ValueError):
    pass


def _show(v):
    if isinstance(v, AtLeast):
        return str(v)
    if isinstance(v, Fraction):
        return str(v)
    return v


def _catalog_entry(spec: dict):
    spec = dict(spec)
    name = spec.pop("name")
    return catalog(name, **spec)


def _patch(spec: dict) -> ParamPatch:
    return ParamPatch.make(spec["components"], spec["params"], spec.get("base"))


def build_pair(job: dict, mode: str) -> AdaptedPair:
    """Adapted pair from ``graphs``, ``M``/``Mt`` patches, or a ``catalog`` entry."""
    if "graphs" in job:
        g = job["graphs"]
        return graph_pair(g["F"], g["Ft"], g.get("variables", ["x"]))
    if "M" in job and "Mt" in job:
        M, Mt = _patch(job["M"]), _patch(job["Mt"])
        if len(M.components) != len(Mt.components) or len(M.params) != len(Mt.params):
            raise ManifestError("the two patches differ in dimension")
        x0 = job.get("point") or [str(v) for v in M.point()]
        return adapt_to_graphs(M, Mt, [Fraction(v) if isinstance(v, (int, str)) else v for v in x0], mode)
    if "catalog" in job:
        pair = _catalog_entry(job["catalog"]).pair()
        if pair is None:
            raise ManifestError("this catalog entry has no graph presentation")
        return pair
    raise ManifestError("a pair needs 'graphs', 'M' and 'Mt', or 'catalog'")


def _expected(job: dict) -> dict:
    exp = dict(job.get("expect", {}))
    if "catalog" in job:
        e = _catalog_entry(job["catalog"])
        exp.setdefault("exponent", str(e.exponent))
        if e.order is not None:
            exp.setdefault("order", e.order)
    return exp


# jobs

def job_tangency(job: dict, mode: str) -> tuple[dict, bool | None]:
    k_max = int(job.get("k_max", DEFAULT_K_MAX))
    try:
        pair = build_pair(job, mode)
    except NoCommonTangent as exc:
        res = {"order": 0, "reason": str(exc)}
        return res, _check_order(0, _expected(job))
    r = order_from_graphs(pair, k_max, "float" if _is_float_catalog(job) else mode)
    out = r.as_dict()
    if isinstance(r.s, int) and r.s < r.class_r:
        try:
            out["witness"] = find_witness_direction(pair, r.s, mode).as_dict()
        except NoWitness as exc:
            out["witness"] = {"error": str(exc)}
    return out, _check_order(r.s, _expected(job))


def _is_float_catalog(job: dict) -> bool:
    return job.get("catalog", {}).get("name") == "tworzewski"


def _check_order(s, exp: dict) -> bool | None:
    if "order" not in exp:
        return None
    want = exp["order"]
    if isinstance(want, str) and want.startswith(">="):
        return isinstance(s, AtLeast) and s.bound >= int(want[2:])
    return s == want


def job_minimax(job: dict, mode: str) -> tuple[dict, bool | None]:
    pair = build_pair(job, mode)
    rep = minimax_tangency(
        pair,
        n_dirs=int(job.get("n_dirs", 64)),
        n_curves=int(job.get("n_curves", 8)),
        curve_degree=int(job.get("curve_degree", 6)),
        l_max=int(job.get("l_max", 10)),
        seed=int(job.get("seed", 0)),
        mode="float" if _is_float_catalog(job) else mode,
    )
    return rep.as_dict(), _check_order(rep.outer_min, _expected(job))


def job_grassmann(job: dict, mode: str) -> tuple[dict, bool | None]:
    pair = build_pair(job, mode)
    m = "float" if _is_float_catalog(job) else mode
    k_max = int(job.get("k_max", 6))
    best, bound = max_equal_lift(pair, k_max, m)
    out = {"max_equal_lift": best, "bound": bound}
    if "k" in job:
        k = int(job["k"])
        out["k"] = k
        out["lifts_equal"] = lifts_equal(pair, k, m)
        a = recursive_lift(pair.M.jet(k, m), pair.M.origin, k)
        out["lift_M"] = a.to_json()
        out["lift_Mt"] = recursive_lift(pair.Mt.jet(k, m), pair.Mt.origin, k).to_json()
        out["closed_form_matches"] = a.equals(closed_form_lift(pair.M.jet(k, m), pair.M.origin, k))
        out["coordinate_count"] = chart_coordinate_count(pair.p, pair.m, k)[0]
    exp = _expected(job)
    ok = None
    if "order" in exp and isinstance(exp["order"], int) and exp["order"] < bound:
        ok = best == exp["order"]
    return out, ok


def _graph_sampler(name: str, expr, t_max: float) -> BranchSampler:
    e = parse_expr(expr) if isinstance(expr, str) else expr
    f = np.vectorize(lambda t: float(evaluate(e, {"x": float(t)})), otypes=[float])
    return BranchSampler(name, lambda t: (np.asarray(t, dtype=float), f(t)), t_max)


def job_sep_exp(job: dict, mode: str) -> tuple[dict, bool | None, str | None]:
    exp = _expected(job)
    out: dict = {}
    if "catalog" in job:
        entry = _catalog_entry(job["catalog"])
        X, Y, scales = entry.X, entry.Y, entry.scales
        out["catalog"] = {"name": entry.name, "params": entry.params, "equation": entry.equation}
        out["residual_max"] = entry.residual_max()
        graphs = entry.graphs
    elif "graphs" in job:
        g = job["graphs"]
        t_max = float(job.get("t_max", 0.5))
        X, Y = _graph_sampler("F", g["F"], t_max), _graph_sampler("Ft", g["Ft"], t_max)
        scales = default_scales(3.0)
        graphs = (parse_expr(g["F"]), parse_expr(g["Ft"]))
    else:
        raise ManifestError("sep-exp needs 'catalog' or 'graphs'")
    if "scales" in job:
        scales = [float(Fraction(s)) for s in job["scales"]]
    fit = estimate_separation_exponent(X, Y, scales, int(job.get("seed", 0)))
    out["fit"] = fit.as_dict()
    if graphs is not None:
        try:
            out["symbolic_exponent"] = str(leading_exponent_graph(*graphs))
        except (UnsupportedShape, NoSeparation) as exc:
            out["symbolic_exponent"] = {"error": str(exc)}
        fF = lambda x, e=graphs[0]: evaluate(e, {"x": x})  # noqa: E731
        fFt = lambda x, e=graphs[1]: evaluate(e, {"x": x})  # noqa: E731
        out["graph_fit"] = estimate_graph_exponent(fF, fFt, scales).as_dict()
    ok = None
    if "exponent" in exp:
        truth = float(Fraction(exp["exponent"]))
        out["ground_truth"] = str(exp["exponent"])
        ok = abs(fit.alpha - truth) <= float(job.get("tol", EXPONENT_TOL))
    return out, ok, fit.samples_csv()


def _surfaces(job: dict, xi: Distribution2in3) -> list[SurfacePatch]:
    out = []
    for s in job.get("surfaces", []):
        if "graph" in s:
            out.append(SurfacePatch.graph(s["graph"], s.get("at", [0, 0])))
        else:
            out.append(SurfacePatch.param(s["components"], s.get("base", [0, 0])))
    if "random_surfaces" in job:
        r = job["random_surfaces"]
        out += random_tangent_quadratics(xi, int(r.get("n", 20)), int(r.get("seed", 0)), r.get("at", [0, 0, 0]))
    if not out:
        raise ManifestError("contact needs 'surfaces' or 'random_surfaces'")
    return out


def job_contact(job: dict, mode: str) -> tuple[dict, bool | None]:
    xi = Distribution2in3.from_form(*job.get("form", ["-y", "0", "1"]))
    surfaces = _surfaces(job, xi)
    l_max = int(job.get("l_max", 10))
    scales = [float(Fraction(s)) for s in job["scales"]] if "scales" in job else None
    seed = int(job.get("seed", 0))
    if len(surfaces) == 1 and not job.get("geiges"):
        est = contact_order_estimate(xi, surfaces[0], scales, l_max=l_max, seed=seed)
        out = est.as_dict()
        exact = {}
        for w in ((1, 0), (0, 1), (1, 1), (1, -1)):
            exact[str(w)] = _show(angle_order_along(xi, surfaces[0], w, l_max, mode))
        out["exact_along_directions"] = exact
        exp = job.get("expect", {})
        ok = None
        if "order" in exp:
            want = exp["order"]
            if isinstance(want, str) and want.startswith(">="):
                ok = isinstance(est.order, AtLeast)
            else:
                ok = abs(float(est.order) - float(want)) <= EXPONENT_TOL
        return out, ok
    rep = geiges_check(xi, surfaces, l_max, scales, seed)
    want = job.get("expect", {}).get("verdict")
    return rep.as_dict(), None if want is None else rep.verdict == want


def job_catalog(job: dict, mode: str) -> tuple[dict, bool | None]:
    if "catalog" not in job:
        raise ManifestError("catalog job needs a 'catalog' entry")
    e = _catalog_entry(job["catalog"])
    out = {
        "name": e.name,
        "params": e.params,
        "equation": e.equation,
        "exponent": str(e.exponent),
        "order": e.order,
        "branches": [e.X.name, e.Y.name],
        "residual_max": e.residual_max(),
        "scales": [e.scales[0], e.scales[-1], len(e.scales)],
    }
    if e.graphs is not None or e.pair_factory is not None:
        out["order_vs_exponent"] = order_vs_exponent(e)
    return out, e.residual_max() < 1e-10


def compare_methods(pair: AdaptedPair, k_max: int = 10, l_max: int = 10, seed: int = 0, mode: str = "auto", **kw) -> dict:
    """All three characterizations of the order of tangency side by side."""
    t = order_from_graphs(pair, k_max, mode)
    mm = minimax_tangency(pair, l_max=l_max, seed=seed, mode=mode, **kw)
    g_best, g_bound = max_equal_lift(pair, k_max, mode)
    values = {"taylor": _show(t.s), "minimax": _show(mm.outer_min), "grassmann": g_best}
    flags = []
    status = "agree"
    if t.saturated_by_class:
        status = "caveat"
        flags.append(
            f"order reaches the smoothness class r={t.class_r}; the curve and lift characterizations "
            "are only guaranteed for s < r, so the mini-max value is not certified"
        )
        if g_best != t.s:
            flags.append(f"grassmann {g_best} differs from taylor {t.s}")
    elif isinstance(t.s, AtLeast):
        ok = isinstance(mm.outer_min, AtLeast) and g_best == g_bound
        status = "agree" if ok else "disagree"
        if not ok:
            flags.append("taylor found no difference up to k_max but another method did")
    else:
        if not (mm.outer_min == t.s and g_best == t.s):
            status = "disagree"
            flags.append(f"taylor {t.s}, minimax {_show(mm.outer_min)}, grassmann {g_best}")
    return {
        "values": values,
        "status": status,
        "flags": flags,
        "taylor": t.as_dict(),
        "grassmann_bound": g_bound,
        "minimax_warnings": mm.warnings,
        "minimax_attaining": [[str(c) for c in w] for w in mm.attaining],
    }


def job_compare(job: dict, mode: str) -> tuple[dict, bool]:
    pair = build_pair(job, mode)
    m = "float" if _is_float_catalog(job) else mode
    out = compare_methods(
        pair,
        int(job.get("k_max", 10)),
        int(job.get("l_max", 10)),
        int(job.get("seed", 0)),
        m,
        n_dirs=int(job.get("n_dirs", 16)),
        n_curves=int(job.get("n_curves", 4)),
    )
    return out, out["status"] != "disagree"


HANDLERS = {
    "tangency": job_tangency,
    "minimax": job_minimax,
    "grassmann": job_grassmann,
    "sep-exp": job_sep_exp,
    "contact": job_contact,
    "catalog": job_catalog,
    "compare": job_compare,
}


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (Fraction, AtLeast)):
        return str(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def run_job(job: dict, mode: str | None = None, timings: bool = False) -> tuple[dict, int, str | None]:
    """Run one job; returns (report, exit code, csv samples or None)."""
    kind = job.get("job")
    if kind not in HANDLERS:
        raise ManifestError(f"unknown job kind {kind!r}; expected one of {', '.join(JOB_KINDS)}")
    mode = mode or job.get("mode", "auto")
    t0 = time.perf_counter()
    res = HANDLERS[kind](job, mode)
    csv_text = None
    if len(res) == 3:
        result, ok, csv_text = res
    else:
        result, ok = res
    report = {
        "job": job,
        "result": result,
        "verdict": None if ok is None else ("PASS" if ok else "FAIL"),
        "provenance": {
            "osculum": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
            "seed": job.get("seed", 0),
            "mode": mode,
        },
    }
    if timings:
        report["provenance"]["seconds"] = round(time.perf_counter() - t0, 3)
    return _jsonable(report), 2 if ok is False else 0, csv_text


def run(manifest: dict, mode: str | None = None, timings: bool = False) -> tuple[dict, int, list[str]]:
    """Run a manifest holding either one job or a ``jobs`` list."""
    jobs = manifest["jobs"] if "jobs" in manifest else [manifest]
    reports, csvs, code = [], [], 0
    for job in jobs:
        try:
            rep, c, csv_text = run_job(job, mode, timings)
        except Exception as exc:  # report and keep going; the exit code records it
            rep, c, csv_text = {"job": _jsonable(job), "error": f"{type(exc).__name__}: {exc}"}, 1, None
        reports.append(rep)
        if csv_text:
            csvs.append(csv_text)
        code = 1 if 1 in (code, c) else max(code, c)
    out = reports[0] if "jobs" not in manifest else {"jobs": reports}
    return out, code, csvs


def _load_manifest(src: str | None) -> dict:
    if src in (None, "-"):
        return json.load(sys.stdin)
    return json.loads(Path(src).read_text())


def _parse_value(s: str):
    try:
        return int(s)
    except ValueError:
        return s


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="osculum", description="Order of tangency and separation exponents.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("run",) + JOB_KINDS:
        p = sub.add_parser(name, help="run a manifest" if name == "run" else f"{name} job")
        p.add_argument("manifest", nargs="?", help="JSON manifest file, '-' for stdin")
        p.add_argument("--catalog", help="catalog entry name instead of a manifest")
        p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE", help="catalog parameter")
        p.add_argument("--F", help="graph map F (with --Ft)")
        p.add_argument("--Ft", help="graph map F~ (with --F)")
        p.add_argument("--vars", default="x", help="comma-separated graph variables")
        p.add_argument("--seed", type=int)
        p.add_argument("--mode", choices=("auto", "exact", "float"))
        p.add_argument("--k-max", type=int)
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--timings", action="store_true", help="add wall-clock seconds (breaks byte-identity)")
    return ap


def _manifest_from_args(args) -> dict:
    if args.manifest is not None:
        m = _load_manifest(args.manifest)
    elif args.catalog or args.F:
        m = {}
    else:
        m = _load_manifest("-")
    if args.catalog:
        m["catalog"] = {"name": args.catalog, **{k: _parse_value(v) for k, v in (p.split("=", 1) for p in args.param)}}
    if args.F:
        if not args.Ft:
            raise ManifestError("--F needs --Ft")
        m["graphs"] = {"F": args.F, "Ft": args.Ft, "variables": args.vars.split(",")}
    if args.command != "run":
        m["job"] = args.command
    if args.seed is not None:
        m["seed"] = args.seed
    if args.k_max is not None:
        m["k_max"] = args.k_max
    return m


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        manifest = _manifest_from_args(args)
        report, code, csvs = run(manifest, args.mode, args.timings)
    except Exception as exc:
        print(json.dumps({"error": f"{type(exc).__name__}: {exc}"}), file=sys.stderr)
        return 1
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out:
        out = Path(args.out)
        out.write_text(text)
        for i, c in enumerate(csvs):
            suffix = ".samples.csv" if len(csvs) == 1 else f".samples{i}.csv"
            out.with_name(out.stem + suffix).write_text(c)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
