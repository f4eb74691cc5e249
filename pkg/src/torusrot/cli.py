"""Command-line front end: ``torusrot <command> --config run.cfg``."""

from __future__ import annotations

import argparse
import math
import sys
import time
import warnings
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, load_config
from .deviation import probe_support_deviations, refine_hull_by_deviation
from .errors import (
    ArgumentError,
    ConfigError,
    EvaluationFault,
    ExpressionError,
    PeriodicityError,
    TorusRotError,
)
from .hull import estimate_rotation_set
from .maps import make_lift, spec_to_mapping
from .measure import Verdict, area_preservation_check, interior_check, lebesgue_rotation_vector
from .orbit import GridSpec
from .periodic import SearchConfig, find_periodic
from .report import SvgPlot, write_csv, write_json
from .staircase import Direction, build_staircase, check_invariant, extend_negative

EXIT_OK, EXIT_FAILURE, EXIT_CONFIG, EXIT_VIOLATION, EXIT_FAULT = 0, 1, 2, 3, 4


class _Run:
    def __init__(self, cfg: RunConfig, out: Path, threads, refine, timings):
        self.cfg = cfg
        self.out = out
        self.threads = threads
        self.refine = refine
        self.timings = {} if timings else None
        self.lift = make_lift(cfg.map)

    def timed(self, name, fn, *args, **kw):
        t0 = time.perf_counter()
        value = fn(*args, **kw)
        if self.timings is not None:
            self.timings[name] = time.perf_counter() - t0
        return value

    def diag(self, payload):
        if self.timings is not None:
            payload["timings"] = dict(self.timings)
        return payload

    def rotset(self):
        return self.timed(
            "estimate_rotation_set",
            estimate_rotation_set,
            self.lift,
            self.cfg.grid,
            self.cfg.n_schedule,
            threads=self.threads,
        )

    def refined(self, est):
        n_ref = int(self.cfg.section("rotset").get("n_ref", est.n_schedule[-1]))
        return self.timed(
            "refine_hull_by_deviation",
            refine_hull_by_deviation,
            self.lift,
            est,
            self.cfg.thetas(),
            self.cfg.grid,
            n_ref,
            threads=self.threads,
        )

    def wants_refine(self):
        return self.refine or bool(self.cfg.section("rotset").get("refine", False))


def _map_json(cfg):
    return spec_to_mapping(cfg.map)


def cmd_rotset(run: _Run):
    est = run.rotset()
    verts = est.hull.vertices
    write_csv(run.out / "hull.csv", ["x", "y"], verts)
    plot = SvgPlot()
    plot.scatter(est.cloud, radius=0.8)
    plot.polygon(verts, color="#1f77b4")
    payload = {
        "map": _map_json(run.cfg),
        "grid": {"resolution": est.grid.resolution, "offset": list(est.grid.cell_offset)},
        "n_schedule": list(est.n_schedule),
        "hausdorff": list(est.hausdorff_diag),
        "vertex_count": len(verts),
        "area": est.hull.area,
    }
    if run.wants_refine():
        ref = run.refined(est)
        write_csv(run.out / "hull_refined.csv", ["x", "y"], ref.vertices)
        plot.polygon(ref.vertices, color="#d62728")
        from .hull import hausdorff

        payload["refined"] = {
            "vertex_count": len(ref),
            "area": ref.area,
            "hausdorff_to_cloud_hull": hausdorff(ref, est.hull),
            "directions": run.cfg.thetas(),
        }
    plot.save(run.out / "hull.svg")
    write_json(run.out / "diagnostics.json", run.diag(payload))
    return EXIT_OK


def cmd_leb(run: _Run):
    sec = run.cfg.section("leb")
    method = str(sec.get("method", "grid"))
    count = sec.get("samples" if method.lower().startswith("m") else "resolution")
    if count is None:
        count = 1000000 if method.lower().startswith("m") else 1024
    leb = run.timed("lebesgue", lebesgue_rotation_vector, run.lift, method, count, run.cfg.seed)
    write_json(run.out / "leb.json", run.diag({"map": _map_json(run.cfg), "leb": leb}))
    return EXIT_OK


def cmd_interior(run: _Run):
    cfg = run.cfg
    area = area_preservation_check(run.lift, 1000, cfg.seed, cfg.tolerances["area_tol"])
    sec = cfg.section("leb")
    method = str(sec.get("method", "grid"))
    mc = method.lower().startswith("m")
    count = sec.get("samples" if mc else "resolution", 1000000 if mc else 1024)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        leb = run.timed("lebesgue", lebesgue_rotation_vector, run.lift, method, count, cfg.seed)
    est = run.rotset()
    payload = {
        "map": _map_json(cfg),
        "area_check": {"passed": area.passed, "max_det_defect": area.max_det_defect},
        "leb": leb,
        "rotation_set": {
            "vertices": [list(v) for v in est.hull.vertices],
            "n_schedule": list(est.n_schedule),
            "hausdorff": list(est.hausdorff_diag),
        },
    }
    code = EXIT_OK
    if not area.passed:
        payload["verdict"] = {"verdict": "NotAreaPreserving"}
        print(
            "warning: map is not area preserving; the interior test does not apply",
            file=sys.stderr,
        )
    else:
        v = interior_check(est, leb, cfg.tolerances["interior_margin"])
        payload["verdict"] = {
            "verdict": v.verdict.value,
            "margin_used": v.margin_used,
            "distance_to_boundary": v.distance_to_boundary,
            "diagnostic": v.diagnostic,
        }
        if v.verdict is Verdict.OUTSIDE_VIOLATION:
            print("violation: Lebesgue rotation vector outside the estimate", file=sys.stderr)
            code = EXIT_VIOLATION
        elif v.verdict is Verdict.BOUNDARY_INDETERMINATE:
            print(f"warning: indeterminate ({v.diagnostic or 'within error budget'})", file=sys.stderr)
    write_json(run.out / "verdict.json", run.diag(payload))
    return code


def cmd_deviate(run: _Run):
    cfg = run.cfg
    sec = cfg.section("deviate")
    est = run.rotset()
    hull = run.refined(est) if run.wants_refine() else est.hull
    n_top = est.n_schedule[-1]
    sched = sec.get("n_schedule") or [n_top // 2 + k * (n_top - n_top // 2) // 4 for k in range(5)]
    window = sec.get("window")
    reports = run.timed(
        "probe",
        probe_support_deviations,
        run.lift,
        hull,
        cfg.thetas(),
        cfg.grid,
        sched,
        float(sec.get("fit_fraction", 0.5)),
        float(sec.get("inward_shift", 0.0)),
        tuple(window) if window else None,
        run.threads,
    )
    rows = [(r.theta, n, d) for r in reports for n, d in r.samples]
    write_csv(run.out / "deviation.csv", ["theta", "n", "D_n"], rows)
    write_json(
        run.out / "deviation.json",
        run.diag(
            {
                "map": _map_json(cfg),
                "hull": [list(v) for v in hull.vertices],
                "refined": run.wants_refine(),
                "reports": reports,
                "max_tail_slope": max(r.tail_slope for r in reports),
            }
        ),
    )
    return EXIT_OK


def _direction(sec):
    d = sec.get("direction", [1, 1])
    if isinstance(d, (int, float)) and not isinstance(d, bool):
        return Direction.from_slope(Fraction(d) if isinstance(d, int) else float(d))
    if isinstance(d, str):
        return Direction.from_slope(Fraction(d))
    if not isinstance(d, list) or len(d) != 2:
        raise ConfigError("staircase direction must be [a, b], a slope number or \"p/q\"")
    exact = sec.get("exact", all(isinstance(v, int) for v in d))
    if exact:
        if not all(isinstance(v, int) for v in d):
            raise ConfigError("exact staircase directions need integer components")
        return Direction.from_ints(*d)
    return Direction.from_float(*d)


def cmd_staircase(run: _Run):
    sec = run.cfg.section("staircase")
    direction = _direction(sec)
    path = build_staircase(direction, int(sec.get("max_steps", 1000)), float(sec.get("d_gamma", 0.0)))
    inv = check_invariant(path)
    vecs = path.step_vectors()
    rows = [
        (i, "H" if s == 0 else "V", int(v[0]), int(v[1]), d)
        for i, (s, v, d) in enumerate(zip(path.steps, vecs, path.deltas))
    ]
    write_csv(run.out / "staircase.csv", ["index", "step", "dx", "dy", "delta"], rows)
    h, v = path.counts()
    write_json(
        run.out / "staircase.json",
        {
            "direction": [direction.a, direction.b],
            "exact": list(direction.exact) if direction.exact else None,
            "steps": len(path),
            "counts": {"H": h, "V": v},
            "rational_period": list(path.rational_period) if path.rational_period else None,
            "invariant_ok": inv.ok,
            "max_abs_delta": inv.max_abs_delta,
            "width_bound": path.width_bound,
        },
    )
    pos = np.vstack([[0, 0], path.checkpoints()])
    neg = np.vstack([[0, 0], extend_negative(path)])
    plot = SvgPlot()
    plot.polyline(np.vstack([neg[::-1], pos[1:]]), color="#1f77b4")
    top = float(len(path))
    plot.polyline([(-top * direction.a, -top * direction.b), (top * direction.a, top * direction.b)],
                  color="#999999", width=0.5)
    plot.save(run.out / "staircase.svg")
    return EXIT_OK


def cmd_periodic(run: _Run):
    cfg = run.cfg
    sec = cfg.section("periodic")
    q = int(sec.get("q", 1))
    t = sec.get("t", [0, 0])
    if not isinstance(t, list) or len(t) != 2 or not all(isinstance(v, int) for v in t):
        raise ConfigError("periodic.t must be an integer pair")
    scfg = SearchConfig(
        GridSpec(int(sec.get("seed_resolution", 16))),
        cfg.tolerances["newton_tol"],
        int(sec.get("max_newton_iters", 50)),
        cfg.tolerances["dedupe_radius"],
    )
    diagnostics = []
    recs = run.timed("find_periodic", find_periodic, run.lift, q, t, scfg, diagnostics)
    recs = sorted(recs, key=lambda r: (r.rotation_vector, r.point))
    rows = [
        (r.point[0], r.point[1], r.q, r.t[0], r.t[1], r.residual, r.classification.value, r.trace)
        for r in recs
    ]
    write_csv(run.out / "periodic.csv", ["x", "y", "q", "p", "s", "residual", "type", "trace"], rows)
    write_json(
        run.out / "periodic.json",
        run.diag({"map": _map_json(cfg), "records": recs, "diagnostics": diagnostics}),
    )
    for r in recs:
        print(f"{r.point[0]:.12f} {r.point[1]:.12f}  {r.classification.value:9s} trace={r.trace:.10g}")
    return EXIT_OK


COMMANDS = {
    "rotset": cmd_rotset,
    "interior": cmd_interior,
    "deviate": cmd_deviate,
    "staircase": cmd_staircase,
    "periodic": cmd_periodic,
    "leb": cmd_leb,
}


def build_parser():
    p = argparse.ArgumentParser(prog="torusrot", description="Rotation sets of torus maps.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, metavar="PATH")
    p.add_argument("--out", metavar="DIR", help="output directory (overrides output_dir)")
    p.add_argument("--threads", type=int, metavar="N", help="worker threads (default: all cores)")
    p.add_argument("--refine", action="store_true", help="refine hulls by support values")
    p.add_argument("--seed", type=int, metavar="N", help="override the config seed")
    p.add_argument("--timings", action="store_true", help="record timings in JSON output")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
        threads = args.threads if args.threads is not None else cfg.threads
        if threads is not None and threads < 1:
            raise ConfigError("--threads must be >= 1")
        out = Path(args.out if args.out is not None else cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        run = _Run(cfg, out, threads, args.refine, args.timings)
        return COMMANDS[args.command](run)
    except (ConfigError, PeriodicityError, ExpressionError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EvaluationFault as exc:
        print(f"evaluation fault: {exc}", file=sys.stderr)
        return EXIT_FAULT
    except ArgumentError as exc:
        print(f"invalid setting: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TorusRotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
