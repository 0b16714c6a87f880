"""Command line interface: ``conjfun solve | study | mesh | check-euler``."""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from conjfun import io
from conjfun.fem.basis import MAX_DEGREE
from conjfun.geometry import DomainSpec, GeometryError
from conjfun.mesh import (GradingRule, MalformedInputError, Mesh, cube_quads, euler_defect_check,
                          genus2_quad_counts, polygon_mesh_counts, torus_quad_grid)
from conjfun.modulus import sample_map
from conjfun.pipeline import CSV_COLUMNS, fit_exponential_rate, prepare_mesh, run

BUILTIN = ("square", "rect_h", "slit_square", "two_holes_disk", "random_segments_5",
           "quarter_torus", "hemisphere_segments_5")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """Everything a run needs besides the domain itself."""

    spec: DomainSpec
    h: float
    p: int = 4
    p_range: tuple = (2, 8)
    grading: GradingRule | None = None
    out: Path = Path("out")
    density: int = 4
    checker: int = 8
    samples: int = 200
    estimate: bool = True
    overkill: int | None = None
    origin: str = "z2"
    extra: dict = field(default_factory=dict)

    def validate(self) -> None:
        lo, hi = self.p_range
        if not 1 <= lo <= hi:
            raise ConfigError(f"bad p range {self.p_range}")
        top = max(hi, self.p) + (2 if self.estimate else 0)
        if self.overkill:
            top = max(top, max(hi, self.p) + self.overkill)
        if top > MAX_DEGREE:
            raise ConfigError(f"degree {top} needed but the basis stops at {MAX_DEGREE}")
        if not self.h > 0:
            raise ConfigError("mesh size h must be positive")


def load_domain_config(name_or_path: str) -> dict:
    """A config file path, or the name of a built-in config."""
    p = Path(name_or_path)
    if p.exists():
        return json.loads(p.read_text())
    if name_or_path in BUILTIN:
        return json.loads(resources.files("conjfun.configs").joinpath(f"{name_or_path}.json").read_text())
    raise ConfigError(f"no such config file or built-in config: {name_or_path}")


def _parse_grade(text: str | None):
    if text is None:
        return None
    try:
        q, L = text.split(",")
        return GradingRule(float(q), int(L))
    except ValueError as exc:
        raise ConfigError(f"--grade expects q,L (e.g. 0.15,8), got {text!r}") from exc


def build_run_config(args, study: bool = False) -> RunConfig:
    cfg = load_domain_config(args.config)
    spec = DomainSpec.from_config(cfg, seed=args.seed)
    spec.validate()
    r = dict(cfg.get("run") or {})
    p = args.p if getattr(args, "p", None) is not None else int(r.get("p", 4))
    if getattr(args, "p_range", None):
        lo, hi = (int(v) for v in args.p_range.split(":"))
    else:
        lo, hi = r.get("p_range", (2, max(p, 2)))
    grading = _parse_grade(args.grade)
    if grading is None and r.get("grading"):
        grading = GradingRule(float(r["grading"]["q"]), int(r["grading"]["levels"]))
    elif grading is None and "grading" not in r:
        # grading depth follows the (largest) degree by default
        grading = GradingRule(0.15, hi if study else p)
    rc = RunConfig(spec=spec, h=args.h if args.h is not None else float(r.get("h", 0.25)), p=p,
                   p_range=(int(lo), int(hi)), grading=grading, out=Path(args.out),
                   density=args.density, checker=args.checker, samples=args.samples,
                   estimate=not args.no_estimate, overkill=getattr(args, "overkill", None), origin=args.origin)
    rc.validate()
    return rc


def _report(rc: RunConfig, res, mesh: Mesh) -> dict:
    rep = res.report.to_dict()
    rep.update({
        "name": rc.spec.name,
        "p": res.p,
        "N": res.N,
        "mesh": {"nodes": mesh.n_nodes, "elements": mesh.n_elements, "holes": mesh.n_holes,
                 "h": rc.h, "grading": None if rc.grading is None else [rc.grading.q, rc.grading.levels]},
        "chart": rc.spec.chart.to_config(),
        "eta_primary": res.est_primary.eta if res.est_primary else None,
        "eta_conjugate": res.est_conjugate.eta if res.est_conjugate else None,
        "flags": list(res.setup.flags),
        "origin": rc.origin,
    })
    return rep


def cmd_solve(args) -> int:
    rc = build_run_config(args)
    rc.out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    mesh = prepare_mesh(rc.spec, rc.h, rc.grading)
    t_mesh = time.perf_counter() - t0
    res = run(mesh, rc.spec.chart, rc.p, rc.spec, rc.estimate, rc.overkill, rc.samples, rc.origin)
    io.write_json(rc.out / "report.json", _report(rc, res, mesh))
    io.write_json(rc.out / "timings.json", {**res.timings, "mesh": t_mesh, "factorizations": res.factorizations})
    samples = sample_map(res.phi, rc.density, rc.checker)
    with open(rc.out / "map.csv", "w") as fh:
        fh.write("element,x,y,u,v,checker\n")
        for row in samples.rows():
            fh.write(",".join(io._fmt_float(c) if isinstance(c, float) else str(c) for c in row) + "\n")
    io.plot_canonical(rc.out / "canonical.svg", res.report.canonical, rc.spec.name)
    io.plot_map(rc.out / "map.svg", samples, mesh, rc.density, rc.spec.name)
    if args.dump_conjugate:
        io.write_json(rc.out / "conjugate.json", res.setup.to_dict())
    print(f"{rc.spec.name}: p={res.p} N={res.N} M={res.report.M:.16g} "
          f"M_conj={res.report.M_conj:.16g} reci={res.report.reci:.3e}")
    return 0


def cmd_study(args) -> int:
    rc = build_run_config(args, study=True)
    rc.out.mkdir(parents=True, exist_ok=True)
    mesh = prepare_mesh(rc.spec, rc.h, rc.grading)
    rows = []
    for p in range(rc.p_range[0], rc.p_range[1] + 1):
        res = run(mesh, rc.spec.chart, p, rc.spec, rc.estimate, rc.overkill, rc.samples, rc.origin)
        rows.append(res.row())
        print(f"p={p} N={res.N} reci={res.report.reci:.3e}", flush=True)
        if args.dump_conjugate:
            io.write_json(rc.out / f"conjugate_p{p}.json", res.setup.to_dict())
    io.write_csv(rc.out / "convergence.csv", CSV_COLUMNS, rows)
    io.plot_convergence(rc.out / "convergence.svg", rows, rc.spec.name)
    if len(rows) >= 2 and all(r["reci"] > 0 for r in rows):
        slope, _, r2 = fit_exponential_rate([r["N"] for r in rows], [r["reci"] for r in rows])
        print(f"fit log(reci) ~ N^(1/3): slope={slope:.4f} R^2={r2:.4f}")
    return 0


def cmd_mesh(args) -> int:
    cfg = load_domain_config(args.spec)
    spec = DomainSpec.from_config(cfg, seed=args.seed)
    spec.validate()
    mesh = prepare_mesh(spec, args.h, _parse_grade(args.grade))
    mesh.save(args.out)
    print(f"{mesh.n_nodes} nodes, {mesh.n_elements} elements -> {args.out}")
    return 0


def cmd_check_euler(args) -> int:
    if args.preset == "torus":
        val, k = polygon_mesh_counts(torus_quad_grid(6, 8))
        genus = 1
    elif args.preset == "cube":
        val, k = polygon_mesh_counts(cube_quads())
        genus = 0
    elif args.preset == "genus2":
        val, k = genus2_quad_counts()
        genus = 2
    else:
        if args.valences is None or args.faces is None or args.genus is None:
            raise ConfigError("give --preset or all of --valences, --faces, --genus")
        val = [int(v) for v in args.valences.split(",")]
        k = [int(v) for v in args.faces.split(",")]
        genus = args.genus
    out = euler_defect_check(val, k, genus)
    print(json.dumps(out, sort_keys=True))
    return 0 if out["valid"] else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="conjfun", description=__doc__)
    ap.add_argument("--seed", type=int, default=None, help="override the seed of random slit layouts")
    sub = ap.add_subparsers(dest="command", required=True)

    def run_args(sp):
        sp.add_argument("config", help="config file or built-in name (" + ", ".join(BUILTIN) + ")")
        sp.add_argument("--h", type=float, default=None, help="target mesh size")
        sp.add_argument("--grade", default=None, help="geometric grading q,L")
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--density", type=int, default=4, help="map samples per element edge")
        sp.add_argument("--checker", type=int, default=8, help="checkerboard cells per unit")
        sp.add_argument("--samples", type=int, default=200, help="boundary samples per hole")
        sp.add_argument("--no-estimate", action="store_true", help="skip the error estimator")
        sp.add_argument("--origin", choices=("z1", "z2"), default="z2", help="corner mapped to (0, 0)")
        sp.add_argument("--dump-conjugate", action="store_true", help="write the reduced matrices and potentials")
        sp.add_argument("--seed", type=int, default=argparse.SUPPRESS)

    sp = sub.add_parser("solve", help="compute moduli, potentials and the map at one degree")
    run_args(sp)
    sp.add_argument("--p", type=int, default=None)
    sp.add_argument("--overkill", type=int, default=None, help="also solve at p+K for error proxies")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("study", help="convergence study over a range of degrees on a fixed mesh")
    run_args(sp)
    sp.add_argument("--p-range", default=None, help="lo:hi, inclusive")
    sp.add_argument("--overkill", type=int, default=None)
    sp.set_defaults(func=cmd_study)

    sp = sub.add_parser("mesh", help="generate and grade a mesh")
    sp.add_argument("--spec", required=True)
    sp.add_argument("--h", type=float, required=True)
    sp.add_argument("--grade", default=None)
    sp.add_argument("--out", required=True)
    sp.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    sp.set_defaults(func=cmd_mesh)

    sp = sub.add_parser("check-euler", help="vertex/face defect balance of a closed quad layout")
    sp.add_argument("--preset", choices=("torus", "cube", "genus2"))
    sp.add_argument("--valences")
    sp.add_argument("--faces")
    sp.add_argument("--genus", type=int)
    sp.set_defaults(func=cmd_check_euler)
    return ap


def _fail(code: int, exc: Exception) -> int:
    print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, GeometryError, MalformedInputError, json.JSONDecodeError, KeyError, FileNotFoundError) as exc:
        return _fail(2, exc)
    except Exception as exc:  # noqa: BLE001
        return _fail(1, exc)
