"""Command-line front end: ``topodd <command> ...``.

Exit codes: 0 success, 1 verification failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import platform
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from . import averaging as avg
from . import groups as grp
from . import lattice as lat
from . import presets
from . import scheduler as sch
from .averaging import HamiltonianSpec
from .pauli import PauliString
from .sim.evolve import FidelityTrace, calibrate_gamma, evolve
from .sim.model import SimulationError, SystemSpec, bath_from_json

log = logging.getLogger("topodd")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
MANIFEST_SCHEMA = "topodd.manifest/1"
CLASSES = ("HSE", "HSE-zonly", "local", "heisenberg", "nn", "logical")


class UsageError(Exception):
    pass


# -- helpers ---------------------------------------------------------------------

def _parse_planar(text: str) -> lat.LatticeSpec:
    try:
        r, c = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise UsageError(f"--planar expects RxC, got {text!r}") from None
    return lat.LatticeSpec.planar(r, c)


def _lattice_from_args(args, default: lat.LatticeSpec) -> lat.LatticeSpec:
    if args.torus is not None and args.planar is not None:
        raise UsageError("give either --torus or --planar")
    if args.torus is not None:
        return lat.LatticeSpec.torus(args.torus)
    if args.planar is not None:
        return _parse_planar(args.planar)
    return default


def _add_lattice_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--torus", type=int, metavar="N", help="N x N torus")
    p.add_argument("--planar", metavar="RxC", help="planar patch, e.g. 1x2")


def _emit(doc: dict, out: str | None = None) -> None:
    text = json.dumps(doc, indent=1)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _versions() -> dict:
    return {"topodd": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


# -- lattice ---------------------------------------------------------------------

def cmd_lattice(args) -> int:
    L = _lattice_from_args(args, None)
    if L is None:
        raise UsageError("lattice needs --torus N or --planar RxC")
    D, mapping = lat.dual(L)
    all_b = lat.boundary(L, lat.all_faces(L))
    _emit({
        "schema": "topodd.lattice/1",
        "lattice": L.to_json(),
        "faces": L.face_count,
        "edges": L.edge_count,
        "vertices": L.vertex_count,
        "nearest_neighbor_pairs": len(lat.nearest_neighbor_pairs(L)),
        "boundary_of_all_faces": len(all_b),
        "dual": {"lattice": D.to_json(), "faces": D.face_count, "edges": D.edge_count,
                 "vertices": D.vertex_count, "edge_map": list(mapping)},
    })
    return EXIT_OK


# -- groups ----------------------------------------------------------------------

def cmd_groups(args) -> int:
    L = _lattice_from_args(args, lat.LatticeSpec.torus(2))
    g = grp.build(args.group, L, full=not args.generators_only)
    doc = g.to_json() if not args.generators_only else {
        "schema": "topodd.group/1", "label": g.label.value, "n_qubits": g.n_qubits,
        "order": g.order, "generators": [p.to_text() for p in g.generators]}
    doc["lattice"] = L.to_json()
    _emit(doc, args.out)
    return EXIT_OK


# -- verify ----------------------------------------------------------------------

def _class_hamiltonian(cls: str, L: lat.LatticeSpec) -> HamiltonianSpec:
    n = L.edge_count
    if cls in ("HSE", "HSE-zonly"):
        return avg.coupling_hamiltonian(n)
    if cls == "local":
        return avg.local_terms(n)
    if cls == "heisenberg":
        h = HamiltonianSpec(n)
        for a, b in lat.nearest_neighbor_pairs(L):
            h = h + avg.heisenberg(n, a, b)
        return h
    if cls == "nn":
        terms = [avg.pair_term(n, a, b, sa, sb) for a, b in lat.nearest_neighbor_pairs(L)
                 for sa in avg.AXES for sb in avg.AXES]
        return HamiltonianSpec(n, tuple(terms))
    if cls == "logical":
        return HamiltonianSpec.of(n, *avg.logical_operators(L).values())
    raise UsageError(f"unknown class {cls!r}")


def _x_part(h: HamiltonianSpec) -> HamiltonianSpec:
    return HamiltonianSpec(h.n_qubits, tuple(t for t in h.terms if t.system.z == 0))


def _average_with(name: str, L: lat.LatticeSpec, h: HamiltonianSpec) -> tuple[HamiltonianSpec, str]:
    """Average under the named group; ``Txz`` is applied as T^x after T^z."""
    key = name.lower()
    if key == "txz":
        return avg.average(grp.build_tx(L), avg.average(grp.build_tz(L), h)), "xz"
    g = grp.build(name, L, full=max(L.rows, L.cols) <= grp.DEFAULT_CAP)
    kind = {"bz": "z", "tz": "z", "tzplanar": "z", "bx": "x", "tx": "x", "txplanar": "x",
            "bxz": "xz"}[key]
    return avg.average(g, h), kind


def cmd_verify(args) -> int:
    L = _lattice_from_args(args, lat.LatticeSpec.torus(3))
    h = _class_hamiltonian(args.cls, L)
    out, kind = _average_with(args.group, L, h)
    if args.cls == "logical":
        want = h
    elif args.cls == "HSE-zonly":
        want = avg.z_part(h)
    else:
        want = {"z": avg.z_part, "x": _x_part, "xz": lambda s: HamiltonianSpec(s.n_qubits)}[kind](h)
    checks = [avg.expect_equal(f"{args.cls}_under_{args.group}", out, want,
                               terms_in=len(h), terms_out=len(out))]
    if args.cls == "heisenberg" and L.is_torus and args.group.lower() in ("bz", "bxz"):
        a, b = lat.nearest_neighbor_pairs(L)[0]
        checks += avg.verify_heisenberg(L, a, b).checks
    ok = all(c.passed for c in checks)
    _emit({
        "schema": "topodd.verify/1",
        "group": args.group,
        "class": args.cls,
        "lattice": L.to_json(),
        "status": "pass" if ok else "fail",
        "checks": [c.to_json() for c in checks],
        "surviving_terms": [t.to_text() for t in out.terms],
    })
    return EXIT_OK if ok else EXIT_FAIL


# -- schedule --------------------------------------------------------------------

def build_schedule(group: str, mode: str, L: lat.LatticeSpec, tau: float) -> sch.Schedule:
    key = group.lower()
    if key == "txz":
        tz, tx = grp.build_tz(L), grp.build_tx(L)
        if mode == "ideal":
            return sch.nest(tx, sch.compile_ideal(tz, tau=tau))
        return sch.compile_eulerian(sch.product_group(tz, tx), tau=tau)
    g = grp.build(group, L, full=True)
    if mode == "ideal":
        return sch.compile_ideal(g, tau=tau)
    return sch.compile_eulerian(g, tau=tau)


def cmd_schedule(args) -> int:
    L = _lattice_from_args(args, presets.PATCH)
    s = build_schedule(args.group, args.mode, L, args.tau)
    if args.logical:
        if args.mode != "eulerian":
            raise UsageError("--logical needs --mode eulerian")
        g = grp.build(args.group, L) if args.group.lower() != "txz" else sch.product_group(
            grp.build_tz(L), grp.build_tx(L))
        s = sch.insert_logical(s, g, PauliString.from_text(args.logical, L.edge_count))
    doc = s.to_json()
    doc["lattice"] = L.to_json()
    _emit(doc, args.out)
    return EXIT_OK


# -- simulate --------------------------------------------------------------------

def _default_config() -> dict:
    return {"lattice": presets.PATCH.to_json(), "axes": "".join(presets.xy_axes()),
            "omega_ab": 0.0, "bath": None, "schedule": None, "t_final": 3.2,
            "sample_dt": 0.1, "seed": 0}


def _load_config(path: str | None) -> dict:
    cfg = _default_config()
    if path:
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from None
        if doc.get("schema") == MANIFEST_SCHEMA:
            doc = doc["config"]
        unknown = set(doc) - set(cfg)
        if unknown:
            raise UsageError(f"unknown config keys {sorted(unknown)}")
        cfg.update(doc)
    return cfg


def _resolve_schedule(ref, L: lat.LatticeSpec, tau: float) -> sch.Schedule | None:
    """``None``/"none", an inline schedule document, a file path, or "Group:mode"."""
    if ref is None or ref == "none":
        return None
    if isinstance(ref, dict):
        return sch.Schedule.from_json(ref)
    p = Path(ref)
    if p.exists():
        return sch.Schedule.from_json(p.read_text(encoding="utf-8"))
    if ":" in ref:
        group, mode = ref.split(":", 1)
        return build_schedule(group, mode, L, tau)
    raise UsageError(f"cannot resolve schedule {ref!r}")


def run_config(cfg: dict) -> tuple[FidelityTrace, dict]:
    L = lat.LatticeSpec.from_json(cfg["lattice"])
    system = SystemSpec(L, tuple(cfg["axes"]), float(cfg["omega_ab"]))
    bath = bath_from_json(cfg["bath"])
    schedule = _resolve_schedule(cfg["schedule"], L, float(cfg.get("tau", presets.TAU)))
    trace = evolve(schedule, system, bath, float(cfg["t_final"]), float(cfg["sample_dt"]))
    resolved = dict(cfg)
    resolved["schedule"] = None if schedule is None else schedule.to_json()
    return trace, resolved


def _manifest(command: list[str], config: dict, seeds: dict, outputs: list[str]) -> dict:
    return {"schema": MANIFEST_SCHEMA, "command": command, "config": config, "seeds": seeds,
            "versions": _versions(), "outputs": outputs}


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    if args.schedule is not None:
        cfg["schedule"] = args.schedule
    if args.t is not None:
        cfg["t_final"] = args.t
    if args.sample_dt is not None:
        cfg["sample_dt"] = args.sample_dt
    trace, resolved = run_config(cfg)
    csv = trace.to_csv()
    outputs = []
    if args.out:
        Path(args.out).write_text(csv, encoding="utf-8")
        outputs.append(args.out)
    else:
        sys.stdout.write(csv)
    manifest_path = args.manifest or (args.out + ".manifest.json" if args.out else None)
    if manifest_path:
        bath = resolved.get("bath") or {}
        _emit(_manifest(sys.argv[1:] if args.argv is None else args.argv, resolved,
                        {"seed": resolved.get("seed"), "bath": bath.get("seed")}, outputs),
              manifest_path)
    return EXIT_OK


# -- reproduce / calibrate ---------------------------------------------------------

def reproduce(name: str, out_dir: Path) -> dict:
    """Run a preset and write one CSV per case plus ``manifest.json``."""
    pre = presets.get(name)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs, summary, runs_doc = [], {}, []
    for run in pre.build():
        finals = {}
        for case, schedule in run.cases.items():
            trace = evolve(schedule, run.system, run.bath, pre.t_final, pre.sample_dt)
            stem = f"{name}_{run.tag + '_' if run.tag else ''}{case}.csv"
            (out_dir / stem).write_text(trace.to_csv(), encoding="utf-8")
            outputs.append(stem)
            finals[case] = trace.final
        summary[run.tag or name] = finals
        runs_doc.append({"tag": run.tag, "seed": run.seed, "system": run.system.to_json(),
                         "bath": run.bath.to_json(),
                         "schedules": {c: None if s is None else s.to_json()
                                       for c, s in run.cases.items()}})
    config = {"preset": name, "t_final": pre.t_final, "sample_dt": pre.sample_dt, "tau": pre.tau,
              "runs": runs_doc}
    manifest = _manifest(["reproduce", name], config,
                         {r["tag"] or name: r["seed"] for r in runs_doc}, outputs)
    manifest["final_fidelity"] = summary
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n", encoding="utf-8")
    return manifest


def cmd_reproduce(args) -> int:
    manifest = reproduce(args.preset, Path(args.out))
    _emit({"schema": "topodd.reproduce/1", "preset": args.preset, "out": args.out,
           "final_fidelity": manifest["final_fidelity"]})
    return EXIT_OK


def cmd_calibrate(args) -> int:
    system = SystemSpec(presets.PATCH, presets.xy_axes())
    t_final = args.t if args.t is not None else presets.PRESETS["fig7a"].t_final
    cal = calibrate_gamma(args.target, system, presets.bath_template(args.seed), t_final,
                             bracket=(0.0, args.upper))
    _emit({"schema": "topodd.calibration/1", "target": args.target, "t_final": t_final,
           "strength": cal.strength, "free_fidelity": cal.fidelity, "iterations": cal.iterations,
           "coupling_seed": args.seed, "pinned_strength": presets.CALIBRATED_STRENGTH})
    return EXIT_OK


# -- entry point -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="topodd", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lattice", help="counts and dual summary")
    _add_lattice_flags(p)
    p.set_defaults(func=cmd_lattice)

    p = sub.add_parser("groups", help="build a decoupling group and dump it as JSON")
    p.add_argument("action", choices=["dump"])
    p.add_argument("--group", required=True)
    p.add_argument("--generators-only", action="store_true")
    p.add_argument("--out")
    _add_lattice_flags(p)
    p.set_defaults(func=cmd_groups)

    p = sub.add_parser("verify", help="check a decoupling identity exactly")
    p.add_argument("--group", required=True)
    p.add_argument("--class", dest="cls", required=True, choices=CLASSES)
    _add_lattice_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("schedule", help="compile a pulse schedule")
    p.add_argument("--group", required=True)
    p.add_argument("--mode", choices=["ideal", "eulerian"], default="ideal")
    p.add_argument("--tau", type=float, default=presets.TAU)
    p.add_argument("--logical", help="Pauli text, e.g. '+ X{0,2}', for an Eulerian gate slot")
    p.add_argument("--out")
    _add_lattice_flags(p)
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("simulate", help="evolve a configuration and write F(t) as CSV")
    p.add_argument("--config", help="config JSON or a previous run manifest")
    p.add_argument("--schedule", help="'none', a schedule JSON file, or GROUP:MODE")
    p.add_argument("--t", type=float, help="final time")
    p.add_argument("--sample-dt", type=float)
    p.add_argument("--out", help="CSV path (stdout if omitted)")
    p.add_argument("--manifest", help="manifest path (default: <out>.manifest.json)")
    p.set_defaults(func=cmd_simulate, argv=None)

    p = sub.add_parser("reproduce", help="run a comparison preset (fig7a, fig7b, fig8)")
    p.add_argument("preset", choices=sorted(presets.PRESETS))
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("calibrate", help="bisect the bath strength for a free-evolution target")
    p.add_argument("--target", type=float, default=presets.CALIBRATION_TARGET)
    p.add_argument("--t", type=float)
    p.add_argument("--seed", type=int, default=presets.COUPLING_SEED)
    p.add_argument("--upper", type=float, default=0.05, help="upper end of the strength bracket")
    p.set_defaults(func=cmd_calibrate)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "argv", 0) is None:
        args.argv = list(argv) if argv is not None else sys.argv[1:]
    try:
        return args.func(args)
    except (UsageError, lat.LatticeError, grp.GroupError, sch.ScheduleError, SimulationError,
            KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
