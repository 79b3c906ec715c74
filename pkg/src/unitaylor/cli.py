"""Batch front end: construct, verify, check, scan, exhaustion.

Exit codes: 0 success or pass, 1 configuration error, 2 mathematical failure.
Diagnostics go to standard error as JSON lines.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from importlib import resources
from pathlib import Path

import jsonschema

from .engine import (
    Caps, Certificate, ConstructionFailure, RequirementError, VerificationRefused, construct, requirement_from_json,
    universal_point_scan, verify,
)
from .geometry import DomainScene, absorbing_family_check, complement_connected, exhaustion_set

OK, CONFIG, FAILED = 0, 1, 2


class ConfigError(Exception):
    pass


class _JsonLines(logging.Handler):
    def emit(self, record: logging.LogRecord) -> None:
        msg = record.getMessage()
        try:
            doc = json.loads(msg)
        except ValueError:
            doc = {"message": msg}
        if not isinstance(doc, dict):
            doc = {"message": msg}
        doc.setdefault("level", record.levelname.lower())
        sys.stderr.write(json.dumps(doc, sort_keys=True) + "\n")


def diag(event: str, **kw) -> None:
    sys.stderr.write(json.dumps({"event": event, **kw}, sort_keys=True, default=str) + "\n")


def schema(name: str) -> dict:
    return json.loads(resources.files("unitaylor").joinpath("schemas", f"{name}.json").read_text())


def validate(doc, name: str) -> None:
    try:
        jsonschema.validate(doc, schema(name))
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path)
        raise ConfigError(f"{name} document invalid at '{path}': {exc.message}") from None


def load_json(path: str, name: str):
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from None
    validate(doc, name)
    return doc


def write_json(path: str | None, doc: dict) -> None:
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def load_scene(path: str) -> tuple[DomainScene, dict]:
    doc = load_json(path, "scene")
    try:
        scene = DomainScene.from_json(doc)
        scene.validate()
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"scene: {exc}") from None
    return scene, doc


def caps_from(doc: dict) -> Caps:
    c = doc.get("caps", {})
    base = Caps()
    return Caps(int(c.get("degree", base.max_terms)), int(c.get("retries", base.retries)),
                int(c.get("fit_points", base.fit_points)))


def load_schedule(path: str, scene: DomainScene) -> list:
    doc = load_json(path, "schedule")
    try:
        return [requirement_from_json(r, scene) for r in doc]
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"schedule: {exc}") from None


def parse_point(text: str) -> tuple[complex, ...]:
    """'re,im' or Python complex literals; coordinates separated by ';'."""
    out = []
    for part in text.split(";"):
        part = part.strip().replace(" ", "")
        try:
            if "," in part:
                re_, im = part.split(",")
                out.append(complex(float(re_), float(im)))
            else:
                out.append(complex(part.replace("i", "j")))
        except ValueError:
            raise ConfigError(f"cannot parse point {text!r}") from None
    return tuple(out)


def fmt(x: float) -> str:
    return repr(float(x))


# --- commands ---

def cmd_construct(args) -> int:
    scene, doc = load_scene(args.scene)
    reqs = load_schedule(args.schedule, scene)
    try:
        cert = construct(scene, reqs, caps_from(doc))
    except RequirementError as exc:
        raise ConfigError(str(exc)) from None
    except ConstructionFailure as exc:
        report = {"command": "construct", **exc.to_json()}
        write_json(args.out, report)
        diag("construct-failed", requirement=exc.requirement, binding=exc.binding, message=str(exc))
        return FAILED
    out = cert.to_json()
    validate(out, "certificate")
    if args.out in (None, "-"):
        sys.stdout.write(cert.dumps())
    else:
        Path(args.out).write_text(cert.dumps())
    diag("construct-done", cuts=cert.cuts, requirements=len(reqs))
    return OK


def cmd_verify(args) -> int:
    scene, _ = load_scene(args.scene)
    reqs = load_schedule(args.schedule, scene)
    doc = load_json(args.cert, "certificate")
    cert = Certificate.from_json(doc)
    try:
        rep = verify(cert, scene, reqs, args.resolution)
    except VerificationRefused as exc:
        raise ConfigError(f"verification refused: {exc}") from None
    out = {"command": "verify", "status": "pass" if rep.passed else "fail", **rep.to_json()}
    for e, r in zip(out["entries"], reqs):
        e["center_mode"] = r.mode
    validate(out, "report")
    lines = [f"{'id':<12} {'cut':>5} {'E_K':>12} {'E_L':>12} {'eps':>10}  result"]
    for e in out["entries"]:
        lines.append(f"{e['id']:<12} {e['cut']:>5} {e['E_K']:>12.4e} {e['E_L']:>12.4e} {e['epsilon']:>10.2e}  "
                     + ("pass" if e["passed"] else "FAIL"))
    lines += [f"problem: {p}" for p in out["problems"]]
    lines.append("verdict: " + ("pass" if rep.passed else "fail"))
    sys.stdout.write("\n".join(lines) + "\n")
    if args.report:
        write_json(args.report, out)
    return OK if rep.passed else FAILED


def cmd_check(args) -> int:
    scene, _ = load_scene(args.scene)
    factors, feasible = [], True
    for i, (dom, por) in enumerate(zip(scene.domains, scene.portions), start=1):
        rep = absorbing_family_check(dom, por)
        feasible &= rep.feasible
        factors.append({"factor": i, **rep.to_json()})
        line = f"factor {i}: {'feasible' if rep.feasible else 'infeasible'}"
        line += f", clopen={str(rep.clopen).lower()}"
        if rep.witness is not None:
            line += f", witness {rep.witness.real:.6g}{rep.witness.imag:+.6g}i"
        if rep.reason:
            line += f" ({rep.reason})"
        print(line)
    out = {"command": "check", "status": "feasible" if feasible else "infeasible", "factors": factors}
    validate(out, "report")
    if args.report:
        write_json(args.report, out)
    print("feasible" if feasible else "infeasible")
    return OK if feasible else FAILED


def cmd_scan(args) -> int:
    cert = Certificate.from_json(load_json(args.cert, "certificate"))
    zeta = parse_point(args.zeta) if args.zeta else cert.f.center
    z = parse_point(args.z)
    if len(zeta) != cert.f.dim or len(z) != cert.f.dim:
        raise ConfigError(f"points must have {cert.f.dim} coordinate(s)")
    try:
        x0, x1, y0, y1, cell = (float(v) for v in args.grid.split(","))
    except ValueError:
        raise ConfigError(f"--grid expects x0,x1,y0,y1,cell, got {args.grid!r}") from None
    horizon = args.horizon if args.horizon is not None else max(cert.f.max_enum_index, 0)
    rep = universal_point_scan(cert.f, zeta, z, horizon, (x0, x1, y0, y1), cell)
    rows = [(k, fmt(v.real), fmt(v.imag)) for k, v in rep.values]
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("k", "re", "im"))
            w.writerows(rows)
    summary = {"command": "scan", "status": "success", **rep.to_json()}
    del summary["values"]
    validate(summary, "report")
    print(f"coverage: {len(rep.cells)} of {rep.total_cells} cells ({rep.coverage:.4f}) over indices 0..{horizon}")
    if args.report:
        write_json(args.report, summary)
    return OK


def cmd_exhaustion(args) -> int:
    scene, _ = load_scene(args.scene)
    if not 1 <= args.factor <= scene.dim:
        raise ConfigError(f"--factor must be between 1 and {scene.dim}")
    if args.n < 1:
        raise ConfigError("--n must be >= 1")
    dom, por = scene.domains[args.factor - 1], scene.portions[args.factor - 1]
    L = exhaustion_set(dom, por, args.n, args.h or scene.grid.validation_density)
    cert = complement_connected(L, scene.grid.box_margin, scene.grid.connectivity_resolution)
    pts = L.validation_points
    target = open(args.csv, "w", newline="") if args.csv else sys.stdout
    try:
        w = csv.writer(target, lineterminator="\n")
        w.writerow(("re", "im", "boundary"))
        for p, b in zip(pts, L.validation_boundary):
            w.writerow((fmt(p.real), fmt(p.imag), int(b)))
    finally:
        if args.csv:
            target.close()
    out = {"command": "exhaustion", "status": "success", "n": args.n, "factor": args.factor,
           "points": int(pts.size), "connectivity": cert.to_json()}
    validate(out, "report")
    if args.report:
        write_json(args.report, out)
    diag("exhaustion", n=args.n, factor=args.factor, points=int(pts.size), verdict=cert.verdict)
    return OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="unitaylor", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="stage-level diagnostics on stderr")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="build a certificate for a schedule")
    c.add_argument("scene")
    c.add_argument("schedule")
    c.add_argument("-o", "--out", help="certificate path (stdout if omitted)")
    c.set_defaults(func=cmd_construct)

    v = sub.add_parser("verify", help="re-check a certificate on finer grids")
    v.add_argument("cert")
    v.add_argument("scene")
    v.add_argument("schedule")
    v.add_argument("--resolution", type=float, default=2.0, help="grid refinement multiplier")
    v.add_argument("--report", help="JSON report path")
    v.set_defaults(func=cmd_verify)

    k = sub.add_parser("check", help="scene invariants and absorbing-family feasibility")
    k.add_argument("scene")
    k.add_argument("--report", help="JSON report path")
    k.set_defaults(func=cmd_check)

    s = sub.add_parser("scan", help="partial sums of f at one point and the value cells they visit")
    s.add_argument("cert")
    s.add_argument("--zeta", help="expansion center, default the certificate's")
    s.add_argument("--z", required=True, help="evaluation point, e.g. 2.5,0")
    s.add_argument("--grid", default="-4,4,-4,4,1", help="x0,x1,y0,y1,cell")
    s.add_argument("--horizon", type=int)
    s.add_argument("--csv", help="visited values CSV (k, re, im)")
    s.add_argument("--report", help="JSON summary path")
    s.set_defaults(func=cmd_scan)

    e = sub.add_parser("exhaustion", help="sample one exhaustion compact as CSV")
    e.add_argument("scene")
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--factor", type=int, default=1)
    e.add_argument("--h", type=float, help="grid spacing, default the scene's validation density")
    e.add_argument("--csv", help="output path (stdout if omitted)")
    e.add_argument("--report", help="JSON report path")
    e.set_defaults(func=cmd_exhaustion)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logger = logging.getLogger("unitaylor")
    logger.handlers[:] = [_JsonLines()]
    logger.setLevel(logging.INFO if args.verbose else logging.WARNING)
    logger.propagate = False
    try:
        return args.func(args)
    except ConfigError as exc:
        diag("config-error", message=str(exc))
        return CONFIG
    except (ValueError, KeyError, TypeError) as exc:
        diag("config-error", message=f"{type(exc).__name__}: {exc}")
        return CONFIG


if __name__ == "__main__":
    sys.exit(main())
