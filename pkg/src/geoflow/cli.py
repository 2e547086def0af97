"""The ``geoflow`` command line front end.

Subcommands: validate, trace, visit, gaps, fit, diophantine, octagon,
unfold.  Exit codes: 0 success, 1 domain error, 2 usage error.  Machine
readable output via --json where offered; CSV columns carry a canonical
exact expression next to a 15-digit decimal shadow, and the expression
column is authoritative.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from .density import (
    HypothesisViolated,
    OracleCapExceeded,
    aligned_square_visit,
    cascade_search,
    constants,
    endpoint_distance,
    find_visit_oracle,
    gap_profile,
    octagon_ledger,
    superdensity_fit,
)
from .exactnum import (
    Q,
    cf_digits,
    check_bad_approx_bound,
    certified_form_constant,
    decimal_text,
    empirical_c5,
    expr_text,
)
from .exactnum.cf import PreconditionError
from .flow import EdgeInterval, SingularHit, Slope, trace
from .netformat import NetFormatError, parse_expr_text, parse_net, serialize_net
from .presets import (
    GOLDEN_DIGIT_BOUND,
    SQRT2M1_DIGIT_BOUND,
    golden_slope,
    preset_documents,
    sqrt2m1_slope,
    octagon_slope,
    tower_octagon,
)
from .surfaces import SurfaceError, VerticalCoord, validate


class CliError(RuntimeError):
    pass


def _read_net(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        return fh.read()


def _load_document(path: str):
    try:
        return parse_net(_read_net(path))
    except NetFormatError as e:
        raise CliError("net format errors:\n" + "\n".join(str(d) for d in e.diagnostics))
    except OSError as e:
        raise CliError(str(e))


def _resolve_slope(doc, text: str) -> Slope:
    if text in doc.slopes:
        return Slope(doc.slopes[text])
    try:
        return Slope(parse_expr_text(doc.tower_spec, text))
    except NetFormatError as e:
        raise CliError(f"bad slope {text!r}: {e}")


def _edge_index(surface, label: int) -> int:
    try:
        return surface.face_index(label)
    except KeyError:
        raise CliError(f"no face labelled {label}")


def _pick_ledger(surface, slope):
    """Polysquare ledger for unit squares + quadratic slope; else norm-based."""
    unit_faces = all(f.width == 1 and f.height == 1 for f in surface.faces)
    cf = cf_digits(slope.alpha, 64)
    if unit_faces and cf.periodic_tail is not None:
        return constants(cf.max_digit, len(surface.faces))
    gens = {(g.exponent, g.radicand): g.name for g in surface.tower.generators}
    beta_name = gens.get((2, 2))
    if beta_name is None:
        raise CliError(
            "no ledger for this surface/slope pair (need unit squares with a "
            "quadratic slope, or a sqrt2 generator for the norm route)"
        )
    return octagon_ledger(slope.alpha, surface.tower.generator(beta_name))


def _cert_dict(cert, surface, slope):
    return {
        "schema": 1,
        "slope": expr_text(slope.alpha),
        "interval": {
            "edge": surface.edge_label(cert.interval.edge),
            "lo": expr_text(cert.interval.lo),
            "hi": expr_text(cert.interval.hi),
        },
        "t_star_h": expr_text(cert.t_star_h),
        "t_star": cert.time_float(slope),
        "reason": cert.reason,
        "steps": [
            {
                "dir": s.direction,
                "k": s.k,
                "edge": surface.edge_label(s.edge),
                "length": expr_text(s.length),
                "t_h": expr_text(s.t_h),
                "collapsed": s.collapsed,
            }
            for s in cert.steps
        ],
        "final": {
            "reason": cert.final.reason,
            "j_prev": cert.final.j_prev,
            "j_cur": cert.final.j_cur,
            "i_prev": cert.final.i_prev,
            "i_cur": cert.final.i_cur,
        },
    }


def certificate_from_dict(data, surface):
    """Rebuild a VisitCertificate from its JSON form (inverse of --certificate)."""
    from .density.visit import FinalEvent, SplitStep, VisitCertificate

    if data.get("schema") != 1:
        raise CliError("unsupported certificate schema")
    t = surface.tower
    iv = data["interval"]
    interval = EdgeInterval(
        _edge_index(surface, iv["edge"]),
        parse_expr_text(t, iv["lo"]),
        parse_expr_text(t, iv["hi"]),
    )
    steps = tuple(
        SplitStep(
            direction=s["dir"],
            k=s["k"],
            edge=_edge_index(surface, s["edge"]),
            length=parse_expr_text(t, s["length"]),
            t_h=parse_expr_text(t, s["t_h"]),
            collapsed=s["collapsed"],
        )
        for s in data["steps"]
    )
    f = data["final"]
    final = FinalEvent(
        reason=f["reason"], j_prev=f["j_prev"], j_cur=f["j_cur"],
        i_prev=f["i_prev"], i_cur=f["i_cur"],
    )
    return VisitCertificate(
        interval=interval,
        t_star_h=parse_expr_text(t, data["t_star_h"]),
        reason=data["reason"],
        steps=steps,
        final=final,
    )


# -- subcommands ---------------------------------------------------------------


def _cmd_validate(args):
    doc = _load_document(args.net)
    surface = doc.to_surface(check=False)
    report = validate(surface)
    if args.json:
        payload = {
            "schema": 1,
            "ok": report.ok,
            "faces": report.face_count,
            "edges": report.edge_count,
            "vertices": report.vertex_count,
            "genus": report.genus,
            "violations": [
                {"code": v.code, "message": v.message} for v in report.violations
            ],
            "vertex_classes": [
                {"angle_over_2pi": vc.angle_halfpis / 4, "singular": vc.singular}
                for vc in report.vertices
            ],
        }
        print(json.dumps(payload, indent=2))
    else:
        print(f"faces: {report.face_count}")
        print(f"edge pairs: {report.edge_count}")
        print(f"vertex classes: {report.vertex_count}")
        print(f"genus: {report.genus}")
        for vc in report.vertices:
            kind = "singular" if vc.singular else "regular"
            print(f"  vertex: angle {vc.angle_halfpis}/2*pi ({kind})")
        if report.violations:
            print("violations:")
            for v in report.violations:
                print(f"  [{v.code}] {v.message}")
    return 0 if report.ok else 1


def _cmd_trace(args):
    doc = _load_document(args.net)
    surface = doc.to_surface()
    slope = _resolve_slope(doc, args.slope)
    edge_label, y_text = args.start.split(",", 1)
    edge = _edge_index(surface, int(edge_label))
    y = parse_expr_text(surface.tower, y_text)
    if not (y > 0 and y < surface.edge_length(edge)):
        print("singular start: the start point is a vertex", file=sys.stderr)
        return 1
    try:
        result = trace(
            surface,
            VerticalCoord(edge, y),
            slope,
            reverse=args.reverse,
            max_crossings=args.crossings,
        )
    except SingularHit as e:
        print(f"singular start: {e}", file=sys.stderr)
        return 1
    out = csv.writer(sys.stdout, lineterminator="\n")
    print(f"# tower {_tower_text(surface.tower)}")
    print(f"# slope {expr_text(slope.alpha)}")
    print("# t = t_h_exact * sqrt(1 + slope^2)")
    out.writerow(["index", "t", "t_h_exact", "edge", "y", "y_exact", "n1", "n2", "n3", "n4"])
    for c in result.crossings:
        out.writerow(
            [
                c.index,
                f"{slope.time_float(c.t_h):.15g}",
                expr_text(c.t_h),
                surface.edge_label(c.edge),
                decimal_text(c.y),
                expr_text(c.y),
                c.n1,
                c.n2,
                c.n3,
                c.n4,
            ]
        )
    if result.truncated:
        print(f"# truncated: singular hit: {result.singular}", file=sys.stderr)
        return 1
    return 0


def _tower_text(tower_spec):
    gens = tower_spec.generators
    return ", ".join(f"{g.name}^{g.exponent}={g.radicand}" for g in gens) or "(rational)"


def _cmd_visit(args):
    doc = _load_document(args.net)
    surface = doc.to_surface()
    slope = _resolve_slope(doc, args.slope)
    edge_label, lo_text, hi_text = args.interval.split(",", 2)
    edge = _edge_index(surface, int(edge_label))
    qr = EdgeInterval(
        edge,
        parse_expr_text(surface.tower, lo_text),
        parse_expr_text(surface.tower, hi_text),
    )
    ledger = _pick_ledger(surface, slope)
    oracle = find_visit_oracle(surface, qr, slope)
    cert = cascade_search(surface, qr, slope, ledger)
    sep = endpoint_distance(surface, qr, slope, cert.t_star_h, ledger)
    payload = {
        "schema": 1,
        "interval": {
            "edge": surface.edge_label(edge),
            "lo": expr_text(qr.lo),
            "hi": expr_text(qr.hi),
        },
        "oracle": {
            "t_h": expr_text(oracle.t_h),
            "t": slope.time_float(oracle.t_h),
            "crossings_scanned": oracle.crossings_scanned,
        },
        "cascade": {
            "t_h": expr_text(cert.t_star_h),
            "t": cert.time_float(slope),
            "reason": cert.reason,
            "steps": len(cert.steps),
        },
        "endpoint_separation": {
            "bottom": decimal_text(sep.dist_bottom),
            "top": decimal_text(sep.dist_top),
            "ok": sep.ok,
        },
    }
    if args.certificate:
        with open(args.certificate, "w", encoding="utf-8") as fh:
            json.dump(_cert_dict(cert, surface, slope), fh, indent=2)
            fh.write("\n")
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        print(f"oracle visit:  t = {payload['oracle']['t']:.6g}  "
              f"(t_h = {payload['oracle']['t_h']})")
        print(f"cascade visit: t = {payload['cascade']['t']:.6g}  "
              f"(t_h = {payload['cascade']['t_h']}, {cert.reason})")
        print(f"endpoint separation ok: {sep.ok}")
    return 0


def _cmd_gaps(args):
    doc = _load_document(args.net)
    surface = doc.to_surface()
    slope = _resolve_slope(doc, args.slope)
    edge = _edge_index(surface, args.edge)
    if args.start:
        edge_label, y_text = args.start.split(",", 1)
        start = VerticalCoord(
            _edge_index(surface, int(edge_label)),
            parse_expr_text(surface.tower, y_text),
        )
    else:
        start = VerticalCoord(edge, surface.edge_length(edge) / 3)
    horizons = [Q(h) for h in args.horizons.split(",")]
    profile = gap_profile(surface, slope, start, edge, horizons)
    out = csv.writer(sys.stdout, lineterminator="\n")
    print(f"# tower {_tower_text(surface.tower)}")
    print(f"# slope {expr_text(slope.alpha)}")
    print(f"# edge {surface.edge_label(edge)}")
    out.writerow(["T", "mg", "mg_exact", "crossings", "truncated"])
    for row in profile.rows:
        out.writerow(
            [
                str(row.horizon),
                decimal_text(row.mg),
                expr_text(row.mg),
                row.crossings,
                int(row.truncated),
            ]
        )
    return 0


def _cmd_fit(args):
    from .exactnum import tower as make_tower
    from .density.gaps import GapProfile, GapRow

    if args.profile == "-":
        text = sys.stdin.read()
    else:
        with open(args.profile, "r", encoding="utf-8") as fh:
            text = fh.read()
    tower_spec = None
    data_lines = []
    for raw in text.splitlines():
        if raw.startswith("#"):
            line = raw.lstrip("# ").strip()
            if line.startswith("tower"):
                spec = line[len("tower"):].strip()
                if spec == "(rational)":
                    tower_spec = make_tower([])
                else:
                    gens = []
                    for part in spec.split(","):
                        name, rest = part.strip().split("^")
                        exp, rad = rest.split("=")
                        gens.append((name, int(exp), int(rad)))
                    tower_spec = make_tower(gens)
        elif raw.strip():
            data_lines.append(raw)
    rows = []
    for rec in csv.reader(io.StringIO("\n".join(data_lines))):
        if not rec or rec[0] == "T":
            continue
        rows.append(rec)
    if tower_spec is None:
        raise CliError("profile is missing its '# tower' header")
    profile = GapProfile(edge=-1, start=None, slope_text="")
    for rec in rows:
        profile.rows.append(
            GapRow(
                horizon=Q(rec[0]),
                mg=parse_expr_text(tower_spec, rec[2]),
                crossings=int(rec[3]),
                truncated=bool(int(rec[4])),
            )
        )
    targets = [int(t) for t in args.targets.split(",")]
    report = superdensity_fit(
        profile,
        targets,
        linear_ratio_cap=args.ratio_cap,
        poly_exponent_cap=args.exponent_cap,
    )
    if args.json:
        payload = {
            "schema": 1,
            "targets": [
                {"n": t.n, "horizon": None if t.horizon is None else str(t.horizon),
                 "ratio": t.ratio}
                for t in report.targets
            ],
            "max_min_ratio": report.max_min_ratio,
            "exponent": report.exponent,
            "verdict": report.verdict,
        }
        print(json.dumps(payload, indent=2))
    else:
        for t in report.targets:
            hor = "unreached" if t.horizon is None else str(t.horizon)
            print(f"n={t.n}: T(n)={hor}" + ("" if t.ratio is None else f"  T/n={t.ratio:.4g}"))
        if report.max_min_ratio is not None:
            print(f"max/min of T(n)/n: {report.max_min_ratio:.4g}")
        if report.exponent is not None:
            print(f"log-log exponent: {report.exponent:.4g}")
        print(f"verdict: {report.verdict}")
    return 0


def _cmd_diophantine(args):
    if args.preset in ("golden", "sqrt2m1"):
        slope = golden_slope() if args.preset == "golden" else sqrt2m1_slope()
        bound = GOLDEN_DIGIT_BOUND if args.preset == "golden" else SQRT2M1_DIGIT_BOUND
        report = check_bad_approx_bound(slope.alpha, bound, args.nmax)
        payload = {
            "schema": 1,
            "preset": args.preset,
            "digit_bound": report.A,
            "n_max": report.n_max,
            "passed": report.passed,
            "min_value": decimal_text(report.min_value),
            "min_value_exact": expr_text(report.min_value),
            "argmin_n": report.argmin_n,
            "digits_complete": report.digits_complete,
        }
        if args.json:
            print(json.dumps(payload, indent=2))
        else:
            print(f"slope: {expr_text(slope.alpha)}  digit bound A = {report.A}")
            print(f"checked (A+2)*n*dist(n*alpha, Z) > 1 for n <= {report.n_max}: "
                  f"{'pass' if report.passed else 'FAIL'}")
            print(f"minimum value {payload['min_value']} at n = {report.argmin_n}")
        return 0
    # octagon: exhaustive vs certified linear-form constants
    t = tower_octagon()
    alpha = octagon_slope().alpha
    beta = t.generator("r")
    emp = empirical_c5(alpha, beta, args.nmax)
    cert = certified_form_constant(alpha, beta)
    payload = {
        "schema": 1,
        "preset": "octagon",
        "n_max": args.nmax,
        "exponent": emp.exponent,
        "empirical_min": float(emp.value_upper),
        "empirical_min_exact": expr_text(emp.value),
        "argmin": list(emp.argmin),
        "certified_c5": f"{cert.c.numerator}/{cert.c.denominator}",
        "certified_c5_float": float(cert.c),
        "per_n": [{"n": n, "min": v} for n, v in emp.per_n],
    }
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        print(f"form dist(n1*a + n2*r*a - n3*r, Z) with a = {expr_text(alpha)}, r = sqrt2")
        print(f"exhaustive min of N^{emp.exponent} * dist over max|n_i| <= {args.nmax}: "
              f"{float(emp.value_upper):.8g} at {emp.argmin}")
        print(f"certified constant: {payload['certified_c5']} = {float(cert.c):.4g}")
        step = max(1, args.nmax // 10)
        for n, v in emp.per_n[::step]:
            print(f"  N <= {n:4d}: running min {v:.8g}")
    return 0


def _cmd_octagon(args):
    sys.stdout.write(preset_documents()["octagon"])
    return 0


def _cmd_unfold(args):
    doc = _load_document(args.net)
    from .surfaces import four_copy

    surface = four_copy(doc.to_table())
    sys.stdout.write(serialize_net(surface, slopes=doc.slopes))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="geoflow",
        description="Exact geodesic flow on polysquare/polyrectangle surfaces",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate a net and report genus/vertices")
    p.add_argument("net", help="net file or - for stdin")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("trace", help="crossing list as CSV")
    p.add_argument("net")
    p.add_argument("--slope", required=True, help="named slope or expression")
    p.add_argument("--start", required=True, metavar="EDGE,Y")
    p.add_argument("--crossings", type=int, required=True)
    p.add_argument("--reverse", action="store_true")
    p.set_defaults(func=_cmd_trace)

    p = sub.add_parser("visit", help="two-direction visiting time of an interval")
    p.add_argument("net")
    p.add_argument("--slope", required=True)
    p.add_argument("--interval", required=True, metavar="EDGE,LO,HI")
    p.add_argument("--certificate", help="write the cascade certificate JSON here")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_visit)

    p = sub.add_parser("gaps", help="maximum-gap profile as CSV")
    p.add_argument("net")
    p.add_argument("--slope", required=True)
    p.add_argument("--edge", type=int, required=True, help="edge (face label)")
    p.add_argument("--horizons", required=True, help="comma separated arc lengths")
    p.add_argument("--start", metavar="EDGE,Y")
    p.set_defaults(func=_cmd_gaps)

    p = sub.add_parser("fit", help="density fit report from a gaps CSV")
    p.add_argument("profile", help="gaps CSV or - for stdin")
    p.add_argument("--targets", required=True, help="comma separated n values")
    p.add_argument("--ratio-cap", type=float, default=8.0)
    p.add_argument("--exponent-cap", type=float, default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("diophantine", help="distance-to-integers verification tables")
    p.add_argument("--preset", choices=("golden", "sqrt2m1", "octagon"), required=True)
    p.add_argument("--nmax", type=int, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_diophantine)

    p = sub.add_parser("octagon", help="emit the octagon preset net")
    p.set_defaults(func=_cmd_octagon)

    p = sub.add_parser("unfold", help="four-copy unfolding of a table net")
    p.add_argument("net")
    p.set_defaults(func=_cmd_unfold)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (
        CliError,
        NetFormatError,
        SurfaceError,
        PreconditionError,
        SingularHit,
        OracleCapExceeded,
        HypothesisViolated,
        ValueError,
    ) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
