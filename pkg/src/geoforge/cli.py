"""geoforge command line: construct, verify, diagram, quotient, export.

Machine output (JSON, JSON lines, DOT) goes to stdout, human summaries to
stderr.  Exit codes: 0 pass, 1 verification failure, 2 usage or resource
error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .errors import GeoforgeError, ResourceLimitError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _family_args(p: argparse.ArgumentParser, required: bool):
    p.add_argument("--family", required=required,
                   choices=["as", "pa", "hs", "hs-sd", "product", "sd-symbolic"])
    p.add_argument("--m", type=int, help="degree parameter (AS: S_m; HS: A_m)")
    p.add_argument("--n", type=int, help="number of coordinates (PA, product power, SD)")
    p.add_argument("--rank", type=int, help="number of types")
    p.add_argument("--component", help="PA component, e.g. sym:3, alt:5, agl:5, hs:5")
    p.add_argument("--inner", help="product power: inner family as JSON, e.g. '{\"family\":\"as\",\"m\":5,\"rank\":2}'")


def _spec_from_args(args):
    from .actions import parse_component
    from .construct import FamilySpec

    comp = None
    if args.component:
        comp = parse_component(args.component).descriptor
    inner = None
    if args.inner:
        try:
            inner = FamilySpec.from_json(json.loads(args.inner))
        except (ValueError, KeyError) as exc:
            raise UsageError(f"bad --inner: {exc}")
    spec = FamilySpec(args.family, args.m, args.n, args.rank, comp, inner)
    spec.validate()
    return spec


def _build(spec):
    from .construct import build_family
    return build_family(spec)


def _write(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _load(path: str):
    from .io import load_json, geometry_from_json
    obj = load_json(path)
    return geometry_from_json(obj), obj


def _geometry_input(args):
    if getattr(args, "family", None):
        spec = _spec_from_args(args)
        geo = _build(spec)
        return geo, spec.to_json()
    if not args.path:
        raise UsageError("give a geometry file or --family parameters")
    geo, obj = _load(args.path)
    return geo, {"file": str(args.path), "instance": obj.get("instance")}


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_construct(args) -> int:
    from .construct import SdBundle
    from .io import geometry_to_json

    spec = _spec_from_args(args)
    geo = _build(spec)
    if isinstance(geo, SdBundle):
        text = json.dumps(geo.to_json(), indent=1)
        print(f"sd-symbolic bundle: n={spec.n}, b={geo.b}, T={geo.system.descriptor}", file=sys.stderr)
    else:
        text = json.dumps(geometry_to_json(geo), separators=(",", ":"))
        sizes = ", ".join(f"{t}:{geo.sizes[t]}" for t in geo.types)
        print(f"{geo.num_elements()} elements, {geo.rank} types ({sizes})", file=sys.stderr)
    _write(text, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import CHECKS, run_checks

    if args.all:
        checks = [c for c in CHECKS if c not in ("sd-battery", "structure")]
    elif args.checks:
        checks = [c.strip() for c in args.checks.split(",") if c.strip()]
    else:
        checks = ["c-class", "geometry", "flag-transitive", "thick", "connected"]
    bad = [c for c in checks if c not in CHECKS]
    if bad:
        raise UsageError(f"unknown check(s) {', '.join(bad)}; choose from {', '.join(CHECKS)}")
    only_sd = checks == ["sd-battery"]
    geo, instance = (None, {"battery": "sd"}) if only_sd and not (args.path or args.family) \
        else _geometry_input(args)
    if geo is not None and geo.attached is None:
        needs_group = [c for c in checks if c not in ("geometry", "sd-battery")]
        if needs_group:
            reason = geo.meta.get("attach_error", "no group in the input")
            print(f"error: checks {', '.join(needs_group)} need an attached group ({reason})", file=sys.stderr)
            return EXIT_USAGE
    sd_params = {}
    if args.samples is not None:
        sd_params["samples"] = args.samples
    if args.seed is not None:
        sd_params["seed"] = args.seed
    report = run_checks(geo, checks, instance, strategy=args.strategy, budget=args.budget,
                        jobs=args.jobs, sd_params=sd_params)
    _write(report.to_jsonl(), args.out)
    print(report.summary(), file=sys.stderr)
    if geo is not None and "attach_error" in geo.meta:
        print(f"note: attached group rejected: {geo.meta['attach_error']}", file=sys.stderr)
    return EXIT_OK if report.ok(args.strict) else EXIT_FAIL


def cmd_diagram(args) -> int:
    from .geometry import basic_diagram
    from .io import diagram_dot, params_table
    from .verify import recursive_flag_check, verify_diagram_pa

    geo, _ = _geometry_input(args)
    att = geo.attached
    if att is None:
        raise UsageError("the diagram needs an attached group and base chamber")
    if att.flag_transitive is None:
        status, _ = recursive_flag_check(geo)
        att.flag_transitive = status == "pass"
    if not att.flag_transitive and not args.force:
        print("error: the attached group is not flag-transitive; use --force to compute base residues anyway",
              file=sys.stderr)
        return EXIT_USAGE
    entries = basic_diagram(geo, require_verified=not args.force)
    if args.dot:
        _write(diagram_dot(geo, entries), args.out)
    else:
        _write(params_table(entries), args.out)
    edges = sorted(f"{e.pair[0]}-{e.pair[1]}" for e in entries if e.is_edge)
    print(f"diagram edges: {', '.join(edges) if edges else 'none'}", file=sys.stderr)
    if args.predict_pa:
        spec = geo.meta.get("spec") or {}
        if spec.get("family") != "pa":
            raise UsageError("--predict-pa needs a PA instance")
        from .actions import component_from_descriptor
        res = verify_diagram_pa(spec["n"], spec["rank"], component_from_descriptor(spec["component"]), geo)
        for r in res:
            print(f"{r.status.upper():7s} {r.name}", file=sys.stderr)
        if any(r.status == "fail" for r in res):
            return EXIT_FAIL
    return EXIT_OK


def cmd_quotient(args) -> int:
    from .geometry import QuotientError, quotient
    from .io import geometry_to_json, load_json

    geo, _ = _load(args.path)
    raw = load_json(args.partition)
    part = {}
    for key, blocks in raw.items():
        t = next((u for u in geo.types if str(u) == str(key)), None)
        if t is None:
            raise UsageError(f"partition names unknown type {key!r}")
        part[t] = [[_member(m, geo.types) for m in block] for block in blocks]
    try:
        q = quotient(geo, part)
    except QuotientError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.counterexample is not None:
            print(json.dumps({"counterexample": _jsonable(exc.counterexample)}), file=sys.stderr)
        # a group that splits a part is a finding; a malformed partition is a usage error
        ce = exc.counterexample or {}
        return EXIT_FAIL if "generator" in ce else EXIT_USAGE
    _write(json.dumps(geometry_to_json(q), separators=(",", ":")), args.out)
    print(f"quotient: {q.num_elements()} elements, group "
          f"{'attached' if q.attached is not None else 'not attached'}", file=sys.stderr)
    return EXIT_OK


def _member(m, types):
    # a plain 1-based index, or a [type, index] reference
    if isinstance(m, list):
        u = next((x for x in types if str(x) == str(m[0])), None)
        if u is None:
            raise UsageError(f"partition names unknown type {m[0]!r}")
        return (u, int(m[1]) - 1)
    return int(m) - 1


def _jsonable(obj):
    from .io import _plain
    return _plain(obj)


def cmd_export(args) -> int:
    from .io import geometry_to_json

    geo, _ = _geometry_input(args)
    if args.format == "dot":
        from .geometry import basic_diagram
        from .io import diagram_dot
        _write(diagram_dot(geo, basic_diagram(geo, require_verified=False)), args.out)
    else:
        _write(json.dumps(geometry_to_json(geo), indent=1 if args.pretty else None), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="geoforge", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"geoforge {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="build a family member")
    _family_args(p, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("verify", help="run property checks")
    p.add_argument("path", nargs="?")
    _family_args(p, required=False)
    p.add_argument("--checks", help="comma-separated: c-class,geometry,flag-transitive,thick,connected,"
                                     "diagram,ha-bound,sd-battery,structure")
    p.add_argument("--all", action="store_true", help="every geometry check")
    p.add_argument("--strict", action="store_true", help="treat skipped checks as failures")
    p.add_argument("--strategy", choices=["both", "direct", "recursive"], default="both")
    p.add_argument("--budget", type=int, help="exhaustive enumeration budget (partial flags)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--samples", type=int, help="sd-battery samples per (s, a)")
    p.add_argument("--seed", type=int, help="sd-battery seed")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("diagram", help="basic diagram of a flag-transitive geometry")
    p.add_argument("path", nargs="?")
    _family_args(p, required=False)
    p.add_argument("--dot", action="store_true")
    p.add_argument("--predict-pa", action="store_true", help="compare with the PA diagram prediction")
    p.add_argument("--force", action="store_true", help="skip the flag-transitivity requirement")
    p.add_argument("--out")
    p.set_defaults(func=cmd_diagram)

    p = sub.add_parser("quotient", help="quotient by a type-preserving partition")
    p.add_argument("path")
    p.add_argument("partition", help="JSON {type: [[1-based element ids], ...]}")
    p.add_argument("--out")
    p.set_defaults(func=cmd_quotient)

    p = sub.add_parser("export", help="re-serialize a geometry (JSON or diagram DOT)")
    p.add_argument("path", nargs="?")
    _family_args(p, required=False)
    p.add_argument("--format", choices=["json", "dot"], default="json")
    p.add_argument("--pretty", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_export)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, ValueError, ResourceLimitError, GeoforgeError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
