"""Command-line interface: ``volprod {body,santalo,vp,flags,sweep,fit}``.

Exit codes: 0 success, 2 I/O or parse error, 3 geometric precondition failure.
The default Santaló tolerance can be overridden with ``VOLPROD_TOL``.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from collections import defaultdict
from pathlib import Path

import numpy as np

from . import experiments as ex
from .errors import GeometryError
from .numkit import fit_linear, fit_loglog
from .polarity import DEFAULT_TOL, polar, santalo_point, simplex_volume_product
from .polytope import body_to_dict, contains, cube, load_body
from .simplexflags import RegularSimplex, lemma_report

log = logging.getLogger("volprod")

EXIT_OK, EXIT_IO, EXIT_GEOMETRY = 0, 2, 3
TOL_ENV = "VOLPROD_TOL"


class UsageError(Exception):
    """Bad input that is not geometric: exit code 2."""


def _default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, (set, frozenset, tuple)):
        return list(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def emit(payload):
    print(json.dumps(payload, default=_default))


def _tolerance(args):
    if args.tol is not None:
        tol = args.tol
    else:
        raw = os.environ.get(TOL_ENV)
        try:
            tol = DEFAULT_TOL if raw is None else float(raw)
        except ValueError:
            raise UsageError(f"{TOL_ENV}={raw!r} is not a number") from None
    if not tol > 0:
        raise UsageError("tolerance must be positive")
    return tol


def builtin_body(spec: str):
    """``simplex:n``, ``cube:n`` or ``<family>:n:delta[:seed[:sample]]``."""
    parts = spec.split(":")
    try:
        if parts[0] == "simplex" and len(parts) == 2:
            return RegularSimplex(int(parts[1])).polytope
        if parts[0] == "cube" and len(parts) == 2:
            n = int(parts[1])
            if n < 1:
                raise ValueError
            return cube(n)
        if parts[0] in ex.FAMILIES and 3 <= len(parts) <= 5:
            nums = [int(parts[1]), float(parts[2])] + [int(p) for p in parts[3:]]
            return ex.generate(ex.GeneratorSpec(parts[0], *nums))
    except ValueError as exc:
        raise UsageError(f"bad builtin body {spec!r}: {exc}") from None
    raise UsageError(f"unknown builtin body {spec!r}")


def read_body(args):
    if args.builtin is not None:
        return builtin_body(args.builtin)
    try:
        return load_body(args.file)
    except GeometryError:
        raise
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read body from {args.file}: {exc}") from None


def _point(raw, n, name):
    try:
        vals = [float(v) for v in raw.split(",")]
    except ValueError:
        raise UsageError(f"{name} must be comma-separated numbers") from None
    if len(vals) == 1 and n > 1:
        vals = vals * n
    if len(vals) != n:
        raise UsageError(f"{name} needs {n} coordinates")
    return np.array(vals)


def cmd_body(args):
    k = read_body(args)
    if args.action == "volume":
        emit(k.volume)
    elif args.action == "centroid":
        emit(k.centroid)
    elif args.action == "polar":
        z = None if args.center is None else _point(args.center, k.dim, "--center")
        emit(body_to_dict(polar(k, z)))
    elif args.action == "contains":
        if args.point is None:
            raise UsageError("contains needs --point")
        emit(contains(k, _point(args.point, k.dim, "--point")))
    else:
        out = body_to_dict(k)
        out["halfspaces"] = body_to_dict(k, halfspaces=True)["halfspaces"]
        emit(out)


def cmd_santalo(args):
    k = read_body(args)
    sol = santalo_point(k, _tolerance(args))
    emit({
        "santalo": sol.point,
        "polar_volume": sol.polar_volume,
        "centroid_norm": sol.centroid_norm,
        "iterations": sol.iterations,
    })


def cmd_vp(args):
    k = read_body(args)
    sol = santalo_point(k, _tolerance(args))
    emit({
        "vp": k.volume * sol.polar_volume,
        "santalo": sol.point,
        "volumes": {"body": k.volume, "polar": sol.polar_volume},
        "iterations": sol.iterations,
    })


def cmd_flags(args):
    k = read_body(args)
    n = k.dim if args.n is None else args.n
    if n != k.dim:
        raise UsageError(f"--n {n} does not match body dimension {k.dim}")
    report = lemma_report(k, RegularSimplex(n))
    emit(report)


def _grid(raw):
    try:
        return [float(d) for d in raw.split(",")]
    except ValueError:
        raise UsageError("--deltas must be comma-separated numbers") from None


def cmd_sweep(args):
    families = args.family.split(",")
    try:
        specs = ex.sweep_specs(families, args.n, _grid(args.deltas), args.samples, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = Path(args.out)
    summary_path = out.with_suffix(".json")
    try:
        # fail before the expensive part if the outputs are not writable
        for p in (out, summary_path):
            with open(p, "a"):
                pass
    except OSError as exc:
        raise UsageError(f"cannot write {exc.filename}: {exc.strerror}") from None
    records = ex.run_records(specs, lemmas=True, jobs=args.jobs, timing=args.timing)
    ex.write_csv(records, out, args.n)
    summary = ex.theorem_summary(records, "+".join(families), args.n, _grid(args.deltas))
    summary.write_json(summary_path)
    payload = summary.to_dict()
    payload.update({"csv": str(out), "summary": str(summary_path), "rows": len(records)})
    emit(payload)


def fit_rows(rows):
    """Per-family fits from sweep CSV rows."""
    by_family = defaultdict(list)
    for r in rows:
        by_family[r["family"]].append(r)
    result = {}
    for family, frows in by_family.items():
        n = frows[0]["n"]
        base = simplex_volume_product(n)
        per_delta = defaultdict(list)
        for r in frows:
            if r["vp"] is not None:
                per_delta[r["delta_spec"]].append(r)
        deltas = sorted(per_delta, reverse=True)
        minima = [(d, min(r["vp"] for r in per_delta[d]) - base) for d in deltas]
        entry = {"n": n, "rows": len(frows), "deltas": deltas, "min_gap": [g for _, g in minima]}
        entry["slope"] = fit_linear(minima).as_dict() if len(minima) >= 3 else None
        for key, col in (("lemma33_P_exponent", "lemma33_P_ratio"), ("lemma33_Pp_exponent", "lemma33_Pp_ratio")):
            pts = [
                (d, max(r[col] * r["delta_actual"] ** 2 for r in per_delta[d]))
                for d in deltas
                if all(r[col] is not None for r in per_delta[d])
            ]
            if len(pts) >= 3 and all(y > 1e-11 for _, y in pts):
                entry[key] = fit_loglog(pts).exponent
            else:
                entry[key] = None
        if family in ex.AFFINE_TRIVIAL:
            entry["flag"] = "affine-trivial family"
        result[family] = entry
    return result


def cmd_fit(args):
    try:
        rows = ex.read_csv(args.csv)
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot read {args.csv}: {exc}") from None
    if not rows:
        raise UsageError(f"{args.csv} has no rows")
    emit(fit_rows(rows))


def _add_body_input(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--builtin", help="simplex:n, cube:n or family:n:delta[:seed[:sample]]")
    src.add_argument("--file", help="JSON body file")
    p.add_argument("--tol", type=float, default=None, help=f"Santaló tolerance (env {TOL_ENV})")


def build_parser():
    parser = argparse.ArgumentParser(prog="volprod", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("body", help="volume, centroid, polar, containment or hull of a body")
    p.add_argument("action", choices=["volume", "centroid", "polar", "contains", "hull"])
    _add_body_input(p)
    p.add_argument("--center", help="polarity center, comma-separated (a single value is broadcast)")
    p.add_argument("--point", help="query point for 'contains'")
    p.set_defaults(func=cmd_body)

    p = sub.add_parser("santalo", help="Santaló point of a body")
    _add_body_input(p)
    p.set_defaults(func=cmd_santalo)

    p = sub.add_parser("vp", help="volume product of a body")
    _add_body_input(p)
    p.set_defaults(func=cmd_vp)

    p = sub.add_parser("flags", help="flag-polytope lemma report of a body inside the simplex")
    _add_body_input(p)
    p.add_argument("--n", type=int, default=None)
    p.set_defaults(func=cmd_flags)

    p = sub.add_parser("sweep", help="seeded δ-sweep written as CSV plus JSON summary")
    p.add_argument("--family", default="vertex-shrink", help=f"comma-separated, from {', '.join(ex.FAMILIES)}")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--deltas", default="0.04,0.02,0.01")
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="CSV path; the summary goes next to it with .json suffix")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--timing", action="store_true", help="fill runtime_ms (makes the CSV non-reproducible)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit", help="slope and exponent fits from a sweep CSV")
    p.add_argument("csv")
    p.set_defaults(func=cmd_fit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_IO
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except GeometryError as exc:
        print(f"volprod: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY
    except UsageError as exc:
        print(f"volprod: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
