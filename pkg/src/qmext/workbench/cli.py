"""Command line entry point.

Every verb reads a space (``--space FILE`` or an inline generator spec via
``--gen '{"kind": "grid", "n": 64}'``), runs one runner op and prints the
canonical JSON result.  ``run MANIFEST`` executes a whole manifest.
"""

import argparse
import csv
import json
import sys

from .generators import KINDS
from .io import WorkbenchIOError, dumps, write_json
from .runner import EXIT_IO, EXIT_OK, run


def _space_args(p, omega=False, u=False, exps=False):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--space", help="space JSON file (as written by 'generate')")
    g.add_argument("--gen", help="inline generator spec as JSON")
    if omega:
        p.add_argument("--omega", help="JSON file with a list of omega indices (default: generated omega)")
    if u:
        p.add_argument("--u", help="JSON file with the values of u on omega (default: seeded random)")
    if exps:
        p.add_argument("--s", type=float, required=True)
        p.add_argument("--p", type=float, default=2.0)
        p.add_argument("--q", type=float, default=2.0, help="use inf for the sup over levels")
        p.add_argument("--flavor", choices=("M", "N"), default="M")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the result here instead of stdout")


def build_parser():
    ap = argparse.ArgumentParser(prog="qmext", description="Finite quasi-metric measure space workbench.")
    sub = ap.add_subparsers(dest="verb", required=True)

    g = sub.add_parser("generate", help="build a test space")
    g.add_argument("kind", choices=KINDS)
    g.add_argument("--params", default="{}", help='generator parameters as JSON, e.g. {"n": 64}')
    g.add_argument("--out")

    a = sub.add_parser("analyze", help="space diagnostics")
    a.add_argument("what", choices=("constants", "metrize", "index", "regularity", "density", "perfectness"))
    _space_args(a, omega=True)
    a.add_argument("--alpha", type=float)
    a.add_argument("--budget", type=float, default=2.0)
    a.add_argument("--r-max", type=float, default=1.0)
    a.add_argument("--r-min", type=float, default=0.0)

    n = sub.add_parser("norm", help="minimal fractional-gradient norm")
    _space_args(n, omega=True, u=True, exps=True)

    w = sub.add_parser("whitney", help="Whitney cover and partition of unity of the complement of omega")
    _space_args(w, omega=True)
    w.add_argument("--open", dest="open_set", help="JSON file with the open set (default: complement of omega)")
    w.add_argument("--alpha", type=float)
    w.add_argument("--theta", type=float)

    for verb in ("extend", "verify-extension"):
        e = sub.add_parser(verb, help="extension from omega" + (" with the full report" if "verify" in verb else ""))
        _space_args(e, omega=True, u=True, exps=True)
        e.add_argument("--mode", choices=("median", "average"), default="median")
        e.add_argument("--Q", type=float)

    c = sub.add_parser("check", help="embedding checks and the characterization matrix")
    c.add_argument("what", choices=("embeddings", "matrix"))
    _space_args(c, omega=True)
    c.add_argument("--s", type=float, default=0.6)
    c.add_argument("--p", type=float, default=2.0)
    c.add_argument("--q", type=float, default=float("inf"))
    c.add_argument("--flavor", choices=("M", "N"), default="M")
    c.add_argument("--Q", type=float)
    c.add_argument("--eps", type=float)
    c.add_argument("--params", default="{}", help="matrix parameters as JSON")
    c.add_argument("--csv", help="also write the per-ball rows as CSV (embeddings)")

    r = sub.add_parser("run", help="run a manifest")
    r.add_argument("manifest")
    r.add_argument("--out")
    return ap


def _load_json_arg(text, what):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise WorkbenchIOError(f"bad {what}: {exc}") from exc


def _task(args):
    verb = args.verb
    task = {"seed": getattr(args, "seed", 0)}
    if getattr(args, "space", None):
        task["space"] = {"file": args.space}
    elif getattr(args, "gen", None):
        task["space"] = _load_json_arg(args.gen, "--gen")
    if getattr(args, "omega", None):
        task["omega"] = {"file": args.omega}
    if getattr(args, "u", None):
        task["u"] = {"file": args.u}
    if getattr(args, "open_set", None):
        task["open"] = {"file": args.open_set}
    for key in ("s", "p", "q", "flavor", "mode", "Q", "eps", "alpha", "theta", "budget"):
        val = getattr(args, key, None)
        if val is not None:
            task[key] = val
    if verb == "analyze":
        task["op"] = args.what
        task["r_max"], task["r_min"] = args.r_max, args.r_min
    elif verb == "check":
        task["op"] = args.what
        if args.what == "matrix":
            params = _load_json_arg(args.params, "--params")
            params.setdefault("s", args.s)
            if args.Q is not None:
                params.setdefault("Q", args.Q)
            task["params"] = params
    else:
        task["op"] = verb
    return task


def _emit(obj, out):
    text = dumps(obj)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.verb == "generate":
            spec = dict(_load_json_arg(args.params, "--params"), kind=args.kind)
            bundle, code = run({"tasks": [{"op": "generate", "space": spec}]})
            if code == EXIT_OK:
                res = bundle["results"][0]["result"]
                doc = dict(res["space"])
                if res["omega"] is not None:
                    doc["omega"] = res["omega"]
                if args.out:
                    write_json(doc, args.out)
                else:
                    sys.stdout.write(dumps(doc))
                return EXIT_OK
        elif args.verb == "run":
            bundle, code = run(args.manifest)
            _emit(bundle, args.out)
            return code
        else:
            task = _task(args)
            bundle, code = run({"seed": task["seed"], "tasks": [task]})
            if code == EXIT_OK:
                result = bundle["results"][0]["result"]
                _emit(result, args.out)
                if args.verb == "check" and args.what == "embeddings" and args.csv:
                    _write_csv(result["rows"], args.csv)
                return EXIT_OK
    except WorkbenchIOError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_IO
    sys.stderr.write(f"error: {bundle.get('error')}\n")
    return code


def _write_csv(rows, path):
    fields = ["center", "radius", "lhs", "rhs_core", "empirical_constant"]
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            wr = csv.DictWriter(fh, fieldnames=fields)
            wr.writeheader()
            for row in rows:
                wr.writerow({k: row[k] for k in fields})
    except OSError as exc:
        raise WorkbenchIOError(str(exc)) from exc


if __name__ == "__main__":
    sys.exit(main())
