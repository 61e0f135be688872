"""Batch driver: `domsamp <command> [flags]`, JSON report plus CSV table."""

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import SCHEMA_VERSION, __version__
from .analysis import AnalyticFunction, SpaceParams, random_polynomial
from .bounds import BoundConfig, bound_report
from .covering import REFERENCE_N_MAX, REFERENCE_R0, lattice_indices_up_to
from .fock import (
    FockParams,
    fock_bound,
    fock_optimal_constant_p2,
    truncated_plane,
)
from .geometry import phb_disk_to_euclidean, phb_double
from .region import Region, builtin_region, density, euclidean_density, intersect_disk_area
from .remez import fit_remez_constant
from .sampling import extremal_sweep, good_disks, local_masses, optimal_constant_p2, verify_good_mass
from .analysis import lp_mass

COMMANDS = ("density", "constant", "bound", "gooddisks", "remez", "fock", "report")


class CliError(Exception):
    def __init__(self, kind, message):
        super().__init__(message)
        self.kind = kind


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("usage", message)


def _threads():
    raw = os.environ.get("SAMPLER_THREADS")
    if raw is None:
        return None
    try:
        n = int(raw)
    except ValueError:
        raise CliError("validation", f"SAMPLER_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise CliError("validation", "SAMPLER_THREADS must be >= 1")
    return n


def load_region(spec, planar=False):
    """A JSON sector file, or a catalogue entry written name[:arg,arg,...]."""
    if spec is None:
        raise CliError("validation", "--region is required for this command")
    if os.path.exists(spec):
        try:
            return Region.load(spec, planar=planar)
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise CliError("io", f"cannot read region {spec}: {exc}") from None
    name, _, rest = spec.partition(":")
    args = []
    for tok in filter(None, rest.split(",")):
        num = float(tok)
        args.append(int(num) if num.is_integer() and "." not in tok else num)
    try:
        return builtin_region(name, *args)
    except KeyError as exc:
        raise CliError("validation", f"{spec!r} is neither a file nor a catalogue region ({exc})") from None


def _bound_config(args):
    if args.bound_config is None:
        return BoundConfig()
    try:
        return BoundConfig.load(args.bound_config)
    except (OSError, ValueError, KeyError) as exc:
        raise CliError("io", f"cannot read bound config {args.bound_config}: {exc}") from None


def _params(args):
    try:
        return SpaceParams(args.p, 0.0 if args.alpha is None else args.alpha)
    except ValueError as exc:
        raise CliError("validation", str(exc)) from None


def _table(columns, rows):
    return {"columns": list(columns), "rows": [list(r) for r in rows]}


# ---------------------------------------------------------------- commands


def cmd_density(args, cfg):
    E = load_region(args.region)
    r = args.r if args.r is not None else 0.7
    res = args.resolution or 64
    rep = density(E, r, res)
    c, R = phb_disk_to_euclidean(0j, r)
    center0 = float(intersect_disk_area(E, c, R) / R**2) if not E.is_empty else 0.0
    out = rep.to_dict()
    out["center0_ratio"] = center0
    out["region_label"] = E.label
    return out, _table(["r", "gamma_hat", "center0_ratio"], [[r, rep.gamma_hat, center0]])


def cmd_constant(args, cfg):
    E = load_region(args.region)
    params = _params(args)
    degree = 10 if args.degree is None else args.degree
    if params.p == 2.0:
        results = [optimal_constant_p2(E, n, params.alpha) for n in range(degree + 1)]
    else:
        results = extremal_sweep(E, range(degree + 1), params, args.restarts, args.seed)
    final = results[-1]
    out = final.to_dict()
    return out, _table(["degree", "C_hat"], [[x.degree, x.C_hat] for x in results])


def _measured_constant(E, degree, params, args):
    if params.p == 2.0:
        return optimal_constant_p2(E, degree, params.alpha)
    return extremal_sweep(E, range(degree + 1), params, args.restarts, args.seed)[-1]


def cmd_bound(args, cfg):
    E = load_region(args.region)
    params = _params(args)
    r = args.r if args.r is not None else 0.7
    degree = 30 if args.degree is None else args.degree
    dens = density(E, r, args.resolution or 64)
    C = _measured_constant(E, degree, params, args)
    rep = bound_report(dens.gamma_hat, r, params, cfg, C_measured=C.C_hat, c=args.c or 0.5)
    out = rep.to_dict()
    out["region_label"] = E.label
    out["degree"] = degree
    cols = ["region", "gamma_hat", "r", "C_measured", "theoretical_lower", "necessary_upper", "lower_ok", "upper_ok"]
    row = [E.label, rep.gamma, r, rep.C_measured, rep.C_lower_theory, rep.C_upper_necessary, rep.lower_ok, rep.upper_ok]
    return out, _table(cols, [row])


def cmd_gooddisks(args, cfg):
    params = _params(args)
    if args.function:
        try:
            f = AnalyticFunction.load(args.function)
        except (OSError, ValueError, KeyError) as exc:
            raise CliError("io", f"cannot read function {args.function}: {exc}") from None
    else:
        degree = 10 if args.degree is None else args.degree
        f = random_polynomial(degree, np.random.default_rng(args.seed))
    s = args.s if args.s is not None else REFERENCE_R0
    t = args.t if args.t is not None else float(phb_double(phb_double(s)))
    c = args.c if args.c is not None else 0.5
    n_max = args.n_max
    masses = (local_masses(f, params, s, n_max), local_masses(f, params, t, n_max), lp_mass(f, params))
    try:
        rep = verify_good_mass(f, params, s, t, c, n_max, args.resolution or 256, masses=masses)
    except ValueError as exc:
        raise CliError("validation", str(exc)) from None
    gd = good_disks(f, params, s, t, rep.K, n_max, masses)
    good = {(i.n, i.k) for i in gd.indices}
    out = {"report": rep.to_dict(), "good_disks": gd.to_dict(), "function": f.to_dict()}
    rows = [
        [i.n, i.k, float(ms), float(mt), (i.n, i.k) in good]
        for i, ms, mt in zip(lattice_indices_up_to(n_max), masses[0], masses[1])
    ]
    return out, _table(["n", "k", "mass_s", "mass_t", "good"], rows)


def cmd_remez(args, cfg):
    R = args.r if args.r is not None else 1.0
    top = 8 if args.degree is None else args.degree
    fracs = [float(x) for x in (args.s_list or "0.05,0.1,0.2,0.4").split(",")]
    area = math.pi * R**2
    fit = fit_remez_constant(list(range(1, top + 1)), [f * area for f in fracs], R, args.restarts, args.seed)
    out = fit.to_dict()
    rows = [[x.degree, x.s, x.boundary_sup, fit.bound(x.degree, x.s)] for x in fit.samples]
    return out, _table(["degree", "s", "boundary_sup", "fitted_bound"], rows)


def cmd_fock(args, cfg):
    alpha = args.alpha if args.alpha is not None else 1.0
    degree = 10 if args.degree is None else args.degree
    try:
        params = FockParams.for_degree(args.p, alpha, degree)
    except ValueError as exc:
        raise CliError("validation", str(exc)) from None
    T = params.truncation_radius
    E = load_region(args.region, planar=True) if args.region else truncated_plane(T)
    r = args.r if args.r is not None else 2.0
    res = fock_optimal_constant_p2(E, degree, alpha, T)
    x = np.arange(-math.floor(T - r), math.floor(T - r) + 1, 0.5)
    X, Y = np.meshgrid(x, x)
    centers = (X + 1j * Y).ravel()
    centers = centers[np.abs(centers) <= T - r]
    gamma = euclidean_density(E, r, centers)[0] if len(centers) and not E.is_empty else 0.0
    bound = fock_bound(gamma, r, params, cfg) if gamma > 0 and r > math.sqrt(2) else 0.0
    out = res.to_dict()
    out.update({"gamma_hat": gamma, "r": r, "truncation_radius": T, "fock_bound": bound})
    return out, _table(["degree", "C_hat", "gamma_hat", "fock_bound"], [[degree, res.C_hat, gamma, bound]])


REPORT_COLUMNS = ["region", "gamma_hat", "r", "C_measured", "theoretical_lower", "necessary_upper", "lower_ok", "upper_ok"]


def cmd_report(args, cfg):
    if not args.paths:
        raise CliError("validation", "report needs at least one result file")
    rows = []
    for path in args.paths:
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except (OSError, ValueError) as exc:
            raise CliError("io", f"cannot read {path}: {exc}") from None
        if doc.get("schema_version") != SCHEMA_VERSION or doc.get("command") != "bound":
            raise CliError("schema", f"{path} is not a schema-{SCHEMA_VERSION} bound result")
        rows.extend(doc["table"]["rows"])
    return {"n_rows": len(rows)}, _table(REPORT_COLUMNS, rows)


HANDLERS = {
    "density": cmd_density,
    "constant": cmd_constant,
    "bound": cmd_bound,
    "gooddisks": cmd_gooddisks,
    "remez": cmd_remez,
    "fock": cmd_fock,
    "report": cmd_report,
}


def build_parser():
    ap = _Parser(prog="domsamp", description="Dominating-set and sampling-constant experiments.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("paths", nargs="*", help="result files (report command)")
    ap.add_argument("--region", help="sector JSON file or catalogue name[:args]")
    ap.add_argument("--function", help="coefficient JSON file (gooddisks)")
    ap.add_argument("--degree", type=int)
    ap.add_argument("--alpha", type=float, help="weight exponent (default 0; 1 for fock)")
    ap.add_argument("--p", type=float, default=2.0)
    ap.add_argument("--r", type=float)
    ap.add_argument("--s", type=float, help="inner radius (gooddisks)")
    ap.add_argument("--s-list", help="comma-separated area fractions (remez)")
    ap.add_argument("--t", type=float)
    ap.add_argument("--c", type=float)
    ap.add_argument("--n-max", type=int, default=REFERENCE_N_MAX)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--restarts", type=int, default=4)
    ap.add_argument("--resolution", type=int)
    ap.add_argument("--bound-config")
    ap.add_argument("--out", help="JSON output path; the CSV table goes next to it")
    return ap


def _csv_text(table):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table["columns"])
    for row in table["rows"]:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def run(argv=None):
    """Execute one command; returns (exit status, JSON document)."""
    try:
        args = build_parser().parse_args(argv)
        threads = _threads()
        cfg = _bound_config(args)
        result, table = HANDLERS[args.command](args, cfg)
        config = {k: v for k, v in sorted(vars(args).items())}
        config["sampler_threads"] = threads
        doc = {
            "schema_version": SCHEMA_VERSION,
            "version": __version__,
            "command": args.command,
            "config": config,
            "bound_config": cfg.to_dict(),
            "result": result,
            "table": table,
        }
        return 0, doc, args.out
    except CliError as exc:
        status = 2 if exc.kind in ("usage", "validation", "schema") else 1
        return status, {"schema_version": SCHEMA_VERSION, "error": {"type": exc.kind, "message": str(exc)}}, None
    except (ValueError, RuntimeError, ArithmeticError) as exc:
        return 1, {"schema_version": SCHEMA_VERSION, "error": {"type": type(exc).__name__, "message": str(exc)}}, None


def _dumps(doc):
    return json.dumps(doc, indent=2, sort_keys=True, default=_json_default)


def _json_default(o):
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialise {type(o).__name__}")


def main(argv=None):
    status, doc, out = run(argv)
    text = _dumps(doc)
    if status == 0 and out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
        stem, _ = os.path.splitext(out)
        with open(stem + ".csv", "w") as fh:
            fh.write(_csv_text(doc["table"]))
    else:
        sys.stdout.write(text + "\n")
    return status


if __name__ == "__main__":
    sys.exit(main())
