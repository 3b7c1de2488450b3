"""Command-line interface: ``phs <command> ...``.

Exit codes: 0 success, 1 a condition or numerical check failed, 2 the input
could not be read or parsed.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings

import numpy as np

from . import __version__
from .catalog import example, example_names
from .exceptions import ConditionViolation, DimensionError, PhsError
from .linalg_core import ENV_VARS, Tolerance, numerical_rank
from .monotone_ops import compose, split_dirac_resistive
from .phdae import (
    ROUTES,
    PhDaeDLR,
    default_route,
    dlr_to_ml,
    realize,
    realize_ml_structured,
)
from .simulate import METHODS, energy_audit, integrate, write_trajectory_csv
from .systemfile import (
    FileFormatError,
    build_scenario,
    build_system,
    dump_document,
    load_structures,
    matrix_to_json,
    read_document,
    structure_entry,
)
from .transfer import (
    eliminate_multipliers,
    positive_real_sample_check,
    right_half_plane_grid,
    transfer_eval,
    write_transfer_csv,
)

HEADER = f"phs {__version__}"

EPILOG = (
    "Tolerances default to rank 1e-10, psd 1e-9, subspace angle 1e-9 and can be "
    "overridden with the environment variables "
    + ", ".join(ENV_VARS.values()) + ". "
    "Exit codes: 0 ok, 1 condition violated or check failed, 2 unreadable input."
)


def fmt(x):
    return f"{float(x):.17g}"


def fmt_complex(z):
    z = complex(z)
    return f"{fmt(z.real)}{'+' if z.imag >= 0 or np.isnan(z.imag) else '-'}{fmt(abs(z.imag))}j"


class Report:
    def __init__(self, out, header=True):
        self.out = out
        if header:
            self.line(f"# {HEADER}")

    def line(self, text=""):
        self.out.write(text + "\n")

    def value(self, key, val, indent=0):
        pad = "  " * indent
        if isinstance(val, bool):
            val = "true" if val else "false"
        elif isinstance(val, (float, np.floating)):
            val = fmt(val)
        self.line(f"{pad}{key}: {val}")

    def matrix(self, key, M, indent=0):
        pad = "  " * indent
        M = np.atleast_2d(np.asarray(M))
        self.line(f"{pad}{key}: {M.shape[0]} x {M.shape[1]}")
        if M.size == 0:
            return
        for row in M:
            cells = [fmt_complex(x) if np.iscomplexobj(M) else fmt(x) for x in row]
            self.line(f"{pad}  [{', '.join(cells)}]")


def _tol():
    return Tolerance.from_env()


def _load(path):
    return read_document(path)


def cmd_validate(args, rep):
    doc = _load(args.file)
    tol = _tol()
    items = load_structures(doc, tol, strict=False)
    ok = True
    for name, item in items.items():
        rep.line(f"structure {name}")
        rep.value("kind", item.kind, 1)
        rep.value("representation", item.representation, 1)
        rep.value("valid", item.valid, 1)
        for w in item.warnings:
            rep.value("warning", w, 1)
        if item.valid:
            c = item.structure.classification
            for flag, val in c.flags().items():
                rep.value(flag, val, 1)
            rep.value("dim", f"{c.dim} (expected {c.expected_dim})", 1)
            rep.value("plus_residual", c.plus_residual, 1)
            rep.value("minus_residual", c.minus_residual, 1)
            rep.value("min_plus_eig", c.min_plus_eig, 1)
        else:
            ok = False
            err = item.error
            rep.value("condition", err.condition, 1)
            rep.value("message", str(err), 1)
            if err.residual is not None:
                rep.value("residual", float(err.residual), 1)
            if err.witness is not None:
                rep.matrix("witness", np.asarray(err.witness).reshape(1, -1), 1)
    if "system" in doc:
        rep.line("system")
        rep.value("type", doc["system"].get("type"), 1)
        try:
            build_system(doc, items, tol)
            rep.value("valid", True, 1)
        except ConditionViolation as exc:
            ok = False
            rep.value("valid", False, 1)
            rep.value("condition", exc.condition, 1)
            rep.value("message", str(exc), 1)
    rep.value("result", "valid" if ok else "invalid")
    return 0 if ok else 1


def _structure(items, name):
    if name not in items:
        raise FileFormatError(f"no structure named {name!r}")
    item = items[name]
    if not item.valid:
        raise item.error
    return item.structure


def _print_structure(rep, S, indent=1):
    c = S.classification
    rep.value("pairs", ", ".join(f"{nm}:{d}" for nm, d in S.layout.pairs), indent)
    for flag, val in c.flags().items():
        rep.value(flag, val, indent)
    rep.value("dim", f"{c.dim} (expected {c.expected_dim})", indent)


def cmd_compose(args, rep):
    doc = _load(args.file)
    tol = _tol()
    items = load_structures(doc, tol)
    A, B = _structure(items, args.first), _structure(items, args.second)
    if args.shared and ":" in args.shared:
        shared = tuple(args.shared.split(":", 1))
    elif args.shared:
        shared = (args.shared, args.shared)
    else:
        common = [nm for nm in A.layout.names if nm in B.layout.names]
        if len(common) != 1:
            raise FileFormatError(
                f"cannot infer the shared pair (common pairs: {common}); use --shared")
        shared = (common[0], common[0])
    C = compose(A, B, shared=shared, tol=tol)
    rep.line(f"composition {args.first} o {args.second} over {shared[0]}:{shared[1]}")
    _print_structure(rep, C)
    status = 0
    if args.compare:
        ref = _structure(items, args.compare)
        if sorted(ref.layout.names) == sorted(C.layout.names):
            angle = C.reorder(list(ref.layout.names)).angle_to(ref)
        elif ref.layout.ambient == C.layout.ambient:
            angle = C.angle_to(ref)
        else:
            angle = np.pi / 2
        equal = angle <= tol.sub
        rep.line(f"comparison with {args.compare}")
        rep.value("max_principal_angle", angle, 1)
        rep.value("equal", equal, 1)
        status = 0 if equal else 1
    if args.out:
        kind = "dirac" if C.classification.dirac else "monotone"
        out = {"layout": doc["layout"], "structures": {"composed": structure_entry(C, kind)}}
        with open(args.out, "w") as fh:
            dump_document(out, fh)
        rep.value("written", args.out)
    return status


def cmd_split(args, rep):
    doc = _load(args.file)
    tol = _tol()
    items = load_structures(doc, tol)
    M = _structure(items, args.name)
    pair = split_dirac_resistive(M, reduce=args.reduce, tol=tol, name=args.resistive_name)
    rho = pair.Rres.layout.size
    rep.line(f"split of {args.name} ({'reduced' if pair.reduced else 'full'})")
    rep.value("resistive_dim", rho, 1)
    rep.matrix("J", pair.J, 1)
    rep.matrix("G", pair.G, 1)
    rep.matrix("G_R", pair.G_R, 1)
    rep.matrix("R_res", pair.R_res, 1)
    recomposed = pair.recompose(tol)
    angle = recomposed.angle_to(M)
    rep.value("recomposition_angle", angle, 1)
    lay = doc["layout"]
    out = {
        "layout": {"n": lay.get("n", 0), "r": rho, "p": lay.get("p", 0)},
        "structures": {
            "D": structure_entry(pair.D, "dirac"),
            "R": structure_entry(pair.Rres, "resistive", "graph"),
            "source": structure_entry(M, "monotone"),
        },
    }
    if args.out:
        with open(args.out, "w") as fh:
            dump_document(out, fh)
        rep.value("written", args.out)
    return 0 if angle <= tol.sub else 1


def _realize(system, route, tol):
    """Return ``(descriptor, structured or None)`` for the requested route."""
    if route == "structured":
        ml = dlr_to_ml(system, tol) if isinstance(system, PhDaeDLR) else system
        sr = realize_ml_structured(ml, tol)
        return sr.descriptor(), sr
    return realize(system, route, tol), None


def cmd_realize(args, rep):
    doc = _load(args.file)
    tol = _tol()
    system = build_system(doc, tol=tol)
    route = args.route or default_route(system)
    real, sr = _realize(system, route, tol)
    rep.line(f"realization route {route}")
    rep.value("states", ", ".join(real.state_labels), 1)
    rep.value("inputs", ", ".join(real.input_labels), 1)
    rep.value("outputs", ", ".join(real.output_labels), 1)
    for key in ("E", "A", "B_in", "C_out", "D_out"):
        rep.matrix(key, getattr(real, key), 1)
    rankE = numerical_rank(real.E, tol)
    rep.line("rank report")
    rep.value("rank_E", f"{rankE} of {real.n_states}", 1)
    rep.value("algebraic_rows", real.E.shape[0] - rankE, 1)
    rep.value("E_singular", rankE < real.n_states, 1)
    if sr is not None:
        rep.line("structured blocks")
        for key in ("P", "S", "J", "R", "B", "V", "N", "W", "G", "G_P", "P_a", "S_a"):
            rep.matrix(key, getattr(sr, key), 1)
        rank_pa = numerical_rank(sr.P_a, tol)
        rep.value("rank_P_a", f"{rank_pa} of {sr.n + sr.m}", 1)
        rep.value("P_a_singular", rank_pa < sr.n + sr.m, 1)
        checks = sr.check(tol)
        rep.value("resistive_min_eig", checks["resistive_min_eig"], 1)
    if args.out:
        out = {"route": route,
               "state_labels": list(real.state_labels),
               "input_labels": list(real.input_labels),
               "output_labels": list(real.output_labels),
               "matrices": {k: matrix_to_json(getattr(real, k))
                            for k in ("E", "A", "B_in", "C_out", "D_out")}}
        if sr is not None:
            out["blocks"] = {k: matrix_to_json(getattr(sr, k))
                             for k in ("P", "S", "J", "R", "B", "V", "N", "W", "G", "G_P")}
        with open(args.out, "w") as fh:
            json.dump(out, fh, indent=2)
            fh.write("\n")
        rep.value("written", args.out)
    return 0


def cmd_simulate(args, rep):
    doc = _load(args.file)
    tol = _tol()
    system = build_system(doc, tol=tol)
    route = args.route or default_route(system)
    real, _ = _realize(system, route, tol)
    scenario = build_scenario(doc, real, {"h": args.h, "t_end": args.t_end,
                                          "method": args.method})
    traj = integrate(scenario, tol=tol)
    audit = energy_audit(traj, args.audit_tol)
    rep.line(f"simulation route {route} method {traj.method}")
    rep.value("steps", traj.t.size - 1, 1)
    rep.value("h", traj.h, 1)
    rep.value("init_correction", traj.init_correction, 1)
    rep.value("H_initial", traj.H[0], 1)
    rep.value("H_final", traj.H[-1], 1)
    rep.value("max_balance_residual", audit.max_residual, 1)
    rep.value("total_dissipation", float(np.sum(audit.dissipation) * traj.h), 1)
    rep.value("total_supplied", float(np.sum(audit.supplied)), 1)
    rep.value("passive", audit.passive, 1)
    if args.out:
        write_trajectory_csv(traj, args.out, header_line=HEADER)
        rep.value("written", args.out)
    return 0 if audit.passive else 1


def _parse_axis(text):
    if ":" in text:
        a, b, k = text.split(":")
        return np.linspace(float(a), float(b), int(k))
    return np.array([float(x) for x in text.split(",") if x.strip()])


def cmd_transfer(args, rep):
    doc = _load(args.file)
    tol = _tol()
    system = build_system(doc, tol=tol)
    if args.s:
        samples = np.array([complex(x.replace(" ", "")) for x in args.s.split(",")])
    elif args.re or args.im:
        re = _parse_axis(args.re) if args.re else np.array([0.01, 0.1, 1.0, 10.0, 100.0])
        im = _parse_axis(args.im) if args.im else None
        samples = right_half_plane_grid(re, im)
    else:
        samples = right_half_plane_grid()
    if args.route == "explicit":
        sr = realize_ml_structured(dlr_to_ml(system, tol) if isinstance(system, PhDaeDLR)
                                   else system, tol)
        target = eliminate_multipliers(sr, tol)
    else:
        target, _ = _realize(system, args.realization or default_route(system), tol)
    values = [transfer_eval(target, s, route=args.route) for s in samples]
    rep.line(f"transfer function route {args.route}")
    rep.value("samples", samples.size, 1)
    if args.out:
        write_transfer_csv(samples, values, args.out, args.mag_phase, header_line=HEADER)
        rep.value("written", args.out, 1)
    else:
        for s, H in zip(samples, values):
            rep.matrix(f"H({fmt_complex(s)})", H, 1)
    status = 0
    if args.check_pr:
        verdict = positive_real_sample_check(target, samples, tol,
                                             check_storage=not args.no_storage_check)
        rep.line("positive-real sample check (necessary condition, non-exhaustive)")
        rep.value("passed", verdict.passed, 1)
        rep.value("min_eig", verdict.min_eig, 1)
        for f in verdict.failures:
            rep.value("failure_at", fmt_complex(f["s"]), 1)
            rep.value("failure_min_eig", f["min_eig"], 2)
            rep.matrix("witness", np.asarray(f["witness"]).reshape(1, -1), 2)
        status = 0 if verdict.passed else 1
    return status


def cmd_example(args, rep):
    if args.list or not args.name:
        for name in example_names():
            rep.value(name, example(name)["description"])
        return 0
    try:
        doc = example(args.name)
    except KeyError as exc:
        raise FileFormatError(str(exc.args[0])) from None
    if args.out:
        with open(args.out, "w") as fh:
            dump_document(doc, fh)
        rep.value("written", args.out)
    else:
        rep.line(dump_document(doc))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="phs", description="Port-Hamiltonian DAE structures, realizations and checks.",
        epilog=EPILOG)
    parser.add_argument("--version", action="version", version=HEADER)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="classify and validate every structure of a file",
                       epilog=EPILOG)
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("compose", help="compose two structures over a shared pair",
                       epilog=EPILOG)
    p.add_argument("file")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--shared", help="pair name, or FIRST:SECOND names (default: the common pair)")
    p.add_argument("--compare", help="structure in the same file to compare the result with")
    p.add_argument("--out", help="write the composed structure as a system file")
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("split", help="decompose a maximally monotone structure as D o R",
                       epilog=EPILOG)
    p.add_argument("file")
    p.add_argument("name")
    p.add_argument("--reduce", action="store_true",
                   help="use a resistive pair of dimension rank(symmetric part)")
    p.add_argument("--resistive-name", default="R")
    p.add_argument("--out", help="write D, R and the source structure as a system file")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("realize", help="print a descriptor realization", epilog=EPILOG)
    p.add_argument("file")
    p.add_argument("--route", choices=ROUTES)
    p.add_argument("--out", help="write the matrices as JSON")
    p.set_defaults(func=cmd_realize)

    p = sub.add_parser("simulate", help="integrate the scenario and audit the energy balance",
                       epilog=EPILOG)
    p.add_argument("file")
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--route", choices=ROUTES)
    p.add_argument("--h", type=float)
    p.add_argument("--t-end", type=float)
    p.add_argument("--audit-tol", type=float, default=1e-10)
    p.add_argument("--out", help="trajectory CSV")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("transfer", help="evaluate the transfer function on sample points",
                       epilog=EPILOG)
    p.add_argument("file")
    p.add_argument("--route", choices=("descriptor", "explicit"), default="descriptor")
    p.add_argument("--realization", choices=ROUTES,
                   help="descriptor realization to use (descriptor route)")
    p.add_argument("--s", help="comma-separated complex points, e.g. 1+2j,3")
    p.add_argument("--re", help="real parts: comma list or start:stop:count")
    p.add_argument("--im", help="imaginary parts: comma list or start:stop:count")
    p.add_argument("--check-pr", action="store_true",
                   help="sampled positive-real check (needs positive definite energy)")
    p.add_argument("--no-storage-check", action="store_true",
                   help="skip the positive definiteness precondition of --check-pr")
    p.add_argument("--mag-phase", action="store_true", help="add abs/arg columns to the CSV")
    p.add_argument("--out", help="transfer sweep CSV")
    p.set_defaults(func=cmd_transfer)

    p = sub.add_parser("example", help="emit a bundled example system file", epilog=EPILOG)
    p.add_argument("name", nargs="?", choices=example_names())
    p.add_argument("--list", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_example)
    return parser


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    # bare JSON on stdout keeps `phs example NAME > file.json` usable
    rep = Report(out, header=not (args.func is cmd_example and args.name and not args.out))
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return args.func(args, rep)
    except ConditionViolation as exc:
        # before ValueError, which it subclasses
        rep.value("error", f"{type(exc).__name__} [{exc.condition}]: {exc}")
        if exc.residual is not None:
            rep.value("residual", float(exc.residual))
        return 1
    except (FileFormatError, DimensionError, OSError, ValueError) as exc:
        rep.value("error", f"{type(exc).__name__}: {exc}")
        return 2
    except PhsError as exc:
        rep.value("error", f"{type(exc).__name__}: {exc}")
        return 1


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
