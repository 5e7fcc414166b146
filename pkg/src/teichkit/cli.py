"""Batch front-end: ``teichkit <command> [options]``.

Every command builds its inputs from the named fixtures, writes a
deterministic JSON report (sorted keys, no timestamps) and, with ``--csv``,
CSV series for plotting.  Artifacts go under ``--out`` with filenames made
from the command and fixture names.

Exit codes: 0 success, 2 verdict failure, 3 numerical error, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, config
from . import fixtures as fx
from .grid import ArgumentError, GridSpec

EXIT_OK, EXIT_VERDICT, EXIT_NUMERICAL, EXIT_USAGE = 0, 2, 3, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


# serialization -----------------------------------------------------------------

def _clean(obj):
    """JSON-ready copy: numpy scalars to Python, complex to [re, im], non-finite to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_clean(float(obj.real)), _clean(float(obj.imag))]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def dumps(report) -> str:
    return json.dumps(_clean(report), sort_keys=True, indent=1) + "\n"


def _slug(name):
    return "".join(c if c.isalnum() or c in "-._" else "_" for c in str(name))


class Run:
    """Per-invocation state: grid, output directory, artifact list."""

    def __init__(self, args):
        self.args = args
        self.spec = _grid(args.grid)
        self.out = Path(args.out) if args.out else None
        self.artifacts = []

    def path(self, *parts, suffix):
        name = "_".join(_slug(p) for p in parts if p) + suffix
        self.artifacts.append(name)
        self.out.mkdir(parents=True, exist_ok=True)
        return self.out / name

    def csv(self, parts, header, columns):
        if not (self.args.csv and self.out):
            return
        data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
        np.savetxt(self.path(*parts, suffix=".csv"), data, delimiter=",",
                   header=",".join(header), comments="", fmt="%.17g")


def _grid(value):
    if value in (None, "default"):
        return GridSpec()
    if value == "coarse":
        return GridSpec.coarse()
    p = Path(value)
    if not p.exists():
        raise UsageError(f"--grid must be 'default', 'coarse' or a GridSpec JSON file, got {value!r}")
    return GridSpec.from_json(p.read_text())


def _require(args, attr="fixture"):
    v = getattr(args, attr)
    if v is None:
        raise UsageError(f"--{attr.replace('_', '-')} is required for {args.command}")
    return v


def _verdict(ok):
    return "pass" if ok else "fail"


# commands ----------------------------------------------------------------------

def cmd_solve(run, args):
    from .solver import solve_bers, solve_disk
    name = _require(args)
    mu = fx.field(name, run.spec)
    f = (solve_disk if args.kind == "disk" else solve_bers)(mu)
    rep = {"fixture": {"mu": name}, "kind": f.kind, "sup_mu": mu.sup_bound,
           "neumann_terms": f.neumann_terms, "dbar_residual": f.dbar_residual,
           "contraction_ratios": f.contraction_ratios}
    if run.out:
        stem = f"solve_{_slug(name)}_{args.kind}"
        f.save(run.out, stem)
        run.artifacts += [f"{stem}_inner.csv", f"{stem}_outer.csv", f"{stem}.json"]
    ok = f.dbar_residual <= config.get("dbar_tol")
    return rep, ok


def cmd_embed(run, args):
    from .bers import b0_decay_profile, b_norm, bers_projection, decay_exponent
    name = _require(args)
    phi = bers_projection(fx.field(name, run.spec))
    prof = b0_decay_profile(phi)
    ah, r2, lower = decay_exponent(phi, prof)
    rep = {"fixture": {"mu": name}, "b_norm": b_norm(phi), "decay_profile": prof,
           "alpha_hat": ah, "fit_r2": r2, "alpha_hat_lower_bound_only": lower,
           "eps_min": phi.eps_min}
    if run.out:
        p = run.path("embed", name, "form", suffix=".csv")
        phi.to_csv(p)
        run.artifacts.append(p.with_suffix(".json").name)
    run.csv(("embed", name, "decay"), ["eps", "sup_weighted"], list(zip(*prof)) if prof else [[], []])
    return rep, True


def _is_form(name):
    return name in fx.FORMS


def cmd_norm(run, args):
    from .beltrami import maximal_dilatation
    from .bers import b_norm
    from .foliation import field_membership, form_membership
    name = _require(args)
    spaces = args.space or []
    if _is_form(name):
        phi = fx.form(name, run.spec)
        rep = {"fixture": {"form": name}, "object": "form", "b_norm": b_norm(phi), "spaces": {}}
        for s in spaces:
            ok, r = form_membership(phi, s)
            rep["spaces"][s] = {"member": ok, **r}
    else:
        mu = fx.field(name, run.spec)
        rep = {"fixture": {"mu": name}, "object": "field", "sup_norm": mu.sup_bound,
               "maximal_dilatation": maximal_dilatation(mu), "spaces": {}}
        for s in spaces:
            ok, r = field_membership(mu, s)
            rep["spaces"][s] = {"member": ok, **r}
    return rep, True


def cmd_coset(run, args):
    from .foliation import coset_residual
    name, base = _require(args), _require(args, "base")
    rep = coset_residual(fx.field(name, run.spec), fx.field(base, run.spec), args.space_one)
    rep["fixture"] = {"mu": name, "nu": base}
    prof = rep["delta"]["decay_profile"]
    run.csv(("coset", name, base, "decay"), ["eps", "sup_weighted"],
            list(zip(*prof)) if prof else [[], []])
    return rep, rep["verdict"] == "pass"


def cmd_mori(run, args):
    from .foliation import mori_profile
    from .solver import solve_disk
    name = _require(args)
    f = solve_disk(fx.field(name, run.spec))
    rep = mori_profile(f, finest=args.finest)
    rep["fixture"] = {"nu": name}
    if rep.get("status") != "evaluated":
        return rep, None
    th = 2 * np.pi * np.arange(len(rep["exponents"])) / len(rep["exponents"])
    run.csv(("mori", name, "exponents"), ["theta", "exponent"], [th, rep["exponents"]])
    return rep, rep["verdict"] == "pass"


def cmd_extend(run, args):
    from .extensions import classify_regularity
    name = _require(args)
    g = fx.circle_map(name)
    rep = classify_regularity(g, run.spec, de_spec=GridSpec.coarse())
    rep["fixture"] = {"circle_map": name}
    prof = rep.get("vanishing_profile") or []
    run.csv(("extend", name, "field_profile"), ["eps", "sup_mu"],
            list(zip(*prof)) if prof else [[], []])
    return rep, rep["consistent"] is not False


def cmd_aw(run, args):
    from .bers import b_norm, bers_projection
    from .extensions import ahlfors_weill, aw_pointwise_ratio
    name = _require(args)
    phi = fx.form(name, run.spec)
    mu = ahlfors_weill(phi)
    err = b_norm(bers_projection(mu) - phi)
    tol = args.tol if args.tol is not None else 5e-3
    rep = {"fixture": {"form": name}, "b_norm": b_norm(phi), "sup_mu": mu.sup_bound,
           "pointwise_ratio": aw_pointwise_ratio(mu, phi), "round_trip": err, "tolerance": tol}
    if run.out and args.csv:
        mu.to_csv(run.path("aw", name, "mu", suffix=".csv"))
        run.artifacts.append(f"aw_{_slug(name)}_mu.json")
    return rep, err < tol


def cmd_linearize(run, args):
    from .dynamics import Germ1D, sternberg_linearize
    if args.germ_csv:
        germ = Germ1D.from_csv(args.germ_csv, alpha=args.alpha, a=args.a)
        ident = {"germ_csv": Path(args.germ_csv).name}
        stem = Path(args.germ_csv).stem
    else:
        name = _require(args)
        germ = fx.germ(name)
        ident, stem = {"germ": name}, name
    tol = args.tol if args.tol is not None else 1e-10
    lin = sternberg_linearize(germ, tol=tol)
    rep = {"fixture": ident, **lin.report(), "factors": lin.factors}
    ok = lin.residual <= max(100 * tol, 1e-8) and lin.contraction_factor <= lin.bound + 0.05
    run.csv(("linearize", stem, "h"), ["x", "h"], [lin.x, lin.h])
    return rep, ok


def cmd_conjugate(run, args):
    from .dynamics import conjugate_circle, promotion_experiment
    from .grid import holder_ladder
    name, mob = _require(args), args.mobius
    f, gamma = fx.circle_map(name), fx.mobius(mob)
    G = conjugate_circle(f, gamma)
    alphas = [round(0.1 * i, 1) for i in range(1, 10)]
    consts, bounded, est = holder_ladder(G.deriv_samples, 2 * np.pi / G.n, alphas)
    rep = {"fixture": {"circle_map": name, "mobius": mob},
           "conjugate_holder_exponent": est,
           "conjugate_holder_bounded": {str(a): bounded[a] for a in alphas}}
    verdict = None
    if args.promotion:
        pr = promotion_experiment(f, gamma)
        rep["promotion"] = pr
        verdict = pr.get("verdict")
    if run.out:
        run.path("conjugate", name, mob, "map", suffix=".json").write_text(G.to_json() + "\n")
    run.csv(("conjugate", name, mob, "lift"), ["theta", "lift", "derivative"],
            [G.theta, G.lift_samples, G.deriv_samples])
    return rep, {"consistent": True, "inconsistent": False}.get(verdict, None if args.promotion else True)


def cmd_suite(run, args):
    from . import acceptance
    which = sorted({int(k) for k in args.criteria.split(",")}) if args.criteria else None
    if which and not set(which) <= set(acceptance.CRITERIA):
        raise UsageError(f"criteria must be among {sorted(acceptance.CRITERIA)}")
    spec = None if args.grid in (None, "default") else run.spec
    results = acceptance.run(which, spec)
    for r in results:
        print(f"{acceptance.summary_line(r)}  ({r['seconds']} s)", file=sys.stderr)
        r.pop("seconds")  # keep the report byte-stable
    rep = {"criteria": results, "passed": sum(r["passed"] for r in results),
           "total": len(results)}
    if run.out and args.csv:
        p = run.path("suite", "summary", suffix=".csv")
        p.write_text("criterion,name,passed\n" + "".join(
            f"{r['criterion']},{r['name']},{int(r['passed'])}\n" for r in results))
    return rep, all(r["passed"] for r in results)


COMMANDS = {
    "solve": (cmd_solve, "solve the Beltrami equation for a field fixture"),
    "embed": (cmd_embed, "Bers projection of a field fixture with norms"),
    "norm": (cmd_norm, "norms and membership evidence of a field or form"),
    "coset": (cmd_coset, "coset residual Phi(mu*nu) - Phi(nu) in a space"),
    "mori": (cmd_mori, "boundary distortion exponents of the disk self-map"),
    "extend": (cmd_extend, "barycentric extension and regularity report of a circle map"),
    "aw": (cmd_aw, "Ahlfors-Weill section and round trip through the Bers projection"),
    "linearize": (cmd_linearize, "Sternberg linearization of a germ"),
    "conjugate": (cmd_conjugate, "conjugate a Moebius element by a circle map"),
    "suite": (cmd_suite, "run the acceptance criteria"),
}


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--grid", default=None, help="'default', 'coarse' or a GridSpec JSON file")
    common.add_argument("--tol", type=float, default=None, help="tolerance override for the command")
    common.add_argument("--fixture", default=None, help="fixture name (see `teichkit fixtures`)")
    common.add_argument("--out", default=None, help="artifact directory")
    common.add_argument("--json", action="store_true", help="print the JSON report on stdout")
    common.add_argument("--csv", action="store_true", help="also write CSV series under --out")
    common.add_argument("--config", default=None, help="JSON file overriding configured thresholds")

    p = _Parser(prog="teichkit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    subs = {name: sub.add_parser(name, parents=[common], help=h) for name, (_, h) in COMMANDS.items()}
    sub.add_parser("fixtures", help="list fixture names")
    subs["solve"].add_argument("--kind", choices=["bers", "disk"], default="bers")
    subs["norm"].add_argument("--space", action="append",
                              help="B0, Ap:<p>, B0alpha:<a> or B0gtalpha:<a>; repeatable")
    subs["coset"].add_argument("--base", default=None, help="base point fixture nu")
    subs["coset"].add_argument("--space", dest="space_one", default="B0")
    subs["mori"].add_argument("--finest", type=int, default=None)
    subs["linearize"].add_argument("--germ-csv", default=None, help="CSV with columns x,g")
    subs["linearize"].add_argument("--alpha", type=float, default=0.5)
    subs["linearize"].add_argument("--a", type=float, default=None, help="multiplier g'(0)")
    subs["conjugate"].add_argument("--mobius", default="hyp0.5", help="Moebius fixture")
    subs["conjugate"].add_argument("--promotion", action="store_true",
                                   help="also run the regularity promotion experiment")
    subs["suite"].add_argument("--criteria", default=None, help="comma separated, default all")
    return p


def _numerical_errors():
    from .bers import BranchError
    from .dynamics import ContractionError, ResolutionError
    from .extensions import ExtensionError
    from .grid import DomainError
    from .solver import InversionError, SolverError
    return (SolverError, InversionError, DomainError, ContractionError, ResolutionError, BranchError,
            ExtensionError, ArithmeticError, np.linalg.LinAlgError)


def _usage_errors():
    from .circle import MonotonicityError
    from .extensions import OutOfRangeError
    return (UsageError, ArgumentError, OutOfRangeError, MonotonicityError, KeyError, FileNotFoundError)


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "fixtures":
        sys.stdout.write(dumps(fx.catalog()))
        return EXIT_OK
    from .foliation import PreconditionError
    config.reset()
    try:
        if args.config:
            config.load(args.config)
        if args.tol is not None and args.command not in ("linearize", "aw"):
            config.update({"solver_tol": args.tol})
        run = Run(args)
        report, ok = COMMANDS[args.command][0](run, args)
    except _usage_errors() as exc:
        print(f"teichkit {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PreconditionError as exc:
        print(f"teichkit {args.command}: precondition failed: {exc.args[0]}", file=sys.stderr)
        return EXIT_VERDICT
    except _numerical_errors() as exc:
        print(f"teichkit {args.command}: numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    finally:
        config.reset()

    verdict = "indeterminate" if ok is None else _verdict(ok)
    full = {"command": args.command, "version": __version__, "grid_hash": run.spec.grid_hash(),
            "verdict": verdict, "report": report}
    if args.config:
        full["config_file"] = Path(args.config).name
    if args.tol is not None:
        full["tol"] = args.tol
    if run.artifacts:
        full["artifacts"] = sorted(run.artifacts)
    text = dumps(full)
    if run.out:
        fix = report.get("fixture", {}) if isinstance(report, dict) else {}
        run.path(args.command, *fix.values(), "report", suffix=".json").write_text(text)
    if args.json:
        sys.stdout.write(text)
    else:
        print(f"{args.command}: {verdict}  grid {run.spec.grid_hash()}")
    return EXIT_OK if ok is not False else EXIT_VERDICT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
