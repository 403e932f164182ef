"""Command-line entry point.

Subcommands: gen, check, ops, orth, sqrt, claims, explore.

Exit codes: 0 when every requested check passes, 1 when an invariant is
violated (or, with --strict, when a diagnostic claim FAILS), 2 on input errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import BadMatrix, BadResolution, ComplexAlpha, NegativeJump, NotDefinite, Singular
from .harness import (CLAIMS, EnsembleConfig, FAILS, Instance, claim_kind, generate_instance,
                      run_claim, triple_explore)
from .linalg import general_eig, matrix_from_json, matrix_to_json, op_norm, rel_tol
from .operators import build_B, build_triple, summaries_to_csv, triple_summary
from .resolution import (BiorthogonalSystem, StepResolution, adjoint_resolution, check_axioms,
                         from_biorthogonal, gamma, lemma_f_residuals)
from .similarity import orthogonalize, pseudo_sqrt


class InputError(Exception):
    pass


def _reject_constant(name):
    raise ValueError(f"non-finite number {name} is not allowed")


def load_json(path: str):
    text = Path(path).read_text(encoding="utf-8") if path != "-" else sys.stdin.read()
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, allow_nan=False) + "\n"


def emit(text: str, out) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def load_resolution(path: str, force: bool, tol_scale: float) -> StepResolution:
    obj = load_json(path)
    try:
        return StepResolution.from_json(obj, force=force, tol=1e-10 * tol_scale)
    except (BadMatrix, BadResolution) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _cfg(args, trials=None) -> EnsembleConfig:
    try:
        return EnsembleConfig(
            n=args.n, m=args.m, trials=trials if trials is not None else args.trials,
            seed=args.seed, kappa_max=args.kappa, spectrum_kind=args.spectrum,
            construction=args.construction, probes=args.probes, tol_scale=args.tol_scale)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


# ---------------------------------------------------------------- commands

def cmd_gen(args) -> int:
    if args.basis:
        if not args.alphas:
            raise InputError("--basis requires --alphas")
        try:
            alphas = [float(a) for a in args.alphas.split(",")]
            M = matrix_from_json(load_json(args.basis))
            system = BiorthogonalSystem.from_basis(M, alphas)
            X = from_biorthogonal(system, tie_tol=args.tie_tol)
        except (ValueError, BadMatrix, ComplexAlpha, Singular) as exc:
            raise InputError(str(exc)) from exc
        kappa = system.cond
    else:
        inst = generate_instance(_cfg(args, trials=1), 0)
        X, kappa = inst.X, inst.kappa
    emit(dumps(X.to_json()), args.out)
    print(f"gamma={gamma(X):.17g} kappa={kappa:.17g}", file=sys.stderr)
    return 0


def cmd_check(args) -> int:
    X = load_resolution(args.input, args.force, args.tol_scale)
    ts = args.tol_scale
    rep = check_axioms(X, tol=1e-10 * ts)
    rep_adj = check_axioms(adjoint_resolution(X), tol=1e-10 * ts)
    rep_f = lemma_f_residuals(X, tol=1e-9 * ts)
    out = {"gamma": gamma(X), "axioms": rep.to_json(), "adjoint_axioms": rep_adj.to_json(),
           "lemma_f": rep_f.to_json()}
    emit(dumps(out), args.out)
    return 0 if (rep.holds and rep_adj.holds and rep_f.holds) else 1


def cmd_ops(args) -> int:
    X = load_resolution(args.input, args.force, args.tol_scale)
    trip = build_triple(X)
    s = triple_summary(X)
    herm = max(op_norm(trip.T_X - trip.T_X.conj().T), op_norm(trip.S_X - trip.S_X.conj().T))
    if args.format == "csv":
        emit(summaries_to_csv([({}, s)]), args.out)
    else:
        emit(dumps({**trip.to_json(), "summary": s.to_json()}), args.out)
    return 0 if herm <= rel_tol(1e-10 * args.tol_scale, 1.0) else 1


def cmd_orth(args) -> int:
    X = load_resolution(args.input, args.force, args.tol_scale)
    try:
        model = orthogonalize(X)
    except NotDefinite as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    kG = model.kappa ** 2
    rec = model.reconstruction_residual(X)
    proj = model.projection_residual()
    out = {**model.to_json(), "kappa_G": kG, "reconstruction_residual": rec,
           "projection_residual": proj, "metric_residual": model.metric_residual(X)}
    emit(dumps(out), args.out)
    ts = args.tol_scale
    ok = rec <= rel_tol(1e-8 * ts, kG) and proj <= rel_tol(1e-9 * ts, 1.0)
    return 0 if ok else 1


def cmd_sqrt(args) -> int:
    X = load_resolution(args.input, args.force, args.tol_scale)
    try:
        B2 = pseudo_sqrt(X)
    except NegativeJump as exc:
        raise InputError(str(exc)) from exc
    B = build_B(X)
    kG = orthogonalize(X).kappa ** 2
    residual = op_norm(B2 @ B2 - B)
    bound = rel_tol(1e-8 * args.tol_scale, kG * float(X.jumps.max()))
    out = {"B2": matrix_to_json(B2), "residual": residual, "bound": bound,
           "spectrum": [[float(z.real), float(z.imag)] for z in general_eig(B2)]}
    emit(dumps(out), args.out)
    return 0 if residual <= bound else 1


def cmd_claims(args) -> int:
    ids = args.claim or list(CLAIMS)
    for c in ids:
        if c not in CLAIMS:
            raise InputError(f"unknown claim {c!r}; known: {', '.join(CLAIMS)}")
    cfg = _cfg(args)
    instances = None
    if args.input:
        X = load_resolution(args.input, args.force, args.tol_scale)
        instances = [Instance.from_resolution(X, probes=args.probes, seed=args.seed)]
    reports = [run_claim(c, cfg, instances) for c in ids]
    emit(dumps({"reports": [r.to_json() for r in reports]}), args.out)
    if args.cex_dir:
        d = Path(args.cex_dir)
        d.mkdir(parents=True, exist_ok=True)
        for r in reports:
            if r.counterexample is not None:
                (d / f"{r.claim}.cex.json").write_text(dumps(r.counterexample), encoding="utf-8")
    code = 0
    for r in reports:
        print(f"{r.claim}: {r.status} (max_residual={r.max_residual:.3e})", file=sys.stderr)
        if r.status == FAILS and (claim_kind(r.claim) == "invariant" or args.strict):
            code = 1
    return code


def _parse_sweep(spec: str) -> np.ndarray:
    try:
        name, rng = spec.split("=", 1)
        lo, hi, count = rng.split(":")
        if name.strip() != "t":
            raise ValueError
        return np.linspace(float(lo), float(hi), int(count))
    except ValueError as exc:
        raise InputError(f"--sweep expects t=LO:HI:COUNT, got {spec!r}") from exc


def cmd_explore(args) -> int:
    cfg = _cfg(args)
    ts = _parse_sweep(args.sweep) if args.sweep else None
    table = triple_explore(cfg, sweep_ts=ts)
    if args.format == "csv":
        if args.sweep:
            text = summaries_to_csv(table.sweep, ("t", "gap_max_abs", "gap_mean", "gap_min"))
        else:
            text = summaries_to_csv(table.rows, ("trial", "kappa_T", "gap_max_abs",
                                                 "gap_mean", "gap_min"))
        emit(text, args.out)
    else:
        emit(dumps(table.to_json()), args.out)
    if table.spearman is not None:
        print(f"spearman(dist_TX_SX, gamma-1) = {table.spearman:.6f}", file=sys.stderr)
    return 0


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--n", type=int, default=4, help="dimension")
    common.add_argument("--m", type=int, default=3, help="number of jumps")
    common.add_argument("--kappa", type=float, default=10.0, help="condition bound for T")
    common.add_argument("--tol-scale", type=float, default=1.0,
                        help="multiply every default tolerance by this factor")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", default=None, help="output path (default stdout)")
    common.add_argument("--strict", action="store_true",
                        help="exit 1 when a diagnostic claim FAILS, not only on invariants")
    common.add_argument("--force", action="store_true",
                        help="load families that violate the invariants")

    ens = argparse.ArgumentParser(add_help=False)
    ens.add_argument("--trials", type=int, default=20)
    ens.add_argument("--probes", type=int, default=20)
    ens.add_argument("--spectrum", choices=("real", "positive", "clustered"), default="real")
    ens.add_argument("--construction", choices=("similarity", "biorthogonal"),
                     default="similarity")

    p = argparse.ArgumentParser(prog="nsres", description=__doc__.splitlines()[0])
    p.add_argument("--backend-info", action="store_true", help="print the kernel backend")
    sub = p.add_subparsers(dest="command")

    g = sub.add_parser("gen", parents=[common, ens], help="generate a step resolution")
    g.add_argument("--basis", help="matrix JSON whose columns are the basis vectors")
    g.add_argument("--alphas", help="comma-separated eigenvalues for --basis")
    g.add_argument("--tie-tol", type=float, default=None)
    g.set_defaults(func=cmd_gen)

    for name, func, hlp in (("check", cmd_check, "check the resolution axioms"),
                            ("ops", cmd_ops, "build B, T_X, S_X"),
                            ("orth", cmd_orth, "recover the similarity to a self-adjoint family"),
                            ("sqrt", cmd_sqrt, "pseudo-Hermitian square root of B")):
        s = sub.add_parser(name, parents=[common], help=hlp)
        s.add_argument("--input", required=True)
        s.set_defaults(func=func)

    c = sub.add_parser("claims", parents=[common, ens], help="run the claims harness")
    c.add_argument("--claim", action="append", help="claim id (repeatable; default all)")
    c.add_argument("--input", help="evaluate on this family instead of an ensemble")
    c.add_argument("--cex-dir", help="write each counterexample to DIR/<claim>.cex.json")
    c.set_defaults(func=cmd_claims)

    e = sub.add_parser("explore", parents=[common, ens], help="tabulate B, T_X, S_X")
    e.add_argument("--sweep", help="continuation sweep, e.g. t=0:1:11")
    e.set_defaults(func=cmd_explore)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.backend_info:
        print(_kernels.BACKEND)
        return 0
    if args.command is None:
        parser.print_help(sys.stderr)
        return 2
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
