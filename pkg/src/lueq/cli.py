"""Command-line front end.

Exit codes: 0 success (valid state / Equivalent), 1 I/O or parse error,
2 invalid state, 3 Inequivalent, 4 Undecided, 5 dims mismatch.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import fileio
from .equivalence import EquivalenceConfig, decide_equivalence, orbit_dimension
from .errors import DimsMismatch, InvalidParams, LUEqError, StateValidationError
from .representation import build_representation
from .selftest import orbit_pair, run_orbit_test
from .states import BipartiteDims, WernerParams, random_density, validate, werner
from .tolerances import ToleranceConfig

EXIT_OK = 0
EXIT_IO = 1
EXIT_INVALID = 2
EXIT_INEQUIVALENT = 3
EXIT_UNDECIDED = 4
EXIT_DIMS = 5

log = logging.getLogger("lueq")


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _tolerances(args) -> ToleranceConfig:
    return ToleranceConfig(tol_rank=args.tol_rank, tol_cluster=args.tol_cluster, tol_accept=args.tol_accept)


def _load_state(path, tol=1e-10):
    try:
        dims, mat = fileio.read_matrix(path)
    except fileio.FileFormatError as exc:
        raise CliError(str(exc), EXIT_IO) from exc
    try:
        return validate(mat, dims, tol)
    except StateValidationError as exc:
        raise CliError(f"{path}: {exc}", EXIT_INVALID) from exc


def _emit(args, payload: dict, text: str) -> None:
    print(fileio.dumps(payload) if args.json else text, end="" if args.json else "\n")


def _fmt_complex_matrix(a, digits=6) -> list[str]:
    rows = []
    for row in np.asarray(a):
        cells = []
        for z in row:
            re, im = round(z.real, digits) + 0.0, round(z.imag, digits) + 0.0
            cells.append(f"{re:+.{digits}f}{im:+.{digits}f}i")
        rows.append("    [" + "  ".join(cells) + "]")
    return rows


# -- verbs -------------------------------------------------------------------


def cmd_validate(args) -> int:
    try:
        dims, mat = fileio.read_matrix(args.path)
    except fileio.FileFormatError as exc:
        raise CliError(str(exc), EXIT_IO) from exc
    herm = float(np.linalg.norm(mat - mat.conj().T))
    trace = complex(np.trace(mat))
    lowest = float(np.linalg.eigvalsh(0.5 * (mat + mat.conj().T))[0])
    diag = {"m": dims.m, "n": dims.n, "hermiticity_defect": herm, "trace_re": trace.real, "trace_im": trace.imag,
            "min_eigenvalue": lowest}
    try:
        validate(mat, dims)
    except StateValidationError as exc:
        diag.update(valid=False, violation=exc.invariant, message=str(exc))
        if args.json:
            _emit(args, diag, "")
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_INVALID
    diag["valid"] = True
    _emit(
        args,
        diag,
        f"dims          ({dims.m}, {dims.n})\n"
        f"||rho - rho^H|| {herm:.3e}\n"
        f"trace         {trace.real:.15g}{trace.imag:+.3e}i\n"
        f"min eigenvalue {lowest:.6e}\n"
        f"valid",
    )
    return EXIT_OK


def _represent_text(report: dict) -> str:
    lines = [f"dims ({report['m']}, {report['n']})  rank {report['rank']}"]
    lines.append("eigenvalue blocks " + str(report["eigenvalue_blocks"]))
    for i, it in enumerate(report["items"]):
        mu = ", ".join(f"{c:.10f}" for c in it["schmidt_coefficients"])
        lines.append(f"item {i + 1}: eigenvalue {it['eigenvalue']:.12f}  Schmidt rank {it['schmidt_rank']}  mu [{mu}]")
        if any(len(b) > 1 for b in it["schmidt_blocks"]):
            lines.append(f"  Schmidt blocks {it['schmidt_blocks']}")
        for name in ("x", "y"):
            lines.append(f"  {name.upper()}:")
            a = np.array(it[name]["re"]) + 1j * np.array(it[name]["im"])
            lines.extend(_fmt_complex_matrix(a))
    g = report["gauge_descriptor"]
    lines.append("gauge descriptor:")
    for key, value in g.items():
        lines.append(f"  {key}: {value}")
    lines.append(f"free_parameter_count {report['free_parameter_count']}")
    if not report["gauge_fixed"]:
        lines.append("note: completed bases not pinned by state data (phase solver will defer to the optimizer)")
    return "\n".join(lines)


def cmd_represent(args) -> int:
    tol = _tolerances(args)
    rho = _load_state(args.path)
    rep = build_representation(rho, tol)
    report = fileio.representation_to_json(rep, tol)
    if args.check:
        err = fileio.report_reconstruction_error(report, rho)
        report["reconstruction_error"] = err
        if err >= 1e-9:
            print(f"reconstruction check failed: error {err:.3e}", file=sys.stderr)
            return EXIT_INVALID
    if args.out:
        fileio.write_text(fileio.dumps(report), args.out)
    text = _represent_text(report)
    if args.check:
        text += f"\nreconstruction error {report['reconstruction_error']:.3e} (ok)"
    _emit(args, report, text)
    return EXIT_OK


def cmd_check(args) -> int:
    tol = _tolerances(args)
    rho = _load_state(args.path_a)
    rho2 = _load_state(args.path_b)
    if rho.dims != rho2.dims:
        raise CliError(f"dims differ: {tuple(rho.dims)} vs {tuple(rho2.dims)}", EXIT_DIMS)
    config = EquivalenceConfig(tol=tol, restarts=args.restarts, seed=args.seed)
    verdict = decide_equivalence(rho, rho2, config)
    payload = {"verdict": verdict.kind}
    if verdict.kind == "Equivalent":
        out = args.out or "certificate.json"
        fileio.write_text(fileio.dumps(fileio.certificate_to_json(verdict.certificate, verdict.residual)), out)
        payload.update(residual=verdict.residual, method=verdict.method, certificate=out)
        text = f"Equivalent  residual {verdict.residual:.3e}  ({verdict.method})\ncertificate written to {out}"
        code = EXIT_OK
    elif verdict.kind == "Inequivalent":
        payload.update(witness=str(verdict.witness), detail=verdict.detail)
        text = f"Inequivalent  witness {verdict.witness}\n  {verdict.detail}"
        code = EXIT_INEQUIVALENT
    else:
        payload.update(reason=verdict.reason, best_residual=verdict.best_residual)
        text = f"Undecided  best residual {verdict.best_residual:.3e}\n  {verdict.reason}"
        code = EXIT_UNDECIDED
    _emit(args, payload, text)
    return code


def cmd_gen(args) -> int:
    try:
        if args.kind == "werner":
            fileio.write_matrix(werner(WernerParams(args.e, args.f)), args.out)
        elif args.kind == "random":
            dims = BipartiteDims(args.m, args.n)
            fileio.write_matrix(random_density(dims, args.rank or dims.total, args.seed), args.out)
        else:
            dims = BipartiteDims(args.m, args.n)
            rho, rho2, lu = orbit_pair(dims, args.rank or dims.total, args.seed)
            prefix = args.out or "orbit"
            fileio.write_matrix(rho, f"{prefix}_a.json")
            fileio.write_matrix(rho2, f"{prefix}_b.json")
            fileio.write_text(fileio.dumps(fileio.certificate_to_json(lu)), f"{prefix}_lu.json")
            print(f"wrote {prefix}_a.json {prefix}_b.json {prefix}_lu.json")
    except InvalidParams as exc:
        raise CliError(f"invalid parameters: {exc}", EXIT_INVALID) from exc
    return EXIT_OK


def _parse_dims(text: str) -> tuple[int, int]:
    try:
        m, n = (int(v) for v in text.replace("x", ",").split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"dims must look like 2,3 (got {text!r})") from exc
    return m, n


def cmd_orbit_test(args) -> int:
    dims_list = args.dims or [(2, 2), (2, 3)]
    config = EquivalenceConfig(tol=_tolerances(args), restarts=args.restarts, seed=args.seed)
    summary = run_orbit_test(dims_list, args.trials, args.seed, config)
    payload = summary.to_json()
    lines = [f"{summary.passed}/{summary.trials} expected verdicts  max residual {summary.max_residual:.3e}"]
    lines += [f"  {k}: {v}" for k, v in sorted(summary.histogram.items())]
    for label, got in summary.failures:
        lines.append(f"  unexpected: {label} -> {got}")
    lines.append(f"{summary.seconds:.1f} s")
    if args.out:
        fileio.write_text(fileio.dumps(payload), args.out)
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK if summary.ok else EXIT_UNDECIDED


def cmd_dim(args) -> int:
    rho = _load_state(args.path)
    d = orbit_dimension(rho)
    ambient = rho.dims.total ** 2 - 1
    _emit(args, {"orbit_dimension": d, "ambient_dimension": ambient},
          f"orbit dimension {d}\nambient (m^2 n^2 - 1) {ambient}")
    return EXIT_OK


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-accept", type=float, default=1e-8, help="certificate residual bound (default 1e-8)")
    common.add_argument("--tol-rank", type=float, default=1e-9, help="zero threshold for eigenvalues and Schmidt coefficients")
    common.add_argument("--tol-cluster", type=float, default=1e-8, help="eigenvalue clustering tolerance")
    common.add_argument("--seed", type=int, default=0, help="random seed for gen, orbit-test and optimizer restarts")
    common.add_argument("--json", action="store_true", help="print a JSON report")
    common.add_argument("--out", default=None, help="output file (meaning depends on the verb)")

    parser = argparse.ArgumentParser(prog="lueq", description="Local-unitary equivalence of bipartite mixed states.")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("validate", parents=[common], help="check Hermiticity, trace and positivity")
    p.add_argument("path")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("represent", parents=[common], help="print the representation of a state")
    p.add_argument("path")
    p.add_argument("--check", action="store_true", help="rebuild the state from the report and compare")
    p.set_defaults(func=cmd_represent)

    p = sub.add_parser("check", parents=[common], help="decide LU equivalence of two states")
    p.add_argument("path_a")
    p.add_argument("path_b")
    p.add_argument("--restarts", type=int, default=32, help="optimizer restarts on degenerate strata")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("gen", parents=[common], help="write a test state")
    p.add_argument("kind", choices=["werner", "random", "orbit-pair"])
    p.add_argument("--e", type=float, default=0.0, help="Werner asymmetry parameter")
    p.add_argument("--f", type=float, default=0.25, help="Werner singlet weight")
    p.add_argument("--m", type=int, default=2, help="first factor dimension")
    p.add_argument("--n", type=int, default=2, help="second factor dimension")
    p.add_argument("--rank", type=int, default=None, help="default: full rank")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("orbit-test", parents=[common], help="run seeded orbit round-trips and negatives")
    p.add_argument("--dims", type=_parse_dims, action="append", help="e.g. 2,3 (repeatable; default 2,2 and 2,3)")
    p.add_argument("--trials", type=int, default=100, help="orbit pairs per dims (and as many negatives)")
    p.add_argument("--restarts", type=int, default=32, help="optimizer restarts on degenerate strata")
    p.set_defaults(func=cmd_orbit_test)

    p = sub.add_parser("dim", parents=[common], help="orbit dimension of a state")
    p.add_argument("path")
    p.set_defaults(func=cmd_dim)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=getattr(logging, os.environ.get("LUEQ_LOG", "WARNING").upper(), logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors; 2 is reserved for invalid states here
        return EXIT_IO if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except DimsMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIMS
    except (InvalidParams, StateValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except LUEqError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
