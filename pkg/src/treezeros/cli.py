"""Command line: ``treezeros <subcommand> [flags]``.

Exit status 0 on success, 2 for precondition errors (bad input), 3 for
numeric failures (no convergence, exhausted hunts and the like).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .algebra import (
    compose_rational,
    exact_multiplier,
    fixed_point_poly,
    multiplier_poly,
    parabolic_candidates,
    resultant_z,
)
from .dynamics import DegreeWord
from .errors import NumericFailure, PreconditionError
from .hunt import HuntSettings, hunt_report, hunt_zero, report_settings
from .numeric import DEFAULT_PRECISION, complex_to_json, format_real, parse_complex
from .parabolic import SolverSettings, multiplier_curve, reproduce_table, solve_parabolic
from .region import udelta_witness
from .reporting import (
    BOUNDARY_HEADER,
    CURVE_HEADER,
    RunConfig,
    Stopwatch,
    boundary_rows,
    curve_rows,
    emit_figure_data,
    hunt_to_json,
    metadata,
    solution_to_json,
    table_row_to_json,
    udelta_to_json,
    verify_lemmas,
    witness_to_json,
    write_csv,
)
from .trees import build_tree, certify_zero, evaluate_Z, exact_cost_bits, indep_poly_exact, EXACT_BITS_CAP

COMMANDS = (
    "table1",
    "parabolic",
    "curve",
    "udelta",
    "boundary",
    "resultant",
    "tree",
    "certify",
    "hunt",
    "verify-lemmas",
    "figure",
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(2, f"{self.prog}: usage error: {message}\n")


def _common(p):
    p.add_argument("--delta", type=int)
    p.add_argument("--word", action="append", help="comma-separated degrees, e.g. 1,2 (figure accepts several)")
    p.add_argument("--multiplier", default="1", help='"a+bi" or "exp(i*theta)"')
    p.add_argument("--lambda", dest="lam", help='"a+bi"')
    p.add_argument("--precision", type=int, default=DEFAULT_PRECISION)
    p.add_argument("--tol", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--nmax", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out")


def build_parser():
    parser = _Parser(prog="treezeros", description="Parabolic parameters and tree zeros near the boundary of U_delta.")
    parser.add_argument("--version", action="version", version=f"treezeros {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "table1": "re-solve the multiplier-1 table rows (all, or one --delta)",
        "parabolic": "solve for lam with a fixed point of the given multiplier",
        "curve": "trace the multiplier curve of a word",
        "udelta": "U_delta membership witness for --lambda",
        "boundary": "sample the boundary of U_delta",
        "resultant": "exact resultant of the fixed-point and multiplier polynomials",
        "tree": "tree sizes and independence polynomial of a word",
        "certify": "certify a zero witness (word, lambda)",
        "hunt": "hunt for certified zeros near a parabolic parameter",
        "verify-lemmas": "Shearer-disc fixed-point suites and the polynomial oracle sweep",
        "figure": "write curve and boundary CSV files for plotting",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=helps[name])
        _common(p)
        if name == "verify-lemmas":
            p.add_argument("--trials", type=int)
        if name == "hunt":
            p.add_argument("--allow-beyond", action="store_true", help="permit delta > 9")
    return parser


# ---------------------------------------------------------------- helpers


def _word(args, required=True):
    if not args.word:
        if required:
            raise PreconditionError("--word is required")
        return None
    return DegreeWord.parse(args.word[-1], args.delta)


def _lam(args, required=True):
    if args.lam is None:
        if required:
            raise PreconditionError("--lambda is required")
        return None
    return parse_complex(args.lam, args.precision) if args.precision > DEFAULT_PRECISION else complex(parse_complex(args.lam))


def _need_delta(args):
    if args.delta is None:
        raise PreconditionError("--delta is required")
    return args.delta


def _settings(args):
    return SolverSettings(precision=args.precision, tol=args.tol)


def _c(z, P=DEFAULT_PRECISION):
    return complex_to_json(z, P)


# ---------------------------------------------------------------- commands
# each returns (json payload, csv header, csv rows)


def cmd_table1(args):
    deltas = [args.delta] if args.delta is not None else list(range(3, 10))
    rows = [reproduce_table(d, _settings(args)) for d in deltas]
    header = ("delta", "word", "lambda_re", "lambda_im", "alpha_modulus", "res_fix", "res_mult", "provenance")
    csv_rows = [
        [
            r.delta,
            str(r.word),
            format_real(r.lam.real, r.solution.precision),
            format_real(r.lam.imag, r.solution.precision),
            repr(float(r.alpha_modulus)),
            format_real(r.solution.res_fix, 53),
            format_real(r.solution.res_mult, 53),
            r.provenance,
        ]
        for r in rows
    ]
    return {"rows": [table_row_to_json(r) for r in rows]}, header, csv_rows


def cmd_parabolic(args):
    word = _word(args)
    mu = parse_complex(args.multiplier, max(args.precision, DEFAULT_PRECISION))
    seed = _lam(args, required=False)
    settings = _settings(args)
    if seed is None:
        from .parabolic import default_curve_start, discover_parabolic

        if complex(mu) == 1:
            sol = default_curve_start(word, settings)
        else:
            sols = discover_parabolic(word, mu, settings)
            if not sols:
                from .errors import NoConvergence

                raise NoConvergence(settings.max_iter, math.inf)
            sol = sols[0]
    else:
        sol = solve_parabolic(word, mu, seed, None, settings)
    wit = udelta_witness(word.delta, sol.lam)
    payload = {"solution": solution_to_json(sol), "udelta": udelta_to_json(wit)}
    header = ("lambda_re", "lambda_im", "z_re", "z_im", "res_fix", "res_mult", "alpha_modulus")
    P = sol.precision
    row = [
        format_real(sol.lam.real, P),
        format_real(sol.lam.imag, P),
        format_real(sol.z.real, P),
        format_real(sol.z.imag, P),
        format_real(sol.res_fix, 53),
        format_real(sol.res_mult, 53),
        repr(float(wit.modulus)),
    ]
    return payload, header, [row]


def cmd_curve(args):
    word = _word(args)
    samples = args.samples or 256
    seed = _lam(args, required=False)
    curve = multiplier_curve(word, samples, _settings(args), start=seed)
    payload = {
        "word": list(word.degrees),
        "delta": word.delta,
        "samples": [solution_to_json(s) for s in curve],
        "branch_switches": curve.branch_switches,
        "steps": curve.steps,
    }
    return payload, CURVE_HEADER, curve_rows(curve)


def cmd_udelta(args):
    delta = _need_delta(args)
    wit = udelta_witness(delta, _lam(args), args.precision)
    row = [
        format_real(wit.alpha_min.real, wit.precision),
        format_real(wit.alpha_min.imag, wit.precision),
        repr(float(wit.modulus)),
        wit.verdict,
        str(wit.member).lower(),
    ]
    return udelta_to_json(wit), ("alpha_min_re", "alpha_min_im", "modulus", "verdict", "member"), [row]


def cmd_boundary(args):
    delta = _need_delta(args)
    samples = args.samples or 256
    rows = boundary_rows(delta, samples, args.precision)
    payload = {"delta": delta, "points": [{"theta": r[0], "re": r[1], "im": r[2]} for r in rows]}
    return payload, BOUNDARY_HEADER, rows


def cmd_resultant(args):
    word = _word(args)
    mu = args.multiplier
    exact_multiplier(mu)  # refuse inexact input before any work
    P, Q = compose_rational(word)
    R = resultant_z(fixed_point_poly(P, Q), multiplier_poly(P, Q, mu))
    precision = max(args.precision, 128)
    report = parabolic_candidates(word, mu, precision)
    payload = {
        "word": list(word.degrees),
        "delta": word.delta,
        "mu": str(mu),
        "resultant": R.to_json(),
        "lambda_zero_multiplicity": report.lambda_zero_multiplicity,
        "candidates": [_c(c, precision) for c in report.candidates],
        "solutions": [solution_to_json(s) for s in report.solutions],
        "spurious": [{"lambda": _c(c, precision), "reason": why} for c, why in report.spurious],
    }
    rows = [[format_real(c.real, precision), format_real(c.imag, precision), "verified"] for c in (s.lam for s in report.solutions)]
    rows += [[format_real(c.real, precision), format_real(c.imag, precision), why] for c, why in report.spurious]
    return payload, ("lambda_re", "lambda_im", "status"), rows


def cmd_tree(args):
    word = _word(args)
    tree = build_tree(word)
    payload = {
        "word": list(word.degrees),
        "delta": word.delta,
        "level_sizes": [str(s) if s >= 2**53 else s for s in tree.level_sizes],
        "vertex_count": str(tree.vertex_count) if tree.vertex_count >= 2**53 else tree.vertex_count,
        "adjacency_materialised": not tree.adjacency_omitted,
    }
    rows = []
    if exact_cost_bits(word) <= EXACT_BITS_CAP:
        poly = indep_poly_exact(word)
        payload["independence_polynomial"] = [str(a) for a in poly.coefficients]
        rows = [[j, str(a)] for j, a in enumerate(poly.coefficients)]
        lam = _lam(args, required=False)
        if lam is not None:
            zv = evaluate_Z(poly, lam, args.precision)
            payload["value"] = _c(zv.value, args.precision)
            payload["error_bound"] = format_real(zv.error_bound, 53)
    else:
        payload["independence_polynomial"] = None
    return payload, ("j", "a_j"), rows


def cmd_certify(args):
    word = _word(args)
    lam = _lam(args)
    wit = certify_zero(word, lam, max(args.precision, 256))
    payload = witness_to_json(wit)
    row = [payload["lambda"]["re"], payload["lambda"]["im"], payload["orbit_residual"], wit.tier, str(wit.udelta.member).lower()]
    return payload, ("lambda_re", "lambda_im", "orbit_residual", "tier", "member"), [row]


def cmd_hunt(args):
    word = _word(args, required=False)
    nmax = args.nmax
    if word is None:
        delta = _need_delta(args)
        settings = replace(report_settings(), rng_seed=args.seed)
        results = hunt_report(delta, settings, nmax or 256, allow_beyond=args.allow_beyond)
    else:
        settings = replace(HuntSettings(), rng_seed=args.seed)
        results = [hunt_zero(word, _lam(args), nmax or 64, None, settings)]
    header = ("delta", "base_word", "n_iterates", "lambda_re", "lambda_im", "distance", "alpha_modulus", "member", "orbit_residual")
    rows = []
    for r in results:
        w = witness_to_json(r.witness)
        rows.append(
            [
                r.base_word.delta,
                str(r.base_word),
                r.n_iterates,
                w["lambda"]["re"],
                w["lambda"]["im"],
                repr(r.distance),
                repr(float(r.witness.udelta.modulus)),
                str(r.witness.udelta.member).lower(),
                w["orbit_residual"],
            ]
        )
    return {"results": [hunt_to_json(r) for r in results]}, header, rows


def cmd_verify_lemmas(args):
    delta = _need_delta(args)
    trials = args.trials if args.trials is not None else (args.samples if args.samples is not None else 200)
    report = verify_lemmas(delta, trials, args.seed)
    rows = [[p.name, "pass" if p.passed else "fail", p.checked, len(p.counterexamples)] for p in report.properties]
    return report.to_json(), ("property", "status", "checked", "counterexamples"), rows


def cmd_figure(args):
    delta = _need_delta(args)
    words = [DegreeWord.parse(w, delta) for w in (args.word or [])]
    out_dir = args.out or "figure_data"
    paths = emit_figure_data(words, delta, args.samples or 256, out_dir, _settings(args))
    return {"files": [str(p) for p in paths]}, ("file",), [[str(p)] for p in paths]


HANDLERS = {
    "table1": cmd_table1,
    "parabolic": cmd_parabolic,
    "curve": cmd_curve,
    "udelta": cmd_udelta,
    "boundary": cmd_boundary,
    "resultant": cmd_resultant,
    "tree": cmd_tree,
    "certify": cmd_certify,
    "hunt": cmd_hunt,
    "verify-lemmas": cmd_verify_lemmas,
    "figure": cmd_figure,
}


def _config(args):
    return RunConfig(
        command=args.command,
        delta=args.delta,
        word=";".join(args.word) if args.word else None,
        multiplier=args.multiplier,
        seeds=args.lam,
        precision=args.precision,
        tol=args.tol,
        samples=args.samples,
        nmax=args.nmax,
        out=args.out,
        format=args.format,
        rng_seed=args.seed,
    )


def cmd_dispatch(argv=None, stdout=None):
    """Parse ``argv``, run the subcommand, write the artifact; returns the exit status."""
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.precision < DEFAULT_PRECISION:
            raise PreconditionError(f"--precision must be >= {DEFAULT_PRECISION}")
        with Stopwatch() as sw:
            payload, header, rows = HANDLERS[args.command](args)
    except PreconditionError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (NumericFailure, ArithmeticError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    meta = metadata(_config(args), sw.elapsed)
    out = None if args.command == "figure" else args.out
    if args.format == "csv":
        text = write_csv(header, rows)
        if out:
            Path(out).write_text(text, encoding="utf-8")
            Path(out + ".meta.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
        else:
            stdout.write(text)
    else:
        text = json.dumps({"metadata": meta, "result": payload}, indent=2, default=str) + "\n"
        if out:
            Path(out).write_text(text, encoding="utf-8")
        else:
            stdout.write(text)
    return 0


def main(argv=None):
    sys.exit(cmd_dispatch(argv))


if __name__ == "__main__":
    main()
