"""Serialisation, run metadata, figure data and the lemma property suites."""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .dynamics import DegreeWord, as_word
from .errors import ContinuationStall, PreconditionError
from .numeric import (
    DEFAULT_PRECISION,
    complex_from_json,
    complex_to_json,
    format_real,
    hit_tolerance,
    newton_tolerance,
    pole_guard,
)
from .parabolic import INDIFFERENCE_BAND, ParabolicSolution, classify_fixed_points, multiplier_curve
from .region import BOUNDARY_BAND, UdeltaWitness, shearer_radius, udelta_boundary
from .trees import ZeroWitness, build_tree, indep_poly_bruteforce, indep_poly_exact


@dataclass
class RunConfig:
    command: str
    delta: Optional[int] = None
    word: Optional[str] = None
    multiplier: Optional[str] = None
    seeds: Optional[str] = None
    precision: int = DEFAULT_PRECISION
    tol: Optional[float] = None
    samples: Optional[int] = None
    nmax: Optional[int] = None
    out: Optional[str] = None
    format: str = "json"
    rng_seed: int = 0

    def to_dict(self):
        return asdict(self)


def metadata(config, wall_time):
    """Everything needed to rerun: version, precision, every tolerance, seed, timing."""
    P = config.precision
    return {
        "tool": "treezeros",
        "version": __version__,
        "precision_bits": P,
        "tolerances": {
            "newton": config.tol if config.tol is not None else newton_tolerance(P),
            "hit": hit_tolerance(P),
            "pole_guard": pole_guard(P),
            "boundary_band": BOUNDARY_BAND,
            "indifference_band": INDIFFERENCE_BAND,
        },
        "rng_seed": config.rng_seed,
        "wall_time_s": round(wall_time, 6),
        "config": config.to_dict(),
    }


# ---------------------------------------------------------------- records


def solution_to_json(sol):
    P = sol.precision
    return {
        "word": list(sol.word.degrees),
        "delta": sol.word.delta,
        "mu": complex_to_json(sol.mu, P),
        "lambda": complex_to_json(sol.lam, P),
        "z": complex_to_json(sol.z, P),
        "res_fix": format_real(sol.res_fix, 53),
        "res_mult": format_real(sol.res_mult, 53),
        "jacobian_condition": format_real(sol.jacobian_condition, 53),
        "precision_bits": P,
        "iterations": sol.iterations,
        "tol": format_real(sol.tol, 53),
    }


def solution_from_json(obj):
    P = obj["precision_bits"]
    return ParabolicSolution(
        word=DegreeWord(tuple(obj["word"]), obj["delta"]),
        mu=complex_from_json(obj["mu"], P),
        lam=complex_from_json(obj["lambda"], P),
        z=complex_from_json(obj["z"], P),
        res_fix=float(obj["res_fix"]),
        res_mult=float(obj["res_mult"]),
        jacobian_condition=float(obj["jacobian_condition"]),
        precision=P,
        iterations=obj["iterations"],
        tol=float(obj["tol"]),
    )


def udelta_to_json(w):
    P = w.precision
    return {
        "delta": w.delta,
        "lambda": complex_to_json(w.lam, P),
        "alpha_roots": [complex_to_json(a, P) for a in w.alpha_roots],
        "alpha_min": complex_to_json(w.alpha_min, P),
        "modulus": repr(float(w.modulus)),
        "verdict": w.verdict,
        "member": w.member,
        "tie": w.tie,
        "precision_bits": P,
    }


def udelta_from_json(obj):
    P = obj["precision_bits"]
    return UdeltaWitness(
        delta=obj["delta"],
        lam=complex_from_json(obj["lambda"], P),
        alpha_roots=tuple(complex_from_json(a, P) for a in obj["alpha_roots"]),
        alpha_min=complex_from_json(obj["alpha_min"], P),
        modulus=float(obj["modulus"]),
        verdict=obj["verdict"],
        tie=obj["tie"],
        precision=P,
    )


def witness_to_json(w):
    out = w.to_json()
    out["udelta"] = udelta_to_json(w.udelta)
    out["tolerance"] = format_real(w.tolerance, 53)
    out["refinement_shift"] = format_real(w.refinement_shift, 53)
    if w.ratio_residual is not None:
        out["ratio_residual"] = format_real(w.ratio_residual, 53)
    return out


def witness_from_json(obj):
    """Rebuild a ZeroWitness; the exact-evaluation record is not part of the artifact."""
    P = obj["precision_bits"]
    word = DegreeWord(tuple(obj["word"]), obj["delta"])
    tree = build_tree(word, adjacency_cap=0)
    sizes = [int(s) for s in obj["tree"]["level_sizes"]]
    if list(tree.level_sizes) != sizes:
        raise PreconditionError("tree level sizes do not match the word")
    return ZeroWitness(
        word=word,
        lam=complex_from_json(obj["lambda"], P),
        precision=P,
        orbit_residual=float(obj["orbit_residual"]),
        udelta=udelta_from_json(obj["udelta"]),
        tier=obj["tier"],
        tree=tree,
        tolerance=float(obj["tolerance"]),
        ratio_residual=float(obj["ratio_residual"]) if "ratio_residual" in obj else None,
        refinement_shift=float(obj["refinement_shift"]),
        notes=tuple(obj.get("notes", ())),
    )


def hunt_to_json(res):
    out = res.to_json()
    out["witness"] = witness_to_json(res.witness)
    return out


def hunt_from_json(obj):
    from .hunt import HuntResult

    witness = witness_from_json(obj["witness"])
    base = DegreeWord(tuple(obj["base_word"]), obj["delta"])
    return HuntResult(
        base_word=base,
        n_iterates=obj["n_iterates"],
        full_word=base.repeated(obj["n_iterates"]),
        lambda0=complex_from_json(obj["lambda0"], 53),
        lam=witness.lam,
        distance=float(obj["distance"]),
        witness=witness,
        radius=float(obj["radius"]),
    )


def table_row_to_json(row):
    return {
        "delta": row.delta,
        "word": list(row.word.degrees),
        "lambda": complex_to_json(row.lam, row.solution.precision),
        "alpha_modulus": repr(float(row.alpha_modulus)),
        "res_fix": format_real(row.solution.res_fix, 53),
        "res_mult": format_real(row.solution.res_mult, 53),
        "published_lambda": complex_to_json(row.published_lambda, 53),
        "published_alpha_modulus": repr(row.published_alpha),
        "provenance": row.provenance,
        "solution": solution_to_json(row.solution),
    }


# ---------------------------------------------------------------- CSV


def write_csv(header, rows, target=None):
    """Write rows with a header; returns the text when ``target`` is None."""
    buf = io.StringIO() if target is None else open(target, "w", newline="", encoding="utf-8")
    try:
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        if target is None:
            return buf.getvalue()
    finally:
        if target is not None:
            buf.close()
    return str(target)


def _real_text(x, precision=DEFAULT_PRECISION):
    return format_real(x, precision)


def curve_rows(curve):
    rows = []
    for theta, sol in zip(curve.thetas, curve.solutions):
        P = sol.precision
        rows.append(
            [
                _real_text(theta),
                _real_text(sol.lam.real, P),
                _real_text(sol.lam.imag, P),
                _real_text(sol.res_fix),
                _real_text(sol.res_mult),
            ]
        )
    return rows


CURVE_HEADER = ("theta", "lambda_re", "lambda_im", "res_fix", "res_mult")
BOUNDARY_HEADER = ("theta", "lambda_re", "lambda_im")


def boundary_rows(delta, samples, precision=DEFAULT_PRECISION):
    pts = udelta_boundary(delta, samples, precision)
    return [
        [_real_text(2 * math.pi * j / samples), _real_text(p.real, precision), _real_text(p.imag, precision)]
        for j, p in enumerate(pts)
    ]


def emit_figure_data(words, delta, samples, out_dir, settings=None):
    """One CSV per word's multiplier curve plus the U_delta boundary; returns the paths.

    A stalled continuation still writes what it traced, to ``*_partial.csv``,
    before the ContinuationStall propagates.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [write_csv(BOUNDARY_HEADER, boundary_rows(delta, samples), out_dir / f"boundary_delta{delta}.csv")]
    for w in words:
        word = as_word(w, delta)
        if word.delta != delta:
            word = DegreeWord(word.degrees, delta)
        stem = f"curve_delta{delta}_word{'-'.join(map(str, word.degrees))}"
        try:
            curve = multiplier_curve(word, samples, settings)
        except ContinuationStall as exc:
            if exc.partial is not None:
                write_csv(CURVE_HEADER, curve_rows(exc.partial), out_dir / f"{stem}_partial.csv")
            raise
        paths.append(write_csv(CURVE_HEADER, curve_rows(curve), out_dir / f"{stem}.csv"))
    return paths


# ---------------------------------------------------------------- lemma suites


@dataclass
class PropertyResult:
    name: str
    checked: int = 0
    counterexamples: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.counterexamples


@dataclass
class LemmaReport:
    delta: int
    trials: int
    rng_seed: int
    properties: list

    @property
    def passed(self):
        return all(p.passed for p in self.properties)

    def to_json(self):
        return {
            "delta": self.delta,
            "trials": self.trials,
            "rng_seed": self.rng_seed,
            "passed": self.passed,
            "properties": [
                {"name": p.name, "passed": p.passed, "checked": p.checked, "counterexamples": p.counterexamples}
                for p in self.properties
            ],
        }


def shearer_samples(delta, trials, rng_seed, max_len=4):
    """Random (word, lam) with 1e-3 rho <= |lam| <= (1 - 1e-3) rho."""
    rng = np.random.default_rng(rng_seed)
    rho = float(shearer_radius(delta))
    out = []
    for _ in range(trials):
        k = int(rng.integers(1, max_len + 1))
        word = DegreeWord(tuple(int(d) for d in rng.integers(1, delta, size=k)), delta)
        r = rho * (1e-3 + (1 - 2e-3) * math.sqrt(rng.random()))
        out.append((word, r * np.exp(2j * np.pi * rng.random())))
    return out


def oracle_words(max_len=4, max_degree=3, max_vertices=20, delta=None):
    from itertools import product

    words = []
    for k in range(1, max_len + 1):
        for degs in product(range(1, max_degree + 1), repeat=k):
            w = DegreeWord(degs, delta if delta is not None else max(3, max(degs) + 1))
            if build_tree(w, adjacency_cap=0).vertex_count <= max_vertices:
                words.append(w)
    return words


def verify_lemmas(delta, trials, rng_seed=0, max_len=4):
    """Fixed-point properties in the Shearer disc and the polynomial oracle sweep."""
    if int(trials) != trials or trials < 1:
        raise PreconditionError("trials must be >= 1")
    if int(delta) != delta or delta < 3:
        raise PreconditionError(f"delta must be an integer >= 3, got {delta}")
    attracting = PropertyResult("one attracting fixed point in |z| < 1/delta")
    repelling = PropertyResult("d_1...d_k repelling fixed points in |z+1| < (delta-1)/delta")
    for word, lam in shearer_samples(delta, trials, rng_seed, max_len):
        fps = classify_fixed_points(word, lam)
        n_att = sum(1 for r in fps if r.classification == "attracting" and abs(r.z) < 1 / delta)
        n_rep = sum(1 for r in fps if r.classification == "repelling" and abs(r.z + 1) < (delta - 1) / delta)
        case = {"word": str(word), "lambda": [lam.real, lam.imag]}
        attracting.checked += 1
        repelling.checked += 1
        if n_att != 1:
            attracting.counterexamples.append({**case, "found": n_att})
        if n_rep != word.product:
            repelling.counterexamples.append({**case, "found": n_rep, "expected": word.product})
    oracle = PropertyResult("exact polynomial equals subset enumeration")
    for word in oracle_words(max_degree=min(3, delta - 1), delta=delta):
        oracle.checked += 1
        exact = indep_poly_exact(word)
        brute = indep_poly_bruteforce(build_tree(word))
        if exact != brute:
            oracle.counterexamples.append({"word": str(word), "exact": exact.coefficients, "brute": brute.coefficients})
    return LemmaReport(delta, int(trials), rng_seed, [attracting, repelling, oracle])


class Stopwatch:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        return False
