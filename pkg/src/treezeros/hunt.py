"""Search for tree zeros near a parabolic parameter.

Near a parameter ``lam0`` where the word ``g`` has a parabolic fixed point,
the family ``lam -> g_lam^N(0)`` is not normal, so ``g_lam^N(0) = -1`` has
solutions arbitrarily close to ``lam0``. The hunt runs Newton on
``F_N(lam) = g_lam^N(0) + 1`` for many ``N`` at once, then hands candidates to
:func:`treezeros.trees.certify_zero`.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .dynamics import DegreeWord, as_word
from .errors import EarlyHit, Exhausted, NoHit, NumericFailure, PoleCollision, PreconditionError
from .numeric import CERT_PRECISION, complex_to_json
from .parabolic import SolverSettings, discover_parabolic, reproduce_table, solve_parabolic
from .region import shearer_radius, udelta_witness
from .trees import ZeroWitness, certify_zero


def default_radii():
    return tuple(0.1 * 2.0**-j for j in range(21))


@dataclass(frozen=True)
class HuntSettings:
    radii: tuple = field(default_factory=default_radii)
    ring_seeds: int = 64
    rng_seed: int = 0
    curve_seeds: bool = True
    curve_seeds_per_n: int = 32
    newton_iters: int = 60
    residual_tol: float = 1e-10
    prune_factor: float = 4.0
    max_certifications: int = 12
    require_member: bool = False
    min_margin: float = 0.0
    cert_precision: int = CERT_PRECISION


@dataclass(frozen=True)
class HuntResult:
    base_word: DegreeWord
    n_iterates: int
    full_word: DegreeWord
    lambda0: complex
    lam: object
    distance: float
    witness: ZeroWitness
    radius: float

    def to_json(self):
        return {
            "base_word": list(self.base_word.degrees),
            "delta": self.base_word.delta,
            "n_iterates": self.n_iterates,
            "lambda0": complex_to_json(self.lambda0, 53),
            "distance": repr(self.distance),
            "radius": repr(self.radius),
            "witness": self.witness.to_json(),
        }


def _fn_batch(degrees, lam, ns):
    """F_N(lam) = g^N(0) + 1 and its lam-derivative; ``ns`` sorted descending."""
    M = len(lam)
    F = np.full(M, np.nan + 0j)
    Fl = np.full(M, np.nan + 0j)
    if M == 0:
        return F, Fl
    x = np.zeros(M, dtype=complex)
    xl = np.zeros(M, dtype=complex)
    # ns is descending, so entries still needed at step n form a prefix
    still = np.searchsorted(-ns, -np.arange(ns[0] + 2), side="right")
    with np.errstate(all="ignore"):
        for n in range(1, int(ns[0]) + 1):
            m = still[n]
            x, xl, lm = x[:m], xl[:m], lam[:m]
            for d in degrees:
                inv = 1.0 / (1.0 + x)
                a = inv**d
                xl = a - d * lm * a * inv * xl
                x = lm * a
            j0 = still[n + 1]
            F[j0:m] = x[j0:m] + 1
            Fl[j0:m] = xl[j0:m]
    return F, Fl


def _newton_batch(degrees, lam, ns, lam0, radius, settings):
    order = np.argsort(-ns, kind="stable")
    lam, ns = lam[order].astype(complex), ns[order]
    alive = np.ones(len(lam), dtype=bool)
    pole_deaths = 0
    for _ in range(settings.newton_iters):
        idx = np.flatnonzero(alive)
        if idx.size == 0:
            break
        F, Fl = _fn_batch(degrees, lam[idx], ns[idx])
        with np.errstate(all="ignore"):
            step = F / Fl
        bad = ~np.isfinite(step)
        pole_deaths += int(np.count_nonzero(bad & ~np.isfinite(F)))
        new = lam[idx] - np.where(bad, 0, step)
        lam[idx] = new
        gone = bad | (np.abs(new - lam0) > settings.prune_factor * radius)
        done = np.abs(step) <= 1e-15 * np.maximum(1, np.abs(new))
        alive[idx[gone]] = False
        if np.all(done | gone):
            break
    F, _ = _fn_batch(degrees, lam, ns)
    ok = np.isfinite(F) & (np.abs(F) <= settings.residual_tol) & (np.abs(lam - lam0) <= radius)
    return lam[ok], ns[ok], pole_deaths


class _CurveSeeds:
    """Points of the multiplier curve through lam0, indexed by the angle theta."""

    def __init__(self, word, lam0, steps=256):
        self.thetas, self.lams = np.array([0.0]), np.array([complex(lam0)])
        try:
            start = solve_parabolic(word, 1, lam0)
        except (NumericFailure, PreconditionError):
            return
        if abs(complex(start.lam) - lam0) > 1e-6 * max(1.0, abs(lam0)):
            return
        arcs = {0.0: complex(start.lam)}
        settings = SolverSettings()
        for sign in (1, -1):
            lam, z = complex(start.lam), complex(start.z)
            for j in range(1, steps + 1):
                theta = sign * math.pi * j / steps
                try:
                    sol = solve_parabolic(word, cmath.exp(1j * theta), lam, z, settings)
                except (NumericFailure, PreconditionError):
                    break
                if abs(complex(sol.lam) - lam) > 0.05 * max(1.0, abs(lam)):
                    break  # jumped to another branch
                lam, z = complex(sol.lam), complex(sol.z)
                arcs[theta] = lam
        keys = sorted(arcs)
        self.thetas = np.array(keys)
        self.lams = np.array([arcs[k] for k in keys])

    def for_n(self, n, count):
        if len(self.thetas) < 2:
            return np.empty(0, dtype=complex)
        lo, hi = 0.3 * math.pi / n, min(4 * math.pi / n, math.pi)
        out = []
        for sign in (1, -1):
            grid = sign * np.linspace(lo, hi, count // 2)
            grid = grid[(grid >= self.thetas[0]) & (grid <= self.thetas[-1])]
            out.append(np.interp(grid, self.thetas, self.lams.real) + 1j * np.interp(grid, self.thetas, self.lams.imag))
        return np.concatenate(out)


def hunt_zero(base_word, lambda0, n_max=64, radius_schedule=None, settings=None):
    """Find lam near ``lambda0`` where g_lam^N(0) = -1 for some N <= n_max, certified.

    For each radius in the schedule, Newton on F_N runs from a ring of seeds
    (with a seeded random rotation) and, when ``lambda0`` is parabolic for the
    word, from points of its multiplier curve at angles of order 1/N. Converged
    parameters within the radius are certified in order of distance; the first
    that certifies (and passes the optional membership filter) is returned.
    """
    word = as_word(base_word)
    settings = settings or HuntSettings()
    radii = tuple(radius_schedule) if radius_schedule is not None else settings.radii
    if n_max < 1:
        raise PreconditionError("n_max must be >= 1")
    lam0 = complex(lambda0)
    rng = np.random.default_rng(settings.rng_seed)
    curve = _CurveSeeds(word, lam0) if settings.curve_seeds and n_max > 1 else None
    ns_all = np.arange(1, n_max + 1)
    stats = {"candidates": 0, "early_hits": 0, "no_hits": 0, "pole_collisions": 0, "not_member": 0}
    total_seeds = 0
    total_pole_deaths = 0
    for r in radii:
        phase = rng.random()
        ring = lam0 + r * np.exp(2j * np.pi * (np.arange(settings.ring_seeds) + phase) / settings.ring_seeds)
        seeds = [np.repeat(ring[None, :], n_max, axis=0).ravel()]
        ns = [np.repeat(ns_all, settings.ring_seeds)]
        if curve is not None:
            for n in ns_all:
                pts = curve.for_n(int(n), settings.curve_seeds_per_n)
                pts = pts[np.abs(pts - lam0) <= r]
                seeds.append(pts)
                ns.append(np.full(len(pts), n))
        seeds, ns = np.concatenate(seeds), np.concatenate(ns)
        total_seeds += len(seeds)
        found, found_n, deaths = _newton_batch(word.degrees, seeds, ns, lam0, r, settings)
        total_pole_deaths += deaths
        if len(found) == 0:
            continue
        # one candidate per (N, parameter); least N first among duplicates
        keys = {}
        for lam, n in sorted(zip(found, found_n), key=lambda t: (t[1], abs(t[0] - lam0))):
            key = (round(lam.real, 9), round(lam.imag, 9))
            keys.setdefault(key, (lam, int(n)))
        cands = sorted(keys.values(), key=lambda t: (abs(t[0] - lam0), t[1]))
        stats["candidates"] += len(cands)
        attempts = 0
        for lam, n in cands:
            if settings.require_member:
                wit = udelta_witness(word.delta, lam)
                if not wit.member or wit.margin <= settings.min_margin:
                    stats["not_member"] += 1
                    continue
            if attempts >= settings.max_certifications:
                break
            attempts += 1
            full = word.repeated(n)
            try:
                witness = certify_zero(full, lam, settings.cert_precision)
            except EarlyHit:
                stats["early_hits"] += 1
                continue
            except NoHit:
                stats["no_hits"] += 1
                continue
            except PoleCollision:
                stats["pole_collisions"] += 1
                continue
            if settings.require_member and (not witness.udelta.member or witness.udelta.margin <= settings.min_margin):
                stats["not_member"] += 1
                continue
            lam_c = complex(witness.lam)
            return HuntResult(word, n, full, lam0, witness.lam, abs(lam_c - lam0), witness, r)
    if total_seeds and total_pole_deaths == total_seeds:
        raise PoleCollision("every seed ran into the pole", ())
    raise Exhausted(n_max, radii, stats)


# ---------------------------------------------------------------- reports

MAX_REPORT_DELTA = 9


def report_settings():
    """Hunt settings used by :func:`hunt_report`: members of U_delta only."""
    return HuntSettings(require_member=True, min_margin=1e-6)


def hunt_report(delta, settings=None, n_max=256, allow_beyond=False):
    """Zero witnesses inside U_delta near the parabolic parameter of the table row.

    Degrees above 9 are refused unless ``allow_beyond`` is set; then the word
    ``(2, delta-1, delta-1)`` and a discovered parabolic parameter are used.
    """
    if int(delta) != delta or delta < 3:
        raise PreconditionError(f"delta must be an integer >= 3, got {delta}")
    settings = settings or report_settings()
    if delta <= MAX_REPORT_DELTA:
        row = reproduce_table(delta)
        word, lam0 = row.word, complex(row.lam)
    elif allow_beyond:
        word = DegreeWord((2, delta - 1, delta - 1), delta)
        sols = discover_parabolic(word)
        if not sols:
            raise Exhausted(n_max, (), {"reason": "no parabolic parameter found"})
        lam0 = complex(sols[0].lam)
    else:
        raise PreconditionError(f"delta={delta} is outside 3..{MAX_REPORT_DELTA}; pass allow_beyond to override")
    return [hunt_zero(word, lam0, n_max, None, settings)]


def negative_control_centers(count=100, rng_seed=0, deltas=range(3, 10), max_len=3):
    """Random (word, center) pairs inside the Shearer disc shrunk by 1e-3."""
    rng = np.random.default_rng(rng_seed)
    deltas = list(deltas)
    out = []
    for _ in range(count):
        delta = int(rng.choice(deltas))
        k = int(rng.integers(1, max_len + 1))
        word = DegreeWord(tuple(int(d) for d in rng.integers(1, delta, size=k)), delta)
        rho = float(shearer_radius(delta)) - 1e-3
        center = rho * math.sqrt(rng.random()) * cmath.exp(2j * math.pi * rng.random())
        out.append((word, center))
    return out


def negative_control_radii(delta, center):
    """The default schedule clipped so every disc stays inside the Shearer disc."""
    room = float(shearer_radius(delta)) - abs(center)
    top = min(0.1, room)
    return tuple(top * 2.0**-j for j in range(21))


def negative_control(count=100, rng_seed=0, n_max=64, settings=None):
    """Run hunts from centers in the Shearer disc; returns (word, center, outcome) triples."""
    settings = settings or replace(HuntSettings(), curve_seeds=False)
    results = []
    for word, center in negative_control_centers(count, rng_seed):
        try:
            res = hunt_zero(word, center, n_max, negative_control_radii(word.delta, center), settings)
            outcome = res
        except Exhausted as exc:
            outcome = exc
        results.append((word, center, outcome))
    return results
