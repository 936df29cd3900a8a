"""Parameters where a composition has a fixed point of prescribed multiplier.

The unknowns are (lam, z) and the equations ``g_lam(z) = z``,
``g_lam'(z) = mu``. Newton's method uses the second-order jet of the
composition, whose Jacobian ``[[w_l, w_z - 1], [w_zl, w_zz]]`` is regular at a
non-degenerate parabolic point, so convergence stays quadratic there.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import mpmath as mp
import numpy as np
from scipy.spatial import cKDTree

from .dynamics import DegreeWord, as_word, eval_jet, orbit_batch
from .errors import (
    ContinuationStall,
    DegenerateMap,
    NoConvergence,
    PoleCollision,
    PoleOnOrbit,
    PreconditionError,
    SingularJacobian,
)
from .numeric import DEFAULT_PRECISION, _to_mpc, newton_tolerance, pole_guard, polyroots, precision_context
from .region import alpha_to_lambda, shearer_radius, udelta_witness

INDIFFERENCE_BAND = 1e-9
POLY_ROUTE_MAX_DEGREE = 24


@dataclass(frozen=True)
class SolverSettings:
    precision: int = DEFAULT_PRECISION
    tol: Optional[float] = None
    max_iter: int = 200
    cond_max: Optional[float] = None
    max_halvings: int = 30

    @property
    def tolerance(self):
        return self.tol if self.tol is not None else newton_tolerance(self.precision)

    @property
    def condition_limit(self):
        if self.cond_max is not None:
            return self.cond_max
        return 2.0 ** (self.precision - 6)


@dataclass(frozen=True)
class ParabolicSolution:
    word: DegreeWord
    mu: object
    lam: object
    z: object
    res_fix: float
    res_mult: float
    jacobian_condition: float
    precision: int = DEFAULT_PRECISION
    iterations: int = 0
    tol: float = None


def _residuals(jet, z, mu):
    return abs(jet.w - z), abs(jet.w_z - mu)


def _condition(jet):
    J = np.array(
        [[complex(jet.w_l), complex(jet.w_z) - 1], [complex(jet.w_zl), complex(jet.w_zz)]],
        dtype=complex,
    )
    with np.errstate(all="ignore"):
        c = np.linalg.cond(J)
    return float(c) if np.isfinite(c) else math.inf


def _newton(word, mu, lam, z, settings):
    """One damped Newton run inside the caller's precision context."""
    tol = settings.tolerance
    guard = pole_guard(settings.precision)
    P = settings.precision

    def evaluate(lam_, z_):
        try:
            jet = eval_jet(word, lam_, z_, P)
        except PoleOnOrbit as exc:
            raise PoleCollision(f"iterate entered the pole guard at step {exc.index}") from exc
        F1, F2 = jet.w - z_, jet.w_z - mu
        return jet, F1, F2, math.sqrt(float(abs(F1)) ** 2 + float(abs(F2)) ** 2)

    jet, F1, F2, norm = evaluate(lam, z)
    for it in range(1, settings.max_iter + 1):
        a, b, c, d = jet.w_l, jet.w_z - 1, jet.w_zl, jet.w_zz
        det = a * d - b * c
        if det == 0:
            raise SingularJacobian(math.inf)
        # solve [[a, b], [c, d]] [dl, dz] = -[F1, F2]
        dl = -(d * F1 - b * F2) / det
        dz = -(a * F2 - c * F1) / det
        t = 1.0
        for _ in range(settings.max_halvings):
            lam_new, z_new = lam + t * dl, z + t * dz
            try:
                jet_new, G1, G2, norm_new = evaluate(lam_new, z_new)
            except PoleCollision:
                norm_new = math.inf
            if norm_new < norm or norm_new <= tol:
                break
            t /= 2
        else:
            # no decrease: take the smallest step anyway so a plateau cannot freeze the run
            jet_new, G1, G2, norm_new = evaluate(lam_new, z_new)
        lam, z, jet, F1, F2, norm = lam_new, z_new, jet_new, G1, G2, norm_new
        rf, rm = float(abs(F1)), float(abs(F2))
        if rf <= tol and rm <= tol:
            if abs(1 + z) <= guard:
                raise PoleCollision("fixed point sits on the pole")
            cond = _condition(jet)
            if cond > settings.condition_limit:
                raise SingularJacobian(cond)
            return lam, z, rf, rm, cond, it
    raise NoConvergence(settings.max_iter, norm)


def solve_parabolic(word, mu, seed_lambda, seed_z=None, settings=None):
    """Solve g_lam(z) = z, g_lam'(z) = mu by Newton from the given seeds.

    ``seed_z`` may be a number, a sequence of numbers or None (then seeds come
    from the forward orbit of 0 and, for small words, from the fixed points
    whose multiplier is nearest ``mu``). Among converged runs the one with
    ``lam`` nearest ``seed_lambda`` is returned.
    """
    word = as_word(word)
    settings = settings or SolverSettings()
    if abs(complex(mu)) == 0:
        raise PreconditionError("multiplier must be nonzero")
    if seed_z is None:
        seeds = z_seeds(word, seed_lambda, mu)
    elif isinstance(seed_z, (list, tuple, np.ndarray)):
        seeds = list(seed_z)
    else:
        seeds = [seed_z]
    best, best_dist, last_error = None, math.inf, None
    with precision_context(settings.precision) as C:
        mu_c = C(mu)
        lam0 = C(seed_lambda)
        for z0 in seeds:
            try:
                lam, z, rf, rm, cond, its = _newton(word, mu_c, lam0, C(z0), settings)
            except (NoConvergence, PoleCollision, SingularJacobian) as exc:
                last_error = exc
                continue
            dist = float(abs(lam - lam0))
            if dist < best_dist:
                best_dist = dist
                best = ParabolicSolution(
                    word, mu_c, lam, z, rf, rm, cond, settings.precision, its, settings.tolerance
                )
    if best is None:
        raise last_error if last_error is not None else NoConvergence(settings.max_iter, math.inf)
    return best


def forward_limit(word, lam, steps=2000):
    """The orbit of 0 after ``steps`` applications of the word (53-bit)."""
    lam = complex(lam)
    z = 0j
    with np.errstate(all="ignore"):
        for _ in range(steps):
            for d in as_word(word).degrees:
                one = 1 + z
                if one == 0:
                    return None
                z = lam / one**d
    return z if cmath.isfinite(z) else None


def z_seeds(word, lam, mu, limit=6):
    """Starting points in z for the parabolic Newton solve at parameter ``lam``."""
    word = as_word(word)
    out = []
    z = forward_limit(word, lam)
    if z is not None:
        out.append(z)
    if word.product + 1 <= POLY_ROUTE_MAX_DEGREE and complex(lam) != 0:
        try:
            fps = classify_fixed_points(word, complex(lam))
        except ArithmeticError:
            fps = None
        if fps is not None:
            ranked = sorted(fps.records, key=lambda r: abs(r.multiplier - complex(mu)))
            out.extend(r.z for r in ranked[:limit])
    return out or [0j]


# ---------------------------------------------------------------- curves


@dataclass
class MultiplierCurve:
    """Samples of the multiplier curve at theta_j = 2 pi j / n."""

    word: DegreeWord
    thetas: list
    solutions: list
    branch_switches: list = field(default_factory=list)
    steps: int = 0

    def __len__(self):
        return len(self.solutions)

    def __iter__(self):
        return iter(self.solutions)

    def __getitem__(self, i):
        return self.solutions[i]


def _tangent(jet, mu, dtheta):
    # J [dl, dz] = [0, i mu dtheta]
    a, b, c, d = jet.w_l, jet.w_z - 1, jet.w_zl, jet.w_zz
    det = a * d - b * c
    rhs = 1j * mu * dtheta
    return -b * rhs / det, a * rhs / det


def _corrector(word, mu, lam, z, settings, max_iter=12):
    local = replace(settings, max_iter=max_iter)
    return _newton(word, mu, lam, z, local)


def multiplier_curve(word, theta_samples=256, settings=None, start=None):
    """Trace lam(theta) with a fixed point of multiplier exp(i theta).

    Continuation starts from a multiplier-1 solution (``start``: a
    ParabolicSolution, a seed parameter, or None for automatic discovery) and
    uses an Euler predictor with a Newton corrector. Steps are accepted only if
    one full step and two half steps land on the same solution; a step that
    cannot be confirmed even at the smallest step size is recorded in
    ``branch_switches`` instead of being followed silently.
    """
    word = as_word(word)
    if theta_samples < 8:
        raise PreconditionError("theta_samples must be >= 8")
    settings = settings or SolverSettings()
    if start is None:
        start = default_curve_start(word, settings)
    elif not isinstance(start, ParabolicSolution):
        start = solve_parabolic(word, 1, start, None, settings)
    h_max, h_min = 2 * math.pi / 64, 2 * math.pi / 4096
    thetas = [2 * math.pi * j / theta_samples for j in range(theta_samples)]
    curve = MultiplierCurve(word, thetas, [])
    tol = settings.tolerance
    with precision_context(settings.precision) as C:
        lam, z = C(start.lam), C(start.z)
        lam, z, rf, rm, cond, _ = _newton(word, C(1), lam, z, settings)
        curve.solutions.append(ParabolicSolution(word, C(1), lam, z, rf, rm, cond, settings.precision, 0, tol))
        theta = 0.0
        h = h_max

        def advance(lam_, z_, th, step):
            jet = eval_jet(word, lam_, z_, settings.precision)
            dl, dz = _tangent(jet, C(cmath.exp(1j * th)), step)
            mu_new = C(cmath.exp(1j * (th + step))) if settings.precision == DEFAULT_PRECISION else mp.expj(mp.mpf(th) + step)
            return _corrector(word, mu_new, lam_ + dl, z_ + dz, settings)

        for j in range(1, theta_samples):
            target = thetas[j]
            while theta < target - 1e-15:
                h = min(h, target - theta)
                try:
                    full = advance(lam, z, theta, h)
                    half = advance(lam, z, theta, h / 2)
                    two = advance(half[0], half[1], theta + h / 2, h / 2)
                    agree = float(abs(full[0] - two[0]) + abs(full[1] - two[1])) <= 1e-9 * (
                        1 + float(abs(two[0])) + float(abs(two[1]))
                    )
                except (NoConvergence, PoleCollision, SingularJacobian, PoleOnOrbit, ZeroDivisionError):
                    full, two, agree = None, None, False
                curve.steps += 1
                if agree:
                    lam, z = two[0], two[1]
                    theta += h
                    h = min(2 * h, h_max)
                    continue
                if h / 2 >= h_min:
                    h /= 2
                    continue
                if two is None:
                    raise ContinuationStall(theta, "corrector failed at the minimum step", partial=curve)
                curve.branch_switches.append(theta + h)
                lam, z = two[0], two[1]
                theta += h
            mu_j = C(cmath.exp(1j * target)) if settings.precision == DEFAULT_PRECISION else mp.expj(
                2 * mp.pi * j / theta_samples
            )
            lam, z, rf, rm, cond, _ = _newton(word, mu_j, lam, z, settings)
            curve.solutions.append(ParabolicSolution(word, mu_j, lam, z, rf, rm, cond, settings.precision, 0, tol))
    return curve


# ---------------------------------------------------------------- fixed points


@dataclass(frozen=True)
class FixedPointRecord:
    z: object
    multiplier: object
    classification: str

    @property
    def modulus(self):
        return float(abs(self.multiplier))


@dataclass
class FixedPointSet:
    word: DegreeWord
    lam: object
    records: list
    expected: int
    method: str
    precision: int = DEFAULT_PRECISION

    @property
    def collisions(self):
        """Fixed points the polynomial degree promises but that were not resolved."""
        return self.expected - len(self.records)

    @property
    def complete(self):
        return self.collisions == 0

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def of_kind(self, kind):
        return [r for r in self.records if r.classification == kind]


def classify(multiplier, band=INDIFFERENCE_BAND):
    m = float(abs(multiplier))
    if abs(m - 1.0) <= band:
        return "indifferent"
    return "attracting" if m < 1.0 else "repelling"


def _poly_route(word, lam, precision):
    from .algebra import compose_rational, fixed_point_poly

    P, Q = compose_rational(word)
    l = fixed_point_poly(P, Q)
    with mp.workprec(precision + 96):
        coeffs = l.z_coefficients(_to_mpc(lam))
        roots = polyroots(coeffs, precision + 64)
    return [complex(r) for r in roots], roots


def _branch_route(word, lam, iters=600):
    """Fixed points reached by iterating every inverse branch of the composition."""
    lam = complex(lam)
    degs = word.degrees
    combos = np.array(list(itertools.product(*[range(d) for d in degs])), dtype=float)
    log_lam = cmath.log(lam)
    w = np.full(len(combos), -1.0 + 0j)
    with np.errstate(all="ignore"):
        for _ in range(iters):
            z = w
            for i in range(len(degs) - 1, -1, -1):
                d = degs[i]
                z = -1 + np.exp((log_lam - np.log(-z) - 1j * np.pi + 2j * np.pi * combos[:, i]) / d)
            done = np.nanmax(np.abs(z - w)) < 1e-15 if np.all(np.isfinite(z)) else False
            w = z
            if done:
                break
    starts = [w]
    fwd = forward_limit(word, lam, steps=500)
    if fwd is not None:
        starts.append(np.array([fwd]))
    return np.concatenate(starts)


def _polish_batch(word, lam, z, iters=40):
    lam_arr = np.full(z.shape, complex(lam))
    with np.errstate(all="ignore"):
        for _ in range(iters):
            w, wz, _ = orbit_batch(word, lam_arr, z)
            step = (w - z) / (wz - 1)
            ok = np.isfinite(step)
            z = np.where(ok, z - np.where(ok, step, 0), z)
            if not np.any(np.abs(step[ok]) > 1e-16 * np.maximum(1, np.abs(z[ok]))):
                break
        w, wz, _ = orbit_batch(word, lam_arr, z)
    return z, w, wz


def _dedupe(points, rel=1e-8):
    if len(points) == 0:
        return []
    pts = np.column_stack([np.real(points), np.imag(points)])
    tree = cKDTree(pts)
    keep = np.ones(len(points), dtype=bool)
    for i, j in sorted(tree.query_pairs(r=rel * max(1.0, float(np.max(np.abs(points)))))):
        if keep[i] and keep[j]:
            keep[j] = False
    return [i for i in range(len(points)) if keep[i]]


def _merge_multiple(word, lam, z, wz, cluster=1e-5):
    """Replace near-coincident fixed points by one multiple fixed point.

    Newton on g(z) = z only reaches about half the working digits at a multiple
    root, which also spoils the multiplier. For a cluster, Newton on
    g'(z) = 1 (quadratic there) locates the multiple point instead; it is kept
    only if it is still a fixed point to 1e-12.
    """
    if len(z) < 2:
        return z, wz
    pts = np.column_stack([z.real, z.imag])
    pairs = cKDTree(pts).query_pairs(r=cluster * max(1.0, float(np.max(np.abs(z)))))
    if not pairs:
        return z, wz
    z, wz = z.copy(), wz.copy()
    lam_c = complex(lam)
    for i, j in pairs:
        c = (z[i] + z[j]) / 2
        try:
            for _ in range(30):
                jet = eval_jet(word, lam_c, c)
                step = (jet.w_z - 1) / jet.w_zz
                c -= step
                if abs(step) <= 1e-16 * max(1, abs(c)):
                    break
            jet = eval_jet(word, lam_c, c)
        except (PoleOnOrbit, ZeroDivisionError):
            continue
        if abs(jet.w - c) <= 1e-12 * max(1, abs(c)):
            z[i] = z[j] = c
            wz[i] = wz[j] = jet.w_z
    return z, wz


def classify_fixed_points(word, lam, precision=DEFAULT_PRECISION, method="auto"):
    """All fixed points of g_lam with multipliers and their classification.

    ``method="polynomial"`` takes the roots of l(lam, z) = P - z Q (exact
    coefficients, roots found with 64 guard bits); ``method="branches"`` iterates
    all d_1...d_k inverse branches plus the forward orbit of 0, which is
    complete whenever the inverse branches contract (e.g. in the Shearer disc).
    ``"auto"`` takes the branch route inside the Shearer disc and above degree
    24, the polynomial route otherwise. Every candidate is
    polished by Newton on g(z) = z and kept only with residual <= 1e-8.
    """
    word = as_word(word)
    if complex(lam) == 0:
        raise DegenerateMap("lam = 0 makes every composition constant")
    expected = word.product + 1
    if method == "auto":
        # inside the Shearer disc the inverse branches contract, so that route is complete
        inside = abs(complex(lam)) < float(shearer_radius(word.delta))
        method = "polynomial" if expected <= POLY_ROUTE_MAX_DEGREE and not inside else "branches"
    if method == "polynomial":
        cand, _ = _poly_route(word, lam, precision)
        cand = np.array(cand, dtype=complex)
    elif method == "branches":
        cand = _branch_route(word, lam)
    else:
        raise PreconditionError(f"unknown method {method!r}")
    z, w, wz = _polish_batch(word, lam, cand)
    good = np.isfinite(w) & (np.abs(w - z) <= 1e-8 * np.maximum(1, np.abs(z)))
    z, wz = z[good], wz[good]
    z, wz = _merge_multiple(word, lam, z, wz)
    keep = _dedupe(z)
    records = []
    for i in keep:
        zi, mi = complex(z[i]), complex(wz[i])
        if precision > DEFAULT_PRECISION:
            zi, mi = _polish_mp(word, lam, zi, precision)
        records.append(FixedPointRecord(zi, mi, classify(mi)))
    records.sort(key=lambda r: (float(abs(r.multiplier)), float(r.z.real)))
    return FixedPointSet(word, lam, records, expected, method, precision)


def _polish_mp(word, lam, z, precision):
    with precision_context(precision) as C:
        lam, z = C(lam), C(z)
        eps = 2.0 ** (-precision + 8)
        for _ in range(60):
            jet = eval_jet(word, lam, z, precision)
            step = (jet.w - z) / (jet.w_z - 1)
            z = z - step
            if abs(step) <= eps * max(1, abs(z)):
                break
        jet = eval_jet(word, lam, z, precision)
        return z, jet.w_z


# ---------------------------------------------------------------- Table 1

# Words and parameters as printed in the source table (multiplier 1).
TABLE1 = {
    3: ((1, 2), "0.7624680+2.5253695i", "0.97581"),
    4: ((1, 3), "0.37725715+1.21796118i", "0.99987"),
    5: ((1, 4, 4), "-0.24803954+0.17613988i", "0.98607"),
    6: ((1, 5, 5), "-0.19657017+0.14664968i", "0.99630"),
    7: ((2, 6, 6), "-0.15604600+0.14898604i", "0.97830"),
    8: ((2, 7, 7), "-0.13276176+0.12728769i", "0.98408"),
    9: ((2, 8, 8), "-0.11587455+0.11090067i", "0.98967"),
}


@dataclass(frozen=True)
class TableRow:
    delta: int
    word: DegreeWord
    lam: object
    alpha_modulus: float
    solution: ParabolicSolution
    udelta: object
    published_lambda: complex
    published_alpha: float
    provenance: str = "published seed"


def table_word(delta):
    if delta not in TABLE1:
        raise PreconditionError(f"no table entry for delta={delta}; expected 3 <= delta <= 9")
    return DegreeWord(TABLE1[delta][0], delta)


def reproduce_table(delta, settings=None):
    """Re-solve the table row for ``delta`` from its printed parameter."""
    from .numeric import parse_complex

    word = table_word(delta)
    _, lam_text, alpha_text = TABLE1[delta]
    seed = complex(parse_complex(lam_text))
    sol = solve_parabolic(word, 1, seed, None, settings)
    wit = udelta_witness(delta, sol.lam, sol.precision)
    return TableRow(delta, word, sol.lam, wit.modulus, sol, wit, seed, float(alpha_text))


# ---------------------------------------------------------------- discovery


def discover_parabolic(word, mu=1, settings=None, grid=16, alphas=(0.9, 0.99), max_z_seeds=16):
    """Search for multiplier-mu parameters of ``word`` near the boundary of U_delta.

    Parameter seeds are the images of |alpha| in ``alphas`` under the U_delta
    parametrisation; fixed-point seeds are the fixed points at a parameter of
    the same argument just inside the Shearer disc. Distinct solutions are
    returned sorted by the modulus of their smallest alpha root.
    """
    word = as_word(word)
    settings = settings or SolverSettings()
    delta = word.delta
    rho = float(shearer_radius(delta)) * (1 - 1e-3)
    found = []
    for r in alphas:
        for k in range(grid):
            alpha = r * cmath.exp(2j * math.pi * (k + 0.5) / grid)
            lam_seed = complex(alpha_to_lambda(delta, alpha))
            lam_in = rho * cmath.exp(1j * cmath.phase(lam_seed))
            try:
                fps = classify_fixed_points(word, lam_in)
            except ArithmeticError:
                continue
            zs = [rec.z for rec in fps.records]
            if len(zs) > max_z_seeds:
                zs = [zs[i] for i in np.linspace(0, len(zs) - 1, max_z_seeds).astype(int)]
            for z0 in zs:
                try:
                    sol = solve_parabolic(word, mu, lam_seed, z0, settings)
                except ArithmeticError:
                    continue
                if all(abs(complex(sol.lam) - complex(s.lam)) > 1e-8 * max(1, abs(complex(s.lam))) for s in found):
                    found.append(sol)
    found.sort(key=lambda s: udelta_witness(delta, s.lam).modulus)
    return found


def default_curve_start(word, settings=None):
    """Multiplier-1 starting point: the table seed for table words, else discovery."""
    word = as_word(word)
    settings = settings or SolverSettings()
    entry = TABLE1.get(word.delta)
    if entry is not None and tuple(entry[0]) == word.degrees:
        return reproduce_table(word.delta, settings).solution
    if len(word) == 1 and word[0] == word.delta - 1:
        d = word[0]
        seed = -(d**d) / (d + 1) ** (d + 1)
        return solve_parabolic(word, 1, seed * 1.01, -1 / (d + 1) * 1.01, settings)
    sols = discover_parabolic(word, 1, settings)
    if not sols:
        raise NoConvergence(settings.max_iter, math.inf)
    return sols[0]
