"""Trees built from degree words, their independence polynomials and zero witnesses.

For a word ``(d_1, ..., d_k)`` the tree ``T_1`` is a single vertex and
``T_m`` is a new root joined to the roots of ``d_m`` copies of ``T_{m-1}``.
The occupation ratio of the root of ``T_m`` is the orbit point ``x_m`` of 0,
so ``x_k = -1`` is the same as ``Z_{T_k}(lam) = 0`` (provided ``Z_{T_{k-1}}``
does not vanish, which is what the early-hit check guarantees).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import mpmath as mp
import numpy as np

from .dynamics import DegreeWord, as_word, eval_jet, eval_word
from .errors import CapExceeded, EarlyHit, NoHit, PoleCollision, PoleOnOrbit, TooLarge
from .numeric import CERT_PRECISION, DEFAULT_PRECISION, _to_mpc, complex_to_json, is_inf, precision_context
from .region import UdeltaWitness, udelta_witness

ADJACENCY_CAP = 10**6
EXACT_BITS_CAP = 2**28
BRUTEFORCE_MAX_VERTICES = 20
MAX_REFINEMENT_SHIFT = 1e-6


@dataclass(frozen=True)
class TreeSpec:
    word: DegreeWord
    level_sizes: tuple
    adjacency: Optional[tuple] = field(default=None, repr=False)

    @property
    def vertex_count(self):
        return self.level_sizes[-1]

    @property
    def adjacency_omitted(self):
        return self.adjacency is None

    def edges(self):
        if self.adjacency is None:
            raise TooLarge(f"adjacency not materialised for {self.vertex_count} vertices")
        return [(u, v) for u, nbrs in enumerate(self.adjacency) for v in nbrs if u < v]

    def max_degree(self):
        if self.adjacency is None:
            raise TooLarge(f"adjacency not materialised for {self.vertex_count} vertices")
        return max((len(n) for n in self.adjacency), default=0)


def level_sizes(word):
    sizes = [1]
    for d in as_word(word).degrees[1:]:
        sizes.append(1 + d * sizes[-1])
    return tuple(sizes)


def build_tree(word, adjacency_cap=ADJACENCY_CAP):
    """Level sizes always; explicit adjacency (vertex 0 is the root) under the cap."""
    word = as_word(word)
    sizes = level_sizes(word)
    if sizes[-1] > adjacency_cap:
        return TreeSpec(word, sizes, None)
    # each level is a root followed by d_m relabelled copies of the previous level
    adj = [[]]
    for d in word.degrees[1:]:
        n = len(adj)
        new = [[]]
        for c in range(d):
            offset = 1 + c * n
            new[0].append(offset)
            for u, nbrs in enumerate(adj):
                new.append([v + offset for v in nbrs])
            new[offset].append(0)
        adj = new
    return TreeSpec(word, sizes, tuple(tuple(sorted(n)) for n in adj))


# ---------------------------------------------------------------- polynomials


@dataclass(frozen=True)
class IndependencePolynomial:
    """Coefficients a_0, a_1, ... with a_j the number of independent sets of size j."""

    coefficients: tuple

    @property
    def degree(self):
        return len(self.coefficients) - 1

    def __call__(self, lam, precision=DEFAULT_PRECISION):
        return evaluate_Z(self, lam, precision).value

    def derivative(self):
        return IndependencePolynomial(tuple(j * a for j, a in enumerate(self.coefficients))[1:] or (0,))

    def __str__(self):
        terms = []
        for j, a in enumerate(self.coefficients):
            if a:
                terms.append(str(a) if j == 0 else f"{a}*lam" + (f"^{j}" if j > 1 else ""))
        return " + ".join(terms)


_COST_CEILING = 2**62


def _log2_counts(word, ceiling=None):
    """log2 Z_{T_m}(1) and the independence number of T_m, level by level.

    With ``ceiling`` set, stops at the first level whose volume exceeds it
    (volumes only grow along the word), which keeps long words cheap.
    """
    degs = as_word(word).degrees
    logs, alphas = [0.0, 1.0], [0, 1]  # T_0 (empty), T_1
    for m in range(1, len(degs)):
        d, e = degs[m], degs[m] * degs[m - 1]
        a = d * logs[-1]
        b = e * logs[-2]
        hi, lo = max(a, b), min(a, b)
        logs.append(hi + math.log2(1 + 2.0 ** (lo - hi)))
        alphas.append(max(d * alphas[-1], 1 + e * alphas[-2]))
        if ceiling is not None and (alphas[-1] + 1) * (logs[-1] + 1) > ceiling:
            break
    return logs, alphas


def exact_cost_bits(word):
    """Estimated big-integer volume (bits) of the exact independence polynomial (capped at 2**62)."""
    logs, alphas = _log2_counts(word, _COST_CEILING)
    return int(min((alphas[-1] + 1) * (logs[-1] + 1), _COST_CEILING))


def _kron_pow(coeffs, e, bits):
    # nonnegative coefficients: pack at 2**bits, take the integer power, unpack
    nbytes = (bits + 7) // 8
    v = int.from_bytes(b"".join(c.to_bytes(nbytes, "little") for c in coeffs), "little")
    n = (len(coeffs) - 1) * e + 1
    raw = (v**e).to_bytes(n * nbytes, "little")
    return [int.from_bytes(raw[i * nbytes : (i + 1) * nbytes], "little") for i in range(n)]


def level_polynomials(word, cap_bits=EXACT_BITS_CAP):
    """[Z_{T_0}, Z_{T_1}, ..., Z_{T_k}] with Z_{T_0} = 1 as coefficient lists."""
    word = as_word(word)
    cost = exact_cost_bits(word)
    if cost > cap_bits:
        raise CapExceeded(cost, cap_bits, "coefficient volume in bits")
    logs, _ = _log2_counts(word)
    degs = word.degrees
    Z = [[1], [1, 1]]
    for m in range(1, len(degs)):
        d, e = degs[m], degs[m] * degs[m - 1]
        bits = int(logs[m + 1]) + 2
        a = _kron_pow(Z[-1], d, bits)
        b = _kron_pow(Z[-2], e, bits)
        out = a + [0] * max(0, len(b) + 1 - len(a))
        for j, c in enumerate(b):
            out[j + 1] += c
        while len(out) > 1 and out[-1] == 0:
            out.pop()
        Z.append(out)
    return Z


def indep_poly_exact(word, cap_bits=EXACT_BITS_CAP):
    """Z_{T_k} from Z_m = Z_{m-1}**d_m + lam * Z_{m-2}**(d_m d_{m-1})."""
    return IndependencePolynomial(tuple(level_polynomials(word, cap_bits)[-1]))


def indep_poly_bruteforce(tree):
    """Count independent sets by enumerating all vertex subsets (oracle, <= 20 vertices)."""
    n = tree.vertex_count
    if n > BRUTEFORCE_MAX_VERTICES or tree.adjacency is None:
        raise TooLarge(f"{n} vertices exceeds the enumeration limit {BRUTEFORCE_MAX_VERTICES}")
    masks = np.arange(1 << n, dtype=np.uint32)
    bad = np.zeros_like(masks, dtype=bool)
    for u, v in tree.edges():
        bad |= ((masks >> u) & (masks >> v) & 1).astype(bool)
    sizes = np.bitwise_count(masks[~bad])
    counts = np.bincount(sizes, minlength=1)
    return IndependencePolynomial(tuple(int(c) for c in counts))


@dataclass(frozen=True)
class ZValue:
    value: object
    error_bound: float
    precision: int


def evaluate_Z(poly, lam, precision=DEFAULT_PRECISION):
    """Horner evaluation with a forward error bound.

    The bound is gamma_{4n+2} * sum |a_j| |lam|^j with gamma_m = m u / (1 - m u)
    and u the unit roundoff; the constant 4n+2 covers complex multiply-adds.
    """
    coeffs = poly.coefficients if isinstance(poly, IndependencePolynomial) else tuple(poly)
    n = len(coeffs) - 1
    # mpmath at every precision: exact integer coefficients may exceed the double range
    with mp.workprec(precision):
        x = _to_mpc(lam)
        acc = mp.mpc(0)
        for a in reversed(coeffs):
            acc = acc * x + a
    with mp.workprec(precision + 16):
        ax = abs(x)
        absum = mp.mpf(0)
        for a in reversed(coeffs):
            absum = absum * ax + abs(a)
        u = mp.mpf(2) ** (-precision)
        m = 4 * n + 2
        bound = float(m * u / (1 - m * u) * absum)
    if precision == DEFAULT_PRECISION:
        acc = complex(acc)
    return ZValue(acc, bound, precision)


# ---------------------------------------------------------------- witnesses


@dataclass(frozen=True)
class ExactEvaluation:
    degree: int
    value: object
    error_bound: float
    allowance: float


@dataclass(frozen=True)
class ZeroWitness:
    word: DegreeWord
    lam: object
    precision: int
    orbit_residual: float
    udelta: UdeltaWitness
    tier: str  # "exact-polynomial" or "high-precision-ratio"
    tree: TreeSpec
    tolerance: float
    ratio_residual: Optional[float] = None
    exact: Optional[ExactEvaluation] = None
    refinement_shift: float = 0.0
    notes: tuple = ()

    @property
    def delta(self):
        return self.word.delta

    def to_json(self):
        def size(n):
            return n if n < 2**53 else str(n)

        return {
            "word": list(self.word.degrees),
            "delta": self.word.delta,
            "lambda": complex_to_json(self.lam, self.precision),
            "precision_bits": self.precision,
            "orbit_residual": mp.nstr(mp.mpf(self.orbit_residual), 6),
            "tier": self.tier,
            "udelta": {
                "alpha_min": complex_to_json(self.udelta.alpha_min, self.udelta.precision),
                "modulus": repr(float(self.udelta.modulus)),
                "member": self.udelta.member,
                "verdict": self.udelta.verdict,
            },
            "tree": {
                "vertex_count": size(self.tree.vertex_count),
                "level_sizes": [size(s) for s in self.tree.level_sizes],
            },
            "notes": list(self.notes),
        }


def _refine(word, lam, precision, max_iter=60):
    """Newton on x_k(lam) + 1; returns (lam, last step size)."""
    eps = mp.mpf(2) ** (-precision + 12)
    step = mp.mpf(1)
    for _ in range(max_iter):
        jet = eval_jet(word, lam, 0, precision)
        if jet.w_l == 0:
            break
        step = (jet.w + 1) / jet.w_l
        lam = lam - step
        if abs(step) <= eps * max(1, abs(lam)):
            break
    return lam, float(abs(step))


def certify_zero(word, lam, precision=CERT_PRECISION, refine=True, exact_cap_bits=EXACT_BITS_CAP):
    """Certify that the tree of ``word`` has an independence-polynomial zero at (refined) ``lam``.

    ``lam`` is first polished by Newton on ``x_k(lam) + 1`` (the shift must
    stay below 1e-6 relative, else NoHit). Small trees are then checked against
    the exact polynomial; large ones by the orbit residual at
    ``max(precision, 256)`` bits, which must be at most ``2**(-P/2)``.
    """
    word = as_word(word)
    P = max(int(precision), CERT_PRECISION)
    k = len(word)
    tol = 2.0 ** (-P / 2)
    notes = []
    with precision_context(P) as C:
        lam_in = C(lam)
        lam_ref, last_step = lam_in, 0.0
        if refine:
            try:
                lam_ref, last_step = _refine(word, lam_in, P)
            except PoleOnOrbit:
                lam_ref = lam_in
        shift = float(abs(lam_ref - lam_in))
        if shift > MAX_REFINEMENT_SHIFT * max(1.0, float(abs(lam_in))):
            raise NoHit(f"no hit near the given parameter (Newton moved by {shift:.3g})")
        orbit = eval_word(word, lam_ref, 0, P)
        if orbit.hit_index is not None and orbit.hit_index < k:
            raise EarlyHit(orbit.hit_index)
        early_poles = [i for i in orbit.pole_passages if 0 < i <= k]
        if early_poles:
            raise PoleCollision("orbit passes through infinity before the final step", early_poles)
        final = orbit.final
        residual = math.inf if is_inf(final) else float(abs(final + 1))
        if orbit.hit_index != k or residual > tol:
            raise NoHit(f"orbit residual {residual:.3g} exceeds {tol:.3g}")
        if k == 2:
            notes.append("k = 2: taken as the base case of the induction")
        tree = build_tree(word)
        witness_kw = {}
        if exact_cost_bits(word) <= exact_cap_bits:
            poly = indep_poly_exact(word, exact_cap_bits)
            zv = evaluate_Z(poly, lam_ref, P)
            dz = evaluate_Z(poly.derivative(), lam_ref, P)
            dlam = max(4 * last_step, 2.0 ** (-P + 4) * max(1.0, float(abs(lam_ref))))
            allowance = zv.error_bound + float(abs(dz.value)) * dlam
            if float(abs(zv.value)) > allowance:
                raise NoHit(f"|Z(lam)| = {float(abs(zv.value)):.3g} exceeds the allowance {allowance:.3g}")
            tier = "exact-polynomial"
            witness_kw["exact"] = ExactEvaluation(poly.degree, zv.value, zv.error_bound, allowance)
        else:
            tier = "high-precision-ratio"
            witness_kw["ratio_residual"] = residual
    udelta = udelta_witness(word.delta, lam_ref, P)
    return ZeroWitness(
        word=word,
        lam=lam_ref,
        precision=P,
        orbit_residual=residual,
        udelta=udelta,
        tier=tier,
        tree=tree,
        tolerance=tol,
        refinement_shift=shift,
        notes=tuple(notes),
        **witness_kw,
    )
