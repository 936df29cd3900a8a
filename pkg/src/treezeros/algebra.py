"""Exact bivariate algebra for compositions of the maps f_d.

A composition ``g = f_{d_k} o ... o f_{d_1}`` is the quotient P/Q of two
integer polynomials in (lam, z). From it come the fixed-point polynomial
``l = P - z Q`` and the multiplier polynomial ``m = s - mu t`` with
``s = P_z Q - P Q_z`` and ``t = Q**2``; the resultant ``Res_z(l, m)`` is a
polynomial in lam whose roots contain every parameter where g has a fixed
point of multiplier mu.
"""

from __future__ import annotations

import functools
import json
import re
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath as mp

from . import intpoly as ip
from .dynamics import as_word
from .errors import CapExceeded, InexactMultiplier, PreconditionError
from .intpoly import GaussInt
from .numeric import polyroots

TERM_CAP = 2**24
RESULTANT_WORK_CAP = 2**36


@dataclass(frozen=True)
class BivarPoly:
    """Sum of c[i, j] lam**i z**j; ``rows[j]`` holds the lam-coefficients of z**j."""

    rows: tuple

    def __post_init__(self):
        rows = [tuple(ip.trim(r)) for r in self.rows]
        while rows and not rows[-1]:
            rows.pop()
        object.__setattr__(self, "rows", tuple(rows))

    @classmethod
    def from_terms(cls, terms):
        """Build from ``{(i, j): c}`` with i the lam-degree and j the z-degree."""
        if not terms:
            return cls(())
        dz = max(j for _, j in terms)
        rows = [[] for _ in range(dz + 1)]
        for (i, j), c in terms.items():
            r = rows[j]
            if len(r) <= i:
                r.extend([0] * (i + 1 - len(r)))
            r[i] = r[i] + c
        return cls(tuple(tuple(r) for r in rows))

    @classmethod
    def constant(cls, c):
        return cls(((c,),)) if c else cls(())

    @property
    def is_zero(self):
        return not self.rows

    @property
    def deg_z(self):
        return len(self.rows) - 1 if self.rows else -1

    @property
    def deg_lambda(self):
        return max((len(r) - 1 for r in self.rows), default=-1)

    def coeff(self, i, j):
        if j >= len(self.rows) or i >= len(self.rows[j]):
            return 0
        return self.rows[j][i]

    def terms(self):
        return {(i, j): c for j, r in enumerate(self.rows) for i, c in enumerate(r) if c}

    def __add__(self, other):
        n = max(len(self.rows), len(other.rows))
        return BivarPoly(tuple(ip.add(_row(self, j), _row(other, j)) for j in range(n)))

    def __sub__(self, other):
        n = max(len(self.rows), len(other.rows))
        return BivarPoly(tuple(ip.sub(_row(self, j), _row(other, j)) for j in range(n)))

    def __neg__(self):
        return BivarPoly(tuple(ip.neg(r) for r in self.rows))

    def __mul__(self, other):
        if isinstance(other, BivarPoly):
            return _bivar_mul(self, other)
        return BivarPoly(tuple(ip.scale(r, other) for r in self.rows))

    __rmul__ = __mul__

    def __pow__(self, e):
        result = BivarPoly.constant(1)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def times_z(self):
        return BivarPoly(((),) + self.rows) if self.rows else self

    def times_lambda(self):
        return BivarPoly(tuple(ip.shift(r, 1) for r in self.rows))

    def d_dz(self):
        return BivarPoly(tuple(ip.scale(self.rows[j], j) for j in range(1, len(self.rows))))

    def content(self):
        return ip.content([c for r in self.rows for c in r])

    def primitive(self):
        g = self.content()
        if g in (0, 1):
            return self
        return BivarPoly(tuple(tuple(ip.exact_div(c, g) for c in r) for r in self.rows))

    def z_coefficients(self, lam):
        """Coefficients in z (constant first) after substituting a value for lam."""
        return [ip.evaluate(r, lam) for r in self.rows]

    def evaluate(self, lam, z):
        return ip.evaluate(self.z_coefficients(lam), z)

    def evaluate_exact(self, lam, z):
        lam, z = Fraction(lam), Fraction(z)
        return ip.evaluate_exact([ip.evaluate_exact(r, lam) for r in self.rows], z)

    def scale_at(self, lam, z):
        """sum |c_ij| |lam|**i |z|**j, the natural size for relative residuals."""
        a, b = abs(lam), abs(z)
        return sum(abs(complex(c)) * a**i * b**j for (i, j), c in self.terms().items())

    def to_json(self):
        return {
            "deg_lambda": self.deg_lambda,
            "deg_z": self.deg_z,
            "coeffs": [[i, j, str(c)] for (i, j), c in sorted(self.terms().items())],
        }

    @classmethod
    def from_json(cls, obj):
        return cls.from_terms({(int(i), int(j)): _parse_coeff(c) for i, j, c in obj["coeffs"]})


def _parse_coeff(text):
    text = str(text)
    if text.endswith("i"):
        m = re.fullmatch(r"([+-]?\d+)([+-]\d+)i", text)
        if not m:
            raise ValueError(f"bad Gaussian integer {text!r}")
        return GaussInt(int(m.group(1)), int(m.group(2)))
    return int(text)


def _row(p, j):
    return list(p.rows[j]) if j < len(p.rows) else []


def _bivar_mul(a, b):
    if a.is_zero or b.is_zero:
        return BivarPoly(())
    flat_ok = all(type(c) is int for r in a.rows + b.rows for c in r)
    if not flat_ok:
        out = [[] for _ in range(a.deg_z + b.deg_z + 1)]
        for i, ra in enumerate(a.rows):
            for j, rb in enumerate(b.rows):
                if ra and rb:
                    out[i + j] = ip.add(out[i + j], ip.mul(ra, rb))
        return BivarPoly(tuple(tuple(r) for r in out))
    # Kronecker in z: stride wide enough that lam-products never overlap
    width = a.deg_lambda + b.deg_lambda + 1
    fa = _flatten(a, width)
    fb = _flatten(b, width)
    prod = ip.mul(fa, fb)
    rows = [tuple(prod[k : k + width]) for k in range(0, len(prod), width)]
    return BivarPoly(tuple(rows))


def _flatten(p, width):
    flat = []
    for r in p.rows:
        flat.extend(r)
        flat.extend([0] * (width - len(r)))
    return ip.trim(flat)


@dataclass(frozen=True)
class UnivarPoly:
    """Integer polynomial in lam, constant term first; ``()`` is identically zero."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(ip.trim(self.coeffs)))

    @property
    def identically_zero(self):
        return not self.coeffs

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def evaluate(self, lam):
        return ip.evaluate(self.coeffs, lam)

    def evaluate_exact(self, lam):
        return ip.evaluate_exact(self.coeffs, lam)

    def to_json(self):
        return BivarPoly((self.coeffs,)).to_json()

    @classmethod
    def from_json(cls, obj):
        p = BivarPoly.from_json(obj)
        if p.deg_z > 0:
            raise ValueError("polynomial depends on z")
        return cls(p.rows[0] if p.rows else ())


def dumps_poly(p):
    return json.dumps(p.to_json())


def estimate_degrees(word):
    """(deg_lambda, deg_z) of the final numerator and denominator of the composition."""
    word = as_word(word)
    dz_p, dz_q, dl_p, dl_q = 1, 0, 0, 0  # P_0 = z, Q_0 = 1
    for d in word.degrees:
        dz_p, dz_q = d * dz_q, d * max(dz_q, dz_p)
        dl_p, dl_q = 1 + d * dl_q, d * max(dl_q, dl_p)
    return max(dl_p, dl_q), max(dz_p, dz_q)


def estimate_terms(word):
    dl, dz = estimate_degrees(word)
    return (dl + 1) * (dz + 2)


@functools.lru_cache(maxsize=64)
def _compose_cached(degrees):
    lam = BivarPoly.from_terms({(1, 0): 1})
    P = BivarPoly.from_terms({(0, 1): 1})
    Q = BivarPoly.constant(1)
    for d in degrees:
        P, Q = lam * Q**d, (Q + P) ** d
    g = ip.content([ip.content(r) for r in P.rows + Q.rows])
    if g > 1:
        P = BivarPoly(tuple(tuple(c // g for c in r) for r in P.rows))
        Q = BivarPoly(tuple(tuple(c // g for c in r) for r in Q.rows))
    return P, Q


def compose_rational(word, cap=TERM_CAP):
    """(P, Q) with P/Q equal to the composition, exactly.

    Recurrence ``P_i = lam Q_{i-1}**d_i``, ``Q_i = (Q_{i-1} + P_{i-1})**d_i`` from
    ``P_0 = z``, ``Q_0 = 1``; the common integer content is divided out.
    """
    word = as_word(word)
    est = estimate_terms(word)
    if est > cap:
        raise CapExceeded(est, cap)
    return _compose_cached(word.degrees)


def fixed_point_poly(P, Q):
    """l = P - z Q."""
    return P - Q.times_z()


def exact_multiplier(mu):
    """Split an exact multiplier into (numerator, denominator).

    Accepts ints, Fractions, GaussInts, floats/complex with integral parts,
    ``(re, im)`` pairs of rationals and strings like ``"-1"`` or ``"1/2+3/4i"``.
    """
    if isinstance(mu, bool):
        raise InexactMultiplier("boolean multiplier")
    if isinstance(mu, int):
        return mu, 1
    if isinstance(mu, GaussInt):
        return ip.simplify(mu), 1
    if isinstance(mu, Fraction):
        return mu.numerator, mu.denominator
    if isinstance(mu, tuple) and len(mu) == 2:
        re_, im_ = Fraction(mu[0]), Fraction(mu[1])
        return _gauss_rational(re_, im_)
    if isinstance(mu, str):
        return _parse_exact_multiplier(mu)
    if isinstance(mu, (float, complex)):
        z = complex(mu)
        if z.real.is_integer() and z.imag.is_integer():
            return ip.simplify(GaussInt(int(z.real), int(z.imag))), 1
    raise InexactMultiplier(f"multiplier {mu!r} is not an exact (Gaussian) rational")


def _gauss_rational(re_, im_):
    den = re_.denominator * im_.denominator // _gcd(re_.denominator, im_.denominator)
    num = GaussInt(int(re_ * den), int(im_ * den))
    return ip.simplify(num), den


def _coeff_bits(c):
    return (c.norm().bit_length() + 1) // 2 if isinstance(c, GaussInt) else abs(c).bit_length()


def _gcd(a, b):
    from math import gcd

    return gcd(a, b)


_RAT = r"[+-]?\d+(?:/\d+)?"


def _parse_exact_multiplier(text):
    s = text.replace(" ", "")
    m = re.fullmatch(rf"({_RAT})", s)
    if m:
        return exact_multiplier(Fraction(m.group(1)))
    m = re.fullmatch(rf"({_RAT})?(?:([+-](?:\d+(?:/\d+)?)?)i)", s)
    if m:
        re_ = Fraction(m.group(1)) if m.group(1) else Fraction(0)
        im_s = m.group(2)
        im_ = Fraction(im_s + "1") if im_s in ("+", "-") else Fraction(im_s)
        return _gauss_rational(re_, im_)
    m = re.fullmatch(rf"({_RAT})?i", s)
    if m:
        return _gauss_rational(Fraction(0), Fraction(m.group(1) or 1))
    raise InexactMultiplier(f"cannot read {text!r} as an exact multiplier")


def multiplier_poly(P, Q, mu):
    """m = den * (P_z Q - P Q_z) - num * Q**2 for mu = num/den, content removed."""
    num, den = exact_multiplier(mu)
    s = P.d_dz() * Q - P * Q.d_dz()
    t = Q * Q
    return (s * den - t * num).primitive()


def sylvester_matrix(A, B):
    """Sylvester matrix in z; entries are lam-polynomials (coefficient lists)."""
    n, m = A.deg_z, B.deg_z
    size = n + m
    a = [list(A.rows[j]) for j in range(n, -1, -1)]
    b = [list(B.rows[j]) for j in range(m, -1, -1)]
    M = [[[] for _ in range(size)] for _ in range(size)]
    for r in range(m):
        for k, c in enumerate(a):
            M[r][r + k] = c
    for r in range(n):
        for k, c in enumerate(b):
            M[m + r][r + k] = c
    return M


def resultant_work(A, B):
    size = A.deg_z + B.deg_z
    deg = max(A.deg_lambda, B.deg_lambda, 1)
    return size**3 * (size * deg) ** 2


def resultant_z(A, B, cap=RESULTANT_WORK_CAP):
    """Res_z(A, B) by fraction-free (Bareiss) elimination of the Sylvester matrix.

    The result may be identically zero; check ``identically_zero``.
    """
    if A.is_zero or B.is_zero:
        raise PreconditionError("resultant of a zero polynomial")
    work = resultant_work(A, B)
    if work > cap:
        raise CapExceeded(work, cap, "resultant work")
    M = sylvester_matrix(A, B)
    return UnivarPoly(tuple(bareiss_det(M)))


def bareiss_det(M):
    """Determinant of a square matrix over Z[lam] (or Z[i][lam]), exactly."""
    M = [row[:] for row in M]
    size = len(M)
    if size == 0:
        return [1]
    sign = 1
    prev = [1]
    for k in range(size - 1):
        if not M[k][k]:
            for i in range(k + 1, size):
                if M[i][k]:
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return []
        pivot = M[k][k]
        for i in range(k + 1, size):
            mik = M[i][k]
            row_i, row_k = M[i], M[k]
            for j in range(k + 1, size):
                val = ip.mul(pivot, row_i[j])
                if mik and row_k[j]:
                    val = ip.sub(val, ip.mul(mik, row_k[j]))
                row_i[j] = ip.div_exact(val, prev) if prev != [1] else val
            row_i[k] = []
        prev = pivot
    det = M[size - 1][size - 1]
    return ip.neg(det) if sign < 0 else list(det)


def coprime_mod_p(P, Q, primes=(2_147_483_647, 1_000_000_007), points=(3, 5, 7, 11)):
    """Certify that P and Q are coprime in Q(lam)[z].

    A constant gcd of P(lam0, .) and Q(lam0, .) over GF(p), at a point where
    neither leading coefficient vanishes, certifies Res_z(P, Q) != 0. Returns
    True when certified and None when every probe was inconclusive.
    """
    for p in primes:
        for lam0 in points:
            a = [ip.evaluate(r, lam0) % p for r in P.rows]
            b = [ip.evaluate(r, lam0) % p for r in Q.rows]
            a, b = ip.trim(a), ip.trim(b)
            if len(a) != len(P.rows) or len(b) != len(Q.rows):
                continue
            if _gcd_degree_mod_p(a, b, p) == 0:
                return True
    return None


def _gcd_degree_mod_p(a, b, p):
    a, b = list(a), list(b)
    while b:
        inv = pow(b[-1], p - 2, p)
        while a and len(a) >= len(b):
            c = a[-1] * inv % p
            k = len(a) - len(b)
            for i, x in enumerate(b):
                a[i + k] = (a[i + k] - c * x) % p
            a = ip.trim(a)
        a, b = b, a
    return len(a) - 1


@dataclass
class CandidateReport:
    word: object
    mu: object
    resultant: UnivarPoly
    candidates: list = field(default_factory=list)
    solutions: list = field(default_factory=list)
    spurious: list = field(default_factory=list)
    lambda_zero_multiplicity: int = 0
    pq_coprime: object = None  # True when certified mod p, None if inconclusive

    @property
    def identically_zero(self):
        return self.resultant.identically_zero


def _vanishes_in_z(p, lam):
    for row in p.rows:
        scale = sum(abs(complex(c)) for c in row) * max(1.0, abs(lam)) ** len(row)
        if abs(ip.evaluate(row, lam)) > 1e-10 * scale:
            return False
    return True


def parabolic_candidates(word, mu=1, precision=128, settings=None, seeds=8, cap=TERM_CAP):
    """Roots of Res_z(l, m), each validated by the two-variable Newton solve.

    A root counts as a parabolic parameter when Newton started from one of the
    ``seeds`` roots of ``l(lam, .)`` nearest to the zero set of ``m`` reaches
    residuals <= 1e-10 at a parameter within 1e-8 of the root. Everything
    else, including lam = 0, is listed under ``spurious`` with a reason.
    """
    from .parabolic import SolverSettings, solve_parabolic

    word = as_word(word)
    num, den = exact_multiplier(mu)
    mu_c = complex(num) / den
    P, Q = compose_rational(word, cap)
    l = fixed_point_poly(P, Q).primitive()
    m = multiplier_poly(P, Q, mu)
    R = resultant_z(l, m)
    report = CandidateReport(word, mu, R, pq_coprime=coprime_mod_p(P, Q))
    if R.identically_zero:
        return report
    coeffs = list(R.coeffs)
    k0 = 0
    while coeffs[k0] == 0:
        k0 += 1
    report.lambda_zero_multiplicity = k0
    if k0:
        report.spurious.append((0j, "lambda = 0: the composition degenerates"))
    rest = coeffs[k0:]
    if len(rest) <= 1:
        return report
    # the squarefree reduction needs exact division, which Z[i] leading terms may not allow
    gaussian = any(isinstance(c, GaussInt) for c in rest)
    sf = rest if gaussian else ip.squarefree_part(rest)
    bits = max(_coeff_bits(c) for c in sf if c)
    roots = polyroots(sf, max(precision, 64) + bits)
    settings = settings or SolverSettings(precision=precision)
    lc_l, lc_m = l.rows[-1], m.rows[-1]
    for r in roots:
        lam_r = complex(r)
        with mp.workprec(precision):
            zcoef = l.z_coefficients(mp.mpc(r))
            zroots = polyroots(zcoef, precision)
            mcoef = m.z_coefficients(mp.mpc(r))
            ranked = sorted(zroots, key=lambda z: float(abs(ip.evaluate(mcoef, z)) / (1 + abs(z)) ** len(mcoef)))
        best = None
        for z0 in ranked[:seeds]:
            try:
                sol = solve_parabolic(word, mu_c, r, z0, settings)
            except ArithmeticError:
                continue
            if max(sol.res_fix, sol.res_mult) > 1e-10:
                continue
            if abs(complex(sol.lam) - lam_r) > 1e-8 * max(1.0, abs(lam_r)):
                continue
            best = sol
            break
        if best is None:
            reason = "no fixed point with the target multiplier"
            scale_l = sum(abs(c) for c in lc_l) * max(1.0, abs(lam_r)) ** len(lc_l)
            scale_m = sum(abs(complex(c)) for c in lc_m) * max(1.0, abs(lam_r)) ** len(lc_m)
            if abs(ip.evaluate(lc_l, lam_r)) < 1e-10 * scale_l or abs(ip.evaluate(lc_m, lam_r)) < 1e-10 * scale_m:
                reason = "leading-coefficient collapse"
            if _vanishes_in_z(l, lam_r):
                reason = "l and m share a factor: every z is fixed at this parameter"
            report.spurious.append((lam_r, reason))
        else:
            report.candidates.append(best.lam)
            report.solutions.append(best)
    return report
