"""Precision model, the point at infinity, tolerances and polynomial roots.

Numbers at 53 bits are plain Python ``complex``; above that they are
``mpmath.mpc`` evaluated inside ``mpmath.workprec``. Code that works on both
only uses ``+ - * / **`` and ``abs``, so one implementation serves both.
"""

from __future__ import annotations

import ast
import math
import operator
import re
from contextlib import contextmanager
from fractions import Fraction

import mpmath as mp
import numpy as np

DEFAULT_PRECISION = 53
CERT_PRECISION = 256


class _Infinity:
    """The point at infinity of the Riemann sphere (a sentinel, not a float)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


def is_inf(x):
    return x is INF


@contextmanager
def precision_context(precision):
    """Yield a constructor for complex numbers carrying ``precision`` bits."""
    if precision < DEFAULT_PRECISION:
        raise ValueError(f"precision must be >= {DEFAULT_PRECISION} bits, got {precision}")
    if precision == DEFAULT_PRECISION:
        yield _to_complex
    else:
        with mp.workprec(precision):
            yield _to_mpc


def _to_complex(x):
    if isinstance(x, str):
        return complex(parse_complex(x))
    if isinstance(x, Fraction):
        return complex(float(x))
    return complex(x)


def _to_mpc(x):
    if isinstance(x, str):
        return parse_complex(x, mp.prec)
    if isinstance(x, Fraction):
        return mp.mpc(mp.mpf(x.numerator) / x.denominator)
    if isinstance(getattr(x, "re", None), int):  # Gaussian integer
        return mp.mpc(x.re, x.im)
    return mp.mpc(x)


def pole_guard(precision):
    """|1 + z| below this is treated as z = -1."""
    return 2.0 ** (-precision / 2)


def hit_tolerance(precision):
    """Default tolerance for |x_i + 1| when scanning orbits for hits."""
    return min(1e-12, 2.0 ** (-precision / 4))


def newton_tolerance(precision):
    """Residual target for the two-variable parabolic Newton solve."""
    if precision <= DEFAULT_PRECISION:
        return 1e-13
    return 2.0 ** (-3 * precision / 4)


def decimal_digits(precision):
    """Significant digits written per real number.

    One more than ceil(P log10 2), which makes binary -> decimal -> binary exact
    and therefore decimal -> binary -> decimal stable.
    """
    return math.ceil(precision * math.log10(2)) + 1


def format_real(x, precision):
    with mp.workprec(precision):
        return mp.nstr(mp.mpf(x), decimal_digits(precision), min_fixed=-4, max_fixed=8)


def complex_to_json(z, precision):
    return {"re": format_real(_real(z), precision), "im": format_real(_imag(z), precision)}


def complex_from_json(obj, precision):
    with precision_context(precision) as C:
        if precision == DEFAULT_PRECISION:
            return complex(float(obj["re"]), float(obj["im"]))
        return C(mp.mpc(mp.mpf(obj["re"]), mp.mpf(obj["im"])))


def _real(z):
    return z.real


def _imag(z):
    return z.imag


_NUMBER = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX_RE = re.compile(
    rf"^\s*(?:(?P<re>{_NUMBER})(?P<im>[+-](?:\d+\.?\d*|\.\d+)?(?:[eE][+-]?\d+)?)[ij]"
    rf"|(?P<only_im>{_NUMBER}|[+-]?)[ij]|(?P<only_re>{_NUMBER}))\s*$"
)
_EXP_RE = re.compile(r"^\s*exp\(\s*[ij]\s*\*\s*(?P<theta>.+)\)\s*$")

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}


def _eval_angle(text):
    """Evaluate a small arithmetic expression in numbers and ``pi``."""

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return mp.mpf(str(node.value))
        if isinstance(node, ast.Name) and node.id == "pi":
            return +mp.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = walk(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](walk(node.left), walk(node.right))
        raise ValueError(f"unsupported angle expression: {text!r}")

    return walk(ast.parse(text, mode="eval"))


def parse_complex(text, precision=DEFAULT_PRECISION):
    """Parse ``"a+bi"``, ``"bi"``, ``"a"`` or ``"exp(i*theta)"``.

    Returns an ``mpmath.mpc`` rounded to ``precision`` bits.
    """
    with mp.workprec(precision):
        m = _EXP_RE.match(text)
        if m:
            return mp.expj(_eval_angle(m.group("theta")))
        m = _COMPLEX_RE.match(text.replace(" ", ""))
        if not m:
            raise ValueError(f"cannot parse complex number {text!r}")
        if m.group("only_re") is not None:
            return mp.mpc(mp.mpf(m.group("only_re")), 0)
        if m.group("only_im") is not None:
            s = m.group("only_im")
            im = mp.mpf(s + "1") if s in ("", "+", "-") else mp.mpf(s)
            return mp.mpc(0, im)
        s = m.group("im")
        im = mp.mpf(s + "1") if s in ("+", "-") else mp.mpf(s)
        return mp.mpc(mp.mpf(m.group("re")), im)


def polyval(coeffs, x):
    """Horner evaluation; ``coeffs`` are ordered from the constant term up."""
    acc = 0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _aberth_double(mon, maxiter=500):
    """Double-precision Aberth pass for a monic polynomial; None if it cannot run."""
    c = np.array(mon, dtype=complex)
    if not np.all(np.isfinite(c)):
        return None
    n = len(c) - 1
    with np.errstate(all="ignore"):
        radius = abs(c[0]) ** (1.0 / n)
        radius = min(max(radius, 2.0**-20), 1 + np.max(np.abs(c[:-1])))
        z = radius * np.exp(2j * np.pi * np.arange(n) / n + 0.4j)
        rev, drev = c[::-1], (np.arange(1, n + 1) * c[1:])[::-1]
        for _ in range(maxiter):
            p, dp = np.polyval(rev, z), np.polyval(drev, z)
            ratio = p / dp
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            step = ratio / (1 - ratio * inv.sum(axis=1))
            step = np.where(np.isfinite(step), step, 0)
            z = z - step
            if np.all(np.abs(step) <= 1e-15 * np.maximum(1, np.abs(z))):
                break
    return list(z) if np.all(np.isfinite(z)) else None


def polyroots(coeffs, precision=DEFAULT_PRECISION, maxiter=1000):
    """All complex roots of a polynomial by Aberth-Ehrlich iteration.

    ``coeffs`` run from the constant term to the leading term and may be ints,
    Fractions, floats, complex or mpmath numbers. Roots are polished by Newton
    and returned as ``mpmath.mpc`` carrying ``precision`` bits (computed with
    32 guard bits). Exact zero roots are returned exactly.
    """
    work = precision + 32
    with mp.workprec(work):
        c = [_to_mpc(a) for a in coeffs]
        while c and c[-1] == 0:
            c.pop()
        if len(c) <= 1:
            return []
        zeros = 0
        while c[zeros] == 0:
            zeros += 1
        c = c[zeros:]
        n = len(c) - 1
        roots = [mp.mpc(0)] * zeros
        if n == 0:
            return roots
        lead = c[-1]
        mon = [a / lead for a in c]
        dmon = [k * mon[k] for k in range(1, n + 1)]
        if n == 1:
            return roots + [-mon[0]]
        eps = mp.mpf(2) ** (-work + 8)
        z = _aberth_double([complex(a) for a in mon])
        if z is None:
            # initial circle from the geometric mean of the roots, offset to avoid symmetry
            radius = abs(mon[0]) ** (mp.mpf(1) / n)
            bound = 1 + max(abs(a) for a in mon[:-1])
            radius = min(max(radius, mp.mpf(2) ** -20), bound)
            z = [radius * mp.expj(2 * mp.pi * k / n + mp.mpf("0.4")) for k in range(n)]
        else:
            z = [mp.mpc(v) for v in z]
        active = set(range(n))
        last = [mp.inf] * n
        slow = mp.sqrt(eps)
        for _ in range(maxiter):
            for k in list(active):
                zk = z[k]
                p = polyval(mon, zk)
                if p == 0:
                    active.discard(k)
                    continue
                dp = polyval(dmon, zk)
                ratio = p / dp if dp != 0 else mp.mpc(eps)
                s = mp.mpc(0)
                for j in range(n):
                    if j != k:
                        diff = zk - z[j]
                        if diff != 0:
                            s += 1 / diff
                denom = 1 - ratio * s
                step = ratio / denom if denom != 0 else ratio
                z[k] = zk - step
                rel = abs(step) / max(1, abs(z[k]))
                # a clustered root converges linearly; stop once it stalls near the attainable accuracy
                if rel < eps or (rel < slow and abs(step) > last[k] / 4):
                    active.discard(k)
                last[k] = abs(step)
            if not active:
                break
        polished = []
        for zk in z:
            for _ in range(8):
                dp = polyval(dmon, zk)
                if dp == 0:
                    break
                step = polyval(mon, zk) / dp
                zk -= step
                if abs(step) <= eps * max(1, abs(zk)):
                    break
            polished.append(zk)
    with mp.workprec(precision):
        return roots + [+r for r in polished]
