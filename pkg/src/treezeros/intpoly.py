"""Dense univariate polynomials with exact integer (or Gaussian integer) coefficients.

Polynomials are lists of coefficients, constant term first, with no trailing
zeros; ``[]`` is the zero polynomial. Integer products go through Kronecker
substitution so that Python's big-integer multiply does the heavy lifting.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

_NAIVE_CUTOFF = 24


@dataclass(frozen=True)
class GaussInt:
    """An element re + im*i of Z[i]."""

    re: int
    im: int = 0

    def __add__(self, other):
        o = _gauss(other)
        return GaussInt(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussInt(-self.re, -self.im)

    def __sub__(self, other):
        o = _gauss(other)
        return GaussInt(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return _gauss(other) - self

    def __mul__(self, other):
        o = _gauss(other)
        return GaussInt(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, (int, GaussInt)):
            o = _gauss(other)
            return self.re == o.re and self.im == o.im
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im)) if self.im else hash(self.re)

    def __bool__(self):
        return bool(self.re or self.im)

    def __complex__(self):
        return complex(self.re, self.im)

    def conjugate(self):
        return GaussInt(self.re, -self.im)

    def norm(self):
        return self.re * self.re + self.im * self.im

    def __str__(self):
        if not self.im:
            return str(self.re)
        sign = "+" if self.im >= 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"


def _gauss(x):
    return x if isinstance(x, GaussInt) else GaussInt(int(x), 0)


def simplify(c):
    """Collapse a GaussInt with zero imaginary part to an int."""
    if isinstance(c, GaussInt) and c.im == 0:
        return c.re
    return c


def exact_div(a, b):
    """a / b in Z or Z[i]; raises ArithmeticError if b does not divide a."""
    if isinstance(a, int) and isinstance(b, int):
        q, r = divmod(a, b)
        if r:
            raise ArithmeticError(f"{b} does not divide {a}")
        return q
    a, b = _gauss(a), _gauss(b)
    num = a * b.conjugate()
    n = b.norm()
    if num.re % n or num.im % n:
        raise ArithmeticError(f"{b} does not divide {a}")
    return simplify(GaussInt(num.re // n, num.im // n))


def trim(p):
    p = list(p)
    while p and not p[-1]:
        p.pop()
    return p


def add(a, b):
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] = out[i] + c
    return trim(out)


def sub(a, b):
    out = list(a) + [0] * max(0, len(b) - len(a))
    for i, c in enumerate(b):
        out[i] = out[i] - c
    return trim(out)


def neg(a):
    return [-c for c in a]


def scale(a, c):
    if not c:
        return []
    return trim([c * x for x in a])


def shift(a, k):
    return [0] * k + list(a) if a else []


def derivative(a):
    return trim([i * a[i] for i in range(1, len(a))])


def _all_int(p):
    return all(type(c) is int for c in p)


def _naive_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if not x:
            continue
        for j, y in enumerate(b):
            out[i + j] += x * y
    return trim(out)


def _pack(p, nbytes, offset=0):
    # offset shifts every slot into [0, 2**(8*nbytes)) so no borrows occur
    return int.from_bytes(b"".join((c + offset).to_bytes(nbytes, "little") for c in p), "little")


def _unpack(v, count, nbytes, offset=0):
    raw = v.to_bytes(count * nbytes, "little")
    return [int.from_bytes(raw[i * nbytes : (i + 1) * nbytes], "little") - offset for i in range(count)]


def mul(a, b):
    """Exact product. Integer inputs use signed Kronecker substitution."""
    if not a or not b:
        return []
    if min(len(a), len(b)) <= _NAIVE_CUTOFF or not (_all_int(a) and _all_int(b)):
        return _naive_mul(a, b)
    ma = max(abs(c) for c in a)
    mb = max(abs(c) for c in b)
    n = len(a) + len(b) - 1
    bits = ma.bit_length() + mb.bit_length() + min(len(a), len(b)).bit_length() + 2
    nbytes = (bits + 7) // 8
    half = 1 << (8 * nbytes - 1)
    va = _pack(a, nbytes, half) - _pack([half] * len(a), nbytes)
    vb = _pack(b, nbytes, half) - _pack([half] * len(b), nbytes)
    prod = va * vb + _pack([half] * n, nbytes)
    return trim(_unpack(prod, n, nbytes, half))


def power(a, e):
    if e < 0:
        raise ValueError("negative exponent")
    result = [1]
    base = list(a)
    while e:
        if e & 1:
            result = mul(result, base)
        e >>= 1
        if e:
            base = mul(base, base)
    return result


def divmod_poly(a, b):
    """Division with remainder; requires the leading coefficient of b to divide
    every leading coefficient met along the way (exact division case)."""
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = list(a)
    db = len(b) - 1
    lead = b[-1]
    q = [0] * max(0, len(a) - db)
    while len(a) - 1 >= db and a:
        k = len(a) - 1 - db
        c = exact_div(a[-1], lead)
        q[k] = c
        for i, x in enumerate(b):
            a[i + k] = a[i + k] - c * x
        a = trim(a)
    return trim(q), a


def div_exact(a, b):
    q, r = divmod_poly(a, b)
    if r:
        raise ArithmeticError("polynomial division is not exact")
    return q


def content(p):
    g = 0
    for c in p:
        if isinstance(c, GaussInt):
            g = gcd(g, c.re, c.im)
        else:
            g = gcd(g, c)
    return g


def primitive(p):
    g = content(p)
    if g in (0, 1):
        return list(p)
    return [exact_div(c, g) for c in p]


def _pseudo_rem(a, b):
    # lc(b)**(deg a - deg b + 1) * a mod b, stays in Z[x]
    a = list(a)
    db = len(b) - 1
    lead = b[-1]
    while a and len(a) - 1 >= db:
        k = len(a) - 1 - db
        c = a[-1]
        a = [lead * x for x in a]
        for i, x in enumerate(b):
            a[i + k] -= c * x
        a = trim(a)
    return a


def gcd_poly(a, b):
    """Primitive gcd in Z[x] by the primitive remainder sequence."""
    a, b = primitive(trim(a)), primitive(trim(b))
    if len(a) < len(b):
        a, b = b, a
    while b:
        r = _pseudo_rem(a, b)
        a, b = b, primitive(r)
    if a and a[-1] < 0:
        a = neg(a)
    return a


def squarefree_part(p):
    p = primitive(trim(p))
    if len(p) <= 2:
        return p
    g = gcd_poly(p, derivative(p))
    if len(g) <= 1:
        return p
    return primitive(div_exact(p, g))


def evaluate(p, x):
    """Horner at ``x``; Gaussian coefficients are lifted into x's number type."""
    if not isinstance(x, (int, GaussInt)) and any(isinstance(c, GaussInt) for c in p):
        unit = x * 0 + 1j
        p = [c.re + c.im * unit if isinstance(c, GaussInt) else c for c in p]
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def evaluate_exact(p, x):
    """Evaluate at a Fraction (or int) with exact rational arithmetic."""
    x = Fraction(x)
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc
