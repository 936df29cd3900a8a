"""The maps f_{lam,d}(z) = lam / (1 + z)**d and their compositions.

A :class:`DegreeWord` ``(d_1, ..., d_k)`` names ``g = f_{d_k} o ... o f_{d_1}``;
``d_1`` is applied first. Orbits live on the Riemann sphere: a point within
the pole guard of -1 is sent to :data:`INF`, and ``INF`` is sent to exactly 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidWord, PoleOnOrbit
from .numeric import (
    DEFAULT_PRECISION,
    INF,
    hit_tolerance,
    is_inf,
    pole_guard,
    precision_context,
)


@dataclass(frozen=True)
class DegreeWord:
    """A word over the generators f_1, ..., f_{delta-1} of H_delta.

    ``delta`` defaults to the smallest admissible value, ``max(3, max(d)+1)``.
    """

    degrees: tuple
    delta: int = None

    def __post_init__(self):
        degrees = tuple(int(d) for d in self.degrees)
        object.__setattr__(self, "degrees", degrees)
        if not degrees:
            raise InvalidWord("a degree word needs at least one letter")
        if self.delta is None:
            object.__setattr__(self, "delta", max(3, max(degrees) + 1))
        if self.delta < 3:
            raise InvalidWord(f"delta must be >= 3, got {self.delta}")
        bad = [d for d in degrees if not 1 <= d <= self.delta - 1]
        if bad:
            raise InvalidWord(f"degrees {bad} outside 1..{self.delta - 1} for delta={self.delta}")

    @classmethod
    def parse(cls, text, delta=None):
        """Build a word from ``"1,2"`` style text."""
        try:
            degrees = tuple(int(t) for t in str(text).replace(" ", "").split(",") if t)
        except ValueError as exc:
            raise InvalidWord(f"cannot parse degree word {text!r}") from exc
        return cls(degrees, delta)

    def __len__(self):
        return len(self.degrees)

    def __iter__(self):
        return iter(self.degrees)

    def __getitem__(self, i):
        return self.degrees[i]

    def __str__(self):
        return ",".join(map(str, self.degrees))

    @property
    def product(self):
        return math.prod(self.degrees)

    def repeated(self, n):
        """The word of ``g**n``."""
        if n < 1:
            raise InvalidWord("repetition count must be >= 1")
        return DegreeWord(self.degrees * n, self.delta)

    def prefix(self, k):
        return DegreeWord(self.degrees[:k], self.delta)

    def composition_label(self):
        return " o ".join(f"f{d}" for d in reversed(self.degrees))


def as_word(word, delta=None):
    if isinstance(word, DegreeWord):
        return word
    if isinstance(word, str):
        return DegreeWord.parse(word, delta)
    return DegreeWord(tuple(word), delta)


@dataclass(frozen=True)
class Orbit:
    word: DegreeWord
    lam: object
    points: tuple
    pole_passages: tuple
    hit_index: Optional[int]
    precision: int = DEFAULT_PRECISION
    hit_tol: float = field(default=None, compare=False)

    @property
    def final(self):
        return self.points[-1]

    def residual(self, index=-1):
        """|x_i + 1|, or ``inf`` when x_i is the point at infinity."""
        x = self.points[index]
        return math.inf if is_inf(x) else abs(x + 1)


@dataclass(frozen=True)
class Jet2:
    """Value and partial derivatives of a composed map at (lam, z0)."""

    w: object
    w_z: object
    w_l: object
    w_zz: object
    w_zl: object

    def as_tuple(self):
        return (self.w, self.w_z, self.w_l, self.w_zz, self.w_zl)


def _step(d, lam, z, guard):
    if z is INF:
        return lam * 0
    if abs(1 + z) < guard:
        return INF
    return lam / (1 + z) ** d


def eval_map(d, lam, z, precision=DEFAULT_PRECISION):
    """f_{lam,d}(z) on the Riemann sphere."""
    if d < 1:
        raise InvalidWord(f"degree must be >= 1, got {d}")
    with precision_context(precision) as C:
        lam = C(lam)
        if not is_inf(z):
            z = C(z)
        return _step(d, lam, z, pole_guard(precision))


def eval_word(word, lam, z0=0, precision=DEFAULT_PRECISION, hit_tol=None):
    """Orbit of ``z0`` through the letters of ``word``.

    ``hit_index`` is the least ``i >= 1`` with ``|x_i + 1| <= hit_tol``.
    """
    word = as_word(word)
    if hit_tol is None:
        hit_tol = hit_tolerance(precision)
    guard = pole_guard(precision)
    with precision_context(precision) as C:
        lam = C(lam)
        x = z0 if is_inf(z0) else C(z0)
        points = [x]
        poles = [0] if is_inf(x) else []
        hit = None
        for i, d in enumerate(word.degrees, start=1):
            x = _step(d, lam, x, guard)
            points.append(x)
            if x is INF:
                poles.append(i)
            elif hit is None and abs(x + 1) <= hit_tol:
                hit = i
    return Orbit(word, lam, tuple(points), tuple(poles), hit, precision, hit_tol)


def iterate_word(word, lam, n, precision=DEFAULT_PRECISION, hit_tol=None):
    """Orbit of 0 under ``n`` applications of the full word."""
    word = as_word(word)
    return eval_word(word.repeated(n), lam, 0, precision, hit_tol)


def eval_jet(word, lam, z0, precision=DEFAULT_PRECISION):
    """Second-order jet of the composition in (z, lam) at (z0, lam).

    Raises :class:`PoleOnOrbit` if the orbit of ``z0`` enters the pole guard.
    """
    word = as_word(word)
    guard = pole_guard(precision)
    with precision_context(precision) as C:
        lam = C(lam)
        u = C(z0)
        uz, ul, uzz, uzl = C(1), C(0), C(0), C(0)
        for i, d in enumerate(word.degrees, start=1):
            one_u = 1 + u
            if abs(one_u) < guard:
                raise PoleOnOrbit(i)
            inv = 1 / one_u
            a = inv**d  # (1+u)^-d
            b = -d * lam * a * inv  # -d lam (1+u)^(-d-1)
            c = d * (d + 1) * lam * a * inv * inv  # d(d+1) lam (1+u)^(-d-2)
            w = lam * a
            wz = b * uz
            wl = a + b * ul
            wzz = c * uz * uz + b * uzz
            wzl = -d * a * inv * uz + c * uz * ul + b * uzl
            u, uz, ul, uzz, uzl = w, wz, wl, wzz, wzl
        return Jet2(u, uz, ul, uzz, uzl)


def orbit_batch(word, lam, z0=0.0):
    """Vectorised 53-bit composition: value and d/dz, d/dlam for arrays.

    Non-finite entries mark orbits that passed through the pole.
    """
    lam = np.asarray(lam, dtype=complex)
    w = np.broadcast_to(np.asarray(z0, dtype=complex), lam.shape).copy()
    wz = np.ones_like(w)
    wl = np.zeros_like(w)
    with np.errstate(all="ignore"):
        for d in as_word(word).degrees:
            inv = 1.0 / (1.0 + w)
            a = inv**d
            b = -d * lam * a * inv
            wl = a + b * wl
            wz = b * wz
            w = lam * a
    return w, wz, wl
