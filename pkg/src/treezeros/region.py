"""Closed-form constants and the region U_delta.

U_delta is the image of the open unit disc under
``alpha -> -alpha (delta-1)**(delta-1) / (delta-1+alpha)**delta``. A parameter
``lam`` belongs to it exactly when the membership polynomial
``lam (delta-1+alpha)**delta + alpha (delta-1)**(delta-1)`` has a root of
modulus < 1, so membership reduces to the root of least modulus.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

import mpmath as mp
import numpy as np

from .errors import PoleAlpha, PreconditionError
from .numeric import DEFAULT_PRECISION, polyroots, polyval, precision_context

BOUNDARY_BAND = 1e-9
TIE_TOL = 1e-12


def _check_delta(delta):
    if int(delta) != delta or delta < 3:
        raise PreconditionError(f"delta must be an integer >= 3, got {delta}")


def lambda_star(delta):
    """(delta-1)**(delta-1) / (delta-2)**delta, the end of the real zero-free interval."""
    _check_delta(delta)
    return Fraction((delta - 1) ** (delta - 1), (delta - 2) ** delta)


def shearer_radius(delta):
    """(delta-1)**(delta-1) / delta**delta."""
    _check_delta(delta)
    return Fraction((delta - 1) ** (delta - 1), delta**delta)


def alpha_to_lambda(delta, alpha, precision=DEFAULT_PRECISION):
    _check_delta(delta)
    with precision_context(precision) as C:
        alpha = C(alpha)
        base = delta - 1 + alpha
        if base == 0:
            raise PoleAlpha(f"alpha = -(delta-1) = {-(delta - 1)} is a pole")
        return -alpha * (delta - 1) ** (delta - 1) / base**delta


def membership_coefficients(delta, lam):
    """Coefficients (constant term first) of the membership polynomial in alpha."""
    c = [lam * comb(delta, j) * (delta - 1) ** (delta - j) for j in range(delta + 1)]
    c[1] = c[1] + (delta - 1) ** (delta - 1)
    return c


@dataclass(frozen=True)
class UdeltaWitness:
    delta: int
    lam: object
    alpha_roots: tuple
    alpha_min: object
    modulus: float
    verdict: str  # "member", "boundary" or "outside"
    tie: bool = False
    precision: int = DEFAULT_PRECISION

    @property
    def member(self):
        return self.verdict == "member"

    @property
    def margin(self):
        return 1.0 - self.modulus


def udelta_witness(delta, lam, precision=DEFAULT_PRECISION):
    """All roots of the membership polynomial and the U_delta verdict.

    At ``lam = 0`` the polynomial drops to degree one and only the root 0 is
    finite. Moduli within ``BOUNDARY_BAND`` of 1 give the verdict "boundary".
    Equal minimal moduli are broken by smallest argument and flagged.
    """
    _check_delta(delta)
    with precision_context(precision) as C:
        lam = C(lam)
        coeffs = membership_coefficients(delta, lam)
        roots = polyroots(coeffs, precision)
        roots = [C(r) for r in roots]
    mods = [float(abs(r)) for r in roots]
    smallest = min(mods)
    tied = [i for i, m in enumerate(mods) if m - smallest <= TIE_TOL * max(1.0, smallest)]
    i_min = min(tied, key=lambda i: float(mp.arg(mp.mpc(roots[i]))))
    modulus = mods[i_min]
    if abs(modulus - 1.0) <= BOUNDARY_BAND:
        verdict = "boundary"
    elif modulus < 1.0:
        verdict = "member"
    else:
        verdict = "outside"
    return UdeltaWitness(
        delta=delta,
        lam=lam,
        alpha_roots=tuple(roots),
        alpha_min=roots[i_min],
        modulus=modulus,
        verdict=verdict,
        tie=len(tied) > 1,
        precision=precision,
    )


def membership_residual(delta, lam, alpha):
    """|p(alpha)| relative to sum |c_j| |alpha|**j."""
    coeffs = membership_coefficients(delta, lam)
    scale = sum(abs(c) * abs(alpha) ** j for j, c in enumerate(coeffs))
    return abs(polyval(coeffs, alpha)) / scale


def udelta_boundary(delta, samples, precision=DEFAULT_PRECISION):
    """lam(exp(i theta_j)) for theta_j = 2 pi j / samples."""
    _check_delta(delta)
    if samples < 8:
        raise PreconditionError("need at least 8 boundary samples")
    if precision == DEFAULT_PRECISION:
        alpha = np.exp(2j * np.pi * np.arange(samples) / samples)
        out = -alpha * (delta - 1) ** (delta - 1) / (delta - 1 + alpha) ** delta
        return [complex(v) for v in out]
    with mp.workprec(precision):
        return [alpha_to_lambda(delta, mp.expj(2 * mp.pi * j / samples), precision) for j in range(samples)]
