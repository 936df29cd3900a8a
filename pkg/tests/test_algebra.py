import json
import random
from fractions import Fraction

import numpy as np
import pytest
import sympy

from treezeros.algebra import (
    BivarPoly,
    UnivarPoly,
    compose_rational,
    estimate_degrees,
    exact_multiplier,
    fixed_point_poly,
    multiplier_poly,
    parabolic_candidates,
    resultant_z,
)
from treezeros.dynamics import eval_word
from treezeros.errors import CapExceeded, InexactMultiplier
from treezeros.intpoly import GaussInt
from treezeros.numeric import polyroots
from treezeros.parabolic import solve_parabolic

TABLE_D3 = 0.7624680 + 2.5253695j
TABLE_D4 = 0.37725715 + 1.21796118j

lam_s, z_s = sympy.symbols("lam z")


def poly(expr):
    """BivarPoly from a sympy expression in lam, z."""
    terms = sympy.Poly(sympy.expand(expr), lam_s, z_s).terms()
    return BivarPoly.from_terms({(i, j): int(c) for (i, j), c in terms})


def to_sympy(p):
    return sum(int(c) * lam_s**i * z_s**j for (i, j), c in p.terms().items())


class TestCompose:
    def test_single_letters(self):
        P, Q = compose_rational((1,))
        assert P == poly(lam_s) and Q == poly(1 + z_s)
        P, Q = compose_rational((2,))
        assert P == poly(lam_s) and Q == poly((1 + z_s) ** 2)

    def test_two_letters(self):
        P, Q = compose_rational((1, 2))
        assert P == poly(lam_s * (1 + z_s) ** 2)
        assert Q == poly((1 + z_s + lam_s) ** 2)

    def test_random_complex_points(self):
        P, Q = compose_rational((1, 2))
        rng = np.random.default_rng(7)
        for _ in range(20):
            l, z = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
            ref = eval_word((1, 2), l, z).final
            assert abs(P.evaluate(l, z) / Q.evaluate(l, z) - ref) < 1e-10 * max(1, abs(ref))

    @pytest.mark.parametrize("word", [(1,), (2, 1), (1, 2), (1, 1, 2), (3, 1), (2, 2, 1), (1, 3, 3)])
    def test_exact_at_rational_points(self, word):
        P, Q = compose_rational(word)
        rnd = random.Random(8)
        for _ in range(100):
            l = Fraction(rnd.randint(-30, 30), rnd.randint(1, 17))
            z = Fraction(rnd.randint(-30, 30), rnd.randint(1, 17))
            ref = z
            for d in word:
                if ref == -1:
                    break
                ref = l / (1 + ref) ** d
            else:
                q = Q.evaluate_exact(l, z)
                if q != 0:
                    assert P.evaluate_exact(l, z) / q == ref

    def test_degree_estimates_are_tight(self):
        for word in [(1,), (2,), (1, 2), (2, 2, 1), (1, 3, 3)]:
            P, Q = compose_rational(word)
            dl, dz = estimate_degrees(word)
            assert max(P.deg_z, Q.deg_z) == dz
            assert max(P.deg_lambda, Q.deg_lambda) == dl

    def test_cap(self):
        with pytest.raises(CapExceeded):
            compose_rational((8,) * 8)


class TestFixedAndMultiplier:
    def test_fixed_point_polys(self):
        assert fixed_point_poly(*compose_rational((1,))) == poly(lam_s - z_s - z_s**2)
        assert fixed_point_poly(*compose_rational((2,))) == poly(lam_s - z_s * (1 + z_s) ** 2)

    def test_degree_sanity(self):
        for word in [(1,), (2,), (1, 2), (3, 3), (1, 1, 2)]:
            P, Q = compose_rational(word)
            assert fixed_point_poly(P, Q).deg_z == Q.deg_z + 1

    def test_multiplier_polys(self):
        m1 = multiplier_poly(*compose_rational((1,)), 1)
        assert m1 == poly(-lam_s - (1 + z_s) ** 2)
        m2 = multiplier_poly(*compose_rational((2,)), 1)
        assert m2 == poly(-2 * lam_s * (1 + z_s) - (1 + z_s) ** 4)

    def test_gaussian_multiplier(self):
        m = multiplier_poly(*compose_rational((1,)), "i")
        assert m.coeff(0, 0) == GaussInt(0, -1)

    @pytest.mark.parametrize("mu", [0.5 + 0.1j, 0.3, complex(np.exp(0.7j))])
    def test_inexact_multiplier(self, mu):
        with pytest.raises(InexactMultiplier):
            multiplier_poly(*compose_rational((1,)), mu)

    def test_exact_multiplier_forms(self):
        assert exact_multiplier(-1) == (-1, 1)
        assert exact_multiplier("1/2") == (1, 2)
        assert exact_multiplier("1/2+3/4i") == (GaussInt(2, 3), 4)
        assert exact_multiplier(1j) == (GaussInt(0, 1), 1)
        assert exact_multiplier("-i") == (GaussInt(0, -1), 1)


class TestResultant:
    def test_unit(self):
        A = fixed_point_poly(*compose_rational((1, 2)))
        assert resultant_z(A, BivarPoly.constant(1)).coeffs == (1,)

    def test_word_one(self):
        P, Q = compose_rational((1,))
        R = resultant_z(fixed_point_poly(P, Q), multiplier_poly(P, Q, 1))
        roots = sympy.roots(sympy.Poly(list(reversed(R.coeffs)), lam_s))
        assert set(roots) == {0, sympy.Rational(-1, 4)}
        # -1/4 is parabolic: z = -1/2 is fixed with multiplier 1
        assert Fraction(-1, 4) / (1 + Fraction(-1, 2)) == Fraction(-1, 2)
        assert -Fraction(-1, 4) / (1 + Fraction(-1, 2)) ** 2 == 1

    @pytest.mark.parametrize("word,mu", [((1,), 1), ((2,), 1), ((2,), -1), ((1, 1), 1), ((1, 2), 1), ((2, 1), -1)])
    def test_against_sympy(self, word, mu):
        P, Q = compose_rational(word)
        l, m = fixed_point_poly(P, Q), multiplier_poly(P, Q, mu)
        ours = resultant_z(l, m)
        ref = sympy.resultant(to_sympy(l), to_sympy(m), z_s)
        ref_coeffs = sympy.Poly(ref, lam_s).all_coeffs()[::-1]
        assert list(ours.coeffs) == [int(c) for c in ref_coeffs]

    def test_identically_zero(self):
        A = poly((z_s + 1) * (lam_s + z_s))
        B = poly((z_s + 1) * (z_s - 3))
        assert resultant_z(A, B).identically_zero

    def test_table_rows(self):
        for word, target in (((1, 2), TABLE_D3), ((1, 3), TABLE_D4)):
            P, Q = compose_rational(word)
            R = resultant_z(fixed_point_poly(P, Q), multiplier_poly(P, Q, 1))
            roots = [complex(r) for r in polyroots(list(R.coeffs), 256)]
            assert min(abs(r - target) for r in roots) < 1e-6


class TestCandidates:
    def test_word_one(self):
        rep = parabolic_candidates((1,))
        assert [complex(c) for c in rep.candidates] == pytest.approx([-0.25])
        assert rep.lambda_zero_multiplicity >= 1
        assert any(abs(l) == 0 for l, _ in rep.spurious)

    def test_word_two_contains_closed_form(self):
        rep = parabolic_candidates((2,))
        assert min(abs(complex(c) + 4 / 27) for c in rep.candidates) < 1e-12

    def test_table_row(self):
        rep = parabolic_candidates((1, 2))
        assert rep.pq_coprime
        assert min(abs(complex(c) - TABLE_D3) for c in rep.candidates) < 1e-6

    def test_soundness(self):
        for word in [(1, 2), (2, 2), (1, 1, 1)]:
            P, Q = compose_rational(word)
            l, m = fixed_point_poly(P, Q), multiplier_poly(P, Q, 1)
            rep = parabolic_candidates(word)
            for sol in rep.solutions:
                lam, z = complex(sol.lam), complex(sol.z)
                assert abs(l.evaluate(lam, z)) <= 1e-9 * l.scale_at(lam, z)
                assert abs(m.evaluate(lam, z)) <= 1e-9 * m.scale_at(lam, z)

    @pytest.mark.parametrize("word", [(1, 2), (2, 1, 1), (3,), (1, 1, 1)])
    def test_completeness_against_random_newton(self, word):
        rep = parabolic_candidates(word)
        # a Newton solution may also land on a degenerate root, e.g. lam = -1
        # for (1, 1, 1) where the composition is the identity map
        roots = [complex(c) for c in rep.candidates] + [complex(l) for l, _ in rep.spurious]
        rng = np.random.default_rng(9)
        found = 0
        for _ in range(100):
            lam0 = complex(*rng.normal(size=2))
            z0 = complex(*rng.normal(size=2))
            try:
                sol = solve_parabolic(word, 1, lam0, z0)
            except ArithmeticError:
                continue
            found += 1
            assert min(abs(complex(sol.lam) - r) for r in roots) < 1e-8
        assert found > 10


    def test_identity_composition_is_reported(self):
        rep = parabolic_candidates((1, 1, 1))
        reasons = {round(complex(l).real, 9): why for l, why in rep.spurious}
        assert "every z is fixed" in reasons[-1.0]


class TestJson:
    def test_round_trip(self):
        P, Q = compose_rational((1, 2, 2))
        obj = json.loads(json.dumps(P.to_json()))
        assert BivarPoly.from_json(obj) == P
        assert obj["deg_z"] == P.deg_z and obj["deg_lambda"] == P.deg_lambda
        assert all(isinstance(c, str) for _, _, c in obj["coeffs"])

    def test_gaussian_round_trip(self):
        m = multiplier_poly(*compose_rational((1, 2)), "1+2i")
        assert BivarPoly.from_json(json.loads(json.dumps(m.to_json()))) == m

    def test_univariate(self):
        R = UnivarPoly((0, -1, 4, 10**40))
        assert UnivarPoly.from_json(R.to_json()) == R
