import cmath
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest

from treezeros.errors import PoleAlpha, PreconditionError
from treezeros.region import (
    alpha_to_lambda,
    lambda_star,
    membership_residual,
    shearer_radius,
    udelta_boundary,
    udelta_witness,
)


@pytest.mark.parametrize(
    "delta,value",
    [(3, Fraction(4)), (4, Fraction(27, 16)), (5, Fraction(256, 243))],
)
def test_lambda_star(delta, value):
    assert lambda_star(delta) == value


@pytest.mark.parametrize(
    "delta,value",
    [(3, Fraction(4, 27)), (4, Fraction(27, 256)), (9, Fraction(8**8, 9**9))],
)
def test_shearer_radius(delta, value):
    assert shearer_radius(delta) == value


def test_small_delta_rejected():
    with pytest.raises(PreconditionError):
        lambda_star(2)
    with pytest.raises(PreconditionError):
        udelta_witness(2, 0.1)


def test_scale_ordering_up_to_64():
    for delta in range(3, 65):
        assert lambda_star(delta) > shearer_radius(delta)


class TestAlphaToLambda:
    def test_origin(self):
        for delta in range(3, 10):
            assert alpha_to_lambda(delta, 0) == 0

    def test_endpoints(self):
        assert alpha_to_lambda(3, 1) == pytest.approx(-4 / 27, abs=1e-15)
        assert alpha_to_lambda(3, -1) == pytest.approx(4, abs=1e-15)

    def test_endpoints_match_exact_constants(self):
        for delta in range(3, 10):
            assert abs(alpha_to_lambda(delta, -1) - float(lambda_star(delta))) < 1e-12
            assert abs(alpha_to_lambda(delta, 1) + float(shearer_radius(delta))) < 1e-14

    def test_pole(self):
        with pytest.raises(PoleAlpha):
            alpha_to_lambda(4, -3)


class TestWitness:
    def test_table_row(self):
        w = udelta_witness(3, 0.7624680 + 2.5253695j)
        assert w.member
        assert abs(w.modulus - 0.97581) < 1e-4

    def test_zero_parameter(self):
        for delta in (3, 6, 9):
            w = udelta_witness(delta, 0)
            assert w.alpha_min == 0 and w.member

    def test_boundary_verdict_at_lambda_star(self):
        w = udelta_witness(3, 4)
        assert w.verdict == "boundary" and not w.member
        expected = [-1, (-5 + 1j * 7**0.5) / 2, (-5 - 1j * 7**0.5) / 2]
        for e in expected:
            assert min(abs(complex(r) - e) for r in w.alpha_roots) < 1e-12
        assert abs(w.modulus - 1) < 1e-12

    def test_outside(self):
        assert udelta_witness(3, 10).verdict == "outside"

    def test_roots_are_polished(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            delta = int(rng.integers(3, 10))
            lam = complex(*rng.normal(size=2))
            w = udelta_witness(delta, lam)
            assert len(w.alpha_roots) == delta
            for r in w.alpha_roots:
                assert membership_residual(delta, lam, r) <= 1e-10

    def test_tie_is_flagged(self):
        # a real lam whose two smallest roots are complex conjugate
        w = udelta_witness(3, -1)
        assert w.tie
        assert cmath.phase(complex(w.alpha_min)) <= cmath.phase(complex(w.alpha_min).conjugate())

    def test_high_precision(self):
        w = udelta_witness(5, 0.3 + 0.4j, precision=256)
        with mp.workprec(256):
            for r in w.alpha_roots:
                assert membership_residual(5, w.lam, r) < 1e-60


def test_round_trip_interior():
    rng = np.random.default_rng(6)
    for _ in range(1000):
        delta = int(rng.integers(3, 10))
        rad = (1 - 1e-6) * np.sqrt(rng.uniform())
        alpha = rad * cmath.exp(1j * rng.uniform(0, 2 * np.pi))
        w = udelta_witness(delta, alpha_to_lambda(delta, alpha))
        assert w.member
        assert min(abs(complex(r) - alpha) for r in w.alpha_roots) <= 1e-10


class TestBoundary:
    def test_contains_endpoints(self):
        for n in (8, 16, 64):
            samples = udelta_boundary(3, n)
            assert abs(samples[0] + 4 / 27) < 1e-15
            assert abs(samples[n // 2] - 4) < 1e-12

    def test_quarter_points(self):
        samples = udelta_boundary(3, 8)[::2]
        for theta, lam in zip((0, np.pi / 2, np.pi, 3 * np.pi / 2), samples):
            assert abs(lam - alpha_to_lambda(3, cmath.exp(1j * theta))) < 1e-14

    def test_too_few_samples(self):
        with pytest.raises(PreconditionError):
            udelta_boundary(3, 4)

    @pytest.mark.parametrize("delta", range(3, 10))
    def test_samples_sit_on_the_unit_circle(self, delta):
        # alpha = 1 is a double root at the sample theta = 0, so a parameter
        # rounded to double moves it by about sqrt(eps); sampling and solving
        # at 128 bits keeps the round trip well inside 1e-10 everywhere
        for lam in udelta_boundary(delta, 64, precision=128):
            w = udelta_witness(delta, lam, precision=128)
            assert abs(w.modulus - 1) <= 1e-10
            assert w.verdict == "boundary"

    @pytest.mark.parametrize("delta", range(3, 10))
    def test_double_samples_away_from_the_cusp(self, delta):
        samples = udelta_boundary(delta, 64)
        for j, lam in enumerate(samples):
            if j == 0:
                continue
            assert abs(udelta_witness(delta, lam).modulus - 1) <= 1e-10
        # the cusp sample still lands within sqrt(eps) of the circle
        assert abs(udelta_witness(delta, samples[0]).modulus - 1) <= 1e-7

    def test_high_precision_agrees(self):
        a = udelta_boundary(4, 16)
        b = udelta_boundary(4, 16, precision=200)
        assert all(abs(x - complex(y)) < 1e-14 for x, y in zip(a, b))
