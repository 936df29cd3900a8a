from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from treezeros import intpoly as ip
from treezeros.intpoly import GaussInt

ints = st.lists(st.integers(-(10**30), 10**30), min_size=1, max_size=60)


def _sym(p):
    x = sympy.Symbol("x")
    return sympy.Poly(list(reversed(p)) or [0], x)


@settings(max_examples=150, deadline=None)
@given(ints, ints)
def test_kronecker_product_matches_schoolbook(a, b):
    assert ip.mul(a, b) == ip._naive_mul(a, b)


def test_long_products_take_the_packed_path():
    a = [(-1) ** i * (i + 1) ** 7 for i in range(80)]
    b = [3 * i - 100 for i in range(50)]
    assert ip.mul(a, b) == ip._naive_mul(a, b)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.integers(-20, 20), min_size=1, max_size=6),
    st.lists(st.integers(-20, 20), min_size=1, max_size=6),
)
def test_gcd_against_sympy(a, b):
    a, b = ip.trim(a), ip.trim(b)
    if not a or not b:
        return
    ours = ip.gcd_poly(ip.mul(a, b), ip.mul(b, b))
    ref = sympy.gcd(_sym(ip.mul(a, b)), _sym(ip.mul(b, b)))
    ref = ref.primitive()[1]
    coeffs = [int(c) for c in reversed(ref.all_coeffs())]
    if coeffs[-1] < 0:
        coeffs = [-c for c in coeffs]
    assert ours == coeffs


def test_squarefree_part():
    # (x - 1)^3 (x + 2)^2 (x - 5)
    p = ip.mul(ip.power([-1, 1], 3), ip.mul(ip.power([2, 1], 2), [-5, 1]))
    sf = ip.squarefree_part(p)
    assert sf == ip.mul([-1, 1], ip.mul([2, 1], [-5, 1]))


def test_division():
    a = ip.mul([1, 2, 3], [4, 5])
    assert ip.div_exact(a, [4, 5]) == [1, 2, 3]
    with pytest.raises(ArithmeticError):
        ip.div_exact([1, 0, 1], [1, 1])


def test_gaussian_arithmetic():
    a, b = GaussInt(1, 2), GaussInt(3, -1)
    assert a * b == GaussInt(5, 5)
    assert ip.exact_div(a * b, b) == a
    with pytest.raises(ArithmeticError):
        ip.exact_div(GaussInt(1, 0), GaussInt(1, 1))
    assert ip.simplify(GaussInt(4, 0)) == 4 and type(ip.simplify(GaussInt(4, 0))) is int
    assert ip.content([GaussInt(4, 6), 8]) == 2
    assert str(GaussInt(1, -3)) == "1-3i"


def test_gaussian_products_and_evaluation():
    p = [GaussInt(0, 1), 2, GaussInt(1, 1)]
    q = ip.mul(p, p)
    assert ip.evaluate(q, 0.5 + 0.25j) == pytest.approx(ip.evaluate(p, 0.5 + 0.25j) ** 2)


def test_exact_evaluation():
    assert ip.evaluate_exact([1, -3, 2], Fraction(1, 2)) == 0
    assert ip.evaluate([1, 1], 3) == 4
