import itertools
import json
import math

import mpmath as mp
import numpy as np
import pytest

from treezeros.dynamics import eval_word
from treezeros.errors import CapExceeded, EarlyHit, NoHit, TooLarge
from treezeros.hunt import hunt_zero
from treezeros.trees import (
    IndependencePolynomial,
    build_tree,
    certify_zero,
    evaluate_Z,
    exact_cost_bits,
    indep_poly_bruteforce,
    indep_poly_exact,
    level_polynomials,
    level_sizes,
)

GOLDEN = (-3 + math.sqrt(5)) / 2


def small_words():
    for k in range(1, 5):
        for word in itertools.product((1, 2, 3), repeat=k):
            if level_sizes(word)[-1] <= 20:
                yield word


class TestBuild:
    @pytest.mark.parametrize("d", [1, 2, 5])
    def test_single_vertex(self, d):
        tree = build_tree((d,))
        assert tree.vertex_count == 1 and tree.edges() == []

    def test_path(self):
        tree = build_tree((1, 2))
        assert tree.level_sizes == (1, 3)
        assert sorted(tree.edges()) == [(0, 1), (0, 2)]

    def test_binary(self):
        tree = build_tree((2, 2, 2))
        assert tree.level_sizes == (1, 3, 7)
        assert tree.max_degree() == 3
        assert len(tree.edges()) == 6

    def test_degree_bound_and_connectivity(self):
        rng = np.random.default_rng(12)
        for _ in range(30):
            delta = int(rng.integers(3, 7))
            word = tuple(int(d) for d in rng.integers(1, delta, size=rng.integers(1, 5)))
            tree = build_tree(word)
            assert tree.max_degree() <= delta
            assert len(tree.edges()) == tree.vertex_count - 1
            seen, stack = {0}, [0]
            while stack:
                for v in tree.adjacency[stack.pop()]:
                    if v not in seen:
                        seen.add(v)
                        stack.append(v)
            assert len(seen) == tree.vertex_count

    def test_large_tree_omits_adjacency(self):
        tree = build_tree((2,) * 30)
        assert tree.adjacency_omitted
        assert tree.vertex_count == 2**30 - 1
        with pytest.raises(TooLarge):
            tree.edges()

    def test_recurrence(self):
        sizes = level_sizes((3, 1, 2, 3, 2))
        assert sizes == (1, 2, 5, 16, 33)


class TestPolynomials:
    def test_examples(self):
        assert indep_poly_exact((4,)).coefficients == (1, 1)
        assert indep_poly_exact((1, 2)).coefficients == (1, 3, 1)
        assert indep_poly_exact((2, 2)).coefficients == (1, 3, 1)

    def test_bruteforce_examples(self):
        assert indep_poly_bruteforce(build_tree((1,))).coefficients == (1, 1)
        assert indep_poly_bruteforce(build_tree((1, 1))).coefficients == (1, 2)
        assert indep_poly_bruteforce(build_tree((2, 2, 2))) == indep_poly_exact((2, 2, 2))

    def test_oracle_sweep(self):
        words = list(small_words())
        assert len(words) > 50
        for word in words:
            assert indep_poly_exact(word) == indep_poly_bruteforce(build_tree(word)), word

    def test_bruteforce_limit(self):
        with pytest.raises(TooLarge):
            indep_poly_bruteforce(build_tree((3, 3, 3, 3)))

    def test_positivity_and_vertex_count(self):
        for word in [(1, 2, 2, 2), (3, 3, 3, 3), (2, 1, 2, 1, 2, 1), (1, 2) * 5]:
            p = indep_poly_exact(word)
            assert p.coefficients[0] == 1
            assert p.coefficients[1] == build_tree(word).vertex_count
            assert all(a > 0 for a in p.coefficients)

    def test_cap(self):
        with pytest.raises(CapExceeded):
            indep_poly_exact((2,) * 40)
        assert exact_cost_bits((2,) * 200) <= 2**62

    def test_ratio_identity(self):
        rng = np.random.default_rng(13)
        for _ in range(30):
            word = tuple(int(d) for d in rng.integers(1, 4, size=rng.integers(2, 6)))
            lam = complex(*rng.normal(size=2))
            Z = level_polynomials(word)
            orbit = eval_word(word, lam)
            for m in range(2, len(word) + 1):
                d, e = word[m - 1], word[m - 1] * word[m - 2]
                num = lam * evaluate_Z(Z[m - 2], lam).value ** e
                den = evaluate_Z(Z[m - 1], lam).value ** d
                if abs(den) < 1e-8:
                    break
                x = num / den
                assert abs(orbit.points[m] - x) <= 1e-10 * max(1, abs(x))


class TestEvaluate:
    def test_linear(self):
        assert evaluate_Z(IndependencePolynomial((1, 1)), -1).value == 0

    def test_golden(self):
        zv = evaluate_Z(IndependencePolynomial((1, 3, 1)), GOLDEN)
        assert abs(zv.value) <= zv.error_bound

    def test_golden_high_precision(self):
        with mp.workprec(300):
            lam = (-3 + mp.sqrt(5)) / 2
        zv = evaluate_Z(IndependencePolynomial((1, 3, 1)), lam, 256)
        assert abs(zv.value) <= zv.error_bound < 1e-70

    def test_origin(self):
        assert evaluate_Z(indep_poly_exact((1, 2, 2, 3)), 0).value == 1

    def test_bound_covers_the_error(self):
        p = indep_poly_exact((2, 2, 2, 2, 2))
        rng = np.random.default_rng(14)
        for _ in range(20):
            lam = complex(*rng.normal(size=2))
            low = evaluate_Z(p, lam)
            with mp.workprec(300):
                ref = mp.polyval(list(reversed(p.coefficients)), mp.mpc(lam))
            assert abs(low.value - complex(ref)) <= low.error_bound


class TestCertify:
    def test_single_vertex(self):
        w = certify_zero((1,), -1)
        assert w.tier == "exact-polynomial"
        assert w.orbit_residual == 0
        assert w.exact.value == 0

    def test_path_outside_region(self):
        w = certify_zero((1, 2), GOLDEN)
        assert w.tier == "exact-polynomial"
        assert not w.udelta.member
        assert abs(w.exact.value) <= w.exact.allowance
        assert any("k = 2" in n for n in w.notes)

    def test_no_hit(self):
        with pytest.raises(NoHit):
            certify_zero((1, 2), 0.05)

    def test_early_hit(self):
        with pytest.raises(EarlyHit) as info:
            certify_zero((1, 2, 2), -1, refine=False)
        assert info.value.index == 1

    def test_zero_iff_hit(self):
        # hits found by Newton on x_k + 1 vanish on the exact polynomial
        rng = np.random.default_rng(15)
        done = 0
        for _ in range(40):
            word = tuple(int(d) for d in rng.integers(1, 4, size=rng.integers(2, 5)))
            poly = indep_poly_exact(word)
            roots = np.roots(list(reversed(poly.coefficients)))
            for r in roots[:2]:
                try:
                    w = certify_zero(word, complex(r))
                except (NoHit, EarlyHit):
                    continue
                assert w.tier == "exact-polynomial"
                assert abs(w.exact.value) <= w.exact.allowance
                done += 1
        assert done > 10

    def test_ratio_tier(self):
        res = hunt_zero((1, 2), 0.7624680 + 2.5253695j, n_max=64)
        w = certify_zero(res.full_word, res.lam, exact_cap_bits=0)
        assert w.tier == "high-precision-ratio"
        assert w.orbit_residual <= 2.0**-128
        assert w.ratio_residual == w.orbit_residual

    def test_json(self):
        w = certify_zero((1, 2), GOLDEN)
        obj = json.loads(json.dumps(w.to_json()))
        assert obj["tier"] == "exact-polynomial"
        assert obj["tree"] == {"vertex_count": 3, "level_sizes": [1, 3]}
        assert obj["precision_bits"] == 256
        assert obj["udelta"]["member"] is False
