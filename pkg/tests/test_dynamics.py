import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treezeros.dynamics import (
    DegreeWord,
    as_word,
    eval_jet,
    eval_map,
    eval_word,
    iterate_word,
    orbit_batch,
)
from treezeros.errors import InvalidWord, PoleOnOrbit
from treezeros.numeric import INF


class TestDegreeWord:
    def test_default_delta(self):
        assert DegreeWord((1, 2)).delta == 3
        assert DegreeWord((1, 1)).delta == 3
        assert DegreeWord((4,)).delta == 5

    def test_invalid(self):
        with pytest.raises(InvalidWord):
            DegreeWord(())
        with pytest.raises(InvalidWord):
            DegreeWord((3,), 3)
        with pytest.raises(InvalidWord):
            DegreeWord((0, 1))
        with pytest.raises(InvalidWord):
            DegreeWord.parse("1,x")

    def test_parse_and_helpers(self):
        w = DegreeWord.parse("1, 2,2", 4)
        assert w.degrees == (1, 2, 2) and w.delta == 4
        assert str(w) == "1,2,2"
        assert w.product == 4
        assert w.repeated(2).degrees == (1, 2, 2, 1, 2, 2)
        assert w.prefix(1).degrees == (1,)
        assert w.composition_label() == "f2 o f2 o f1"
        assert as_word("1,2") == DegreeWord((1, 2))


class TestEvalMap:
    def test_origin(self):
        assert eval_map(2, 0.5, 0) == 0.5

    def test_pole(self):
        assert eval_map(3, 1 + 2j, -1) is INF
        assert eval_map(3, 1 + 2j, -1, precision=256) is INF

    def test_infinity(self):
        assert eval_map(4, 7, INF) == 0

    @pytest.mark.parametrize("d", [1, 2, 5, 8])
    def test_pole_algebra(self, d):
        for lam in (0.3, -2 + 1j, 1e-5j):
            assert eval_map(d, lam, INF) == 0
            assert eval_map(d, lam, -1) is INF

    def test_bad_degree(self):
        with pytest.raises(InvalidWord):
            eval_map(0, 1, 0)


class TestEvalWord:
    def test_single(self):
        orb = eval_word((2,), 0.3 - 0.1j)
        assert orb.points == (0, 0.3 - 0.1j)
        assert orb.hit_index is None

    def test_zero_parameter(self):
        assert eval_word((1, 2), 0).points == (0, 0, 0)

    def test_hit(self):
        orb = eval_word((1,), -1)
        assert orb.points == (0, -1)
        assert orb.hit_index == 1

    def test_passage_through_infinity(self):
        orb = eval_word((1, 2, 2), -1)
        assert orb.points[2] is INF and orb.points[3] == 0
        assert orb.pole_passages == (2,)
        assert orb.hit_index == 1
        assert orb.residual(2) == float("inf")

    def test_replay_is_deterministic(self):
        a = eval_word((1, 2, 1, 2), 0.7 + 2.5j, 0, 256)
        b = eval_word((1, 2, 1, 2), 0.7 + 2.5j, 0, 256)
        assert a.points == b.points

    def test_replay_from_midpoint(self):
        word = DegreeWord((1, 2, 2, 1))
        orb = eval_word(word, 0.2 + 0.3j)
        tail = eval_word(word.degrees[2:], 0.2 + 0.3j, orb.points[2])
        assert tail.points == orb.points[2:]


class TestIterate:
    def test_convergence_to_attracting_point(self):
        orb = iterate_word((2,), 0.05, 50)
        roots = np.roots([1, 2, 1, -0.05])
        star = min(roots, key=abs)
        assert abs(star) < 1 / 3
        errs = [abs(orb.points[i] - star) for i in (5, 10, 20, 50)]
        assert errs == sorted(errs, reverse=True)
        assert errs[-1] < 1e-12

    def test_zero(self):
        assert all(p == 0 for p in iterate_word((1, 2), 0, 3).points)

    def test_hit(self):
        assert iterate_word((1,), -1, 1).hit_index == 1

    def test_bad_count(self):
        with pytest.raises(InvalidWord):
            iterate_word((1,), 0.1, 0)


def _fd_jet(word, lam, z, h=1e-7):
    def g(l, x):
        return eval_word(word, l, x).final

    w_z = (g(lam, z + h) - g(lam, z - h)) / (2 * h)
    w_l = (g(lam + h, z) - g(lam - h, z)) / (2 * h)

    def gz(l, x):
        return eval_jet(word, l, x).w_z

    w_zz = (gz(lam, z + h) - gz(lam, z - h)) / (2 * h)
    w_zl = (gz(lam + h, z) - gz(lam - h, z)) / (2 * h)
    return w_z, w_l, w_zz, w_zl


def _rel(a, b):
    return abs(a - b) / max(1.0, abs(b))


class TestJet:
    def test_single_letter_values(self):
        assert eval_jet((2,), 0.4, 0).w_z == pytest.approx(-0.8)
        assert eval_jet((3,), 1 + 1j, 0).w_l == 1

    def test_two_letters_against_differences(self):
        jet = eval_jet((1, 1), 0.2, 0.1)
        assert jet.w == pytest.approx(eval_word((1, 1), 0.2, 0.1).final)
        for got, ref in zip((jet.w_z, jet.w_l, jet.w_zz, jet.w_zl), _fd_jet((1, 1), 0.2, 0.1)):
            assert _rel(got, ref) <= 1e-6

    def test_random_words_against_differences(self):
        rng = np.random.default_rng(3)
        checked = 0
        while checked < 1000:
            word = tuple(int(d) for d in rng.integers(1, 4, size=rng.integers(1, 6)))
            lam = complex(*rng.uniform(-2, 2, size=2))
            z = complex(*rng.uniform(-2, 2, size=2))
            orb = eval_word(word, lam, z)
            pts = orb.points[:-1]
            if orb.pole_passages or min(abs(1 + p) for p in pts) < 0.1 or abs(orb.final) > 1e6:
                continue
            jet = eval_jet(word, lam, z)
            fd = _fd_jet(word, lam, z)
            scale = max(1.0, *(abs(v) for v in fd))
            for got, ref in zip((jet.w_z, jet.w_l, jet.w_zz, jet.w_zl), fd):
                assert abs(got - ref) / scale <= 1e-6, (word, lam, z)
            checked += 1

    @settings(max_examples=200, deadline=None)
    @given(
        d=st.integers(1, 8),
        lr=st.floats(-2, 2),
        li=st.floats(-2, 2),
        zr=st.floats(-3, 3),
        zi=st.floats(-3, 3),
    )
    def test_derivative_identity(self, d, lr, li, zr, zi):
        z = complex(zr, zi)
        if abs(1 + z) < 0.05:
            return
        jet = eval_jet((d,), complex(lr, li), z)
        scale = max(abs(jet.w_z * (1 + z)), abs(d * jet.w), 1e-300)
        assert abs(jet.w_z * (1 + z) + d * jet.w) <= 1e-12 * scale

    def test_pole_raises(self):
        with pytest.raises(PoleOnOrbit) as info:
            eval_jet((1, 2), -1, 0)
        assert info.value.index == 2

    def test_high_precision_matches_double(self):
        a = eval_jet((1, 2, 2), 0.3 + 0.2j, 0.1)
        b = eval_jet((1, 2, 2), 0.3 + 0.2j, 0.1, 256)
        for x, y in zip(a.as_tuple(), b.as_tuple()):
            assert abs(x - complex(y)) <= 1e-13 * max(1, abs(x))


def test_orbit_batch_matches_scalar():
    rng = np.random.default_rng(4)
    lam = rng.normal(size=20) + 1j * rng.normal(size=20)
    w, wz, wl = orbit_batch((1, 3, 2), lam, 0.2)
    for i in range(20):
        jet = eval_jet((1, 3, 2), lam[i], 0.2)
        assert abs(w[i] - jet.w) <= 1e-12 * max(1, abs(jet.w))
        assert abs(wl[i] - jet.w_l) <= 1e-10 * max(1, abs(jet.w_l))
        assert abs(wz[i] - jet.w_z) <= 1e-10 * max(1, abs(jet.w_z))
