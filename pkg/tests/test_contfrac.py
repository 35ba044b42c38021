import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nbsums.contfrac import (DepthUnavailable, PrecisionExhausted, alpha_derivative, cf_rational, cf_real,
                             convergents, expand, gamma_derivative, gauss_map, gauss_measure,
                             gauss_preimage_measure, locate_cell, make_cell)
from nbsums.experiments import (alpha_pair_products_ok, cell_length_bound_holds, denominator_bound_holds,
                                random_digit_vectors)

GOLDEN = (math.sqrt(5) - 1) / 2

reduced_fractions = st.integers(2, 10**4).flatmap(
    lambda k: st.integers(1, k - 1).filter(lambda h: math.gcd(h, k) == 1).map(lambda h: Fraction(h, k)))


class TestGaussMap:
    def test_examples(self):
        assert gauss_map(Fraction(1, 2)) == 0
        assert gauss_map(Fraction(2, 7)) == Fraction(1, 2)
        assert gauss_map(0.3) == pytest.approx(1 / 3, abs=1e-12)

    @pytest.mark.parametrize("bad", [0, Fraction(0), 1, 1.5, -0.2])
    def test_domain(self, bad):
        with pytest.raises(ValueError):
            gauss_map(bad)


class TestExpansions:
    def test_five_sevenths(self):
        e = cf_rational(Fraction(5, 7))
        assert e.digits == (1, 2, 2)
        assert [Fraction(p, q) for p, q in zip(e.p[1:], e.q[1:])] == [1, Fraction(2, 3), Fraction(5, 7)]

    def test_small_examples(self):
        assert cf_rational(Fraction(1, 2)).digits == (2,)
        assert cf_rational(Fraction(3, 7)).digits == (2, 3)
        assert cf_rational(Fraction(0)).depth == 0

    def test_float_examples(self):
        assert cf_real(GOLDEN, 10).digits == (1,) * 10
        assert cf_real(math.sqrt(2) - 1, 8).digits == (2,) * 8
        assert cf_real(5 / 7 + 0.0, 3).digits == (1, 2, 2)

    def test_float_rational_truncates(self):
        e = cf_real(5 / 7, 20)
        assert e.truncated and e.digits == (1, 2, 2)
        with pytest.raises(PrecisionExhausted):
            expand(5 / 7, 10)

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            cf_rational(Fraction(3, 2))
        with pytest.raises(ValueError):
            cf_real(0.5, 0)
        with pytest.raises(TypeError):
            cf_real(Fraction(1, 3), 4)

    @given(reduced_fractions)
    def test_recurrence_and_determinant(self, r):
        e = cf_rational(r)
        assert Fraction(e.p[-1], e.q[-1]) == r
        for l in range(e.depth):
            a = e.digits[l]
            assert e.p[l + 1] == a * e.p[l] + e.p_at(l - 1)
            assert e.q[l + 1] == a * e.q[l] + e.q_at(l - 1)
            assert abs(e.p[l + 1] * e.q[l] - e.q[l + 1] * e.p[l]) == 1
        if e.depth >= 2:
            assert e.digits[-1] >= 2

    @given(reduced_fractions)
    def test_chain_definitions(self, r):
        e = cf_rational(r)
        assert e.alphas[-1] == 0
        for j in range(e.depth + 1):
            assert e.betas[j] == math.prod(e.alphas[: j + 1])
        for j, g in enumerate(e.gammas):
            assert g == pytest.approx(float(e.beta(j - 1)) * math.log(1 / e.alphas[j]), rel=1e-12)

    def test_invariants_bulk_sample(self):
        rng = np.random.default_rng(11)
        ks = rng.integers(2, 10**4 + 1, size=10**5)
        for k in ks:
            k = int(k)
            h = int(rng.integers(1, k))
            g = math.gcd(h, k)
            h, k = h // g, k // g
            if k < 2:
                continue
            e = cf_rational(Fraction(h, k))
            p, q = e.p, e.q
            assert (p[-1], q[-1]) == (h, k)
            assert all(abs(p[l] * q[l - 1] - q[l] * p[l - 1]) == 1 for l in range(1, len(p)))
            assert alpha_pair_products_ok(Fraction(h, k))


class TestCells:
    def test_examples(self):
        c = make_cell((1,))
        assert c.endpoints == (Fraction(1, 2), Fraction(1)) and c.length == Fraction(1, 2)
        c = make_cell((2, 3))
        assert set(c.endpoints) == {Fraction(3, 7), Fraction(4, 9)} and c.length == Fraction(1, 63)
        c = make_cell((2,))
        assert c.endpoints == (Fraction(1, 3), Fraction(1, 2)) and c.length == Fraction(1, 6)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            make_cell(())

    def test_length_formula(self):
        for digits in random_digit_vectors(2000, seed=3):
            c = make_cell(digits)
            _, q = convergents(digits)
            q_prev = q[-2] if len(q) > 1 else 0
            assert c.length == Fraction(1, q[-1] * (q[-1] + q_prev))

    def test_locate_examples(self):
        assert locate_cell(0.7, 1).digits == (1,)
        assert locate_cell(5 / 7 - 1e-9, 3).digits == (1, 2, 2)
        c = locate_cell(0.42, 2)
        assert c.digits == (2, 2) and c.endpoints == (Fraction(2, 5), Fraction(3, 7))

    def test_locate_depth_unavailable(self):
        with pytest.raises(DepthUnavailable):
            locate_cell(Fraction(1, 2), 2)

    @given(st.floats(1e-6, 1 - 1e-6), st.integers(1, 6))
    def test_located_cell_contains_point(self, x, s):
        try:
            c = locate_cell(x, s)
        except DepthUnavailable:
            return
        lo, hi = c.endpoints
        assert float(lo) - 1e-12 <= x <= float(hi) + 1e-12

    def test_length_and_denominator_bounds(self):
        for digits in random_digit_vectors(10**4, max_depth=12, max_digit=50, seed=5):
            assert cell_length_bound_holds(digits)
            assert denominator_bound_holds(digits)


def _interior_points(n, seed):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        s = int(rng.integers(1, 9))
        digits = tuple(int(b) for b in rng.integers(1, 20, size=s))
        lo, hi = make_cell(digits).endpoints
        x = lo + (hi - lo) * Fraction(int(rng.integers(1, 1000)), 1000)
        yield s, x, (hi - lo) / 10**6


class TestDerivatives:
    def test_alpha_derivative_vs_finite_differences(self):
        for s, x, h in _interior_points(1000, 21):
            def alpha(y):
                return cf_rational(y).alphas[s]
            fd = float((alpha(x + h) - alpha(x - h)) / (2 * h))
            assert fd == pytest.approx(alpha_derivative(x, s), rel=1e-5)

    def test_gamma_derivative_vs_finite_differences(self):
        for s, x, h in _interior_points(1000, 22):
            def gamma(y):
                return cf_rational(y).gammas[s]
            fd = (gamma(x + h) - gamma(x - h)) / (2 * float(h))
            assert fd == pytest.approx(gamma_derivative(x, s), rel=1e-5)

    def test_low_depths_by_hand(self):
        x = Fraction(3, 10)
        # alpha_1 = 1/x - 3, gamma_0 = log(1/x), gamma_1 = x log(1/alpha_1)
        assert alpha_derivative(x, 0) == 1
        assert alpha_derivative(x, 1) == pytest.approx(-1 / float(x) ** 2)
        assert gamma_derivative(x, 0) == pytest.approx(-1 / float(x))
        a1 = 1 / x - 3
        expected = math.log(1 / a1) + float(x) * (1 / float(x) ** 2) / float(a1)
        assert gamma_derivative(x, 1) == pytest.approx(expected)


class TestGaussMeasure:
    def test_examples(self):
        assert gauss_measure(0, 1) == pytest.approx(1)
        assert gauss_measure(0, 0.5) == pytest.approx(math.log(1.5) / math.log(2))
        assert gauss_measure(0.3, 0.3) == 0

    def test_reversed_rejected(self):
        with pytest.raises(ValueError):
            gauss_measure(0.6, 0.2)

    @given(st.floats(0, 1), st.floats(0, 1))
    def test_preimage_invariance(self, a, b):
        a, b = min(a, b), max(a, b)
        assert gauss_preimage_measure(a, b) == pytest.approx(gauss_measure(a, b), abs=1e-10)
