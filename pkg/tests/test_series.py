import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cubic_chabauty.padic import FixedRing, PadicNumber, PrecisionError
from cubic_chabauty.series import (
    CapacityError,
    LaurentLogSeries,
    PadicPoly,
    binomial_series,
    determinant,
    iterated_formal_integral,
    log_one_plus,
    padic_determinant,
    padic_rank,
    resultant,
    sqrt_series,
    sylvester_matrix,
)

R = FixedRing(7, 14)
ORDER = 12


def series(coeffs, low=0, order=ORDER):
    return LaurentLogSeries.from_rationals(R, coeffs, low, order)


def coeff(F, k, j=0):
    return R.to_padic(F.coefficient_int(k, j))


def same(F, G, upto=None, digits=None):
    upto = min(F.order, G.order) if upto is None else upto
    m = R.p ** ((R.prec if digits is None else digits) + R.shift)
    lo = min(F.low, G.low)
    J = max(len(F.logs), len(G.logs))
    return all(
        (F.coefficient_int(k, j) - G.coefficient_int(k, j)) % m == 0 for k in range(lo, upto) for j in range(J)
    )


small = st.fractions(min_value=-50, max_value=50, max_denominator=6)


def test_dt_over_t_integrates_to_log():
    F = LaurentLogSeries.monomial(R, -1, ORDER).formal_integrate()
    assert F.log_degree == 1
    assert coeff(F, 0, 1).equals(PadicNumber.from_rational(1, 7, 14))


def test_pole_of_order_two():
    F = LaurentLogSeries.monomial(R, -2, ORDER).formal_integrate()
    assert coeff(F, -1).equals(PadicNumber.from_rational(-1, 7, 14))
    assert not F.has_logs()


def test_log_capacity():
    F = LaurentLogSeries.monomial(R, -1, ORDER, log_power=3)
    with pytest.raises(CapacityError):
        F.formal_integrate()


@given(st.lists(small, min_size=4, max_size=8), st.integers(-3, 2), st.integers(0, 2))
def test_integrate_inverts_derivative(cs, low, logs):
    F = LaurentLogSeries(R, low, low + len(cs), [[R.from_rational(c) for c in cs]])
    if logs:
        F = F * LaurentLogSeries.monomial(R, 0, F.order, log_power=logs)
    G = F.derivative().formal_integrate()
    # identity up to the constant term; dividing by exponents divisible by 7 costs digits
    c0 = LaurentLogSeries.monomial(R, 0, F.order, F.coefficient_int(0) if F.low <= 0 < F.order else 0)
    assert same(G, F - c0, F.order - 1, digits=R.prec - 3)


@given(st.lists(small, min_size=3, max_size=6), st.lists(small, min_size=3, max_size=6))
def test_product_rule(a, b):
    A, B = series(a), series(b)
    lhs = (A * B).derivative()
    rhs = A.derivative() * B + A * B.derivative()
    assert same(lhs, rhs, min(len(a), len(b)) - 1)


def test_inverse_and_sqrt():
    F = series([2, 1, 3, 0, 5, 1])
    one = (F * F.inverse()).truncate(6)
    assert same(one, series([1, 0, 0, 0, 0, 0], order=6))
    G = series([4, 1, 3, 0, 5, 1, 0, 0])
    S = sqrt_series(G, 2)
    assert same((S * S).truncate(8), G)
    assert coeff(S, 0).equals(PadicNumber.from_rational(2, 7, 14))


def test_log_and_binomial_series():
    z = series([0, 1, 0, 0, 0, 0, 0, 0])
    L = log_one_plus(z)
    for k in range(1, 8):
        assert coeff(L, k).equals(PadicNumber.from_rational(Fraction((-1) ** (k + 1), k), 7, 14))
    B = binomial_series(z, Fraction(1, 2))
    assert same((B * B).truncate(8), series([1, 1, 0, 0, 0, 0, 0, 0]))


def test_compose_matches_substitution():
    F = series([1, 2, 3, 4])
    inner = series([0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0])
    G = F.compose(inner)
    # 1 + 2u + 3u^2 + 4u^3 with u = t + t^2
    u = series([0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0])
    direct = series([1] + [0] * 11) + u.scale(R.from_int(2)) + (u * u).scale(R.from_int(3)) + (u * u * u).scale(R.from_int(4))
    assert same(G, direct, 4, digits=R.prec - 2)


def test_evaluate_needs_log_value():
    F = LaurentLogSeries.log_t(R, 4)
    with pytest.raises(CapacityError):
        F.evaluate(R.from_int(7))
    assert F.evaluate(R.from_int(7), R.from_int(3)) == R.from_int(3)


def test_iterated_integral_of_one_form_is_a_power():
    w = series([1, 0, 2, 0, 3, 0, 1, 0, 0, 0, 0, 0])
    I1 = iterated_formal_integral([w])
    I3 = iterated_formal_integral([w, w, w])
    cube = (I1 * I1 * I1).scale(R.from_rational(Fraction(1, 6)))
    assert same(I3, cube, 10, digits=R.prec - 2)


FORMS = {
    "a": [1, 0, 0, 2, 0, 0, 1, 0, 0, 0, 0, 0],  # like omega0
    "t": [0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],  # t dt
}


@given(st.lists(st.sampled_from(sorted(FORMS)), min_size=3, max_size=3))
def test_shuffle_for_pole_free_forms(names):
    e1, e2, e3 = (series(FORMS[n]) for n in names)
    lhs = iterated_formal_integral([e1]) * iterated_formal_integral([e2, e3])
    rhs = (
        iterated_formal_integral([e1, e2, e3])
        + iterated_formal_integral([e2, e1, e3])
        + iterated_formal_integral([e2, e3, e1])
    )
    assert same(lhs.truncate(10), rhs.truncate(10), digits=R.prec - 2)


def test_shuffle_with_a_double_pole_differs_by_a_constant():
    # the zero-constant-term primitive is not multiplicative once a pole enters
    w0 = series(FORMS["a"])
    w1 = LaurentLogSeries.from_rationals(R, [-1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0], -2, 12)
    d = iterated_formal_integral([w0]) * iterated_formal_integral([w1])
    d = d - iterated_formal_integral([w0, w1]) - iterated_formal_integral([w1, w0])
    d = d.truncate(9)
    assert not d.has_logs()
    m = R.p ** (R.prec - 2 + R.shift)
    assert all(d.coefficient_int(k) % m == 0 for k in range(d.low, 9) if k != 0)
    # t * t^-1 leaves a unit constant behind
    assert coeff(d, 0).equals(PadicNumber.from_rational(1, 7, 14))


def test_resultant_small_cases():
    F = Fraction
    lin = lambda a: PadicPoly([F(-a), F(1)])
    assert resultant(lin(2), lin(5), F(0), F(1)) == 2 - 5
    assert resultant(PadicPoly([F(-1), F(0), F(1)]), lin(1), F(0), F(1)) == 0


def _poly_from_roots(roots):
    cs = [Fraction(1)]
    for r in roots:
        cs = [Fraction(0)] + cs
        for i in range(len(cs) - 1):
            cs[i] -= r * cs[i + 1]
    return cs


@given(st.lists(st.integers(-20, 20), min_size=3, max_size=3), st.lists(st.integers(-20, 20), min_size=3, max_size=3))
def test_resultant_product_formula_over_q7(a, b):
    f = PadicPoly([PadicNumber.from_rational(c, 7, 20) for c in _poly_from_roots(a)])
    g = PadicPoly([PadicNumber.from_rational(c, 7, 20) for c in _poly_from_roots(b)])
    zero, one = PadicNumber.zero(7, 40), PadicNumber.from_rational(1, 7, 40)
    expect = 1
    for x, y in itertools.product(a, b):
        expect *= x - y
    got = resultant(f, g, zero, one)
    assert got.equals(PadicNumber.from_rational(expect, 7, 40))
    # swapping costs (-1)^(deg f deg g)
    assert resultant(g, f, zero, one).equals(-got)


def test_sylvester_determinant_against_cofactor_oracle():
    rng = random.Random(5)
    f = PadicPoly([Fraction(rng.randint(-9, 9)) for _ in range(4)])
    g = PadicPoly([Fraction(rng.randint(-9, 9)) for _ in range(3)])
    S = sylvester_matrix(f, g, Fraction(0))

    def cofactor(M):
        if len(M) == 1:
            return M[0][0]
        return sum((-1) ** j * M[0][j] * cofactor([r[:j] + r[j + 1:] for r in M[1:]]) for j in range(len(M)))

    assert determinant(S, Fraction(0), Fraction(1)) == cofactor(S)


def test_resultant_of_two_zero_polynomials():
    z = PadicNumber.zero(7, 5)
    with pytest.raises(PrecisionError):
        resultant(PadicPoly([z, z]), PadicPoly([z, z]), z, PadicNumber.from_rational(1, 7, 5))


def test_padic_rank_and_determinant():
    P = lambda q: PadicNumber.from_rational(q, 5, 10)
    M = [[P(1), P(2), P(3)], [P(2), P(4), P(6)], [P(0), P(1), P(5)]]
    assert padic_rank(M) == 2
    assert padic_determinant(M).is_zero()
    M[1][2] = P(6 + 125)
    assert padic_rank(M) == 3
    assert padic_rank(M, 3) == 2
    assert padic_determinant(M).equals(P(-125))
