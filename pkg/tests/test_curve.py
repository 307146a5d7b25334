import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from _support import CURVES, model, random_point
from cubic_chabauty.curve import (
    CurveModel,
    UnsupportedCurveError,
    complete_square,
    generic_disk_expansion,
    group_law,
    multiply,
    torsion_order,
    weierstrass_disk_expansion,
)
from cubic_chabauty.padic import FixedRing, PadicNumber


def source_count(ainvs, p):
    # points on the long Weierstrass model mod p, plus O
    a1, a2, a3, a4, a6 = ainvs
    n = 1
    for x in range(p):
        for y in range(p):
            if (y * y + a1 * x * y + a3 * y - x**3 - a2 * x * x - a4 * x - a6) % p == 0:
                n += 1
    return n


@pytest.mark.parametrize(
    "label, coeffs",
    [
        ("36.a4", (0, 0, 1)),
        ("37.a1", (0, -16, 16)),
        ("389.a1", (0, -3024, 46224)),
        ("433.a1", (1, 0, 64)),
    ],
)
def test_models(label, coeffs):
    E = model(label)
    assert (E.c2, E.c1, E.c0) == coeffs
    assert E.alpha**3 == E.gamma**2


@pytest.mark.parametrize("label", sorted(CURVES))
def test_point_counts_agree_with_source_model(label):
    ainvs, p, _ = CURVES[label]
    E = model(label)
    assert E.count_points_mod_p() == source_count(ainvs, p)
    assert E.a_p() ** 2 <= 4 * p


def test_bad_reduction_and_even_prime_rejected():
    with pytest.raises(UnsupportedCurveError):
        complete_square([0, 0, 1, -1, 0], 37, "b")
    with pytest.raises(UnsupportedCurveError):
        CurveModel(0, -16, 16, 2)
    with pytest.raises(UnsupportedCurveError):
        complete_square([0, 1, 1, -2, 0], 5, "plain")


def test_source_transport_round_trip():
    E = model("389.a1")
    for xy in [(-1, 1), (0, 0), (1, -1), (4, 8), (6, 15), (39, -247)]:
        P = E.from_source(*xy)
        assert E.to_source(P) == tuple(map(Fraction, xy))
        assert E.is_integral(P)
    with pytest.raises(ValueError):
        E.from_source(1, 1)


def test_torsion_on_36a4():
    E = model("36.a4")
    P = E.point(2, 3)
    assert torsion_order(P) == 6
    assert torsion_order(E.point(-1, 0)) == 2
    assert torsion_order(E.point(0, 1)) == 3
    assert 3 * P == E.point(-1, 0)


def test_non_torsion_on_37a1():
    E = model("37.a1")
    P = E.from_source(0, 0)
    assert torsion_order(P) is None
    assert (P + (-P)).is_infinity
    assert (P - P).is_infinity


RATIONAL_389 = [(-1, 1), (0, 0), (1, -1), (4, 8), (6, 15), (-2, 0), (3, 5)]


@given(st.lists(st.sampled_from(RATIONAL_389), min_size=3, max_size=3), st.integers(-3, 3))
def test_group_law_is_associative(xys, n):
    E = model("389.a1")
    P, Q, S = (E.from_source(*xy) for xy in xys)
    Q = multiply(n, Q)
    lhs, rhs = (P + Q) + S, P + (Q + S)
    assert lhs == rhs
    if not lhs.is_infinity:
        assert E.is_on_curve(lhs.x, lhs.y)


def test_multiply_matches_repeated_addition():
    E = model("389.a1")
    P = E.from_source(0, 0)
    acc = E.infinity()
    for n in range(6):
        assert multiply(n, P) == acc
        assert multiply(-n, P) == -acc
        acc = group_law(acc, P)


def test_padic_group_law_matches_exact():
    E = model("37.a1")
    P, Q = E.from_source(0, 0), E.from_source(1, 0)
    exact = (P + Q).to_padic(12)
    approx = P.to_padic(12) + Q.to_padic(12)
    assert approx.x.equals(exact.x, 10) and approx.y.equals(exact.y, 10)


@pytest.mark.parametrize("label", sorted(CURVES))
def test_infinity_expansion(label):
    E = model(label)
    R = FixedRing(E.prime, 10)
    X = E.expansion_at_infinity(R, 10)
    assert X.x.low == -2 and R.to_padic(X.x.coefficient_int(-2)).equals(PadicNumber.from_rational(1, E.prime, 10))
    assert X.y.low == -3
    # y^2 - f(x), as a Laurent series, vanishes to the available order
    f = ((X.x + _const(R, E.c2, 10)) * X.x + _const(R, E.c1, 10)) * X.x + _const(R, E.c0, 10)
    diff = (X.y * X.y - f).truncate(10 - 5)
    assert all(diff.coefficient_int(k) % R.p ** (R.prec - 2 + R.shift) == 0 for k in range(diff.low, diff.order))


def _const(R, c, order):
    from cubic_chabauty.series import LaurentLogSeries

    return LaurentLogSeries.monomial(R, 0, order, R.from_int(c))


@pytest.mark.parametrize("label", sorted(CURVES))
def test_generic_disk_expansion_on_the_curve(label):
    E = model(label)
    R = FixedRing(E.prime, 10)
    rng = random.Random(1)
    P = random_point(E, 10, rng)
    D = generic_disk_expansion(E, R, R.from_padic(P.x), R.from_padic(P.y), 8)
    # the branch follows y0, even when y0 carries fewer digits
    assert R.to_padic(D.y.coefficient_int(0)).equals(P.y, 10)
    D_low = generic_disk_expansion(E, R, R.from_padic(P.x), R.from_padic(P.y.add_bigoh(3)), 8)
    assert D_low.y.coefficient_int(0) == D.y.coefficient_int(0)


def test_weierstrass_disk_expansion():
    E = model("36.a4")
    R = FixedRing(7, 10)
    D = weierstrass_disk_expansion(E, R, R.from_int(-1), 8)
    # f(x(s)) = s^2
    f = ((D.x + _const(R, E.c2, 8)) * D.x + _const(R, E.c1, 8)) * D.x + _const(R, E.c0, 8)
    assert f.coefficient_int(2) % R.mod == R.one
    assert all(f.coefficient_int(k) % R.mod == 0 for k in (0, 1, 3, 4, 5, 6, 7))


def test_residues_and_disk_classes():
    E = model("36.a4")
    assert E.point(-1, 0).disk_class() == "weierstrass"
    assert E.point(2, 3).disk_class() == "generic"
    assert E.infinity().disk_class() == "infinity"
    P = E.point(PadicNumber.from_rational(Fraction(1, 49), 7, 6), PadicNumber.from_rational(Fraction(1, 343), 7, 6))
    assert P.residue() is None and P.disk_class() == "infinity"
    assert len(E.disks()) == E.count_points_mod_p() - 1
