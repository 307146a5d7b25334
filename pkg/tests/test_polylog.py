import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _support import engine, model, padic_close, random_point
from cubic_chabauty.padic import PadicError, PadicNumber, iwasawa_log
from cubic_chabauty.polylog import FUNCTIONS, ODD_FUNCTIONS, PolylogEvaluator, b3_class, tangent_scale

PREC = 8
LABEL = "37.a1"


def ev(**kw):
    return PolylogEvaluator(model(LABEL), PREC, engine=engine(LABEL, PREC), **kw)


points = st.integers(0, 10**9).map(lambda s: random.Random(s))


def test_b3_class():
    assert b3_class(0, 1) == 0
    assert b3_class(1, 2) == 0
    assert b3_class(1, 3) == Fraction(1, 27)
    assert b3_class(2, 3) == Fraction(-1, 27)
    with pytest.raises(ValueError):
        b3_class(3, 3)


@given(st.integers(2, 40).flatmap(lambda N: st.tuples(st.just(N), st.integers(1, N - 1))))
def test_b3_is_odd_about_one_half(Nm):
    N, m = Nm
    assert b3_class(m, N) == -b3_class(N - m, N)


def test_tangent_scale():
    assert tangent_scale(model("37.a1")) == Fraction(1, 2)
    assert tangent_scale(model("36.a4")) == 1
    assert tangent_scale(model("389.a1")) == Fraction(1, 6)


@settings(max_examples=10)
@given(points)
def test_parity(rng):
    E = ev()
    z = random_point(E.model, PREC, rng)
    a, b = E.values(z), E.values(-z)
    for name in FUNCTIONS:
        sign = -1 if name in ODD_FUNCTIONS else 1
        assert padic_close(b[name], a[name] * sign, PREC - 1), name


@settings(max_examples=6)
@given(points, points)
def test_anchored_value_matches_direct(rng, rng2):
    E = ev()
    z = random_point(E.model, PREC, rng)
    anchor = random_point(E.model, PREC, rng2)
    for name in ("f2", "f3", "f4"):
        assert padic_close(E.anchored_value(name, z, anchor), E.eval_polylog(name, z), PREC - 1)


def test_tangent_choice_shifts_f2_by_a_constant():
    src, mod = ev(), ev(tangent="model")
    rng = random.Random(4)
    zs = [random_point(src.model, PREC, rng) for _ in range(3)]
    diffs = [src.eval_polylog("f2", z) - mod.eval_polylog("f2", z) for z in zs]
    assert padic_close(diffs[0], diffs[1], PREC - 1) and padic_close(diffs[1], diffs[2], PREC - 1)
    for z in zs:
        assert padic_close(src.eval_polylog("f1", z), mod.eval_polylog("f1", z), PREC)


def test_discriminant_choice_only_moves_f3_along_f1():
    cub, wei = ev(), ev(delta="weierstrass")
    z = random_point(cub.model, PREC, random.Random(8))
    shift = iwasawa_log(16, 7, PREC) / 12
    expect = cub.eval_polylog("f3", z) - shift * cub.eval_polylog("f1", z)
    assert padic_close(wei.eval_polylog("f3", z), expect, PREC - 1)
    with pytest.raises(ValueError):
        ev(tangent="sideways")


def test_unknown_function():
    with pytest.raises(PadicError):
        ev().eval_polylog("f9", model(LABEL).from_source(0, 0))


def test_f4_definition():
    c = ev(tangent="model").coefficients("f4")
    assert c[(0, 1, 1)].equals(PadicNumber.from_rational(1, 7, PREC))
    assert c[(1,)].equals(PadicNumber.from_rational(Fraction(-1, 2), 7, PREC))


def test_disk_series_match_point_values():
    E = ev()
    R = E.ring
    z = random_point(E.model, PREC, random.Random(21))
    ds = E.disk_series(z.residue(), ["f2", "f4"])
    s = (R.from_padic(z.x) - ds.base_x) % R.mod
    for name in ("f2", "f4"):
        got = R.to_padic(ds.series[name].evaluate(s), PREC)
        assert padic_close(got, E.eval_polylog(name, z), PREC - 1)


def test_formal_expansion_of_f1_is_odd_in_t():
    F = ev().formal_expansion("f1", 9)
    for k in range(0, 9, 2):
        assert F.coefficient_int(k) % ev().ring.mod == 0
