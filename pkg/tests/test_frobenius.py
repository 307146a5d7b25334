import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from _support import CURVES, model, random_point
from cubic_chabauty.coleman import default_guard
from cubic_chabauty.curve import teichmuller_point
from cubic_chabauty.frobenius import frobenius_fixed_point, kedlaya
from cubic_chabauty.padic import FixedRing, PadicError, PadicNumber


@pytest.mark.parametrize("label", sorted(CURVES))
def test_charpoly_is_the_weil_polynomial(label):
    E = model(label)
    p = E.prime
    # the reduction divides by multiples of p; the engine's guard digits cover it
    frob = kedlaya(E, FixedRing(p, 8 + default_guard(p, 8)))
    tr, det = frob.charpoly()
    assert tr.equals(PadicNumber.from_rational(E.a_p(), p, 8), 8)
    assert det.equals(PadicNumber.from_rational(p, p, 8), 8)


def test_charpoly_stable_in_precision():
    E = model("37.a1")
    g = default_guard(7, 6)
    lo = kedlaya(E, FixedRing(7, 6 + g)).M
    hi = kedlaya(E, FixedRing(7, 10 + g)).M
    for a in range(2):
        for b in range(2):
            assert hi[a][b].equals(lo[a][b], 6)


@pytest.mark.parametrize("label", ["37.a1", "389.a1"])
def test_teichmuller_points_are_fixed(label):
    E = model(label)
    p = E.prime
    for xb, yb in E.disks():
        if yb == 0:
            with pytest.raises(PadicError):
                teichmuller_point(E, xb, yb, 8)
            continue
        P = teichmuller_point(E, xb, yb, 8)
        assert (P.x**p).equals(P.x)
        assert (P.y * P.y).equals(PadicNumber.from_rational(E.f(P.x.lift()), p, 8))
        assert P.residue() == (xb, yb)


@given(st.integers(0, 10**6))
def test_frobenius_fixed_point_depends_only_on_the_disk(seed):
    E = model("37.a1")
    rng = random.Random(seed)
    P = random_point(E, 8, rng)
    F = frobenius_fixed_point(P, 8)
    assert F.residue() == P.residue()
    G = frobenius_fixed_point(random_point(E, 8, rng, P.residue()), 8)
    assert F.x.equals(G.x) and F.y.equals(G.y)

