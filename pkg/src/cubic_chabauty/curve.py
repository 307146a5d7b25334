"""Elliptic curves y^2 = f(x) with f a monic integral cubic.

Covers the change of variables from a general Weierstrass equation, exact
and p-adic group law, residue disks, and local expansions (at infinity in
t = -x/y, in generic disks in s = x - x0, in Weierstrass disks in s = y).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Union

from .padic import FixedRing, PadicError, PadicNumber, hensel_sqrt, iwasawa_log, teichmuller_int
from .series import LaurentLogSeries, sqrt_series

Scalar = Union[Fraction, PadicNumber]


class UnsupportedCurveError(ValueError):
    """Bad reduction at p, p = 2, or a model the code does not handle."""


def _poly_compose_linear(g: list[Fraction], a: Fraction, b: Fraction) -> list[Fraction]:
    """Coefficients of g(a*X + b) for g given low-degree first."""
    out = [Fraction(0)] * len(g)
    power = [Fraction(1)]
    for c in g:
        for i, q in enumerate(power):
            out[i] += c * q
        nxt = [Fraction(0)] * (len(power) + 1)
        for i, q in enumerate(power):
            nxt[i] += q * b
            nxt[i + 1] += q * a
        power = nxt
    return out


def cubic_discriminant(c2, c1, c0):
    """Discriminant of x^3 + c2 x^2 + c1 x + c0."""
    return c2 * c2 * c1 * c1 - 4 * c1**3 - 4 * c2**3 * c0 - 27 * c0 * c0 + 18 * c2 * c1 * c0


@dataclass(frozen=True)
class CurveModel:
    """y^2 = x^3 + c2 x^2 + c1 x + c0 over Z, with the map from a source model.

    Source points (x, y) map to (alpha*x + beta, gamma*(y + (a1 x + a3)/2)).
    """

    c2: int
    c1: int
    c0: int
    prime: int
    ainvs: tuple = (0, 0, 0, 0, 0)
    alpha: Fraction = Fraction(1)
    beta: Fraction = Fraction(0)
    gamma: Fraction = Fraction(1)
    integral_model: str = "source"
    label: str = ""

    def __post_init__(self):
        p = self.prime
        if p < 3 or p % 2 == 0:
            raise UnsupportedCurveError("p must be an odd prime")
        if self.discriminant_cubic % p == 0:
            raise UnsupportedCurveError(f"bad reduction at {p}")

    # -- basic data -----------------------------------------------------
    @property
    def f_coeffs(self) -> tuple[int, int, int, int]:
        """Coefficients of f from degree 0 up."""
        return (self.c0, self.c1, self.c2, 1)

    def f(self, x):
        return ((x + self.c2) * x + self.c1) * x + self.c0

    def fprime(self, x):
        return (3 * x + 2 * self.c2) * x + self.c1

    @property
    def discriminant_cubic(self) -> int:
        return cubic_discriminant(self.c2, self.c1, self.c0)

    @property
    def discriminant_weierstrass(self) -> int:
        return 16 * self.discriminant_cubic

    def log_delta(self, prec: int, normalization: str = "cubic") -> PadicNumber:
        """Iwasawa log of the discriminant (sign is irrelevant: log(-1) = 0)."""
        if normalization == "cubic":
            d = self.discriminant_cubic
        elif normalization == "weierstrass":
            d = self.discriminant_weierstrass
        else:
            raise ValueError(f"unknown discriminant normalization {normalization!r}")
        return iwasawa_log(d, self.prime, prec)

    # -- points -----------------------------------------------------------
    def is_on_curve(self, x, y) -> bool:
        return y * y == self.f(x)

    def from_source(self, x, y) -> "CurvePoint":
        """Transport an exact source-model point to y^2 = f(x)."""
        a1, _, a3, _, _ = self.ainvs
        x, y = Fraction(x), Fraction(y)
        X = self.alpha * x + self.beta
        Y = self.gamma * (y + (a1 * x + a3) / 2)
        if Y * Y != self.f(X):
            raise ValueError(f"({x}, {y}) is not on the source model")
        return CurvePoint(self, X, Y)

    def to_source(self, P: "CurvePoint"):
        a1, _, a3, _, _ = self.ainvs
        x = (P.x - self.beta) / self.alpha
        y = P.y / self.gamma - (a1 * x + a3) / 2
        return x, y

    def point(self, x, y) -> "CurvePoint":
        """A point given directly on the y^2 = f(x) model."""
        if isinstance(x, PadicNumber) or isinstance(y, PadicNumber):
            return CurvePoint(self, x, y)
        P = CurvePoint(self, Fraction(x), Fraction(y))
        if not self.is_on_curve(P.x, P.y):
            raise ValueError(f"({x}, {y}) is not on y^2 = f(x)")
        return P

    def infinity(self) -> "CurvePoint":
        return CurvePoint(self, None, None)

    def is_integral(self, P: "CurvePoint") -> bool:
        """Integrality on the designated integral-points model."""
        if P.is_infinity:
            return False
        if self.integral_model == "short":
            return P.x.denominator == 1 and P.y.denominator == 1
        x, y = self.to_source(P)
        return x.denominator == 1 and y.denominator == 1

    # -- reduction and disks ---------------------------------------------
    def points_mod_p(self) -> list[tuple[int, int]]:
        p = self.prime
        out = []
        for x in range(p):
            fx = self.f(x) % p
            for y in range(p):
                if (y * y - fx) % p == 0:
                    out.append((x, y))
        return out

    def count_points_mod_p(self) -> int:
        return len(self.points_mod_p()) + 1

    def a_p(self) -> int:
        return self.prime + 1 - self.count_points_mod_p()

    def disks(self) -> list[tuple[int, int]]:
        """Residue disks of finite points, sorted by representative."""
        return sorted(self.points_mod_p())

    def weierstrass_root(self, xbar: int, prec: int) -> PadicNumber:
        """The root of f congruent to xbar (a simple root mod p), to ``prec``."""
        p = self.prime
        if self.f(xbar) % p:
            raise PadicError("not a root of f mod p")
        x = xbar
        for k in range(1, prec + 2):
            m = p ** (k + 1)
            x = (x - self.f(x) * pow(self.fprime(x), -1, m)) % m
        return PadicNumber(p, 0, x, prec) if x % p else PadicNumber.from_rational(x, p, prec)

    # -- expansions -------------------------------------------------------
    def expansion_at_infinity(self, ring: FixedRing, order: int) -> "InfinityExpansion":
        return InfinityExpansion.build(self, ring, order)


@dataclass
class CurvePoint:
    """A point on y^2 = f(x); coordinates are exact Fractions or PadicNumbers."""

    model: CurveModel
    x: Scalar | None
    y: Scalar | None

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    @property
    def is_exact(self) -> bool:
        return self.is_infinity or (isinstance(self.x, Fraction) and isinstance(self.y, Fraction))

    def __eq__(self, other):
        if not isinstance(other, CurvePoint):
            return NotImplemented
        if self.is_infinity or other.is_infinity:
            return self.is_infinity and other.is_infinity
        return self.x == other.x and self.y == other.y

    def __hash__(self):
        if self.is_infinity:
            return hash("inf")
        if self.is_exact:
            return hash((self.x, self.y))
        return hash((str(self.x), str(self.y)))

    def __neg__(self):
        return negate(self)

    def __add__(self, other):
        return group_law(self, other)

    def __sub__(self, other):
        return group_law(self, negate(other))

    def __rmul__(self, n: int):
        return multiply(n, self)

    def __repr__(self):
        if self.is_infinity:
            return "O"
        return f"({self.x}, {self.y})"

    def residue(self) -> tuple[int, int] | None:
        """Reduction mod p, or None for points reducing to infinity."""
        p = self.model.prime
        if self.is_infinity:
            return None
        if _val(self.x, p) < 0:
            return None
        return (_residue(self.x, p), _residue(self.y, p))

    def disk_class(self) -> str:
        r = self.residue()
        if r is None:
            return "infinity"
        return "weierstrass" if r[1] == 0 else "generic"

    def to_padic(self, prec: int) -> "CurvePoint":
        if self.is_infinity or not self.is_exact:
            return self
        p = self.model.prime
        return CurvePoint(self.model, PadicNumber.from_rational(self.x, p, prec), PadicNumber.from_rational(self.y, p, prec))

    def t_parameter(self, prec: int) -> PadicNumber:
        """t = -x/y for points in the disk at infinity."""
        P = self.to_padic(prec)
        return -(P.x / P.y)


def _val(x, p: int) -> int:
    if isinstance(x, PadicNumber):
        return x.valuation if x.valuation is not None else x.abs_precision
    x = Fraction(x)
    if x == 0:
        return 10**9
    v = 0
    n, d = x.numerator, x.denominator
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return v


def _residue(x, p: int) -> int:
    if isinstance(x, PadicNumber):
        return x.residue()
    x = Fraction(x)
    return x.numerator * pow(x.denominator, -1, p) % p


# ---------------------------------------------------------------------------
# Group law


def negate(P: CurvePoint) -> CurvePoint:
    if P.is_infinity:
        return P
    return CurvePoint(P.model, P.x, -P.y)


def _is_zero(v) -> bool:
    if isinstance(v, PadicNumber):
        return v.is_zero()
    return v == 0


def group_law(P: CurvePoint, Q: CurvePoint) -> CurvePoint:
    """Chord-tangent addition on y^2 = f(x); exact for rational inputs."""
    if P.is_infinity:
        return Q
    if Q.is_infinity:
        return P
    E = P.model
    if _is_zero(P.x - Q.x):
        if _is_zero(P.y + Q.y):
            return E.infinity()
        lam = E.fprime(P.x) / (2 * P.y)
    else:
        lam = (Q.y - P.y) / (Q.x - P.x)
    x3 = lam * lam - E.c2 - P.x - Q.x
    y3 = -(P.y + lam * (x3 - P.x))
    return CurvePoint(E, x3, y3)


def multiply(n: int, P: CurvePoint) -> CurvePoint:
    if n < 0:
        return multiply(-n, negate(P))
    result = P.model.infinity()
    base = P
    while n:
        if n & 1:
            result = group_law(result, base)
        n >>= 1
        if n:
            base = group_law(base, base)
    return result


def torsion_order(P: CurvePoint, bound: int = 16) -> int | None:
    """Order of an exact torsion point (None if not torsion within ``bound``)."""
    Q = P
    for n in range(1, bound + 1):
        if Q.is_infinity:
            return n
        Q = group_law(Q, P)
    return None


# ---------------------------------------------------------------------------
# Model construction


def complete_square(ainvs, prime: int, model: str = "auto", label: str = "", integral_model: str = "source") -> CurveModel:
    """Integral model y^2 = f(x), f monic, from Weierstrass coefficients.

    ``model`` selects the scaling: ``"plain"`` keeps x and y when a1 = a3 = 0;
    ``"b"`` uses (x, y) -> (4x, 8y + 4(a1 x + a3)) giving
    f = x^3 + b2 x^2 + 8 b4 x + 16 b6; ``"c"`` is the x^2-free model
    x^3 - 27 c4 x - 54 c6.  ``"auto"`` keeps the plain model when possible,
    otherwise removes the x^2 term if p >= 5 and falls back to ``"b"``.
    """
    a1, a2, a3, a4, a6 = (int(a) for a in ainvs)
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    if model == "auto":
        if a1 == 0 and a3 == 0 and (a2 == 0 or prime == 3):
            model = "plain"
        elif b2 != 0 and prime >= 5:
            model = "c"
        else:
            model = "b"
    g = [Fraction(b6, 4), Fraction(b4, 2), Fraction(b2, 4), Fraction(1)]
    if model == "plain":
        if a1 or a3:
            raise UnsupportedCurveError("plain model needs a1 = a3 = 0")
        alpha, beta, gamma = Fraction(1), Fraction(0), Fraction(1)
    elif model == "b":
        alpha, beta, gamma = Fraction(4), Fraction(0), Fraction(8)
    elif model == "c":
        alpha, beta, gamma = Fraction(36), Fraction(3 * b2), Fraction(216)
    else:
        raise ValueError(f"unknown model choice {model!r}")
    # f(X) = gamma^2 g((X - beta)/alpha), valid since gamma^2 = alpha^3
    coeffs = _poly_compose_linear(g, 1 / alpha, -beta / alpha)
    coeffs = [gamma * gamma * c for c in coeffs]
    if coeffs[3] != 1 or any(c.denominator != 1 for c in coeffs):
        raise UnsupportedCurveError(f"model {model!r} is not integral and monic: {coeffs}")
    c0, c1, c2 = (int(c) for c in coeffs[:3])
    return CurveModel(c2, c1, c0, prime, tuple(int(a) for a in ainvs), alpha, beta, gamma, integral_model, label)


# ---------------------------------------------------------------------------
# Local expansions


@dataclass
class InfinityExpansion:
    """x(t), y(t) and the basis forms at O, in t = -x/y."""

    ring: FixedRing
    order: int
    w: LaurentLogSeries
    x: LaurentLogSeries
    y: LaurentLogSeries
    omega0: LaurentLogSeries
    omega1: LaurentLogSeries

    @classmethod
    def build(cls, E: CurveModel, ring: FixedRing, order: int) -> "InfinityExpansion":
        n = order + 8
        w = w_series_int(E, n)
        ws = LaurentLogSeries.from_coeffs(ring, [ring.from_int(c) for c in w], 0, n)
        winv = ws.inverse()  # t^-3 (...)
        t = LaurentLogSeries.monomial(ring, 1, n + 4)
        x = (t * winv).truncate(order)
        y = (-winv).truncate(order)
        omega0 = (x.derivative() * (y.scale(ring.from_int(2))).inverse()).truncate(order)
        omega1 = (x * omega0).truncate(order)
        return cls(ring, order, ws.truncate(order), x, y, omega0, omega1)


def w_series_int(E: CurveModel, n: int) -> list[int]:
    """Integer coefficients of w = -1/y in t = -x/y, modulo t^n.

    w solves w = t^3 + c2 t^2 w + c1 t w^2 + c0 w^3; each pass of the
    fixed-point iteration fixes at least one more coefficient.
    """
    w = [0] * n
    for _ in range(n + 1):
        new = [0] * n
        if 3 < n:
            new[3] += 1
        w2 = _int_mul(w, w, n)
        w3 = _int_mul(w2, w, n)
        for i in range(n):
            if i + 2 < n:
                new[i + 2] += E.c2 * w[i]
            if i + 1 < n:
                new[i + 1] += E.c1 * w2[i]
            new[i] += E.c0 * w3[i]
        if new == w:
            break
        w = new
    return w


def _int_mul(a: list[int], b: list[int], n: int) -> list[int]:
    out = [0] * n
    for i, x in enumerate(a):
        if x:
            for j in range(n - i):
                if b[j]:
                    out[i + j] += x * b[j]
    return out


@dataclass
class DiskExpansion:
    """Local parametrisation of a finite residue disk.

    Generic disks use s = x - x0 around a base point (x0, y0); Weierstrass
    disks use s = y around (e, 0).  The differentials are returned as
    coefficient series of ds.
    """

    kind: str
    ring: FixedRing
    order: int
    x: LaurentLogSeries
    y: LaurentLogSeries
    omega0: LaurentLogSeries
    omega1: LaurentLogSeries


def generic_disk_expansion(E: CurveModel, ring: FixedRing, x0: int, y0: int, order: int) -> DiskExpansion:
    """Expansion around (x0, y0) with y0 a unit; x0, y0 ring-encoded."""
    R = ring
    xs = LaurentLogSeries.from_coeffs(R, [x0, R.one] + [0] * (order - 2), 0, order)
    fx = E_f_series(E, xs)
    ys = sqrt_series(fx, R.to_padic(y0).residue())
    # y0 may carry fewer digits than the ring; only the branch matters
    if R.valuation((ys.coefficient_int(0) - y0) % R.mod) == 0:
        ys = -ys
    inv2y = ys.scale(R.from_int(2)).inverse()
    return DiskExpansion("generic", R, order, xs, ys, inv2y, (xs * inv2y).truncate(order))


def E_f_series(E: CurveModel, xs: LaurentLogSeries) -> LaurentLogSeries:
    R = xs.ring
    c = lambda n: LaurentLogSeries.monomial(R, 0, xs.order, R.from_int(n))
    return ((xs + c(E.c2)) * xs + c(E.c1)) * xs + c(E.c0)


def weierstrass_disk_expansion(E: CurveModel, ring: FixedRing, e: int, order: int) -> DiskExpansion:
    """Expansion around (e, 0) with f(e) = 0, parameter s = y."""
    R = ring
    # Newton iteration for x(s) with f(x(s)) = s^2
    s2 = LaurentLogSeries.monomial(R, 2, order)
    xs = LaurentLogSeries.from_coeffs(R, [e] + [0] * (order - 1), 0, order)
    for _ in range(order.bit_length() + 2):
        fx = E_f_series(E, xs) - s2
        fpx = _fprime_series(E, xs)
        xs = (xs - fx * fpx.inverse()).truncate(order)
    ys = LaurentLogSeries.monomial(R, 1, order)
    fpx = _fprime_series(E, xs)
    omega0 = fpx.inverse().truncate(order)  # dx/2y = ds / f'(x)
    return DiskExpansion("weierstrass", R, order, xs, ys, omega0, (xs * omega0).truncate(order))


def _fprime_series(E: CurveModel, xs: LaurentLogSeries) -> LaurentLogSeries:
    R = xs.ring
    c = lambda n: LaurentLogSeries.monomial(R, 0, xs.order, R.from_int(n))
    return (xs.scale(R.from_int(3)) + c(2 * E.c2)) * xs + c(E.c1)


def teichmuller_point(E: CurveModel, xbar: int, ybar: int, prec: int) -> CurvePoint:
    """The point of the disk (xbar, ybar) fixed by the standard Frobenius lift."""
    p = E.prime
    if ybar % p == 0:
        raise PadicError("Weierstrass disk has no Frobenius-fixed point for this lift")
    x = teichmuller_int(xbar, p, prec)
    X = PadicNumber.from_rational(x, p, prec)
    Y = hensel_sqrt(PadicNumber.from_rational(E.f(x), p, prec), ybar, prec)
    return CurvePoint(E, X, Y)
