"""Global p-adic height (Mazur-Tate sigma function) and Mordell-Weil coordinates.

The height is computed on the source (minimal) model:

    h(P) = (1/p) * (log_p sigma(Q) - log_p d(Q)) / m^2,   Q = m P,

where m makes Q land in the formal group at p (and in the identity
component at bad primes, via ``tamagawa``), d(Q)^2 is the denominator of
x(Q), and sigma is the canonical p-adic sigma function

    log sigma(z) = log z + E2 z^2 / 24 - sum_k c_k z^(2k+2) / ((2k+1)(2k+2)),

with wp(z) = z^-2 + sum_k c_k z^(2k) and E2 the p-adic weight-2 Eisenstein
value read off the unit-root eigenline of Frobenius.  log_p is the Iwasawa
branch (log_p p = 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .curve import CurveModel, CurvePoint, UnsupportedCurveError, multiply
from .frobenius import kedlaya
from .padic import FixedRing, PadicError, PadicNumber, iwasawa_log, valuation


# ---------------------------------------------------------------------------
# Source-model invariants


def b_invariants(ainvs) -> tuple[int, int, int, int, int, int]:
    """(b2, b4, b6, b8, c4, c6) of a general Weierstrass equation."""
    a1, a2, a3, a4, a6 = ainvs
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    c4 = b2 * b2 - 24 * b4
    c6 = -(b2**3) + 36 * b2 * b4 - 216 * b6
    return b2, b4, b6, b8, c4, c6


def _smul(a: list[Fraction], b: list[Fraction], n: int) -> list[Fraction]:
    out = [Fraction(0)] * n
    for i, x in enumerate(a[:n]):
        if x:
            for j, y in enumerate(b[: n - i]):
                out[i + j] += x * y
    return out


def _sinv(a: list[Fraction], n: int) -> list[Fraction]:
    if a[0] == 0:
        raise ZeroDivisionError("series inverse needs a unit constant term")
    out = [Fraction(0)] * n
    out[0] = 1 / a[0]
    for k in range(1, n):
        s = sum((a[j] * out[k - j] for j in range(1, min(k, len(a) - 1) + 1)), Fraction(0))
        out[k] = -s / a[0]
    return out


def formal_log_coefficients(ainvs, n: int) -> list[Fraction]:
    """Coefficients l_k (k = 1..n) of the formal logarithm: log(t) = sum l_k t^k.

    Built from w(t) = t^3 W(t) with w = t^3 + a1 t w + a2 t^2 w + a3 w^2 + a4 t w^2 + a6 w^3,
    and omega / dt = (-2 - t W'/W) / (-2 + a1 t + a3 t^3 W).
    """
    a1, a2, a3, a4, a6 = (Fraction(a) for a in ainvs)
    N = n + 1
    W = [Fraction(1)] + [Fraction(0)] * (N - 1)
    for _ in range(N):
        W2 = _smul(W, W, N)
        W3 = _smul(W2, W, N)
        # W = 1 + a1 t W + a2 t^2 W + a3 t^3 W^2 + a4 t^4 W^2 + a6 t^6 W^3
        new = [Fraction(0)] * N
        new[0] = Fraction(1)
        for k in range(N):
            if k + 1 < N:
                new[k + 1] += a1 * W[k]
            if k + 2 < N:
                new[k + 2] += a2 * W[k]
            if k + 3 < N:
                new[k + 3] += a3 * W2[k]
            if k + 4 < N:
                new[k + 4] += a4 * W2[k]
            if k + 6 < N:
                new[k + 6] += a6 * W3[k]
        if new == W:
            break
        W = new
    dW = [k * W[k] for k in range(1, N)] + [Fraction(0)]
    tdW = [Fraction(0)] + dW[: N - 1]  # t W'
    num = _smul(tdW, _sinv(W, N), N)
    num = [-x for x in num]
    num[0] -= 2
    den = [Fraction(0)] * N
    den[0] = Fraction(-2)
    if N > 1:
        den[1] += a1
    for k in range(N - 3):
        den[k + 3] += a3 * W[k]
    omega = _smul(num, _sinv(den, N), N)
    return [omega[k - 1] / k for k in range(1, n + 1)]


def weierstrass_p_coefficients(c4: int, c6: int, n: int) -> list[Fraction]:
    """c_1..c_n with wp(z) = z^-2 + sum c_k z^(2k) for g2 = c4/12, g3 = c6/216."""
    g2, g3 = Fraction(c4, 12), Fraction(c6, 216)
    c = [Fraction(0)] * (n + 1)
    if n >= 1:
        c[1] = g2 / 20
    if n >= 2:
        c[2] = g3 / 28
    for k in range(3, n + 1):
        s = sum((c[m] * c[k - 1 - m] for m in range(1, k - 1)), Fraction(0))
        c[k] = Fraction(3, (2 * k + 3) * (k - 2)) * s
    return c[1:]


def _fval(q: Fraction, p: int) -> int:
    if q == 0:
        return 10**9
    return valuation(q.numerator, p) - valuation(q.denominator, p)


# ---------------------------------------------------------------------------
# The height


class HeightEngine:
    """p-adic height on E(Q) for a curve with good ordinary reduction at p."""

    def __init__(self, model: CurveModel, prec: int, tamagawa: int = 1, guard: int = 6):
        self.model = model
        self.p = model.prime
        self.prec = prec
        self.tamagawa = tamagawa
        self.guard = guard
        ap = model.a_p()
        if ap % self.p == 0:
            raise UnsupportedCurveError(f"supersingular reduction at {self.p} (a_p = {ap})")
        self.ainvs = tuple(int(a) for a in model.ainvs)
        self.b2, _, _, _, self.c4, self.c6 = b_invariants(self.ainvs)
        self._e2: PadicNumber | None = None
        self._cache: dict[tuple, PadicNumber] = {}

    # -- E2 ---------------------------------------------------------------
    def unit_root_ratio(self) -> PadicNumber:
        """r with omega1 + r*omega0 spanning the unit-root eigenline on the working model."""
        N = self.prec + self.guard
        frob = kedlaya(self.model, FixedRing(self.p, N))
        M = frob.M
        v = [PadicNumber.from_rational(0, self.p, N), PadicNumber.from_rational(1, self.p, N)]
        for _ in range(2 * N + 4):
            w = [v[0] * M[0][0] + v[1] * M[1][0], v[0] * M[0][1] + v[1] * M[1][1]]
            if w[1].is_zero() or w[1].valuation != 0:
                raise PadicError("unit-root iteration lost the omega1 component")
            v = [w[0] / w[1], PadicNumber.from_rational(1, self.p, N)]
        return v[0]

    @property
    def e2(self) -> PadicNumber:
        """E2 of the source model: the class of (x + b2/12 - E2/12) dx/(2y + a1 x + a3) is unit-root."""
        if self._e2 is None:
            E = self.model
            r = self.unit_root_ratio()
            shift = (r + E.beta) / E.alpha
            self._e2 = -shift * 12 + self.b2
        return self._e2

    # -- exact arithmetic on the source model -------------------------------
    def source_xy(self, P: CurvePoint) -> tuple[Fraction, Fraction]:
        return self.model.to_source(P)

    def multiplier(self, P: CurvePoint) -> int:
        """Smallest m (times the Tamagawa factor) with mP in the formal group at p."""
        Q = P
        for n in range(1, 2 * (self.p + 1) + 2):
            if Q.is_infinity:
                raise PadicError("torsion point")
            x, _ = self.source_xy(Q)
            if _fval(x, self.p) < 0:
                return n * self.tamagawa
            Q = Q + P
        raise PadicError("no multiple of P reduces to O mod p")

    def formal_log(self, t: PadicNumber) -> PadicNumber:
        """Formal-group logarithm of the minimal model at t = -x/y, v(t) >= 1."""
        N = self.prec + self.guard
        vt = t.valuation if not t.is_zero() else N
        n = 1
        # terms t^k / k fall below p^N once k*vt - log_p(k) > N
        while n * vt - math.log(n, self.p) <= N + 2:
            n += 1
        coeffs = formal_log_coefficients(self.ainvs, n + 1)
        total = PadicNumber.zero(self.p, N)
        power = t
        for c in coeffs:
            if c:
                total = total + power * PadicNumber.from_rational(c, self.p, N + 2 * n)
            power = power * t
        return total

    def log_sigma(self, z: PadicNumber) -> PadicNumber:
        """log_p sigma(z) on the minimal model."""
        N = self.prec + self.guard
        p = self.p
        vz = z.valuation
        out = iwasawa_log(z.lift(), p, N) if z.relative_precision >= N else iwasawa_log(z.lift(), p, z.relative_precision)
        out = out + self.e2 * z * z / 24
        # sum_k c_k z^(2k+2) / ((2k+1)(2k+2)); c_k denominators grow slowly, extend until stable
        K = 8
        while True:
            cs = weierstrass_p_coefficients(self.c4, self.c6, K)
            tail_ok = all(
                _fval(cs[k - 1], p) + (2 * k + 2) * vz - valuation((2 * k + 1) * (2 * k + 2), p) > N + 2
                for k in range(K - 3, K + 1)
            )
            if tail_ok:
                break
            K *= 2
        z2 = z * z
        power = z2
        for k, ck in enumerate(cs, start=1):
            power = power * z2
            if ck:
                q = ck / ((2 * k + 1) * (2 * k + 2))
                out = out - power * PadicNumber.from_rational(q, p, N + 4 * K)
        return out

    def global_height(self, P: CurvePoint) -> PadicNumber:
        N = self.prec + self.guard
        if P.is_infinity:
            return PadicNumber.zero(self.p, self.prec)
        key = (P.x, P.y)
        if key in self._cache:
            return self._cache[key]
        try:
            m = self.multiplier(P)
        except PadicError as exc:
            if "torsion" in str(exc):
                return PadicNumber.zero(self.p, self.prec)
            raise
        Q = multiply(m, P)
        if Q.is_infinity:
            return PadicNumber.zero(self.p, self.prec)
        x, y = self.source_xy(Q)
        d = math.isqrt(x.denominator)
        if d * d != x.denominator:
            raise PadicError("x(Q) denominator is not a square; model is not integral")
        a1, _, a3, _, _ = self.ainvs
        t = PadicNumber.from_rational(-x / y, self.p, N + 2 * valuation(d, self.p) + 2)
        z = self.formal_log(t)
        val = (self.log_sigma(z) - iwasawa_log(d, self.p, N)) / (self.p * m * m)
        val = val.add_bigoh(self.prec)
        self._cache[key] = val
        return val


# ---------------------------------------------------------------------------
# Mordell-Weil coordinates


@dataclass
class MordellWeilData:
    """Generators and user-supplied coordinates (a, b): P - a z1 - b z2 is torsion."""

    model: CurveModel
    generators: tuple[CurvePoint, ...]
    points: dict[str, tuple[CurvePoint, tuple[int, ...]]] = field(default_factory=dict)

    def register(self, name: str, P: CurvePoint, coords: Sequence[int], check: bool = True, torsion_bound: int = 16):
        if len(coords) != len(self.generators):
            raise ValueError(f"{name}: expected {len(self.generators)} coordinates")
        if check:
            R = P
            for c, G in zip(coords, self.generators):
                R = R - multiply(c, G)
            if not _is_torsion(R, torsion_bound):
                raise ValueError(f"{name}: {P} is not {list(coords)} in the generators up to torsion")
        self.points[name] = (P, tuple(coords))

    def coords(self, name: str) -> tuple[int, ...]:
        if name not in self.points:
            raise KeyError(f"unregistered point {name!r}")
        return self.points[name][1]

    def tau(self, name: str) -> int:
        """tau(P) = b, the second coordinate (rank 2)."""
        return self.coords(name)[-1]

    def check_linearity(self, f1: Mapping[str, PadicNumber], f1_generators: Sequence[PadicNumber], prec: int) -> list[str]:
        """Names whose f1 value disagrees with a f1(z1) + b f1(z2) at ``prec`` digits."""
        bad = []
        for name, (_, c) in self.points.items():
            expect = sum((g * k for g, k in zip(f1_generators, c)), PadicNumber.zero(self.model.prime, prec))
            if not (f1[name] - expect).add_bigoh(prec).is_zero():
                bad.append(name)
        return bad


def _is_torsion(P: CurvePoint, bound: int) -> bool:
    Q = P
    for _ in range(bound):
        if Q.is_infinity:
            return True
        Q = Q + P
    return Q.is_infinity


def search_coordinates(P: CurvePoint, generators: Sequence[CurvePoint], bound: int = 20,
                       torsion: Sequence[CurvePoint] = ()) -> tuple[int, ...] | None:
    """Brute-force (a, b) with P = a z1 + b z2 + T over |a|, |b| <= bound (tooling for configs)."""
    if len(generators) == 1:
        g = generators[0]
        for a in range(-bound, bound + 1):
            D = P - multiply(a, g)
            if D.is_infinity or any(D == T for T in torsion):
                return (a,)
        return None
    g1, g2 = generators
    mult2 = {b: multiply(b, g2) for b in range(-bound, bound + 1)}
    for a in sorted(range(-bound, bound + 1), key=abs):
        base = P - multiply(a, g1)
        for b in sorted(range(-bound, bound + 1), key=abs):
            D = base - mult2[b]
            if D.is_infinity or any(D == T for T in torsion):
                return (a, b)
    return None
