"""Kedlaya's algorithm in genus one, with the even (x-line) part kept.

Elements of the dagger ring Q_p<x, y, 1/y> are stored canonically as
``sum_j (a_j + b_j x + c_j x^2) y^j``; see :class:`MWElement`.  A
differential is stored as the element F with form ``F dx/(2y)``.

The reduction works in H^1 of E minus {O and the 2-torsion}, which is five
dimensional.  Its basis, in the order used for the letter indices
everywhere else in the package, is

* 0: omega0 = dx/2y           (F = 1)
* 1: omega1 = x dx/2y         (F = x)
* 2, 3, 4: eps_k = x^k dx/2y^2 (F = x^k / y), k = 0, 1, 2

The first two are the anti-invariant classes (odd under y -> -y), the last
three the invariant ones.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction

from .curve import CurveModel, CurvePoint, teichmuller_point
from .padic import FixedRing, PadicError, PadicNumber, PrecisionError, solve_linear
from .series import LaurentLogSeries

log = logging.getLogger(__name__)

N_LETTERS = 5
ODD_LETTERS = (0, 1)
EVEN_LETTERS = (2, 3, 4)


def letter_parity(b: int) -> int:
    return 1 if b in ODD_LETTERS else 0


class MWElement:
    """Finite sum of (a + b x + c x^2) y^j with coefficients in a FixedRing.

    ``levels`` maps j to a 3-list of ring-encoded ints.  Instances are
    treated as immutable once built.
    """

    __slots__ = ("space", "levels")

    def __init__(self, space: "MWSpace", levels: dict[int, list[int]] | None = None):
        self.space = space
        self.levels = levels or {}

    # -- basic ------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.levels

    def copy(self) -> "MWElement":
        return MWElement(self.space, {j: list(v) for j, v in self.levels.items()})

    def __add__(self, other: "MWElement") -> "MWElement":
        mod = self.space.ring.mod
        out = {j: list(v) for j, v in self.levels.items()}
        for j, v in other.levels.items():
            cur = out.get(j)
            if cur is None:
                out[j] = list(v)
            else:
                new = [(a + b) % mod for a, b in zip(cur, v)]
                if any(new):
                    out[j] = new
                else:
                    del out[j]
        return MWElement(self.space, out)

    def __neg__(self) -> "MWElement":
        mod = self.space.ring.mod
        return MWElement(self.space, {j: [(-a) % mod for a in v] for j, v in self.levels.items()})

    def __sub__(self, other: "MWElement") -> "MWElement":
        return self + (-other)

    def scale(self, c: int) -> "MWElement":
        R = self.space.ring
        if c % R.mod == 0:
            return MWElement(self.space)
        out = {}
        for j, v in self.levels.items():
            new = [R.mul(a, c) if a else 0 for a in v]
            if any(new):
                out[j] = new
        return MWElement(self.space, out)

    def __mul__(self, other: "MWElement") -> "MWElement":
        return self.space.multiply(self, other)

    def min_level(self) -> int:
        return min(self.levels) if self.levels else 0

    def max_level(self) -> int:
        return max(self.levels) if self.levels else 0

    def parity(self) -> int | None:
        """1 if only odd levels (an anti-invariant function), 0 if only even."""
        ps = {j % 2 for j in self.levels}
        return ps.pop() if len(ps) == 1 else None

    def __repr__(self):
        return f"MWElement(levels {self.min_level()}..{self.max_level()}, {len(self.levels)} terms)"


class MWSpace:
    """Arithmetic context for one curve and one FixedRing."""

    def __init__(self, model: CurveModel, ring: FixedRing):
        self.model = model
        self.ring = ring
        R = ring
        c0, c1, c2 = model.c0, model.c1, model.c2
        self.c = (c0, c1, c2)
        # x^3 = y^2 - g(x), x^4 = (x - c2) y^2 + (c2^2 - c1) x^2 + (c2 c1 - c0) x + c2 c0
        self._bezout = self._bezout_tables()
        self.basis_F = [
            self.element({0: [R.one, 0, 0]}),
            self.element({0: [0, R.one, 0]}),
            self.element({-1: [R.one, 0, 0]}),
            self.element({-1: [0, R.one, 0]}),
            self.element({-1: [0, 0, R.one]}),
        ]

    def element(self, levels: dict[int, list[int]]) -> MWElement:
        mod = self.ring.mod
        clean = {}
        for j, v in levels.items():
            v = [a % mod for a in v]
            if any(v):
                clean[j] = v
        return MWElement(self, clean)

    def constant(self, c: int) -> MWElement:
        return self.element({0: [c, 0, 0]})

    def one(self) -> MWElement:
        return self.constant(self.ring.one)

    # -- canonical forms --------------------------------------------------
    def from_poly(self, coeffs: list[int], level: int = 0, encoded: bool = False) -> MWElement:
        """sum coeffs[i] x^i y^level, rewritten canonically (repeated division by f)."""
        R = self.ring
        c0, c1, c2 = self.c
        poly = [a if encoded else R.from_int(a) for a in coeffs]
        poly = [a % R.mod for a in poly]
        out: dict[int, list[int]] = {}
        j = level
        while poly:
            while poly and poly[-1] == 0:
                poly.pop()
            if not poly:
                break
            if len(poly) <= 3:
                out[j] = poly + [0] * (3 - len(poly))
                break
            # divide by f = x^3 + c2 x^2 + c1 x + c0
            q = [0] * (len(poly) - 3)
            r = list(poly)
            for i in range(len(r) - 1, 2, -1):
                a = r[i]
                if a:
                    q[i - 3] = a
                    r[i - 1] -= a * c2
                    r[i - 2] -= a * c1
                    r[i - 3] -= a * c0
                    r[i] = 0
            out[j] = [r[0] % R.mod, r[1] % R.mod, r[2] % R.mod]
            poly = [a % R.mod for a in q]
            j += 2
        return self.element(out)

    def multiply(self, A: MWElement, B: MWElement) -> MWElement:
        if A.is_zero() or B.is_zero():
            return MWElement(self)
        R = self.ring
        c0, c1, c2 = self.c
        t0 = c2 * c0
        t1 = c2 * c1 - c0
        t2 = c2 * c2 - c1
        la, ha = A.min_level(), A.max_level()
        lb, hb = B.min_level(), B.max_level()
        na, nb = ha - la + 1, hb - lb + 1
        a_cols = [[A.levels.get(la + i, (0, 0, 0))[k] for i in range(na)] for k in range(3)]
        b_cols = [[B.levels.get(lb + i, (0, 0, 0))[k] for i in range(nb)] for k in range(3)]
        # d_m = sum_{i+k=m} a_i * b_k as level sequences
        d = [None] * 5
        for i in range(3):
            for k in range(3):
                conv = _convolve(a_cols[i], b_cols[k])
                if d[i + k] is None:
                    d[i + k] = conv
                else:
                    d[i + k] = [x + y for x, y in zip(d[i + k], conv)]
        n = na + nb - 1
        low = la + lb
        out: dict[int, list[int]] = {}
        mod, ps = R.mod, R.ps

        def put(level, idx, val):
            if val:
                cur = out.get(level)
                if cur is None:
                    cur = [0, 0, 0]
                    out[level] = cur
                cur[idx] += val

        for m in range(n):
            d0, d1, d2, d3, d4 = (d[k][m] for k in range(5))
            lev = low + m
            put(lev, 0, d0 - d3 * c0 + d4 * t0)
            put(lev, 1, d1 - d3 * c1 + d4 * t1)
            put(lev, 2, d2 - d3 * c2 + d4 * t2)
            put(lev + 2, 0, d3 - d4 * c2)
            put(lev + 2, 1, d4)
        res = {}
        for lev, v in out.items():
            new = []
            for val in v:
                q, r = divmod(val, ps)
                if r:
                    raise PrecisionError("fixed-point shift exhausted in dagger-ring product")
                new.append(q % mod)
            if any(new):
                res[lev] = new
        return MWElement(self, res)

    def shift_levels(self, A: MWElement, m: int) -> MWElement:
        """Multiply by y^m."""
        return MWElement(self, {j + m: list(v) for j, v in A.levels.items()})

    # -- calculus ---------------------------------------------------------
    def d(self, G: MWElement) -> MWElement:
        """F with dG = F dx/2y:  d(P y^j) = (2 P' y^(j+1) + j P f' y^(j-1)) dx/2y."""
        R = self.ring
        c0, c1, c2 = self.c
        acc: dict[int, list[int]] = {}

        def add_poly(level, poly):
            cur = acc.setdefault(level, [])
            if len(cur) < len(poly):
                cur.extend([0] * (len(poly) - len(cur)))
            for i, a in enumerate(poly):
                cur[i] += a

        for j, (a, b, c) in G.levels.items():
            add_poly(j + 1, [2 * b, 4 * c])
            if j:
                # P f' with f' = 3x^2 + 2 c2 x + c1
                fp = [c1, 2 * c2, 3]
                prod = [0] * 5
                for i, u in enumerate((a, b, c)):
                    if u:
                        for k, v in enumerate(fp):
                            prod[i + k] += j * u * v
                add_poly(j - 1, prod)
        out = MWElement(self)
        for level, poly in acc.items():
            out = out + self.from_poly([x % R.mod for x in poly], level, encoded=True)
        return out

    def _bezout_tables(self):
        """For B in {1, x, x^2}: B = A f + C f' with deg A <= 1, deg C <= 2 (exact)."""
        c0, c1, c2 = self.c
        f = [Fraction(c0), Fraction(c1), Fraction(c2), Fraction(1)]
        fp = [Fraction(c1), Fraction(2 * c2), Fraction(3)]
        # unknowns: A = a0 + a1 x, C = k0 + k1 x + k2 x^2; A f + C f' has degree <= 4
        rows = []
        for deg in range(5):
            row = []
            for i in range(2):  # a_i x^i * f
                row.append(f[deg - i] if 0 <= deg - i <= 3 else Fraction(0))
            for i in range(3):  # k_i x^i * f'
                row.append(fp[deg - i] if 0 <= deg - i <= 2 else Fraction(0))
            rows.append(row)
        tables = []
        for target in range(3):
            rhs = [Fraction(1 if deg == target else 0) for deg in range(5)]
            sol = _solve_fraction(rows, rhs)
            tables.append((sol[:2], sol[2:]))
        R = self.ring
        enc = [([R.from_rational(a) for a in A], [R.from_rational(k) for k in C]) for A, C in tables]
        return enc

    def reduce(self, F: MWElement) -> tuple[MWElement, list[int]]:
        """Write F dx/2y = dg + sum_b coeff_b * basis_b; returns (g, coeffs)."""
        R = self.ring
        mod = R.mod
        c0, c1, c2 = self.c
        work = {j: list(v) for j, v in F.levels.items()}
        g_levels: dict[int, list[int]] = {}
        g_polys: dict[int, list[int]] = {}  # non-canonical pieces, canonicalised at the end

        def g_add(level, poly):
            cur = g_polys.setdefault(level, [])
            if len(cur) < len(poly):
                cur.extend([0] * (len(poly) - len(cur)))
            for i, a in enumerate(poly):
                cur[i] = (cur[i] + a) % mod

        # negative levels <= -2, bottom up
        while work:
            lvl = min(work)
            if lvl >= -1:
                break
            B = work.pop(lvl)
            if not any(B):
                continue
            A = [0, 0]
            C = [0, 0, 0]
            for k in range(3):
                if B[k]:
                    tA, tC = self._bezout[k]
                    for i in range(2):
                        A[i] += R.mul(B[k], tA[i])
                    for i in range(3):
                        C[i] += R.mul(B[k], tC[i])
            A = [a % mod for a in A]
            C = [a % mod for a in C]
            j = lvl + 1
            Cj = [R.div_int(a, j) for a in C]
            g_add(j, Cj)
            # level lvl+2 gains A - (2/j) C'
            dC = [C[1], 2 * C[2]]
            upd = [(A[0] - R.div_int(2 * dC[0] % mod, j)) % mod, (A[1] - R.div_int(2 * dC[1] % mod, j)) % mod, 0]
            cur = work.get(lvl + 2)
            if cur is None:
                work[lvl + 2] = upd
            else:
                work[lvl + 2] = [(x + y) % mod for x, y in zip(cur, upd)]
        coeffs = [0] * N_LETTERS
        B = work.pop(-1, [0, 0, 0])
        coeffs[2], coeffs[3], coeffs[4] = B
        # positive levels: y^(2m) = f^m (odd forms), y^(2m+1) dx/2y = f^m dx/2 (even forms)
        odd_poly = list(work.pop(0, [0, 0, 0]))
        for lvl in sorted(work):
            B = work[lvl]
            if not any(B):
                continue
            m = lvl // 2
            poly = _poly_mul_fpow(B, (c0, c1, c2), m)
            if lvl % 2 == 0:
                if len(odd_poly) < len(poly):
                    odd_poly.extend([0] * (len(poly) - len(odd_poly)))
                for i, a in enumerate(poly):
                    odd_poly[i] = (odd_poly[i] + a) % mod
            else:
                # exact: integral of poly dx / 2 is a polynomial at level 0
                integ = [0] + [R.div_int(a, 2 * (i + 1)) for i, a in enumerate(poly)]
                g_add(0, integ)
        # level 0 polynomial: reduce x^n (n >= 2) via d(x^k y) = (2k x^(k-1) f + x^k f') dx/2y
        odd_poly = [a % mod for a in odd_poly]
        for n in range(len(odd_poly) - 1, 1, -1):
            a = odd_poly[n]
            if not a:
                continue
            k = n - 2
            coef = R.div_int(a, 2 * k + 3)
            g_add(1, [0] * k + [coef])
            # subtract coef * (2k x^(k-1) f + x^k f')
            for i, fc in enumerate((c0, c1, c2, 1)):
                if k >= 1:
                    odd_poly[k - 1 + i] = (odd_poly[k - 1 + i] - coef * 2 * k * fc) % mod
            for i, fc in enumerate((c1, 2 * c2, 3)):
                odd_poly[k + i] = (odd_poly[k + i] - coef * fc) % mod
            assert odd_poly[n] == 0
        coeffs[0] = odd_poly[0] if odd_poly else 0
        coeffs[1] = odd_poly[1] if len(odd_poly) > 1 else 0
        g = MWElement(self)
        for level, poly in g_polys.items():
            g = g + self.from_poly(poly, level, encoded=True)
        return g, coeffs

    # -- evaluation -------------------------------------------------------
    def evaluate(self, A: MWElement, x0: int, y0: int) -> int:
        """Value at a point with ring-encoded coordinates, y0 a unit."""
        R = self.ring
        if A.is_zero():
            return 0
        x2 = R.mul(x0, x0)
        yinv = R.inv(y0)
        total = 0
        cache = {0: R.one}
        lo, hi = A.min_level(), A.max_level()
        cur = R.one
        for j in range(1, hi + 1):
            cur = R.mul(cur, y0)
            cache[j] = cur
        cur = R.one
        for j in range(-1, lo - 1, -1):
            cur = R.mul(cur, yinv)
            cache[j] = cur
        for j, (a, b, c) in A.levels.items():
            val = (a * R.ps + b * x0 + c * x2) % (R.mod * R.ps)
            val = R.unscale(val)
            total += R.mul(val, cache[j])
        return total % R.mod

    def expand_at_infinity(self, A: MWElement, xt: LaurentLogSeries, yt: LaurentLogSeries,
                           yinv: LaurentLogSeries, order: int) -> LaurentLogSeries:
        """t-expansion of A near O, truncated at t^order."""
        R = self.ring
        x2 = (xt * xt).truncate(order + 12)
        total = LaurentLogSeries.zero(R, order, low=-3 * max(A.max_level(), 0) - 4)
        pos = {0: None}
        for j in sorted(A.levels):
            # y^j has t-valuation -3j; quadratic in x adds at most -4
            if -3 * j - 4 >= order:
                continue
            a, b, c = A.levels[j]
            coef = LaurentLogSeries.monomial(R, 0, order + 3 * j + 8, a) if a else None
            part = coef
            if b:
                term = xt.scale(b)
                part = term if part is None else part + term
            if c:
                term = x2.scale(c)
                part = term if part is None else part + term
            if part is None:
                continue
            total = total + (part * _ypow(j, yt, yinv, order + 8, pos)).truncate(order)
        return total.truncate(order)


def _ypow(j, yt, yinv, order, cache):
    if j in cache and cache[j] is not None:
        return cache[j]
    if j == 0:
        val = LaurentLogSeries.monomial(yt.ring, 0, order + 20)
    elif j > 0:
        val = (_ypow(j - 1, yt, yinv, order, cache) * yt)
    else:
        val = (_ypow(j + 1, yt, yinv, order, cache) * yinv)
    cache[j] = val
    return val


def _convolve(a: list[int], b: list[int]) -> list[int]:
    """Integer convolution (Kronecker substitution for long inputs)."""
    na, nb = len(a), len(b)
    if not any(a) or not any(b):
        return [0] * (na + nb - 1)
    if na * nb <= 64:
        out = [0] * (na + nb - 1)
        for i, x in enumerate(a):
            if x:
                for k, y in enumerate(b):
                    if y:
                        out[i + k] += x * y
        return out
    ma = max(a)
    mb = max(b)
    bits = (ma * mb * min(na, nb)).bit_length() + 1
    A = 0
    for x in reversed(a):
        A = (A << bits) | x
    B = 0
    for y in reversed(b):
        B = (B << bits) | y
    C = A * B
    mask = (1 << bits) - 1
    out = []
    for _ in range(na + nb - 1):
        out.append(C & mask)
        C >>= bits
    return out


def _poly_mul_fpow(B: list[int], c: tuple[int, int, int], m: int) -> list[int]:
    c0, c1, c2 = c
    f = [c0, c1, c2, 1]
    poly = list(B)
    for _ in range(m):
        out = [0] * (len(poly) + 3)
        for i, a in enumerate(poly):
            if a:
                for k, v in enumerate(f):
                    out[i + k] += a * v
        poly = out
    return poly


def _solve_fraction(rows: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    n = len(rows[0])
    M = [list(r) + [b] for r, b in zip(rows, rhs)]
    piv_row = 0
    where = [-1] * n
    for col in range(n):
        sel = next((r for r in range(piv_row, len(M)) if M[r][col] != 0), None)
        if sel is None:
            continue
        M[piv_row], M[sel] = M[sel], M[piv_row]
        pv = M[piv_row][col]
        M[piv_row] = [x / pv for x in M[piv_row]]
        for r in range(len(M)):
            if r != piv_row and M[r][col] != 0:
                fct = M[r][col]
                M[r] = [x - fct * y for x, y in zip(M[r], M[piv_row])]
        where[col] = piv_row
        piv_row += 1
    sol = [Fraction(0)] * n
    for col in range(n):
        if where[col] >= 0:
            sol[col] = M[where[col]][n]
    for r in M:
        if sum(x * s for x, s in zip(r[:n], sol)) != r[n]:
            raise ValueError("inconsistent Bezout system")
    return sol


# ---------------------------------------------------------------------------


@dataclass
class FrobeniusData:
    """Frobenius on H^1 with the primitives of phi^*(basis) - sum M basis.

    ``matrix[a][b]`` is the coefficient of basis_b in phi^*(basis_a), so the
    2x2 block ``M`` on (omega0, omega1) satisfies phi^*(xi_l) = df_l + sum_m M_lm xi_m.
    """

    space: MWSpace
    pullbacks: list[MWElement]
    primitives: list[MWElement]
    matrix: list[list[int]]
    precision_loss: int = 0

    @property
    def ring(self) -> FixedRing:
        return self.space.ring

    @property
    def M(self) -> list[list[PadicNumber]]:
        R = self.ring
        return [[R.to_padic(self.matrix[a][b]) for b in ODD_LETTERS] for a in ODD_LETTERS]

    def charpoly(self) -> tuple[PadicNumber, PadicNumber]:
        """(trace, det) of the 2x2 block."""
        M = self.M
        return M[0][0] + M[1][1], M[0][0] * M[1][1] - M[0][1] * M[1][0]

    def eval_primitive(self, i: int, P: CurvePoint) -> PadicNumber:
        R = self.ring
        if P.is_infinity:
            raise PadicError("primitive evaluation needs a finite point")
        Pp = P.to_padic(R.prec)
        if Pp.y.valuation != 0:
            raise PadicError("primitive evaluation needs y(P) to be a unit")
        return R.to_padic(self.space.evaluate(self.primitives[i], R.from_padic(Pp.x), R.from_padic(Pp.y)))

    def frobenius_fixed_point(self, P: CurvePoint) -> CurvePoint:
        return frobenius_fixed_point(P, self.ring.prec)


def frobenius_fixed_point(P: CurvePoint, prec: int) -> CurvePoint:
    if P.disk_class() != "generic":
        raise PadicError(f"{P.disk_class()} disk has no Frobenius-fixed point for this lift")
    xb, yb = P.residue()
    return teichmuller_point(P.model, xb, yb, prec)


def _binom_half(k: int) -> Fraction:
    """binomial(-1/2, k)."""
    out = Fraction(1)
    for i in range(k):
        out *= Fraction(-1, 2) - i
        out /= i + 1
    return out


def kedlaya(model: CurveModel, ring: FixedRing) -> FrobeniusData:
    """Frobenius lift x -> x^p, y -> y^p (1 + E/y^(2p))^(1/2) and its reduction."""
    space = MWSpace(model, ring)
    R = ring
    p = model.prime
    c0, c1, c2 = model.c0, model.c1, model.c2
    # E(x) = f(x^p) - f(x)^p, divisible by p
    fpow = [1]
    for _ in range(p):
        fpow = _mul_int(fpow, [c0, c1, c2, 1])
    fxp = [0] * (3 * p + 1)
    for i, c in enumerate((c0, c1, c2, 1)):
        fxp[i * p] += c
    E = [a - b for a, b in zip(fxp, fpow)]
    assert all(e % p == 0 for e in E)
    Z = space.shift_levels(space.from_poly(E), -2 * p)
    # phi^*(1/y) = y^(-p) sum_k binom(-1/2, k) Z^k ; phi^*(1/y^2) = y^(-2p) sum_k (-1)^k Z^k
    terms_needed = R.prec + R.shift + 2
    yinv = space.one()
    yinv2 = space.one()
    Zk = space.one()
    for k in range(1, terms_needed):
        Zk = space.multiply(Zk, Z)
        if Zk.is_zero():
            break
        yinv = yinv + Zk.scale(R.from_rational(_binom_half(k)))
        yinv2 = yinv2 + Zk.scale(R.from_int((-1) ** k))
    phi_yinv = space.shift_levels(yinv, -p)
    phi_yinv2 = space.shift_levels(yinv2, -2 * p)
    # phi^*(F dx/2y) = F(phi) * p x^(p-1) * y * phi^*(1/y)  (as an F-coefficient)
    pullbacks = []
    ycoef = space.shift_levels(phi_yinv, 1)
    for a in range(N_LETTERS):
        if a in ODD_LETTERS:
            xpow = [0] * (p * a + p - 1) + [p]
            F = space.multiply(space.from_poly(xpow), ycoef)
        else:
            k = a - 2
            xpow = [0] * (p * k + p - 1) + [p]
            F = space.multiply(space.from_poly(xpow), space.shift_levels(phi_yinv2, 1))
        pullbacks.append(F)
    primitives, matrix = [], []
    for a in range(N_LETTERS):
        g, coeffs = space.reduce(pullbacks[a])
        primitives.append(g)
        matrix.append(coeffs)
    return FrobeniusData(space, pullbacks, primitives, matrix)


def _mul_int(a: list[int], b: list[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for k, y in enumerate(b):
                out[i + k] += x * y
    return out
