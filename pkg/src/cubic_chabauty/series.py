"""Polynomials, truncated Laurent series with log terms, and resultants.

Series coefficients live in a :class:`~cubic_chabauty.padic.FixedRing`
(plain ints) for speed; :meth:`LaurentLogSeries.coefficient` converts to
:class:`~cubic_chabauty.padic.PadicNumber` on the way out.

A :class:`LaurentLogSeries` represents ``sum c[j][k-low] * t^k * log(t)^j``
for ``low <= k < order``; everything at or above ``order`` is unknown.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from typing import Callable, Sequence

from .padic import FixedRing, PadicError, PadicNumber, PrecisionError

LOG_CAPACITY = 3


class CapacityError(ArithmeticError):
    """Log degree (or pole order) outside the configured capacity."""


class LaurentLogSeries:
    __slots__ = ("ring", "low", "order", "logs")

    def __init__(self, ring: FixedRing, low: int, order: int, logs: Sequence[Sequence[int]]):
        self.ring = ring
        self.low = low
        self.order = max(order, low)
        n = self.order - low
        mod = ring.mod
        logs = [[c % mod for c in row[:n]] + [0] * (n - len(row[:n])) for row in logs] or [[0] * n]
        while len(logs) > 1 and not any(logs[-1]):
            logs.pop()
        if len(logs) - 1 > LOG_CAPACITY:
            raise CapacityError(f"log degree {len(logs) - 1} exceeds capacity {LOG_CAPACITY}")
        self.logs = logs

    # -- constructors ---------------------------------------------------
    @classmethod
    def zero(cls, ring: FixedRing, order: int, low: int = 0) -> "LaurentLogSeries":
        return cls(ring, low, order, [[0] * (order - low)])

    @classmethod
    def from_coeffs(cls, ring: FixedRing, coeffs: Sequence[int], low: int = 0, order: int | None = None):
        """Series sum coeffs[i] t^(low+i); coefficients already ring-encoded."""
        order = low + len(coeffs) if order is None else order
        return cls(ring, low, order, [list(coeffs)])

    @classmethod
    def from_rationals(cls, ring: FixedRing, coeffs: Sequence, low: int = 0, order: int | None = None):
        return cls.from_coeffs(ring, [ring.from_rational(c) for c in coeffs], low, order)

    @classmethod
    def monomial(cls, ring: FixedRing, k: int, order: int, coeff: int | None = None, log_power: int = 0):
        c = ring.one if coeff is None else coeff
        low = min(k, order)
        logs = [[0] * (order - low) for _ in range(log_power + 1)]
        if k < order:
            logs[log_power][k - low] = c
        return cls(ring, low, order, logs)

    @classmethod
    def log_t(cls, ring: FixedRing, order: int) -> "LaurentLogSeries":
        return cls.monomial(ring, 0, order, log_power=1)

    # -- structure ------------------------------------------------------
    @property
    def log_degree(self) -> int:
        return len(self.logs) - 1

    def valuation(self) -> int:
        """Lowest k with a nonzero coefficient (``order`` if none known)."""
        best = self.order
        for row in self.logs:
            for i, c in enumerate(row):
                if c:
                    best = min(best, self.low + i)
                    break
        return best

    def has_logs(self) -> bool:
        return self.log_degree > 0

    def coefficient_int(self, k: int, j: int = 0) -> int:
        if k >= self.order:
            raise PrecisionError(f"coefficient t^{k} beyond truncation order {self.order}")
        if j >= len(self.logs) or k < self.low:
            return 0
        return self.logs[j][k - self.low]

    def coefficient(self, k: int, j: int = 0) -> PadicNumber:
        return self.ring.to_padic(self.coefficient_int(k, j))

    def constant_term(self) -> int:
        return self.coefficient_int(0, 0)

    def coeffs(self, j: int = 0) -> list[int]:
        """Coefficient list of log^j, starting at t^low."""
        return list(self.logs[j]) if j < len(self.logs) else [0] * (self.order - self.low)

    def _realign(self, low: int, order: int) -> list[list[int]]:
        out = []
        for row in self.logs:
            new = [0] * (order - low)
            for i, c in enumerate(row):
                k = self.low + i
                if low <= k < order:
                    new[k - low] = c
                elif k < low and c:
                    raise ValueError("realign would drop nonzero terms")
            out.append(new)
        return out

    def truncate(self, order: int) -> "LaurentLogSeries":
        order = min(order, self.order)
        low = min(self.low, order)
        return LaurentLogSeries(self.ring, low, order, self._realign(low, order))

    def trimmed(self) -> "LaurentLogSeries":
        """Raise ``low`` to the first nonzero coefficient."""
        v = min(self.valuation(), self.order)
        if v <= self.low:
            return self
        return LaurentLogSeries(self.ring, v, self.order, self._realign(v, self.order))

    # -- arithmetic -----------------------------------------------------
    def _binary(self, other: "LaurentLogSeries", op: Callable[[int, int], int]) -> "LaurentLogSeries":
        low = min(self.low, other.low)
        order = min(self.order, other.order)
        a = self._realign(low, order)
        b = other._realign(low, order)
        n = max(len(a), len(b))
        zero_row = [0] * (order - low)
        a += [zero_row] * (n - len(a))
        b += [zero_row] * (n - len(b))
        return LaurentLogSeries(self.ring, low, order, [[op(x, y) for x, y in zip(ra, rb)] for ra, rb in zip(a, b)])

    def __add__(self, other):
        if isinstance(other, int):
            other = LaurentLogSeries.monomial(self.ring, 0, self.order, self.ring.from_int(other))
        return self._binary(other, lambda x, y: x + y)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, int):
            other = LaurentLogSeries.monomial(self.ring, 0, self.order, self.ring.from_int(other))
        return self._binary(other, lambda x, y: x - y)

    def __neg__(self):
        return LaurentLogSeries(self.ring, self.low, self.order, [[-c for c in row] for row in self.logs])

    def scale(self, c: int) -> "LaurentLogSeries":
        """Multiply by a ring-encoded scalar."""
        R = self.ring
        return LaurentLogSeries(R, self.low, self.order, [[R.mul(x, c) if x else 0 for x in row] for row in self.logs])

    def scale_rational(self, q) -> "LaurentLogSeries":
        return self.scale(self.ring.from_rational(q))

    def shift(self, m: int) -> "LaurentLogSeries":
        """Multiply by t^m."""
        return LaurentLogSeries(self.ring, self.low + m, self.order + m, self.logs)

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(self.ring.from_int(other))
        R = self.ring
        va, vb = self.valuation(), other.valuation()
        order = min(self.order + vb, other.order + va)
        low = self.low + other.low
        if order <= low:
            return LaurentLogSeries.zero(R, max(order, low), max(order, low))
        n = order - low
        out = [[0] * n for _ in range(len(self.logs) + len(other.logs) - 1)]
        for ja, ra in enumerate(self.logs):
            nza = [(i, c) for i, c in enumerate(ra) if c]
            if not nza:
                continue
            for jb, rb in enumerate(other.logs):
                nzb = [(i, c) for i, c in enumerate(rb) if c]
                if not nzb:
                    continue
                dest = out[ja + jb]
                for i, c in nza:
                    if i >= n:
                        break
                    for k, d in nzb:
                        idx = i + k
                        if idx >= n:
                            break
                        dest[idx] += c * d
        mod, ps = R.mod, R.ps
        res = []
        for row in out:
            new = []
            for c in row:
                if c:
                    q, r = divmod(c, ps)
                    if r:
                        raise PrecisionError("fixed-point shift exhausted in series product")
                    new.append(q % mod)
                else:
                    new.append(0)
            res.append(new)
        return LaurentLogSeries(R, low, order, res)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "LaurentLogSeries":
        if n < 0:
            return self.inverse() ** (-n)
        if n == 0:
            return LaurentLogSeries.monomial(self.ring, 0, self.order - self.valuation())
        result = None
        base = self
        while n:
            if n & 1:
                result = base if result is None else result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # -- calculus -------------------------------------------------------
    def derivative(self) -> "LaurentLogSeries":
        """d/dt, using d(t^k log^j t) = (k log^j t + j log^(j-1) t) t^(k-1)."""
        R = self.ring
        J = len(self.logs)
        out = [[0] * (self.order - self.low) for _ in range(J)]
        for j, row in enumerate(self.logs):
            for i, c in enumerate(row):
                if not c:
                    continue
                k = self.low + i
                out[j][i] += k * c
                if j:
                    out[j - 1][i] += j * c
        return LaurentLogSeries(R, self.low - 1, self.order - 1, out)

    def formal_integrate(self) -> "LaurentLogSeries":
        """The unique antiderivative with zero t^0 log^0 coefficient.

        t^(-1) log^j t integrates to log^(j+1) t / (j+1); other powers use
        the recursion I(k, j) = t^(k+1) log^j / (k+1) - j/(k+1) I(k, j-1).
        """
        R = self.ring
        J = len(self.logs)
        has_residue = any(row[-1 - self.low] for row in self.logs if 0 <= -1 - self.low < len(row)) if self.low <= -1 < self.order else False
        out_J = J + 1 if has_residue else J
        if out_J - 1 > LOG_CAPACITY:
            raise CapacityError("log degree overflow in formal integration")
        low, order = self.low + 1, self.order + 1
        out = [[0] * (order - low) for _ in range(out_J)]
        for j in range(J - 1, -1, -1):
            for i, c in enumerate(self.logs[j]):
                if not c:
                    continue
                k = self.low + i
                if k == -1:
                    out[j + 1][i] += R.div_int(c, j + 1)
                    continue
                # expand I(k, j) = sum_m (-1)^m j!/(j-m)! t^(k+1) log^(j-m) / (k+1)^(m+1)
                coef = R.div_int(c, k + 1)
                for m in range(j + 1):
                    out[j - m][i] += coef
                    if m < j:
                        coef = R.div_int(-coef * (j - m) % R.mod, k + 1)
        return LaurentLogSeries(R, low, order, out)

    # -- algebra for power series --------------------------------------
    def _plain(self) -> list[int]:
        if self.has_logs():
            raise CapacityError("operation needs a series without log terms")
        return self.logs[0]

    def inverse(self) -> "LaurentLogSeries":
        """1/F for a Laurent series without logs whose leading coefficient is a unit."""
        R = self.ring
        s = self.trimmed()
        coeffs = s._plain()
        v = s.low
        n = s.order - v
        if n <= 0 or coeffs[0] == 0:
            raise PrecisionError("leading coefficient unknown")
        inv0 = R.inv(coeffs[0])
        out = [0] * n
        out[0] = inv0
        for i in range(1, n):
            acc = 0
            for k in range(1, i + 1):
                if coeffs[k]:
                    acc += coeffs[k] * out[i - k]
            acc = R.unscale(acc % (R.mod * R.ps))
            out[i] = R.mul(-acc % R.mod, inv0)
        return LaurentLogSeries(R, -v, n - v, [out])

    def compose(self, inner: "LaurentLogSeries") -> "LaurentLogSeries":
        """F(inner(t)) for log-free F and log-free inner of positive valuation."""
        R = self.ring
        coeffs = self._plain()
        vin = inner.valuation()
        if vin < 1:
            raise PadicError("composition needs an inner series of positive valuation")
        cap = self.order * vin
        cur = LaurentLogSeries.monomial(R, 0, cap)
        powers = {0: cur}
        for k in range(1, max(self.order, 1)):
            cur = (cur * inner).truncate(cap)
            powers[k] = cur
        if self.low < 0:
            invin = inner.inverse()
            cur = powers[0]
            for k in range(1, -self.low + 1):
                cur = (cur * invin).truncate(cap)
                powers[-k] = cur
        result = LaurentLogSeries.zero(R, cap, low=min(self.low * vin, 0))
        for i, c in enumerate(coeffs):
            if c:
                result = result + powers[self.low + i].scale(c)
        return result.truncate(cap)

    def evaluate(self, t: int, log_t: int | None = None) -> int:
        """Sum the known terms at a ring-encoded t (and log t if logs occur).

        The caller is responsible for t being small enough that the
        truncated tail is below the working precision.
        """
        R = self.ring
        if self.has_logs() and log_t is None:
            raise CapacityError("log t value required")
        total = 0
        for j, row in enumerate(self.logs):
            acc = 0
            # Horner from the top
            for c in reversed(row):
                acc = (R.mul(acc, t) + c) % R.mod
            if self.low:
                acc = R.mul(acc, R.pow(t, self.low))
            if j:
                acc = R.mul(acc, R.pow(log_t, j))
            total += acc
        return total % R.mod

    def __repr__(self):
        terms = []
        for j, row in enumerate(self.logs):
            for i, c in enumerate(row):
                if c:
                    k = self.low + i
                    lt = f"*log^{j}" if j else ""
                    terms.append(f"({self.ring.to_padic(c)})*t^{k}{lt}")
        return " + ".join(terms[:12]) + f" + O(t^{self.order})"


def sqrt_series(f: LaurentLogSeries, residue: int | None = None) -> LaurentLogSeries:
    """Square root of a power series with unit square constant term."""
    R = f.ring
    coeffs = f._plain()
    if f.low != 0:
        f = f.truncate(f.order)
        if f.low < 0:
            raise PadicError("sqrt of a Laurent series with poles")
        coeffs = [0] * f.low + coeffs
    n = f.order
    s0 = R.sqrt(coeffs[0], residue)
    out = [0] * n
    out[0] = s0
    inv2s0 = R.inv(2 * s0 % R.mod)
    for i in range(1, n):
        acc = 0
        for k in range(1, i):
            acc += out[k] * out[i - k]
        acc = R.unscale(acc % (R.mod * R.ps)) if acc else 0
        out[i] = R.mul((coeffs[i] - acc) % R.mod, inv2s0)
    return LaurentLogSeries(R, 0, n, [out])


def log_one_plus(z: LaurentLogSeries) -> LaurentLogSeries:
    """log(1 + z) for a power series z with z(0) = 0 or all coefficients divisible by p.

    Terms are summed until z^k / k falls below the working precision, which
    requires every coefficient of z to have positive valuation when z(0) != 0.
    """
    R = z.ring
    p = R.p
    order = z.order
    result = LaurentLogSeries.zero(R, order)
    power = LaurentLogSeries.monomial(R, 0, order)
    # minimal valuation of the coefficients of z, and its t-adic valuation
    vt = z.valuation()
    vals = [R.valuation(c) for c in z._plain()]
    vp = min((v for v in vals if v is not None), default=R.prec)
    k = 1
    while True:
        power = (power * z).truncate(order)
        term = power.scale(R.from_rational(Fraction((-1) ** (k + 1), k)))
        result = result + term
        k += 1
        done_t = vt >= 1 and vt * k >= order
        done_p = vp >= 1 and (vp * k - _vp_int(k, p)) >= R.prec + 2
        if done_t or done_p:
            break
        if vt < 1 and vp < 1:
            raise PrecisionError("log series does not converge")
    return result


def _vp_int(k: int, p: int) -> int:
    v = 0
    while k % p == 0:
        k //= p
        v += 1
    return v


def binomial_series(z: LaurentLogSeries, alpha: Fraction) -> LaurentLogSeries:
    """(1 + z)^alpha for p-integral alpha and z of positive t-valuation or p-divisible."""
    R = z.ring
    order = z.order
    result = LaurentLogSeries.monomial(R, 0, order)
    power = LaurentLogSeries.monomial(R, 0, order)
    binom = Fraction(1)
    vt = z.valuation()
    vals = [R.valuation(c) for c in z._plain()]
    vp = min((v for v in vals if v is not None), default=R.prec)
    k = 0
    while True:
        k += 1
        binom = binom * (alpha - k + 1) / k
        power = (power * z).truncate(order)
        result = result + power.scale(R.from_rational(binom))
        done_t = vt >= 1 and vt * (k + 1) >= order
        done_p = vp >= 1 and vp * (k + 1) >= R.prec + 1
        if done_t or done_p or not any(any(r) for r in power.logs):
            break
    return result


def iterated_formal_integral(forms: Sequence[LaurentLogSeries]) -> LaurentLogSeries:
    """Formal iterated integral with the first form outermost.

    ``[w1, w2, ..., wn]`` gives ``F1`` where ``Fn = I(wn)`` and
    ``Fk = I(wk * F(k+1))``, each ``I`` the zero-constant-term primitive.
    """
    if not forms:
        raise ValueError("empty word")
    acc = forms[-1].formal_integrate()
    for w in reversed(forms[:-1]):
        acc = (w * acc).formal_integrate()
    return acc


# ---------------------------------------------------------------------------
# Polynomials and resultants


class PadicPoly:
    """Univariate polynomial with coefficients in any commutative ring type.

    Coefficients are indexed by degree; ``formal_degree`` may exceed the
    index of the last coefficient that is distinguishable from zero.
    """

    __slots__ = ("coeffs", "formal_degree", "var")

    def __init__(self, coeffs: Sequence, formal_degree: int | None = None, var: str = "t"):
        self.coeffs = list(coeffs)
        self.formal_degree = len(self.coeffs) - 1 if formal_degree is None else formal_degree
        if self.formal_degree < len(self.coeffs) - 1:
            raise ValueError("formal degree below coefficient list length")
        self.var = var

    def __call__(self, x):
        acc = None
        for c in reversed(self.coeffs):
            acc = c if acc is None else acc * x + c
        return acc

    def degree_certified(self) -> int:
        """Index of the last coefficient that is nonzero at its precision."""
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if isinstance(c, PadicNumber):
                if not c.is_zero():
                    return i
            elif c != 0:
                return i
        return -1

    def __repr__(self):
        return f"PadicPoly({self.coeffs}, formal_degree={self.formal_degree})"


def determinant(matrix: Sequence[Sequence], zero, one):
    """Determinant over an arbitrary commutative ring by Laplace expansion.

    Minors are memoised over column subsets, so the cost is n * 2^n ring
    products; intended for the small (<= 8) matrices of the locus code.
    """
    n = len(matrix)
    if n == 0:
        return one
    memo: dict[tuple[int, int], object] = {}

    def minor(row: int, cols: int):
        # determinant of rows row..n-1 restricted to the column bitmask
        if row == n:
            return one
        key = (row, cols)
        if key in memo:
            return memo[key]
        total = zero
        sign = 1
        for c in range(n):
            if cols >> c & 1:
                entry = matrix[row][c]
                sub = minor(row + 1, cols & ~(1 << c))
                term = entry * sub
                total = total + term if sign > 0 else total - term
                sign = -sign
        memo[key] = total
        return total

    return minor(0, (1 << n) - 1)


def sylvester_matrix(f: PadicPoly, g: PadicPoly, zero) -> list[list]:
    m, n = f.formal_degree, g.formal_degree
    fc = [f.coeffs[i] if i < len(f.coeffs) else zero for i in range(m + 1)]
    gc = [g.coeffs[i] if i < len(g.coeffs) else zero for i in range(n + 1)]
    size = m + n
    rows = []
    for i in range(n):
        row = [zero] * size
        for k in range(m + 1):
            row[i + k] = fc[m - k]
        rows.append(row)
    for i in range(m):
        row = [zero] * size
        for k in range(n + 1):
            row[i + k] = gc[n - k]
        rows.append(row)
    return rows


def resultant(f: PadicPoly, g: PadicPoly, zero=0, one=1):
    """Sylvester resultant with respect to the declared formal degrees."""
    if f.degree_certified() < 0 and g.degree_certified() < 0:
        raise PrecisionError("resultant of two polynomials that vanish at precision")
    if f.formal_degree == 0 and g.formal_degree == 0:
        return one
    return determinant(sylvester_matrix(f, g, zero), zero, one)


def padic_determinant(matrix: Sequence[Sequence[PadicNumber]]) -> PadicNumber:
    """Determinant of a PadicNumber matrix by pivoted elimination."""
    n = len(matrix)
    M = [list(row) for row in matrix]
    p = M[0][0].prime
    det = PadicNumber.from_rational(1, p, 10**6)
    for col in range(n):
        best, bv = None, None
        for r in range(col, n):
            x = M[r][col]
            if not x.is_zero() and (bv is None or x.valuation < bv):
                best, bv = r, x.valuation
        if best is None:
            prec = min(min(x.abs_precision for x in row) for row in M)
            return PadicNumber.zero(p, prec) * det
        if best != col:
            M[col], M[best] = M[best], M[col]
            det = -det
        piv = M[col][col]
        det = det * piv
        inv = piv.inverse()
        for r in range(col + 1, n):
            if M[r][col].is_zero():
                continue
            f = M[r][col] * inv
            M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return det


def padic_rank(matrix: Sequence[Sequence[PadicNumber]], prec: int | None = None) -> int:
    """Rank at precision: pivots that are nonzero modulo p^prec."""
    M = [list(row) for row in matrix]
    rows, cols = len(M), len(M[0]) if M else 0
    rank = 0
    for col in range(cols):
        best, bv = None, None
        for r in range(rank, rows):
            x = M[r][col]
            if prec is not None:
                x = x.add_bigoh(prec)
            if not x.is_zero() and (bv is None or x.valuation < bv):
                best, bv = r, x.valuation
        if best is None:
            continue
        M[rank], M[best] = M[best], M[rank]
        inv = M[rank][col].inverse()
        for r in range(rank + 1, rows):
            if M[r][col].is_zero():
                continue
            f = M[r][col] * inv
            M[r] = [x - f * y for x, y in zip(M[r], M[rank])]
        rank += 1
    return rank


def poly_mul_int(a: Sequence[int], b: Sequence[int]) -> list[int]:
    """Product of integer (or Fraction) coefficient lists."""
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def poly_eval(coeffs: Sequence, x):
    return reduce(lambda acc, c: acc * x + c, reversed(list(coeffs)), 0)
