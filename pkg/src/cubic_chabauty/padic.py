"""Capped-absolute-precision arithmetic in Q_p.

Two representations live here.  :class:`PadicNumber` is the public value
type: immutable, with valuation, unit part and absolute precision tracked
explicitly.  :class:`FixedRing` is a flat fixed-point encoding (plain Python
ints) used by the heavy series and cohomology code, where allocating an
object per coefficient would dominate the run time.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Iterable


class PadicError(ArithmeticError):
    """Domain error in p-adic arithmetic (non-unit, non-residue, log of 0)."""


class PrecisionError(ArithmeticError):
    """Raised when a computation cannot certify the requested digits."""


def valuation(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise PadicError("valuation of 0")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _check_prime(p: int) -> None:
    if p < 3 or p % 2 == 0:
        raise PadicError(f"unsupported prime {p}: odd primes only")


def _rational_parts(x, p: int) -> tuple[int, int, int]:
    """Split a nonzero rational as (v, num, den) with p coprime to num*den."""
    x = Fraction(x)
    if x == 0:
        raise PadicError("zero has no unit part")
    num, den = x.numerator, x.denominator
    v = 0
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v, num, den


class PadicNumber:
    """An element of Q_p known modulo p^abs_precision.

    ``valuation`` is None when the value is zero at its precision (which
    includes the exact zero).  Otherwise ``unit`` is the unit part reduced
    modulo p^(abs_precision - valuation).
    """

    __slots__ = ("prime", "valuation", "unit", "abs_precision")

    def __init__(self, prime: int, valuation: int | None, unit: int, abs_precision: int):
        if valuation is not None and valuation >= abs_precision:
            valuation, unit = None, 0
        if valuation is not None:
            unit %= prime ** (abs_precision - valuation)
            if unit % prime == 0:
                raise PadicError("unit part divisible by p")
        else:
            unit = 0
        object.__setattr__(self, "prime", prime)
        object.__setattr__(self, "valuation", valuation)
        object.__setattr__(self, "unit", unit)
        object.__setattr__(self, "abs_precision", abs_precision)

    def __setattr__(self, name, value):
        raise AttributeError("PadicNumber is immutable")

    def __reduce__(self):
        return (PadicNumber, (self.prime, self.valuation, self.unit, self.abs_precision))

    # -- construction -------------------------------------------------
    @classmethod
    def from_rational(cls, x, p: int, prec: int) -> "PadicNumber":
        _check_prime(p)
        x = Fraction(x)
        if x == 0:
            return cls(p, None, 0, prec)
        v, num, den = _rational_parts(x, p)
        if v >= prec:
            return cls(p, None, 0, prec)
        m = p ** (prec - v)
        return cls(p, v, num * pow(den, -1, m) % m, prec)

    @classmethod
    def zero(cls, p: int, prec: int) -> "PadicNumber":
        return cls(p, None, 0, prec)

    @classmethod
    def from_scaled(cls, p: int, c: int, shift: int, prec: int) -> "PadicNumber":
        """Value c / p^shift known modulo p^prec."""
        if c == 0:
            return cls(p, None, 0, prec)
        v = valuation(c, p)
        return cls(p, v - shift, c // p**v, prec)

    def _coerce(self, other) -> "PadicNumber":
        if isinstance(other, PadicNumber):
            if other.prime != self.prime:
                raise PadicError("mixing different primes")
            return other
        if isinstance(other, (int, Rational)):
            return PadicNumber.from_rational(other, self.prime, max(self.abs_precision, 0) + 64)
        return NotImplemented

    # -- queries --------------------------------------------------------
    def is_zero(self) -> bool:
        return self.valuation is None

    def is_unit(self) -> bool:
        return self.valuation == 0

    @property
    def relative_precision(self) -> int:
        if self.valuation is None:
            return 0
        return self.abs_precision - self.valuation

    def residue(self) -> int:
        """Reduction mod p of an integral element."""
        if self.valuation is None or self.valuation > 0:
            return 0
        if self.valuation < 0:
            raise PadicError("residue of a non-integral element")
        return self.unit % self.prime

    def lift(self) -> Fraction:
        """Canonical rational representative u*p^v with 0 <= u < p^(N-v)."""
        if self.valuation is None:
            return Fraction(0)
        return Fraction(self.unit) * Fraction(self.prime) ** self.valuation

    def lift_int(self) -> int:
        """Integer representative in [0, p^N) of an integral element."""
        if self.valuation is None:
            return 0
        if self.valuation < 0:
            raise PadicError("not integral")
        return self.unit * self.prime**self.valuation

    def digits(self) -> list[int]:
        """Base-p digits from p^v up to p^(N-1) (empty for zero)."""
        if self.valuation is None:
            return []
        out, u = [], self.unit
        for _ in range(self.abs_precision - self.valuation):
            u, d = divmod(u, self.prime)
            out.append(d)
        return out

    def machine(self) -> dict:
        return {
            "p": self.prime,
            "v": self.valuation,
            "digits": self.digits(),
            "N": self.abs_precision,
        }

    def to_scaled(self, shift: int, prec: int) -> int:
        """Encode as an int c with value c / p^shift mod p^(prec + shift)."""
        if self.valuation is None:
            return 0
        e = self.valuation + shift
        if e < 0:
            raise PrecisionError("valuation below the fixed-point shift")
        return self.unit * self.prime**e % self.prime ** (prec + shift)

    # -- arithmetic -----------------------------------------------------
    def __neg__(self):
        if self.valuation is None:
            return self
        return PadicNumber(self.prime, self.valuation, -self.unit, self.abs_precision)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        p = self.prime
        prec = min(self.abs_precision, other.abs_precision)
        if self.valuation is None:
            return other.add_bigoh(prec)
        if other.valuation is None:
            return self.add_bigoh(prec)
        v = min(self.valuation, other.valuation)
        if v >= prec:
            return PadicNumber(p, None, 0, prec)
        total = self.unit * p ** (self.valuation - v) + other.unit * p ** (other.valuation - v)
        total %= p ** (prec - v)
        if total == 0:
            return PadicNumber(p, None, 0, prec)
        w = valuation(total, p)
        return PadicNumber(p, v + w, total // p**w, prec)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        p = self.prime
        if self.valuation is None or other.valuation is None:
            va = self.valuation if self.valuation is not None else self.abs_precision
            vb = other.valuation if other.valuation is not None else other.abs_precision
            return PadicNumber(p, None, 0, min(self.abs_precision + vb, other.abs_precision + va))
        prec = min(self.abs_precision + other.valuation, other.abs_precision + self.valuation)
        return PadicNumber(p, self.valuation + other.valuation, self.unit * other.unit, prec)

    __rmul__ = __mul__

    def inverse(self) -> "PadicNumber":
        if self.valuation is None:
            raise ZeroDivisionError("p-adic zero is not invertible")
        v = self.valuation
        rel = self.abs_precision - v
        m = self.prime**rel
        return PadicNumber(self.prime, -v, pow(self.unit, -1, m), rel - v)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = PadicNumber.from_rational(1, self.prime, self.abs_precision + 64)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def add_bigoh(self, prec: int) -> "PadicNumber":
        """Reduce precision to at most ``prec``."""
        prec = min(prec, self.abs_precision)
        if self.valuation is None or self.valuation >= prec:
            return PadicNumber(self.prime, None, 0, prec)
        return PadicNumber(self.prime, self.valuation, self.unit, prec)

    def equals(self, other, prec: int | None = None) -> bool:
        """Equality modulo p^min(precisions[, prec])."""
        diff = self - other
        if prec is not None:
            diff = diff.add_bigoh(prec)
        return diff.is_zero()

    def __eq__(self, other):
        if not isinstance(other, (PadicNumber, int, Rational)):
            return NotImplemented
        return self.equals(other)

    def __hash__(self):
        return hash((self.prime, self.valuation, self.unit, self.abs_precision))

    def __repr__(self):
        return f"PadicNumber({self})"

    def __str__(self):
        return format_padic(self)


def format_padic(x: PadicNumber) -> str:
    """Render as ``d0 + d1*p + d2*p^2 + ... + O(p^N)``, skipping zero digits."""
    p = x.prime
    terms = []
    if x.valuation is not None:
        for i, d in enumerate(x.digits()):
            if d == 0:
                continue
            e = x.valuation + i
            if e == 0:
                terms.append(str(d))
            else:
                power = str(p) if e == 1 else f"{p}^{e}" if e > 0 else f"{p}^({e})"
                terms.append(power if d == 1 else f"{d}*{power}")
    terms.append(f"O({p}^{x.abs_precision})")
    return " + ".join(terms)


# ---------------------------------------------------------------------------
# Transcendental and algebraic helpers


def _log_one_unit(z: int, p: int, work: int) -> int:
    """log(1+z) for p | z, as an integer modulo p^work."""
    # the k-th term z^k/k has valuation >= k - v_p(k)
    K = 1
    while K - math.log(K, p) < work + 1:
        K += 1
    extra = int(math.log(K, p)) + 2
    big = p ** (work + extra)
    m = p**work
    total, power = 0, 1
    for k in range(1, K + 1):
        power = power * z % big
        vk, kk = 0, k
        while kk % p == 0:
            kk //= p
            vk += 1
        term = (power // p**vk) * pow(kk, -1, m)
        total += term if k % 2 else -term
    return total % m


def iwasawa_log(x, p: int, prec: int) -> PadicNumber:
    """Iwasawa logarithm log_p(x) with log_p(p) = 0, to absolute precision ``prec``.

    ``x`` is a nonzero rational or a :class:`PadicNumber`.
    """
    _check_prime(p)
    if isinstance(x, PadicNumber):
        if x.valuation is None:
            raise PadicError("log of zero")
        # log only depends on the unit part; its relative precision caps ours
        u = x.unit
        prec = min(prec, x.relative_precision)
        work = prec + 2 * (int(math.log(prec + 2, p)) + 2)
        m = p**work
        u %= m
    else:
        x = Fraction(x)
        if x == 0:
            raise PadicError("log of zero")
        _, num, den = _rational_parts(x, p)
        work = prec + 2 * (int(math.log(prec + 2, p)) + 2)
        m = p**work
        u = num * pow(den, -1, m) % m
    # u^(p-1) is a 1-unit; divide the result by p-1 (a unit)
    w = pow(u, p - 1, m)
    val = _log_one_unit(w - 1, p, work)
    val = val * pow(p - 1, -1, m) % m
    return PadicNumber.from_scaled(p, val, 0, prec)


def hensel_sqrt(a, residue: int | None, prec: int, p: int | None = None) -> PadicNumber:
    """Square root of a p-adic unit square, congruent to ``residue`` mod p.

    ``residue=None`` picks the root whose reduction is the smaller of the two.
    """
    if isinstance(a, PadicNumber):
        p = a.prime
        if a.valuation != 0:
            raise PadicError("hensel_sqrt needs a unit")
        prec = min(prec, a.abs_precision)
        av = a.unit
    else:
        if p is None:
            raise PadicError("prime required for rational input")
        _check_prime(p)
        a = Fraction(a)
        v, num, den = _rational_parts(a, p)
        if v != 0:
            raise PadicError("hensel_sqrt needs a unit")
        av = num * pow(den, -1, p**prec) % p**prec
    r0 = None
    for r in range(1, p):
        if (r * r - av) % p == 0:
            r0 = r
            break
    if r0 is None:
        raise PadicError(f"{av % p} is not a square mod {p}")
    if residue is not None:
        residue %= p
        if (residue * residue - av) % p:
            raise PadicError("requested residue is not a square root mod p")
        r0 = residue
    s, k = r0, 1
    while k < prec:
        k = min(2 * k, prec)
        m = p**k
        s = (s + av * pow(s, -1, m)) * pow(2, -1, m) % m
    return PadicNumber(p, 0, s, prec)


def teichmuller(a, prec: int, p: int | None = None) -> PadicNumber:
    """Teichmüller representative of the residue class of a unit."""
    if isinstance(a, PadicNumber):
        p = a.prime
        if a.valuation != 0:
            raise PadicError("teichmuller needs a unit")
        r = a.unit % p
    else:
        if p is None:
            raise PadicError("prime required for integer input")
        _check_prime(p)
        r = int(a) % p
        if r == 0:
            raise PadicError("teichmuller needs a unit")
    m = p**prec
    return PadicNumber(p, 0, pow(r, p ** (prec - 1), m), prec)


def teichmuller_int(r: int, p: int, prec: int) -> int:
    """Teichmüller lift of r mod p as an integer mod p^prec (0 maps to 0)."""
    r %= p
    if r == 0:
        return 0
    return pow(r, p ** (prec - 1), p**prec)


# ---------------------------------------------------------------------------
# Flat fixed-point ring used by the series and cohomology kernels


class FixedRing:
    """Q_p elements encoded as ints c meaning c / p^shift, known mod p^prec.

    All arithmetic is on plain ints modulo ``p^(prec + shift)``.  A product
    or division that would need more than ``shift`` negative valuation
    raises :class:`PrecisionError`; the caller then retries with a larger
    shift.  Absolute precision loss from dividing by multiples of p is not
    tracked per coefficient; callers account for it with guard digits.
    """

    __slots__ = ("p", "prec", "shift", "mod", "ps", "one")

    def __init__(self, p: int, prec: int, shift: int = 20):
        _check_prime(p)
        self.p = p
        self.prec = prec
        self.shift = shift
        self.mod = p ** (prec + shift)
        self.ps = p**shift
        self.one = self.ps % self.mod

    def __repr__(self):
        return f"FixedRing(p={self.p}, prec={self.prec}, shift={self.shift})"

    def __eq__(self, other):
        return isinstance(other, FixedRing) and (self.p, self.prec, self.shift) == (other.p, other.prec, other.shift)

    def __hash__(self):
        return hash((self.p, self.prec, self.shift))

    def from_int(self, n: int) -> int:
        return n * self.ps % self.mod

    def from_rational(self, x) -> int:
        x = Fraction(x)
        if x == 0:
            return 0
        v, num, den = _rational_parts(x, self.p)
        e = v + self.shift
        if e < 0:
            raise PrecisionError("rational below fixed-point shift")
        return num * pow(den, -1, self.mod) * self.p**e % self.mod

    def from_padic(self, x: PadicNumber) -> int:
        return x.to_scaled(self.shift, self.prec)

    def to_padic(self, c: int, prec: int | None = None) -> PadicNumber:
        return PadicNumber.from_scaled(self.p, c % self.mod, self.shift, self.prec if prec is None else prec)

    def mul(self, a: int, b: int) -> int:
        q, r = divmod(a * b, self.ps)
        if r:
            raise PrecisionError("fixed-point shift exhausted in product")
        return q % self.mod

    def unscale(self, c: int) -> int:
        """Divide a raw product (scale 2*shift) back down to scale shift."""
        q, r = divmod(c, self.ps)
        if r:
            raise PrecisionError("fixed-point shift exhausted in product")
        return q % self.mod

    def div_int(self, a: int, n: int) -> int:
        if n == 0:
            raise ZeroDivisionError
        p = self.p
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e:
            q, r = divmod(a, p**e)
            if r:
                raise PrecisionError("fixed-point shift exhausted in division")
            a = q
        return a * pow(n, -1, self.mod) % self.mod

    def valuation(self, c: int) -> int | None:
        c %= self.mod
        if c == 0:
            return None
        return valuation(c, self.p) - self.shift

    def inv(self, a: int) -> int:
        a %= self.mod
        if a == 0:
            raise ZeroDivisionError("inverse of p-adic zero")
        e = valuation(a, self.p)
        u = a // self.p**e
        # 1/(u p^(e-s)) encoded at scale s is p^(2s-e) / u
        k = 2 * self.shift - e
        if k < 0:
            raise PrecisionError("fixed-point shift exhausted in inverse")
        return pow(u, -1, self.mod) * self.p**k % self.mod

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, n: int) -> int:
        if n < 0:
            return self.pow(self.inv(a), -n)
        r = self.one
        while n:
            if n & 1:
                r = self.mul(r, a)
            a = self.mul(a, a)
            n >>= 1
        return r

    def sqrt(self, a: int, residue: int | None = None) -> int:
        """Square root of a unit square (Newton iteration)."""
        x = self.to_padic(a)
        return self.from_padic(hensel_sqrt(x, residue, self.prec))

    def log(self, a: int) -> int:
        return self.from_padic(iwasawa_log(self.to_padic(a), self.p, self.prec))

    def is_zero(self, c: int, prec: int | None = None) -> bool:
        """Zero modulo p^prec (default: the ring precision)."""
        prec = self.prec if prec is None else prec
        return c % (self.p ** (prec + self.shift)) == 0


def solve_linear(ring: FixedRing, A: list[list[int]], b: list[list[int]]) -> list[list[int]]:
    """Solve A X = B over a FixedRing by Gaussian elimination.

    Pivots are chosen with minimal valuation in the column, which keeps the
    precision loss equal to the valuation of the determinant.
    """
    n = len(A)
    M = [list(row) + list(rhs) for row, rhs in zip(A, b)]
    width = len(M[0])
    for col in range(n):
        best, best_v = None, None
        for r in range(col, n):
            v = ring.valuation(M[r][col])
            if v is not None and (best_v is None or v < best_v):
                best, best_v = r, v
        if best is None:
            raise PrecisionError("singular linear system at working precision")
        M[col], M[best] = M[best], M[col]
        inv = ring.inv(M[col][col])
        M[col] = [ring.mul(x, inv) for x in M[col]]
        for r in range(n):
            if r != col and M[r][col]:
                f = M[r][col]
                M[r] = [(x - ring.mul(f, y)) % ring.mod for x, y in zip(M[r], M[col])]
    return [row[n:width] for row in M]


def padic_matrix_str(rows: Iterable[Iterable[PadicNumber]]) -> str:
    return "\n".join("[" + ", ".join(str(x) for x in row) + "]" for row in rows)
