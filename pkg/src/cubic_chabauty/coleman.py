"""Iterated Coleman integrals of depth <= 3 from the tangential basepoint at O.

Words are tuples of letter indices (see :mod:`frobenius` for the basis).
``G_w`` denotes the iterated integral from the tangential basepoint
``d/dt`` at O, with the first letter outermost::

    G_(a1 ... an)(z) = int^z  beta_a1 * G_(a2 ... an)

The engine proceeds in three layers.

1. Frobenius equivariance.  ``phi^* G_w`` is rewritten, by repeatedly
   reducing forms with Kedlaya's algorithm, as an expression
   ``Phi_w = sum_u h_(w,u) G_u`` (overconvergent functions ``h``) plus a
   constant ``kappa_w``.  The constant is read off from the formal
   expansion at O, where ``phi^* G_w(t) = G_w(phi^* t)``; every other
   coefficient of that comparison is verified to vanish.
2. At a Frobenius-fixed point P of a residue disk, ``G_w(P) = Phi_w(P) +
   kappa_w``, a triangular family of linear systems (one per word length)
   whose top block is a tensor power of the Frobenius matrix.
3. Everything else is path composition with tiny integrals inside a disk.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .curve import (
    CurveModel,
    CurvePoint,
    InfinityExpansion,
    _int_mul,
    generic_disk_expansion,
    group_law,
    teichmuller_point,
    w_series_int,
    weierstrass_disk_expansion,
)
from .frobenius import EVEN_LETTERS, N_LETTERS, ODD_LETTERS, FrobeniusData, MWElement, kedlaya
from .padic import FixedRing, PadicError, PadicNumber, PrecisionError, iwasawa_log, solve_linear
from .series import LaurentLogSeries, binomial_series, iterated_formal_integral, log_one_plus

log = logging.getLogger(__name__)

Word = tuple[int, ...]


def odd_words(max_length: int = 3) -> list[Word]:
    """All words in omega0, omega1 of length 1..max_length, shortest first."""
    out: list[Word] = []
    for n in range(1, max_length + 1):
        out.extend(itertools.product(ODD_LETTERS, repeat=n))
    return out


def default_guard(p: int, prec: int) -> int:
    # Losses: Kedlaya divisions, (1 - alpha^n) pivots, 1/k from formal integration.
    return 6 + 3 * math.ceil(math.log(prec + 10, p))


# ---------------------------------------------------------------------------
# Path algebra on word -> value maps


def compose_paths(first: Mapping[Word, int], second: Mapping[Word, int], words: Iterable[Word], mul, add) -> dict:
    """Values along ``first`` followed by ``second``.

    I_(g1 g2)(w) = sum_k I_g2(w1..wk) * I_g1(w(k+1)..wn); the first letters
    belong to the later segment because they are outermost.
    """
    out = {}
    for w in words:
        acc = None
        for k in range(len(w) + 1):
            a = second[w[:k]]
            b = first[w[k:]]
            term = mul(a, b)
            acc = term if acc is None else add(acc, term)
        out[w] = acc
    return out


def _prefix_closed(words: Iterable[Word]) -> list[Word]:
    closed = {()}
    for w in words:
        for k in range(len(w) + 1):
            closed.add(w[:k])
            closed.add(w[k:])
    return sorted(closed, key=lambda u: (len(u), u))


# ---------------------------------------------------------------------------


@dataclass
class DiskFunctions:
    """Series of G_w in the local parameter of one residue disk.

    ``kind`` is ``generic`` (s = x - x0 about a Frobenius-fixed point),
    ``weierstrass`` (s = y about a root of f) or ``infinity`` (s = t, with
    log terms).  Coefficients are FixedRing-encoded.
    """

    kind: str
    residue: tuple[int, int] | None
    base_x: int | None
    base_y: int | None
    series: dict[Word, LaurentLogSeries]

    def parameter(self, P: CurvePoint, ring: FixedRing) -> int:
        Pp = P.to_padic(ring.prec)
        if self.kind == "generic":
            return (ring.from_padic(Pp.x) - self.base_x) % ring.mod
        if self.kind == "weierstrass":
            return ring.from_padic(Pp.y)
        return ring.from_padic(P.t_parameter(ring.prec))


class ColemanEngine:
    """Iterated integrals of depth <= 3 on one curve at one prime.

    ``prec`` is the number of p-adic digits reported; the internal ring
    carries ``guard`` extra digits.
    """

    CHECK_WINDOW = 4

    def __init__(self, model: CurveModel, prec: int, guard: int | None = None, shift: int | None = None):
        p = model.prime
        self.model = model
        self.prec = prec
        self.guard = default_guard(p, prec) if guard is None else guard
        work = prec + self.guard
        self.ring = FixedRing(p, work, shift if shift is not None else max(30, work))
        self.frob: FrobeniusData = kedlaya(model, self.ring)
        self.space = self.frob.space
        self._phi: dict[Word, dict[Word, MWElement]] = {(): {(): self.space.one()}}
        self._kappa: dict[Word, int] = {(): 0}
        self._inf: InfinityExpansion | None = None
        self._inf_forms: dict[int, LaurentLogSeries] = {}
        self._formal: dict[Word, LaurentLogSeries] = {}
        self._ypow: dict[int, LaurentLogSeries] = {}
        self._pullback_t: tuple[LaurentLogSeries, LaurentLogSeries] | None = None
        self._teich: dict[tuple[int, int], dict[Word, int]] = {}
        self._disk: dict[tuple, DiskFunctions] = {}
        self._weierstrass_g01: dict[int, int] = {}
        order = work + 3 * math.ceil(math.log(work * 3, p)) + 6
        self.disk_order = order

    # -- helpers ----------------------------------------------------------
    @property
    def p(self) -> int:
        return self.model.prime

    def to_padic(self, c: int) -> PadicNumber:
        return self.ring.to_padic(c, self.prec)

    # -- expansions at O --------------------------------------------------
    def _infinity(self, order: int) -> InfinityExpansion:
        if self._inf is None or self._inf.order < order:
            self._inf = InfinityExpansion.build(self.model, self.ring, order + 8)
            self._inf_forms.clear()
            self._formal.clear()
            self._ypow.clear()
        return self._inf

    def letter_at_infinity(self, b: int, order: int) -> LaurentLogSeries:
        """beta_b as a coefficient of dt, to absolute order ``order``."""
        inf = self._infinity(order + 12)
        if b not in self._inf_forms:
            R = self.ring
            if b == 0:
                form = inf.omega0
            elif b == 1:
                form = inf.omega1
            else:
                k = b - 2
                yinv = -inf.w
                form = inf.omega0 * yinv
                for _ in range(k):
                    form = form * inf.x
            self._inf_forms[b] = form
        return self._inf_forms[b].truncate(order)

    def formal(self, u: Word, order: int) -> LaurentLogSeries:
        """G_u(t) at O (zero constant term at every stage) to order ``order``."""
        if not u:
            return LaurentLogSeries.monomial(self.ring, 0, order)
        cached = self._formal.get(u)
        if cached is not None and cached.order >= order:
            return cached.truncate(order)
        slack = 3 * len(u) + 4
        inner = self.formal(u[1:], order + slack)
        form = self.letter_at_infinity(u[0], order + slack + 4)
        out = (form * inner).formal_integrate()
        if out.order < order:
            raise PrecisionError(f"formal expansion of {u} fell short ({out.order} < {order})")
        self._formal[u] = out
        return out.truncate(order)

    def _y_power(self, j: int, order: int) -> LaurentLogSeries:
        inf = self._infinity(order + 3 * abs(j) + 12)
        key = j
        cached = self._ypow.get(key)
        if cached is not None and cached.order >= order:
            return cached
        if j == 0:
            val = LaurentLogSeries.monomial(self.ring, 0, order + 8)
        elif j > 0:
            val = self._y_power(j - 1, order + 3) * inf.y
        else:
            val = self._y_power(j + 1, order) * (-inf.w)
        self._ypow[key] = val
        return val

    def expand(self, h: MWElement, order: int) -> LaurentLogSeries:
        """t-expansion at O of an overconvergent function, to order ``order``."""
        R = self.ring
        top = max(h.max_level(), 0)
        inf = self._infinity(order + 3 * top + 12)
        x = inf.x
        x2 = x * x
        total = LaurentLogSeries.zero(R, order, low=min(-3 * top - 4, 0))
        for j in sorted(h.levels):
            if -j * 3 - 4 >= order:
                continue
            a, b, c = h.levels[j]
            part = None
            if a:
                part = LaurentLogSeries.monomial(R, 0, order + 3 * j + 8, a)
            if b:
                part = x.scale(b) if part is None else part + x.scale(b)
            if c:
                part = x2.scale(c) if part is None else part + x2.scale(c)
            if part is None:
                continue
            total = total + part * self._y_power(j, order + 4)
        if total.order < order:
            raise PrecisionError("expansion at O fell short")
        return total.truncate(order)

    def _frobenius_of_t(self, order: int) -> tuple[LaurentLogSeries, LaurentLogSeries]:
        """(phi^* t, log(phi^* t / t^p)) at O, to absolute order ``order``."""
        if self._pullback_t is not None and self._pullback_t[1].order >= order:
            return self._pullback_t
        p = self.p
        E = self.model
        R = self.ring
        n = order + 4 * p + 8
        w = w_series_int(E, n + 3)
        # v = t^3 / w has integer coefficients and v(0) = 1
        wt = w[3:] + [0, 0, 0]
        v = [0] * n
        v[0] = 1
        for i in range(1, n):
            v[i] = -sum(wt[k] * v[i - k] for k in range(1, i + 1))
        w = w[:n]

        def ipow(a, e):
            out = [1] + [0] * (n - 1)
            for _ in range(e):
                out = _int_mul(out, a, n)
            return out

        # Z = f(x^p)/y^(2p) - 1 = v^p + c2 t^(2p) + c1 t^p w^p + c0 w^(2p) - 1
        Z = ipow(v, p)
        Z[0] -= 1
        if 2 * p < n:
            Z[2 * p] += E.c2
        wp = ipow(w, p)
        for i in range(n - p):
            Z[i + p] += E.c1 * wp[i]
        w2p = _int_mul(wp, wp, n)
        for i in range(n):
            Z[i] += E.c0 * w2p[i]
        if any(z % p for z in Z):
            raise PadicError("Frobenius lift is not congruent to identity at O")
        Zs = LaurentLogSeries.from_coeffs(R, [R.from_int(z) for z in Z], 0, n)
        u = binomial_series(Zs, Fraction(-1, 2))
        L = log_one_plus(Zs).scale_rational(Fraction(-1, 2))
        self._pullback_t = (u.shift(p), L)
        return self._pullback_t

    def pullback_formal(self, w: Word, order: int) -> LaurentLogSeries:
        """G_w(phi^* t) with log(phi^* t) = p log t + log(u)."""
        R = self.ring
        p = self.p
        G = self.formal(w, order // p + 8)
        extra = p * max(-G.low, 0) + 4
        phit, L = self._frobenius_of_t(order + extra + 4 * p + 8)
        logphi = LaurentLogSeries.log_t(R, order + extra).scale(R.from_int(p)) + L.truncate(order + extra)
        total = LaurentLogSeries.zero(R, order, low=min(G.low * p, 0))
        m = order // p + 5
        for j in range(len(G.logs)):
            row = LaurentLogSeries(R, G.low, m, [G.coeffs(j)[: m - G.low]])
            if not any(row.logs[0]):
                continue
            comp = row.compose(phit)
            for _ in range(j):
                comp = comp * logphi
            total = total + comp
        if total.order < order:
            raise PrecisionError("pullback expansion fell short")
        return total.truncate(order)

    # -- Frobenius expressions -------------------------------------------
    def _integrate(self, forms: dict[Word, MWElement]) -> dict[Word, MWElement]:
        """Primitive of sum_u forms[u] * G_u as sum_u h_u G_u (no constant)."""
        space = self.space
        pending = {u: f for u, f in forms.items() if not f.is_zero()}
        out: dict[Word, MWElement] = {}

        def bump(store, key, val):
            cur = store.get(key)
            store[key] = val if cur is None else cur + val

        while pending:
            u = max(pending, key=lambda k: (len(k), k))
            eta = pending.pop(u)
            if eta.is_zero():
                continue
            g, coeffs = space.reduce(eta)
            if not g.is_zero():
                bump(out, u, g)
                if u:
                    bump(pending, u[1:], -(space.multiply(g, space.basis_F[u[0]])))
            for b, c in enumerate(coeffs):
                if c % self.ring.mod:
                    bump(out, (b,) + u, space.constant(c))
        return {u: h for u, h in out.items() if not h.is_zero()}

    def expression(self, w: Word) -> dict[Word, MWElement]:
        """Phi_w with phi^* G_w = Phi_w + kappa_w."""
        if w in self._phi:
            return self._phi[w]
        inner = dict(self.expression(w[1:]))
        kap = self.kappa(w[1:])
        if kap:
            inner[()] = inner.get((), MWElement(self.space)) + self.space.constant(kap)
        Fa = self.frob.pullbacks[w[0]]
        forms = {u: self.space.multiply(Fa, h) for u, h in inner.items()}
        self._phi[w] = self._integrate(forms)
        return self._phi[w]

    def kappa(self, w: Word) -> int:
        if w in self._kappa:
            return self._kappa[w]
        R = self.ring
        T = self.CHECK_WINDOW
        expr = self.expression(w)
        lhs = self.pullback_formal(w, T)
        rhs = LaurentLogSeries.zero(R, T, low=lhs.low)
        for u, h in expr.items():
            hs = self.expand(h, T + 3 * len(u) + 2).trimmed()
            pole = max(-hs.valuation(), 0) if hs.valuation() < hs.order else 0
            Gs = self.formal(u, T + pole + 2)
            rhs = rhs + (hs * Gs).truncate(T)
        diff = lhs - rhs
        kap = diff.coefficient_int(0, 0)
        check_prec = self.prec
        for j in range(len(diff.logs)):
            for i, c in enumerate(diff.logs[j]):
                k = diff.low + i
                if (k, j) != (0, 0) and k < T and not R.is_zero(c, check_prec):
                    raise PrecisionError(
                        f"Frobenius expression for {w} disagrees at O in t^{k} log^{j}: {R.to_padic(c)}"
                    )
        self._kappa[w] = kap
        return kap

    def shuffle_defect(self, a: int, b: int) -> int:
        """The constant G_a G_b - G_ab - G_ba (nonzero because of the pole of omega1)."""
        N = 8
        d = self.formal((a,), N) * self.formal((b,), N) - self.formal((a, b), N) - self.formal((b, a), N)
        d = d.truncate(N - 2)
        R = self.ring
        noise = lambda c: R.is_zero(c, self.prec)
        if d.has_logs() or not all(noise(d.coefficient_int(k)) for k in range(d.low, N - 2) if k != 0):
            raise PrecisionError("shuffle defect is not constant")
        return d.coefficient_int(0)

    def closure(self, words: Iterable[Word]) -> list[Word]:
        todo = list(words)
        seen: set[Word] = set()
        while todo:
            w = todo.pop()
            if w in seen or not w:
                continue
            seen.add(w)
            for u in self.expression(w):
                if u and u not in seen:
                    todo.append(u)
        return sorted(seen, key=lambda u: (len(u), u))

    # -- Frobenius-fixed points ------------------------------------------
    def teichmuller_values(self, residue: tuple[int, int], words: Iterable[Word] | None = None) -> dict[Word, int]:
        """G_w at the Frobenius-fixed point of a generic disk (encoded)."""
        words = list(words) if words is not None else odd_words(3)
        cached = self._teich.get(residue)
        if cached is not None and all(w in cached for w in words):
            return cached
        R = self.ring
        xbar, ybar = residue
        P = teichmuller_point(self.model, xbar, ybar, R.prec)
        x0, y0 = R.from_padic(P.x), R.from_padic(P.y)
        need = self.closure(words)
        vals: dict[Word, int] = {(): R.one}
        evals: dict[int, int] = {}

        def ev(h: MWElement) -> int:
            key = id(h)
            if key not in evals:
                evals[key] = self.space.evaluate(h, x0, y0)
            return evals[key]

        maxlen = max((len(w) for w in need), default=0)
        for n in range(1, maxlen + 1):
            W = [w for w in need if len(w) == n]
            idx = {w: i for i, w in enumerate(W)}
            A = [[R.one if i == k else 0 for k in range(len(W))] for i in range(len(W))]
            b = []
            for i, w in enumerate(W):
                acc = self.kappa(w)
                for u, h in self.expression(w).items():
                    if len(u) == n:
                        c = h.levels.get(0, [0])[0]
                        if set(h.levels) - {0} or any(h.levels[0][1:]):
                            raise PadicError("top-length coefficient is not constant")
                        A[i][idx[u]] = (A[i][idx[u]] - c) % R.mod
                    else:
                        acc += R.mul(ev(h), vals[u])
                b.append([acc % R.mod])
            sol = solve_linear(R, A, b)
            for w, row in zip(W, sol):
                vals[w] = row[0]
        self._teich[residue] = vals
        return vals

    # -- disks -------------------------------------------------------------
    def disk_functions(self, kind: str, residue, words: Iterable[Word] | None = None) -> DiskFunctions:
        """G_w as series in the disk parameter; words are in omega0, omega1 only."""
        words = sorted(set(words) if words is not None else set(odd_words(3)), key=lambda u: (len(u), u))
        key = (kind, residue, tuple(words))
        if key in self._disk:
            return self._disk[key]
        R = self.ring
        N = self.disk_order
        if kind == "infinity":
            series = {w: self.formal(w, N) for w in words}
            df = DiskFunctions("infinity", None, None, None, series)
            self._disk[key] = df
            return df
        if kind == "generic":
            xbar, ybar = residue
            base = self.teichmuller_values(residue, words)
            P = teichmuller_point(self.model, xbar, ybar, R.prec)
            x0, y0 = R.from_padic(P.x), R.from_padic(P.y)
            exp = generic_disk_expansion(self.model, R, x0, y0, N)
        elif kind == "weierstrass":
            xbar = residue[0] if isinstance(residue, tuple) else residue
            e = self.model.weierstrass_root(xbar, R.prec)
            x0, y0 = R.from_padic(e), 0
            g01 = self.weierstrass_g01(xbar)
            # e = -e kills odd lengths; G_a, G_b vanish at e, so the length-2
            # values are fixed by the (constant) shuffle defects at O.
            base = {(): R.one}
            for w in _prefix_closed(words):
                if w:
                    base[w] = 0
            base[(0, 1)] = g01
            base[(1, 0)] = (-g01 - self.shuffle_defect(0, 1)) % R.mod
            base[(1, 1)] = R.div_int(-self.shuffle_defect(1, 1), 2)
            base[(0, 0)] = R.div_int(-self.shuffle_defect(0, 0), 2)
            exp = weierstrass_disk_expansion(self.model, R, x0, N)
        else:
            raise ValueError(kind)
        forms = {0: exp.omega0, 1: exp.omega1}
        tiny: dict[Word, LaurentLogSeries] = {(): LaurentLogSeries.monomial(R, 0, N)}
        allw = _prefix_closed(words)
        for u in allw:
            if u:
                tiny[u] = iterated_formal_integral([forms[b] for b in u]).truncate(N)
        series = {}
        for w in words:
            acc = LaurentLogSeries.zero(R, N)
            for k in range(len(w) + 1):
                c = base[w[k:]]
                if c:
                    acc = acc + tiny[w[:k]].scale(c)
            series[w] = acc.truncate(N)
        df = DiskFunctions(kind, residue if kind == "generic" else (xbar, 0), x0, y0, series)
        self._disk[key] = df
        return df

    def disk_of(self, P: CurvePoint, words=None) -> DiskFunctions:
        kind = P.disk_class()
        if kind == "infinity":
            return self.disk_functions("infinity", None, words)
        r = P.residue()
        if kind == "weierstrass":
            return self.disk_functions("weierstrass", (r[0], 0), words)
        return self.disk_functions("generic", r, words)

    def values_at(self, P: CurvePoint, words: Iterable[Word] | None = None) -> dict[Word, int]:
        """G_w(P) (encoded) for words in omega0, omega1."""
        words = sorted(set(words) if words is not None else set(odd_words(3)), key=lambda u: (len(u), u))
        R = self.ring
        if P.is_infinity:
            raise PadicError("the tangential basepoint is not an evaluation point")
        df = self.disk_of(P, words)
        s = df.parameter(P, R)
        logt = None
        if df.kind == "infinity":
            logt = R.from_padic(iwasawa_log(P.t_parameter(R.prec), self.p, R.prec))
        if R.valuation(s) is not None and R.valuation(s) < 1:
            raise PadicError("point is not in the disk of its base point")
        return {w: df.series[w].evaluate(s, logt) for w in words}

    def point_values(self, P: CurvePoint, words: Iterable[Word] | None = None) -> dict[Word, PadicNumber]:
        return {w: self.to_padic(v) for w, v in self.values_at(P, words).items()}

    # -- Weierstrass points ----------------------------------------------
    def weierstrass_g01(self, xbar: int) -> int:
        """G_(0,1) at the 2-torsion point (e, 0) with e = xbar mod p.

        Translation by e changes omega1 by an exact form:
        tau_e^* omega1 = omega1 - d(y/(x - e)).  Integrating against omega0
        gives G01(e) = G01(z + e) - G01(z) + log(x(z) - e)/2 - C G0(z) for any
        z, where C is minus the constant term at O of G1 - y/(x - e).  Two
        auxiliary points are used and must agree.
        """
        if xbar in self._weierstrass_g01:
            return self._weierstrass_g01[xbar]
        R = self.ring
        E = self.model
        p = self.p
        e = E.weierstrass_root(xbar, R.prec)
        e_enc = R.from_padic(e)
        N = self.CHECK_WINDOW + 4
        inf = self._infinity(N + 8)
        shift_x = inf.x - LaurentLogSeries.monomial(R, 0, inf.x.order, e_enc)
        g = self.formal((1,), N) - (inf.y * shift_x.inverse()).truncate(N)
        if any(g.coefficient_int(k) for k in range(g.low, 0)) or g.has_logs():
            raise PadicError("translation correction has a pole at O")
        C = (-g.coefficient_int(0)) % R.mod
        epoint = CurvePoint(E, e, PadicNumber.zero(p, R.prec))
        results = []
        for r in E.disks():
            if len(results) == 2:
                break
            if r[1] % p == 0 or (r[0] - xbar) % p == 0:
                continue
            z = teichmuller_point(E, r[0], r[1], R.prec)
            ze = group_law(z, epoint)
            if ze.disk_class() != "generic":
                continue
            vz = self.values_at(z, [(0,), (0, 1)])
            vze = self.values_at(ze, [(0, 1)])
            lg = R.from_padic(iwasawa_log(z.x - e, p, R.prec))
            val = (vze[(0, 1)] - vz[(0, 1)] + R.div_int(lg, 2) - R.mul(C, vz[(0,)])) % R.mod
            results.append(val)
        if not results:
            raise PadicError("no auxiliary disk for the Weierstrass translation")
        if len(results) == 2 and not R.is_zero(results[0] - results[1], self.prec):
            raise PrecisionError(
                f"Weierstrass value disagrees between auxiliary points: {R.to_padic(results[0])} vs {R.to_padic(results[1])}"
            )
        self._weierstrass_g01[xbar] = results[0]
        return results[0]


# ---------------------------------------------------------------------------
# Endpoint tables


@dataclass(frozen=True)
class IntegralTable:
    """Iterated integrals int_P^Q of the words of one length (and below)."""

    depth: int
    P: CurvePoint
    Q: CurvePoint
    values: dict[Word, PadicNumber]
    provenance: str
    precision: int

    def __getitem__(self, w: Word) -> PadicNumber:
        return self.values[tuple(w)]

    def top(self) -> dict[Word, PadicNumber]:
        return {w: v for w, v in self.values.items() if len(w) == self.depth}


def _ring_ops(R: FixedRing):
    return (lambda a, b: R.mul(a, b)), (lambda a, b: (a + b) % R.mod)


def path_values(engine: ColemanEngine, P: CurvePoint, Q: CurvePoint, depth: int = 3) -> dict[Word, int]:
    """int_P^Q w for all words of length <= depth (encoded), via O."""
    R = engine.ring
    words = odd_words(depth)
    GP = {(): R.one, **engine.values_at(P, words)}
    GQ = {(): R.one, **engine.values_at(Q, words)}
    # G(Q) = sum_k I_PQ(w[:k]) G_P(w[k:]); solve for I_PQ by length
    out: dict[Word, int] = {(): R.one}
    for w in words:
        acc = GQ[w]
        for k in range(len(w)):
            acc -= R.mul(out[w[:k]], GP[w[k:]])
        out[w] = acc % R.mod
    return out


def _table(engine, P, Q, depth, provenance) -> IntegralTable:
    vals = path_values(engine, P, Q, depth)
    return IntegralTable(
        depth, P, Q, {w: engine.to_padic(v) for w, v in vals.items() if w}, provenance, engine.prec
    )


def single_integrals(engine: ColemanEngine, P: CurvePoint, Q: CurvePoint) -> IntegralTable:
    return _table(engine, P, Q, 1, "frobenius")


def double_integrals(engine: ColemanEngine, P: CurvePoint, Q: CurvePoint) -> IntegralTable:
    return _table(engine, P, Q, 2, "frobenius")


def triple_integrals(engine: ColemanEngine, P: CurvePoint, Q: CurvePoint) -> IntegralTable:
    return _table(engine, P, Q, 3, "frobenius")


def tiny_integrals(engine: ColemanEngine, P: CurvePoint, Q: CurvePoint, depth: int = 3) -> IntegralTable:
    """int_P^Q inside one residue disk, from the local series alone."""
    if P.disk_class() != Q.disk_class() or P.residue() != Q.residue():
        raise PadicError("tiny integrals need both endpoints in one residue disk")
    R = engine.ring
    words = odd_words(depth)
    N = engine.disk_order
    kind = P.disk_class()
    if kind == "infinity":
        forms = {b: engine.letter_at_infinity(b, N) for b in ODD_LETTERS}
        sP, sQ = (R.from_padic(X.t_parameter(R.prec)) for X in (P, Q))
    elif kind == "generic":
        Pp = P.to_padic(R.prec)
        exp = generic_disk_expansion(engine.model, R, R.from_padic(Pp.x), R.from_padic(Pp.y), N)
        forms = {0: exp.omega0, 1: exp.omega1}
        sP, sQ = 0, (R.from_padic(Q.to_padic(R.prec).x) - R.from_padic(Pp.x)) % R.mod
    else:
        e = engine.model.weierstrass_root(P.residue()[0], R.prec)
        exp = weierstrass_disk_expansion(engine.model, R, R.from_padic(e), N)
        forms = {0: exp.omega0, 1: exp.omega1}
        sP, sQ = (R.from_padic(X.to_padic(R.prec).y) for X in (P, Q))
    # plain antiderivatives from parameter sP: F_w(s) with F_w(sP) = 0
    vals = {(): R.one}
    prims: dict[Word, LaurentLogSeries] = {}
    for w in sorted(words, key=len):
        inner = LaurentLogSeries.monomial(R, 0, N) if len(w) == 1 else prims[w[1:]]
        F = (forms[w[0]] * inner).formal_integrate()
        if F.has_logs() or F.low < 0:
            raise PadicError("tiny integrals across a pole need the tangential formulation")
        F = F - LaurentLogSeries.monomial(R, 0, F.order, F.evaluate(sP))
        prims[w] = F.truncate(N)
        vals[w] = F.evaluate(sQ)
    return IntegralTable(depth, P, Q, {w: engine.to_padic(v) for w, v in vals.items() if w}, "tiny", engine.prec)


def link_compose(first: Mapping[Word, PadicNumber], middle: Mapping[Word, PadicNumber],
                 last: Mapping[Word, PadicNumber], words: Iterable[Word]) -> dict[Word, PadicNumber]:
    """Values along P -> P' -> Q' -> Q from the three pieces (ten terms at depth 3)."""
    def get(table, u):
        return table[u] if u else 1

    out = {}
    for w in words:
        n = len(w)
        acc = 0
        for i in range(n + 1):
            for j in range(i, n + 1):
                acc = get(last, w[:i]) * get(middle, w[i:j]) * get(first, w[j:]) + acc
        out[w] = acc
    return out


def reverse_path(values: Mapping[Word, PadicNumber]) -> dict[Word, PadicNumber]:
    """int_Q^P w = (-1)^|w| int_P^Q reversed(w)."""
    return {w: (values[tuple(reversed(w))] if len(w) % 2 == 0 else -values[tuple(reversed(w))]) for w in values}


def grouplike_values(engine: ColemanEngine, z: CurvePoint, depth: int = 3) -> dict[Word, int]:
    """G(z) composed with a constant path C making it a shuffle character.

    The pole of omega1 at O spoils the shuffle relation G_a G_b = G_ab + G_ba
    by the constant delta_ab.  Composing with C (C_ab = delta_ab / 2 at length
    two, zero in odd lengths) restores every shuffle identity up to length
    three and keeps parity under negation, so the reversal and negation
    manipulations of a genuine path hold for the result.
    """
    R = engine.ring
    words = odd_words(depth)
    G = {(): R.one, **engine.values_at(z, words)}
    C = {(): R.one}
    for a in ODD_LETTERS:
        for b in ODD_LETTERS:
            C[(a, b)] = R.div_int(engine.shuffle_defect(a, b), 2)
    out = {}
    for w in words:
        out[w] = sum(R.mul(G[w[:k]], C.get(w[k:], 0)) for k in range(len(w) + 1)) % R.mod
    return out
