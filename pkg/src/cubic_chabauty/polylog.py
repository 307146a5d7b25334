"""The depth-3 Coleman functions f1..f4 (and d1, a10) on X(Z_p).

All functions are fixed combinations of the engine's iterated integrals
``G_w`` (see :mod:`coleman`).  Two normalisation choices live here.

Tangent vector.  The engine regularises at O with respect to t = -x/y on
the working model y^2 = f(x).  When that model is a rescaling of the source
(minimal) model, t = lam * t_src + O(t^2) with lam = alpha / gamma, and the
integrals that contain log t differ by constants.  ``tangent="source"``
re-bases every G_w to the source tangent vector: with s = t / lam,

    G'_w = sum_v k_(w,v) G_v,        constant term of G'_w in s is zero,

computed recursively from the s-constant terms of the formal expansions.
Parity is preserved (odd words have no constant term).

Discriminant.  f3 carries (1/2 + log_p(Delta)/12) f1; ``delta`` selects the
discriminant of the cubic or the Weierstrass discriminant 16 disc(f).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .coleman import ColemanEngine, DiskFunctions, Word, odd_words, path_values
from .curve import CurveModel, CurvePoint
from .padic import PadicError, PadicNumber, iwasawa_log
from .series import LaurentLogSeries

FUNCTIONS = ("f1", "f2", "f3", "f4", "d1", "a10")
ODD_FUNCTIONS = ("f1", "f3", "f4", "d1")

# name -> {word: rational coefficient}; the discriminant term of f3 is added separately
_LINEAR = {
    "f1": {(0,): Fraction(1)},
    "f2": {(0, 1): Fraction(1)},
    "a10": {(0, 1): Fraction(1)},
    "d1": {(1,): Fraction(1)},
    "f3": {(0, 0, 1): Fraction(-1)},
    "f4": {(0, 1, 1): Fraction(1), (1,): Fraction(-1, 2)},
}


def b3_class(m: int, N: int) -> Fraction:
    """B_3(m/N) for the third Bernoulli polynomial x^3 - 3x^2/2 + x/2."""
    if N <= 0 or not 0 <= m < N:
        raise ValueError(f"need 0 <= m < N, got m={m}, N={N}")
    x = Fraction(m, N)
    return x**3 - Fraction(3, 2) * x**2 + x / 2


def tangent_scale(model: CurveModel) -> Fraction:
    """lam with t_model = lam * t_source + O(t^2)."""
    return Fraction(model.alpha) / Fraction(model.gamma)


@dataclass(frozen=True)
class DiskSeries:
    """The functions as power series in the parameter of one finite disk."""

    kind: str
    residue: tuple[int, int]
    base_x: int
    base_y: int
    series: dict[str, LaurentLogSeries]


class PolylogEvaluator:
    """Evaluates f1..f4, d1, a10 at points and as series on residue disks."""

    def __init__(
        self,
        model: CurveModel,
        prec: int,
        engine: ColemanEngine | None = None,
        delta: str = "cubic",
        tangent: str = "source",
    ):
        self.model = model
        self.prec = prec
        self.engine = engine if engine is not None else ColemanEngine(model, prec)
        R = self.ring
        self.delta = delta
        self.log_delta = model.log_delta(R.prec, delta)
        if tangent not in ("source", "model"):
            raise ValueError(f"unknown tangent normalisation {tangent!r}")
        self.tangent = tangent
        self.lam = tangent_scale(model) if tangent == "source" else Fraction(1)
        self._log_lam = R.from_padic(iwasawa_log(self.lam, self.p, R.prec))
        self._rebase = self._rebase_table(odd_words(3))
        self._coeffs = {name: self._combination(name) for name in FUNCTIONS}

    @property
    def ring(self):
        return self.engine.ring

    @property
    def p(self) -> int:
        return self.model.prime

    # -- normalisation ----------------------------------------------------
    def _s_constant(self, w: Word) -> int:
        """Constant term of G_w re-expanded in s = t / lam."""
        R = self.ring
        if not self._log_lam:
            return 0
        G = self.engine.formal(w, 4)
        total, power = 0, R.one
        for j in range(len(G.logs)):
            if j:
                power = R.mul(power, self._log_lam)
                total += R.mul(G.coefficient_int(0, j), power)
        # the j = 0 coefficient is zero by construction
        return total % R.mod

    def _rebase_table(self, words: Iterable[Word]) -> dict[Word, dict[Word, int]]:
        R = self.ring
        table: dict[Word, dict[Word, int]] = {(): {(): R.one}}
        consts: dict[Word, int] = {}
        for w in sorted(set(words), key=len):
            a, u = w[0], w[1:]
            row: dict[Word, int] = {}
            K = 0
            for v, k in table[u].items():
                av = (a,) + v
                row[av] = k
                if av not in consts:
                    consts[av] = self._s_constant(av)
                K -= R.mul(k, consts[av])
            row[()] = K % R.mod
            table[w] = row
        return table

    def _combination(self, name: str) -> dict[Word, int]:
        """Coefficients of ``name`` on the raw G_v (v = () is the constant 1)."""
        R = self.ring
        out: dict[Word, int] = {}
        for w, q in _LINEAR[name].items():
            c = R.from_rational(q)
            for v, k in self._rebase[w].items():
                out[v] = (out.get(v, 0) + R.mul(c, k)) % R.mod
        if name == "f3":
            extra = (R.from_rational(Fraction(1, 2)) + R.div_int(R.from_padic(self.log_delta), 12)) % R.mod
            out[(0,)] = (out.get((0,), 0) - extra) % R.mod
        return {v: c for v, c in out.items() if c}

    def coefficients(self, name: str) -> dict[Word, PadicNumber]:
        """The combination defining ``name`` (for inspection and tests)."""
        self._check(name)
        return {v: self.engine.to_padic(c) for v, c in self._coeffs[name].items()}

    @staticmethod
    def _check(name: str):
        if name not in FUNCTIONS:
            raise PadicError(f"unknown function {name!r}; expected one of {FUNCTIONS}")

    # -- evaluation -----------------------------------------------------------
    def _apply(self, name: str, G: Mapping[Word, int]) -> int:
        R = self.ring
        total = 0
        for v, c in self._coeffs[name].items():
            total += c if not v else R.mul(c, G[v])
        return total % R.mod

    def raw_values(self, z: CurvePoint) -> dict[Word, int]:
        return self.engine.values_at(z, odd_words(3))

    def values(self, z: CurvePoint, names: Iterable[str] = FUNCTIONS) -> dict[str, PadicNumber]:
        G = self.raw_values(z)
        return {n: self.engine.to_padic(self._apply(n, G)) for n in names}

    def eval_polylog(self, which: str, z: CurvePoint) -> PadicNumber:
        self._check(which)
        return self.values(z, [which])[which]

    def anchored_value(self, which: str, z: CurvePoint, anchor: CurvePoint) -> PadicNumber:
        """Same value routed through ``anchor``: its G_w plus the path anchor -> z.

        Serves as a cross-check of the direct evaluation; any anchor works,
        including points of the disk at infinity (read off the formal series).
        """
        self._check(which)
        R = self.ring
        words = odd_words(3)
        G0 = {(): R.one, **self.engine.values_at(anchor, words)}
        I = path_values(self.engine, anchor, z, 3)
        G = {}
        for w in words:
            G[w] = sum(R.mul(I[w[:k]], G0[w[k:]]) for k in range(len(w) + 1)) % R.mod
        return self.engine.to_padic(self._apply(which, G))

    def formal_expansion(self, which: str, order: int = 10) -> LaurentLogSeries:
        """Expansion at O in the engine's parameter t (logs in log t)."""
        self._check(which)
        R = self.ring
        acc = LaurentLogSeries.zero(R, order)
        for v, c in self._coeffs[which].items():
            term = LaurentLogSeries.monomial(R, 0, order, c) if not v else self.engine.formal(v, order).scale(c)
            acc = acc + term
        return acc.truncate(order)

    # -- disks -------------------------------------------------------------
    def disk_series(self, residue: tuple[int, int], names: Iterable[str] = FUNCTIONS) -> DiskSeries:
        """Series in s (s = x - x0 in generic disks, s = y in Weierstrass disks)."""
        xbar, ybar = residue
        kind = "weierstrass" if ybar % self.p == 0 else "generic"
        df: DiskFunctions = self.engine.disk_functions(kind, (xbar, ybar) if kind == "generic" else (xbar, 0), odd_words(3))
        R = self.ring
        N = self.engine.disk_order
        out = {}
        for name in names:
            self._check(name)
            acc = LaurentLogSeries.zero(R, N)
            for v, c in self._coeffs[name].items():
                acc = acc + (LaurentLogSeries.monomial(R, 0, N, c) if not v else df.series[v].scale(c))
            out[name] = acc.truncate(N)
        return DiskSeries(kind, df.residue, df.base_x, df.base_y, out)
