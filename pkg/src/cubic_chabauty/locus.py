"""Depth-3 Chabauty-Kim loci for ranks 0, 1, 2 and their roots per disk.

Every locus function is assembled as a power series in the parameter s of
a finite residue disk (s = x - x0 with x0 Teichmueller, or s = y in a
Weierstrass disk).  Points of X(Z_p) in the disk have s in pZ_p; writing
s = p*sigma, roots in sigma are isolated by Strassmann's bound and a
digit-by-digit recursion, so multiple or unresolved roots are reported as
such rather than guessed.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .curve import CurveModel, CurvePoint
from .padic import FixedRing, PadicError, PadicNumber, PrecisionError, hensel_sqrt
from .polylog import DiskSeries, PolylogEvaluator
from .series import LaurentLogSeries, PadicPoly, determinant, padic_determinant, padic_rank, resultant, sylvester_matrix


class DegenerateError(PadicError):
    """Rank conditions fail at precision, or 0/0 where a ratio is needed."""


# ---------------------------------------------------------------------------
# Roots of a series on a disk


@dataclass(frozen=True)
class DiskRoot:
    """A root s of a disk series: s = p * sigma with sigma in Z_p.

    ``multiplicity`` is the Strassmann count of the final cluster; a root with
    multiplicity > 1 or ``resolved = False`` is an interval, not a point.
    """

    s: PadicNumber
    multiplicity: int
    resolved: bool


def _taylor_shift(coeffs: list[int], r: int, p: int, mod: int) -> list[int]:
    """Coefficients of g(r + p*u) from those of g(u), modulo ``mod``."""
    n = len(coeffs)
    out = [0] * n
    # Horner in the polynomial ring: g = (...(c_{n-1} X + c_{n-2}) X + ...), X = r + p u
    for c in reversed(coeffs):
        nxt = [0] * n
        for j, a in enumerate(out):
            if a:
                nxt[j] = (nxt[j] + a * r) % mod
                if j + 1 < n:
                    nxt[j + 1] = (nxt[j + 1] + a * p) % mod
        nxt[0] = (nxt[0] + c) % mod
        out = nxt
    return out


def _vals(coeffs: Sequence[int], p: int, cap: int) -> list[int]:
    out = []
    for c in coeffs:
        v = 0
        if c == 0:
            out.append(cap)
            continue
        while c % p == 0 and v < cap:
            c //= p
            v += 1
        out.append(v)
    return out


def strassmann_count(coeffs: Sequence[int], p: int, known: int) -> int | None:
    """Number of zeros in Z_p of sum c_k u^k (ints, absolute precision ``known``).

    None when every coefficient vanishes at precision.
    """
    vals = _vals(coeffs, p, known)
    v = min(vals)
    if v >= known:
        return None
    return max(k for k, w in enumerate(vals) if w == v)


def disk_roots(series: LaurentLogSeries, known_digits: int, target_digits: int | None = None) -> list[DiskRoot]:
    """Zeros with s in pZ_p of a power series in s (no negative powers, no logs).

    ``known_digits`` is the absolute precision of the coefficients; roots are
    refined until s is known modulo p^target_digits or until the cluster can
    no longer be split at precision.
    """
    R = series.ring
    p = R.p
    if series.has_logs() or series.low < 0:
        raise PadicError("disk series must be a power series")
    if target_digits is None:
        target_digits = known_digits
    K = series.order
    raw = [series.coefficient_int(k) for k in range(K)]
    # work with integers c_k = a_k * p^(k + shift), precision in p-digits of the value
    sh = R.shift
    known_int = known_digits + sh
    # the truncated tail contributes at valuation >= K + min valuation of the coefficients
    vmins = [R.valuation(a) for a in raw if a and R.valuation(a) is not None]
    vmin = min(vmins) if vmins else 0
    known_int = min(known_int, K + vmin + sh)
    mod = p ** (known_int + 2)
    coeffs = [(a % R.mod) * p**k % mod for k, a in enumerate(raw)]
    out: list[DiskRoot] = []

    def _mk(center_sigma: int, depth: int) -> PadicNumber:
        # sigma known mod p^depth, so s = p*sigma known mod p^(depth+1)
        return PadicNumber.from_rational(center_sigma * p, p, depth + 1)

    def newton(cs: list[int]) -> tuple[int, int]:
        # single root in Z_p: g' has strictly minimal valuation v1 at the root
        v1 = _vals([cs[1]], p, known_int)[0]
        digits = known_int - v1
        m = p**digits
        sig = 0
        for _ in range(4 * digits + 8):
            g = dg = 0
            for c in reversed(cs):
                g = (g * sig + c) % mod
            for k in range(len(cs) - 1, 0, -1):
                dg = (dg * sig + k * cs[k]) % mod
            step = (g // p**v1) * pow(dg // p**v1, -1, m) % m
            if step == 0:
                break
            sig = (sig - step) % m
        return sig, digits

    def recurse(cs: list[int], center: int, depth: int):
        n = strassmann_count(cs, p, known_int)
        if n is None:
            out.append(DiskRoot(_mk(center, depth), 0, False))
            return
        if n == 0:
            return
        if n == 1:
            sig, digits = newton(cs)
            if digits <= 0:
                out.append(DiskRoot(_mk(center, depth), 1, False))
                return
            out.append(DiskRoot(_mk(center + sig * p**depth, depth + digits), 1, True))
            return
        if depth >= target_digits:
            out.append(DiskRoot(_mk(center, depth), n, False))
            return
        found = 0
        branches = []
        for r in range(p):
            shifted = _taylor_shift(cs, r, p, mod)
            m = strassmann_count(shifted, p, known_int)
            if m is None:
                found = -1
                break
            if m:
                found += m
                branches.append((shifted, center + r * p**depth))
        if found < 0:
            # precision no longer separates the cluster
            out.append(DiskRoot(_mk(center, depth), n, False))
            return
        if found > n:
            raise PrecisionError(f"Strassmann counts inconsistent ({found} > {n}) at depth {depth}")
        # found < n: the remaining zeros lie in the disk over C_p but not in Z_p
        for shifted, c in branches:
            recurse(shifted, c, depth + 1)

    recurse(coeffs, 0, 0)
    return out


# ---------------------------------------------------------------------------
# Points from disk parameters


def point_from_parameter(model: CurveModel, disk: DiskSeries, s: PadicNumber) -> CurvePoint:
    p = model.prime
    N = s.abs_precision
    if disk.kind == "generic":
        x0 = PadicNumber.from_scaled(p, disk.base_x, _ring_shift(disk), N)
        x = x0 + s
        y = hensel_sqrt(model.f(x), disk.residue[1], N)
        return model.point(x, y)
    # Weierstrass disk: solve f(x) = s^2 near the root e
    x = PadicNumber.from_scaled(p, disk.base_x, _ring_shift(disk), N)
    target = s * s
    for _ in range(2 * N + 4):
        x = x - (model.f(x) - target) / model.fprime(x)
    return model.point(x, s)


def _ring_shift(disk: DiskSeries) -> int:
    return next(iter(disk.series.values())).ring.shift


# ---------------------------------------------------------------------------
# Reports


@dataclass
class LocusPoint:
    residue: tuple[int, int]
    s: PadicNumber
    x: PadicNumber | None
    y: PadicNumber | None
    classification: str  # "integral", "extra", "unresolved"
    match: tuple | None = None
    multiplicity: int = 1
    note: str = ""


@dataclass
class LocusReport:
    """Roots per residue disk with their classification."""

    label: str
    prime: int
    precision: int
    kind: str
    points: list[LocusPoint] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    data: dict = field(default_factory=dict)

    def by_disk(self) -> dict[tuple[int, int], list[LocusPoint]]:
        out: dict[tuple[int, int], list[LocusPoint]] = {}
        for pt in self.points:
            out.setdefault(pt.residue, []).append(pt)
        return dict(sorted(out.items()))

    @property
    def integral(self) -> list[LocusPoint]:
        return [pt for pt in self.points if pt.classification == "integral"]

    @property
    def extra(self) -> list[LocusPoint]:
        return [pt for pt in self.points if pt.classification == "extra"]

    @property
    def unresolved(self) -> list[LocusPoint]:
        return [pt for pt in self.points if pt.classification == "unresolved"]

    def to_text(self) -> str:
        lines = [f"# {self.kind} locus for {self.label} at p = {self.prime} (precision {self.precision})"]
        lines += [f"# {n}" for n in self.notes]
        for residue, pts in self.by_disk().items():
            lines.append(f"disk {residue}:")
            for pt in pts:
                tag = pt.classification
                if pt.match is not None:
                    tag += " (" + ", ".join(str(c) for c in pt.match) + ")"
                if pt.multiplicity > 1:
                    tag += f" (multiplicity {pt.multiplicity})"
                x = pt.x if pt.x is not None else "?"
                lines.append(f"  x = {x}    [{tag}]")
        for key, val in self.data.items():
            lines.append(f"{key} = {val}")
        return "\n".join(lines) + "\n"

    def to_machine(self) -> dict:
        def num(v):
            return v.machine() if isinstance(v, PadicNumber) else v

        return {
            "label": self.label,
            "prime": self.prime,
            "precision": self.precision,
            "kind": self.kind,
            "notes": list(self.notes),
            "disks": [
                {
                    "residue": list(residue),
                    "roots": [
                        {
                            "s": num(pt.s),
                            "x": num(pt.x),
                            "y": num(pt.y),
                            "classification": pt.classification,
                            "match": [str(c) for c in pt.match] if pt.match is not None else None,
                            "multiplicity": pt.multiplicity,
                        }
                        for pt in pts
                    ],
                }
                for residue, pts in self.by_disk().items()
            ],
            "data": {k: num(v) if not isinstance(v, (list, dict)) else v for k, v in self.data.items()},
        }


def _classify(model: CurveModel, disk: DiskSeries, roots: list[DiskRoot], known: Sequence[CurvePoint]) -> list[LocusPoint]:
    out = []
    for r in roots:
        if not r.resolved:
            out.append(LocusPoint(disk.residue, r.s, None, None, "unresolved", None, r.multiplicity,
                                  "cluster not separated at precision"))
            continue
        P = point_from_parameter(model, disk, r.s)
        match = None
        for K in known:
            if K.residue() != disk.residue:
                continue
            Kp = K.to_padic(r.s.abs_precision)
            if (Kp.x - P.x).add_bigoh(r.s.abs_precision).is_zero() and (Kp.y - P.y).add_bigoh(r.s.abs_precision).is_zero():
                match = (K.x, K.y)
                break
        cls = "integral" if match is not None else "extra"
        out.append(LocusPoint(disk.residue, r.s, P.x, P.y, cls, match, r.multiplicity))
    return out


def _finite_disks(model: CurveModel) -> list[tuple[int, int]]:
    return model.disks()


def _encode(R: FixedRing, x: PadicNumber) -> int:
    return R.from_padic(x)


def _series_const(R: FixedRing, c: int, N: int) -> LaurentLogSeries:
    return LaurentLogSeries.monomial(R, 0, N, c % R.mod)


# ---------------------------------------------------------------------------
# Rank 0


def rank0_constant(ev: PolylogEvaluator, torsion: Iterable[CurvePoint]) -> PadicNumber:
    """c = f3(z) / f4(z) at rational torsion points; all usable points must agree.

    Points where f3 and f4 both vanish at precision (2-torsion, and points
    killed by extra automorphisms) are skipped.
    """
    values = []
    for z in torsion:
        v = ev.values(z, ["f3", "f4"])
        if v["f4"].is_zero():
            if not v["f3"].is_zero():
                raise DegenerateError(f"f4 vanishes but f3 does not at {z}")
            continue
        values.append((z, v["f3"] / v["f4"]))
    if not values:
        raise DegenerateError("every candidate point gives 0/0 at precision")
    c = values[0][1]
    for z, ci in values[1:]:
        if not (ci - c).is_zero():
            raise DegenerateError(f"f3/f4 differs between torsion points: {c} vs {ci} at {z}")
    return c


def _in_set(value: PadicNumber, candidates: Sequence[PadicNumber], digits: int) -> PadicNumber | None:
    for t in candidates:
        if (value - t).add_bigoh(digits).is_zero():
            return t
    return None


def rank0_locus(
    ev: PolylogEvaluator,
    T: Sequence[PadicNumber],
    c: PadicNumber,
    known: Sequence[CurvePoint] = (),
    height_scale: Fraction = Fraction(-2),
    tolerance: int | None = None,
    label: str = "",
) -> LocusReport:
    """{z : f1(z) = 0, height_scale * f2(z) in T, f3(z) - c f4(z) = 0}."""
    E = ev.model
    R = ev.ring
    tol = ev.prec - 2 if tolerance is None else tolerance
    report = LocusReport(label or E.label, E.prime, ev.prec, "rank 0")
    report.notes.append(f"membership in T at {tol} digits with h = {height_scale} * f2")
    report.data["c"] = c
    cj = _encode(R, c)
    for residue in _finite_disks(E):
        disk = ev.disk_series(residue, ["f1", "f2", "f3", "f4"])
        for r in disk_roots(disk.series["f1"], ev.prec):
            pts = _classify(E, disk, [r], known)
            pt = pts[0]
            if pt.classification == "unresolved":
                report.points.append(pt)
                continue
            sv = _encode(R, r.s)
            f2 = R.to_padic(disk.series["f2"].evaluate(sv), tol)
            j3 = R.to_padic((disk.series["f3"].evaluate(sv) - R.mul(cj, disk.series["f4"].evaluate(sv))) % R.mod, tol)
            hit = _in_set(f2 * height_scale, T, tol)
            if hit is None:
                continue
            if not j3.is_zero():
                continue
            pt.note = f"h = {hit}"
            report.points.append(pt)
    return report


# ---------------------------------------------------------------------------
# Rank 1


def _cofactors(rows_known: list[list[PadicNumber]]) -> list[PadicNumber]:
    """Cofactors of the last row of the square matrix whose other rows are given.

    The vector is divided by the largest common power of p: the zero set of
    the determinant is unchanged and the fixed-precision ring keeps the
    relative precision.
    """
    n = len(rows_known) + 1
    out = []
    for j in range(n):
        minor = [[row[k] for k in range(n) if k != j] for row in rows_known]
        d = padic_determinant(minor) if minor else None
        sign = 1 if (n - 1 + j) % 2 == 0 else -1
        out.append(d if sign > 0 else -d)
    return _primitive_padic(out)


def _primitive_padic(vec: list[PadicNumber]) -> list[PadicNumber]:
    vals = [x.valuation for x in vec if not x.is_zero()]
    if not vals:
        raise DegenerateError("all cofactors vanish at precision")
    p = vec[0].prime
    scale = PadicNumber.from_rational(Fraction(1, p) ** min(vals) if min(vals) >= 0 else p ** -min(vals), p, 10**6)
    return [x * scale for x in vec]


@dataclass
class Rank1Functions:
    """F2 and F3 as series on each disk, plus the constants that define them."""

    f2_coeffs: tuple[PadicNumber, PadicNumber]
    f3_cofactors: list[PadicNumber]


def rank1_constants(ev: PolylogEvaluator, z1: CurvePoint, z2: CurvePoint, z3: CurvePoint) -> Rank1Functions:
    vals = [ev.values(z, ["f1", "f2", "f3", "f4"]) for z in (z1, z2, z3)]
    M = [[v["f1"] ** 3, v["f1"], v["f3"], v["f4"]] for v in vals]
    if padic_rank(M) < 3:
        raise DegenerateError("the 3x4 matrix of (f1^3, f1, f3, f4) at z1, z2, z3 has rank < 3")
    v1 = vals[0]
    if v1["f1"].is_zero():
        raise DegenerateError("z1 must have infinite order")
    return Rank1Functions(tuple(_primitive_padic([v1["f1"] ** 2, v1["f2"]])), _cofactors(M))


def rank1_disk_functions(ev: PolylogEvaluator, consts: Rank1Functions, residue) -> tuple[DiskSeries, LaurentLogSeries, LaurentLogSeries]:
    R = ev.ring
    disk = ev.disk_series(residue, ["f1", "f2", "f3", "f4"])
    s = disk.series
    a, b = (_encode(R, v) for v in consts.f2_coeffs)
    F2 = s["f2"].scale(a) - (s["f1"] * s["f1"]).scale(b)
    C = [_encode(R, v) for v in consts.f3_cofactors]
    f1 = s["f1"]
    F3 = (f1 * f1 * f1).scale(C[0]) + f1.scale(C[1]) + s["f3"].scale(C[2]) + s["f4"].scale(C[3])
    N = ev.engine.disk_order
    return disk, F2.truncate(N), F3.truncate(N)


def _same_point(a: LocusPoint, b: LocusPoint) -> bool:
    if a.residue != b.residue or a.x is None or b.x is None:
        return False
    n = min(a.s.abs_precision, b.s.abs_precision)
    return (a.s - b.s).add_bigoh(n).is_zero()


def rank1_locus(
    ev: PolylogEvaluator,
    z1: CurvePoint,
    z2: CurvePoint,
    z3: CurvePoint,
    known: Sequence[CurvePoint] = (),
    label: str = "",
    digits: int | None = None,
) -> tuple[LocusReport, LocusReport, LocusReport]:
    """Zero sets of F2, of F3, and their intersection."""
    E = ev.model
    consts = rank1_constants(ev, z1, z2, z3)
    digits = ev.prec if digits is None else digits
    reps = [LocusReport(label or E.label, E.prime, ev.prec, k) for k in ("rank 1: F2", "rank 1: F3", "rank 1: F2 = F3 = 0")]
    for residue in _finite_disks(E):
        disk, F2, F3 = rank1_disk_functions(ev, consts, residue)
        p2 = _classify(E, disk, disk_roots(F2, digits), known)
        p3 = _classify(E, disk, disk_roots(F3, digits), known)
        reps[0].points += p2
        reps[1].points += p3
        reps[2].points += [a for a in p2 if any(_same_point(a, b) for b in p3)]
    return reps[0], reps[1], reps[2]


# ---------------------------------------------------------------------------
# Rank 2


@dataclass
class RegisteredPoint:
    point: CurvePoint
    a: int
    b: int


def _h1_row(v: Mapping[str, PadicNumber], tau) -> list:
    return [v["f2"], v["f1"] ** 2, tau * v["f1"], tau * tau]


def _h2_row(v: Mapping[str, PadicNumber], tau, variant: str) -> list:
    f1 = v["f1"]
    row = [f1**3, tau * f1 * f1, tau * tau * f1, tau**3]
    if variant in ("7", "8"):
        row += [f1, tau]
    row += [v["f3"], v["f4"]]
    if variant == "8":
        row += [1]
    return row


H2_SIZES = {"5": 6, "7": 8, "8": 9}


@dataclass
class Rank2Constants:
    h1_cofactors: list[PadicNumber]
    h2_cofactors: list[PadicNumber]
    variant: str


def rank2_constants(ev: PolylogEvaluator, base: Sequence[RegisteredPoint], variant: str = "7") -> Rank2Constants:
    """Cofactors of the z-row of H1(P1, P2, P3, z) and H2(P1..Pn, z).

    The height column uses f2: on integral points the global height is a
    fixed combination of f2 and f1^2, and det H1 is blind to f1^2 multiples.
    """
    if variant not in H2_SIZES:
        raise ValueError(f"unknown H2 variant {variant!r}")
    n2 = H2_SIZES[variant] - 1
    if len(base) < n2:
        raise DegenerateError(f"H2 variant {variant} needs {n2} base points, got {len(base)}")
    p = ev.p
    vals = [ev.values(P.point, ["f1", "f2", "f3", "f4"]) for P in base[:n2]]
    taus = [PadicNumber.from_rational(P.b, p, ev.prec) for P in base[:n2]]
    H1 = [_h1_row(v, t) for v, t in zip(vals[:3], taus[:3])]
    H2 = [[x if isinstance(x, PadicNumber) else PadicNumber.from_rational(x, p, ev.prec) for x in _h2_row(v, t, variant)]
          for v, t in zip(vals, taus)]
    if padic_rank(H1) < 3:
        raise DegenerateError("H1(P1, P2, P3) does not have rank 3")
    if padic_rank(H2) < n2:
        raise DegenerateError(f"H2 of the base points does not have rank {n2}")
    return Rank2Constants(_cofactors(H1), _cofactors(H2), variant)


def rank2_disk_function(ev: PolylogEvaluator, consts: Rank2Constants, residue) -> tuple[DiskSeries, LaurentLogSeries]:
    """Res_t(det H1(..., z), det H2(..., z)) as a series on one disk."""
    R = ev.ring
    N = ev.engine.disk_order
    disk = ev.disk_series(residue, ["f1", "f2", "f3", "f4"])
    s = disk.series
    f1, f2, f3, f4 = s["f1"], s["f2"], s["f3"], s["f4"]
    one = _series_const(R, R.one, N)
    zero = LaurentLogSeries.zero(R, N)
    C = [_encode(R, c) for c in consts.h1_cofactors]
    D = [_encode(R, c) for c in consts.h2_cofactors]
    f1sq = f1 * f1
    A = [f2.scale(C[0]) + f1sq.scale(C[1]), f1.scale(C[2]), one.scale(C[3])]
    B = [(f1sq * f1).scale(D[0]), f1sq.scale(D[1]), f1.scale(D[2]), one.scale(D[3])]
    k = 4
    if consts.variant in ("7", "8"):
        B[0] = B[0] + f1.scale(D[4])
        B[1] = B[1] + one.scale(D[5])
        k = 6
    B[0] = B[0] + f3.scale(D[k]) + f4.scale(D[k + 1])
    if consts.variant == "8":
        B[0] = B[0] + one.scale(D[k + 2])
    A = [a.truncate(N) for a in A]
    B = [b.truncate(N) for b in B]
    res = resultant(PadicPoly(A, 2), PadicPoly(B, 3), zero, one)
    return disk, res.truncate(N)


def rank2_locus(
    ev: PolylogEvaluator,
    base: Sequence[RegisteredPoint],
    known: Sequence[CurvePoint] = (),
    variant: str = "7",
    label: str = "",
    digits: int | None = None,
    disks: Iterable[tuple[int, int]] | None = None,
) -> LocusReport:
    E = ev.model
    consts = rank2_constants(ev, base, variant)
    digits = ev.prec if digits is None else digits
    rep = LocusReport(label or E.label, E.prime, ev.prec, "rank 2: Res(det H1, det H2) = 0")
    for residue in (disks if disks is not None else _finite_disks(E)):
        disk, F = rank2_disk_function(ev, consts, residue)
        rep.points += _classify(E, disk, disk_roots(F, digits), known)
    return rep


# ---------------------------------------------------------------------------
# Goncharov-Levin relations


def gl_matrix(coords: Sequence[tuple[int, int]]) -> list[list[int]]:
    """Rows a, b, a^3, a^2 b, a b^2, b^3 over the given points."""
    rows = [lambda a, b: a, lambda a, b: b, lambda a, b: a**3, lambda a, b: a * a * b, lambda a, b: a * b * b,
            lambda a, b: b**3]
    return [[f(a, b) for a, b in coords] for f in rows]


def _rref(M: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    M = [row[:] for row in M]
    rows, cols = len(M), len(M[0]) if M else 0
    pivots = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = 1 / M[r][c]
        M[r] = [x * inv for x in M[r]]
        for i in range(rows):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return M, pivots


def _primitive(vec: Sequence[Fraction]) -> list[int]:
    den = 1
    for x in vec:
        den = den * x.denominator // math.gcd(den, x.denominator)
    ints = [int(x * den) for x in vec]
    g = 0
    for x in ints:
        g = math.gcd(g, x)
    g = g or 1
    ints = [x // g for x in ints]
    first = next((x for x in ints if x), 0)
    return [-x for x in ints] if first < 0 else ints


def integer_kernel(M: Sequence[Sequence[int]]) -> list[list[int]]:
    """Primitive integer vectors spanning the rational kernel of M."""
    F = [[Fraction(x) for x in row] for row in M]
    ncols = len(F[0]) if F else 0
    Rm, pivots = _rref(F)
    free = [c for c in range(ncols) if c not in pivots]
    out = []
    for fc in free:
        vec = [Fraction(0)] * ncols
        vec[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            vec[pc] = -Rm[i][fc]
        out.append(_primitive(vec))
    return out


def gl_relations(points: Mapping[str, tuple[int, int]]) -> dict[str, dict[str, int]]:
    """For each point outside a greedily chosen basis, the divisor relation through it.

    The basis is built in the given order, keeping a point when it raises the
    rank of the six-row condition matrix.  For a non-basis point z the
    returned divisor z + sum n_j Q_j satisfies all six conditions.
    """
    names = list(points)
    basis: list[str] = []
    rank = 0
    for name in names:
        trial = basis + [name]
        M = gl_matrix([points[n] for n in trial])
        _, piv = _rref([[Fraction(x) for x in row] for row in M])
        if len(piv) > rank:
            basis.append(name)
            rank = len(piv)
    out: dict[str, dict[str, int]] = {}
    for name in names:
        if name in basis:
            continue
        cols = basis + [name]
        M = gl_matrix([points[n] for n in cols])
        ker = integer_kernel(M)
        # the kernel vector with a nonzero coefficient on z, normalised so z has coefficient +1
        vec = next((v for v in ker if v[-1] != 0), None)
        if vec is None:
            continue
        if vec[-1] < 0:
            vec = [-x for x in vec]
        rel = {n: c for n, c in zip(cols, vec) if c}
        out[name] = rel
    return out


def divisor_value(values: Mapping[str, PadicNumber], divisor: Mapping[str, int]) -> PadicNumber:
    total = None
    for name, n in divisor.items():
        term = values[name] * n
        total = term if total is None else total + term
    return total


# ---------------------------------------------------------------------------
# Parallel helpers (used by the CLI)


_WORKER: dict = {}


def _init_worker(model: CurveModel, prec: int, base, known, variant: str, digits: int):
    # one evaluator and one set of constants per process, shared by its disks
    ev = PolylogEvaluator(model, prec)
    _WORKER.update(ev=ev, consts=rank2_constants(ev, base, variant), model=model, known=known, digits=digits)


def _disk_worker(residue):
    w = _WORKER
    disk, F = rank2_disk_function(w["ev"], w["consts"], residue)
    return residue, _classify(w["model"], disk, disk_roots(F, w["digits"]), w["known"])


def rank2_locus_parallel(model: CurveModel, prec: int, base, known, variant="7", digits=None, jobs: int = 1,
                         label: str = "") -> LocusReport:
    """rank2_locus with disks spread across worker processes (output order is canonical)."""
    digits = prec if digits is None else digits
    disks = _finite_disks(model)
    jobs = min(jobs, len(disks))
    if jobs <= 1:
        ev = PolylogEvaluator(model, prec)
        return rank2_locus(ev, base, known, variant, label, digits)
    rep = LocusReport(label or model.label, model.prime, prec, "rank 2: Res(det H1, det H2) = 0")
    init = (model, prec, base, known, variant, digits)
    with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker, initargs=init) as pool:
        results = dict(pool.map(_disk_worker, disks))
    for r in disks:
        rep.points += results[r]
    return rep
