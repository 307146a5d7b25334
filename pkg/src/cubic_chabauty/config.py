"""Run configuration: TOML in, validated dataclasses, TOML out.

Rationals are written as integers or "a/b" strings so every value is exact
and the document round-trips byte for byte through ``dumps(loads(...))``.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10 only
    import tomli as tomllib


class ConfigError(ValueError):
    """Schema violation or inconsistent configuration."""


MODELS = ("auto", "plain", "b", "c")
RANKS = (0, 1, 2)
H2_VARIANTS = ("5", "7", "8")


@dataclass
class PointSpec:
    name: str
    x: Fraction
    y: Fraction
    coords: str = "working"  # "working" (y^2 = f(x)) or "source"
    mw: tuple[int, ...] | None = None
    integral: bool = True


@dataclass
class LogTerm:
    coefficient: Fraction
    base: int


@dataclass
class GammaSpec:
    prime: int
    m: int
    n: int


@dataclass
class RunConfig:
    label: str
    ainvs: tuple[int, int, int, int, int]
    prime: int
    precision: int
    rank: int
    model: str = "auto"
    points: list[PointSpec] = field(default_factory=list)
    generators: list[str] = field(default_factory=list)
    # locus parameters
    rank1_points: list[str] = field(default_factory=list)
    rank2_base: list[str] = field(default_factory=list)
    h2_variant: str | None = None
    torsion: list[str] = field(default_factory=list)
    T: list[list[LogTerm]] = field(default_factory=list)
    height_scale: Fraction = Fraction(-2)
    tolerance: int | None = None
    # local conditions
    tamagawa: int = 1
    gamma: list[GammaSpec] = field(default_factory=list)
    # integrals / functions subcommands
    depth: int = 3
    delta: str = "cubic"
    jobs: int = 1

    def point(self, name: str) -> PointSpec:
        for p in self.points:
            if p.name == name:
                return p
        raise ConfigError(f"unknown point {name!r}")


# ---------------------------------------------------------------------------
# parsing


def _rat(v: Any, where: str) -> Fraction:
    if isinstance(v, bool):
        raise ConfigError(f"{where}: expected a rational, got {v!r}")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        try:
            return Fraction(v.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"{where}: bad rational {v!r}") from exc
    raise ConfigError(f"{where}: expected an integer or 'a/b' string, got {type(v).__name__}")


def _int(v: Any, where: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{where}: expected an integer, got {v!r}")
    return v


def _str(v: Any, where: str) -> str:
    if not isinstance(v, str):
        raise ConfigError(f"{where}: expected a string, got {v!r}")
    return v


def _table(doc: dict, key: str, required: bool = True) -> dict:
    v = doc.get(key)
    if v is None:
        if required:
            raise ConfigError(f"missing [{key}] table")
        return {}
    if not isinstance(v, dict):
        raise ConfigError(f"[{key}] must be a table")
    return v


def _names(v: Any, where: str) -> list[str]:
    if v is None:
        return []
    if not isinstance(v, list):
        raise ConfigError(f"{where}: expected a list of point names")
    return [_str(x, where) for x in v]


def _check_keys(table: dict, allowed: set[str], where: str):
    extra = set(table) - allowed
    if extra:
        raise ConfigError(f"{where}: unknown keys {sorted(extra)}")


def from_dict(doc: dict) -> RunConfig:
    _check_keys(doc, {"curve", "run", "points", "mw", "locus", "local", "integrals"}, "top level")
    curve = _table(doc, "curve")
    run = _table(doc, "run")
    _check_keys(curve, {"label", "ainvs", "model"}, "[curve]")
    _check_keys(run, {"prime", "precision", "rank", "jobs"}, "[run]")
    ainvs = curve.get("ainvs")
    if not isinstance(ainvs, list) or len(ainvs) != 5:
        raise ConfigError("[curve] ainvs must be a list of five integers")
    cfg = RunConfig(
        label=_str(curve.get("label", ""), "[curve] label"),
        ainvs=tuple(_int(a, "[curve] ainvs") for a in ainvs),
        prime=_int(run.get("prime"), "[run] prime"),
        precision=_int(run.get("precision"), "[run] precision"),
        rank=_int(run.get("rank"), "[run] rank"),
        model=_str(curve.get("model", "auto"), "[curve] model"),
        jobs=_int(run.get("jobs", 1), "[run] jobs"),
    )
    if cfg.model not in MODELS:
        raise ConfigError(f"[curve] model must be one of {MODELS}")
    if cfg.rank not in RANKS:
        raise ConfigError(f"[run] rank must be one of {RANKS}")
    if cfg.precision < 2:
        raise ConfigError("[run] precision must be at least 2")
    if cfg.prime < 3:
        raise ConfigError("[run] prime must be an odd prime")
    pts = doc.get("points", [])
    if not isinstance(pts, list):
        raise ConfigError("[[points]] must be an array of tables")
    seen = set()
    for i, p in enumerate(pts):
        where = f"points[{i}]"
        if not isinstance(p, dict):
            raise ConfigError(f"{where} must be a table")
        _check_keys(p, {"name", "x", "y", "coords", "mw", "integral"}, where)
        name = _str(p.get("name"), f"{where} name")
        if name in seen:
            raise ConfigError(f"duplicate point name {name!r}")
        seen.add(name)
        coords = _str(p.get("coords", "working"), f"{where} coords")
        if coords not in ("working", "source"):
            raise ConfigError(f"{where}: coords must be 'working' or 'source'")
        mw = p.get("mw")
        if mw is not None:
            if not isinstance(mw, list):
                raise ConfigError(f"{where}: mw must be a list of integers")
            mw = tuple(_int(a, f"{where} mw") for a in mw)
        integral = p.get("integral", True)
        if not isinstance(integral, bool):
            raise ConfigError(f"{where}: integral must be a boolean")
        cfg.points.append(PointSpec(name, _rat(p.get("x"), f"{where} x"), _rat(p.get("y"), f"{where} y"), coords, mw, integral))
    mw = _table(doc, "mw", required=False)
    _check_keys(mw, {"generators"}, "[mw]")
    cfg.generators = _names(mw.get("generators"), "[mw] generators")
    locus = _table(doc, "locus", required=False)
    _check_keys(locus, {"rank1_points", "rank2_base", "h2_variant", "torsion", "T", "height_scale", "tolerance"}, "[locus]")
    cfg.rank1_points = _names(locus.get("rank1_points"), "[locus] rank1_points")
    cfg.rank2_base = _names(locus.get("rank2_base"), "[locus] rank2_base")
    if "h2_variant" in locus:
        cfg.h2_variant = _str(locus["h2_variant"], "[locus] h2_variant")
        if cfg.h2_variant not in H2_VARIANTS:
            raise ConfigError(f"[locus] h2_variant must be one of {H2_VARIANTS}")
    cfg.torsion = _names(locus.get("torsion"), "[locus] torsion")
    T = locus.get("T", [])
    if not isinstance(T, list):
        raise ConfigError("[locus] T must be a list of log combinations")
    for i, elt in enumerate(T):
        if not isinstance(elt, list):
            raise ConfigError(f"[locus] T[{i}] must be a list of [coefficient, base] pairs")
        terms = []
        for term in elt:
            if not isinstance(term, list) or len(term) != 2:
                raise ConfigError(f"[locus] T[{i}]: each term is [coefficient, base]")
            base = _int(term[1], f"[locus] T[{i}] base")
            if base < 2:
                raise ConfigError(f"[locus] T[{i}]: log base must be an integer >= 2")
            terms.append(LogTerm(_rat(term[0], f"[locus] T[{i}] coefficient"), base))
        cfg.T.append(terms)
    if "height_scale" in locus:
        cfg.height_scale = _rat(locus["height_scale"], "[locus] height_scale")
    if "tolerance" in locus:
        cfg.tolerance = _int(locus["tolerance"], "[locus] tolerance")
    local = _table(doc, "local", required=False)
    _check_keys(local, {"tamagawa", "gamma"}, "[local]")
    cfg.tamagawa = _int(local.get("tamagawa", 1), "[local] tamagawa")
    for i, g in enumerate(local.get("gamma", [])):
        if not isinstance(g, dict):
            raise ConfigError(f"[local] gamma[{i}] must be a table")
        _check_keys(g, {"prime", "m", "n"}, f"[local] gamma[{i}]")
        spec = GammaSpec(_int(g.get("prime"), "gamma prime"), _int(g.get("m"), "gamma m"), _int(g.get("n"), "gamma n"))
        if spec.n <= 0 or not 0 <= spec.m < spec.n:
            raise ConfigError(f"[local] gamma[{i}]: need 0 <= m < n")
        cfg.gamma.append(spec)
    integ = _table(doc, "integrals", required=False)
    _check_keys(integ, {"depth", "delta"}, "[integrals]")
    cfg.depth = _int(integ.get("depth", 3), "[integrals] depth")
    if cfg.depth not in (1, 2, 3):
        raise ConfigError("[integrals] depth must be 1, 2 or 3")
    cfg.delta = _str(integ.get("delta", "cubic"), "[integrals] delta")
    if cfg.delta not in ("cubic", "weierstrass"):
        raise ConfigError("[integrals] delta must be 'cubic' or 'weierstrass'")
    _validate_references(cfg)
    return cfg


def _validate_references(cfg: RunConfig):
    names = {p.name for p in cfg.points}
    for group, label in ((cfg.generators, "generators"), (cfg.rank1_points, "rank1_points"),
                         (cfg.rank2_base, "rank2_base"), (cfg.torsion, "torsion")):
        for n in group:
            if n not in names:
                raise ConfigError(f"{label} refers to unknown point {n!r}")


def loads(text: str) -> RunConfig:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}") from exc
    return from_dict(doc)


def load(path) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            text = fh.read().decode("utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return loads(text)


# ---------------------------------------------------------------------------
# emitting


def _q(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f'"{v.numerator}/{v.denominator}"'


def _s(v: str) -> str:
    return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _list(items) -> str:
    return "[" + ", ".join(items) + "]"


def dumps(cfg: RunConfig) -> str:
    out = ["[curve]", f"label = {_s(cfg.label)}", f"ainvs = {_list(str(a) for a in cfg.ainvs)}", f"model = {_s(cfg.model)}", ""]
    out += ["[run]", f"prime = {cfg.prime}", f"precision = {cfg.precision}", f"rank = {cfg.rank}", f"jobs = {cfg.jobs}", ""]
    out += ["[integrals]", f"depth = {cfg.depth}", f"delta = {_s(cfg.delta)}", ""]
    out += ["[mw]", f"generators = {_list(_s(n) for n in cfg.generators)}", ""]
    out += ["[locus]"]
    out.append(f"rank1_points = {_list(_s(n) for n in cfg.rank1_points)}")
    out.append(f"rank2_base = {_list(_s(n) for n in cfg.rank2_base)}")
    if cfg.h2_variant is not None:
        out.append(f"h2_variant = {_s(cfg.h2_variant)}")
    out.append(f"torsion = {_list(_s(n) for n in cfg.torsion)}")
    out.append("T = " + _list(_list(_list([_q(t.coefficient), str(t.base)]) for t in elt) for elt in cfg.T))
    out.append(f"height_scale = {_q(cfg.height_scale)}")
    if cfg.tolerance is not None:
        out.append(f"tolerance = {cfg.tolerance}")
    out += ["", "[local]", f"tamagawa = {cfg.tamagawa}"]
    for g in cfg.gamma:
        out += ["", "[[local.gamma]]", f"prime = {g.prime}", f"m = {g.m}", f"n = {g.n}"]
    for p in cfg.points:
        out += ["", "[[points]]", f"name = {_s(p.name)}", f"x = {_q(p.x)}", f"y = {_q(p.y)}", f"coords = {_s(p.coords)}"]
        if p.mw is not None:
            out.append(f"mw = {_list(str(a) for a in p.mw)}")
        out.append(f"integral = {'true' if p.integral else 'false'}")
    return "\n".join(out) + "\n"
