"""Command-line interface: ``cubic-chabauty <subcommand> --config run.toml``.

Exit status: 0 success, 2 configuration error, 3 unsupported input,
4 precision exhaustion.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, replace
from fractions import Fraction
from importlib import resources
from typing import Any

from . import config as cfgmod
from .coleman import ColemanEngine, odd_words
from .config import ConfigError, RunConfig
from .curve import CurveModel, CurvePoint, UnsupportedCurveError, complete_square
from .heights import MordellWeilData
from .locus import (
    DegenerateError,
    LocusReport,
    RegisteredPoint,
    divisor_value,
    gl_relations,
    rank0_constant,
    rank0_locus,
    rank1_locus,
    rank2_locus_parallel,
)
from .padic import PadicError, PadicNumber, PrecisionError, format_padic, iwasawa_log
from .polylog import FUNCTIONS, PolylogEvaluator, b3_class
from .series import CapacityError

EXIT_OK, EXIT_CONFIG, EXIT_UNSUPPORTED, EXIT_PRECISION = 0, 2, 3, 4
SUBCOMMANDS = ("frobenius", "integrals", "functions", "locus", "gl-relations")
BUNDLED = {
    "36.a4": "36a4_p7.toml",
    "37.a1": "37a1_p7.toml",
    "389.a1": "389a1_p5.toml",
    "433.a1": "433a1_p3.toml",
}


def bundled_config_path(label: str) -> str:
    if label not in BUNDLED:
        raise ConfigError(f"no bundled config for {label!r}; choose from {sorted(BUNDLED)}")
    return str(resources.files("cubic_chabauty").joinpath("data", BUNDLED[label]))


# ---------------------------------------------------------------------------
# setup


@dataclass
class Context:
    cfg: RunConfig
    model: CurveModel
    points: dict[str, CurvePoint]
    ledger: dict

    def known_integral(self) -> list[CurvePoint]:
        out = []
        for spec in self.cfg.points:
            if spec.integral:
                P = self.points[spec.name]
                out += [P, -P]
        return out


def build(cfg: RunConfig) -> Context:
    model = complete_square(cfg.ainvs, cfg.prime, cfg.model, cfg.label)
    points = {}
    for spec in cfg.points:
        try:
            if spec.coords == "source":
                P = model.from_source(spec.x, spec.y)
            else:
                P = model.point(spec.x, spec.y)
        except ValueError as exc:
            raise ConfigError(f"point {spec.name}: {exc}") from exc
        points[spec.name] = P
    ledger = {"requested_precision": cfg.precision, "prime": cfg.prime, "model": repr(model)}
    return Context(cfg, model, points, ledger)


def _evaluator(ctx: Context) -> PolylogEvaluator:
    ev = PolylogEvaluator(ctx.model, ctx.cfg.precision, delta=ctx.cfg.delta)
    _note_engine(ctx, ev.engine)
    return ev


def _note_engine(ctx: Context, engine: ColemanEngine):
    ctx.ledger.update(
        {
            "ring_precision": engine.ring.prec,
            "ring_shift": engine.ring.shift,
            "disk_order": engine.disk_order,
            "frobenius_precision_loss": engine.frob.precision_loss,
        }
    )


# ---------------------------------------------------------------------------
# reports


def _num(x: Any):
    if isinstance(x, PadicNumber):
        return x.machine()
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _num(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_num(v) for v in x]
    return x


def _text_value(x: Any) -> str:
    if isinstance(x, PadicNumber):
        return format_padic(x)
    return str(x)


@dataclass
class Report:
    kind: str
    sections: list[tuple[str, list[tuple[str, Any]]]]
    ledger: dict
    locus: list[LocusReport] | None = None

    def text(self) -> str:
        lines = [f"# {self.kind}"]
        for title, rows in self.sections:
            lines.append(f"[{title}]")
            for key, val in rows:
                lines.append(f"  {key} = {_text_value(val)}")
        for rep in self.locus or []:
            lines.append(rep.to_text().rstrip("\n"))
        lines.append("[precision ledger]")
        for key in sorted(self.ledger):
            lines.append(f"  {key} = {self.ledger[key]}")
        return "\n".join(lines) + "\n"

    def machine(self) -> str:
        doc = {
            "kind": self.kind,
            "sections": [{"title": t, "values": {k: _num(v) for k, v in rows}} for t, rows in self.sections],
            "locus": [r.to_machine() for r in self.locus or []],
            "precision_ledger": _num(self.ledger),
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def run_frobenius(ctx: Context) -> Report:
    engine = ColemanEngine(ctx.model, ctx.cfg.precision)
    _note_engine(ctx, engine)
    M = engine.frob.M
    trace, det = engine.frob.charpoly()
    N = ctx.cfg.precision
    ap = ctx.model.a_p()
    p = ctx.model.prime
    rows = [(f"M[{i}][{j}]", M[i][j].add_bigoh(N)) for i in range(2) for j in range(2)]
    rows += [
        ("trace", trace.add_bigoh(N)),
        ("det", det.add_bigoh(N)),
        ("a_p (point count)", ap),
        ("trace == a_p", (trace - ap).add_bigoh(N).is_zero()),
        ("det == p", (det - p).add_bigoh(N).is_zero()),
    ]
    return Report("frobenius", [(ctx.model.label or "curve", rows)], ctx.ledger)


def _word_name(w) -> str:
    return "G_" + "".join(str(a) for a in w)


def run_integrals(ctx: Context) -> Report:
    engine = ColemanEngine(ctx.model, ctx.cfg.precision)
    _note_engine(ctx, engine)
    words = [w for w in odd_words(3) if len(w) <= ctx.cfg.depth]
    sections = []
    for spec in ctx.cfg.points:
        vals = engine.values_at(ctx.points[spec.name], words)
        sections.append((spec.name, [(_word_name(w), engine.to_padic(vals[w])) for w in words]))
    return Report("integrals", sections, ctx.ledger)


def run_functions(ctx: Context) -> Report:
    ev = _evaluator(ctx)
    sections = []
    for spec in ctx.cfg.points:
        v = ev.values(ctx.points[spec.name], FUNCTIONS)
        sections.append((spec.name, [(n, v[n]) for n in FUNCTIONS]))
    return Report("functions", sections, ctx.ledger)


def _t_values(cfg: RunConfig, p: int, N: int) -> list[PadicNumber]:
    out = []
    for elt in cfg.T:
        total = PadicNumber.zero(p, N)
        for term in elt:
            total = total + iwasawa_log(term.base, p, N) * term.coefficient
        out.append(total)
    return out


def _mw_data(ctx: Context) -> MordellWeilData:
    gens = tuple(ctx.points[n] for n in ctx.cfg.generators)
    if not gens:
        raise ConfigError("[mw] generators are required for this computation")
    mw = MordellWeilData(ctx.model, gens)
    for spec in ctx.cfg.points:
        if spec.mw is None:
            continue
        try:
            mw.register(spec.name, ctx.points[spec.name], spec.mw)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    return mw


def _h2_variant(cfg: RunConfig) -> str:
    if cfg.h2_variant is not None:
        return cfg.h2_variant
    if any(b3_class(g.m, g.n) != 0 for g in cfg.gamma):
        return "8"
    return "7"


def run_locus(ctx: Context) -> Report:
    cfg = ctx.cfg
    if cfg.rank == 0:
        ev = _evaluator(ctx)
        if not cfg.torsion:
            raise ConfigError("rank-0 locus needs [locus] torsion points to fix the constant c")
        c = rank0_constant(ev, [ctx.points[n] for n in cfg.torsion])
        T = _t_values(cfg, ctx.model.prime, cfg.precision)
        rep = rank0_locus(ev, T, c, ctx.known_integral(), cfg.height_scale, cfg.tolerance, cfg.label)
        if rep.unresolved:
            raise PrecisionError("rank-0 locus: roots not separated at precision")
        return Report("locus", [("rank 0", [("c", c), ("T", len(T))])], ctx.ledger, [rep])
    if cfg.rank == 1:
        if len(cfg.rank1_points) != 3:
            raise ConfigError("rank-1 locus needs three points in [locus] rank1_points")
        ev = _evaluator(ctx)
        z = [ctx.points[n] for n in cfg.rank1_points]
        reps = rank1_locus(ev, *z, known=ctx.known_integral(), label=cfg.label)
        return Report("locus", [], ctx.ledger, list(reps))
    variant = _h2_variant(cfg)
    need = {"5": 5, "7": 7, "8": 8}[variant]
    if len(cfg.rank2_base) < need:
        raise ConfigError(f"rank-2 locus (H2 variant {variant}) needs {need} points in [locus] rank2_base")
    mw = _mw_data(ctx)
    base = []
    for n in cfg.rank2_base:
        if n not in mw.points:
            raise ConfigError(f"rank-2 base point {n} needs Mordell-Weil coordinates")
        a, b = mw.coords(n)
        base.append(RegisteredPoint(ctx.points[n], a, b))
    ev = _evaluator(ctx)
    _check_linearity(ctx, ev, mw)
    rep = rank2_locus_parallel(ctx.model, cfg.precision, base, ctx.known_integral(), variant, jobs=cfg.jobs, label=cfg.label)
    return Report("locus", [("rank 2", [("H2 variant", variant)])], ctx.ledger, [rep])


def _check_linearity(ctx: Context, ev: PolylogEvaluator, mw: MordellWeilData):
    f1 = {n: ev.eval_polylog("f1", P) for n, (P, _) in mw.points.items()}
    gens = [ev.eval_polylog("f1", g) for g in mw.generators]
    bad = mw.check_linearity(f1, gens, ctx.cfg.precision - 2)
    if bad:
        raise ConfigError(f"Mordell-Weil coordinates fail the f1 linearity check for {bad}")


def run_gl(ctx: Context) -> Report:
    cfg = ctx.cfg
    coords = {s.name: s.mw for s in cfg.points if s.integral and s.mw is not None}
    if len(coords) < 7:
        raise ConfigError("gl-relations needs at least seven integral points with Mordell-Weil coordinates")
    if any(len(c) != 2 for c in coords.values()):
        raise ConfigError("gl-relations needs rank-2 coordinates (a, b)")
    rels = gl_relations(coords)
    ev = _evaluator(ctx)
    f3, f4 = {}, {}
    for n in coords:
        v = ev.values(ctx.points[n], ["f3", "f4"])
        f3[n], f4[n] = v["f3"], v["f4"]
    sections = []
    values = {}
    for name, rel in rels.items():
        d3, d4 = divisor_value(f3, rel), divisor_value(f4, rel)
        values[name] = (d3, d4)
        rel_text = " ".join(f"{c:+d}*{n}" for n, c in rel.items())
        sections.append((f"D({name})", [("divisor", rel_text), ("f3(D)", d3), ("f4(D)", d4)]))
    ratios = []
    names = list(values)
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            for k, label in ((0, "f3"), (1, "f4")):
                x, y = values[a][k], values[b][k]
                if not x.is_zero() and not y.is_zero():
                    ratios.append((f"{label}(D({a}))/{label}(D({b}))", x / y))
    if ratios:
        sections.append(("ratios", ratios))
    return Report("gl-relations", sections, ctx.ledger)


RUNNERS = {
    "frobenius": run_frobenius,
    "integrals": run_integrals,
    "functions": run_functions,
    "locus": run_locus,
    "gl-relations": run_gl,
}


def run(cfg: RunConfig, subcommand: str) -> Report:
    if subcommand not in RUNNERS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    return RUNNERS[subcommand](build(cfg))


# ---------------------------------------------------------------------------
# entry point


def parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cubic-chabauty", description="Depth-3 Chabauty-Kim computations on elliptic curves.")
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    src = ap.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="path to a TOML run configuration")
    src.add_argument("--example", choices=sorted(BUNDLED), help="use a bundled example configuration")
    ap.add_argument("--precision", type=int, help="override the working precision")
    ap.add_argument("--prime", type=int, help="override the prime")
    ap.add_argument("--output", choices=("text", "machine"), default="text")
    ap.add_argument("--jobs", type=int, help="worker processes for per-disk root finding")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = parser().parse_args(argv)
    ledger: dict = {}
    try:
        path = args.config if args.config else bundled_config_path(args.example)
        cfg = cfgmod.load(path)
        overrides = {}
        if args.precision is not None:
            overrides["precision"] = args.precision
        if args.prime is not None:
            overrides["prime"] = args.prime
        if args.jobs is not None:
            overrides["jobs"] = args.jobs
        if overrides:
            cfg = cfgmod.from_dict(_as_doc(replace(cfg, **overrides)))
        # seeded here so failures while building the model still report something
        ledger = {"requested_precision": cfg.precision, "prime": cfg.prime}
        ctx = build(cfg)
        ledger = ctx.ledger
        report = RUNNERS[args.subcommand](ctx)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "configuration error", exc, ledger)
    except (UnsupportedCurveError, DegenerateError) as exc:
        return _fail(EXIT_UNSUPPORTED, "unsupported input", exc, ledger)
    except (PrecisionError, CapacityError) as exc:
        return _fail(EXIT_PRECISION, "precision exhausted", exc, ledger)
    except PadicError as exc:
        return _fail(EXIT_PRECISION, "p-adic error", exc, ledger)
    sys.stdout.write(report.machine() if args.output == "machine" else report.text())
    return EXIT_OK


def _as_doc(cfg: RunConfig) -> dict:
    # re-validate overrides through the same schema path as files
    return cfgmod.tomllib.loads(cfgmod.dumps(cfg))


def _fail(code: int, what: str, exc: Exception, ledger: dict) -> int:
    sys.stderr.write(f"{what}: {exc}\n")
    if ledger:
        sys.stderr.write("precision ledger:\n")
        for key in sorted(ledger):
            sys.stderr.write(f"  {key} = {ledger[key]}\n")
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
