"""Shared fixtures-by-function for the test modules (cached, deterministic)."""

from __future__ import annotations

import functools
import itertools
import random

from cubic_chabauty import config as cfgmod
from cubic_chabauty.cli import build, bundled_config_path
from cubic_chabauty.coleman import ColemanEngine
from cubic_chabauty.curve import complete_square
from cubic_chabauty.padic import PadicNumber, hensel_sqrt
from cubic_chabauty.polylog import PolylogEvaluator

# Results of the acceptance checks, printed by conftest at the end of the run.
ACCEPTANCE: dict[int, str] = {}

CURVES = {
    # label: (ainvs, prime, model)
    "36.a4": ([0, 0, 0, 0, 1], 7, "plain"),
    "37.a1": ([0, 0, 1, -1, 0], 7, "b"),
    "389.a1": ([0, 1, 1, -2, 0], 5, "c"),
    "433.a1": ([1, 0, 0, 0, 1], 3, "b"),
}


@functools.lru_cache(maxsize=None)
def model(label: str):
    ainvs, p, kind = CURVES[label]
    return complete_square(ainvs, p, kind, label)


@functools.lru_cache(maxsize=None)
def engine(label: str, prec: int) -> ColemanEngine:
    return ColemanEngine(model(label), prec)


@functools.lru_cache(maxsize=None)
def evaluator(label: str, prec: int) -> PolylogEvaluator:
    return PolylogEvaluator(model(label), prec, engine=engine(label, prec))


@functools.lru_cache(maxsize=None)
def bundled(label: str):
    cfg = cfgmod.load(bundled_config_path(label))
    return cfg, build(cfg)


def random_point(E, prec: int, rng: random.Random, residue=None):
    """A random Z_p-point of a generic residue disk (optionally a given one)."""
    p = E.prime
    while True:
        x = rng.randrange(p**prec)
        if residue is not None:
            x = residue[0] + p * rng.randrange(p ** (prec - 1))
        fx = E.f(x)
        if fx % p == 0 or pow(fx % p, (p - 1) // 2, p) != 1:
            if residue is not None:
                raise ValueError("residue disk is not generic")
            continue
        y = hensel_sqrt(PadicNumber.from_rational(fx, p, prec), None, prec)
        if residue is not None:
            if y.residue() != residue[1] % p:
                y = -y
        elif rng.random() < 0.5:
            y = -y
        return E.point(PadicNumber.from_rational(x, p, prec), y)


def shuffles(u: tuple, v: tuple):
    """The multiset of shuffles of two words."""
    n = len(u) + len(v)
    for pos in itertools.combinations(range(n), len(u)):
        w, iu, iv = [], iter(u), iter(v)
        for k in range(n):
            w.append(next(iu) if k in pos else next(iv))
        yield tuple(w)


def padic_close(a, b, digits: int) -> bool:
    return (a - b).add_bigoh(digits).is_zero()
