"""Shared systems and helpers for the test suite."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from ergopt.symbolic_core import SubshiftSystem


def full_shift(r: int = 2) -> SubshiftSystem:
    row = tuple([1] * r)
    return SubshiftSystem(r, tuple([row] * r))


def golden_mean() -> SubshiftSystem:
    # Symbol 0 may precede anything; the word (1, 1) is forbidden.
    return SubshiftSystem(2, ((1, 1), (1, 0)))


def swap_system() -> SubshiftSystem:
    return SubshiftSystem(2, ((0, 1), (1, 0)))


def reducible_system() -> SubshiftSystem:
    return SubshiftSystem(2, ((1, 1), (0, 1)))


def random_system(rng: random.Random, r: int, require_transitive: bool = False) -> SubshiftSystem:
    """Random 0/1 matrix with no dead rows or columns."""
    while True:
        rows = tuple(
            tuple(1 if rng.random() < 0.7 else 0 for _ in range(r)) for _ in range(r)
        )
        if any(not any(row) for row in rows):
            continue
        if any(not any(row[j] for row in rows) for j in range(r)):
            continue
        system = SubshiftSystem(r, rows)
        if require_transitive:
            from ergopt.symbolic_core import classify_transitivity

            if classify_transitivity(system).kind == "reducible":
                continue
        return system


def random_fraction(rng: random.Random, lo: int = -20, hi: int = 20, max_den: int = 10) -> Fraction:
    return Fraction(rng.randint(lo, hi), rng.randint(1, max_den))


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20260814)


# Small named weight patterns used across the suite (full 2-shift, depth 1).


def _pattern(table: dict[tuple[int, ...], int | Fraction]):
    from ergopt.graph_engine import build_prepend_graph
    from ergopt.potential_model import LocallyConstantPotential

    system = full_shift()
    A = LocallyConstantPotential(system, 1, 1, {k: Fraction(v) for k, v in table.items()})
    return build_prepend_graph(system, A)


def f1_graph():
    """Unit weight on the loop at 1, zero elsewhere."""
    return _pattern({(1, 1): 1})


def f3_graph(value: int = 5):
    """Constant weights."""
    return _pattern({(0, 0): value, (0, 1): value, (1, 0): value, (1, 1): value})


def f5_graph():
    """Unit weights on both loops: two critical classes."""
    return _pattern({(0, 0): 1, (1, 1): 1})


def f6_graph():
    """Weight 2 on the edge prepending 1 onto 0, weight 1 on the loop at 1."""
    return _pattern({(1, 0): 2, (1, 1): 1})


def random_graph(rng: random.Random, r: int, q: int, max_den: int = 10, p: int = 1,
                 require_transitive: bool = False):
    from ergopt.graph_engine import build_prepend_graph
    from ergopt.potential_model import LocallyConstantPotential
    from ergopt.symbolic_core import allowed_words

    system = random_system(rng, r, require_transitive=require_transitive)
    table = {
        k: random_fraction(rng, max_den=max_den)
        for k in allowed_words(system, p + q)
    }
    A = LocallyConstantPotential(system, p, q, table)
    return build_prepend_graph(system, A)
