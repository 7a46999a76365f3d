"""Locally constant potentials, past-tail reduction, coboundaries, and sums.

A potential value depends on finitely many past coordinates (y_{p-1} .. y_0)
and future coordinates (x_0 .. x_{q-1}). Window keys are single tuples
(y_{p-1}, ..., y_0, x_0, ..., x_{q-1}); read left to right every adjacent
pair must be an allowed two-letter word, so keys are exactly the allowed
(p+q)-words.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .symbolic_core import (
    EventuallyPeriodicPoint,
    PairedPoint,
    SubshiftSystem,
    Word,
    allowed_words,
    window,
)


def _as_fraction(v) -> Fraction:
    if isinstance(v, float):
        raise TypeError("potential tables are exact; pass Fraction/int/str")
    return Fraction(v)


@dataclass(frozen=True)
class LocallyConstantPotential:
    """Rational-valued table on allowed (past_depth + future_depth)-windows."""

    system: SubshiftSystem
    past_depth: int
    future_depth: int
    table: Mapping[Word, Fraction]

    def __post_init__(self) -> None:
        if self.past_depth < 1 or self.future_depth < 1:
            raise ValueError("depths must be >= 1")
        keys = allowed_words(self.system, self.past_depth + self.future_depth)
        given = {tuple(k): _as_fraction(v) for k, v in self.table.items()}
        extra = set(given) - set(keys)
        if extra:
            raise ValueError(f"windows not allowed by the transition matrix: {sorted(extra)[:3]}")
        full = {k: given.get(k, Fraction(0)) for k in keys}
        object.__setattr__(self, "table", full)

    def value(self, key: Word) -> Fraction:
        return self.table[tuple(key)]

    def scale(self, factor: Fraction) -> "LocallyConstantPotential":
        f = Fraction(factor)
        return LocallyConstantPotential(
            self.system, self.past_depth, self.future_depth,
            {k: f * v for k, v in self.table.items()},
        )

    def oscillation(self) -> Fraction:
        vals = list(self.table.values())
        return max(vals) - min(vals) if vals else Fraction(0)


def constant_potential(system: SubshiftSystem, value, past_depth: int = 1, future_depth: int = 1) -> LocallyConstantPotential:
    v = _as_fraction(value)
    keys = allowed_words(system, past_depth + future_depth)
    return LocallyConstantPotential(system, past_depth, future_depth, {k: v for k in keys})


def evaluate(A: LocallyConstantPotential, pt: PairedPoint) -> Fraction:
    """Table value at the point's window.

    The past contributes its first past_depth symbols in reversed order
    (deepest first), the future its first future_depth symbols.
    """
    p, q = A.past_depth, A.future_depth
    past_part = tuple(pt.past.symbol(j) for j in range(p - 1, -1, -1))
    future_part = pt.future.symbols(q)
    return A.value(past_part + future_part)


@dataclass(frozen=True)
class ReducedPotential:
    """Edge weights obtained by maximizing the potential over past tails.

    edge_table keys are allowed (1 + future_depth)-words (y_0, x_0 .. x_{q-1});
    argmax_tails records every tail (y_{p-1} .. y_1) attaining the maximum.
    """

    system: SubshiftSystem
    future_depth: int
    edge_table: Mapping[Word, Fraction]
    argmax_tails: Mapping[Word, frozenset[Word]]

    def value(self, key: Word) -> Fraction:
        return self.edge_table[tuple(key)]


def reduce_past(A: LocallyConstantPotential) -> ReducedPotential:
    """Collapse past tails by per-window maximization.

    Lossless for path/cycle optimization because the tail at each step of a
    prepend path is a free choice, independent of every other step.
    """
    p, q = A.past_depth, A.future_depth
    edge_table: dict[Word, Fraction] = {}
    arg: dict[Word, list[Word]] = {}
    for full, v in A.table.items():
        key, tail = full[p - 1:], full[: p - 1]
        if key not in edge_table or v > edge_table[key]:
            edge_table[key] = v
            arg[key] = [tail]
        elif v == edge_table[key]:
            arg[key].append(tail)
    # every symbol has an allowed predecessor, so every allowed (1+q)-word
    # extends to a full window and is present
    tails = {k: frozenset(ts) for k, ts in arg.items()}
    return ReducedPotential(A.system, q, edge_table, tails)


def as_potential(reduced: ReducedPotential) -> LocallyConstantPotential:
    """View a reduced table as a potential with past depth 1 (exact for p = 1)."""
    return LocallyConstantPotential(
        reduced.system, 1, reduced.future_depth, dict(reduced.edge_table)
    )


def _as_word_table(f, q_hint: int | None = None) -> tuple[dict[Word, Fraction], int]:
    """Accept either a mapping word -> value or a graph-aligned node function."""
    graph = getattr(f, "graph", None)
    if graph is not None:
        values = f.values
        return {graph.nodes[i]: Fraction(values[i]) for i in range(len(graph.nodes))}, graph.q
    table = {tuple(k): _as_fraction(v) for k, v in dict(f).items()}
    if not table:
        raise ValueError("empty word table")
    qs = {len(k) for k in table}
    if len(qs) != 1:
        raise ValueError("word table keys must share one length")
    q = qs.pop()
    if q_hint is not None and q != q_hint:
        raise ValueError(f"expected words of length {q_hint}, got {q}")
    return table, q


def coboundary_modify(A: LocallyConstantPotential, f, const) -> LocallyConstantPotential:
    """Add the coboundary of a depth-q word function plus a constant.

    The new table satisfies, at every paired point,
    new(pt) = A(pt) + f(future window) - f(prepended future window) + const,
    where the prepended window starts with the past's first symbol.
    """
    q = A.future_depth
    ftable, fq = _as_word_table(f, q)
    if fq != q:
        raise ValueError("word function depth must equal the potential future depth")
    a = _as_fraction(const)
    p = A.past_depth
    table = {}
    for key, v in A.table.items():
        future = key[p:]
        shifted = (key[p - 1],) + future[: q - 1]
        table[key] = v + ftable[future] - ftable[shifted] + a
    return LocallyConstantPotential(A.system, p, q, table)


def holder_bound(A: LocallyConstantPotential, theta, system: SubshiftSystem | None = None) -> Fraction:
    """A constant C with |A(u) - A(v)| <= C * d(u, v)**theta for all point pairs.

    Two paired points whose windows differ are at distance at least
    lambda**(max(p, q) - 1) in the max(past, future) metric, and
    2(p-1) + (q-1) dominates that exponent, so dividing the table oscillation
    by lambda**(2(p-1)+(q-1)) (rounded up when theta is fractional) is sound.
    """
    theta = Fraction(theta)
    if not (0 < theta <= 1):
        raise ValueError("theta must lie in (0, 1]")
    system = system or A.system
    osc = A.oscillation()
    if osc == 0:
        return Fraction(0)
    exponent = theta * (2 * (A.past_depth - 1) + (A.future_depth - 1))
    return osc / system.metric_lambda ** math.ceil(exponent)


def birkhoff_sum(f, x: EventuallyPeriodicPoint, k: int) -> Fraction:
    """Sum of f over the first k forward windows of x; k = 0 gives 0."""
    if k < 0:
        raise ValueError("k must be >= 0")
    table, q = _as_word_table(f)
    total = Fraction(0)
    for j in range(k):
        total += table[window(x, j, q)]
    return total


def pad_potential(A: LocallyConstantPotential, past_depth: int, future_depth: int) -> LocallyConstantPotential:
    """Re-express A on deeper windows; values are read off a contiguous slice."""
    p, q = A.past_depth, A.future_depth
    if past_depth < p or future_depth < q:
        raise ValueError("padding cannot reduce depth")
    if (past_depth, future_depth) == (p, q):
        return A
    table = {}
    for key in allowed_words(A.system, past_depth + future_depth):
        table[key] = A.table[key[past_depth - p: past_depth + q]]
    return LocallyConstantPotential(A.system, past_depth, future_depth, table)


def combine(terms: list[tuple[Fraction, LocallyConstantPotential]]) -> LocallyConstantPotential:
    """Exact linear combination of potentials on one system, padded as needed."""
    if not terms:
        raise ValueError("need at least one term")
    system = terms[0][1].system
    if any(t.system != system for _, t in terms):
        raise ValueError("terms must share a system")
    P = max(t.past_depth for _, t in terms)
    Q = max(t.future_depth for _, t in terms)
    padded = [(Fraction(c), pad_potential(t, P, Q)) for c, t in terms]
    keys = allowed_words(system, P + Q)
    table = {k: sum((c * t.table[k] for c, t in padded), Fraction(0)) for k in keys}
    return LocallyConstantPotential(system, P, Q, table)


@dataclass(frozen=True)
class ConstraintSpec:
    """Moment constraints: component potentials with a target or a multiplier."""

    components: tuple[LocallyConstantPotential, ...]
    target: tuple[Fraction, ...] | None = None
    multiplier: tuple[Fraction, ...] | None = None

    def __post_init__(self) -> None:
        comps = tuple(self.components)
        if not comps:
            raise ValueError("need at least one constraint component")
        system = comps[0].system
        if any(c.system != system for c in comps):
            raise ValueError("components must share a system")
        object.__setattr__(self, "components", comps)
        for name in ("target", "multiplier"):
            vec = getattr(self, name)
            if vec is not None:
                vec = tuple(_as_fraction(v) for v in vec)
                if len(vec) != len(comps):
                    raise ValueError(f"{name} length must match component count")
                object.__setattr__(self, name, vec)

    @property
    def system(self) -> SubshiftSystem:
        return self.components[0].system

    def common_depth(self) -> tuple[int, int]:
        return (
            max(c.past_depth for c in self.components),
            max(c.future_depth for c in self.components),
        )
