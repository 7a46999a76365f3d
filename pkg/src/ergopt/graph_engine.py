"""The prepend graph of a reduced potential and its exact cycle algorithms.

Nodes are allowed future windows of length q. Prepending symbol s onto the
window w = (x_0 .. x_{q-1}) moves along the edge w -> (s, x_0 .. x_{q-2})
whose key is the allowed (q+1)-word (s,) + w and whose weight is the reduced
potential value there. All arithmetic is exact; criticality is an equality
predicate on rationals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

from .errors import NegativeCycle
from .potential_model import (
    LocallyConstantPotential,
    ReducedPotential,
    as_potential,
    reduce_past,
)
from .symbolic_core import SubshiftSystem, Word, allowed_words


@dataclass(frozen=True)
class Edge:
    index: int
    src: int
    tgt: int
    symbol: int
    weight: Fraction
    key: Word


@dataclass(frozen=True)
class PrependGraph:
    system: SubshiftSystem
    q: int
    nodes: tuple[Word, ...]
    edges: tuple[Edge, ...]
    reduced: ReducedPotential
    potential: LocallyConstantPotential

    @cached_property
    def node_index(self) -> dict[Word, int]:
        return {w: i for i, w in enumerate(self.nodes)}

    @cached_property
    def _out(self) -> tuple[tuple[Edge, ...], ...]:
        lists: list[list[Edge]] = [[] for _ in self.nodes]
        for e in self.edges:
            lists[e.src].append(e)
        return tuple(tuple(sorted(l, key=lambda e: e.symbol)) for l in lists)

    @cached_property
    def _by_key(self) -> dict[Word, Edge]:
        return {e.key: e for e in self.edges}

    def out_edges(self, src: int) -> tuple[Edge, ...]:
        return self._out[src]

    def edge_by_key(self, key: Word) -> Edge:
        try:
            return self._by_key[tuple(key)]
        except KeyError:
            raise KeyError(f"no edge with key {key}") from None


def build_prepend_graph(
    system: SubshiftSystem,
    weights: ReducedPotential | LocallyConstantPotential,
) -> PrependGraph:
    """Assemble the depth-q graph from a potential or its reduction."""
    if isinstance(weights, LocallyConstantPotential):
        potential = weights
        reduced = reduce_past(weights)
    else:
        reduced = weights
        potential = as_potential(weights)
    q = reduced.future_depth
    nodes = tuple(allowed_words(system, q))
    index = {w: i for i, w in enumerate(nodes)}
    edges = []
    for w in nodes:
        for s in system.symbols():
            if not system.allows(s, w[0]):
                continue
            key = (s,) + w
            tgt = key[:q]
            edges.append(
                Edge(len(edges), index[w], index[tgt], s, reduced.value(key), key)
            )
    graph = PrependGraph(system, q, nodes, tuple(edges), reduced, potential)
    out_count = [0] * len(nodes)
    in_count = [0] * len(nodes)
    for e in edges:
        out_count[e.src] += 1
        in_count[e.tgt] += 1
    if any(c == 0 for c in out_count) or any(c == 0 for c in in_count):
        raise AssertionError("prepend graph must have no sources or sinks")
    return graph


# ---------------------------------------------------------------------------
# max mean cycle (Karp)


@dataclass(frozen=True)
class BetaResult:
    beta: Fraction
    witness_cycle: tuple[Edge, ...]
    method: str


def _karp_value(graph: PrependGraph) -> Fraction:
    """Maximum cycle mean by Karp's dynamic program.

    d[k][v] is the best weight of a k-edge walk ending at v, starting anywhere
    (the usual super-source with zero-weight entry edges).
    """
    n = len(graph.nodes)
    d = [[Fraction(0)] * n]
    for k in range(1, n + 1):
        row: list[Fraction | None] = [None] * n
        prev = d[k - 1]
        for e in graph.edges:
            cand = prev[e.src] + e.weight
            if row[e.tgt] is None or cand > row[e.tgt]:
                row[e.tgt] = cand
        d.append(row)  # type: ignore[arg-type]
    best: Fraction | None = None
    for v in range(n):
        inner = min(
            (d[n][v] - d[k][v]) / (n - k) for k in range(n)
        )
        if best is None or inner > best:
            best = inner
    assert best is not None
    return best


def bellman_potentials(graph: PrependGraph, beta: Fraction) -> list[Fraction]:
    """Least-cost-to-reach values h for costs beta - weight, from a super-source.

    After convergence every edge has nonnegative reduced cost
    (beta - weight) + h(src) - h(tgt), with equality exactly on the edges of
    mean-beta cycles and of least-cost paths. Raises NegativeCycle if beta is
    below the true maximum mean.
    """
    n = len(graph.nodes)
    h = [Fraction(0)] * n
    for _ in range(n):
        changed = False
        for e in graph.edges:
            cand = h[e.src] + beta - e.weight
            if cand < h[e.tgt]:
                h[e.tgt] = cand
                changed = True
        if not changed:
            break
    else:
        for e in graph.edges:
            if h[e.src] + beta - e.weight < h[e.tgt]:
                raise NegativeCycle("costs beta - weight admit a negative cycle")
    return h


def tight_edges(graph: PrependGraph, beta: Fraction, h: Sequence[Fraction]) -> list[Edge]:
    return [
        e
        for e in graph.edges
        if (beta - e.weight) + h[e.src] - h[e.tgt] == 0
    ]


def _minimal_cycle(graph: PrependGraph, edge_pool: list[Edge]) -> tuple[Edge, ...]:
    """Shortest cycle in the pool; ties broken by smallest node sequence.

    Searches lengths 1, 2, ... and start nodes in ascending order, extending
    paths only through nodes larger than the start with edges in ascending
    target order, so the first hit is the canonical representative.
    """
    n = len(graph.nodes)
    out: dict[int, list[Edge]] = {}
    for e in sorted(edge_pool, key=lambda e: (e.tgt, e.symbol)):
        out.setdefault(e.src, []).append(e)
    for length in range(1, n + 1):
        for start in range(n):
            found = _cycle_dfs(out, start, start, length, [start], [])
            if found is not None:
                return tuple(found)
    raise AssertionError("edge pool contains no cycle")


def _cycle_dfs(
    out: dict[int, list[Edge]],
    start: int,
    current: int,
    remaining: int,
    visited: list[int],
    path: list[Edge],
) -> list[Edge] | None:
    for e in out.get(current, []):
        if remaining == 1:
            if e.tgt == start:
                return path + [e]
            continue
        if e.tgt <= start or e.tgt in visited:
            continue
        found = _cycle_dfs(out, start, e.tgt, remaining - 1, visited + [e.tgt], path + [e])
        if found is not None:
            return found
    return None


def max_mean_cycle(graph: PrependGraph) -> BetaResult:
    """Karp's algorithm with a canonical witness cycle of mean exactly beta."""
    beta = _karp_value(graph)
    h = bellman_potentials(graph, beta)
    witness = _minimal_cycle(graph, tight_edges(graph, beta, h))
    total = sum((e.weight for e in witness), Fraction(0))
    assert total / len(witness) == beta
    return BetaResult(beta, witness, "karp")


def certificate_subaction(graph: PrependGraph, beta: Fraction) -> list[Fraction]:
    """Node values u with weight + u(src) - u(tgt) <= beta on every edge."""
    return [-v for v in bellman_potentials(graph, beta)]


# ---------------------------------------------------------------------------
# parametric route (independent of Karp)


def _negative_cycle(graph: PrependGraph, b: Fraction) -> tuple[Edge, ...] | None:
    """A cycle with mean above b, found by Bellman-Ford predecessor walking."""
    n = len(graph.nodes)
    dist = [Fraction(0)] * n
    pred: list[Edge | None] = [None] * n
    marked = None
    for round_ in range(n + 1):
        changed = False
        for e in graph.edges:
            cand = dist[e.src] + b - e.weight
            if cand < dist[e.tgt]:
                dist[e.tgt] = cand
                pred[e.tgt] = e
                changed = True
                if round_ == n:
                    marked = e.tgt
        if not changed:
            return None
    assert marked is not None
    # walk predecessors n times to land inside the cycle, then collect it
    v = marked
    for _ in range(n):
        v = pred[v].src  # type: ignore[union-attr]
    cycle = []
    u = v
    while True:
        e = pred[u]
        assert e is not None
        cycle.append(e)
        u = e.src
        if u == v:
            break
    cycle.reverse()
    return tuple(cycle)


def parametric_beta(graph: PrependGraph) -> Fraction:
    """Least b whose costs b - weight admit no negative cycle.

    Exact cycle-improvement: start from the mean of an arbitrary cycle, and
    while some cycle beats the current candidate replace the candidate by that
    cycle's mean. Means strictly increase through a finite set, so this
    terminates; the final value is certified by the no-negative-cycle check
    together with the cycle that attained it.
    """
    # find any cycle by following first out-edges
    first_out: dict[int, Edge] = {}
    for e in sorted(graph.edges, key=lambda e: (e.src, e.symbol)):
        first_out.setdefault(e.src, e)
    seen: dict[int, int] = {}
    path = []
    v = 0
    while v not in seen:
        seen[v] = len(path)
        path.append(first_out[v])
        v = first_out[v].tgt
    cycle = path[seen[v]:]
    b = sum((e.weight for e in cycle), Fraction(0)) / len(cycle)
    while True:
        better = _negative_cycle(graph, b)
        if better is None:
            return b
        mean = sum((e.weight for e in better), Fraction(0)) / len(better)
        assert mean > b
        b = mean


# ---------------------------------------------------------------------------
# all-pairs least path costs and the critical structure


@dataclass(frozen=True)
class ManeMatrix:
    """Minimum cost of a nonempty path between node pairs, costs beta - weight.

    None encodes an unreachable pair (possible only off strongly connected
    graphs).
    """

    beta: Fraction
    phi: tuple[tuple[Fraction | None, ...], ...]

    def value(self, src: int, tgt: int) -> Fraction | None:
        return self.phi[src][tgt]


def min_cost_all_pairs(graph: PrependGraph, beta: Fraction) -> ManeMatrix:
    """Floyd-Warshall over nonempty paths; diagonal entries stay path costs."""
    n = len(graph.nodes)
    INF = None
    phi: list[list[Fraction | None]] = [[INF] * n for _ in range(n)]
    for e in graph.edges:
        c = beta - e.weight
        cur = phi[e.src][e.tgt]
        if cur is None or c < cur:
            phi[e.src][e.tgt] = c
    for k in range(n):
        pk = phi[k]
        for i in range(n):
            ik = phi[i][k]
            if ik is None:
                continue
            row = phi[i]
            for j in range(n):
                kj = pk[j]
                if kj is None:
                    continue
                cand = ik + kj
                if row[j] is None or cand < row[j]:
                    row[j] = cand
    for v in range(n):
        d = phi[v][v]
        if d is not None and d < 0:
            raise NegativeCycle(f"node {graph.nodes[v]} lies on a cycle of mean above beta")
    return ManeMatrix(beta, tuple(tuple(row) for row in phi))


@dataclass(frozen=True)
class CriticalStructure:
    beta: Fraction
    critical_nodes: frozenset[int]
    critical_edges: frozenset[int]
    classes: tuple[tuple[int, ...], ...]  # each sorted; ordered by first node

    def node_class(self, v: int) -> int | None:
        for i, cls in enumerate(self.classes):
            if v in cls:
                return i
        return None

    def anchors(self) -> tuple[int, ...]:
        return tuple(cls[0] for cls in self.classes)


def _scc(n: int, adj: dict[int, list[int]]) -> list[list[int]]:
    """Tarjan strongly connected components (iterative)."""
    index = [0]
    low = {}
    disc = {}
    stack: list[int] = []
    on_stack: set[int] = set()
    out: list[list[int]] = []

    for root in range(n):
        if root in disc:
            continue
        work = [(root, iter(adj.get(root, [])))]
        disc[root] = low[root] = index[0]
        index[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in disc:
                    disc[w] = low[w] = index[0]
                    index[0] += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(adj.get(w, []))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], disc[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == disc[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
    return out


def critical_structure(graph: PrependGraph, beta: Fraction) -> CriticalStructure:
    """Nodes/edges on mean-beta cycles, grouped into strongly connected classes."""
    mane = min_cost_all_pairs(graph, beta)
    nodes = frozenset(v for v in range(len(graph.nodes)) if mane.value(v, v) == 0)
    edge_ids = []
    for e in graph.edges:
        back = mane.value(e.tgt, e.src)
        if back is not None and (beta - e.weight) + back == 0:
            edge_ids.append(e.index)
    adj: dict[int, list[int]] = {}
    for i in edge_ids:
        e = graph.edges[i]
        adj.setdefault(e.src, []).append(e.tgt)
    comps = _scc(len(graph.nodes), adj)
    classes = sorted(
        (tuple(sorted(c)) for c in comps if any(v in nodes for v in c)),
        key=lambda c: c[0],
    )
    # a critical node always sits in a class with at least one of its cycles
    assert all(any(v in cls for cls in classes) for v in nodes)
    return CriticalStructure(beta, nodes, frozenset(edge_ids), tuple(classes))
