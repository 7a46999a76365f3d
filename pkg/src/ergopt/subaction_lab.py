"""Sub-actions on the prepend graph: verification, extremal constructions,
the discounted route to calibrated solutions, contact loci, and refinements.

A sub-action u satisfies weight + u(src) - u(tgt) <= beta on every edge.
Calibrated means u(V) = min over out-edges of (u(tgt) - weight + beta), the
Bellman fixed-point form. Verification predicates are exact; only the
discounted construction exposes a float view, and even that is solved in
exact arithmetic underneath.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import HypothesisFails, NonConvergence, NotSubaction, NotTransitive
from .graph_engine import Edge, PrependGraph, build_prepend_graph, max_mean_cycle
from .potential_model import pad_potential, reduce_past
from .symbolic_core import Word, classify_transitivity

EXACT = "exact"
FLOAT = "float"


@dataclass(frozen=True)
class NodeFunction:
    """Values indexed like graph.nodes; exact Fractions or floats."""

    graph: PrependGraph
    values: tuple
    mode: str = EXACT

    def __post_init__(self) -> None:
        if len(self.values) != len(self.graph.nodes):
            raise ValueError("one value per node required")
        if self.mode == EXACT:
            object.__setattr__(self, "values", tuple(Fraction(v) for v in self.values))
        elif self.mode == FLOAT:
            object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        else:
            raise ValueError(f"bad mode {self.mode!r}")

    def __getitem__(self, node: int):
        return self.values[node]

    def by_word(self, word: Word):
        return self.values[self.graph.node_index[tuple(word)]]

    def shifted(self, const) -> "NodeFunction":
        c = Fraction(const) if self.mode == EXACT else float(const)
        return NodeFunction(self.graph, tuple(v + c for v in self.values), self.mode)

    def normalized(self) -> "NodeFunction":
        """Subtract the maximum value."""
        return self.shifted(-max(self.values))

    def as_exact(self, max_denominator: int = 10**6) -> "NodeFunction":
        if self.mode == EXACT:
            return self
        vals = tuple(
            Fraction(v).limit_denominator(max_denominator) for v in self.values
        )
        return NodeFunction(self.graph, vals, EXACT)


def pointwise_max(u: NodeFunction, v: NodeFunction) -> NodeFunction:
    if u.graph is not v.graph:
        raise ValueError("node functions live on different graphs")
    return NodeFunction(u.graph, tuple(max(a, b) for a, b in zip(u.values, v.values)), u.mode)


def convex_combination(t, u: NodeFunction, v: NodeFunction) -> NodeFunction:
    if u.graph is not v.graph:
        raise ValueError("node functions live on different graphs")
    t = Fraction(t)
    if not (0 <= t <= 1):
        raise ValueError("t must lie in [0, 1]")
    vals = tuple(t * a + (1 - t) * b for a, b in zip(u.values, v.values))
    return NodeFunction(u.graph, vals, EXACT)


# ---------------------------------------------------------------------------
# verification predicates


def subaction_residual(
    u: NodeFunction, graph: PrependGraph, beta: Fraction
) -> tuple[Fraction, tuple[Edge, ...]]:
    """Worst edge slack and the edges violating the defining inequality."""
    slacks = [
        (e.weight + u[e.src] - u[e.tgt] - beta, e) for e in graph.edges
    ]
    worst = max(s for s, _ in slacks)
    violations = tuple(e for s, e in slacks if s > 0)
    return worst, violations


def is_subaction(u: NodeFunction, graph: PrependGraph, beta: Fraction) -> bool:
    return subaction_residual(u, graph, beta)[0] <= 0


def calibration_residual(u: NodeFunction, graph: PrependGraph, beta) -> Fraction | float:
    """Max over nodes of |u(V) - min over out-edges (u(tgt) - weight + beta)|."""
    exact = u.mode == EXACT
    beta = Fraction(beta) if exact else float(beta)
    worst = None
    for v in range(len(graph.nodes)):
        bell = min(
            u[e.tgt] - (e.weight if exact else float(e.weight)) + beta
            for e in graph.out_edges(v)
        )
        gap = abs(u[v] - bell)
        if worst is None or gap > worst:
            worst = gap
    assert worst is not None
    return worst


@dataclass(frozen=True)
class ContactLocus:
    """Edges where the sub-action inequality is tight."""

    edges: frozenset[int]


def contact_locus(u: NodeFunction, graph: PrependGraph, beta: Fraction) -> ContactLocus:
    worst, _ = subaction_residual(u, graph, beta)
    if worst > 0:
        raise NotSubaction(f"edge slack {worst} is positive")
    tight = frozenset(
        e.index for e in graph.edges if e.weight + u[e.src] - u[e.tgt] == beta
    )
    return ContactLocus(tight)


def contact_sources(locus: ContactLocus, graph: PrependGraph) -> frozenset[int]:
    """Nodes with at least one tight outgoing edge."""
    return frozenset(graph.edges[i].src for i in locus.edges)


def dual_value(u: NodeFunction, graph: PrependGraph) -> Fraction:
    """max over edges of weight + u(src) - u(tgt); at least beta for every u."""
    return max(e.weight + u[e.src] - u[e.tgt] for e in graph.edges)


# ---------------------------------------------------------------------------
# extremal constructions


def maximal_subaction(graph: PrependGraph, beta: Fraction) -> NodeFunction:
    """Largest nonpositive sub-action, u(V) = min(0, cheapest path cost from V).

    Costs are beta minus weight. Cycle costs are nonnegative, so the cheapest
    nonempty path is realized by a simple path or cycle, and the capped
    Bellman sweep from zero settles within node-count rounds.
    """
    n = len(graph.nodes)
    u = [Fraction(0)] * n
    for _ in range(n + 2):
        changed = False
        for v in range(n):
            best = min((beta - e.weight) + u[e.tgt] for e in graph.out_edges(v))
            best = min(Fraction(0), best)
            if best != u[v]:
                u[v] = best
                changed = True
        if not changed:
            break
    else:
        raise AssertionError("maximal sub-action iteration failed to settle")
    return NodeFunction(graph, tuple(u), EXACT)


# ---------------------------------------------------------------------------
# discounted construction


@dataclass(frozen=True)
class DiscountSchedule:
    rho_list: tuple[Fraction, ...] = field(
        default_factory=lambda: tuple(
            Fraction(2**k - 1, 2**k) for k in range(1, 31)
        )
    )
    inner_tolerance: float = 1e-12
    outer_stop: float = 1e-9

    def __post_init__(self) -> None:
        rhos = tuple(Fraction(r) for r in self.rho_list)
        if any(not (0 < r < 1) for r in rhos):
            raise ValueError("discounts must lie strictly inside (0, 1)")
        if list(rhos) != sorted(rhos):
            raise ValueError("discounts must increase")
        object.__setattr__(self, "rho_list", rhos)


def _policy_values(graph: PrependGraph, policy: list[Edge], rho: Fraction) -> list[Fraction]:
    """Exact values of a stationary policy: u(V) = rho * (u(next V) - weight)."""
    n = len(graph.nodes)
    values: list[Fraction | None] = [None] * n
    state = [0] * n  # 0 unvisited, 1 in progress, 2 done
    for start in range(n):
        if state[start] == 2:
            continue
        chain = []
        v = start
        while state[v] == 0:
            state[v] = 1
            chain.append(v)
            v = policy[v].tgt
        if state[v] == 1:
            # closed a new cycle: solve it in closed form
            cut = chain.index(v)
            cycle = chain[cut:]
            L = len(cycle)
            acc = Fraction(0)
            rp = Fraction(1)
            for node in cycle:
                rp *= rho
                acc += rp * policy[node].weight
            u0 = -acc / (1 - rho ** L)
            values[cycle[0]] = u0
            for node in reversed(cycle[1:]):
                nxt = policy[node].tgt
                values[node] = rho * (values[nxt] - policy[node].weight)  # type: ignore[operand-type]
            # fix the wrap: recompute cycle[0] from its successor for safety
            head = cycle[0]
            assert values[head] == rho * (values[policy[head].tgt] - policy[head].weight)
        # back-substitute the tail of the chain (tree part)
        for node in reversed(chain):
            if values[node] is None:
                nxt = policy[node].tgt
                values[node] = rho * (values[nxt] - policy[node].weight)  # type: ignore[operand-type]
            state[node] = 2
    return values  # type: ignore[return-value]


def _exact_discounted(graph: PrependGraph, rho: Fraction) -> list[Fraction]:
    """Fixed point of u(V) = rho * min over out-edges (u(tgt) - weight)."""
    policy: list[Edge] = [graph.out_edges(v)[0] for v in range(len(graph.nodes))]
    for _ in range(10 * len(graph.edges) + 10):
        values = _policy_values(graph, policy, rho)
        improved = False
        for v in range(len(graph.nodes)):
            current = values[policy[v].tgt] - policy[v].weight
            best_edge = policy[v]
            best = current
            for e in graph.out_edges(v):
                cand = values[e.tgt] - e.weight
                if cand < best:
                    best = cand
                    best_edge = e
            if best_edge is not policy[v] and best < current:
                policy[v] = best_edge
                improved = True
        if not improved:
            return values
    raise AssertionError("policy iteration failed to settle")


def discounted_fixed_point(graph: PrependGraph, rho, inner_tolerance: float = 1e-12) -> NodeFunction:
    """The unique discounted fixed point, reported in float mode.

    Solved exactly by policy iteration (the tolerance is a guard on the
    float view, trivially met).
    """
    rho = Fraction(rho)
    if not (0 < rho < 1):
        raise ValueError("rho must lie strictly inside (0, 1)")
    vals = _exact_discounted(graph, rho)
    return NodeFunction(graph, tuple(float(v) for v in vals), FLOAT)


def calibrated_via_discount(
    graph: PrependGraph, schedule: DiscountSchedule | None = None
) -> tuple[NodeFunction, float]:
    """Calibrated sub-action as the limit of normalized discounted solutions.

    Follows the schedule until successive normalized solutions differ by at
    most the outer stop, reconstructs rational values, and verifies exact
    calibration. Also returns a, the discounted estimate of beta.
    """
    schedule = schedule or DiscountSchedule()
    stop = Fraction(schedule.outer_stop).limit_denominator(10**15)
    prev_norm: list[Fraction] | None = None
    prev_pair: tuple[Fraction, Fraction] | None = None
    chosen: list[Fraction] | None = None
    a_limit: Fraction | None = None
    for rho in schedule.rho_list:
        vals = _exact_discounted(graph, rho)
        top = max(vals)
        norm = [v - top for v in vals]
        delta = 1 - rho
        a_est = delta * (-top)
        if prev_norm is not None and max(
            abs(a - b) for a, b in zip(norm, prev_norm)
        ) <= stop:
            chosen = norm
            # The estimate converges linearly in (1 - rho); one Richardson
            # step over the last two exact values removes the linear term.
            assert prev_pair is not None
            prev_delta, prev_a = prev_pair
            a_limit = a_est + (a_est - prev_a) * delta / (prev_delta - delta)
            break
        prev_norm = norm
        prev_pair = (delta, a_est)
    if chosen is None:
        raise NonConvergence("discount schedule exhausted before the outer stop")
    candidate = NodeFunction(
        graph, tuple(v.limit_denominator(10**6) for v in chosen), EXACT
    )
    beta = max_mean_cycle(graph).beta
    if calibration_residual(candidate, graph, beta) != 0:
        raise NonConvergence("rational reconstruction is not exactly calibrated")
    assert a_limit is not None
    return candidate, float(a_limit)


# ---------------------------------------------------------------------------
# cohomology test


@dataclass(frozen=True)
class LivsicResult:
    cohomologous: bool
    constant: Fraction
    transfer: NodeFunction | None


def livsic_test(graph: PrependGraph) -> LivsicResult:
    """Is the potential a coboundary plus a constant?

    Exact criterion: the best and worst cycle means coincide, i.e.
    beta(A) + beta(-A) == 0, with beta(-A) computed from the re-reduced
    negated source potential. When they do, a transfer function making every
    edge tight is read off a spanning walk.
    """
    if classify_transitivity(graph.system).kind == "reducible":
        raise NotTransitive("cohomology test needs a transitive system")
    beta_plus = max_mean_cycle(graph).beta
    negated = build_prepend_graph(graph.system, reduce_past(graph.potential.scale(-1)))
    beta_minus = max_mean_cycle(negated).beta
    if beta_plus + beta_minus != 0:
        return LivsicResult(False, beta_plus, None)
    n = len(graph.nodes)
    u: list[Fraction | None] = [None] * n
    u[0] = Fraction(0)
    queue = [0]
    while queue:
        v = queue.pop(0)
        for e in graph.out_edges(v):
            if u[e.tgt] is None:
                u[e.tgt] = u[v] + e.weight - beta_plus  # type: ignore[operand-type]
                queue.append(e.tgt)
    assert all(val is not None for val in u)
    for e in graph.edges:
        assert e.weight + u[e.src] - u[e.tgt] == beta_plus  # type: ignore[operand-type]
    return LivsicResult(True, beta_plus, NodeFunction(graph, tuple(u), EXACT))


# ---------------------------------------------------------------------------
# rigidity and refinement


def rigidity_check(u: NodeFunction, uprime: NodeFunction, support_nodes) -> bool:
    """True when u - u' is constant across the given nodes."""
    diffs = {u[v] - uprime[v] for v in support_nodes}
    return len(diffs) <= 1


def refine_subaction_Uk(u: NodeFunction, graph: PrependGraph, k: int) -> NodeFunction:
    """Lift u to the depth-(q+k-1) graph via the k-step averaged construction.

    The refined value at a window v is the weighted head sum of edge weights
    (coefficients (k-i)/k) plus the average of u over the k windows of v.
    Tight refined edges project into tight edges of u at every offset below k.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    worst, _ = subaction_residual(u, graph, max_mean_cycle(graph).beta)
    if worst > 0:
        raise NotSubaction("refinement needs a sub-action")
    if k == 1:
        return u
    q = graph.q
    refined_potential = pad_potential(graph.potential, graph.potential.past_depth, q + k - 1)
    refined = build_prepend_graph(graph.system, refined_potential)
    reduced = graph.reduced
    vals = []
    for v in refined.nodes:
        head = sum(
            ((k - i) * reduced.value(v[i - 1: i + q]) for i in range(1, k)),
            Fraction(0),
        )
        tail = sum((u.by_word(v[j: j + q]) for j in range(k)), Fraction(0))
        vals.append((head + tail) / k)
    return NodeFunction(refined, tuple(vals), EXACT)


def noncalibrated_example(u: NodeFunction, graph: PrependGraph) -> tuple[NodeFunction, Word]:
    """Two-step refinement of a calibrated u, plus a node where it fails
    the Bellman equation.

    Needs an edge with strictly slack inequality; the witness is the refined
    window obtained by prepending that edge's symbol onto its source. Raises
    HypothesisFails when every edge is tight (coboundary case).
    """
    beta = max_mean_cycle(graph).beta
    worst, _ = subaction_residual(u, graph, beta)
    if worst > 0:
        raise NotSubaction("construction starts from a sub-action")
    strict = [
        e for e in graph.edges if e.weight + u[e.src] - u[e.tgt] < beta
    ]
    if not strict:
        raise HypothesisFails("every edge is tight; no strictly slack edge exists")
    witness_edge = min(strict, key=lambda e: e.key)
    U = refine_subaction_Uk(u, graph, 2)
    witness = witness_edge.key
    refined = U.graph
    w_idx = refined.node_index[witness]
    defect = min(
        U[e.tgt] - e.weight + beta for e in refined.out_edges(w_idx)
    ) - U[w_idx]
    assert defect > 0, "witness must violate calibration"
    return U, witness
