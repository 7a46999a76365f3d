"""The non-wandering set, the pairwise potential of cheapest excursions,
boundary data on critical classes, and the representation machinery that
classifies calibrated sub-actions.

Everything here works at window resolution over a transitive system: the
non-wandering set is the critical subgraph, the pairwise potential is the
all-pairs minimum path cost, and calibrated sub-actions correspond to
per-class boundary values through reconstruct/represent.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import NotCalibrated, NotExtreme, NotInOmega, NotTransitive
from .graph_engine import (
    CriticalStructure,
    ManeMatrix,
    PrependGraph,
    critical_structure,
    max_mean_cycle,
    min_cost_all_pairs,
)
from .subaction_lab import NodeFunction, calibration_residual
from .symbolic_core import FORWARD, EventuallyPeriodicPoint, classify_transitivity, window


@dataclass(frozen=True)
class OmegaSet:
    """Critical-structure view of the non-wandering points."""

    graph: PrependGraph
    beta: Fraction
    critical: CriticalStructure
    mane: ManeMatrix


def omega_set(graph: PrependGraph) -> OmegaSet:
    if classify_transitivity(graph.system).kind == "reducible":
        raise NotTransitive("the non-wandering analysis needs a transitive system")
    beta = max_mean_cycle(graph).beta
    critical = critical_structure(graph, beta)
    mane = min_cost_all_pairs(graph, beta)
    assert all(v is not None for row in mane.phi for v in row)
    return OmegaSet(graph, beta, critical, mane)


def _require_forward(x: EventuallyPeriodicPoint, system) -> None:
    if x.orientation != FORWARD:
        raise ValueError("expected a forward point")
    if not x.is_valid(system):
        raise ValueError("point violates the transition matrix")


def _window_edge_indices(omega: OmegaSet, x: EventuallyPeriodicPoint) -> list[int]:
    """Edge index at each step j over the preperiod plus one period."""
    q = omega.graph.q
    steps = len(x.preperiod) + len(x.period)
    return [
        omega.graph.edge_by_key(window(x, j, q + 1)).index for j in range(steps)
    ]


def omega_membership(omega: OmegaSet, x: EventuallyPeriodicPoint) -> bool:
    """A point is non-wandering iff all of its window edges are critical."""
    _require_forward(x, omega.graph.system)
    return all(i in omega.critical.critical_edges for i in _window_edge_indices(omega, x))


def _excursion_minimum(
    omega: OmegaSet, x: EventuallyPeriodicPoint, start_node: int
) -> Fraction:
    """min over one period of [phi(start_node -> W_j(x)) + sum of costs before j]."""
    graph = omega.graph
    q = graph.q
    J = len(x.preperiod)
    P = len(x.period)
    cum = Fraction(0)
    best = None
    for j in range(J + P):
        if j >= J:
            tgt = graph.node_index[window(x, j, q)]
            cand = omega.mane.value(start_node, tgt) + cum
            if best is None or cand < best:
                best = cand
        edge = graph.edge_by_key(window(x, j, q + 1))
        cum += omega.beta - edge.weight
    assert best is not None
    return best


def mane_potential(
    omega: OmegaSet, x: EventuallyPeriodicPoint, xbar: EventuallyPeriodicPoint
) -> Fraction:
    """Cheapest asymptotic excursion cost from x to xbar.

    Finite and exact for x non-wandering: the epsilon-path infimum stabilizes
    to a minimum over one period of x once paths are allowed to leave after
    the preperiod. Raises NotInOmega otherwise.
    """
    _require_forward(xbar, omega.graph.system)
    if not omega_membership(omega, x):
        raise NotInOmega("the first argument must be non-wandering")
    start = omega.graph.node_index[window(xbar, 0, omega.graph.q)]
    return _excursion_minimum(omega, x, start)


def mane_family_subaction(omega: OmegaSet, x: EventuallyPeriodicPoint) -> NodeFunction:
    """The calibrated sub-action V -> cheapest excursion cost from x to V."""
    if not omega_membership(omega, x):
        raise NotInOmega("the family is defined over non-wandering base points")
    vals = tuple(
        _excursion_minimum(omega, x, v) for v in range(len(omega.graph.nodes))
    )
    return NodeFunction(omega.graph, vals)


# ---------------------------------------------------------------------------
# boundary data and the representation formula


@dataclass(frozen=True)
class BoundaryData:
    """One rational per critical class, stored at the class anchor node."""

    omega: OmegaSet
    values: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if len(self.values) != len(self.omega.critical.classes):
            raise ValueError("one value per critical class required")
        object.__setattr__(self, "values", tuple(Fraction(v) for v in self.values))


def is_compatible(data: BoundaryData) -> bool:
    """f(a) - f(b) must not exceed the excursion cost from a's anchor to b's."""
    anchors = data.omega.critical.anchors()
    phi = data.omega.mane
    return all(
        data.values[i] - data.values[j] <= phi.value(anchors[i], anchors[j])
        for i in range(len(anchors))
        for j in range(len(anchors))
        if i != j
    )


def represent(u: NodeFunction, omega: OmegaSet) -> BoundaryData:
    """Boundary data of a calibrated sub-action: its anchor values."""
    if calibration_residual(u, omega.graph, omega.beta) != 0:
        raise NotCalibrated("representation requires an exactly calibrated input")
    data = BoundaryData(omega, tuple(u[a] for a in omega.critical.anchors()))
    assert is_compatible(data)
    return data


def reconstruct(data: BoundaryData) -> NodeFunction:
    """Calibrated sub-action with the given boundary data.

    u(V) = min over classes of [f(class) + phi(V -> anchor)]. Always
    calibrated; equals f on the anchors exactly when f is compatible,
    otherwise the minimum clips f down to the compatible envelope.
    """
    omega = data.omega
    anchors = omega.critical.anchors()
    # Anchors are critical, so phi(anchor -> anchor) = 0 and the minimum
    # evaluates to f(class) at each anchor of a compatible f.
    vals = tuple(
        min(
            data.values[i] + omega.mane.value(v, anchors[i])
            for i in range(len(anchors))
        )
        for v in range(len(omega.graph.nodes))
    )
    u = NodeFunction(omega.graph, vals)
    assert calibration_residual(u, omega.graph, omega.beta) == 0
    return u


def maximal_calibrated(graph: PrependGraph, omega: OmegaSet | None = None) -> NodeFunction:
    """The largest calibrated sub-action vanishing on the non-wandering set."""
    omega = omega or omega_set(graph)
    zero = BoundaryData(omega, tuple(Fraction(0) for _ in omega.critical.classes))
    return reconstruct(zero)


# ---------------------------------------------------------------------------
# support location of extreme maximizing measures


def support_in_omega_check(m, omega: OmegaSet) -> bool:
    """For a uniform single-cycle measure: is its support critical?

    Accepts any object carrying .graph and .edge_masses aligned with the
    graph's edge indices. Raises NotExtreme unless the support is one cycle
    with equal masses, the ergodic-projection case the statement covers.
    """
    graph = m.graph
    support = [e for e in graph.edges if m.edge_masses[e.index] > 0]
    masses = {m.edge_masses[e.index] for e in support}
    srcs = [e.src for e in support]
    tgts = [e.tgt for e in support]
    is_cycle = (
        len(masses) == 1
        and len(set(srcs)) == len(support)
        and len(set(tgts)) == len(support)
        and set(srcs) == set(tgts)
    )
    if is_cycle and support:
        # one cycle, not several disjoint ones: walk it
        nxt = {e.src: e.tgt for e in support}
        seen = 1
        v = support[0].src
        while nxt[v] != support[0].src:
            v = nxt[v]
            seen += 1
        is_cycle = seen == len(support)
    if not support or not is_cycle:
        raise NotExtreme("support must be a single uniformly weighted cycle")
    return all(e.index in omega.critical.critical_edges for e in support)
