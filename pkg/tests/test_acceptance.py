"""Acceptance gate: eleven criteria, one printed PASS/FAIL line each.

Run with ``pytest -s tests/test_acceptance.py`` to see the lines as they
print; without ``-s`` they appear in pytest's captured-output section of any
failing criterion. Every equality below is exact rational arithmetic unless
a float tolerance is stated next to the comparison.
"""

from __future__ import annotations

import itertools
import random
import time
from fractions import Fraction

from ergopt import fixtures
from ergopt.graph_engine import (
    build_prepend_graph,
    max_mean_cycle,
    parametric_beta,
)
from ergopt.holonomic_opt import (
    CirculationMeasure,
    DecoratedOrbitMeasure,
    alpha,
    beta_lp,
    integral,
    is_holonomic,
    is_maximizing,
    maximizing_face,
    optimal_trajectory_average,
    orbit_circulation,
)
from ergopt.mane_aubry import (
    BoundaryData,
    mane_family_subaction,
    maximal_calibrated,
    omega_membership,
    omega_set,
    reconstruct,
    represent,
)
from ergopt.oracle_bruteforce import oracle_beta, oracle_omega
from ergopt.potential_model import (
    ConstraintSpec,
    LocallyConstantPotential,
    coboundary_modify,
)
from ergopt.subaction_lab import (
    NodeFunction,
    calibrated_via_discount,
    calibration_residual,
    contact_locus,
    contact_sources,
    convex_combination,
    discounted_fixed_point,
    dual_value,
    livsic_test,
    maximal_subaction,
    noncalibrated_example,
    pointwise_max,
    refine_subaction_Uk,
    subaction_residual,
)
from ergopt.symbolic_core import allowed_words, point

from conftest import f1_graph, f6_graph, random_fraction, random_graph

TRANSITIVE_FIXTURES = (
    "f1",
    "f3",
    "f5",
    "f6",
    "golden_q1",
    "golden_q2",
    "counterexample_tails",
)


def fixture_graph(name: str):
    config = fixtures.load(name)
    return build_prepend_graph(config.system, config.potential)


def report(number: int, name: str, problems: list[str], elapsed: float | None = None) -> None:
    verdict = "PASS" if not problems else "FAIL"
    tail = f" ({elapsed:.1f}s)" if elapsed is not None else ""
    print(f"ACCEPTANCE {number:02d} {name}: {verdict}{tail}")
    assert not problems, "; ".join(problems[:5])


def compatible_boundary(omega, raw):
    """Clip raw class values down to the compatible envelope."""
    anchors = omega.critical.anchors()
    clipped = tuple(
        min(
            raw[j] + (omega.mane.value(anchors[i], anchors[j]) if i != j else 0)
            for j in range(len(anchors))
        )
        for i in range(len(anchors))
    )
    return BoundaryData(omega, clipped)


def witness_point(graph):
    cycle = max_mean_cycle(graph).witness_cycle
    return point("", tuple(e.symbol for e in reversed(cycle)))


def simple_cycles(n: int, edges):
    """All simple cycles (as edge tuples) of the digraph on n nodes."""
    by_src: list[list] = [[] for _ in range(n)]
    for e in edges:
        by_src[e.src].append(e)
    cycles = []

    def walk(start, node, path, seen):
        for e in by_src[node]:
            if e.tgt == start:
                cycles.append(tuple(path + [e]))
            elif e.tgt > start and e.tgt not in seen:
                walk(start, e.tgt, path + [e], seen | {e.tgt})

    for start in range(n):
        walk(start, start, [], {start})
    return cycles


# ---------------------------------------------------------------------------
# criteria


def test_criterion_01_triple_agreement():
    start = time.perf_counter()
    rng = random.Random(101)
    problems = []

    sizes = [(rng.choice([2, 2, 2, 3, 3, 4]), rng.choice([1, 1, 2, 2, 3])) for _ in range(197)]
    sizes += [(4, 3)] * 3
    for i, (r, q) in enumerate(sizes):
        graph = random_graph(rng, r, q)
        beta = max_mean_cycle(graph).beta
        if parametric_beta(graph) != beta or beta_lp(graph)[0] != beta:
            problems.append(f"method disagreement on instance {i}")
            break

    small = [(rng.choice([2, 2, 2, 2, 2, 3]), rng.choice([1, 1, 2]), rng.choice([1, 1, 2]))
             for _ in range(196)]
    small += [(3, 2, 2)] * 4
    for i, (r, q, p) in enumerate(small):
        graph = random_graph(rng, r, q, p=p)
        beta = max_mean_cycle(graph).beta
        oracle = oracle_beta(graph.system, graph.potential, len(graph.nodes) + 1)
        if oracle != beta:
            problems.append(f"oracle disagreement on small instance {i}")
            break

    elapsed = time.perf_counter() - start
    if elapsed >= 60:
        problems.append(f"runtime budget exceeded: {elapsed:.1f}s")
    report(1, "triple agreement, 400 instances", problems, elapsed)


def test_criterion_02_decorated_counterexample():
    problems = []
    config = fixtures.load("counterexample_tails")
    graph = build_prepend_graph(config.system, config.potential)
    beta = max_mean_cycle(graph).beta
    if beta != 1:
        problems.append(f"beta {beta} != 1")
    rich = DecoratedOrbitMeasure(config.system, (1,), ((1, 1),))
    poor = DecoratedOrbitMeasure(config.system, (1,), ((0, 1),))
    if not (is_holonomic(rich) and is_holonomic(poor)):
        problems.append("decorations should both be holonomic")
    if orbit_circulation(graph, rich).edge_masses != orbit_circulation(graph, poor).edge_masses:
        problems.append("decorations should share their x-marginal")
    if integral(config.potential, rich) != 1 or not is_maximizing(rich, config.potential, beta):
        problems.append("all-ones decoration should maximize")
    if integral(config.potential, poor) != 0 or is_maximizing(poor, config.potential, beta):
        problems.append("zero-anchored decoration should be rejected")
    report(2, "two-tail counterexample", problems)


def test_criterion_03_dual_formula():
    rng = random.Random(103)
    problems = []
    checked = 0
    for name in TRANSITIVE_FIXTURES + ("random",) * 6:
        if name == "random":
            graph = random_graph(rng, 2, rng.choice([1, 2]), require_transitive=True)
        else:
            graph = fixture_graph(name)
        beta = max_mean_cycle(graph).beta
        for _ in range(9):
            f = NodeFunction(graph, tuple(random_fraction(rng) for _ in graph.nodes))
            if dual_value(f, graph) < beta:
                problems.append(f"dual value below the optimum on {name}")
            checked += 1
        for u in (maximal_calibrated(graph), mane_family_subaction(omega_set(graph), witness_point(graph))):
            if dual_value(u, graph) != beta:
                problems.append(f"calibrated dual gap on {name}")
    if checked < 100:
        problems.append(f"only {checked} random functions checked")
    report(3, "dual formula, 117 functions", problems)


def test_criterion_04_maximal_dominates():
    rng = random.Random(104)
    problems = []
    generated = 0
    for name in TRANSITIVE_FIXTURES:
        graph = fixture_graph(name)
        beta = max_mean_cycle(graph).beta
        u_max = maximal_subaction(graph, beta)
        worst, _ = subaction_residual(u_max, graph, beta)
        if worst > 0 or any(v > 0 for v in u_max.values):
            problems.append(f"maximal sub-action invalid on {name}")
        omega = omega_set(graph)
        pool = [maximal_calibrated(graph, omega).normalized()]
        for _ in range(4):
            data = compatible_boundary(omega, [random_fraction(rng) for _ in omega.critical.classes])
            pool.append(reconstruct(data).normalized())
        pool.append(pointwise_max(pool[0], pool[-1]))
        pool.append(pointwise_max(pool[1], pool[3]))
        pool.append(convex_combination(Fraction(1, 3), pool[1], pool[2]))
        pool.append(convex_combination(Fraction(3, 4), pool[2], pool[4]))
        for v in pool:
            generated += 1
            if any(v[i] > u_max[i] for i in range(len(graph.nodes))):
                problems.append(f"dominance fails on {name}")
    if generated < 50:
        problems.append(f"only {generated} candidates generated")
    report(4, f"maximal sub-action dominates {generated} candidates", problems)


def test_criterion_05_discounted_construction():
    start = time.perf_counter()
    problems = []
    graph = f1_graph()
    for rho in (Fraction(1, 2), Fraction(9, 10), Fraction(99, 100)):
        u = discounted_fixed_point(graph, rho)
        closed = (-rho * rho / (1 - rho), -rho / (1 - rho))
        if any(abs(a - float(b)) > 1e-10 for a, b in zip(u.values, closed)):
            problems.append(f"closed form missed at rho={rho}")
    rho = Fraction(2**20 - 1, 2**20)
    for name in TRANSITIVE_FIXTURES:
        g = fixture_graph(name)
        beta = max_mean_cycle(g).beta
        u = discounted_fixed_point(g, rho)
        estimate = -float(1 - rho) * min(u.values) / float(rho)
        if abs(estimate - float(beta)) > 1e-6:
            problems.append(f"a-estimate off on {name}")
        limit, a = calibrated_via_discount(g)
        if calibration_residual(limit, g, beta) != 0:
            problems.append(f"reconstructed limit not calibrated on {name}")
    elapsed = time.perf_counter() - start
    if elapsed >= 30:
        problems.append(f"runtime budget exceeded: {elapsed:.1f}s")
    report(5, "discounted construction", problems, elapsed)


def test_criterion_06_mane_aubry():
    problems = []
    membership_checks = 0
    for name in TRANSITIVE_FIXTURES:
        graph = fixture_graph(name)
        omega = omega_set(graph)
        n = len(graph.nodes)
        for i, j, k in itertools.product(range(n), repeat=3):
            if omega.mane.value(i, k) > omega.mane.value(i, j) + omega.mane.value(j, k):
                problems.append(f"triangle inequality fails on {name}")
                break
        for i in range(n):
            if (omega.mane.value(i, i) == 0) != (i in omega.critical.critical_nodes):
                problems.append(f"diagonal mismatch on {name} node {i}")
        system = graph.system
        periods = [w for L in (1, 2, 3) for w in allowed_words(system, L)]
        pres = [()] + [w for L in (1, 2) for w in allowed_words(system, L)]
        for pre, per in itertools.product(pres, periods):
            if membership_checks >= 20 * (TRANSITIVE_FIXTURES.index(name) + 1):
                break
            try:
                x = point(pre, per)
            except ValueError:
                continue
            if not x.is_valid(system):
                continue
            beta = omega.beta
            if omega_membership(omega, x) != oracle_omega(
                system, graph.potential, beta, x, Fraction(1, 64)
            ):
                problems.append(f"membership disagreement on {name} at {pre}|{per}")
            membership_checks += 1
        x = witness_point(graph)
        u = mane_family_subaction(omega, x)
        if calibration_residual(u, graph, omega.beta) != 0:
            problems.append(f"family member not calibrated on {name}")
    if membership_checks < 100:
        problems.append(f"only {membership_checks} membership points checked")
    report(6, f"excursion costs, {membership_checks} membership points", problems)


def test_criterion_07_representation():
    rng = random.Random(107)
    problems = []
    pairs = 0
    produced = []
    for name in TRANSITIVE_FIXTURES:
        graph = fixture_graph(name)
        omega = omega_set(graph)
        u_discount, _ = calibrated_via_discount(graph)
        u_family = mane_family_subaction(omega, witness_point(graph))
        for u in (u_discount, u_family):
            if reconstruct(represent(u, omega)).values != u.values:
                problems.append(f"round trip fails on {name}")
            pairs += 1
        produced.append((omega, u_discount))
    for _ in range(12):
        graph = random_graph(rng, 2, rng.choice([1, 2]), require_transitive=True)
        omega = omega_set(graph)
        f = compatible_boundary(omega, [random_fraction(rng) for _ in omega.critical.classes])
        g = compatible_boundary(omega, [random_fraction(rng) for _ in omega.critical.classes])
        uf, ug = reconstruct(f), reconstruct(g)
        if reconstruct(represent(uf, omega)).values != uf.values:
            problems.append("round trip fails on a random reconstruct")
        node_gap = max(abs(a - b) for a, b in zip(uf.values, ug.values))
        class_gap = max(abs(a - b) for a, b in zip(f.values, g.values))
        if node_gap != class_gap:
            problems.append("isometry gap mismatch")
        pairs += 1
    if pairs < 20:
        problems.append(f"only {pairs} pairs exercised")
    report(7, "representation and isometry, 26 pairs", problems)


def test_criterion_08_support_and_rigidity():
    rng = random.Random(108)
    problems = []
    rigidity_pairs = 0
    instances = list(TRANSITIVE_FIXTURES) + ["random"] * 8
    for name in instances:
        if name == "random":
            graph = random_graph(rng, 2, rng.choice([1, 2]), require_transitive=True)
        else:
            graph = fixture_graph(name)
        beta = max_mean_cycle(graph).beta
        omega = omega_set(graph)
        face = maximizing_face(graph)
        subactions = [
            maximal_subaction(graph, beta),
            maximal_calibrated(graph, omega),
            reconstruct(compatible_boundary(
                omega, [random_fraction(rng) for _ in omega.critical.classes]
            )),
        ]
        critical = [graph.edges[i] for i in omega.critical.critical_edges]
        loci = [contact_locus(u, graph, beta).edges for u in subactions]
        for cycle in simple_cycles(len(graph.nodes), critical):
            total = sum(e.weight for e in cycle)
            if total != beta * len(cycle):
                continue  # not a maximizing cycle of the full graph
            masses = [Fraction(0)] * len(graph.edges)
            for e in cycle:
                masses[e.index] = Fraction(1, len(cycle))
            measure = CirculationMeasure(graph, tuple(masses))
            support = measure.support()
            if not set(support) <= set(face.allowed_edges):
                problems.append(f"extreme support escapes the critical set on {name}")
            for locus in loci:
                if not set(support) <= set(locus):
                    problems.append(f"extreme support escapes a contact locus on {name}")
            for u, v in itertools.combinations(subactions, 2):
                diffs = {u[e.src] - v[e.src] for e in cycle}
                if len(diffs) != 1:
                    problems.append(f"rigidity fails on {name}")
                rigidity_pairs += 1
    if rigidity_pairs < 20:
        problems.append(f"only {rigidity_pairs} rigidity pairs checked")
    report(8, "support, contact, and rigidity", problems)


def test_criterion_09_livsic():
    rng = random.Random(109)
    problems = []
    for _ in range(12):
        graph = random_graph(rng, 2, rng.choice([1, 2]), require_transitive=True)
        system = graph.system
        q = graph.q
        f = {w: random_fraction(rng) for w in allowed_words(system, q)}
        a = random_fraction(rng)
        zero = LocallyConstantPotential(system, 1, q, {})
        modified = coboundary_modify(zero, f, a)
        g = build_prepend_graph(system, modified)
        result = livsic_test(g)
        if not result.cohomologous or result.constant != a:
            problems.append("coboundary not detected")
            continue
        offsets = {result.transfer.by_word(w) + f[w] for w in f}
        if len(offsets) != 1:
            problems.append("transfer function is not f up to a constant")
    generic_positive = 0
    drawn = 0
    while drawn < 50:
        graph = random_graph(rng, rng.choice([2, 3]), rng.choice([1, 2]), require_transitive=True)
        # a lone simple cycle forces equal cycle means; that is not a generic
        # weight phenomenon, so require two independent loops
        if sum(graph.system.allows(s, s) for s in graph.system.symbols()) < 2:
            continue
        drawn += 1
        forward = max_mean_cycle(graph).beta
        negated = build_prepend_graph(graph.system, graph.potential.scale(Fraction(-1)))
        if forward + max_mean_cycle(negated).beta > 0:
            generic_positive += 1
    if generic_positive != 50:
        problems.append(f"only {generic_positive}/50 generic potentials had a positive defect")
    report(9, "cohomology detection, 12 + 50 potentials", problems)


def test_criterion_10_refinement():
    rng = random.Random(110)
    problems = []
    for i in range(50):
        graph = random_graph(rng, 2, rng.choice([1, 2]))
        beta = max_mean_cycle(graph).beta
        u = maximal_subaction(graph, beta)
        base_sources = {
            graph.nodes[s] for s in contact_sources(contact_locus(u, graph, beta), graph)
        }
        for k in (2, 3):
            refined = refine_subaction_Uk(u, graph, k)
            fine = refined.graph
            fine_beta = max_mean_cycle(fine).beta
            for s in contact_sources(contact_locus(refined, fine, fine_beta), fine):
                word = fine.nodes[s]
                if any(word[j: j + graph.q] not in base_sources for j in range(k)):
                    problems.append(f"projection escapes on instance {i} at k={k}")
                    break

    graph = f6_graph()
    beta = max_mean_cycle(graph).beta
    u2, witness = noncalibrated_example(maximal_subaction(graph, beta), graph)
    expected = {(0, 0): Fraction(-1), (0, 1): Fraction(-1, 2),
                (1, 0): Fraction(1, 2), (1, 1): Fraction(1, 2)}
    if {w: u2.by_word(w) for w in expected} != expected:
        problems.append("refined values differ from the pinned table")
    if witness != (0, 0):
        problems.append(f"witness {witness} is not node 00")
    fine = u2.graph
    fine_beta = max_mean_cycle(fine).beta
    w_idx = fine.node_index[witness]
    slack = [
        fine_beta - e.weight - u2[e.src] + u2[e.tgt] for e in fine.out_edges(w_idx)
    ]
    if any(s <= 0 for s in slack):
        problems.append("witness node has a tight out-edge")
    report(10, "refinement inclusion and strict slack witness", problems)


def test_criterion_11_alpha_slopes():
    start = time.perf_counter()
    problems = []
    config = fixtures.load("f5")
    graph = build_prepend_graph(config.system, config.potential)
    components = config.constraints.components

    def tilted(c):
        return ConstraintSpec(components, multiplier=(Fraction(c),))

    for c in (-2, -1, Fraction(-1, 2), 0, Fraction(1, 3), Fraction(1, 2), 1, 2):
        expected = -max(1 - Fraction(c), Fraction(1))
        if alpha(graph, tilted(c)) != expected:
            problems.append(f"alpha({c}) != {expected}")
    delta = Fraction(1, 8)
    K = 2**20
    for c, slope_name in ((Fraction(1, 2), "flat"), (Fraction(-1, 2), "unit")):
        slope = (alpha(graph, tilted(c + delta)) - alpha(graph, tilted(c - delta))) / (2 * delta)
        (average,) = optimal_trajectory_average(graph, tilted(c), K)
        if abs(float(slope - average)) > 1e-6:
            problems.append(f"slope/average mismatch at the {slope_name} branch")
    elapsed = time.perf_counter() - start
    if elapsed >= 5:
        problems.append(f"runtime budget exceeded: {elapsed:.1f}s")
    report(11, "alpha values and trajectory slopes", problems, elapsed)
