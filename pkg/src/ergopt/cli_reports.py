"""Config ingestion, the command surface, and report emission.

Config files are flat sectioned text: ``[system]``, ``[potential]``, optional
``[constraints]`` and ``[solver]`` blocks of ``key = value`` lines. Every
weight is an exact rational string ("3", "-1/2"); floating literals are
rejected at parse time so exactness survives the boundary. Reports are
JSON (default) or CSV, byte-stable for fixed config and seed: rationals are
emitted as "n/d" strings and floats appear only inside discount traces.

Exit codes: 0 ok, 1 check-suite failure, 2 config error, 3 hypothesis not
met (reducible system, class count mismatch, infeasible target, ...),
4 non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Mapping, Sequence

from .errors import (
    ClassCountMismatch,
    ConfigError,
    ErgoptError,
    NonConvergence,
    NotTransitive,
)
from .graph_engine import (
    PrependGraph,
    build_prepend_graph,
    certificate_subaction,
    max_mean_cycle,
    parametric_beta,
)
from .holonomic_opt import alpha, beta_lp, constrained_beta, maximizing_face
from .mane_aubry import (
    BoundaryData,
    is_compatible,
    maximal_calibrated,
    mane_family_subaction,
    omega_membership,
    omega_set,
    reconstruct,
    represent,
)
from .oracle_bruteforce import oracle_beta, oracle_omega
from .potential_model import ConstraintSpec, LocallyConstantPotential
from .subaction_lab import (
    DiscountSchedule,
    calibrated_via_discount,
    calibration_residual,
    contact_locus,
    contact_sources,
    discounted_fixed_point,
    is_subaction,
    livsic_test,
    maximal_subaction,
    refine_subaction_Uk,
    subaction_residual,
)
from .symbolic_core import SubshiftSystem, classify_transitivity, point

Word = tuple[int, ...]

_RATIONAL = re.compile(r"^[+-]?\d+(?:/\d+)?$")
_SECTIONS = ("system", "potential", "constraints", "solver")


# ---------------------------------------------------------------------------
# configuration parsing


@dataclass(frozen=True)
class ExperimentConfig:
    """Parsed experiment description: instance, optional constraints, solver."""

    system: SubshiftSystem
    potential: LocallyConstantPotential
    constraints: ConstraintSpec | None = None
    schedule_k_max: int | None = None
    seed: int = 0

    def schedule(self) -> DiscountSchedule | None:
        """Discount schedule from the solver block; None means library default."""
        if self.schedule_k_max is None:
            return None
        rhos = tuple(Fraction(2**k - 1, 2**k) for k in range(1, self.schedule_k_max + 1))
        return DiscountSchedule(rho_list=rhos)


def _parse_rational(text: str, line: int, field: str) -> Fraction:
    if not _RATIONAL.match(text):
        raise ConfigError(f"expected a rational 'n' or 'n/d', got {text!r}", line, field)
    if "/" in text and int(text.split("/")[1]) == 0:
        raise ConfigError("zero denominator", line, field)
    return Fraction(text)


def _parse_int(text: str, line: int, field: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"expected an integer, got {text!r}", line, field) from None


def _parse_symbols(tokens: Sequence[str], line: int, field: str) -> Word:
    out = []
    for t in tokens:
        if not t.isdigit():
            raise ConfigError(f"symbols must be nonnegative integers, got {t!r}", line, field)
        out.append(int(t))
    return tuple(out)


def parse_config_text(text: str, source: str = "<string>") -> ExperimentConfig:
    """Parse sectioned key-value config text into an ExperimentConfig."""
    section: str | None = None
    section_lines: dict[str, int] = {}
    scalars: dict[tuple[str, str], tuple[str, int]] = {}
    rows: list[tuple[Word, int]] = []
    windows: dict[Word, tuple[Fraction, int]] = {}
    phi_entries: dict[int, dict[Word, tuple[Fraction, int]]] = {}

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError("unterminated section header", lineno)
            name = line[1:-1].strip()
            if name not in _SECTIONS:
                raise ConfigError(f"unknown section {name!r}", lineno)
            if name in section_lines:
                raise ConfigError(f"duplicate section {name!r}", lineno)
            section_lines[name] = lineno
            section = name
            continue
        if section is None:
            raise ConfigError("key before any section header", lineno)
        if "=" not in line:
            raise ConfigError("expected 'key = value'", lineno)
        lhs, rhs = (part.strip() for part in line.split("=", 1))
        parts = lhs.split()
        key = parts[0]
        if section == "system" and key == "row":
            if len(parts) != 1:
                raise ConfigError("row takes its entries on the right of '='", lineno, "row")
            rows.append((_parse_symbols(rhs.split(), lineno, "row"), lineno))
        elif section == "potential" and key == "window":
            symbols = _parse_symbols(parts[1:], lineno, "window")
            if symbols in windows:
                raise ConfigError(f"duplicate window {symbols}", lineno, "window")
            windows[symbols] = (_parse_rational(rhs, lineno, "window"), lineno)
        elif section == "constraints" and re.fullmatch(r"phi[1-9]\d*", key):
            index = int(key[3:])
            symbols = _parse_symbols(parts[1:], lineno, key)
            table = phi_entries.setdefault(index, {})
            if symbols in table:
                raise ConfigError(f"duplicate window {symbols}", lineno, key)
            table[symbols] = (_parse_rational(rhs, lineno, key), lineno)
        else:
            if len(parts) != 1:
                raise ConfigError(f"unexpected tokens after key {key!r}", lineno, key)
            if (section, key) in scalars:
                raise ConfigError(f"duplicate key {key!r}", lineno, key)
            scalars[(section, key)] = (rhs, lineno)

    for required in ("system", "potential"):
        if required not in section_lines:
            raise ConfigError(f"missing [{required}] section in {source}")

    allowed_scalars = {
        "system": {"alphabet_size", "lambda"},
        "potential": {"past_depth", "future_depth"},
        "constraints": {"c", "h"},
        "solver": {"schedule_k_max", "seed"},
    }
    for (sec, key), (_, lineno) in scalars.items():
        if key not in allowed_scalars[sec]:
            raise ConfigError(f"unknown key {key!r} in [{sec}]", lineno, key)

    system = _build_system(scalars, rows, section_lines["system"])
    potential = _build_potential(system, scalars, windows, section_lines["potential"])
    constraints = _build_constraints(system, scalars, phi_entries, section_lines.get("constraints"))

    k_max = None
    if ("solver", "schedule_k_max") in scalars:
        text_value, lineno = scalars[("solver", "schedule_k_max")]
        k_max = _parse_int(text_value, lineno, "schedule_k_max")
        if not 1 <= k_max <= 64:
            raise ConfigError("schedule_k_max must be in [1, 64]", lineno, "schedule_k_max")
    seed = 0
    if ("solver", "seed") in scalars:
        text_value, lineno = scalars[("solver", "seed")]
        seed = _parse_int(text_value, lineno, "seed")

    return ExperimentConfig(system, potential, constraints, k_max, seed)


def _build_system(scalars, rows, header_line) -> SubshiftSystem:
    if ("system", "alphabet_size") not in scalars:
        raise ConfigError("missing alphabet_size", header_line, "alphabet_size")
    size_text, size_line = scalars[("system", "alphabet_size")]
    size = _parse_int(size_text, size_line, "alphabet_size")
    if len(rows) != size:
        raise ConfigError(
            f"expected {size} row lines, found {len(rows)}", header_line, "row"
        )
    lam = Fraction(1, 2)
    if ("system", "lambda") in scalars:
        lam_text, lam_line = scalars[("system", "lambda")]
        lam = _parse_rational(lam_text, lam_line, "lambda")
        if not 0 < lam < 1:
            raise ConfigError("lambda must lie strictly between 0 and 1", lam_line, "lambda")
    for row, lineno in rows:
        if len(row) != size or any(v not in (0, 1) for v in row):
            raise ConfigError(f"row must hold {size} entries of 0 or 1", lineno, "row")
    try:
        return SubshiftSystem(size, tuple(row for row, _ in rows), lam)
    except ValueError as exc:
        raise ConfigError(str(exc), header_line) from None


def _build_potential(system, scalars, windows, header_line) -> LocallyConstantPotential:
    depths = {}
    for field in ("past_depth", "future_depth"):
        if ("potential", field) not in scalars:
            raise ConfigError(f"missing {field}", header_line, field)
        text_value, lineno = scalars[("potential", field)]
        depths[field] = _parse_int(text_value, lineno, field)
        if depths[field] < 1:
            raise ConfigError(f"{field} must be >= 1", lineno, field)
    width = depths["past_depth"] + depths["future_depth"]
    table = {}
    for symbols, (value, lineno) in windows.items():
        if len(symbols) != width:
            raise ConfigError(
                f"window needs {width} symbols, got {len(symbols)}", lineno, "window"
            )
        if any(s >= system.alphabet_size for s in symbols):
            raise ConfigError("window symbol outside the alphabet", lineno, "window")
        table[symbols] = value
    try:
        return LocallyConstantPotential(
            system, depths["past_depth"], depths["future_depth"], table
        )
    except ValueError as exc:
        raise ConfigError(str(exc), header_line) from None


def _build_constraints(system, scalars, phi_entries, header_line) -> ConstraintSpec | None:
    has_vector = ("constraints", "c") in scalars or ("constraints", "h") in scalars
    if header_line is None or (not phi_entries and not has_vector):
        return None
    if not phi_entries:
        raise ConfigError("constraints block has no phi tables", header_line)
    count = max(phi_entries)
    if sorted(phi_entries) != list(range(1, count + 1)):
        raise ConfigError(
            f"phi indices must run 1..{count} without gaps", header_line
        )
    components = []
    for index in range(1, count + 1):
        table = phi_entries[index]
        widths = {len(symbols) for symbols in table}
        if len(widths) != 1:
            lineno = min(line for _, line in table.values())
            raise ConfigError(f"phi{index} windows differ in length", lineno, f"phi{index}")
        width = widths.pop()
        if width < 2:
            lineno = min(line for _, line in table.values())
            raise ConfigError(f"phi{index} windows need >= 2 symbols", lineno, f"phi{index}")
        for symbols, (_, lineno) in table.items():
            if any(s >= system.alphabet_size for s in symbols):
                raise ConfigError("window symbol outside the alphabet", lineno, f"phi{index}")
        try:
            components.append(
                LocallyConstantPotential(
                    system, 1, width - 1, {w: v for w, (v, _) in table.items()}
                )
            )
        except ValueError as exc:
            lineno = min(line for _, line in table.values())
            raise ConfigError(str(exc), lineno, f"phi{index}") from None

    if ("constraints", "c") in scalars and ("constraints", "h") in scalars:
        _, lineno = scalars[("constraints", "h")]
        raise ConfigError("give c or h, not both", lineno, "h")
    target = multiplier = None
    for field, slot in (("c", "multiplier"), ("h", "target")):
        if ("constraints", field) in scalars:
            text_value, lineno = scalars[("constraints", field)]
            vector = tuple(
                _parse_rational(tok, lineno, field) for tok in text_value.split()
            )
            if len(vector) != count:
                raise ConfigError(
                    f"{field} needs {count} entries, got {len(vector)}", lineno, field
                )
            if slot == "target":
                target = vector
            else:
                multiplier = vector
    try:
        return ConstraintSpec(tuple(components), target=target, multiplier=multiplier)
    except ValueError as exc:
        raise ConfigError(str(exc), header_line) from None


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return parse_config_text(text, source=str(path))


# ---------------------------------------------------------------------------
# report helpers


def _rat(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _word_str(word: Word) -> str:
    return "".join(str(s) for s in word)


def _node_values(u, graph: PrependGraph) -> dict[str, str]:
    return {_word_str(w): _rat(u[i]) for i, w in enumerate(graph.nodes)}


def _edge_keys(indices, graph: PrependGraph) -> list[str]:
    return sorted(_word_str(graph.edges[i].key) for i in indices)


def _graph_of(config: ExperimentConfig) -> PrependGraph:
    return build_prepend_graph(config.system, config.potential)


def _require_transitive(config: ExperimentConfig) -> None:
    if classify_transitivity(config.system).kind == "reducible":
        raise NotTransitive("command requires a transitive system")


# ---------------------------------------------------------------------------
# commands


def cmd_beta(config: ExperimentConfig) -> dict:
    """Optimal average by three routes plus a dual certificate."""
    graph = _graph_of(config)
    cycle = max_mean_cycle(graph)
    parametric = parametric_beta(graph)
    lp_value, _ = beta_lp(graph)
    certificate = certificate_subaction(graph, cycle.beta)
    report = {
        "beta": _rat(cycle.beta),
        "methods_agree": cycle.beta == parametric == lp_value,
        "witness_cycle": [_word_str(e.key) for e in cycle.witness_cycle],
        "certificate_subaction": {
            _word_str(w): _rat(certificate[i]) for i, w in enumerate(graph.nodes)
        },
    }
    if config.constraints is not None and config.constraints.target is not None:
        report["constrained_beta"] = _rat(constrained_beta(graph, config.constraints))
    return report


def _discount_trace(graph: PrependGraph, schedule: DiscountSchedule) -> list[dict]:
    trace = []
    prev: tuple[float, ...] | None = None
    for k, rho in enumerate(schedule.rho_list, 1):
        u = discounted_fixed_point(graph, rho)
        top = max(u.values)
        norm = tuple(float(v - top) for v in u.values)
        entry = {
            "k": k,
            "rho": _rat(rho),
            "a_float": float((1 - rho) * -top),
            "delta_float": None if prev is None else max(
                abs(a - b) for a, b in zip(norm, prev)
            ),
        }
        trace.append(entry)
        if entry["delta_float"] is not None and entry["delta_float"] <= schedule.outer_stop:
            break
        prev = norm
    return trace


def cmd_subaction(config: ExperimentConfig, kind: str = "maximal") -> dict:
    """Sub-action of the requested kind with residuals and contact locus."""
    graph = _graph_of(config)
    beta = max_mean_cycle(graph).beta
    report: dict = {"kind": kind, "beta": _rat(beta)}
    if kind == "maximal":
        u = maximal_subaction(graph, beta)
    elif kind == "u0":
        _require_transitive(config)
        u = maximal_calibrated(graph)
    elif kind == "calibrated":
        _require_transitive(config)
        schedule = config.schedule() or DiscountSchedule()
        u, _ = calibrated_via_discount(graph, schedule)
        report["discount_trace"] = _discount_trace(graph, schedule)
    else:
        raise ConfigError(f"unknown sub-action kind {kind!r}")
    worst, _ = subaction_residual(u, graph, beta)
    report["values"] = _node_values(u, graph)
    report["residuals"] = {
        "worst_edge_slack": _rat(worst),
        "calibration": _rat(calibration_residual(u, graph, beta)),
    }
    report["contact_locus"] = _edge_keys(contact_locus(u, graph, beta).edges, graph)
    return report


def cmd_mane(config: ExperimentConfig) -> dict:
    """Excursion-cost matrix, critical classes, and non-wandering summary."""
    _require_transitive(config)
    graph = _graph_of(config)
    omega = omega_set(graph)
    words = [_word_str(w) for w in graph.nodes]
    matrix = {
        words[i]: {
            words[j]: _rat(omega.mane.value(i, j)) for j in range(len(words))
        }
        for i in range(len(words))
    }
    return {
        "beta": _rat(omega.beta),
        "phi": matrix,
        "critical_nodes": sorted(words[i] for i in omega.critical.critical_nodes),
        "critical_edges": _edge_keys(omega.critical.critical_edges, graph),
        "classes": [
            sorted(words[i] for i in cls) for cls in omega.critical.classes
        ],
    }


def cmd_classify(config: ExperimentConfig, boundary: Sequence[Fraction]) -> dict:
    """Reconstruct a calibrated sub-action from one value per critical class."""
    _require_transitive(config)
    graph = _graph_of(config)
    omega = omega_set(graph)
    classes = omega.critical.classes
    if len(boundary) != len(classes):
        raise ClassCountMismatch(
            f"{len(classes)} critical classes need {len(classes)} values, got {len(boundary)}"
        )
    data = BoundaryData(omega, tuple(boundary))
    compatible = is_compatible(data)
    u = reconstruct(data)
    back = represent(u, omega)
    round_trip = reconstruct(back).values == u.values
    return {
        "boundary_in": [_rat(v) for v in data.values],
        "compatible": compatible,
        "values": _node_values(u, graph),
        "boundary_out": [_rat(v) for v in back.values],
        "round_trip": round_trip,
    }


def cmd_alpha(config: ExperimentConfig) -> dict:
    """Legendre value of the constrained family at the config's multiplier."""
    if config.constraints is None or config.constraints.multiplier is None:
        raise ConfigError("alpha needs a [constraints] block with a c vector")
    graph = _graph_of(config)
    value = alpha(graph, config.constraints)
    return {
        "multiplier": [_rat(c) for c in config.constraints.multiplier],
        "alpha": _rat(value),
    }


def _check_items(config: ExperimentConfig) -> list[tuple[str, Callable[[], tuple[str, str]]]]:
    graph = _graph_of(config)
    beta = max_mean_cycle(graph).beta
    transitive = classify_transitivity(config.system).kind != "reducible"
    skip_note = ("skip", "system not transitive; calibrated checks skipped")

    def beta_methods() -> tuple[str, str]:
        parametric = parametric_beta(graph)
        lp_value, _ = beta_lp(graph)
        ok = beta == parametric == lp_value
        return ("pass" if ok else "fail", f"beta {_rat(beta)} by three methods")

    def beta_oracle() -> tuple[str, str]:
        value = oracle_beta(config.system, config.potential, len(graph.nodes) + 1)
        return ("pass" if value == beta else "fail", f"oracle beta {_rat(value)}")

    def maximal_valid() -> tuple[str, str]:
        u = maximal_subaction(graph, beta)
        ok = is_subaction(u, graph, beta) and all(v <= 0 for v in u.values)
        return ("pass" if ok else "fail", "maximal sub-action nonpositive and feasible")

    def refinement() -> tuple[str, str]:
        u = maximal_subaction(graph, beta)
        refined = refine_subaction_Uk(u, graph, 2)
        base_sources = {
            graph.nodes[s]
            for s in _contact_source_indices(u, graph, beta)
        }
        fine = refined.graph
        fine_beta = max_mean_cycle(fine).beta
        for s in _contact_source_indices(refined, fine, fine_beta):
            word = fine.nodes[s]
            if any(word[j : j + graph.q] not in base_sources for j in range(2)):
                return ("fail", f"refined contact source {word} escapes the base locus")
        return ("pass", "k=2 contact sources project into the base locus")

    def face_support() -> tuple[str, str]:
        _, measure = beta_lp(graph)
        face = maximizing_face(graph)
        ok = set(measure.support()) <= set(face.allowed_edges)
        return ("pass" if ok else "fail", "optimal circulation sits on critical edges")

    def calibrated_discount() -> tuple[str, str]:
        if not transitive:
            return skip_note
        schedule = config.schedule() or DiscountSchedule()
        u, a = calibrated_via_discount(graph, schedule)
        ok = calibration_residual(u, graph, beta) == 0 and abs(a - float(beta)) <= 1e-9
        return ("pass" if ok else "fail", "discount limit exactly calibrated")

    def mane_triangle() -> tuple[str, str]:
        if not transitive:
            return skip_note
        omega = omega_set(graph)
        n = len(graph.nodes)
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    if omega.mane.value(i, k) > omega.mane.value(i, j) + omega.mane.value(j, k):
                        return ("fail", f"triangle fails at ({i}, {j}, {k})")
        return ("pass", "excursion costs satisfy the triangle inequality")

    def mane_diagonal() -> tuple[str, str]:
        if not transitive:
            return skip_note
        omega = omega_set(graph)
        for i in range(len(graph.nodes)):
            zero = omega.mane.value(i, i) == 0
            if zero != (i in omega.critical.critical_nodes):
                return ("fail", f"diagonal mismatch at node {i}")
        return ("pass", "zero diagonal exactly on critical nodes")

    def representation() -> tuple[str, str]:
        if not transitive:
            return skip_note
        omega = omega_set(graph)
        u = maximal_calibrated(graph, omega)
        ok = reconstruct(represent(u, omega)).values == u.values
        return ("pass" if ok else "fail", "boundary-data round trip is exact")

    def family_calibrated() -> tuple[str, str]:
        if not transitive:
            return skip_note
        omega = omega_set(graph)
        cycle = max_mean_cycle(graph).witness_cycle
        x = point("", tuple(e.symbol for e in reversed(cycle)))
        u = mane_family_subaction(omega, x)
        ok = calibration_residual(u, graph, beta) == 0
        return ("pass" if ok else "fail", "excursion-cost family member calibrated")

    def omega_oracle() -> tuple[str, str]:
        if not transitive:
            return skip_note
        omega = omega_set(graph)
        cycle = max_mean_cycle(graph).witness_cycle
        samples = [point("", tuple(e.symbol for e in reversed(cycle)))]
        samples += [
            point("", (s,)) for s in config.system.symbols() if config.system.allows(s, s)
        ]
        for x in samples:
            if omega_membership(omega, x) != oracle_omega(
                config.system, config.potential, beta, x, Fraction(1, 64)
            ):
                return ("fail", f"membership disagrees on {x.symbols(4)}")
        return ("pass", f"membership matches the oracle on {len(samples)} points")

    def livsic_sign() -> tuple[str, str]:
        if not transitive:
            return skip_note
        result = livsic_test(graph)
        forward = beta
        if result.cohomologous and forward != result.constant:
            return ("fail", "coboundary constant disagrees with beta")
        return ("pass", "cohomology defect is nonnegative")

    return [
        ("beta_methods_agree", beta_methods),
        ("beta_oracle", beta_oracle),
        ("calibrated_discount", calibrated_discount),
        ("face_support", face_support),
        ("family_calibrated", family_calibrated),
        ("livsic_sign", livsic_sign),
        ("mane_diagonal", mane_diagonal),
        ("mane_triangle", mane_triangle),
        ("maximal_subaction", maximal_valid),
        ("omega_oracle", omega_oracle),
        ("refinement_inclusion", refinement),
        ("representation_roundtrip", representation),
    ]


def _contact_source_indices(u, graph: PrependGraph, beta: Fraction) -> frozenset[int]:
    return contact_sources(contact_locus(u, graph, beta), graph)


def cmd_check(config: ExperimentConfig, jobs: int = 1) -> dict:
    """Run the invariant suite (oracles included) against one config."""
    items = _check_items(config)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(lambda item: item[1](), items))
    else:
        outcomes = [run() for _, run in items]
    checks = [
        {"name": name, "status": status, "note": note}
        for (name, _), (status, note) in zip(items, outcomes)
    ]
    return {
        "checks": checks,
        "ok": all(c["status"] != "fail" for c in checks),
    }


def cmd_bench(configs: Mapping[str, ExperimentConfig], timings: bool = False) -> dict:
    """Size and optimum summary per config; wall time only on request."""
    entries = []
    for name in sorted(configs):
        config = configs[name]
        start = time.perf_counter()
        graph = _graph_of(config)
        cycle = max_mean_cycle(graph)
        parametric = parametric_beta(graph)
        lp_value, _ = beta_lp(graph)
        maximal_subaction(graph, cycle.beta)
        entry = {
            "name": name,
            "nodes": len(graph.nodes),
            "edges": len(graph.edges),
            "beta": _rat(cycle.beta),
            "agree": cycle.beta == parametric == lp_value,
            "transitivity": classify_transitivity(config.system).kind,
        }
        if timings:
            entry["elapsed_ms_float"] = (time.perf_counter() - start) * 1000.0
        entries.append(entry)
    return {"runs": entries}


# ---------------------------------------------------------------------------
# emission


def _flatten(prefix: str, obj, rows: list[tuple[str, str]]) -> None:
    if isinstance(obj, dict):
        for key in sorted(obj):
            _flatten(f"{prefix}.{key}" if prefix else str(key), obj[key], rows)
    elif isinstance(obj, (list, tuple)):
        for i, item in enumerate(obj):
            _flatten(f"{prefix}[{i}]", item, rows)
    else:
        rows.append((prefix, "" if obj is None else str(obj)))


def render_report(report: dict, fmt: str, command: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True) + "\n"
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    if command == "mane":
        words = sorted(report["phi"])
        writer.writerow(["src"] + words)
        for src in words:
            writer.writerow([src] + [report["phi"][src][tgt] for tgt in words])
    else:
        writer.writerow(["key", "value"])
        rows: list[tuple[str, str]] = []
        _flatten("", report, rows)
        writer.writerows(rows)
    return buffer.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# entry point


def _parse_boundary(text: str) -> tuple[Fraction, ...]:
    tokens = [t for t in re.split(r"[,\s]+", text.strip()) if t]
    if not tokens:
        raise ConfigError("boundary vector is empty", field="boundary")
    values = []
    for tok in tokens:
        if not _RATIONAL.match(tok):
            raise ConfigError(f"bad boundary entry {tok!r}", field="boundary")
        values.append(Fraction(tok))
    return tuple(values)


def _apply_overrides(config: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    updates = {}
    if getattr(args, "schedule", None) is not None:
        if not 1 <= args.schedule <= 64:
            raise ConfigError("schedule k_max must be in [1, 64]", field="schedule")
        updates["schedule_k_max"] = args.schedule
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    if not updates:
        return config
    return ExperimentConfig(
        config.system,
        config.potential,
        config.constraints,
        updates.get("schedule_k_max", config.schedule_k_max),
        updates.get("seed", config.seed),
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ergopt",
        description="Exact reports for optimal averages on subshifts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, config_required: bool = True) -> None:
        p.add_argument("--config", required=config_required, help="config file path")
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--schedule", type=int, help="override discount schedule k_max")
        p.add_argument("--seed", type=int, help="override the solver seed")

    common(sub.add_parser("beta", help="optimal average with certificate"))
    p_sub = sub.add_parser("subaction", help="maximal, calibrated, or u0 sub-action")
    common(p_sub)
    p_sub.add_argument("--kind", choices=("maximal", "calibrated", "u0"), default="maximal")
    common(sub.add_parser("mane", help="excursion costs and critical classes"))
    p_cls = sub.add_parser("classify", help="calibrated sub-action from boundary data")
    common(p_cls)
    p_cls.add_argument("--boundary", required=True, help="one rational per critical class")
    common(sub.add_parser("alpha", help="Legendre value at the config's multiplier"))
    p_chk = sub.add_parser("check", help="invariant suite including oracles")
    common(p_chk)
    p_chk.add_argument("--jobs", type=int, default=1, help="parallel check workers")
    p_bench = sub.add_parser("bench", help="size and optimum summary per fixture")
    common(p_bench, config_required=False)
    p_bench.add_argument("--timings", action="store_true", help="include wall-clock fields")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "bench":
            if args.config:
                configs = {Path(args.config).stem: _apply_overrides(load_config(args.config), args)}
            else:
                from . import fixtures

                configs = {name: fixtures.load(name) for name in fixtures.available()}
            report = cmd_bench(configs, timings=args.timings)
        else:
            config = _apply_overrides(load_config(args.config), args)
            if args.command == "beta":
                report = cmd_beta(config)
            elif args.command == "subaction":
                report = cmd_subaction(config, args.kind)
            elif args.command == "mane":
                report = cmd_mane(config)
            elif args.command == "classify":
                report = cmd_classify(config, _parse_boundary(args.boundary))
            elif args.command == "alpha":
                report = cmd_alpha(config)
            else:
                report = cmd_check(config, jobs=args.jobs)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NonConvergence as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return 4
    except ErgoptError as exc:
        print(f"hypothesis not met: {exc}", file=sys.stderr)
        return 3
    _emit(render_report(report, args.format, args.command), args.out)
    if args.command == "check" and not report["ok"]:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
