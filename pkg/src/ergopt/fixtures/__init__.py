"""Bundled example configurations.

Each fixture is a self-contained config file exercising a distinct regime:
single heavy loop, constant weights, two competing loops, a weight split
across a 2-cycle, golden-mean adjacency at two window depths, a depth-two
past that separates decorations, and a reducible transition matrix.
"""

from __future__ import annotations

from importlib import resources

_NAMES = (
    "f1",
    "f3",
    "f5",
    "f6",
    "golden_q1",
    "golden_q2",
    "counterexample_tails",
    "reducible",
)


def available() -> tuple[str, ...]:
    """Names accepted by fixture_text and load, in corpus order."""
    return _NAMES


def fixture_text(name: str) -> str:
    if name not in _NAMES:
        raise KeyError(f"unknown fixture {name!r}; choose from {_NAMES}")
    return resources.files(__package__).joinpath(f"{name}.cfg").read_text()


def load(name: str):
    """Parse a bundled fixture into an ExperimentConfig."""
    from ergopt.cli_reports import parse_config_text

    return parse_config_text(fixture_text(name), source=f"fixture:{name}")
