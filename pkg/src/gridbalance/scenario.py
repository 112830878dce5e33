"""Scenario configuration: parsing, validation, serialisation and the bundled preset.

The format is line based::

    # comment
    graph.kind = ring          # ring | path | complete | erdos_renyi | grid2d
    graph.n = 10
    agents.wtp = 45, 98, 67
    edge = 0,1                 # repeatable; replaces graph.kind

Keys are unique except ``edge``. Unknown keys are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Callable

import numpy as np

from .agent import AgentParams
from .errors import (
    GridBalanceError,
    LengthMismatchError,
    ScenarioSyntaxError,
    ScenarioValidationError,
)
from .pricing import SIGMOID_KINDS, PricingParams
from .protocol import MODES, ProtocolConfig
from .topology import KINDS, Graph, generate, is_connected

__all__ = [
    "GraphSpec",
    "Scenario",
    "parse_scenario",
    "load_scenario",
    "serialize",
    "paper_preset",
    "paper_preset_text",
    "sample_initial",
    "edge_fragment",
]

EXPLICIT = "edges"


@dataclass(frozen=True)
class GraphSpec:
    """Either a generated topology (``kind`` in KINDS) or an explicit edge list."""

    kind: str
    n: int
    p: float | None = None
    edges: tuple[tuple[int, int], ...] = ()

    def build(self, seed: int) -> Graph:
        if self.kind == EXPLICIT:
            return Graph(self.n, self.edges)
        return generate(self.kind, self.n, seed=seed, p=self.p)


@dataclass(frozen=True)
class Scenario:
    graph: GraphSpec
    wtp: tuple[float, ...]
    initial_demand: tuple[float, ...]
    pricing: PricingParams
    agent: AgentParams = field(default_factory=AgentParams)
    protocol: ProtocolConfig = field(default_factory=ProtocolConfig)
    seed: int = 0
    output_dir: str = "out"

    @property
    def n(self) -> int:
        return self.graph.n

    def build_graph(self) -> Graph:
        return self.graph.build(self.seed)


def _parse_int(text: str) -> int:
    return int(text)


def _parse_float(text: str) -> float:
    value = float(text)
    if not np.isfinite(value):
        raise ValueError("must be finite")
    return value


def _parse_vector(text: str) -> tuple[float, ...]:
    return tuple(_parse_float(part) for part in text.split(","))


def _parse_choice(choices: tuple[str, ...]) -> Callable[[str], str]:
    def parse(text: str) -> str:
        if text not in choices:
            raise ValueError(f"expected one of {', '.join(choices)}")
        return text

    return parse


_KEYS: dict[str, Callable[[str], object]] = {
    "graph.kind": _parse_choice(KINDS),
    "graph.n": _parse_int,
    "graph.p": _parse_float,
    "seed": _parse_int,
    "agents.wtp": _parse_vector,
    "agents.initial_demand": _parse_vector,
    "agents.alpha": _parse_float,
    "agents.demand_floor": _parse_float,
    "price.a": _parse_float,
    "price.k": _parse_float,
    "price.capacity": _parse_float,
    "price.sigmoid": _parse_choice(SIGMOID_KINDS),
    "price.tau": _parse_float,
    "protocol.mode": _parse_choice(MODES),
    "protocol.max_slots": _parse_int,
    "protocol.eq_tolerance": _parse_float,
    "protocol.eq_consecutive": _parse_int,
    "protocol.avg_tolerance": _parse_float,
    "protocol.avg_max_rounds": _parse_int,
    "output.dir": str,
}
_REQUIRED = ("graph.n", "agents.wtp", "agents.initial_demand", "price.capacity")


def _parse_edge(text: str, lineno: int) -> tuple[int, int]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise ScenarioValidationError(
            f"line {lineno}: edge must be 'i,j', got {text!r}", key="edge", line=lineno
        )
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise ScenarioValidationError(
            f"line {lineno}: edge endpoints must be integers, got {text!r}",
            key="edge",
            line=lineno,
        ) from None


_FIELD_KEYS = {"sigmoid_kind": "sigmoid"}


def _build(section: str, factory: Callable, **kwargs):
    try:
        return factory(**kwargs)
    except ValueError as exc:
        # dataclass validators lead their messages with the offending field name
        field_name = str(exc).split()[0]
        key = f"{section}.{_FIELD_KEYS.get(field_name, field_name)}" if section else field_name
        raise ScenarioValidationError(f"{key}: {exc}", key=key) from None


def parse_scenario(text: str) -> Scenario:
    """Parse and fully validate scenario text.

    Raises:
        ScenarioSyntaxError: malformed line (carries the line number).
        ScenarioValidationError: unknown, duplicate, missing or invalid key.
        LengthMismatchError: a per-building vector of the wrong length.
    """
    values: dict[str, object] = {}
    edges: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioSyntaxError(
                f"line {lineno}: expected 'key = value', got {raw.strip()!r}", line=lineno
            )
        key, _, value = (part.strip() for part in line.partition("="))
        if not key or not value:
            raise ScenarioSyntaxError(
                f"line {lineno}: empty key or value in {raw.strip()!r}", line=lineno
            )
        if key == "edge":
            edges.append(_parse_edge(value, lineno))
            continue
        if key not in _KEYS:
            raise ScenarioValidationError(
                f"line {lineno}: unknown key {key!r}", key=key, line=lineno
            )
        if key in values:
            raise ScenarioValidationError(
                f"line {lineno}: duplicate key {key!r}", key=key, line=lineno
            )
        try:
            values[key] = _KEYS[key](value)
        except ValueError as exc:
            raise ScenarioValidationError(
                f"line {lineno}: {key}: invalid value {value!r} ({exc})", key=key, line=lineno
            ) from None

    for key in _REQUIRED:
        if key not in values:
            raise ScenarioValidationError(f"missing required key {key!r}", key=key)

    n = values["graph.n"]
    if n < 1:
        raise ScenarioValidationError("graph.n must be >= 1", key="graph.n")
    kind = values.get("graph.kind")
    if kind is not None and edges:
        raise ScenarioValidationError("give either graph.kind or edge lines, not both", key="edge")
    if kind is None:
        kind = EXPLICIT
    p = values.get("graph.p")
    if p is not None and kind != "erdos_renyi":
        raise ScenarioValidationError("graph.p only applies to erdos_renyi", key="graph.p")
    if kind == "erdos_renyi" and p is None:
        raise ScenarioValidationError("erdos_renyi needs graph.p", key="graph.p")
    graph = GraphSpec(kind=kind, n=n, p=p, edges=tuple(edges))

    for key in ("agents.wtp", "agents.initial_demand"):
        vec = values[key]
        if len(vec) != n:
            raise LengthMismatchError(
                f"{key} has {len(vec)} entries but graph.n = {n}", key=key
            )
        if any(v <= 0 for v in vec):
            raise ScenarioValidationError(f"{key} entries must all be > 0", key=key)

    pricing = _build(
        "price",
        PricingParams,
        capacity=values["price.capacity"],
        **{
            name: values[key]
            for key, name in (("price.a", "a"), ("price.k", "k"),
                              ("price.sigmoid", "sigmoid_kind"), ("price.tau", "tau"))
            if key in values
        },
    )
    agent = _build(
        "agents",
        AgentParams,
        **{
            name: values[key]
            for key, name in (("agents.alpha", "alpha"), ("agents.demand_floor", "demand_floor"))
            if key in values
        },
    )
    protocol = _build(
        "protocol",
        ProtocolConfig,
        **{
            key.split(".", 1)[1]: values[key]
            for key in ("protocol.mode", "protocol.max_slots", "protocol.eq_tolerance",
                        "protocol.eq_consecutive", "protocol.avg_tolerance",
                        "protocol.avg_max_rounds")
            if key in values
        },
    )

    scenario = Scenario(
        graph=graph,
        wtp=values["agents.wtp"],
        initial_demand=values["agents.initial_demand"],
        pricing=pricing,
        agent=agent,
        protocol=protocol,
        seed=values.get("seed", 0),
        output_dir=values.get("output.dir", "out"),
    )
    _check_graph(scenario)
    return scenario


def _check_graph(scenario: Scenario) -> None:
    key = "edge" if scenario.graph.kind == EXPLICIT else "graph.kind"
    try:
        g = scenario.build_graph()
    except (ValueError, GridBalanceError) as exc:
        raise ScenarioValidationError(f"{key}: {exc}", key=key) from None
    if not is_connected(g):
        raise ScenarioValidationError(f"{key}: communication graph is not connected", key=key)


def load_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())


def _fmt(x: float) -> str:
    return repr(float(x))


def _vec(v) -> str:
    return ", ".join(_fmt(x) for x in v)


def edge_fragment(g: Graph) -> str:
    lines = [f"graph.n = {g.n}"]
    lines += [f"edge = {i},{j}" for i, j in g.edges]
    return "\n".join(lines) + "\n"


def serialize(scenario: Scenario) -> str:
    """Write every key explicitly; ``parse_scenario`` inverts this exactly."""
    g = scenario.graph
    lines = []
    if g.kind == EXPLICIT:
        lines.append(f"graph.n = {g.n}")
        lines += [f"edge = {i},{j}" for i, j in g.edges]
    else:
        lines += [f"graph.kind = {g.kind}", f"graph.n = {g.n}"]
        if g.p is not None:
            lines.append(f"graph.p = {_fmt(g.p)}")
    pr, ag, pc = scenario.pricing, scenario.agent, scenario.protocol
    lines += [
        f"seed = {scenario.seed}",
        "",
        f"agents.wtp = {_vec(scenario.wtp)}",
        f"agents.initial_demand = {_vec(scenario.initial_demand)}",
        f"agents.alpha = {_fmt(ag.alpha)}",
        f"agents.demand_floor = {_fmt(ag.demand_floor)}",
        "",
        f"price.a = {_fmt(pr.a)}",
        f"price.k = {_fmt(pr.k)}",
        f"price.capacity = {_fmt(pr.capacity)}",
        f"price.sigmoid = {pr.sigmoid_kind}",
        f"price.tau = {_fmt(pr.tau)}",
        "",
        f"protocol.mode = {pc.mode}",
        f"protocol.max_slots = {pc.max_slots}",
        f"protocol.eq_tolerance = {_fmt(pc.eq_tolerance)}",
        f"protocol.eq_consecutive = {pc.eq_consecutive}",
        f"protocol.avg_tolerance = {_fmt(pc.avg_tolerance)}",
    ]
    if pc.avg_max_rounds is not None:
        lines.append(f"protocol.avg_max_rounds = {pc.avg_max_rounds}")
    lines += ["", f"output.dir = {scenario.output_dir}"]
    return "\n".join(lines) + "\n"


def paper_preset_text() -> str:
    return resources.files("gridbalance").joinpath("data/paper_preset.cfg").read_text("utf-8")


def paper_preset() -> Scenario:
    """Ten-building reference scenario (capacity 700, a=1, k=4, alpha=0.05)."""
    return parse_scenario(paper_preset_text())


def sample_initial(scenario: Scenario, seed: int, low: float = 50.0, high: float = 100.0) -> Scenario:
    """Replace the initial demands with draws from ``U[low, high)``."""
    rng = np.random.default_rng(seed)
    draws = tuple(float(x) for x in rng.uniform(low, high, scenario.n))
    return replace(scenario, initial_demand=draws)
