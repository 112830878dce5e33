"""Static and dynamic demand-adjustment protocols.

Static mode: every slot starts with a full distributed-averaging phase so
that each building learns the aggregate demand, then all buildings step
their demand against the resulting price.

Dynamic mode: a single tracking round per slot. Each building prices its
own running estimate of the aggregate, steps its demand, and folds its
demand change into the next tracking round.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import logging
from typing import TYPE_CHECKING, Sequence

import numpy as np

from . import agent as agent_mod
from .agent import AgentParams, BuildingState
from .consensus import WeightMatrix, best_constant_weights, run_averaging, tracking_round
from .errors import AveragingError
from .pricing import PricingParams, price

if TYPE_CHECKING:
    from .scenario import Scenario

__all__ = [
    "MODES",
    "ProtocolConfig",
    "SlotOutcome",
    "SimulationRecord",
    "static_slot",
    "dynamic_slot",
    "run",
]

log = logging.getLogger(__name__)

MODES = ("static", "dynamic")


@dataclass(frozen=True)
class ProtocolConfig:
    """Run-loop settings.

    Attributes:
        mode: ``static`` or ``dynamic``.
        max_slots: Hard cap on slots; hitting it is reported, not raised.
        eq_tolerance: Equilibrium threshold on ``max |delta_i|``.
        eq_consecutive: Slots in a row the threshold must hold.
        avg_tolerance: Relative stopping band of the static averaging phase.
        avg_max_rounds: Round cap of the averaging phase (None: ``max(500, 10 n^2)``).
        n_known: Building count each agent uses to turn an average into a
            total (None: the actual count).
    """

    mode: str = "static"
    max_slots: int = 500
    eq_tolerance: float = 1e-4
    eq_consecutive: int = 5
    avg_tolerance: float = 1e-9
    avg_max_rounds: int | None = None
    n_known: int | None = None

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.max_slots < 1:
            raise ValueError("max_slots must be >= 1")
        if self.eq_consecutive < 1:
            raise ValueError("eq_consecutive must be >= 1")
        if not self.eq_tolerance > 0:
            raise ValueError("eq_tolerance must be > 0")
        if not self.avg_tolerance > 0:
            raise ValueError("avg_tolerance must be > 0")
        if self.avg_max_rounds is not None and self.avg_max_rounds < 1:
            raise ValueError("avg_max_rounds must be >= 1")
        if self.n_known is not None and self.n_known < 1:
            raise ValueError("n_known must be >= 1")


@dataclass(frozen=True, eq=False)
class SlotOutcome:
    """Everything observed in one slot.

    ``demands``, ``estimates`` and ``prices`` are the values the slot
    started from and priced with; ``deltas`` are the changes applied at
    the end of the slot.
    """

    slot: int
    demands: np.ndarray
    estimates: np.ndarray
    prices: np.ndarray
    deltas: np.ndarray
    total_true: float
    totals_estimated: np.ndarray
    constraint_ok: bool
    consensus_rounds: int
    clamp_events: int

    @property
    def max_delta(self) -> float:
        return float(np.max(np.abs(self.deltas)))


@dataclass(eq=False)
class SimulationRecord:
    scenario: "Scenario | None"
    mode: str
    capacity: float
    initial_demands: np.ndarray
    slots: list[SlotOutcome] = field(default_factory=list)
    equilibrium_slot: int | None = None
    final_demands: np.ndarray | None = None
    final_prices: np.ndarray | None = None
    optimal_demands: np.ndarray | None = None
    clamp_total: int = 0

    @property
    def cut_down(self) -> np.ndarray:
        final = self.initial_demands if self.final_demands is None else self.final_demands
        return self.initial_demands - final

    @property
    def final_total(self) -> float:
        final = self.initial_demands if self.final_demands is None else self.final_demands
        return float(np.sum(final))

    @property
    def final_price_mean(self) -> float | None:
        if self.final_prices is None:
            return None
        return float(np.mean(self.final_prices))

    @property
    def converged(self) -> bool:
        return self.equilibrium_slot is not None


def _step_agents(
    states: Sequence[BuildingState], prices: np.ndarray, agent_params: AgentParams
) -> tuple[list[BuildingState], np.ndarray, int]:
    new_states = []
    deltas = np.empty(len(states))
    clamps = 0
    for i, st in enumerate(states):
        new_demand, delta, clamped = agent_mod.demand_update(st, prices[i], agent_params)
        new_states.append(st.with_(demand=new_demand))
        deltas[i] = delta
        clamps += clamped
    return new_states, deltas, clamps


def _agent_prices(pricing: PricingParams, totals: np.ndarray) -> np.ndarray:
    # a tracking estimate can dip below zero transiently; price it as zero load
    return np.array([price(pricing, max(t, 0.0)) for t in totals])


def static_slot(
    states: Sequence[BuildingState],
    wm: WeightMatrix,
    pricing: PricingParams,
    agent_params: AgentParams,
    cfg: ProtocolConfig,
    slot: int = 1,
) -> tuple[list[BuildingState], SlotOutcome]:
    """Average to consensus, price the consensus total, step every demand."""
    if not states:
        raise ValueError("need at least one building")
    if len(states) != wm.n:
        raise ValueError(f"{len(states)} states for a {wm.n}-node weight matrix")
    n_known = cfg.n_known or len(states)
    demands = np.array([s.demand for s in states])

    estimates, rounds = run_averaging(wm, demands, cfg.avg_tolerance, cfg.avg_max_rounds)
    totals = n_known * estimates
    prices = _agent_prices(pricing, totals)
    stepped, deltas, clamps = _step_agents(states, prices, agent_params)
    new_states = [s.with_(estimate=float(e)) for s, e in zip(stepped, estimates)]

    total = float(np.sum(demands))
    outcome = SlotOutcome(
        slot=slot,
        demands=demands,
        estimates=estimates,
        prices=prices,
        deltas=deltas,
        total_true=total,
        totals_estimated=totals,
        constraint_ok=total < pricing.capacity,
        consensus_rounds=rounds,
        clamp_events=clamps,
    )
    return new_states, outcome


def dynamic_slot(
    states: Sequence[BuildingState],
    wm: WeightMatrix,
    pricing: PricingParams,
    agent_params: AgentParams,
    cfg: ProtocolConfig,
    slot: int = 1,
) -> tuple[list[BuildingState], SlotOutcome]:
    """Price own estimate, step demand, then one tracking round with the deltas."""
    if not states:
        raise ValueError("need at least one building")
    if len(states) != wm.n:
        raise ValueError(f"{len(states)} states for a {wm.n}-node weight matrix")
    n_known = cfg.n_known or len(states)
    demands = np.array([s.demand for s in states])
    estimates = np.array([s.estimate for s in states])

    totals = n_known * estimates
    prices = _agent_prices(pricing, totals)
    stepped, deltas, clamps = _step_agents(states, prices, agent_params)
    next_estimates = tracking_round(wm, estimates, deltas)
    new_states = [s.with_(estimate=float(e)) for s, e in zip(stepped, next_estimates)]

    total = float(np.sum(demands))
    outcome = SlotOutcome(
        slot=slot,
        demands=demands,
        estimates=estimates,
        prices=prices,
        deltas=deltas,
        total_true=total,
        totals_estimated=totals,
        constraint_ok=total < pricing.capacity,
        consensus_rounds=0,
        clamp_events=clamps,
    )
    return new_states, outcome


def run(scenario: "Scenario", mode: str | None = None) -> SimulationRecord:
    """Run slots until equilibrium or ``max_slots``.

    Equilibrium means ``max |delta_i| < eq_tolerance`` for ``eq_consecutive``
    slots in a row; the slot completing the streak is recorded. ``mode``
    overrides the scenario's protocol mode.

    Raises:
        AveragingError: static averaging failed; ``err.record`` holds the
            slots completed so far.
    """
    cfg = scenario.protocol
    mode = mode or cfg.mode
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    wm = best_constant_weights(scenario.build_graph())
    slot_fn = static_slot if mode == "static" else dynamic_slot

    initial = np.array(scenario.initial_demand, dtype=float)
    states = [
        BuildingState(id=i, demand=float(x), wtp=float(w), estimate=float(x))
        for i, (x, w) in enumerate(zip(initial, scenario.wtp))
    ]
    record = SimulationRecord(
        scenario=scenario, mode=mode, capacity=scenario.pricing.capacity, initial_demands=initial
    )

    streak = 0
    for slot in range(1, cfg.max_slots + 1):
        try:
            states, outcome = slot_fn(states, wm, scenario.pricing, scenario.agent, cfg, slot)
        except AveragingError as err:
            _finish(record, states)
            err.record = record
            raise
        record.slots.append(outcome)
        record.clamp_total += outcome.clamp_events
        streak = streak + 1 if outcome.max_delta < cfg.eq_tolerance else 0
        if streak >= cfg.eq_consecutive:
            record.equilibrium_slot = slot
            break
    else:
        log.info("no equilibrium after %d slots (%s mode)", cfg.max_slots, mode)

    _finish(record, states)
    return record


def _finish(record: SimulationRecord, states: Sequence[BuildingState]) -> None:
    record.final_demands = np.array([s.demand for s in states])
    if record.slots:
        last = record.slots[-1]
        record.final_prices = last.prices.copy()
        wtp = np.array([s.wtp for s in states])
        with np.errstate(divide="ignore"):
            record.optimal_demands = np.where(last.prices > 0, wtp / last.prices, np.inf)
