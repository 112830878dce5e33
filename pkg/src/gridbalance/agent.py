"""A single building: log utility, payoff and the price-driven demand step."""

from __future__ import annotations

from dataclasses import dataclass, replace
import math

__all__ = [
    "AgentParams",
    "BuildingState",
    "utility",
    "net_payoff",
    "demand_update",
    "optimal_demand",
]


@dataclass(frozen=True)
class AgentParams:
    """Step size of the demand update and the positive clamp on demand."""

    alpha: float = 0.05
    demand_floor: float = 1e-6

    def __post_init__(self) -> None:
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if not self.demand_floor > 0:
            raise ValueError(f"demand_floor must be > 0, got {self.demand_floor}")


@dataclass(frozen=True)
class BuildingState:
    """One building's view: its demand, willingness to pay and average estimate."""

    id: int
    demand: float
    wtp: float
    estimate: float = 0.0

    def with_(self, **changes) -> "BuildingState":
        return replace(self, **changes)


def utility(wtp: float, demand: float) -> float:
    if demand <= 0:
        raise ValueError(f"utility undefined for demand {demand} <= 0")
    return wtp * math.log(demand)


def net_payoff(wtp: float, demand: float, price: float) -> float:
    return utility(wtp, demand) - demand * price


def demand_update(
    state: BuildingState, price: float, params: AgentParams
) -> tuple[float, float, bool]:
    """Gradient step ``x + alpha * (w - x * p)`` clamped at ``demand_floor``.

    Returns ``(new_demand, delta, clamped)``. ``delta`` is taken after the
    clamp so that the tracking estimates keep summing to the true demands.
    """
    raw = state.demand + params.alpha * (state.wtp - state.demand * price)
    clamped = raw < params.demand_floor
    new_demand = params.demand_floor if clamped else raw
    return new_demand, new_demand - state.demand, clamped


def optimal_demand(wtp: float, price: float) -> float:
    """Maximiser ``w / p`` of the net payoff at a fixed price."""
    if price <= 0:
        raise ValueError(f"optimal demand needs a positive price, got {price}")
    return wtp / price
