"""Congestion price as a function of aggregate demand.

The price has a polynomial base term ``a * (total / capacity) ** k`` plus a
sigmoid surcharge that only switches on once the total exceeds capacity.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

__all__ = ["PricingParams", "SIGMOID_KINDS", "base_price", "overload_penalty", "price"]

SIGMOID_KINDS = ("standard", "zero_centered")
_BELOW_ONE = math.nextafter(1.0, 0.0)


@dataclass(frozen=True)
class PricingParams:
    """Price function parameters.

    Attributes:
        capacity: Grid maximum the aggregate demand should stay below.
        a: Basic price of power; the price at exactly full capacity.
        k: Exponent on the utilisation ratio.
        sigmoid_kind: ``zero_centered`` (tanh, continuous at capacity) or
            ``standard`` (logistic, jumps by 0.5 at capacity).
        tau: Width of the sigmoid in power units.
    """

    capacity: float
    a: float = 1.0
    k: float = 4.0
    sigmoid_kind: str = "zero_centered"
    tau: float = 20.0

    def __post_init__(self) -> None:
        if not self.a > 0:
            raise ValueError(f"a must be > 0, got {self.a}")
        if not self.k >= 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if not self.capacity > 0:
            raise ValueError(f"capacity must be > 0, got {self.capacity}")
        if not self.tau > 0:
            raise ValueError(f"tau must be > 0, got {self.tau}")
        if self.sigmoid_kind not in SIGMOID_KINDS:
            raise ValueError(
                f"sigmoid_kind must be one of {SIGMOID_KINDS}, got {self.sigmoid_kind!r}"
            )


def base_price(params: PricingParams, total_demand: float) -> float:
    if total_demand < 0:
        raise ValueError(f"total demand must be >= 0, got {total_demand}")
    return params.a * (total_demand / params.capacity) ** params.k


def overload_penalty(params: PricingParams, excess: float) -> float:
    """Sigmoid surcharge gated by a strict unit step (zero for ``excess <= 0``)."""
    if excess <= 0:
        return 0.0
    z = excess / params.tau
    if params.sigmoid_kind == "zero_centered":
        s = math.tanh(z / 2.0)
    else:
        s = 1.0 / (1.0 + math.exp(-z))
    # saturation rounds to 1.0 in floating point; the surcharge stays below a full unit
    return min(s, _BELOW_ONE)


def price(params: PricingParams, total_demand: float) -> float:
    return base_price(params, total_demand) + overload_penalty(
        params, total_demand - params.capacity
    )
