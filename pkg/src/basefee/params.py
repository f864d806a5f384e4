"""Model parameters and the two-point steady-state demand model.

Demand is summarised by two points on a decreasing curve: at the target
base fee ``b_star`` exactly ``target_size`` units of gas are demanded, and at
any lower base fee the block can be filled to ``max_size``.  This is the best
case for an honest miner following a manipulated block, and it is the only
shape the analysis and simulation ever look at.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from numbers import Real


class Bidding(enum.Enum):
    """How users set fee caps and tips.

    ``HONEST`` users bid ``b* + eps`` with tip ``eps``.  ``ATTACK`` users know
    the base fee is being pushed down and bid ``b* + (1-alpha) eps`` with tip
    ``phi b* + (1-alpha) eps``.
    """

    HONEST = "honest"
    ATTACK = "attack"


@dataclass(frozen=True, slots=True)
class ProtocolParams:
    phi: Real = 0.125
    target_size: Real = 1
    initial_base_fee: Real = 1
    max_size: Real = field(init=False)

    def __post_init__(self) -> None:
        # phi = 0 is allowed as the no-adjustment limit used in the analytics.
        if not 0 <= self.phi < 1:
            raise ValueError(f"phi must lie in [0, 1), got {self.phi}")
        if self.target_size <= 0:
            raise ValueError("target_size must be positive")
        if self.initial_base_fee <= 0:
            raise ValueError("initial_base_fee must be positive")
        object.__setattr__(self, "max_size", 2 * self.target_size)


@dataclass(frozen=True, slots=True)
class DemandParams:
    """Steady-state economics.

    ``b_star`` is the target base fee, ``eps`` the steady-state tip,
    ``alpha`` the share of the tip colluding users keep, and ``delta`` the
    extra payout an honest miner earns from filling a block to ``2 s*`` at a
    lowered base fee (0: extra transactions pay nothing above the base fee,
    1: they pay the full ``b* + eps``).
    """

    b_star: Real = 1
    eps: Real = 0.04
    alpha: Real = 0.5
    delta: Real = 0.2

    def __post_init__(self) -> None:
        if self.b_star <= 0:
            raise ValueError("b_star must be positive")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not 0 <= self.delta <= 1:
            raise ValueError(f"delta must lie in [0, 1], got {self.delta}")

    @property
    def eps_ratio(self) -> Real:
        return self.eps / self.b_star

    def fee_cap(self, protocol: ProtocolParams, bidding: Bidding) -> Real:
        if bidding is Bidding.HONEST:
            return self.b_star + self.eps
        return self.b_star + (1 - self.alpha) * self.eps

    def max_tip(self, protocol: ProtocolParams, bidding: Bidding) -> Real:
        if bidding is Bidding.HONEST:
            return self.eps
        return protocol.phi * self.b_star + (1 - self.alpha) * self.eps


@dataclass(frozen=True, slots=True)
class MinerPowers:
    p_x: Real
    p_y: Real = 0

    def __post_init__(self) -> None:
        if not 0 <= self.p_x <= 1 or not 0 <= self.p_y <= 1:
            raise ValueError("mining powers must lie in [0, 1]")
        if self.p_x + self.p_y > 1:
            raise ValueError("p_x + p_y must not exceed 1")


def _check_base_fee(base_fee: Real) -> None:
    if not base_fee > 0:
        raise ValueError(f"base fee must be positive, got {base_fee}")


def available_block_size(
    base_fee: Real, protocol: ProtocolParams, demand: DemandParams
) -> Real:
    """Gas demanded at ``base_fee``: ``s*`` at or above ``b*``, ``2 s*`` below."""
    _check_base_fee(base_fee)
    if base_fee >= demand.b_star:
        return protocol.target_size
    return protocol.max_size


def miner_tip_per_gas(
    base_fee: Real,
    demand: DemandParams,
    protocol: ProtocolParams,
    bidding: Bidding = Bidding.ATTACK,
) -> Real:
    """Per-gas tip ``min(eps_tx, c_tx - base_fee)``, floored at zero.

    A zero tip means the fee cap is below the base fee and the transaction
    would not be included.
    """
    _check_base_fee(base_fee)
    cap = demand.fee_cap(protocol, bidding)
    tip = min(demand.max_tip(protocol, bidding), cap - base_fee)
    return tip if tip > 0 else type(tip)(0)
