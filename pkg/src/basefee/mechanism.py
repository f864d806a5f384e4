"""Base-fee update rules and the per-block fee split.

Every rule is written against plain arithmetic operators, so passing
:class:`fractions.Fraction` parameters and block sizes gives an exact
rational trajectory while floats give the fast path.  Both go through the
same code.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational, Real
from typing import Union

from .params import ProtocolParams

#: Share of the fee pool paid to each block's miner.
POOL_BONUS_RATE = 8192


@dataclass(frozen=True, slots=True)
class Eip1559:
    """Plain EIP-1559: the last block's size drives the update."""

    def label(self) -> str:
        return "eip"


@dataclass(frozen=True, slots=True)
class GeometricAvg:
    """Exponentially weighted block-size average with weight base ``q``."""

    q: Real

    def __post_init__(self) -> None:
        if not 0 < self.q < 1:
            raise ValueError(f"q must lie in (0, 1), got {self.q}")

    def label(self) -> str:
        return f"geo:{self.q:g}" if isinstance(self.q, float) else f"geo:{self.q}"


@dataclass(frozen=True, slots=True)
class WindowAvg:
    """Arithmetic mean of the last ``window`` block sizes."""

    window: int

    def __post_init__(self) -> None:
        if int(self.window) != self.window or self.window < 1:
            raise ValueError(f"window must be a positive integer, got {self.window}")

    def label(self) -> str:
        return f"window:{self.window}"


@dataclass(frozen=True, slots=True)
class FeePool:
    """EIP-1559 update, with half of the burned base fee diverted to a pool."""

    def label(self) -> str:
        return "pool"


MechanismKind = Union[Eip1559, GeometricAvg, WindowAvg, FeePool]


def parse_kind(text: str) -> MechanismKind:
    """Parse ``eip``, ``geo:<q>``, ``window:<W>`` or ``pool``."""
    name, _, arg = text.strip().partition(":")
    name = name.lower()
    try:
        if name in ("eip", "eip1559"):
            return Eip1559()
        if name in ("geo", "geometric"):
            return GeometricAvg(float(arg))
        if name in ("window", "win"):
            return WindowAvg(int(arg))
        if name in ("pool", "feepool"):
            return FeePool()
    except ValueError as exc:
        raise ValueError(f"bad mechanism {text!r}: {exc}") from None
    raise ValueError(f"unknown mechanism {text!r}")


@dataclass(frozen=True, slots=True)
class ChainState:
    base_fee: Real
    height: int = 0
    s_avg: Real | None = None
    window: tuple | None = None
    pool: Real | None = None


def _check_size(size: Real, protocol: ProtocolParams) -> None:
    if size < 0 or size > protocol.max_size:
        raise ValueError(
            f"block size {size} outside [0, {protocol.max_size}]"
        )


def init_state(
    kind: MechanismKind, protocol: ProtocolParams, first_block_size: Real
) -> ChainState:
    """Genesis state for ``kind``.

    The auxiliary statistic is seeded with the first block's size: ``s_avg``
    takes it directly, and the window is filled with ``W`` copies of it.
    """
    _check_size(first_block_size, protocol)
    fee = protocol.initial_base_fee
    if isinstance(kind, GeometricAvg):
        return ChainState(fee, s_avg=first_block_size)
    if isinstance(kind, WindowAvg):
        return ChainState(fee, window=(first_block_size,) * kind.window)
    if isinstance(kind, FeePool):
        return ChainState(fee, pool=0 * first_block_size)
    return ChainState(fee)


def _scaled(base_fee: Real, size: Real, protocol: ProtocolParams) -> Real:
    s_star = protocol.target_size
    return base_fee * (1 + protocol.phi * (size - s_star) / s_star)


def step(
    state: ChainState, block_size: Real, kind: MechanismKind, protocol: ProtocolParams
) -> ChainState:
    """Apply one block of size ``block_size`` and return the next state.

    The geometric rule folds the new block into ``s_avg`` before computing the
    next base fee, so an empty block at steady state with ``q = 1/2`` and
    ``phi = 1/8`` lowers the fee to ``15/16`` of its value.
    """
    _check_size(block_size, protocol)
    height = state.height + 1
    if isinstance(kind, GeometricAvg):
        s_avg = (1 - kind.q) * block_size + kind.q * state.s_avg
        return ChainState(
            _scaled(state.base_fee, s_avg, protocol), height, s_avg=s_avg
        )
    if isinstance(kind, WindowAvg):
        window = state.window[1:] + (block_size,)
        total = sum(window)
        # int sizes would otherwise fall out of the rational path here
        mean = Fraction(total, len(window)) if isinstance(total, Rational) else total / len(window)
        return ChainState(
            _scaled(state.base_fee, mean, protocol), height, window=window
        )
    if isinstance(kind, FeePool):
        pool = state.pool + block_size * state.base_fee / 2
        return ChainState(
            _scaled(state.base_fee, block_size, protocol), height, pool=pool
        )
    if isinstance(kind, Eip1559):
        return ChainState(_scaled(state.base_fee, block_size, protocol), height)
    raise TypeError(f"unknown mechanism kind {kind!r}")


def pool_bonus(state: ChainState) -> Real:
    """Per-block miner bonus paid out of the fee pool."""
    if state.pool is None:
        raise ValueError("state carries no fee pool")
    return state.pool / POOL_BONUS_RATE


def payout_split(
    block_size: Real, base_fee: Real, tip_per_gas: Real
) -> tuple[Real, Real]:
    """Return ``(burned, miner_revenue)`` for a block of uniform-tip gas."""
    if block_size < 0 or base_fee < 0 or tip_per_gas < 0:
        raise ValueError("block size, base fee and tip must be non-negative")
    return block_size * base_fee, block_size * tip_per_gas


def trajectory(
    kind: MechanismKind,
    protocol: ProtocolParams,
    sizes,
    state: ChainState | None = None,
) -> list[ChainState]:
    """States after each block in ``sizes``, starting from ``state``.

    Without an explicit start state the chain begins at steady state: base fee
    ``initial_base_fee`` and every statistic at the target size.
    """
    if state is None:
        state = init_state(kind, protocol, protocol.target_size)
    states = []
    for size in sizes:
        state = step(state, size, kind, protocol)
        states.append(state)
    return states
