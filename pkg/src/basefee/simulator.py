"""Monte Carlo comparison of X's attack against honest mining.

Each run starts at steady state with X mining an empty block.  Afterwards X
proposes each block with probability ``p_x`` and mines a target-size block;
otherwise an honest miner fills the block.  The run ends once the base fee is
back to ``recovery_fraction * b*``.  The honest counterfactual replays the
same proposer sequence with the fee pinned at ``b*``: X earns ``s* eps`` for
each of her blocks, the opening block included.

Randomness
----------
Run ``i`` of a config seeded with ``base_seed`` gets its own PCG64 stream
(the 128-bit XSL-RR generator, as shipped in numpy).  The 128-bit state and
increment are four SplitMix64 outputs drawn from the counter
``base_seed + (i + 1) * 0x9E3779B97F4A7C15`` (mod 2**64), with the increment
forced odd.  Uniforms are ``(raw >> 11) * 2**-53``, and X proposes a block iff
the uniform is below ``p_x``.  Nothing depends on numpy's seeding machinery,
so the streams can be reproduced outside Python.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Sequence

import numpy as np

from .mechanism import (
    ChainState,
    Eip1559,
    FeePool,
    GeometricAvg,
    MechanismKind,
    POOL_BONUS_RATE,
    init_state,
    pool_bonus,
    step,
)
from .params import (
    Bidding,
    DemandParams,
    ProtocolParams,
    available_block_size,
    miner_tip_per_gas,
)

PRNG_NAME = "pcg64-xslrr128/splitmix64-seeded/u53"

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_CHUNK = 64


def _splitmix64(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK
    return z ^ (z >> 31)


def run_seed(base_seed: int, run_index: int) -> int:
    """64-bit counter for run ``run_index``; the input to every SplitMix64 draw."""
    return (base_seed + (run_index + 1) * _GOLDEN) & _MASK


def pcg64_state(base_seed: int, run_index: int) -> tuple[int, int]:
    """``(state, increment)`` of the PCG64 generator for one run."""
    z = run_seed(base_seed, run_index)
    words = [_splitmix64((z + k * _GOLDEN) & _MASK) for k in range(4)]
    return (words[0] << 64) | words[1], (words[2] << 64) | words[3] | 1


class _Uniforms:
    """Chunked uniform draws from a reseedable PCG64."""

    def __init__(self) -> None:
        self._bitgen = np.random.PCG64()
        self._buf: list[float] = []
        self._pos = 0

    def reset(self, base_seed: int, run_index: int) -> None:
        state, inc = pcg64_state(base_seed, run_index)
        self._bitgen.state = {
            "bit_generator": "PCG64",
            "state": {"state": state, "inc": inc},
            "has_uint32": 0,
            "uinteger": 0,
        }
        self._buf, self._pos = [], 0

    def next(self) -> float:
        if self._pos == len(self._buf):
            raw = self._bitgen.random_raw(_CHUNK)
            self._buf = ((raw >> np.uint64(11)).astype(np.float64) * 2.0**-53).tolist()
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return u


@dataclass(frozen=True)
class SimConfig:
    kind: MechanismKind = field(default_factory=Eip1559)
    protocol: ProtocolParams = field(default_factory=ProtocolParams)
    demand: DemandParams = field(default_factory=DemandParams)
    p_x: float = 0.4
    runs: int = 10_000
    base_seed: int = 0
    recovery_fraction: float = 0.99
    max_blocks: int = 10_000
    #: End each run as soon as X's streak ends, as if honest miners restored
    #: ``b*`` instantly.  Matches the assumption behind the closed forms.
    instant_recovery: bool = False

    def __post_init__(self) -> None:
        if not 0 <= self.p_x <= 1:
            raise ValueError("p_x must lie in [0, 1]")
        if self.runs < 1:
            raise ValueError("runs must be at least 1")
        if not 0 < self.recovery_fraction < 1:
            raise ValueError("recovery_fraction must lie in (0, 1)")
        if self.max_blocks < 1:
            raise ValueError("max_blocks must be at least 1")


@dataclass(frozen=True, slots=True)
class RunOutcome:
    attack_payout: float
    honest_payout: float
    blocks_to_recovery: int
    truncated: bool

    @property
    def excess(self) -> float:
        return self.attack_payout - self.honest_payout


@dataclass(frozen=True, slots=True)
class SimSummary:
    mean_excess: float
    ci_half_width: float
    runs: int
    truncated_runs: int
    mean_attack: float = math.nan
    mean_honest: float = math.nan

    @property
    def profitable(self) -> bool:
        """Mean excess is positive and its 95% interval excludes zero."""
        return self.mean_excess - self.ci_half_width > 0


def _steady_state(config: SimConfig) -> ChainState:
    state = init_state(config.kind, config.protocol, config.protocol.target_size)
    return replace(state, base_fee=config.demand.b_star)


def _simulate(config: SimConfig, draws: _Uniforms) -> RunOutcome:
    protocol, demand = config.protocol, config.demand
    kind, p_x = config.kind, config.p_x
    s_star = protocol.target_size
    stop_fee = config.recovery_fraction * demand.b_star
    honest_block = s_star * demand.eps
    pooled = isinstance(kind, FeePool)
    # Counterfactual pool grows by s* b* / 2 per block at steady state.
    honest_pool_step = s_star * demand.b_star / 2

    state = _steady_state(config)
    attack = honest = 0.0
    if pooled:
        attack += pool_bonus(state)
        honest += pool_bonus(state)
    state = step(state, 0 * s_star, kind, protocol)
    honest += honest_block
    blocks = 1
    recovered = state.base_fee >= stop_fee

    while not recovered and blocks < config.max_blocks:
        if draws.next() < p_x:
            tip = miner_tip_per_gas(state.base_fee, demand, protocol, Bidding.ATTACK)
            attack += s_star * tip
            honest += honest_block
            if pooled:
                attack += pool_bonus(state)
                honest += blocks * honest_pool_step / POOL_BONUS_RATE
            size = s_star
        elif config.instant_recovery:
            recovered = True
            break
        else:
            size = available_block_size(state.base_fee, protocol, demand)
        state = step(state, size, kind, protocol)
        blocks += 1
        recovered = state.base_fee >= stop_fee

    return RunOutcome(float(attack), float(honest), blocks, not recovered)


def run_once(config: SimConfig, run_index: int) -> RunOutcome:
    draws = _Uniforms()
    draws.reset(config.base_seed, run_index)
    return _simulate(config, draws)


def _run_range(args: tuple[SimConfig, int, int]) -> np.ndarray:
    config, lo, hi = args
    draws = _Uniforms()
    out = np.empty((hi - lo, 4))
    for i in range(lo, hi):
        draws.reset(config.base_seed, i)
        o = _simulate(config, draws)
        out[i - lo] = (o.attack_payout, o.honest_payout, o.blocks_to_recovery, o.truncated)
    return out


def run_outcomes(config: SimConfig, workers: int = 1) -> np.ndarray:
    """Per-run ``(attack, honest, blocks, truncated)`` rows, ordered by run index."""
    workers = max(1, min(workers, config.runs))
    if workers == 1:
        return _run_range((config, 0, config.runs))
    bounds = np.linspace(0, config.runs, workers + 1).astype(int)
    tasks = [(config, int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:])]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_run_range, tasks))
    return np.concatenate(parts)


def summarize(rows: np.ndarray) -> SimSummary:
    excess = rows[:, 0] - rows[:, 1]
    n = len(excess)
    ci = 1.96 * float(np.std(excess, ddof=1)) / math.sqrt(n) if n > 1 else 0.0
    return SimSummary(
        mean_excess=float(np.mean(excess)),
        ci_half_width=ci,
        runs=n,
        truncated_runs=int(rows[:, 3].sum()),
        mean_attack=float(np.mean(rows[:, 0])),
        mean_honest=float(np.mean(rows[:, 1])),
    )


def run_many(config: SimConfig, workers: int = 1) -> SimSummary:
    """Aggregate ``config.runs`` paired runs.

    The rows are reduced in run-index order, so the summary does not depend
    on ``workers``.
    """
    return summarize(run_outcomes(config, workers))


def default_workers() -> int:
    return max(1, min(8, os.cpu_count() or 1))


class Axis(enum.Enum):
    PX = "px"
    EPS_RATIO = "eps-ratio"


@dataclass(frozen=True, slots=True)
class SweepRow:
    axis_value: float
    kind: MechanismKind
    summary: SimSummary


def at_point(config: SimConfig, axis: Axis, value: float) -> SimConfig:
    if axis is Axis.PX:
        return replace(config, p_x=value)
    demand = replace(config.demand, eps=value * config.demand.b_star)
    return replace(config, demand=demand)


def sweep(
    config: SimConfig,
    axis: Axis,
    values: Sequence[float],
    kinds: Iterable[MechanismKind],
    workers: int = 1,
) -> list[SweepRow]:
    """One :func:`run_many` per ``(value, kind)``, all sharing ``base_seed``."""
    if not values:
        raise ValueError("grid must not be empty")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError("grid must be strictly ascending")
    kinds = list(kinds)
    rows = []
    for value in values:
        point = at_point(config, axis, value)
        for kind in kinds:
            rows.append(SweepRow(value, kind, run_many(replace(point, kind=kind), workers)))
    return rows


class Region(enum.Enum):
    BOTH = "both"
    EIP_ONLY = "eip_only"
    NEITHER = "neither"
    #: Mitigation profitable while plain EIP-1559 is not; only noise produces it.
    MITIGATION_ONLY = "mitigation_only"


def classify(eip: SimSummary, mitigated: SimSummary) -> Region:
    if eip.profitable:
        return Region.BOTH if mitigated.profitable else Region.EIP_ONLY
    return Region.MITIGATION_ONLY if mitigated.profitable else Region.NEITHER


@dataclass(frozen=True, slots=True)
class HeatmapCell:
    p_x: float
    eps_ratio: float
    eip: SimSummary
    mitigated: SimSummary

    @property
    def region(self) -> Region:
        return classify(self.eip, self.mitigated)


def heatmap_cells(
    px_values: Sequence[float],
    eps_ratios: Sequence[float],
    q: float,
    config: SimConfig,
    workers: int = 1,
) -> Iterator[HeatmapCell]:
    """Plain and mitigated summaries for every grid cell, ``p_x`` outermost."""
    mitigation = GeometricAvg(q)
    for p_x in px_values:
        for ratio in eps_ratios:
            point = at_point(replace(config, p_x=p_x), Axis.EPS_RATIO, ratio)
            yield HeatmapCell(
                p_x,
                ratio,
                run_many(replace(point, kind=Eip1559()), workers),
                run_many(replace(point, kind=mitigation), workers),
            )


def classify_grid(
    px_values: Sequence[float],
    eps_ratios: Sequence[float],
    q: float,
    config: SimConfig,
    workers: int = 1,
) -> list[list[Region]]:
    """Region labels indexed ``[i][j]`` for ``px_values[i]`` and ``eps_ratios[j]``."""
    cells = iter(heatmap_cells(px_values, eps_ratios, q, config, workers))
    return [[next(cells).region for _ in eps_ratios] for _ in px_values]
