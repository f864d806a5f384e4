"""Closed-form expected rewards for the base-fee manipulation strategies.

Three games are covered:

* ``x``: a lone miner X either mines honestly or opens each run of
  consecutive turns with an empty block and then mines target-size blocks at
  the lowered base fee.
* ``y-join``: a second miner Y, following X's lowered-fee block, either fills
  a full block (honest) or keeps the fee low with a target-size block.
* ``y-init``: Y additionally opens its own attacks with empty blocks,
  counting on X to keep the fee low.

Each expectation has a matching :class:`~basefee.markov.AbsorbingChain`
from :func:`chain_for`, so the formulas can be checked against a linear
solve.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from numbers import Real

from .markov import AbsorbingChain, chain_from
from .params import DemandParams, MinerPowers, ProtocolParams


class Scenario(enum.Enum):
    X_HONEST = "x-honest"
    X_ATTACK = "x-attack"
    Y_JOIN_HONEST = "y-join-honest"
    Y_JOIN_ATTACK = "y-join-attack"
    Y_INIT_HONEST = "y-init-honest"
    Y_INIT_ATTACK = "y-init-attack"


@dataclass(frozen=True, slots=True)
class ScenarioInputs:
    protocol: ProtocolParams
    demand: DemandParams
    powers: MinerPowers

    @property
    def lowered_tip(self) -> Real:
        """Per-gas payout of a target block mined at ``(1 - phi) b*``."""
        return self.protocol.phi * self.demand.b_star + (1 - self.demand.alpha) * self.demand.eps

    @property
    def attack_block_payout(self) -> Real:
        return self.protocol.target_size * self.lowered_tip

    @property
    def honest_block_payout(self) -> Real:
        return self.protocol.target_size * self.demand.eps

    @property
    def full_block_payout(self) -> Real:
        """Honest full block right after X's empty one, scaled by ``1 + delta``."""
        return self.attack_block_payout * (1 + self.demand.delta)


def _need_x(inputs: ScenarioInputs) -> None:
    if inputs.powers.p_x >= 1:
        raise ValueError("p_x must be below 1 for a finite expectation")


def _need_xy(inputs: ScenarioInputs) -> None:
    if inputs.powers.p_x + inputs.powers.p_y >= 1:
        raise ValueError("p_x + p_y must be below 1 for a finite expectation")


def x_honest_expected(inputs: ScenarioInputs) -> Real:
    _need_x(inputs)
    return inputs.honest_block_payout / (1 - inputs.powers.p_x)


def x_attack_expected(inputs: ScenarioInputs) -> Real:
    _need_x(inputs)
    p_x = inputs.powers.p_x
    return p_x * inputs.attack_block_payout / (1 - p_x)


def x_attack_threshold(protocol: ProtocolParams, demand: DemandParams) -> Real:
    """Mining power above which X's attack beats honest mining."""
    denom = protocol.phi * demand.b_star + (1 - demand.alpha) * demand.eps
    if denom <= 0:
        raise ValueError("phi b* + (1 - alpha) eps must be positive")
    return demand.eps / denom


def y_join_honest_expected(inputs: ScenarioInputs) -> Real:
    _need_xy(inputs)
    p_x, p_y = inputs.powers.p_x, inputs.powers.p_y
    phi, b, eps = inputs.protocol.phi, inputs.demand.b_star, inputs.demand.eps
    a, d = inputs.demand.alpha, inputs.demand.delta
    inner = (1 - p_y) * (1 + d) * phi * b + eps * (1 + d - a * (1 + d) * (1 - p_y) - d * p_y)
    return (1 - p_x) * inner * inputs.protocol.target_size / (1 - p_x - p_y)


def y_join_attack_expected(inputs: ScenarioInputs) -> Real:
    _need_xy(inputs)
    p_x, p_y = inputs.powers.p_x, inputs.powers.p_y
    return (1 - p_x) * inputs.attack_block_payout / (1 - p_x - p_y)


def y_join_threshold(inputs: ScenarioInputs) -> Real | None:
    """Power ``p_y`` above which joining beats honest mining.

    Independent of ``p_x``.  Returns ``None`` when no threshold exists in
    ``[0, 1)``, which happens when the denominator is not positive (joining
    never pays) or the ratio reaches 1.
    """
    phi, b, eps = inputs.protocol.phi, inputs.demand.b_star, inputs.demand.eps
    a, d = inputs.demand.alpha, inputs.demand.delta
    num = d * ((1 - a) * eps + phi * b)
    den = (1 - a) * d * eps + (1 + d) * phi * b - a * eps
    if den <= 0:
        return None
    t = num / den
    return t if t < 1 else None


def y_init_honest_expected(inputs: ScenarioInputs) -> Real:
    _need_xy(inputs)
    p_x, p_y = inputs.powers.p_x, inputs.powers.p_y
    phi, b, eps = inputs.protocol.phi, inputs.demand.b_star, inputs.demand.eps
    a, d = inputs.demand.alpha, inputs.demand.delta
    inner = (1 + d) * b * phi * p_x * p_y + eps * (1 - p_x + ((1 - a) * d - a) * p_x * p_y)
    return inner * inputs.protocol.target_size / (1 - p_x - p_y)


def y_init_attack_expected(inputs: ScenarioInputs) -> Real:
    _need_xy(inputs)
    p_x, p_y = inputs.powers.p_x, inputs.powers.p_y
    return inputs.attack_block_payout * p_y / (1 - p_x - p_y)


def y_init_threshold(inputs: ScenarioInputs) -> Real | None:
    """Power ``p_y`` above which Y opening attacks beats honest mining.

    Depends on ``p_x``.  ``None`` when no threshold exists below ``1 - p_x``.
    """
    p_x = inputs.powers.p_x
    phi, b, eps = inputs.protocol.phi, inputs.demand.b_star, inputs.demand.eps
    a, d = inputs.demand.alpha, inputs.demand.delta
    num = eps * (1 - p_x)
    den = (1 - a) * eps + phi * b * (1 - p_x) + (1 + d) * eps * a * p_x - d * p_x * (eps + phi * b)
    if den <= 0:
        return None
    t = num / den
    return t if t < 1 - p_x else None


def relative_difference(attack: Real, honest: Real) -> Real:
    if honest == 0:
        raise ZeroDivisionError("honest reward is zero")
    return (attack - honest) / honest


_EXPECTED = {
    Scenario.X_HONEST: x_honest_expected,
    Scenario.X_ATTACK: x_attack_expected,
    Scenario.Y_JOIN_HONEST: y_join_honest_expected,
    Scenario.Y_JOIN_ATTACK: y_join_attack_expected,
    Scenario.Y_INIT_HONEST: y_init_honest_expected,
    Scenario.Y_INIT_ATTACK: y_init_attack_expected,
}


def expected(scenario: Scenario, inputs: ScenarioInputs) -> Real:
    return _EXPECTED[scenario](inputs)


def game_relative_difference(game: str, inputs: ScenarioInputs) -> Real:
    """Relative advantage of attacking for ``game`` in ``x``, ``y-join``, ``y-init``."""
    honest, attack = {
        "x": (Scenario.X_HONEST, Scenario.X_ATTACK),
        "y-join": (Scenario.Y_JOIN_HONEST, Scenario.Y_JOIN_ATTACK),
        "y-init": (Scenario.Y_INIT_HONEST, Scenario.Y_INIT_ATTACK),
    }[game]
    return relative_difference(expected(attack, inputs), expected(honest, inputs))


def _y_honest_edges(p_x: float, p_y: float) -> list[tuple[str, str, float]]:
    # X^h: X mines (empty on entry), Y^h_X: Y fills a full block after X,
    # Y^h_Y: Y mines target blocks at the recovered fee.
    return [
        ("X^h", "X^h", p_x),
        ("X^h", "Y^h_X", p_y),
        ("Y^h_X", "X^h", p_x),
        ("Y^h_X", "Y^h_Y", p_y),
        ("Y^h_Y", "X^h", p_x),
        ("Y^h_Y", "Y^h_Y", p_y),
    ]


def _y_attack_edges(p_x: float, p_y: float) -> list[tuple[str, str, float]]:
    return [
        ("Y^a", "Y^a", p_y),
        ("Y^a", "X^a", p_x),
        ("X^a", "X^a", p_x),
        ("X^a", "Y^a", p_y),
    ]


def chain_for(scenario: Scenario, inputs: ScenarioInputs) -> AbsorbingChain:
    """Absorbing chain whose start-state value is the scenario's expectation."""
    p_x, p_y = float(inputs.powers.p_x), float(inputs.powers.p_y)
    attack = float(inputs.attack_block_payout)
    honest = float(inputs.honest_block_payout)
    full = float(inputs.full_block_payout)

    if scenario is Scenario.X_HONEST:
        return chain_from([("X^h", "X^h", p_x)], {"X^h": honest}, "X^h")
    if scenario is Scenario.X_ATTACK:
        return chain_from(
            [("S^a", "X^a", p_x), ("X^a", "X^a", p_x)],
            {"S^a": 0.0, "X^a": attack},
            "S^a",
        )
    if scenario is Scenario.Y_JOIN_HONEST:
        return chain_from(
            _y_honest_edges(p_x, p_y),
            {"Y^h_X": full, "X^h": 0.0, "Y^h_Y": honest},
            "Y^h_X",
        )
    if scenario is Scenario.Y_JOIN_ATTACK:
        return chain_from(
            _y_attack_edges(p_x, p_y), {"Y^a": attack, "X^a": 0.0}, "Y^a"
        )
    if scenario is Scenario.Y_INIT_HONEST:
        return chain_from(
            [("Y^h", "X^h", p_x), ("Y^h", "Y^h", p_y)] + _y_honest_edges(p_x, p_y),
            {"Y^h": honest, "X^h": 0.0, "Y^h_X": full, "Y^h_Y": honest},
            "Y^h",
        )
    if scenario is Scenario.Y_INIT_ATTACK:
        return chain_from(
            [("S^a", "X^a", p_x), ("S^a", "Y^a", p_y)] + _y_attack_edges(p_x, p_y),
            {"S^a": 0.0, "Y^a": attack, "X^a": 0.0},
            "S^a",
        )
    raise ValueError(f"unknown scenario {scenario!r}")


def bribe_profitable(
    gas: Real, protocol: ProtocolParams, demand: DemandParams
) -> tuple[bool, Real]:
    """Whether a user with ``gas`` units gains from bribing for an empty block.

    The bribe must beat the ``s* eps`` the miner forgoes; the user saves
    ``phi b*`` per gas on the next block.  Returns ``(margin > 0, margin)``.
    """
    if gas <= 0:
        raise ValueError("gas must be positive")
    margin = gas * protocol.phi * demand.b_star - protocol.target_size * demand.eps
    return margin > 0, margin
