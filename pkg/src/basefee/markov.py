"""Absorbing Markov reward chains.

A chain is given by its transient part only: ``transitions[i][j]`` is the
probability of moving from transient state ``i`` to ``j``, and whatever mass
is missing from a row goes to absorption.  Each visit to state ``i`` pays
``payouts[i]``.  The expected total payout ``v`` satisfies ``v = P v + r``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


class NonAbsorbingChainError(ValueError):
    """Some transient state can never reach absorption."""


@dataclass(frozen=True)
class AbsorbingChain:
    transitions: np.ndarray
    payouts: np.ndarray
    start: int = 0
    names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        P = np.array(self.transitions, dtype=float)
        r = np.array(self.payouts, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise ValueError("transition matrix must be square")
        if r.shape != (P.shape[0],):
            raise ValueError("need exactly one payout per transient state")
        if np.any(P < 0) or np.any(P > 1):
            raise ValueError("transition probabilities must lie in [0, 1]")
        if np.any(P.sum(axis=1) > 1 + 1e-12):
            raise ValueError("row sums of the transient block must not exceed 1")
        if not 0 <= self.start < P.shape[0]:
            raise ValueError("start index out of range")
        if self.names is not None and len(self.names) != P.shape[0]:
            raise ValueError("one name per state")
        P.flags.writeable = False
        r.flags.writeable = False
        object.__setattr__(self, "transitions", P)
        object.__setattr__(self, "payouts", r)

    @property
    def n(self) -> int:
        return self.transitions.shape[0]

    def absorbing(self) -> bool:
        """True when every state can reach absorption."""
        P = self.transitions
        leaks = P.sum(axis=1) < 1 - 1e-15
        reach = leaks.copy()
        # Backward reachability over the positive-probability edges.
        while True:
            grown = reach | ((P > 0) & reach[None, :]).any(axis=1)
            if (grown == reach).all():
                return bool(reach.all())
            reach = grown


def solve_expected_rewards(chain: AbsorbingChain) -> np.ndarray:
    """Expected total payout from every state, ``(I - P)^-1 r``.

    Uses an LU factorisation with partial pivoting.  Raises
    :class:`NonAbsorbingChainError` when a closed class of transient states
    would make the expectation infinite.
    """
    if not chain.absorbing():
        raise NonAbsorbingChainError("chain has a closed class of transient states")
    A = np.eye(chain.n) - chain.transitions
    try:
        return np.linalg.solve(A, chain.payouts)
    except np.linalg.LinAlgError as exc:
        raise NonAbsorbingChainError(str(exc)) from exc


def enumerate_paths_reward(chain: AbsorbingChain, max_len: int) -> tuple[float, float]:
    """Probability-weighted payout over all paths of at most ``max_len`` visits.

    Pushes the occupation distribution forward one block at a time in plain
    Python, so it shares no code with :func:`solve_expected_rewards`.  Returns
    the partial sum and a bound on the neglected tail,
    ``rho**max_len * max(r) / (1 - rho)`` with ``rho`` the largest row sum.
    """
    if max_len < 1:
        raise ValueError("max_len must be at least 1")
    P = chain.transitions.tolist()
    r = chain.payouts.tolist()
    rho = max(sum(row) for row in P)
    if rho >= 1:
        raise ValueError("tail bound needs every row sum below 1")
    n = chain.n
    mass = [0.0] * n
    mass[chain.start] = 1.0
    total = 0.0
    for _ in range(max_len):
        total += sum(m * pay for m, pay in zip(mass, r))
        mass = [sum(mass[i] * P[i][j] for i in range(n)) for j in range(n)]
    top = max(r) if r else 0.0
    bound = rho**max_len * max(top, 0.0) / (1 - rho)
    return total, bound


def chain_from(
    edges: Sequence[tuple[str, str, float]],
    payouts: dict[str, float],
    start: str,
) -> AbsorbingChain:
    """Build a chain from named states and ``(src, dst, prob)`` edges."""
    names = tuple(payouts)
    index = {name: i for i, name in enumerate(names)}
    P = np.zeros((len(names), len(names)))
    for src, dst, prob in edges:
        P[index[src], index[dst]] += prob
    r = np.array([payouts[name] for name in names], dtype=float)
    return AbsorbingChain(P, r, index[start], names)
