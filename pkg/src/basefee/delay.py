"""Response delay: consecutive full blocks needed to raise the base fee ``beta``-fold.

Ceilings of logarithms misbehave right at representable boundaries (``beta``
an exact power of ``1 + phi``), so every answer is settled by comparing
products, exactly in rationals whenever floats are too close to call.
"""

from __future__ import annotations

import math
from fractions import Fraction

MAX_BLOCKS = 10**6
_NEAR = 1e-9


def _check(beta: float, phi: float) -> None:
    if beta < 1:
        raise ValueError(f"beta must be at least 1, got {beta}")
    if not 0 < phi < 1:
        raise ValueError(f"phi must lie in (0, 1), got {phi}")


def t_eip(beta: float, phi: float) -> int:
    """Smallest ``T`` with ``(1 + phi)**T >= beta``."""
    _check(beta, phi)
    if beta == 1:
        return 0
    T = max(0, math.ceil(math.log(beta) / math.log1p(phi)))
    growth, target = 1 + Fraction(phi), Fraction(beta)
    while growth**T < target:
        T += 1
    while T > 0 and growth ** (T - 1) >= target:
        T -= 1
    return T


def _exact_crossing(beta: float, phi: float, q: float, T: int) -> int:
    phi_, q_, target = Fraction(phi), Fraction(q), Fraction(beta)
    prod, qk = Fraction(1), Fraction(1)
    for k in range(1, T + 2):
        qk *= q_
        prod *= 1 + phi_ * (1 - qk)
        if prod >= target:
            return k
    raise AssertionError("float and exact products disagree by more than one block")


def t_mitigated(beta: float, phi: float, q: float) -> int:
    """Smallest ``T`` with ``prod_{k=1..T} (1 + phi (1 - q**k)) >= beta``."""
    _check(beta, phi)
    if not 0 < q < 1:
        raise ValueError(f"q must lie in (0, 1), got {q}")
    if beta == 1:
        return 0
    prod, prev, qk = 1.0, 1.0, 1.0
    for k in range(1, MAX_BLOCKS + 1):
        qk *= q
        prev, prod = prod, prod * (1 + phi * (1 - qk))
        if prod >= beta * (1 - _NEAR):
            if prod > beta * (1 + _NEAR) and prev < beta * (1 - _NEAR):
                return k
            return _exact_crossing(beta, phi, q, k)
    raise RuntimeError(f"no crossing within {MAX_BLOCKS} blocks")


def mitigated_fee_multiplier(k: int, phi: float, q: float) -> float:
    """Base fee after ``k`` full blocks from steady state, in units of ``b*``."""
    prod, qk = 1.0, 1.0
    for _ in range(k):
        qk *= q
        prod *= 1 + phi * (1 - qk)
    return prod
