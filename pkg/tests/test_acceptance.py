"""Acceptance gate: one test per criterion, each recorded as a PASS/FAIL line.

The lines are printed at the end of the run by ``conftest.py`` and also
to stdout when the module is executed directly with ``python3``.
"""

from __future__ import annotations

import io
import time
from fractions import Fraction as F

import numpy as np
import pytest

from basefee import analytics as an
from basefee.analytics import Scenario, ScenarioInputs
from basefee.cli import main
from basefee.delay import t_eip, t_mitigated
from basefee.markov import solve_expected_rewards
from basefee.mechanism import GeometricAvg, WindowAvg, trajectory
from basefee.params import DemandParams, MinerPowers, ProtocolParams
from basefee.simulator import Region, SimConfig, classify_grid, run_many

RESULTS: dict[str, tuple[bool, str]] = {}


def record(name: str, ok: bool, detail: str) -> None:
    RESULTS[name] = (ok, detail)
    assert ok, detail


def exact_fees(kind) -> list[F]:
    protocol = ProtocolParams(phi=F(1, 8), target_size=1, initial_base_fee=1)
    return [s.base_fee for s in trajectory(kind, protocol, [0, 2])]


def test_ac01_golden_rationals():
    t0 = time.perf_counter()
    fees = exact_fees(GeometricAvg(F(1, 2)))
    elapsed = time.perf_counter() - t0
    ok = fees == [F(15, 16), F(495, 512)] and all(isinstance(f, F) for f in fees) and elapsed < 1
    record("AC1 golden rationals", ok, f"fees={[str(f) for f in fees]} in {elapsed:.3f}s")


def test_ac02_window_straw_man():
    t0 = time.perf_counter()
    fees = exact_fees(WindowAvg(2))
    elapsed = time.perf_counter() - t0
    ok = fees == [F(15, 16), F(15, 16)] and all(isinstance(f, F) for f in fees) and elapsed < 1
    record("AC2 window straw-man", ok, f"fees={[str(f) for f in fees]} in {elapsed:.3f}s")


def random_inputs(rng) -> ScenarioInputs:
    p_x = rng.uniform(0.01, 0.9)
    p_y = rng.uniform(0.01, 0.95 - p_x)
    b_star = rng.uniform(0.5, 50)
    return ScenarioInputs(
        ProtocolParams(phi=rng.uniform(0.01, 0.5), target_size=rng.uniform(0.5, 3)),
        DemandParams(b_star=b_star, eps=b_star * rng.uniform(0.005, 0.5),
                     alpha=rng.uniform(0.01, 1.0), delta=rng.uniform(0, 1)),
        MinerPowers(p_x, p_y),
    )


def test_ac03_closed_forms_match_solver():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2023)
    worst = 0.0
    for scenario in Scenario:
        for _ in range(1000):
            i = random_inputs(rng)
            chain = an.chain_for(scenario, i)
            solved = solve_expected_rewards(chain)[chain.start]
            closed = an.expected(scenario, i)
            scale = max(abs(solved), abs(closed))
            if scale:
                worst = max(worst, abs(closed - solved) / scale)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and elapsed < 10
    record("AC3 closed forms vs solver", ok, f"6000 draws, max rel err {worst:.2e} in {elapsed:.2f}s")


def test_ac04_lone_attacker_threshold():
    protocol, demand = ProtocolParams(), DemandParams()
    t = an.x_attack_threshold(protocol, demand)

    def rel(p):
        return an.game_relative_difference("x", ScenarioInputs(protocol, demand, MinerPowers(p)))

    ok = abs(t - 0.27586) <= 1e-5 and t < 0.3 and rel(t - 1e-9) < 0 < rel(t + 1e-9)
    record("AC4 lone-attacker threshold", ok, f"threshold={t:.8f}")


def test_ac05_two_miner_structure():
    t = an.y_join_threshold(ScenarioInputs(ProtocolParams(), DemandParams(delta=0.2), MinerPowers(0.3, 0.1)))
    worst = max(
        an.game_relative_difference("y-init", ScenarioInputs(ProtocolParams(), DemandParams(delta=float(d)), MinerPowers(0.3, 0.18)))
        for d in np.linspace(0, 1, 1001)
    )
    sign_ok = worst < 0
    ok = t is not None and abs(t - 0.2164) <= 1e-5 and sign_ok
    record(
        "AC5 two-miner structure",
        ok,
        f"y_join threshold={t:.8f} (= 29/134, |t - 0.2164| = {abs(t - 0.2164):.2e} vs tol 1e-5); "
        f"y_init rel_diff < 0 for all delta: {sign_ok} (max {worst:.4f})",
    )


def test_ac06_simulation_matches_analytics():
    t0 = time.perf_counter()
    parts, ok = [], True
    for p_x in (0.2, 0.3, 0.4):
        config = SimConfig(p_x=p_x, runs=10_000, instant_recovery=True)
        summary = run_many(config)
        i = ScenarioInputs(config.protocol, config.demand, MinerPowers(p_x))
        gap = an.x_attack_expected(i) - an.x_honest_expected(i)
        z = abs(summary.mean_excess - gap) / summary.ci_half_width
        ok &= z <= 3
        parts.append(f"p_x={p_x}: {summary.mean_excess:.5f} vs {gap:.5f} ({z:.2f} CI)")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 30
    record("AC6 simulation vs analytics", ok, "; ".join(parts) + f" in {elapsed:.2f}s")


def test_ac07_mitigation_ordering():
    base = SimConfig(p_x=0.4, runs=10_000)
    eip = run_many(base)
    geo = [run_many(SimConfig(kind=GeometricAvg(q), p_x=0.4, runs=10_000)) for q in (0.25, 0.5, 0.75)]
    ok = eip.mean_excess - eip.ci_half_width > 0
    for a, b in zip(geo, geo[1:]):
        ok &= a.mean_excess > b.mean_excess - (a.ci_half_width + b.ci_half_width)
    ok &= all(g.mean_excess < eip.mean_excess for g in geo)
    means = ", ".join(f"{s.mean_excess:.5f}" for s in [eip, *geo])
    record("AC7 mitigation ordering", ok, f"eip, geo 1/4, 1/2, 3/4 = {means}")


def test_ac08_heatmap_structure():
    t0 = time.perf_counter()
    px = list(np.linspace(0.1, 0.5, 10))
    eps = list(np.linspace(0.01, 0.1, 10))
    labels = classify_grid(px, eps, 0.5, SimConfig(runs=2_000), workers=4)
    elapsed = time.perf_counter() - t0
    eip_only = sum(cell is Region.EIP_ONLY for row in labels for cell in row)
    # Along p_x the attack only gets more attractive: neither -> eip_only -> both.
    rank = {Region.NEITHER: 0, Region.MITIGATION_ONLY: 1, Region.EIP_ONLY: 1, Region.BOTH: 2}
    monotone = all(
        rank[labels[i][j]] <= rank[labels[i + 1][j]] for i in range(9) for j in range(10)
    )
    ok = eip_only > 0 and monotone and elapsed < 300
    record("AC8 heatmap structure", ok, f"eip_only cells={eip_only}, monotone={monotone} in {elapsed:.1f}s")


def test_ac09_delay_values():
    ok = t_eip(2, 0.125) == 6 and t_mitigated(2, 0.125, 0.5) == 7
    pairs = [(b, q) for b in (1.1, 2, 10, 100) for q in (0.25, 0.5, 0.75)]
    ok &= all(t_mitigated(b, 0.125, q) >= t_eip(b, 0.125) for b, q in pairs)
    record("AC9 delay values", ok, f"T_eip(2)={t_eip(2, 0.125)}, T_geo(2, 1/2)={t_mitigated(2, 0.125, 0.5)}")


def test_ac10_determinism():
    argv = ["simulate", "--from", "0.2", "--to", "0.4", "--step", "0.1", "--runs", "2000", "--seed", "17"]
    outputs = []
    for workers in ("1", "1", "4"):
        buf = io.StringIO()
        assert main([*argv, "--workers", workers], stdout=buf, stderr=io.StringIO()) == 0
        outputs.append(buf.getvalue().encode())
    config = SimConfig(kind=GeometricAvg(0.5), p_x=0.35, runs=4000, base_seed=17)
    same_aggregates = run_many(config, workers=1) == run_many(config, workers=4)
    ok = outputs[0] == outputs[1] == outputs[2] and same_aggregates
    record("AC10 determinism", ok, f"{len(outputs[0])} byte CSV identical across reruns and workers 1/4")


def report_lines() -> list[str]:
    lines = []
    for name, (ok, detail) in sorted(RESULTS.items(), key=lambda kv: int(kv[0].split()[0][2:])):
        lines.append(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return lines


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
