from dataclasses import replace
from fractions import Fraction as F

import numpy as np
import pytest

from basefee.analytics import ScenarioInputs, x_attack_expected, x_honest_expected
from basefee.mechanism import Eip1559, FeePool, GeometricAvg, WindowAvg, trajectory
from basefee.params import DemandParams, MinerPowers, ProtocolParams
from basefee.simulator import (
    Axis,
    Region,
    SimConfig,
    SimSummary,
    classify,
    classify_grid,
    pcg64_state,
    run_many,
    run_once,
    run_outcomes,
    summarize,
    sweep,
    _Uniforms,
)

M64 = (1 << 64) - 1
M128 = (1 << 128) - 1
PCG_MULT = 0x2360ED051FC65DA44385DF649FCCF645


def reference_pcg64(state, inc, n):
    """PCG64 XSL-RR 128/64 written from the published algorithm."""
    out = []
    for _ in range(n):
        state = (state * PCG_MULT + inc) & M128
        word = ((state >> 64) ^ state) & M64
        rot = state >> 122
        out.append(((word >> rot) | (word << (64 - rot))) & M64)
    return out


def test_prng_matches_reference_algorithm():
    state, inc = pcg64_state(42, 7)
    draws = _Uniforms()
    draws.reset(42, 7)
    expected = [(raw >> 11) * 2.0**-53 for raw in reference_pcg64(state, inc, 100)]
    assert [draws.next() for _ in range(100)] == expected


def test_run_seeds_are_distinct():
    states = {pcg64_state(0, i) for i in range(1000)}
    assert len(states) == 1000
    assert pcg64_state(0, 0) != pcg64_state(1, 0)


def test_all_honest_trace_matches_exact_fees():
    # p_x = 0: empty block, then honest full blocks 7/8 -> 63/64 -> 567/512.
    fees = [s.base_fee for s in trajectory(Eip1559(), ProtocolParams(phi=F(1, 8)), [0, 2, 2])]
    assert fees == [F(7, 8), F(63, 64), F(567, 512)]
    assert fees[1] < F(99, 100) <= fees[2]
    outcome = run_once(SimConfig(p_x=0.0), 0)
    assert outcome.attack_payout == 0
    assert outcome.honest_payout == pytest.approx(0.04)
    assert outcome.blocks_to_recovery == 3
    assert not outcome.truncated


@pytest.mark.parametrize("kind", [Eip1559(), GeometricAvg(0.5), WindowAvg(2), FeePool()], ids=lambda k: k.label())
def test_px_zero_for_every_kind(kind):
    outcome = run_once(SimConfig(kind=kind, p_x=0.0), 3)
    assert outcome.attack_payout == 0
    assert not outcome.truncated


def test_certain_attacker_never_recovers():
    fees = [s.base_fee for s in trajectory(Eip1559(), ProtocolParams(phi=F(1, 8)), [0] + [1] * 20)]
    assert set(fees) == {F(7, 8)}
    outcome = run_once(SimConfig(p_x=1.0, max_blocks=300), 0)
    assert outcome.truncated
    assert outcome.blocks_to_recovery == 300
    assert outcome.attack_payout == pytest.approx(299 * 0.145)
    summary = run_many(SimConfig(p_x=1.0, max_blocks=50, runs=20))
    assert summary.truncated_runs == 20


def test_run_once_deterministic():
    config = SimConfig(kind=GeometricAvg(0.5), p_x=0.45)
    assert run_once(config, 11) == run_once(config, 11)


def test_single_run_summary():
    summary = run_many(replace(SimConfig(), runs=1))
    outcome = run_once(SimConfig(), 0)
    assert summary.ci_half_width == 0
    assert summary.mean_excess == outcome.excess


def test_worker_count_does_not_change_results():
    config = SimConfig(kind=GeometricAvg(0.25), p_x=0.35, runs=2000, base_seed=99)
    assert run_many(config, workers=1) == run_many(config, workers=4)


def test_pairing_reduces_variance():
    rows = run_outcomes(SimConfig(runs=5000, base_seed=3))
    paired = np.var(rows[:, 0] - rows[:, 1], ddof=1)
    unpaired = np.var(rows[:, 0], ddof=1) + np.var(rows[:, 1], ddof=1)
    assert paired <= unpaired


@pytest.mark.parametrize("kind", [Eip1559(), GeometricAvg(0.75), WindowAvg(3), FeePool()], ids=lambda k: k.label())
def test_trajectories_stay_valid(kind, monkeypatch):
    from basefee import simulator

    seen = []
    real_step = simulator.step

    def spy(state, size, kind_, protocol):
        seen.append(size)
        new = real_step(state, size, kind_, protocol)
        assert new.base_fee > 0
        return new

    monkeypatch.setattr(simulator, "step", spy)
    run_many(SimConfig(kind=kind, p_x=0.45, runs=200))
    assert seen and all(0 <= s <= 2 for s in seen)


def test_instant_recovery_matches_closed_form():
    config = SimConfig(p_x=0.3, instant_recovery=True, runs=10_000, base_seed=5)
    summary = run_many(config)
    i = ScenarioInputs(config.protocol, config.demand, MinerPowers(0.3))
    gap = x_attack_expected(i) - x_honest_expected(i)
    assert abs(summary.mean_excess - gap) <= 3 * summary.ci_half_width


def test_classify_is_ci_aware():
    yes = SimSummary(1.0, 0.5, 10, 0)
    marginal = SimSummary(0.1, 0.5, 10, 0)
    assert classify(yes, yes) is Region.BOTH
    assert classify(yes, marginal) is Region.EIP_ONLY
    assert classify(marginal, marginal) is Region.NEITHER
    assert classify(marginal, yes) is Region.MITIGATION_ONLY


def test_sweep_shape_and_pairing():
    kinds = [Eip1559(), GeometricAvg(0.25), GeometricAvg(0.5), GeometricAvg(0.75)]
    values = [round(0.1 + 0.05 * k, 2) for k in range(9)]
    rows = sweep(SimConfig(runs=50), Axis.PX, values, kinds)
    assert len(rows) == 36
    assert [r.axis_value for r in rows[:4]] == [0.1] * 4
    with pytest.raises(ValueError):
        sweep(SimConfig(runs=10), Axis.PX, [0.3, 0.2], kinds)
    with pytest.raises(ValueError):
        sweep(SimConfig(runs=10), Axis.PX, [], kinds)


def test_eps_ratio_sweep_profit_decreases():
    values = [0.01, 0.03, 0.05, 0.08]
    rows = sweep(SimConfig(runs=4000, p_x=0.4), Axis.EPS_RATIO, values, [Eip1559()])
    means = [r.summary.mean_excess for r in rows]
    assert means == sorted(means, reverse=True)


def test_mitigation_ordering_across_px_grid():
    values = [0.2, 0.3, 0.4, 0.5]
    rows = sweep(SimConfig(runs=3000), Axis.PX, values, [Eip1559(), GeometricAvg(0.75)])
    for eip, geo in zip(rows[::2], rows[1::2]):
        slack = eip.summary.ci_half_width + geo.summary.ci_half_width
        assert geo.summary.mean_excess <= eip.summary.mean_excess + slack


def test_classify_grid_corners():
    grid = classify_grid([0.1, 0.45], [0.01, 0.1], 0.25, SimConfig(runs=2000))
    assert grid[0][1] is Region.NEITHER
    assert grid[1][0] is Region.BOTH


def test_summarize_matches_numpy():
    rows = np.array([[1.0, 0.5, 3, 0], [2.0, 0.5, 4, 1], [0.0, 0.5, 2, 0]])
    s = summarize(rows)
    assert s.mean_excess == pytest.approx(0.5)
    assert s.ci_half_width == pytest.approx(1.96 * 1.0 / np.sqrt(3))
    assert s.truncated_runs == 1


def test_config_validation():
    for kwargs in (dict(p_x=1.5), dict(runs=0), dict(recovery_fraction=1.0), dict(max_blocks=0)):
        with pytest.raises(ValueError):
            SimConfig(**kwargs)


def test_demand_axis_point():
    from basefee.simulator import at_point

    point = at_point(SimConfig(demand=DemandParams(b_star=2.0)), Axis.EPS_RATIO, 0.05)
    assert point.demand.eps == pytest.approx(0.1)
