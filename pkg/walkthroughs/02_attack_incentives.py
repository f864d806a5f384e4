"""
When does lowering the base fee pay off?
========================================

Relative reward of the attack against honest mining for a lone miner X,
and for a second miner Y joining or starting the attack.
"""

import numpy as np

from basefee import analytics as an
from basefee.analytics import ScenarioInputs
from basefee.params import DemandParams, MinerPowers, ProtocolParams

protocol = ProtocolParams(phi=0.125)
demand = DemandParams(b_star=1.0, eps=0.04, alpha=0.5, delta=0.2)

t = an.x_attack_threshold(protocol, demand)
print(f"lone miner breaks even at p_x = {t:.5f}")

for p_x in np.arange(0.1, 0.55, 0.05):
    rel = an.game_relative_difference("x", ScenarioInputs(protocol, demand, MinerPowers(p_x)))
    print(f"  p_x={p_x:.2f}  rel_diff={rel:+.4f}")

# Y joins an attack that X keeps running
joined = ScenarioInputs(protocol, demand, MinerPowers(0.3, 0.1))
print(f"Y joins once p_y > {an.y_join_threshold(joined):.5f}")

# Y starting the attack costs more; at p_y = 0.18 it never pays
for delta in (0.0, 0.5, 1.0):
    i = ScenarioInputs(protocol, DemandParams(delta=delta), MinerPowers(0.3, 0.18))
    print(f"  Y initiates, delta={delta}: rel_diff={an.game_relative_difference('y-init', i):+.4f}")

# every closed form is also the value of a small absorbing chain
from basefee.markov import solve_expected_rewards

chain = an.chain_for(an.Scenario.Y_INIT_HONEST, joined)
print("chain states:", chain.names, "value:", solve_expected_rewards(chain)[chain.start])
