"""
How many full blocks to raise the fee
=====================================

Under EIP-1559 each full block multiplies the fee by 1 + phi. The
geometric average ramps up more slowly, so legitimate demand spikes
take a little longer to price in.
"""

from basefee.delay import t_eip, t_mitigated

print(" beta   eip  q=1/4  q=1/2  q=3/4")
for beta in (1.1, 1.5, 2, 5, 10, 100):
    row = [t_eip(beta, 0.125)] + [t_mitigated(beta, 0.125, q) for q in (0.25, 0.5, 0.75)]
    print(f"{beta:5g} " + " ".join(f"{t:6d}" for t in row))
