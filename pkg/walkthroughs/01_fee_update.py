"""
How the base fee reacts to an empty block
=========================================

One empty block lowers the fee by a factor 1 - phi. Under plain
EIP-1559 a single full block undoes it, while the geometric average
only recovers slowly. Everything runs on exact rationals.
"""

from fractions import Fraction

from basefee.mechanism import Eip1559, GeometricAvg, WindowAvg, trajectory
from basefee.params import ProtocolParams

protocol = ProtocolParams(phi=Fraction(1, 8), target_size=1, initial_base_fee=1)

# an empty block followed by four full ones
sizes = [0, 2, 2, 2, 2]

for kind in (Eip1559(), GeometricAvg(Fraction(1, 2)), WindowAvg(2)):
    fees = [state.base_fee for state in trajectory(kind, protocol, sizes)]
    print(f"{kind.label():>8}: " + "  ".join(str(f) for f in fees))

# the window average is blind to the full block right after the empty one,
# so its second fee equals its first
