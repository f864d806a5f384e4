"""EIP-1559 base-fee manipulation: mechanisms, closed-form analytics and simulation."""

__version__ = "0.1.0"
