"""Desk-scale algorithmic information laboratory.

A concrete prefix-free reference machine, exact-arithmetic quantum states,
and estimators for complexity, algorithmic probability, quantum entropies,
two-channel transmission cost and algorithmic statistics.
"""

__version__ = "0.1.0"
