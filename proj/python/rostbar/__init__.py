"""Rost reversed barriers from finite-horizon optimal stopping."""

from ._core import (
    Measure,
    Payoff,
    Solved,
    oracle_value,
    solve,
    support_summary,
    validate,
)

__all__ = [
    "Measure",
    "Payoff",
    "Solved",
    "oracle_value",
    "solve",
    "support_summary",
    "validate",
]
