"""Small shared helpers."""

from __future__ import annotations

import numpy as np

# Strict-decrease comparisons allow this slack so floating-point ties pass.
DECREASE_SLACK = 1e-9


def is_decreasing(seq, slack: float = DECREASE_SLACK) -> bool:
    vals = list(seq)
    return all(b < a + slack for a, b in zip(vals, vals[1:]))


def reversed_axis(values: np.ndarray, axis: int) -> np.ndarray:
    """Index reversal j -> (M - j) mod M, the grid image of x -> -x."""
    return np.roll(np.flip(values, axis), 1, axis)
