"""Shared numeric conventions: rational logarithms and the flow-cut-gap /
well-linkedness parameter rules.

Thresholds must be exact rationals so certificates never depend on float
rounding; log2 is therefore evaluated once per argument and frozen to a
fixed binary precision (2^-20), which is far below every comparison margin
used by the decompositions.
"""

from __future__ import annotations

import math
from fractions import Fraction

_LOG_DEN = 1 << 20


def rational_log2(x: Fraction | int) -> Fraction:
    """max(1, log2 x) as an exact rational, frozen at 2^-20 precision."""
    xf = float(x)
    if xf <= 2:
        return Fraction(1)
    return Fraction(round(math.log2(xf) * _LOG_DEN), _LOG_DEN)


def beta_fcg(k: Fraction | int, c_beta: Fraction = Fraction(1)) -> Fraction:
    """Flow-cut gap rule: max(1, c_beta * log2 k)."""
    return max(Fraction(1), c_beta * rational_log2(k))


def weak_threshold(z: Fraction | int) -> Fraction:
    """Sparse-cut threshold for the weak decomposition: 1/(128 log z)."""
    return Fraction(1, 128) / rational_log2(z)


def alpha_weak(z: Fraction | int, solver_ratio: Fraction = Fraction(1)) -> Fraction:
    """Well-linkedness level the weak decomposition certifies: the sparse-cut
    threshold divided by the cut solver's approximation guarantee (1 when the
    exact solver was used)."""
    return weak_threshold(z) / solver_ratio
