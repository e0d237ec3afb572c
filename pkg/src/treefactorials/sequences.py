"""Factorial sequences and derived diagnostics."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

__all__ = ["FactorialSequence", "LimitEstimate", "limit_estimate", "superadditivity_gap"]


@dataclass(frozen=True)
class FactorialSequence:
    """Exact factorial terms a_0..a_{K-1} plus which route produced them."""

    values: tuple[Fraction, ...]
    provenance: str

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def floats(self) -> tuple[float, ...]:
        return tuple(float(v) for v in self.values)


def superadditivity_gap(values) -> tuple[int, int] | None:
    """First (m, n) with a_{m+n} < a_m + a_n, or None if superadditive.

    Checks every pair.  Long sequences are scaled to a common denominator and
    checked as machine integers (exact as long as values stay below 2**63,
    which a guard verifies).
    """
    K = len(values)
    if K <= 1500:
        for m in range(1, K):
            am = values[m]
            for n in range(m, K - m):
                if values[m + n] < am + values[n]:
                    return (m, n)
        return None
    import numpy as np

    den = lcm(*(v.denominator for v in values))
    scaled = [int(v * den) for v in values]
    if max(scaled, default=0) > 2**62:
        raise OverflowError("sequence values too large for the fast path")
    arr = np.array(scaled, dtype=np.int64)
    for m in range(1, K):
        rest = arr[2 * m : K]  # noqa: E203
        if rest.size == 0:
            break
        bad = np.nonzero(rest < arr[m] + arr[m : K - m])[0]  # noqa: E203
        if bad.size:
            n = m + int(bad[0])
            return (m, n)
    return None


@dataclass(frozen=True)
class LimitEstimate:
    """Tail estimate of lim a_n/n."""

    value: Fraction
    lower_bound: Fraction
    tail_window: int
    likely_divergent: bool


def limit_estimate(
    seq: FactorialSequence,
    tail_window: int | None = None,
    slope_threshold: Fraction = Fraction(1, 100),
) -> LimitEstimate:
    """Estimate lim a_n/n from a finite prefix.

    value is a_K/K at the last index; lower_bound is max a_k/k (every such
    ratio bounds the limit from below for superadditive sequences); the
    sequence is flagged likely-divergent when a_n/n is still climbing by more
    than slope_threshold across the tail window.
    """
    values = seq.values
    K = len(values) - 1
    if K < 1:
        raise ValueError("need at least two terms to estimate a limit")
    if tail_window is None:
        tail_window = max(1, K // 4)
    tail_window = min(tail_window, K - 1) or 1
    value = values[K] / K
    lower = max(values[k] / k for k in range(1, K + 1))
    start = K - tail_window
    climb = value - (values[start] / start if start >= 1 else Fraction(0))
    return LimitEstimate(value, lower, tail_window, climb > slope_threshold)
