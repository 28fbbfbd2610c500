"""Horizontal-slice embedding of a weighted distribution.

Weighted sampling reduces to uniform sampling by augmenting each assignment
with k auxiliary bits delta_0..delta_{k-1}. The pair (theta, delta) is a
member iff whenever the density of theta is at most 2^(i+1) * base, delta_i
is 0. The number of valid delta vectors for theta is then within a factor 2
of density(theta)/base, so uniform samples of members project to samples of
theta with at most factor-2 distortion.

All comparisons run in the log domain. A density equal to a slice boundary
(within 1e-12 relative) counts as "at most", matching the non-strict
inequality in the membership rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..errors import BoundViolationError, ValidationError
from ..mrf import Mrf

TIE_TOL = 1e-12
# Slack for the loud lower-bound check; covers enumeration round-off only.
BOUND_TOL = 1e-9
_LN2 = math.log(2.0)


@dataclass(frozen=True)
class SliceSystem:
    """Base density, slice count, and auxiliary bit names for one Mrf."""

    base: float
    slice_count: int
    aux_bits: tuple

    def __post_init__(self):
        if not (self.base > 0) or not math.isfinite(self.base):
            raise ValidationError("slice base must be positive and finite")
        if self.slice_count < 0:
            raise ValidationError("slice_count must be >= 0")
        if len(self.aux_bits) != self.slice_count:
            raise ValidationError("aux_bits must name exactly slice_count bits")

    @property
    def log_base(self) -> float:
        return math.log(self.base)

    def log_threshold(self, i: int) -> float:
        """log of 2^(i+1) * base, the boundary governing delta_i."""
        return self.log_base + (i + 1) * _LN2

    def delta_allowed_one(self, log_density: float, i: int) -> bool:
        """Whether delta_i may be 1 for an assignment of this log density."""
        return log_density > self.log_threshold(i) + TIE_TOL

    def free_delta_count(self, log_density: float) -> int:
        return sum(1 for i in range(self.slice_count) if self.delta_allowed_one(log_density, i))

    def multiplicity(self, log_density: float) -> int:
        """Number of valid delta vectors for an assignment of this density."""
        return 1 << self.free_delta_count(log_density)

    def check_lower_bound(self, log_density: float) -> None:
        """Fail loudly on a positive density below the stated base: a wrong
        lower bound silently corrupts the sampling distribution."""
        if log_density != float("-inf") and log_density < self.log_base - BOUND_TOL:
            raise BoundViolationError(
                f"density exp({log_density}) below the slice base {self.base}"
            )


def build_slices(
    mrf: Mrf, bounds: Optional[Tuple[float, float]] = None, cap: Optional[int] = None
) -> SliceSystem:
    """Slice system with k = ceil(log2(max/min density)) auxiliary bits.

    Without explicit bounds the extrema are computed exactly by enumeration
    (subject to the variable cap) over the support, i.e. assignments of
    positive density.
    """
    if bounds is not None:
        p0, pmax = bounds
        if not (p0 > 0 and pmax > 0):
            raise ValidationError("bounds must be positive")
        if pmax < p0:
            raise ValidationError("upper bound below lower bound")
        log_p0 = math.log(p0)
        log_pmax = math.log(pmax)
        base = float(p0)
    else:
        mrf.check_cap(cap)
        logdens = mrf.log_density_vector()
        support = logdens[np.isfinite(logdens)]
        if len(support) == 0:
            raise ValidationError("mrf has empty support")
        log_p0 = float(np.min(support))
        log_pmax = float(np.max(support))
        base = math.exp(log_p0)
    k = max(0, math.ceil((log_pmax - log_p0) / _LN2 - 1e-9))
    return SliceSystem(base, k, tuple(f"aux{i}" for i in range(k)))


def member_count(mrf: Mrf, slices: SliceSystem, cap: Optional[int] = None) -> int:
    """Exact size of the slice-membership set, by enumeration."""
    mrf.check_cap(cap)
    key = ("member_count", slices.base, slices.slice_count)
    got = mrf._cache.get(key)
    if got is not None:
        return got
    logdens = mrf.log_density_vector()
    support = logdens[np.isfinite(logdens)]
    if support.size and float(np.min(support)) < slices.log_base - BOUND_TOL:
        raise BoundViolationError(
            f"enumerated density below the slice base {slices.base}"
        )
    free = np.zeros(len(support), dtype=np.int64)
    for i in range(slices.slice_count):
        free += support > slices.log_threshold(i) + TIE_TOL
    total = 0
    for c, n in enumerate(np.bincount(free)):
        total += int(n) << c  # exact big-int arithmetic; counts can exceed 2^63
    mrf._cache[key] = total
    return total
