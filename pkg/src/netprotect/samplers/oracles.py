"""Membership oracles for the parity-constrained search.

An oracle exposes n_bits, a push/pop pair called as the search assigns and
retracts bits (push may return False to prune the subtree), and final_check
for complete assignments. Implementations here:

  SetMembershipOracle    explicit assignment set, with prefix pruning
  PredicateOracle        arbitrary predicate, no pruning
  PositiveDensityOracle  support of an Mrf (density > 0)
  SliceMembershipOracle  weighted embedding over (theta, delta) bits

The density oracles keep an upper bound on the log density incrementally:
each factor contributes the max of its table entries consistent with the
bits assigned so far, so infeasible slice branches are cut before theta is
complete (parity propagation can force delta bits early).
"""

from __future__ import annotations

import math
from typing import Callable, Iterable, Optional

from ..errors import ValidationError
from ..mrf import Mrf
from .slices import TIE_TOL, SliceSystem

_NEG_INF = float("-inf")


class SetMembershipOracle:
    """Membership in an explicit set of assignment integers."""

    def __init__(self, n_bits: int, members: Iterable[int]):
        self.n_bits = n_bits
        self.members = frozenset(int(m) for m in members)
        for m in self.members:
            if m < 0 or m >> n_bits:
                raise ValidationError(f"member {m} outside {n_bits} bits")
        # prefixes[d] = set of members truncated to bits 0..d
        self.prefixes = []
        for d in range(n_bits):
            mask = (1 << (d + 1)) - 1
            self.prefixes.append(frozenset(m & mask for m in self.members))
        self._cur = 0

    def log2_count_estimate(self) -> Optional[float]:
        return math.log2(len(self.members)) if self.members else None

    def reset(self):
        self._cur = 0

    def push(self, bit: int, value: int) -> bool:
        if value:
            self._cur |= 1 << bit
        return (self._cur & ((1 << (bit + 1)) - 1)) in self.prefixes[bit]

    def pop(self, bit: int, value: int):
        if value:
            self._cur &= ~(1 << bit)

    def final_check(self, assignment: int) -> bool:
        return assignment in self.members


class PredicateOracle:
    """Arbitrary predicate on complete assignments; no pruning."""

    def __init__(self, n_bits: int, predicate: Callable[[int], bool],
                 log2_count: Optional[float] = None):
        self.n_bits = n_bits
        self.predicate = predicate
        self._log2_count = log2_count

    def log2_count_estimate(self) -> Optional[float]:
        return self._log2_count

    def reset(self):
        pass

    def push(self, bit: int, value: int) -> bool:
        return True

    def pop(self, bit: int, value: int):
        pass

    def final_check(self, assignment: int) -> bool:
        return bool(self.predicate(assignment))


class _DensityBoundTracker:
    """Incremental per-factor max bound on the log density of an Mrf."""

    def __init__(self, mrf: Mrf):
        self.mrf = mrf
        self.log_tables = []
        for f in mrf.factors:
            self.log_tables.append(
                tuple(math.log(x) if x > 0 else _NEG_INF for x in f.table)
            )
        self.scope_pos = []  # per factor: list of (variable bit, position in scope)
        for f in mrf.factors:
            self.scope_pos.append([(mrf.var_index[v], j) for j, v in enumerate(f.scope)])
        self.var_factors = [
            [(fi, j) for fi, pairs in enumerate(self.scope_pos) for vb, j in pairs if vb == v]
            for v in range(mrf.n_vars)
        ]
        self._ub_cache = [dict() for _ in mrf.factors]
        self.reset()

    def reset(self):
        self.fixed_mask = [0] * len(self.mrf.factors)
        self.fixed_idx = [0] * len(self.mrf.factors)
        self.fac_ub = [self._bound(fi) for fi in range(len(self.mrf.factors))]
        self.finite_sum = 0.0
        self.neg_inf_count = 0
        for ub in self.fac_ub:
            if ub == _NEG_INF:
                self.neg_inf_count += 1
            else:
                self.finite_sum += ub
        self._trail = []

    def _bound(self, fi: int) -> float:
        key = (self.fixed_mask[fi], self.fixed_idx[fi])
        cache = self._ub_cache[fi]
        got = cache.get(key)
        if got is None:
            mask, idx = key
            table = self.log_tables[fi]
            got = _NEG_INF
            for i, val in enumerate(table):
                if i & mask == idx and val > got:
                    got = val
            cache[key] = got
        return got

    def upper_bound(self) -> float:
        return _NEG_INF if self.neg_inf_count else self.finite_sum

    def assign(self, var_bit: int, value: int):
        changes = []
        for fi, j in self.var_factors[var_bit]:
            old = (self.fixed_mask[fi], self.fixed_idx[fi], self.fac_ub[fi])
            self.fixed_mask[fi] |= 1 << j
            if value:
                self.fixed_idx[fi] |= 1 << j
            new_ub = self._bound(fi)
            self._swap_ub(self.fac_ub[fi], new_ub)
            self.fac_ub[fi] = new_ub
            changes.append((fi, old))
        self._trail.append(changes)

    def retract(self):
        for fi, (mask, idx, ub) in reversed(self._trail.pop()):
            self._swap_ub(self.fac_ub[fi], ub)
            self.fixed_mask[fi] = mask
            self.fixed_idx[fi] = idx
            self.fac_ub[fi] = ub

    def _swap_ub(self, old: float, new: float):
        if old == _NEG_INF:
            self.neg_inf_count -= 1
        else:
            self.finite_sum -= old
        if new == _NEG_INF:
            self.neg_inf_count += 1
        else:
            self.finite_sum += new

    def exact_log_density(self, assignment: int) -> float:
        total = 0.0
        for fi, pairs in enumerate(self.scope_pos):
            idx = 0
            for vb, j in pairs:
                idx |= ((assignment >> vb) & 1) << j
            val = self.log_tables[fi][idx]
            if val == _NEG_INF:
                return _NEG_INF
            total += val
        return total


class PositiveDensityOracle:
    """Support of an Mrf: assignments of positive density."""

    def __init__(self, mrf: Mrf, cap: Optional[int] = None):
        self.mrf = mrf
        self.n_bits = mrf.n_vars
        self.tracker = _DensityBoundTracker(mrf)
        self._cap = cap

    def log2_count_estimate(self) -> Optional[float]:
        try:
            self.mrf.check_cap(self._cap)
        except Exception:
            return None
        count = int((self.mrf.density_vector() > 0).sum())
        return math.log2(count) if count else None

    def reset(self):
        self.tracker.reset()

    def push(self, bit: int, value: int) -> bool:
        self.tracker.assign(bit, value)
        return self.tracker.upper_bound() > _NEG_INF

    def pop(self, bit: int, value: int):
        self.tracker.retract()

    def final_check(self, assignment: int) -> bool:
        return self.tracker.exact_log_density(assignment) > _NEG_INF


class SliceMembershipOracle:
    """Membership of (theta, delta) pairs in the weighted embedding.

    Bits 0..n-1 are the Mrf variables, bits n..n+k-1 the auxiliary slice
    bits. A delta bit set to 1 demands the density strictly exceed its slice
    boundary; pruning compares the boundary against the incremental upper
    bound. Densities below the slice base raise BoundViolationError.
    """

    def __init__(self, mrf: Mrf, slices: SliceSystem, cap: Optional[int] = None):
        self.mrf = mrf
        self.slices = slices
        self.n_theta = mrf.n_vars
        self.n_bits = mrf.n_vars + slices.slice_count
        # parity_solve finishes the auxiliary bits by elimination past here
        self.split_point = mrf.n_vars
        self.tracker = _DensityBoundTracker(mrf)
        self.thresholds = [slices.log_threshold(i) for i in range(slices.slice_count)]
        self._cap = cap
        self._ones_stack = []

    def log2_count_estimate(self) -> Optional[float]:
        try:
            self.mrf.check_cap(self._cap)
        except Exception:
            return None
        from .slices import member_count

        count = member_count(self.mrf, self.slices, self._cap)
        return math.log2(count) if count else None

    def reset(self):
        self.tracker.reset()
        self._ones_stack = []

    def _feasible(self) -> bool:
        ub = self.tracker.upper_bound()
        if ub == _NEG_INF:
            return False
        if self._ones_stack:
            if ub <= max(self._ones_stack) + TIE_TOL:
                return False
        return True

    def push(self, bit: int, value: int) -> bool:
        if bit < self.n_theta:
            self.tracker.assign(bit, value)
        elif value:
            self._ones_stack.append(self.thresholds[bit - self.n_theta])
        return self._feasible()

    def pop(self, bit: int, value: int):
        if bit < self.n_theta:
            self.tracker.retract()
        elif value:
            self._ones_stack.pop()

    def delta_allowed_count(self, assignment: int) -> int:
        """How many leading auxiliary bits may be 1 for this density-bit
        assignment; -1 when the assignment is outside the support."""
        lp = self.tracker.exact_log_density(assignment)
        if lp == _NEG_INF:
            return -1
        self.slices.check_lower_bound(lp)
        return self.slices.free_delta_count(lp)

    def final_check(self, assignment: int) -> bool:
        lp = self.tracker.exact_log_density(assignment)
        if lp == _NEG_INF:
            return False
        self.slices.check_lower_bound(lp)
        for i in range(self.slices.slice_count):
            if (assignment >> (self.n_theta + i)) & 1:
                if not (lp > self.thresholds[i] + TIE_TOL):
                    return False
        return True

    def project_theta(self, assignment: int) -> int:
        return assignment & ((1 << self.n_theta) - 1)
