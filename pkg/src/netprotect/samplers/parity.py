"""Exhaustive search under random XOR (parity) constraints.

A ParitySystem is a set of rows; row (mask, b) requires the XOR of the
assignment bits selected by mask to equal b. parity_solve enumerates
assignments that satisfy every row and an oracle's membership predicate,
stopping after `limit` hits; an empty result is a proof of unsatisfiability.

The search assigns bits in increasing index order. Rows are first reduced by
GF(2) elimination so that each surviving row has a distinct highest bit (its
pivot); during the descent a row whose lower bits are all assigned forces its
pivot, so branching only happens on free bits. Oracles can veto partial
assignments (push returning False) to prune, and make the final membership
call on complete assignments.

Oracles for the weighted slice embedding expose split_point (the number of
leading density bits) and delta_allowed_count: once those bits are complete
the remaining auxiliary bits are only constrained by the parity rows and a
"first c bits may be 1" box, so the tail is solved by a second elimination
instead of continuing the bitwise descent. That keeps uniqueness proofs
affordable when the embedding carries many auxiliary bits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..errors import SearchBudgetError, ValidationError

DEFAULT_BIT_CAP = 120


@dataclass(frozen=True)
class ParitySystem:
    """Random XOR rows over n_bits variables."""

    n_bits: int
    masks: tuple
    parities: tuple

    def __post_init__(self):
        if len(self.masks) != len(self.parities):
            raise ValidationError("masks and parities must have equal length")
        for m in self.masks:
            if m < 0 or m >> self.n_bits:
                raise ValidationError("row mask outside the variable range")
        for b in self.parities:
            if b not in (0, 1):
                raise ValidationError("parity bits must be 0 or 1")

    def __len__(self):
        return len(self.masks)

    @classmethod
    def random(cls, rng, n_bits: int, n_rows: int) -> "ParitySystem":
        """Draw rows with each bit included independently with probability 1/2
        and a uniform parity bit."""
        import numpy as np

        bits = rng.integers(0, 2, size=(n_rows, n_bits), dtype=np.uint8)
        parities = rng.integers(0, 2, size=n_rows)
        masks = tuple(
            int.from_bytes(np.packbits(bits[r], bitorder="little").tobytes(), "little")
            for r in range(n_rows)
        )
        return cls(n_bits, masks, tuple(int(b) for b in parities))

    def satisfied_by(self, assignment: int) -> bool:
        for mask, b in zip(self.masks, self.parities):
            if bin(assignment & mask).count("1") & 1 != b:
                return False
        return True


def _eliminate(pairs):
    """Reduce (mask, parity) pairs so each has a distinct highest (pivot) bit.

    Returns the reduced list sorted by pivot, or None if inconsistent.
    """
    pivots = {}
    for mask, b in pairs:
        while mask:
            h = mask.bit_length() - 1
            if h in pivots:
                pm, pb = pivots[h]
                mask ^= pm
                b ^= pb
            else:
                pivots[h] = (mask, b)
                break
        else:
            if b:
                return None
    return [pivots[h] for h in sorted(pivots)]


def _enumerate_affine(pairs, allowed_bits, need):
    """Up to `need` solutions of the rows over allowed_bits (row masks must
    already be confined to allowed_bits), as ints. None means inconsistent."""
    reduced = _eliminate(pairs)
    if reduced is None:
        return None
    pivots = [m.bit_length() - 1 for m, _ in reduced]
    free = [b for b in allowed_bits if b not in set(pivots)]
    out = []
    total = 1 << len(free)
    count = 0
    while count < total and len(out) < need:
        x = 0
        for t, fb in enumerate(free):
            if (count >> t) & 1:
                x |= 1 << fb
        for p, (m, b) in zip(pivots, reduced):
            rest = m & ~(1 << p)
            if bin(rest & x).count("1") & 1 != b:
                x |= 1 << p
        out.append(x)
        count += 1
    return out


def parity_solve(
    oracle,
    parity: ParitySystem,
    limit: int = 2,
    node_budget: Optional[int] = None,
    bit_cap: int = DEFAULT_BIT_CAP,
) -> list:
    """All assignments satisfying oracle membership and every parity row,
    up to `limit` of them, in order of first discovery.

    Exhaustive: fewer than `limit` results means there are no others. Raises
    SearchBudgetError when the bit count exceeds bit_cap or the node budget
    runs out (indeterminate; never a wrong answer).
    """
    n_bits = oracle.n_bits
    if parity.n_bits != n_bits:
        raise ValidationError(
            f"parity system over {parity.n_bits} bits, oracle over {n_bits}"
        )
    if n_bits > bit_cap:
        raise SearchBudgetError(f"{n_bits} bits exceeds the search cap {bit_cap}")
    if limit < 1:
        raise ValidationError("limit must be >= 1")

    reduced = _eliminate(zip(parity.masks, parity.parities))
    if reduced is None:
        return []
    row_mask = [m for m, _ in reduced]
    row_req = [b for _, b in reduced]

    split = getattr(oracle, "split_point", None)
    depth_stop = n_bits if split is None else split

    rows_by_bit = [[] for _ in range(depth_stop)]
    for i, m in enumerate(row_mask):
        mm = m & ((1 << depth_stop) - 1)
        while mm:
            low = mm & -mm
            rows_by_bit[low.bit_length() - 1].append(i)
            mm ^= low

    forced = [-1] * depth_stop
    for i, m in enumerate(row_mask):
        if m and m & (m - 1) == 0 and m.bit_length() - 1 < depth_stop:
            forced[m.bit_length() - 1] = row_req[i]

    oracle.reset()
    results = []
    nodes = 0

    def finish_split(assignment: int) -> bool:
        """Solve the auxiliary-bit tail by elimination once the density bits
        are complete. Returns True when the result limit is reached."""
        c = oracle.delta_allowed_count(assignment)
        if c < 0:
            return False
        allowed = list(range(split, split + c))
        allowed_mask = 0
        for b in allowed:
            allowed_mask |= 1 << b
        pairs = []
        for i in range(len(row_mask)):
            # row state after the descent: only bits >= split can remain
            m = row_mask[i]
            if m == 0:
                continue
            boxed = m & allowed_mask
            if boxed == 0:
                if row_req[i]:
                    return False
                continue
            pairs.append((boxed, row_req[i]))
        sols = _enumerate_affine(pairs, allowed, limit - len(results))
        if sols is None:
            return False
        for s in sols:
            results.append(assignment | s)
        return len(results) >= limit

    def descend(d: int, assignment: int) -> bool:
        nonlocal nodes
        if d == depth_stop:
            if split is None:
                if oracle.final_check(assignment):
                    results.append(assignment)
                return len(results) >= limit
            return finish_split(assignment)
        f = forced[d]
        for v in ((f,) if f >= 0 else (0, 1)):
            nodes += 1
            if node_budget is not None and nodes > node_budget:
                raise SearchBudgetError(f"parity search exceeded {node_budget} nodes")
            undos = []
            new_forced = []
            ok = True
            for i in rows_by_bit[d]:
                undos.append((i, row_mask[i], row_req[i]))
                m = row_mask[i] & ~(1 << d)
                r = row_req[i] ^ v
                row_mask[i] = m
                row_req[i] = r
                if m == 0:
                    if r:
                        ok = False
                        break
                elif m & (m - 1) == 0:
                    j = m.bit_length() - 1
                    if j < depth_stop:
                        if forced[j] == -1:
                            forced[j] = r
                            new_forced.append(j)
                        elif forced[j] != r:
                            ok = False
                            break
            stop = False
            if ok:
                feasible = oracle.push(d, v)
                if feasible:
                    stop = descend(d + 1, assignment | (v << d))
                oracle.pop(d, v)
            for j in new_forced:
                forced[j] = -1
            for i, m, r in reversed(undos):
                row_mask[i] = m
                row_req[i] = r
            if stop:
                return True
        return False

    descend(0, 0)
    return results
