"""Near-uniform and weighted sampling via random parity constraints.

One sample: draw a fresh batch of random XOR rows, search for up to two
satisfying assignments, and accept only when exactly one survives. With r
rows each assignment survives with probability 2^-r, so starting r near
log2(set size) keeps the unique-survivor probability bounded away from zero;
on two or more survivors a row is added, on zero one is removed, and fresh
rows are drawn for every retry. Acceptance depends only on the survivor
count, not on which assignment survives, so accepted samples are unbiased
draws of the surviving-set distribution.

Weighted sampling runs the same loop over the slice embedding and projects
accepted (theta, delta) pairs to theta; the emitted distribution matches the
target within a factor of 2 and is used raw (no reweighting).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..errors import SamplingFailureError, ValidationError
from ..mrf import Mrf
from ..network import Scenario
from ..seeding import derive_rng
from .oracles import SliceMembershipOracle
from .parity import DEFAULT_BIT_CAP, ParitySystem, parity_solve
from .slices import SliceSystem, build_slices


@dataclass(frozen=True)
class XorConfig:
    seed: int = 0
    max_retries: int = 200
    initial_rows: Optional[int] = None  # default: round(log2 of the set size)
    solution_limit: int = 2
    node_budget: Optional[int] = 4_000_000
    bit_cap: int = DEFAULT_BIT_CAP

    def __post_init__(self):
        if self.max_retries < 1:
            raise ValidationError("max_retries must be >= 1")
        if self.solution_limit < 2:
            raise ValidationError("solution_limit must be >= 2 for the uniqueness test")


def initial_row_count(oracle, config: XorConfig) -> int:
    if config.initial_rows is not None:
        r = config.initial_rows
    else:
        est = None
        if hasattr(oracle, "log2_count_estimate"):
            est = oracle.log2_count_estimate()
        r = round(est) if est is not None else oracle.n_bits // 2
    return min(max(r, 0), oracle.n_bits)


def xor_sample_unweighted(oracle, config: XorConfig, n: int) -> list:
    """Draw n near-uniform members of the oracle's satisfying set.

    Sample i is a pure function of (oracle, config.seed, i), so the returned
    multiset does not depend on how the draws are scheduled.
    """
    if n < 0:
        raise ValidationError("sample count must be >= 0")
    r0 = initial_row_count(oracle, config)
    out = []
    for i in range(n):
        rng = derive_rng(config.seed, i)
        r = r0
        accepted = None
        for _ in range(config.max_retries):
            parity = ParitySystem.random(rng, oracle.n_bits, r)
            sols = parity_solve(
                oracle,
                parity,
                limit=config.solution_limit,
                node_budget=config.node_budget,
                bit_cap=config.bit_cap,
            )
            if len(sols) == 1:
                accepted = sols[0]
                break
            if len(sols) == 0:
                r = max(0, r - 1)
            else:
                r = min(oracle.n_bits, r + 1)
        if accepted is None:
            raise SamplingFailureError(
                f"no unique-survivor draw within {config.max_retries} retries "
                f"(sample {i}); widen max_retries or adjust initial_rows"
            )
        out.append(accepted)
    return out


def xor_sample_weighted(
    mrf: Mrf,
    slices: Optional[SliceSystem],
    config: XorConfig,
    n: int,
    cap: Optional[int] = None,
) -> list:
    """Draw n scenarios with probabilities within a factor 2 of the Mrf's.

    slices=None builds the slice system from exact enumerated bounds (subject
    to the variable cap); pass an explicit SliceSystem above the cap.
    """
    if slices is None:
        slices = build_slices(mrf, cap=cap)
    oracle = SliceMembershipOracle(mrf, slices, cap=cap)
    pairs = xor_sample_unweighted(oracle, config, n)
    return [
        Scenario.from_mask(oracle.project_theta(p), mrf.variables) for p in pairs
    ]
