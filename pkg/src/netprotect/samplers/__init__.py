"""Scenario samplers: Gibbs chain and parity-constrained (XOR) sampling."""

from .gibbs import GibbsConfig, gibbs_conditional, gibbs_sample, gibbs_sample_masks
from .oracles import (
    PositiveDensityOracle,
    PredicateOracle,
    SetMembershipOracle,
    SliceMembershipOracle,
)
from .parity import ParitySystem, parity_solve
from .slices import SliceSystem, build_slices, member_count
from .xor import XorConfig, xor_sample_unweighted, xor_sample_weighted

__all__ = [
    "GibbsConfig",
    "gibbs_conditional",
    "gibbs_sample",
    "gibbs_sample_masks",
    "ParitySystem",
    "parity_solve",
    "SetMembershipOracle",
    "PredicateOracle",
    "PositiveDensityOracle",
    "SliceMembershipOracle",
    "SliceSystem",
    "build_slices",
    "member_count",
    "XorConfig",
    "xor_sample_unweighted",
    "xor_sample_weighted",
]
