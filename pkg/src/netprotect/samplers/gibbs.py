"""Gibbs chain over an Mrf.

Each site update resamples one variable from its conditional given the rest,
which only needs the unnormalized density restricted to the factors touching
that variable (everything else cancels in the ratio). Requires strictly
positive potentials; models with zero entries must use the parity sampler.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import _kernels
from ..errors import NonErgodicError, PositivityError, ValidationError
from ..mrf import Mrf
from ..network import Scenario
from ..seeding import derive_rng

_INITS = ("all-ones", "all-zeros", "random")


@dataclass(frozen=True)
class GibbsConfig:
    burn_in: int = 1000
    thinning: int = 10
    seed: int = 0
    init: str = "random"

    def __post_init__(self):
        if self.burn_in < 0:
            raise ValidationError("burn_in must be >= 0")
        if self.thinning < 1:
            raise ValidationError("thinning must be >= 1")
        if self.init not in _INITS:
            raise ValidationError(f"init must be one of {_INITS}, got {self.init!r}")


def check_positive(mrf: Mrf) -> None:
    for i, f in enumerate(mrf.factors):
        if any(x == 0.0 for x in f.table):
            raise PositivityError(
                f"factor {i} has a zero entry; Gibbs requires strictly positive potentials",
                factor_index=i,
            )


def gibbs_conditional(mrf: Mrf, scenario: Scenario, var: str) -> float:
    """Pr(var = 1 | all other variables) under the mrf.

    Computed from the factors whose scope contains var only; the scenario's
    own value for var, if any, is ignored.
    """
    states = dict(scenario.states)
    extra = set(states) - set(mrf.variables)
    if extra:
        raise ValidationError(f"scenario assigns unknown variables: {sorted(extra)!r}")
    p0 = 1.0
    p1 = 1.0
    for fi in mrf.factors_of(var):
        f = mrf.factors[fi]
        for v in f.scope:
            if v != var and v not in states:
                from ..errors import IncompleteScenarioError

                raise IncompleteScenarioError(f"scenario missing neighbour variable {v!r}")
        states[var] = 0
        p0 *= f.lookup(states)
        states[var] = 1
        p1 *= f.lookup(states)
    denom = p0 + p1
    if denom == 0.0:
        raise NonErgodicError(f"both conditional densities of {var!r} are zero")
    return p1 / denom


def _initial_state(mrf: Mrf, config: GibbsConfig, rng) -> np.ndarray:
    n = mrf.n_vars
    if config.init == "all-ones":
        return np.ones(n, dtype=np.uint8)
    if config.init == "all-zeros":
        return np.zeros(n, dtype=np.uint8)
    return rng.integers(0, 2, size=n).astype(np.uint8)


def gibbs_sample_masks(mrf: Mrf, config: GibbsConfig, n: int) -> np.ndarray:
    """Draw n thinned samples; returns assignment masks (bit j = variable j).

    Runs burn_in full sweeps first, then emits one sample every thinning
    sweeps. Variables are updated in index order within a sweep. The whole
    trajectory is a pure function of (mrf, config).
    """
    check_positive(mrf)
    if n < 0:
        raise ValidationError("sample count must be >= 0")
    comp = mrf.compiled_tables()
    rng = derive_rng(config.seed)
    state = _initial_state(mrf, config, rng)
    n_vars = mrf.n_vars

    def run(n_sweeps):
        if n_sweeps == 0:
            return
        status = _kernels.gibbs_sweeps(
            state,
            comp.var_fac_ptr,
            comp.var_fac_idx,
            comp.var_fac_pos,
            comp.fac_scope_ptr,
            comp.fac_scope_var,
            comp.fac_tab_ptr,
            comp.tables,
            rng.random(n_sweeps * n_vars),
        )
        if status:
            raise NonErgodicError(
                f"zero conditional density at variable {mrf.variables[status - 1]!r}"
            )

    run(config.burn_in)
    rows = np.empty((n, n_vars), dtype=np.uint8)
    for i in range(n):
        run(config.thinning)
        rows[i] = state
    powers = np.uint64(1) << np.arange(n_vars, dtype=np.uint64)
    return rows.astype(np.uint64) @ powers


def gibbs_sample(mrf: Mrf, config: GibbsConfig, n: int) -> list:
    """Draw n thinned scenarios from the chain (see gibbs_sample_masks)."""
    masks = gibbs_sample_masks(mrf, config, n)
    return [Scenario.from_mask(int(m), mrf.variables) for m in masks]
