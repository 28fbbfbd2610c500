"""Factor-graph distributions over stochastic edge states.

The joint weight of an assignment is the product of one table lookup per
factor; dividing by the partition function Z gives the probability. Exact
enumeration (Z, marginals, expected policy value) is available up to a
configurable variable cap and is the verification oracle for the samplers.

Table index convention (normative, also used in the JSON format): for a
factor with scope (v_0, ..., v_{k-1}), entry index i encodes v_j = bit j of
i, least-significant bit first. A coupling table [2, 1, 1, 2] over (a, b)
therefore assigns weight 2 to (0,0) and (1,1).

Assignment integers used throughout enumeration follow the same rule over
the Mrf's variable list: bit j of the assignment is variable j's state.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

import numpy as np

from .errors import EnumerationCapError, ValidationError
from .network import Network, Policy, Scenario

DEFAULT_ENUMERATION_CAP = 25
# Full 2^n vectors are cached on the instance at or below this many variables.
CACHE_CAP = 20
_CHUNK = 1 << 18


@dataclass(frozen=True)
class Factor:
    """Non-negative potential table over an ordered variable scope."""

    scope: tuple
    table: tuple

    def __post_init__(self):
        scope = tuple(str(v) for v in self.scope)
        table = tuple(float(x) for x in self.table)
        if len(set(scope)) != len(scope):
            raise ValidationError(f"factor scope has repeated variables: {scope!r}")
        if len(table) != 1 << len(scope):
            raise ValidationError(
                f"factor table must have 2^{len(scope)} entries, got {len(table)}"
            )
        for x in table:
            if not math.isfinite(x) or x < 0:
                raise ValidationError(f"factor table entries must be finite and >= 0, got {x!r}")
        if not any(x > 0 for x in table):
            raise ValidationError("factor table must contain at least one positive entry")
        object.__setattr__(self, "scope", scope)
        object.__setattr__(self, "table", table)

    def lookup(self, states: Mapping[str, int]) -> float:
        idx = 0
        for j, v in enumerate(self.scope):
            idx |= states[v] << j
        return self.table[idx]


def uniform_unary(var: str) -> Factor:
    return Factor((var,), (1.0, 1.0))


class Mrf:
    """Immutable factor-graph model over named binary variables.

    Variables not covered by any supplied factor get an implicit uniform
    unary factor so that every variable appears in at least one factor.
    """

    def __init__(self, variables: Iterable[str], factors: Iterable[Factor]):
        variables = tuple(str(v) for v in variables)
        if len(set(variables)) != len(variables):
            raise ValidationError("duplicate variable ids")
        var_index = {v: i for i, v in enumerate(variables)}
        factors = list(factors)
        covered = set()
        for f in factors:
            for v in f.scope:
                if v not in var_index:
                    raise ValidationError(f"factor scope references unknown variable {v!r}")
                covered.add(v)
        for v in variables:
            if v not in covered:
                factors.append(uniform_unary(v))
        self.variables = variables
        self.factors = tuple(factors)
        self.var_index = var_index
        self._cache = {}

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    def has_zero_entries(self) -> bool:
        return any(0.0 in f.table for f in self.factors)

    def factors_of(self, var: str):
        """Indices of the factors whose scope contains var."""
        key = ("factors_of", var)
        got = self._cache.get(key)
        if got is None:
            if var not in self.var_index:
                raise ValidationError(f"unknown variable {var!r}")
            got = tuple(i for i, f in enumerate(self.factors) if var in f.scope)
            self._cache[key] = got
        return got

    # -- compiled arrays for the Gibbs kernel ---------------------------

    def compiled_tables(self):
        got = self._cache.get("compiled")
        if got is None:
            got = _CompiledTables(self)
            self._cache["compiled"] = got
        return got

    # -- enumeration ----------------------------------------------------

    def check_cap(self, cap: Optional[int]) -> int:
        cap = DEFAULT_ENUMERATION_CAP if cap is None else cap
        if self.n_vars > cap:
            raise EnumerationCapError(
                f"{self.n_vars} variables exceeds the enumeration cap {cap}; "
                "use sampling instead"
            )
        return cap

    def density_vector(self) -> np.ndarray:
        """P-tilde over all 2^n assignment integers (cached when small)."""
        got = self._cache.get("dens")
        if got is None:
            comp = self.compiled_tables()
            total = 1 << self.n_vars
            got = np.empty(total, dtype=np.float64)
            for start in range(0, total, _CHUNK):
                a = np.arange(start, min(start + _CHUNK, total), dtype=np.uint64)
                got[start : start + len(a)] = comp.density_of(a)
            if self.n_vars <= CACHE_CAP:
                self._cache["dens"] = got
        return got

    def log_density_vector(self) -> np.ndarray:
        got = self._cache.get("logdens")
        if got is None:
            with np.errstate(divide="ignore"):
                got = np.log(self.density_vector())
            if self.n_vars <= CACHE_CAP:
                self._cache["logdens"] = got
        return got

    # -- io ---------------------------------------------------------------

    def to_json_dict(self, metadata: Optional[dict] = None) -> dict:
        doc = {
            "variables": list(self.variables),
            "factors": [
                {"scope": list(f.scope), "table": list(f.table)} for f in self.factors
            ],
        }
        if metadata is not None:
            doc["metadata"] = metadata
        return doc

    @classmethod
    def from_json_dict(cls, doc: Mapping) -> "Mrf":
        try:
            variables = doc["variables"]
            factors = [Factor(tuple(r["scope"]), tuple(r["table"])) for r in doc["factors"]]
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed mrf document: {exc}")
        return cls(variables, factors)

    def save(self, path, metadata: Optional[dict] = None) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(metadata), fh, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "Mrf":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


class _CompiledTables:
    """Flat array form of an Mrf for the kernels and vectorized enumeration."""

    def __init__(self, mrf: Mrf):
        n_f = len(mrf.factors)
        scope_idx = [
            np.fromiter((mrf.var_index[v] for v in f.scope), dtype=np.int32, count=len(f.scope))
            for f in mrf.factors
        ]
        self.scope_idx = scope_idx
        self.tables_list = [np.asarray(f.table, dtype=np.float64) for f in mrf.factors]

        self.fac_scope_ptr = np.zeros(n_f + 1, dtype=np.int32)
        self.fac_tab_ptr = np.zeros(n_f + 1, dtype=np.int64)
        for i, f in enumerate(mrf.factors):
            self.fac_scope_ptr[i + 1] = self.fac_scope_ptr[i] + len(f.scope)
            self.fac_tab_ptr[i + 1] = self.fac_tab_ptr[i] + len(f.table)
        self.fac_scope_var = (
            np.concatenate(scope_idx) if scope_idx else np.zeros(0, dtype=np.int32)
        ).astype(np.int32)
        self.tables = (
            np.concatenate(self.tables_list) if self.tables_list else np.zeros(0)
        ).astype(np.float64)

        incid = [[] for _ in range(mrf.n_vars)]
        for fi, f in enumerate(mrf.factors):
            for pos, v in enumerate(f.scope):
                incid[mrf.var_index[v]].append((fi, pos))
        self.var_fac_ptr = np.zeros(mrf.n_vars + 1, dtype=np.int32)
        flat_idx = []
        flat_pos = []
        for vi, lst in enumerate(incid):
            self.var_fac_ptr[vi + 1] = self.var_fac_ptr[vi] + len(lst)
            for fi, pos in lst:
                flat_idx.append(fi)
                flat_pos.append(pos)
        self.var_fac_idx = np.asarray(flat_idx, dtype=np.int32)
        self.var_fac_pos = np.asarray(flat_pos, dtype=np.int32)

    def density_of(self, assignments: np.ndarray) -> np.ndarray:
        """Vectorized P-tilde over an array of assignment integers."""
        dens = np.ones(len(assignments), dtype=np.float64)
        for sidx, table in zip(self.scope_idx, self.tables_list):
            idx = np.zeros(len(assignments), dtype=np.int64)
            for j, vpos in enumerate(sidx):
                idx |= (((assignments >> np.uint64(vpos)) & np.uint64(1)) << j).astype(np.int64)
            dens *= table[idx]
        return dens


def _require_assignment(mrf: Mrf, scenario: Scenario) -> dict:
    states = scenario.states
    missing = [v for v in mrf.variables if v not in states]
    if missing:
        from .errors import IncompleteScenarioError

        raise IncompleteScenarioError(f"scenario missing variables {missing!r}")
    extra = set(states) - set(mrf.variables)
    if extra:
        raise ValidationError(f"scenario assigns variables unknown to the mrf: {sorted(extra)!r}")
    return states


def unnormalized_density(mrf: Mrf, scenario: Scenario) -> float:
    """Product of factor lookups at the scenario's assignment."""
    states = _require_assignment(mrf, scenario)
    out = 1.0
    for f in mrf.factors:
        out *= f.lookup(states)
    return out


def log_unnormalized_density(mrf: Mrf, scenario: Scenario) -> float:
    """Sum of log factor entries; -inf when any entry is zero.

    Preferred over unnormalized_density for threshold comparisons, where
    products over many factors could under- or overflow.
    """
    states = _require_assignment(mrf, scenario)
    out = 0.0
    for f in mrf.factors:
        val = f.lookup(states)
        if val == 0.0:
            return float("-inf")
        out += math.log(val)
    return out


def partition_function(mrf: Mrf, cap: Optional[int] = None) -> float:
    """Exact Z by enumeration over all 2^n assignments."""
    mrf.check_cap(cap)
    return float(np.sum(mrf.density_vector()))


def exact_marginals(mrf: Mrf, cap: Optional[int] = None) -> dict:
    """Exact Pr(variable = 1) for each variable, by enumeration."""
    mrf.check_cap(cap)
    dens = mrf.density_vector()
    z = float(np.sum(dens))
    if z <= 0:
        raise ValidationError("partition function is zero; distribution is empty")
    a = np.arange(len(dens), dtype=np.uint64)
    out = {}
    for j, v in enumerate(mrf.variables):
        sel = ((a >> np.uint64(j)) & np.uint64(1)).astype(bool)
        out[v] = float(np.sum(dens[sel]) / z)
    return out


def check_variables_match(mrf: Mrf, network: Network) -> None:
    if set(mrf.variables) != set(network.stochastic_edges):
        raise ValidationError(
            "mrf variables and network stochastic edges differ: "
            f"{sorted(set(mrf.variables) ^ set(network.stochastic_edges))!r}"
        )


def exact_policy_value(
    mrf: Mrf, network: Network, policy: Policy, cap: Optional[int] = None
) -> float:
    """Exact expected reachable weight of a policy: sum over all scenarios
    of Pr(scenario) * reachable_weight."""
    check_variables_match(mrf, network)
    mrf.check_cap(cap)
    comp = network.compiled(mrf.variables)
    prot = comp.protection_mask(policy)
    dens = mrf.density_vector()
    z = float(np.sum(dens))
    if z <= 0:
        raise ValidationError("partition function is zero; distribution is empty")
    total = 1 << mrf.n_vars
    if mrf.n_vars <= CACHE_CAP:
        table = reachability_table(comp)
        idx = np.arange(total, dtype=np.uint64) | np.uint64(prot)
        return float(np.dot(dens, table[idx.astype(np.int64)]) / z)
    acc = 0.0
    for start in range(0, total, _CHUNK):
        a = np.arange(start, min(start + _CHUNK, total), dtype=np.uint64)
        acc += float(np.dot(dens[start : start + len(a)], comp.reach_many(a, prot)))
    return acc / z


def reachability_table(comp) -> np.ndarray:
    """reach_weight for every stochastic mask of a compiled network (cached)."""
    cached = getattr(comp, "_reach_table", None)
    if cached is None:
        n = len(comp.variable_order)
        masks = np.arange(1 << n, dtype=np.uint64)
        cached = comp.reach_many(masks, 0)
        comp._reach_table = cached
    return cached
