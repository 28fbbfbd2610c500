"""Sample average approximation: the deterministic problem over a fixed
scenario set, with an exact branch-and-bound solver and a lazy-greedy
baseline.

The branch-and-bound bound at a node is the objective of the chosen actions
together with every undecided action that individually fits the remaining
budget; protection monotonicity makes this admissible. Among policies tying
on objective (absolute tolerance 1e-9) the one whose sorted action-id list
is lexicographically smallest wins, so results are reproducible and
comparable against exhaustive search.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import InfeasiblePolicyError, SolveCapError, ValidationError
from .network import Network, Policy, Scenario, policy_cost

OBJ_TOL = 1e-9
DEFAULT_ACTION_CAP = 30
DEFAULT_NODE_BUDGET = 1 << 22


@dataclass(frozen=True)
class SolveResult:
    policy: Policy
    objective: float
    upper_bound: float
    nodes_explored: int
    proven_optimal: bool


class SaaInstance:
    """A network, N sampled scenarios, and a protection budget."""

    def __init__(self, network: Network, scenarios: Sequence[Scenario], budget: float):
        scenarios = tuple(scenarios)
        if not scenarios:
            raise ValidationError("an SaaInstance needs at least one scenario")
        if budget < 0:
            raise ValidationError("budget must be >= 0")
        self.network = network
        self.scenarios = scenarios
        self.budget = float(budget)
        comp = network.compiled()
        self._comp = comp
        self.masks = np.fromiter(
            (s.as_mask(comp.variable_order) for s in scenarios),
            dtype=np.uint64,
            count=len(scenarios),
        )
        self._value_cache = {}

    @property
    def n_scenarios(self) -> int:
        return len(self.scenarios)

    def objective_of_mask(self, prot_mask: int) -> float:
        """Mean reachable weight over the scenario set for a protection mask."""
        got = self._value_cache.get(prot_mask)
        if got is None:
            got = float(np.mean(self._comp.reach_many(self.masks, prot_mask)))
            self._value_cache[prot_mask] = got
        return got

    def protection_mask(self, action_ids: Iterable[str]) -> int:
        return self._comp.protection_mask(Policy(frozenset(action_ids)))


def saa_objective(instance: SaaInstance, policy: Policy) -> float:
    """Mean reachable weight of the policy over the instance's scenarios.

    The policy must fit the instance budget; violations raise rather than
    clamp."""
    cost = policy_cost(instance.network, policy)
    if cost > instance.budget:
        raise InfeasiblePolicyError(
            f"policy cost {cost} exceeds budget {instance.budget}"
        )
    return instance.objective_of_mask(
        instance._comp.protection_mask(policy)
    )


def _resolve_actions(instance: SaaInstance, action_ids):
    if action_ids is None:
        return [a.id for a in instance.network.actions]
    return [instance.network.action(a).id for a in action_ids]


def _policy_key(action_ids: Iterable[str]) -> tuple:
    return tuple(sorted(action_ids))


def _better(obj: float, key: tuple, best_obj: float, best_key: tuple) -> bool:
    if obj > best_obj + OBJ_TOL:
        return True
    return abs(obj - best_obj) <= OBJ_TOL and key < best_key


def solve_greedy(instance: SaaInstance, action_ids=None) -> SolveResult:
    """Lazy greedy by marginal gain per unit cost (zero-cost actions first).

    Stops when no affordable action has positive gain. Never claims
    optimality; the reported upper bound is the root relaxation (all
    individually affordable actions at once).
    """
    ids = _resolve_actions(instance, action_ids)
    net = instance.network
    costs = {a: net.action(a).cost for a in ids}

    base_mask = 0
    base_val = instance.objective_of_mask(0)
    affordable_all = [a for a in ids if costs[a] <= instance.budget]
    root_mask = instance.protection_mask(affordable_all)
    upper = instance.objective_of_mask(root_mask)

    def ratio(gain, cost):
        return gain / cost if cost > 0 else math.inf

    heap = []
    nodes = 1
    for a in affordable_all:
        gain = instance.objective_of_mask(instance.protection_mask([a])) - base_val
        nodes += 1
        heapq.heappush(heap, (-ratio(gain, costs[a]), a, gain))

    chosen = []
    spent = 0.0
    cur_mask = base_mask
    cur_val = base_val
    while heap:
        neg_r, a, stale_gain = heapq.heappop(heap)
        if costs[a] > instance.budget - spent:
            continue
        gain = (
            instance.objective_of_mask(cur_mask | instance.protection_mask([a]))
            - cur_val
        )
        nodes += 1
        r = ratio(gain, costs[a])
        if heap and -heap[0][0] > r + OBJ_TOL:
            heapq.heappush(heap, (-r, a, gain))
            continue
        if gain <= OBJ_TOL:
            continue
        chosen.append(a)
        spent += costs[a]
        cur_mask |= instance.protection_mask([a])
        cur_val = instance.objective_of_mask(cur_mask)
    return SolveResult(
        policy=Policy(frozenset(chosen)),
        objective=cur_val,
        upper_bound=upper,
        nodes_explored=nodes,
        proven_optimal=False,
    )


def solve_exact(
    instance: SaaInstance,
    action_ids=None,
    action_cap: int = DEFAULT_ACTION_CAP,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> SolveResult:
    """Provably optimal budget-feasible policy by depth-first branch and bound.

    Refuses above action_cap actions or node_budget search nodes; use
    solve_greedy or the MIP export at that scale.
    """
    ids = _resolve_actions(instance, action_ids)
    if len(ids) > action_cap:
        raise SolveCapError(
            f"{len(ids)} actions exceeds the exact-solve cap {action_cap}; "
            "use solve_greedy or export_mip_lp"
        )
    net = instance.network
    costs = {a: net.action(a).cost for a in ids}
    masks = {a: instance.protection_mask([a]) for a in ids}

    base_val = instance.objective_of_mask(0)
    gains = {a: instance.objective_of_mask(masks[a]) - base_val for a in ids}

    def order_key(a):
        c = costs[a]
        r = gains[a] / c if c > 0 else math.inf
        return (-r, a)

    order = sorted(ids, key=order_key)

    warm = solve_greedy(instance, ids)
    best_obj = warm.objective
    best_key = _policy_key(warm.policy.action_ids)
    best_set = set(warm.policy.action_ids)
    nodes = 0

    suffix_affordable = order  # evaluated per node against remaining budget

    def bound(chosen_mask: int, spent: float, d: int) -> float:
        m = chosen_mask
        remaining = instance.budget - spent
        for a in suffix_affordable[d:]:
            if costs[a] <= remaining:
                m |= masks[a]
        return instance.objective_of_mask(m)

    def descend(d: int, chosen: list, chosen_mask: int, spent: float):
        nonlocal best_obj, best_key, best_set, nodes
        nodes += 1
        if nodes > node_budget:
            raise SolveCapError(
                f"branch and bound exceeded {node_budget} nodes; use solve_greedy"
            )
        if d == len(order):
            obj = instance.objective_of_mask(chosen_mask)
            key = _policy_key(chosen)
            if _better(obj, key, best_obj, best_key):
                best_obj = obj
                best_key = key
                best_set = set(chosen)
            return
        if bound(chosen_mask, spent, d) < best_obj - OBJ_TOL:
            return
        a = order[d]
        if spent + costs[a] <= instance.budget:
            chosen.append(a)
            descend(d + 1, chosen, chosen_mask | masks[a], spent + costs[a])
            chosen.pop()
        descend(d + 1, chosen, chosen_mask, spent)

    descend(0, [], 0, 0.0)
    return SolveResult(
        policy=Policy(frozenset(best_set)),
        objective=best_obj,
        upper_bound=best_obj,
        nodes_explored=nodes,
        proven_optimal=True,
    )
