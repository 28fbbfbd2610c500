"""Directed networks with stochastic edges, protection actions, and the
deterministic reachability evaluator.

A Network is immutable after construction. Reachability treats an edge as
present when it is deterministic (not flagged stochastic), when the scenario
assigns its state variable 1, or when a selected protection action covers it.
Each source contributes its own reachable weight; the totals add up across
sources without sharing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

import numpy as np

from . import _kernels
from .errors import IncompleteScenarioError, ValidationError


@dataclass(frozen=True)
class Node:
    id: str
    weight: float
    x: Optional[float] = None
    y: Optional[float] = None


@dataclass(frozen=True)
class Edge:
    id: str
    tail: str
    head: str
    stochastic: bool = False


@dataclass(frozen=True)
class ProtectionAction:
    """Protects every edge in edge_ids (they stay present in all scenarios)."""

    id: str
    edge_ids: frozenset
    cost: float


@dataclass(frozen=True)
class Policy:
    """A set of selected protection-action ids."""

    action_ids: frozenset

    @classmethod
    def of(cls, *ids: str) -> "Policy":
        return cls(frozenset(ids))

    @classmethod
    def empty(cls) -> "Policy":
        return cls(frozenset())


class Scenario:
    """One joint 0/1 assignment of every stochastic edge state."""

    __slots__ = ("states",)

    def __init__(self, states: Mapping[str, int]):
        clean = {}
        for k, v in states.items():
            if v not in (0, 1):
                raise ValidationError(f"scenario state for {k!r} must be 0 or 1, got {v!r}")
            clean[str(k)] = int(v)
        object.__setattr__(self, "states", clean)

    def __setattr__(self, name, value):
        raise AttributeError("Scenario is immutable")

    def __eq__(self, other):
        return isinstance(other, Scenario) and self.states == other.states

    def __hash__(self):
        return hash(frozenset(self.states.items()))

    def __repr__(self):
        return f"Scenario({self.states!r})"

    def as_mask(self, variable_order: Iterable[str]) -> int:
        """Pack states into an int, bit j = state of variable_order[j]."""
        mask = 0
        for j, var in enumerate(variable_order):
            try:
                bit = self.states[var]
            except KeyError:
                raise IncompleteScenarioError(f"scenario missing stochastic edge {var!r}")
            mask |= bit << j
        return mask

    @classmethod
    def from_mask(cls, mask: int, variable_order: Iterable[str]) -> "Scenario":
        return cls({var: (mask >> j) & 1 for j, var in enumerate(variable_order)})


class Network:
    """Directed graph with node weights, stochastic edges, sources, actions.

    Construction validates all structural invariants and raises
    ValidationError on the first violation. Instances are immutable; the
    compiled array form used by the kernels is built lazily and cached.
    """

    def __init__(
        self,
        nodes: Iterable[Node],
        edges: Iterable[Edge],
        sources: Iterable[str],
        actions: Iterable[ProtectionAction] = (),
    ):
        nodes = tuple(nodes)
        edges = tuple(edges)
        sources = tuple(str(s) for s in sources)
        actions = tuple(actions)

        node_by_id = {}
        for n in nodes:
            if n.id in node_by_id:
                raise ValidationError(f"duplicate node id {n.id!r}")
            if n.weight < 0:
                raise ValidationError(f"node {n.id!r} has negative weight {n.weight}")
            node_by_id[n.id] = n
        edge_by_id = {}
        for e in edges:
            if e.id in edge_by_id:
                raise ValidationError(f"duplicate edge id {e.id!r}")
            if e.tail not in node_by_id or e.head not in node_by_id:
                raise ValidationError(f"edge {e.id!r} references unknown node")
            edge_by_id[e.id] = e
        if not sources:
            raise ValidationError("sources must be non-empty")
        if len(set(sources)) != len(sources):
            raise ValidationError("source ids must be distinct")
        for s in sources:
            if s not in node_by_id:
                raise ValidationError(f"unknown source node {s!r}")
        stochastic = tuple(e.id for e in edges if e.stochastic)
        action_by_id = {}
        for a in actions:
            if a.id in action_by_id:
                raise ValidationError(f"duplicate action id {a.id!r}")
            if not a.edge_ids:
                raise ValidationError(f"action {a.id!r} has an empty edge set")
            if a.cost < 0:
                raise ValidationError(f"action {a.id!r} has negative cost {a.cost}")
            for eid in a.edge_ids:
                if eid not in edge_by_id:
                    raise ValidationError(f"action {a.id!r} references unknown edge {eid!r}")
                if not edge_by_id[eid].stochastic:
                    raise ValidationError(
                        f"action {a.id!r} protects non-stochastic edge {eid!r}"
                    )
            action_by_id[a.id] = a

        self.nodes = nodes
        self.edges = edges
        self.sources = sources
        self.actions = actions
        self.node_by_id = node_by_id
        self.edge_by_id = edge_by_id
        self.action_by_id = action_by_id
        self.stochastic_edges = stochastic
        self._compiled_cache = {}

    def total_weight(self) -> float:
        return float(sum(n.weight for n in self.nodes))

    def action(self, action_id: str) -> ProtectionAction:
        try:
            return self.action_by_id[action_id]
        except KeyError:
            raise ValidationError(f"unknown action id {action_id!r}")

    def protected_edges(self, policy: Policy) -> frozenset:
        ids = set()
        for aid in policy.action_ids:
            ids.update(self.action(aid).edge_ids)
        return frozenset(ids)

    # -- compiled form -------------------------------------------------

    def compiled(self, variable_order: Optional[tuple] = None) -> "CompiledNetwork":
        """CSR arrays for the kernels, with scenario bit j bound to
        variable_order[j] (defaults to this network's stochastic edge order)."""
        if variable_order is None:
            variable_order = self.stochastic_edges
        key = tuple(variable_order)
        cached = self._compiled_cache.get(key)
        if cached is None:
            cached = CompiledNetwork(self, key)
            self._compiled_cache[key] = cached
        return cached

    # -- io --------------------------------------------------------------

    def to_json_dict(self) -> dict:
        doc = {
            "nodes": [],
            "edges": [
                {"id": e.id, "tail": e.tail, "head": e.head, "stochastic": e.stochastic}
                for e in self.edges
            ],
            "sources": list(self.sources),
            "actions": [
                {"id": a.id, "edge_ids": sorted(a.edge_ids), "cost": a.cost}
                for a in self.actions
            ],
        }
        for n in self.nodes:
            rec = {"id": n.id, "weight": n.weight}
            if n.x is not None:
                rec["x"] = n.x
            if n.y is not None:
                rec["y"] = n.y
            doc["nodes"].append(rec)
        return doc

    @classmethod
    def from_json_dict(cls, doc: Mapping) -> "Network":
        try:
            nodes = [
                Node(str(r["id"]), float(r["weight"]), r.get("x"), r.get("y"))
                for r in doc["nodes"]
            ]
            edges = [
                Edge(str(r["id"]), str(r["tail"]), str(r["head"]), bool(r.get("stochastic", False)))
                for r in doc["edges"]
            ]
            actions = [
                ProtectionAction(str(r["id"]), frozenset(str(e) for e in r["edge_ids"]), float(r["cost"]))
                for r in doc.get("actions", [])
            ]
            sources = doc["sources"]
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed network document: {exc}")
        return cls(nodes, edges, sources, actions)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "Network":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


class CompiledNetwork:
    """Array form of a Network bound to a fixed stochastic-variable order."""

    def __init__(self, network: Network, variable_order: tuple):
        order_set = set(variable_order)
        stoch_set = set(network.stochastic_edges)
        if order_set != stoch_set:
            raise ValidationError("variable order must cover exactly the stochastic edges")
        self.network = network
        self.variable_order = variable_order
        self.n_nodes = len(network.nodes)
        node_idx = {n.id: i for i, n in enumerate(network.nodes)}
        edge_idx = {e.id: i for i, e in enumerate(network.edges)}
        self.node_idx = node_idx
        self.edge_idx = edge_idx

        m = len(network.edges)
        order = np.argsort(
            np.fromiter((node_idx[e.tail] for e in network.edges), dtype=np.int64, count=m),
            kind="stable",
        )
        counts = np.zeros(self.n_nodes + 1, dtype=np.int32)
        for e in network.edges:
            counts[node_idx[e.tail] + 1] += 1
        self.indptr = np.cumsum(counts, dtype=np.int32)
        self.nbr_node = np.empty(m, dtype=np.int32)
        self.nbr_edge = np.empty(m, dtype=np.int32)
        for slot, ei in enumerate(order):
            e = network.edges[ei]
            self.nbr_node[slot] = node_idx[e.head]
            self.nbr_edge[slot] = ei
        self.base_present = np.fromiter(
            (0 if e.stochastic else 1 for e in network.edges), dtype=np.uint8, count=m
        )
        self.stoch_edge_pos = np.fromiter(
            (edge_idx[eid] for eid in variable_order), dtype=np.int32, count=len(variable_order)
        )
        self.weights = np.fromiter((n.weight for n in network.nodes), dtype=np.float64,
                                   count=self.n_nodes)
        self.sources = np.fromiter((node_idx[s] for s in network.sources), dtype=np.int32,
                                   count=len(network.sources))
        self.bit_of = {eid: j for j, eid in enumerate(variable_order)}

    def protection_mask(self, policy: Policy) -> int:
        mask = 0
        for eid in self.network.protected_edges(policy):
            mask |= 1 << self.bit_of[eid]
        return mask

    def reach_many(self, masks: np.ndarray, prot_mask: int = 0) -> np.ndarray:
        """reach_weight for each scenario mask, protection OR-ed in."""
        out = np.empty(len(masks), dtype=np.float64)
        _kernels.reach_weight_masks(
            self.n_nodes,
            self.indptr,
            self.nbr_node,
            self.nbr_edge,
            self.base_present,
            self.stoch_edge_pos,
            np.ascontiguousarray(masks, dtype=np.uint64),
            np.uint64(prot_mask),
            self.weights,
            self.sources,
            out,
        )
        return out

    def reach_one(self, mask: int, prot_mask: int = 0) -> float:
        return float(self.reach_many(np.array([mask], dtype=np.uint64), prot_mask)[0])


def policy_cost(network: Network, policy: Policy) -> float:
    """Total cost of the policy's actions."""
    return float(sum(network.action(aid).cost for aid in policy.action_ids))


def is_feasible(network: Network, policy: Policy, budget: float) -> bool:
    return policy_cost(network, policy) <= budget


def reachable_weight(network: Network, scenario: Scenario, policy: Policy) -> float:
    """Weighted node count reachable from each source under one scenario.

    An edge is traversable when deterministic, assigned 1 by the scenario,
    or covered by the policy. Sources always reach themselves.
    """
    extra = set(scenario.states) - set(network.stochastic_edges)
    if extra:
        raise ValidationError(
            f"scenario assigns unknown or deterministic edges: {sorted(extra)!r}"
        )
    comp = network.compiled()
    mask = scenario.as_mask(comp.variable_order)
    prot = comp.protection_mask(policy)
    return comp.reach_one(mask, prot)
