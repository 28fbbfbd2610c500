"""Shared instance builders and independent verification oracles.

The oracles here deliberately avoid the library's kernels and evaluators:
reachability goes through a Floyd-Warshall closure or a from-scratch BFS,
densities are recomputed by direct per-factor products. Tests compare the
library against these.
"""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np

from netprotect import (
    Edge,
    Factor,
    Mrf,
    Network,
    Node,
    Policy,
    ProtectionAction,
    Scenario,
)

# -- builders ------------------------------------------------------------


def random_network(
    rng,
    n_nodes=8,
    n_edges=18,
    n_stoch=5,
    n_sources=2,
    n_actions=None,
    max_action_edges=2,
    cost_range=(0.5, 3.0),
    coords=False,
):
    """Random digraph with stochastic edges and protection actions."""
    pairs = [(i, j) for i in range(n_nodes) for j in range(n_nodes) if i != j]
    idx = rng.choice(len(pairs), size=min(n_edges, len(pairs)), replace=False)
    chosen = [pairs[i] for i in sorted(int(i) for i in idx)]
    stoch_pos = set(int(i) for i in rng.choice(len(chosen), size=n_stoch, replace=False))
    nodes = []
    for i in range(n_nodes):
        xy = (float(rng.random()), float(rng.random())) if coords else (None, None)
        nodes.append(Node(f"n{i}", float(rng.integers(0, 10)), *xy))
    edges = [
        Edge(f"e{k}", f"n{t}", f"n{h}", stochastic=k in stoch_pos)
        for k, (t, h) in enumerate(chosen)
    ]
    stoch_ids = [e.id for e in edges if e.stochastic]
    if n_actions is None:
        n_actions = n_stoch
    actions = []
    for a in range(n_actions):
        size = int(rng.integers(1, max_action_edges + 1))
        eids = rng.choice(stoch_ids, size=min(size, len(stoch_ids)), replace=False)
        cost = float(np.round(rng.uniform(*cost_range), 2))
        actions.append(ProtectionAction(f"a{a}", frozenset(str(e) for e in eids), cost))
    sources = [f"n{int(i)}" for i in rng.choice(n_nodes, size=n_sources, replace=False)]
    return Network(nodes, edges, sources, actions)


def crossing_network(
    rng,
    cluster_plan=(2, 2, 2, 2, 2, 2, 2, 2, 1, 1, 1, 1),
    cluster_size=3,
    hub_size=4,
    n_sources=2,
    chain_clusters=(),
    group_actions=False,
):
    """Hub-and-clusters network where stochastic crossings gate the weight.

    A deterministic hub ring sits at the center; each cluster hangs off the
    hub behind cluster_plan[j] parallel stochastic crossings (its only way
    in), so protection decisions genuinely move the objective. Clusters in
    chain_clusters attach to the previous cluster's entry instead of the
    hub. Coordinates put neighbouring clusters' crossings close together,
    so disaster regions correlate them. group_actions=True emits one action
    per cluster (covering its crossings) instead of one per crossing.
    """
    n_clusters = len(cluster_plan)
    nodes = []
    edges = []
    cx = cy = 0.5
    for i in range(hub_size):
        ang = 2 * math.pi * i / hub_size
        nodes.append(Node(f"h{i}", 0.0, cx + 0.06 * math.cos(ang), cy + 0.06 * math.sin(ang)))
    eid = 0
    for i in range(hub_size):
        j = (i + 1) % hub_size
        edges.append(Edge(f"e{eid}", f"h{i}", f"h{j}")); eid += 1
        edges.append(Edge(f"e{eid}", f"h{j}", f"h{i}")); eid += 1
    entries = []
    for j in range(n_clusters):
        ang = 2 * math.pi * j / n_clusters
        ex = cx + 0.38 * math.cos(ang)
        ey = cy + 0.38 * math.sin(ang)
        entry = f"c{j}n0"
        entries.append(entry)
        nodes.append(Node(entry, float(rng.integers(1, 101)), ex, ey))
        for t in range(1, cluster_size):
            nid = f"c{j}n{t}"
            nodes.append(
                Node(nid, float(rng.integers(1, 101)),
                     cx + 0.46 * math.cos(ang + 0.05 * t), cy + 0.46 * math.sin(ang + 0.05 * t))
            )
            edges.append(Edge(f"e{eid}", entry, nid)); eid += 1
    crossings = []
    xid = 0
    cluster_crossings = []
    for j in range(n_clusters):
        origin = entries[j - 1] if j in set(chain_clusters) and j > 0 else f"h{j % hub_size}"
        mine = []
        for _ in range(cluster_plan[j]):
            e = Edge(f"x{xid}", origin, entries[j], stochastic=True)
            edges.append(e)
            crossings.append(e.id)
            mine.append(e.id)
            xid += 1
        cluster_crossings.append(mine)
    if group_actions:
        actions = [
            ProtectionAction(f"a{j}", frozenset(mine), 1.0)
            for j, mine in enumerate(cluster_crossings)
        ]
    else:
        actions = [ProtectionAction(f"a{k}", frozenset([x]), 1.0) for k, x in enumerate(crossings)]
    sources = [f"h{i}" for i in range(n_sources)]
    return Network(nodes, edges, sources, actions)


def random_mrf(rng, variables, n_factors=None, max_scope=3, log_range=1.0, zero_frac=0.0):
    """Random positive-table MRF; zero_frac > 0 plants zero entries."""
    variables = list(variables)
    if n_factors is None:
        n_factors = len(variables)
    factors = []
    for _ in range(n_factors):
        size = int(rng.integers(1, min(max_scope, len(variables)) + 1))
        scope = [str(v) for v in rng.choice(variables, size=size, replace=False)]
        table = np.exp(rng.uniform(-log_range, log_range, size=1 << size))
        if zero_frac > 0:
            mask = rng.random(len(table)) < zero_frac
            if mask.all():
                mask[int(rng.integers(0, len(table)))] = False
            table = np.where(mask, 0.0, table)
        factors.append(Factor(tuple(scope), tuple(float(x) for x in table)))
    return Mrf(variables, factors)


def scenario_from_mask(mask, variables):
    return Scenario({v: (mask >> j) & 1 for j, v in enumerate(variables)})


# -- independent oracles ---------------------------------------------------


def closure_reach_weight(network, scenario, policy):
    """Floyd-Warshall transitive closure version of reachable_weight."""
    ids = [n.id for n in network.nodes]
    pos = {v: i for i, v in enumerate(ids)}
    n = len(ids)
    protected = set()
    for aid in policy.action_ids:
        protected |= network.action(aid).edge_ids
    reach = [[False] * n for _ in range(n)]
    for i in range(n):
        reach[i][i] = True
    for e in network.edges:
        if e.stochastic:
            present = e.id in protected or scenario.states[e.id] == 1
        else:
            present = True
        if present:
            reach[pos[e.tail]][pos[e.head]] = True
    for k in range(n):
        rk = reach[k]
        for i in range(n):
            if reach[i][k]:
                ri = reach[i]
                for j in range(n):
                    if rk[j]:
                        ri[j] = True
    total = 0.0
    for s in network.sources:
        srow = reach[pos[s]]
        for j in range(n):
            if srow[j]:
                total += network.nodes[j].weight
    return total


def bfs_reach_weight(network, scenario, policy):
    """Plain-dict BFS version of reachable_weight (no shared code)."""
    protected = set()
    for aid in policy.action_ids:
        protected |= network.action(aid).edge_ids
    adj = {}
    for e in network.edges:
        if e.stochastic:
            present = e.id in protected or scenario.states[e.id] == 1
        else:
            present = True
        if present:
            adj.setdefault(e.tail, []).append(e.head)
    total = 0.0
    for s in network.sources:
        seen = {s}
        frontier = [s]
        while frontier:
            u = frontier.pop()
            for v in adj.get(u, ()):
                if v not in seen:
                    seen.add(v)
                    frontier.append(v)
        total += sum(n.weight for n in network.nodes if n.id in seen)
    return total


def direct_density(mrf, states):
    out = 1.0
    for f in mrf.factors:
        idx = 0
        for j, v in enumerate(f.scope):
            idx += states[v] << j
        out *= f.table[idx]
    return out


def brute_force_policy_value(mrf, network, policy):
    """Full enumeration of Pr-weighted reachability, from scratch."""
    vs = list(mrf.variables)
    z = 0.0
    acc = 0.0
    for mask in range(1 << len(vs)):
        states = {v: (mask >> j) & 1 for j, v in enumerate(vs)}
        dens = direct_density(mrf, states)
        z += dens
        if dens:
            acc += dens * bfs_reach_weight(network, Scenario(states), policy)
    return acc / z


def brute_force_marginals(mrf):
    vs = list(mrf.variables)
    z = 0.0
    ones = [0.0] * len(vs)
    for mask in range(1 << len(vs)):
        states = {v: (mask >> j) & 1 for j, v in enumerate(vs)}
        dens = direct_density(mrf, states)
        z += dens
        for j in range(len(vs)):
            if (mask >> j) & 1:
                ones[j] += dens
    return {v: ones[j] / z for j, v in enumerate(vs)}


def parity_filter(n_bits, candidates, parity_system):
    """Brute-force filter of candidate assignments by parity rows."""
    out = []
    for x in candidates:
        ok = True
        for mask, b in zip(parity_system.masks, parity_system.parities):
            if bin(x & mask).count("1") % 2 != b:
                ok = False
                break
        if ok:
            out.append(x)
    return out


def exhaustive_policy_search(instance, action_ids=None):
    """Best feasible subset by full enumeration, same tie-break as the solver:
    max objective (1e-9 tolerance), then lexicographically smallest sorted
    id tuple."""
    if action_ids is None:
        action_ids = [a.id for a in instance.network.actions]
    ids = list(action_ids)
    costs = {a: instance.network.action(a).cost for a in ids}
    best_obj = -math.inf
    best_key = None
    for r in range(len(ids) + 1):
        for combo in combinations(ids, r):
            if sum(costs[a] for a in combo) > instance.budget:
                continue
            obj = instance.objective_of_mask(instance.protection_mask(combo))
            key = tuple(sorted(combo))
            if obj > best_obj + 1e-9 or (
                abs(obj - best_obj) <= 1e-9 and (best_key is None or key < best_key)
            ):
                best_obj = obj
                best_key = key
    return best_obj, best_key


def chi_square_pvalue(counts, probs):
    from scipy.stats import chisquare

    counts = np.asarray(counts, dtype=float)
    expected = np.asarray(probs, dtype=float) * counts.sum()
    return float(chisquare(counts, f_exp=expected).pvalue)
