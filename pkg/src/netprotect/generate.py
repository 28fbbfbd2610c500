"""Synthetic correlated-failure instances on random geometric networks.

Networks: nodes uniform in the unit square, edges to nearby neighbours in
both directions, a fraction of edges marked stochastic (one unit-cost
protection action each). Correlation: disaster centers dropped uniformly
with random-radius effect regions; every stochastic edge whose midpoint
falls in a region joins that region's coupling factor, which rewards
all-fail / all-survive agreement. Each stochastic edge also carries an
independent small failure chance. Everything is a pure function of the seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import GenerationError, ValidationError
from .mrf import Factor, Mrf
from .network import Edge, Network, Node, ProtectionAction
from .seeding import derive_rng

DEFAULT_REGION_SCOPE_CAP = 10


@dataclass(frozen=True)
class DisasterModel:
    center_count: int
    radius_range: Tuple[float, float]
    unary_fail_prob: float = 0.1
    strength: str = "strong"
    coupling_strong: float = 8.0
    coupling_weak: float = 2.0
    region_scope_cap: int = DEFAULT_REGION_SCOPE_CAP

    def __post_init__(self):
        if self.center_count < 0:
            raise ValidationError("center_count must be >= 0")
        rmin, rmax = self.radius_range
        if not (0 <= rmin <= rmax):
            raise ValidationError("radius_range must satisfy 0 <= min <= max")
        if not (0 < self.unary_fail_prob < 1):
            raise ValidationError("unary_fail_prob must be in (0, 1)")
        if self.strength not in ("strong", "weak"):
            raise ValidationError("strength must be 'strong' or 'weak'")
        if not (self.coupling_strong > self.coupling_weak > 1):
            raise ValidationError("need coupling_strong > coupling_weak > 1")
        if self.region_scope_cap < 2:
            raise ValidationError("region_scope_cap must be >= 2")

    @property
    def coupling(self) -> float:
        return self.coupling_strong if self.strength == "strong" else self.coupling_weak


@dataclass(frozen=True)
class RegionAssignment:
    """Disaster centers (x, y, radius) and the stochastic edges each covers."""

    centers: tuple  # of (x, y, radius)
    members: tuple  # of tuples of edge ids, parallel to centers


def _agreement_table(size: int, coupling: float) -> tuple:
    full = (1 << size) - 1
    return tuple(
        coupling if idx in (0, full) else 1.0 for idx in range(1 << size)
    )


def _split_scope(scope: tuple, cap: int) -> list:
    """Overlapping windows of at most cap variables covering the scope.

    Consecutive windows share one variable so agreement still chains across
    the whole region."""
    if len(scope) <= cap:
        return [scope]
    out = []
    start = 0
    while start < len(scope) - 1:
        out.append(scope[start : start + cap])
        start += cap - 1
    if out[-1][-1] != scope[-1]:
        out.append(scope[-(cap):])
    return out


def generate_disaster_mrf(
    network: Network, model: DisasterModel, seed: int
) -> Tuple[Mrf, RegionAssignment]:
    """Failure distribution for a network's stochastic edges (see module doc).

    Unary tables are [p, 1-p] (index 0 = failed); each non-empty region adds
    an agreement factor with value `coupling` on all-equal configurations.
    All entries are strictly positive, so the result is Gibbs-compatible.
    """
    stoch = network.stochastic_edges
    if not stoch:
        raise ValidationError("network has no stochastic edges")
    midpoints = {}
    for eid in stoch:
        e = network.edge_by_id[eid]
        t = network.node_by_id[e.tail]
        h = network.node_by_id[e.head]
        if t.x is None or t.y is None or h.x is None or h.y is None:
            raise ValidationError(f"edge {eid!r} endpoint lacks coordinates")
        midpoints[eid] = ((t.x + h.x) / 2.0, (t.y + h.y) / 2.0)

    rng = derive_rng(seed)
    centers_xy = rng.random((model.center_count, 2))
    rmin, rmax = model.radius_range
    radii = rmin + (rmax - rmin) * rng.random(model.center_count)

    p = model.unary_fail_prob
    factors = [Factor((eid,), (p, 1.0 - p)) for eid in stoch]
    centers = []
    members = []
    for c in range(model.center_count):
        cx, cy = float(centers_xy[c, 0]), float(centers_xy[c, 1])
        r = float(radii[c])
        centers.append((cx, cy, r))
        inside = tuple(
            eid
            for eid in stoch
            if math.hypot(midpoints[eid][0] - cx, midpoints[eid][1] - cy) <= r
        )
        members.append(inside)
        if inside:
            for window in _split_scope(inside, model.region_scope_cap):
                factors.append(
                    Factor(window, _agreement_table(len(window), model.coupling))
                )
    mrf = Mrf(stoch, factors)
    return mrf, RegionAssignment(tuple(centers), tuple(members))


def generate_network(
    node_count: int,
    edge_density: float,
    crossing_fraction: float,
    source_count: int,
    seed: int,
    weight_range: Tuple[int, int] = (1, 100),
    retry_cap: int = 50,
) -> Network:
    """Random geometric digraph with stochastic crossings and unit actions.

    Nodes land uniformly in the unit square; each connects to its nearest
    neighbours (edge_density rounds to the neighbour count) in both
    directions. crossing_fraction of the edges become stochastic, each with
    its own unit-cost protection action. Node weights are uniform integers
    in weight_range except sources, which weigh 0. Attempts are repeated
    (new positions) until every node is reachable from some source with all
    edges present, up to retry_cap.
    """
    if node_count < 2:
        raise ValidationError("node_count must be >= 2")
    if not (0 <= crossing_fraction <= 1):
        raise ValidationError("crossing_fraction must be in [0, 1]")
    if not (1 <= source_count <= node_count):
        raise ValidationError("source_count must be in [1, node_count]")
    k = max(1, round(edge_density))
    if k > node_count - 1:
        raise ValidationError("edge_density exceeds node_count - 1 neighbours")

    for attempt in range(retry_cap):
        rng = derive_rng(seed, attempt)
        pos = rng.random((node_count, 2))
        lo, hi = weight_range
        weights = rng.integers(lo, hi + 1, size=node_count)
        sources = sorted(int(i) for i in rng.choice(node_count, size=source_count, replace=False))

        d2 = ((pos[:, None, :] - pos[None, :, :]) ** 2).sum(axis=2)
        np.fill_diagonal(d2, np.inf)
        pairs = set()
        for i in range(node_count):
            for j in np.argsort(d2[i], kind="stable")[:k]:
                pairs.add((min(i, int(j)), max(i, int(j))))
        pairs = sorted(pairs)

        edge_endpoints = []
        for i, j in pairs:
            edge_endpoints.append((i, j))
            edge_endpoints.append((j, i))
        n_edges = len(edge_endpoints)
        n_stoch = round(crossing_fraction * n_edges)
        stoch_idx = set(
            int(i) for i in rng.choice(n_edges, size=n_stoch, replace=False)
        )

        adj = [[] for _ in range(node_count)]
        for t, h in edge_endpoints:
            adj[t].append(h)
        seen = [False] * node_count
        stack = list(sources)
        for s in sources:
            seen[s] = True
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    stack.append(v)
        if not all(seen):
            continue

        nodes = [
            Node(
                f"n{i}",
                0.0 if i in set(sources) else float(weights[i]),
                float(pos[i, 0]),
                float(pos[i, 1]),
            )
            for i in range(node_count)
        ]
        edges = [
            Edge(f"e{idx}", f"n{t}", f"n{h}", stochastic=idx in stoch_idx)
            for idx, (t, h) in enumerate(edge_endpoints)
        ]
        actions = [
            ProtectionAction(f"a{j}", frozenset([e.id]), 1.0)
            for j, e in enumerate(e for e in edges if e.stochastic)
        ]
        return Network(nodes, edges, [f"n{s}" for s in sources], actions)
    raise GenerationError(
        f"no fully source-reachable layout found in {retry_cap} attempts"
    )


def small_preset() -> dict:
    """Roughly 500 edges with ~20 stochastic crossings."""
    return dict(node_count=130, edge_density=3, crossing_fraction=0.041, source_count=2)


def large_preset() -> dict:
    """Roughly 1450 edges with ~81 stochastic crossings."""
    return dict(node_count=390, edge_density=3, crossing_fraction=0.0559, source_count=10)
