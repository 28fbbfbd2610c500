import json
import math

import numpy as np
import pytest

from helpers import closure_reach_weight, random_network
from netprotect import (
    Edge,
    IncompleteScenarioError,
    Network,
    Node,
    Policy,
    ProtectionAction,
    Scenario,
    ValidationError,
    is_feasible,
    policy_cost,
    reachable_weight,
)


def chain_network():
    return Network(
        nodes=[Node("s", 0.0), Node("a", 1.0), Node("b", 2.0)],
        edges=[Edge("sa", "s", "a", stochastic=True), Edge("ab", "a", "b")],
        sources=["s"],
        actions=[ProtectionAction("p", frozenset(["sa"]), 1.0)],
    )


def test_chain_present():
    net = chain_network()
    assert reachable_weight(net, Scenario({"sa": 1}), Policy.empty()) == 3.0


def test_chain_absent():
    net = chain_network()
    assert reachable_weight(net, Scenario({"sa": 0}), Policy.empty()) == 0.0


def test_protection_overrides_absent_state():
    net = chain_network()
    assert reachable_weight(net, Scenario({"sa": 0}), Policy.of("p")) == 3.0


def test_source_reaches_itself():
    net = Network([Node("s", 5.0)], [], ["s"])
    assert reachable_weight(net, Scenario({}), Policy.empty()) == 5.0


def test_matches_transitive_closure_oracle():
    for seed in range(30):
        rng = np.random.default_rng(seed)
        net = random_network(rng, n_nodes=8, n_edges=20, n_stoch=6, n_sources=2)
        mask = int(rng.integers(0, 1 << 6))
        scen = Scenario({e: (mask >> j) & 1 for j, e in enumerate(net.stochastic_edges)})
        pol = Policy(frozenset(
            a.id for a in net.actions if rng.random() < 0.4
        ))
        got = reachable_weight(net, scen, pol)
        want = closure_reach_weight(net, scen, pol)
        assert got == pytest.approx(want, rel=1e-12)


def test_policy_cost_and_feasibility():
    net = Network(
        nodes=[Node("u", 1.0), Node("v", 1.0)],
        edges=[Edge("e1", "u", "v", stochastic=True), Edge("e2", "v", "u", stochastic=True)],
        sources=["u"],
        actions=[
            ProtectionAction("a", frozenset(["e1"]), 2.0),
            ProtectionAction("b", frozenset(["e2"]), 3.0),
        ],
    )
    assert policy_cost(net, Policy.empty()) == 0.0
    assert is_feasible(net, Policy.empty(), 0.0)
    both = Policy.of("a", "b")
    assert policy_cost(net, both) == 5.0
    assert is_feasible(net, both, 5.0)
    assert not is_feasible(net, both, 4.99)
    with pytest.raises(ValidationError):
        policy_cost(net, Policy.of("zzz"))


def test_monotonicity_in_protection_and_states():
    rng = np.random.default_rng(7)
    for _ in range(10):
        net = random_network(rng, n_nodes=7, n_edges=16, n_stoch=5)
        mask = int(rng.integers(0, 1 << 5))
        scen = Scenario({e: (mask >> j) & 1 for j, e in enumerate(net.stochastic_edges)})
        small = Policy(frozenset(a.id for a in net.actions[:1]))
        big = Policy(frozenset(a.id for a in net.actions[:3]))
        assert reachable_weight(net, scen, small) <= reachable_weight(net, scen, big) + 1e-12

        # flipping any absent edge to present never hurts
        for j, e in enumerate(net.stochastic_edges):
            if not (mask >> j) & 1:
                up = Scenario({**scen.states, e: 1})
                assert reachable_weight(net, up, small) >= reachable_weight(net, scen, small) - 1e-12


def test_upper_bound_and_full_reachability():
    net = Network(
        nodes=[Node("u", 2.0), Node("v", 3.0)],
        edges=[Edge("uv", "u", "v"), Edge("vu", "v", "u")],
        sources=["u", "v"],
    )
    total = reachable_weight(net, Scenario({}), Policy.empty())
    assert total == 2 * (2.0 + 3.0)


def test_protection_equivalent_to_forced_state():
    rng = np.random.default_rng(3)
    net = random_network(rng, n_nodes=6, n_edges=14, n_stoch=4, n_actions=4, max_action_edges=1)
    scen = Scenario({e: 0 for e in net.stochastic_edges})
    for a in net.actions:
        (eid,) = a.edge_ids
        forced = Scenario({**scen.states, eid: 1})
        assert reachable_weight(net, scen, Policy.of(a.id)) == pytest.approx(
            reachable_weight(net, forced, Policy.empty()), rel=1e-12
        )


def test_incomplete_scenario_rejected():
    net = chain_network()
    with pytest.raises(IncompleteScenarioError):
        reachable_weight(net, Scenario({}), Policy.empty())


def test_extra_scenario_bits_rejected():
    net = chain_network()
    with pytest.raises(ValidationError):
        reachable_weight(net, Scenario({"sa": 1, "ab": 1}), Policy.empty())


def test_unknown_action_rejected():
    net = chain_network()
    with pytest.raises(ValidationError):
        reachable_weight(net, Scenario({"sa": 1}), Policy.of("nope"))


def test_structural_validation():
    with pytest.raises(ValidationError):
        Network([Node("a", 1.0)], [Edge("e", "a", "zzz")], ["a"])
    with pytest.raises(ValidationError):
        Network([Node("a", -1.0)], [], ["a"])
    with pytest.raises(ValidationError):
        Network([Node("a", 1.0)], [], [])
    with pytest.raises(ValidationError):
        Network([Node("a", 1.0), Node("b", 1.0)], [], ["a", "a"])
    with pytest.raises(ValidationError):
        # action on a deterministic edge
        Network(
            [Node("a", 1.0), Node("b", 1.0)],
            [Edge("e", "a", "b")],
            ["a"],
            [ProtectionAction("p", frozenset(["e"]), 1.0)],
        )


def test_json_roundtrip(tmp_path):
    rng = np.random.default_rng(11)
    net = random_network(rng, coords=True)
    doc = net.to_json_dict()
    again = Network.from_json_dict(doc)
    assert again.to_json_dict() == doc
    path = tmp_path / "net.json"
    net.save(path)
    assert Network.load(path).to_json_dict() == doc
    # normative field names
    assert set(doc) == {"nodes", "edges", "sources", "actions"}
    assert set(doc["edges"][0]) == {"id", "tail", "head", "stochastic"}
    assert set(doc["actions"][0]) == {"id", "edge_ids", "cost"}


def test_scenario_mask_roundtrip():
    order = ("x", "y", "z")
    for mask in range(8):
        s = Scenario.from_mask(mask, order)
        assert s.as_mask(order) == mask
    with pytest.raises(ValidationError):
        Scenario({"x": 2})
