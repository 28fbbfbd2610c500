import math

import numpy as np
import pytest

from helpers import (
    brute_force_marginals,
    brute_force_policy_value,
    direct_density,
    random_mrf,
    random_network,
    scenario_from_mask,
)
from netprotect import (
    Edge,
    EnumerationCapError,
    Factor,
    Mrf,
    Network,
    Node,
    Policy,
    ProtectionAction,
    Scenario,
    ValidationError,
    exact_marginals,
    exact_policy_value,
    log_unnormalized_density,
    partition_function,
    reachable_weight,
    unnormalized_density,
)
from netprotect.samplers import GibbsConfig, gibbs_sample_masks


def test_unary_lookup():
    m = Mrf(["v"], [Factor(("v",), (1.0, 3.0))])
    assert unnormalized_density(m, Scenario({"v": 1})) == 3.0


def test_agreement_lookup():
    m = Mrf(["a", "b"], [Factor(("a", "b"), (2.0, 1.0, 1.0, 2.0))])
    assert unnormalized_density(m, Scenario({"a": 0, "b": 0})) == 2.0


def test_product_of_overlapping_factors_matches_direct():
    rng = np.random.default_rng(0)
    m = random_mrf(rng, [f"v{i}" for i in range(5)], n_factors=3, max_scope=3)
    for mask in range(32):
        s = scenario_from_mask(mask, m.variables)
        assert unnormalized_density(m, s) == pytest.approx(
            direct_density(m, s.states), rel=1e-12
        )
        lg = log_unnormalized_density(m, s)
        assert math.exp(lg) == pytest.approx(direct_density(m, s.states), rel=1e-9)


def test_partition_function_trivial():
    assert partition_function(Mrf(["v"], [Factor(("v",), (1.0, 1.0))])) == 2.0
    m = Mrf(["a", "b"], [Factor(("a", "b"), (2.0, 1.0, 1.0, 2.0))])
    z = partition_function(m)
    assert z == 6.0
    assert unnormalized_density(m, Scenario({"a": 0, "b": 0})) / z == pytest.approx(1 / 3)


def test_partition_function_permutation_invariant():
    rng = np.random.default_rng(1)
    variables = [f"v{i}" for i in range(10)]
    m = random_mrf(rng, variables, n_factors=8, max_scope=3)
    perm = list(rng.permutation(variables))
    m2 = Mrf(perm, m.factors)
    assert partition_function(m) == pytest.approx(partition_function(m2), rel=1e-12)


def test_marginals_trivial():
    m = Mrf(["v"], [Factor(("v",), (1.0, 3.0))])
    assert exact_marginals(m)["v"] == pytest.approx(0.75)
    m2 = Mrf(["a", "b"], [Factor(("a", "b"), (2.0, 1.0, 1.0, 2.0))])
    marg = exact_marginals(m2)
    assert marg["a"] == pytest.approx(0.5)
    assert marg["b"] == pytest.approx(0.5)


def test_marginals_relabeling_oracle():
    rng = np.random.default_rng(2)
    m = random_mrf(rng, [f"v{i}" for i in range(6)], n_factors=6, max_scope=3)
    marg = exact_marginals(m)
    want = brute_force_marginals(m)
    for v in m.variables:
        assert marg[v] == pytest.approx(want[v], rel=1e-10)
    # relabel variables; marginals follow the relabeling
    rename = {v: f"w{i}" for i, v in enumerate(m.variables)}
    m2 = Mrf(
        [rename[v] for v in m.variables],
        [Factor(tuple(rename[v] for v in f.scope), f.table) for f in m.factors],
    )
    marg2 = exact_marginals(m2)
    for v in m.variables:
        assert marg2[rename[v]] == pytest.approx(marg[v], rel=1e-12)


def unary_chain_net():
    return Network(
        nodes=[Node("s", 0.0), Node("a", 1.0)],
        edges=[Edge("sa", "s", "a", stochastic=True)],
        sources=["s"],
        actions=[ProtectionAction("p", frozenset(["sa"]), 1.0)],
    )


def test_exact_policy_value_trivial():
    net = unary_chain_net()
    m = Mrf(["sa"], [Factor(("sa",), (1.0, 3.0))])
    assert exact_policy_value(m, net, Policy.empty()) == pytest.approx(0.75)
    assert exact_policy_value(m, net, Policy.of("p")) == pytest.approx(1.0)


def test_exact_policy_value_enumeration_and_gibbs():
    rng = np.random.default_rng(3)
    net = random_network(rng, n_nodes=4, n_edges=9, n_stoch=3, n_sources=1)
    m = random_mrf(rng, net.stochastic_edges, n_factors=2, max_scope=3)
    pol = Policy(frozenset([net.actions[0].id]))
    got = exact_policy_value(m, net, pol)
    want = brute_force_policy_value(m, net, pol)
    assert got == pytest.approx(want, rel=1e-12)

    # cross-check the expectation against a long Gibbs run
    masks = gibbs_sample_masks(m, GibbsConfig(burn_in=500, thinning=2, seed=9), 100_000)
    comp = net.compiled(m.variables)
    prot = comp.protection_mask(pol)
    vals = comp.reach_many(masks.astype(np.uint64), prot)
    se = float(np.std(vals, ddof=1) / math.sqrt(len(vals)))
    assert abs(float(np.mean(vals)) - got) <= 3 * se + 1e-9


def test_scale_invariance():
    rng = np.random.default_rng(4)
    net = random_network(rng, n_nodes=5, n_edges=12, n_stoch=4)
    m = random_mrf(rng, net.stochastic_edges, n_factors=3, max_scope=2)
    c = 37.5
    scaled = Mrf(
        m.variables,
        [Factor(m.factors[0].scope, tuple(x * c for x in m.factors[0].table))]
        + list(m.factors[1:]),
    )
    assert partition_function(scaled) == pytest.approx(c * partition_function(m), rel=1e-9)
    for v in m.variables:
        assert exact_marginals(scaled)[v] == pytest.approx(exact_marginals(m)[v], rel=1e-9)
    pol = Policy(frozenset([net.actions[0].id]))
    assert exact_policy_value(scaled, net, pol) == pytest.approx(
        exact_policy_value(m, net, pol), rel=1e-9
    )


def test_policy_value_monotone_and_bounded():
    rng = np.random.default_rng(5)
    net = random_network(rng, n_nodes=6, n_edges=14, n_stoch=4)
    m = random_mrf(rng, net.stochastic_edges, n_factors=3)
    vals = []
    ids = [a.id for a in net.actions]
    for k in range(len(ids) + 1):
        vals.append(exact_policy_value(m, net, Policy(frozenset(ids[:k]))))
    assert all(b >= a - 1e-9 for a, b in zip(vals, vals[1:]))
    bound = len(net.sources) * net.total_weight()
    assert all(v <= bound + 1e-9 for v in vals)


def test_fully_protected_equals_all_present():
    rng = np.random.default_rng(6)
    base = random_network(rng, n_nodes=6, n_edges=14, n_stoch=4, n_actions=0)
    net = Network(
        base.nodes,
        base.edges,
        base.sources,
        [
            ProtectionAction(f"a{j}", frozenset([e]), 1.0)
            for j, e in enumerate(base.stochastic_edges)
        ],
    )
    m = random_mrf(rng, net.stochastic_edges)
    full = Policy(frozenset(a.id for a in net.actions))
    all_present = Scenario({e: 1 for e in net.stochastic_edges})
    assert exact_policy_value(m, net, full) == pytest.approx(
        reachable_weight(net, all_present, Policy.empty()), rel=1e-9
    )


def test_normalization():
    rng = np.random.default_rng(7)
    m = random_mrf(rng, [f"v{i}" for i in range(6)])
    dens = m.density_vector()
    assert float(np.sum(dens / np.sum(dens))) == pytest.approx(1.0, rel=1e-12)


def test_enumeration_cap():
    m = Mrf([f"v{i}" for i in range(26)], [])
    with pytest.raises(EnumerationCapError):
        partition_function(m)
    with pytest.raises(EnumerationCapError):
        exact_marginals(m)
    # configurable cap
    m2 = Mrf([f"v{i}" for i in range(6)], [])
    with pytest.raises(EnumerationCapError):
        partition_function(m2, cap=5)


def test_factor_validation():
    with pytest.raises(ValidationError):
        Factor(("a",), (1.0,))  # wrong table size
    with pytest.raises(ValidationError):
        Factor(("a",), (-1.0, 1.0))
    with pytest.raises(ValidationError):
        Factor(("a",), (0.0, 0.0))
    with pytest.raises(ValidationError):
        Factor(("a", "a"), (1.0, 1.0, 1.0, 1.0))
    with pytest.raises(ValidationError):
        Mrf(["a"], [Factor(("b",), (1.0, 1.0))])


def test_variable_mismatch_errors():
    net = unary_chain_net()
    m = Mrf(["other"], [Factor(("other",), (1.0, 1.0))])
    with pytest.raises(ValidationError):
        exact_policy_value(m, net, Policy.empty())
    m2 = Mrf(["sa"], [Factor(("sa",), (1.0, 1.0))])
    with pytest.raises(ValidationError):
        unnormalized_density(m2, Scenario({"sa": 1, "zz": 0}))


def test_implicit_uniform_unary():
    m = Mrf(["a", "b"], [Factor(("a",), (1.0, 2.0))])
    # b got a uniform factor: marginal 0.5, density independent of b
    assert exact_marginals(m)["b"] == pytest.approx(0.5)
    assert unnormalized_density(m, Scenario({"a": 1, "b": 0})) == pytest.approx(2.0)


def test_json_roundtrip(tmp_path):
    rng = np.random.default_rng(8)
    m = random_mrf(rng, ["x", "y", "z"], n_factors=3)
    doc = m.to_json_dict()
    assert set(doc) == {"variables", "factors"}
    again = Mrf.from_json_dict(doc)
    assert again.to_json_dict() == doc
    p = tmp_path / "m.json"
    m.save(p, metadata={"seed": 8})
    loaded = Mrf.load(p)
    assert loaded.to_json_dict() == doc


def test_table_index_convention():
    # scope bit j of the index is scope[j], least significant first
    f = Factor(("a", "b"), (10.0, 11.0, 12.0, 13.0))
    m = Mrf(["a", "b"], [f])
    assert unnormalized_density(m, Scenario({"a": 1, "b": 0})) == 11.0
    assert unnormalized_density(m, Scenario({"a": 0, "b": 1})) == 12.0
