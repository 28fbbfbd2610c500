"""Benchmark the compiled kernels against the pure-Python fallback.

Times the two hot paths on a mid-size synthetic instance: reachability over a
batch of scenario masks (the SAA / exact-evaluation workhorse) and Gibbs
sweeps. Run:

    python benchmarks/bench_kernels.py [--quick]
"""

import argparse
import time

import numpy as np

from netprotect._kernels import pure
from netprotect.generate import DisasterModel, generate_disaster_mrf, generate_network

try:
    from netprotect._kernels import _fast
except ImportError:
    _fast = None


def time_call(fn, *args, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true", help="smaller workload")
    args = parser.parse_args()

    n_masks = 2_000 if args.quick else 50_000
    n_sweeps = 300 if args.quick else 5_000

    net = generate_network(node_count=120, edge_density=3, crossing_fraction=0.05,
                           source_count=3, seed=7)
    model = DisasterModel(center_count=3, radius_range=(0.15, 0.3),
                          unary_fail_prob=0.3)
    mrf, _ = generate_disaster_mrf(net, model, seed=8)
    comp = net.compiled(mrf.variables)
    n_stoch = len(net.stochastic_edges)
    rng = np.random.default_rng(0)
    masks = rng.integers(0, 1 << n_stoch, size=n_masks, dtype=np.uint64)
    out = np.empty(n_masks)

    print(f"instance: {len(net.nodes)} nodes, {len(net.edges)} edges, "
          f"{n_stoch} stochastic, {len(net.sources)} sources")
    print(f"workload: {n_masks} reachability masks, {n_sweeps} gibbs sweeps\n")
    print(f"{'kernel':8} {'reach_masks':>12} {'gibbs_sweeps':>13}")

    impls = [("pure", pure)] + ([("cython", _fast)] if _fast else [])
    times = {}
    for name, impl in impls:
        t_reach = time_call(
            impl.reach_weight_masks,
            comp.n_nodes, comp.indptr, comp.nbr_node, comp.nbr_edge,
            comp.base_present, comp.stoch_edge_pos, masks, np.uint64(0),
            comp.weights, comp.sources, out,
        )
        ct = mrf.compiled_tables()
        state = np.ones(mrf.n_vars, dtype=np.uint8)
        uniforms = np.random.default_rng(1).random(n_sweeps * mrf.n_vars)
        t_gibbs = time_call(
            impl.gibbs_sweeps,
            state, ct.var_fac_ptr, ct.var_fac_idx, ct.var_fac_pos,
            ct.fac_scope_ptr, ct.fac_scope_var, ct.fac_tab_ptr, ct.tables, uniforms,
        )
        times[name] = (t_reach, t_gibbs)
        print(f"{name:8} {t_reach * 1e3:10.1f}ms {t_gibbs * 1e3:11.1f}ms")

    if "cython" in times:
        pr, pg = times["pure"]
        cr, cg = times["cython"]
        print(f"\nspeedup: reach_masks x{pr / cr:.0f}, gibbs_sweeps x{pg / cg:.0f}")
    else:
        print("\ncompiled kernels not built; showing pure only")


if __name__ == "__main__":
    main()
