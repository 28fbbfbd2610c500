"""Command line interface.

Subcommands: generate (synthetic network + failure model), sample (draw
scenarios to a file), solve (SAA over a scenario file), export-mip (LP text),
experiment (full sweep from a config file).
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .generate import DisasterModel, generate_disaster_mrf, generate_network, large_preset, small_preset
from .harness import ExperimentConfig, draw_scenarios, run_experiment
from .lp_export import export_mip_lp
from .mrf import Mrf
from .network import Network
from .saa import SaaInstance, solve_exact, solve_greedy
from .scenario_io import read_scenarios, write_scenarios


def _add_generate(sub):
    p = sub.add_parser("generate", help="generate a synthetic network and failure model")
    p.add_argument("--preset", choices=["small", "large"], help="paper-shaped size preset")
    p.add_argument("--nodes", type=int, default=60)
    p.add_argument("--density", type=float, default=2.0, help="neighbours per node")
    p.add_argument("--crossing-fraction", type=float, default=0.05)
    p.add_argument("--sources", type=int, default=2)
    p.add_argument("--centers", type=int, default=3)
    p.add_argument("--radius-min", type=float, default=0.1)
    p.add_argument("--radius-max", type=float, default=0.25)
    p.add_argument("--fail-prob", type=float, default=0.1)
    p.add_argument("--strength", choices=["strong", "weak"], default="strong")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-network", required=True)
    p.add_argument("--out-mrf", required=True)
    p.set_defaults(func=_cmd_generate)


def _cmd_generate(args):
    params = dict(
        node_count=args.nodes,
        edge_density=args.density,
        crossing_fraction=args.crossing_fraction,
        source_count=args.sources,
    )
    if args.preset:
        params = small_preset() if args.preset == "small" else large_preset()
    net = generate_network(seed=args.seed, **params)
    model = DisasterModel(
        center_count=args.centers,
        radius_range=(args.radius_min, args.radius_max),
        unary_fail_prob=args.fail_prob,
        strength=args.strength,
    )
    mrf, regions = generate_disaster_mrf(net, model, args.seed)
    meta = {
        "seed": args.seed,
        "network_params": params,
        "disaster_model": {
            "center_count": model.center_count,
            "radius_range": list(model.radius_range),
            "unary_fail_prob": model.unary_fail_prob,
            "strength": model.strength,
            "coupling": model.coupling,
            "region_scope_cap": model.region_scope_cap,
        },
        "regions": [list(m) for m in regions.members],
        "version": __version__,
    }
    doc = net.to_json_dict()
    doc["metadata"] = meta
    with open(args.out_network, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    mrf.save(args.out_mrf, metadata=meta)
    print(
        f"wrote {args.out_network} ({len(net.nodes)} nodes, {len(net.edges)} edges, "
        f"{len(net.stochastic_edges)} stochastic) and {args.out_mrf} "
        f"({len(mrf.factors)} factors)"
    )


def _add_sample(sub):
    p = sub.add_parser("sample", help="draw scenario samples from a failure model")
    p.add_argument("--mrf", required=True)
    p.add_argument("--sampler", choices=["gibbs", "xor"], default="xor")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--burn-in", type=int, default=1000)
    p.add_argument("--thinning", type=int, default=10)
    p.add_argument("--max-retries", type=int, default=200)
    p.add_argument("--p0", type=float, help="slice lower bound (xor, above the enumeration cap)")
    p.add_argument("--pmax", type=float, help="slice upper bound (xor)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sample)


def _cmd_sample(args):
    mrf = Mrf.load(args.mrf)
    bounds = None
    if args.p0 is not None or args.pmax is not None:
        if args.p0 is None or args.pmax is None:
            raise SystemExit("--p0 and --pmax must be given together")
        bounds = (args.p0, args.pmax)
    scen = draw_scenarios(
        mrf,
        args.sampler,
        args.n,
        args.seed,
        burn_in=args.burn_in,
        thinning=args.thinning,
        max_retries=args.max_retries,
        slice_bounds=bounds,
    )
    header = {"sampler": args.sampler, "seed": args.seed, "n": args.n}
    if args.sampler == "gibbs":
        header.update({"burn_in": args.burn_in, "thinning": args.thinning})
    write_scenarios(args.out, scen, mrf.variables, header)
    print(f"wrote {args.n} scenarios to {args.out}")


def _add_solve(sub):
    p = sub.add_parser("solve", help="optimize a protection policy over sampled scenarios")
    p.add_argument("--network", required=True)
    p.add_argument("--scenarios", required=True)
    p.add_argument("--budget", type=float, required=True)
    p.add_argument("--solver", choices=["exact", "greedy"], default="exact")
    p.add_argument("--seed", type=int, default=0, help="recorded in the output only")
    p.add_argument("--out", help="write the result JSON here instead of stdout")
    p.set_defaults(func=_cmd_solve)


def _cmd_solve(args):
    net = Network.load(args.network)
    scen, _header = read_scenarios(args.scenarios)
    inst = SaaInstance(net, scen, args.budget)
    solved = solve_exact(inst) if args.solver == "exact" else solve_greedy(inst)
    doc = {
        "policy": sorted(solved.policy.action_ids),
        "objective": solved.objective,
        "upper_bound": solved.upper_bound,
        "nodes_explored": solved.nodes_explored,
        "proven_optimal": solved.proven_optimal,
        "solver": args.solver,
        "budget": args.budget,
        "n_scenarios": len(scen),
        "seed": args.seed,
    }
    text = json.dumps(doc, indent=1) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _add_export(sub):
    p = sub.add_parser("export-mip", help="write the LP-format MIP of an SAA instance")
    p.add_argument("--network", required=True)
    p.add_argument("--scenarios", required=True)
    p.add_argument("--budget", type=float, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_export)


def _cmd_export(args):
    net = Network.load(args.network)
    scen, _header = read_scenarios(args.scenarios)
    inst = SaaInstance(net, scen, args.budget)
    text = export_mip_lp(
        inst,
        comment=f"netprotect {__version__}: N={len(scen)} sources={len(net.sources)} "
        f"budget={args.budget}",
    )
    with open(args.out, "w") as fh:
        fh.write(text)
    print(f"wrote {args.out}")


def _add_experiment(sub):
    p = sub.add_parser("experiment", help="run a sampler/sample-size/budget sweep")
    p.add_argument("--config", required=True, help="JSON or TOML experiment config")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_experiment)


def _cmd_experiment(args):
    config = ExperimentConfig.from_file(args.config)
    result = run_experiment(config, out_dir=args.out_dir)
    failures = sum(1 for r in result.rows if r.error_code)
    print(
        f"wrote {args.out_dir}/results.csv ({len(result.rows)} rows, "
        f"{failures} failed), results.svg, manifest.json"
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="netprotect",
        description="stochastic network protection under correlated failures",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(required=True)
    _add_generate(sub)
    _add_sample(sub)
    _add_solve(sub)
    _add_export(sub)
    _add_experiment(sub)
    args = parser.parse_args(argv)
    args.func(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
